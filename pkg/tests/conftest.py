import numpy as np
import pytest

from panelcurve.panel import design_from_arrays


def make_panel(rng, n_ent, T, beta, alpha_sd=1.0, noise_sd=1.0, unbalanced=False,
               intercept=True, names=None, corr=0.3):
    """Random panel design with entity effects; returns (design, alpha)."""
    k = len(beta)
    sizes = rng.integers(3, T + 1, n_ent) if unbalanced else np.full(n_ent, T)
    alpha = rng.normal(0.0, alpha_sd, n_ent)
    ent, X, y = [], [], []
    for i, Ti in enumerate(sizes):
        Xi = rng.normal(size=(Ti, k)) + corr * alpha[i]
        X.append(Xi)
        y.append(alpha[i] + Xi @ beta + rng.normal(0.0, noise_sd, Ti))
        ent += [f"E{i:02d}"] * Ti
    X = np.vstack(X)
    names = names or [f"x{j}" for j in range(k)]
    if intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
        names = ["const"] + list(names)
    return design_from_arrays(np.concatenate(y), X, names, ent), alpha


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
