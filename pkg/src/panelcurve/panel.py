"""Panel data model, CSV ingestion, series transforms and design matrices.

Series live on an entity x period grid (``float64``, ``NaN`` marks a hole).
All transforms act along the period axis, so lags and differences never
leak across entity boundaries.
"""
import csv
import io
import re
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, IngestionError, SpecificationError

SCHEMA = ("entity", "period", "cpi", "expected_cpi", "unemployment", "gdp_growth")
VARIABLES = SCHEMA[2:]

_QUARTER = re.compile(r"^(\d{4})Q([1-4])$")


# -- quarters ---------------------------------------------------------------

def parse_quarter(text):
    """``"1980Q2"`` -> ``(1980, 2)``."""
    m = _QUARTER.match(text.strip())
    if m is None:
        raise ValueError(f"not a quarter: {text!r}")
    return int(m.group(1)), int(m.group(2))


def quarter_ordinal(text):
    year, q = parse_quarter(text)
    return year * 4 + (q - 1)


def format_quarter(ordinal):
    return f"{ordinal // 4}Q{ordinal % 4 + 1}"


def quarter_range(first, last):
    a, b = quarter_ordinal(first), quarter_ordinal(last)
    return tuple(format_quarter(o) for o in range(a, b + 1))


# -- dataset ----------------------------------------------------------------

@dataclass(frozen=True)
class PanelDataset:
    """Immutable entity x period table of named series.

    ``series[name]`` has shape ``(len(entities), len(periods))``; missing
    observations are explicit ``NaN`` holes.
    """

    entities: tuple
    periods: tuple
    series: dict
    balanced: bool = field(default=None)

    def __post_init__(self):
        shape = (len(self.entities), len(self.periods))
        frozen = {}
        for name, grid in self.series.items():
            arr = np.array(grid, dtype=np.float64)
            if arr.shape != shape:
                raise ValueError(f"series {name!r} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            frozen[name] = arr
        object.__setattr__(self, "series", frozen)
        ords = [quarter_ordinal(p) for p in self.periods]
        if any(b - a != 1 for a, b in zip(ords, ords[1:])):
            raise ValueError("periods must be strictly increasing, gap-free quarters")
        if self.balanced is None:
            object.__setattr__(self, "balanced", self.is_balanced())

    @property
    def shape(self):
        return len(self.entities), len(self.periods)

    def __getitem__(self, name):
        try:
            return self.series[name]
        except KeyError:
            raise KeyError(f"unknown series {name!r}") from None

    def is_balanced(self, names=None):
        names = self.series if names is None else names
        return all(not np.isnan(self.series[n]).any() for n in names)

    def with_series(self, **grids):
        """Return a copy with extra (or replaced) series."""
        merged = dict(self.series)
        merged.update(grids)
        return PanelDataset(self.entities, self.periods, merged, balanced=self.balanced)

    def entity_index(self, code):
        return self.entities.index(code)

    def equals(self, other):
        """Bitwise equality of labels, values and hole patterns."""
        if (self.entities, self.periods) != (other.entities, other.periods):
            return False
        if set(self.series) != set(other.series) or self.balanced != other.balanced:
            return False
        return all(
            np.array_equal(self.series[n].view(np.uint64), other.series[n].view(np.uint64))
            for n in self.series
        )


def _open_text(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"))
    if isinstance(source, str):
        return open(source, newline="", encoding="utf-8-sig")
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8-sig")
        return io.StringIO(data)
    return open(source, newline="", encoding="utf-8-sig")


def ingest_csv(source):
    """Read the panel CSV schema into a :class:`PanelDataset`.

    ``source`` may be raw bytes, a path, or a file object.  Entities come out
    sorted; the period axis spans the earliest to the latest quarter seen.
    """
    with _open_text(source) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError("empty input: header row required") from None
        header = [h.strip() for h in header]
        if tuple(header) != SCHEMA:
            raise IngestionError(
                f"line 1: malformed header {','.join(header)!r}; expected {','.join(SCHEMA)!r}"
            )
        records = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(SCHEMA):
                raise IngestionError(f"line {lineno}: expected {len(SCHEMA)} fields, got {len(row)}")
            entity = row[0].strip()
            if not entity:
                raise IngestionError(f"line {lineno}, column 'entity': empty entity code")
            try:
                period = quarter_ordinal(row[1])
            except ValueError:
                raise IngestionError(
                    f"line {lineno}, column 'period': unparseable quarter {row[1]!r}"
                ) from None
            if (entity, period) in records:
                raise IngestionError(
                    f"line {lineno}: duplicate row for entity {entity!r}, period {row[1].strip()!r}"
                )
            values = []
            for col, cell in zip(VARIABLES, row[2:]):
                cell = cell.strip()
                if cell == "":
                    values.append(np.nan)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestionError(
                        f"line {lineno}, column {col!r}: non-numeric value {cell!r}"
                    ) from None
                if not np.isfinite(v):
                    raise IngestionError(f"line {lineno}, column {col!r}: non-finite value {cell!r}")
                values.append(v)
            records[(entity, period)] = values
    if not records:
        raise IngestionError("no data rows")
    entities = tuple(sorted({e for e, _ in records}))
    lo = min(p for _, p in records)
    hi = max(p for _, p in records)
    periods = tuple(format_quarter(o) for o in range(lo, hi + 1))
    grids = {v: np.full((len(entities), len(periods)), np.nan) for v in VARIABLES}
    row_of = {e: i for i, e in enumerate(entities)}
    for (entity, period), values in records.items():
        i, j = row_of[entity], period - lo
        for v, x in zip(VARIABLES, values):
            grids[v][i, j] = x
    return PanelDataset(entities, periods, grids)


def to_csv(data):
    """Render the schema columns of ``data`` as CSV bytes (lossless floats)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCHEMA)
    grids = [data.series.get(v) for v in VARIABLES]
    for i, e in enumerate(data.entities):
        for j, p in enumerate(data.periods):
            cells = []
            for g in grids:
                x = np.nan if g is None else g[i, j]
                cells.append("" if np.isnan(x) else repr(float(x)))
            w.writerow([e, p, *cells])
    return buf.getvalue().encode("utf-8")


# -- transforms -------------------------------------------------------------

def log_shift(x, c):
    """``ln(x + c)``; holes pass through.  Raises DomainError if ``x + c <= 0``."""
    arr = np.asarray(x, dtype=np.float64)
    shifted = arr + c
    bad = shifted <= 0
    if np.any(bad):
        worst = float(np.min(shifted[bad]))
        raise DomainError(f"log_shift: x + c must be > 0 (got {worst!r} with c={c!r})")
    out = np.log(shifted)
    return float(out) if out.ndim == 0 else out


def shift_constant(values):
    """Default log-shift constant: ``max(0, -min) + 1`` over the non-hole values."""
    arr = np.asarray(values, dtype=np.float64)
    if np.isnan(arr).all():
        return 1.0
    return max(0.0, -float(np.nanmin(arr))) + 1.0


def first_diff(series):
    """Difference along the period axis; the first element per entity is a hole."""
    arr = np.asarray(series, dtype=np.float64)
    out = np.full(arr.shape, np.nan)
    out[..., 1:] = arr[..., 1:] - arr[..., :-1]
    return out


def shift(series, k):
    """Lag (``k > 0``) or lead (``k < 0``) along the period axis, filling with holes."""
    arr = np.asarray(series, dtype=np.float64)
    n = arr.shape[-1]
    out = np.full(arr.shape, np.nan)
    if abs(k) >= n:
        warnings.warn(f"shift by {k} on length-{n} series leaves only holes", stacklevel=2)
        return out
    if k > 0:
        out[..., k:] = arr[..., :-k]
    elif k < 0:
        out[..., :k] = arr[..., -k:]
    else:
        out[...] = arr
    return out


@dataclass(frozen=True)
class SeriesRef:
    """A named series plus a left-to-right transform chain.

    Chain steps: ``("log_shift", c)`` (``c=None`` picks :func:`shift_constant`
    at evaluation time), ``("diff",)``, ``("shift", k)``.
    """

    name: str
    transforms: tuple = ()
    alias: Optional[str] = None

    def _then(self, step):
        return SeriesRef(self.name, self.transforms + (step,), self.alias)

    def log_shift(self, c=None):
        return self._then(("log_shift", c))

    def diff(self):
        return self._then(("diff",))

    def lag(self, k=1):
        return self._then(("shift", int(k)))

    def lead(self, k=1):
        return self._then(("shift", -int(k)))

    def named(self, alias):
        return SeriesRef(self.name, self.transforms, alias)

    @property
    def label(self):
        if self.alias:
            return self.alias
        text = self.name
        for step in self.transforms:
            if step[0] == "log_shift":
                text = f"log({text}+{'auto' if step[1] is None else format(step[1], 'g')})"
            elif step[0] == "diff":
                text = f"d.{text}"
            else:
                k = step[1]
                text = f"L{k}.{text}" if k >= 0 else f"F{-k}.{text}"
        return text

    def evaluate(self, data):
        grid = np.array(data[self.name])
        for step in self.transforms:
            op = step[0]
            if op == "log_shift":
                c = shift_constant(grid) if step[1] is None else step[1]
                grid = log_shift(grid, c)
            elif op == "diff":
                grid = first_diff(grid)
            elif op == "shift":
                grid = shift(grid, step[1])
            else:
                raise SpecificationError(f"unknown transform {op!r} on {self.name!r}")
        return grid


# -- regime dummy -----------------------------------------------------------

RECESSION_RULES = ("nonpositive", "negative")


@dataclass(frozen=True)
class RegimeDummy:
    values: np.ndarray
    source: str
    rule: str


def recession_dummy(growth, rule="nonpositive", source="gdp_growth"):
    """1 in recession quarters, 0 otherwise, holes where growth is missing.

    ``nonpositive`` marks growth <= 0 (every non-growing quarter);
    ``negative`` marks only growth < 0.
    """
    if rule not in RECESSION_RULES:
        raise ValueError(f"recession rule must be one of {RECESSION_RULES}, got {rule!r}")
    g = np.asarray(growth, dtype=np.float64)
    hit = g <= 0 if rule == "nonpositive" else g < 0
    values = np.where(np.isnan(g), np.nan, hit.astype(np.float64))
    return RegimeDummy(values, source, rule)


# -- model specification ----------------------------------------------------

EFFECTS = ("pooled", "fixed", "twoway", "random")
EXPECTED_COLUMN = "expected_cpi"


@dataclass(frozen=True)
class ModelSpec:
    """Declarative regression: regressand, regressors, dummy interactions, effects.

    ``interactions`` holds ``(regressor_index, dummy_series_name)`` pairs; each
    yields a column equal to the regressor times the dummy.
    """

    regressand: SeriesRef
    regressors: tuple
    interactions: tuple = ()
    effects: str = "pooled"
    intercept: bool = True
    expectation: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "interactions", tuple(tuple(p) for p in self.interactions))
        if self.effects not in EFFECTS:
            raise SpecificationError(f"effects must be one of {EFFECTS}, got {self.effects!r}")
        if not self.regressors:
            raise SpecificationError("at least one regressor is required")
        for idx, dummy in self.interactions:
            if not 0 <= idx < len(self.regressors):
                raise SpecificationError(f"interaction index {idx} does not reference a regressor")
        if self.expectation not in (None, "backward", "forward"):
            raise SpecificationError(f"unknown expectation mode {self.expectation!r}")
        if self.expectation == "backward" and self.regressors[0].name == EXPECTED_COLUMN:
            raise SpecificationError(
                "backward-looking spec cannot use the expected-inflation column as pi^e"
            )

    def with_effects(self, effects):
        return ModelSpec(self.regressand, self.regressors, self.interactions,
                         effects, self.intercept, self.expectation)

    @property
    def column_names(self):
        names = ["const"] if self.intercept else []
        names += [r.label for r in self.regressors]
        names += [f"{self.regressors[i].label}:{d}" for i, d in self.interactions]
        return names


def phillips_spec(mode, effects="pooled", cpi_shift=None, dummy="recession",
                  gap="ugap"):
    """Expectation-augmented Phillips curve with regime interactions.

    inflation ~ const + pi_e + gap + pi_e:dummy + gap:dummy, where inflation
    is the first difference of log-shifted CPI and pi_e is either lagged
    inflation (``backward``) or the expected-inflation column (``forward``).
    """
    infl = SeriesRef("cpi").log_shift(cpi_shift).diff().named("inflation")
    if mode == "backward":
        pi_e = SeriesRef("cpi").log_shift(cpi_shift).diff().lag(1).named("pi_e")
    elif mode == "forward":
        pi_e = SeriesRef(EXPECTED_COLUMN).named("pi_e")
    else:
        raise SpecificationError(f"expectation mode must be backward or forward, got {mode!r}")
    return ModelSpec(
        regressand=infl,
        regressors=(pi_e, SeriesRef(gap).named("ugap")),
        interactions=((0, dummy), (1, dummy)),
        effects=effects,
        intercept=True,
        expectation=mode,
    )


@dataclass(frozen=True)
class DesignMatrix:
    """Realized regression data, rows grouped by entity and time-ordered."""

    entity: np.ndarray        # entity code per row
    period: np.ndarray        # period label per row
    y: np.ndarray
    X: np.ndarray
    columns: tuple
    response: str
    entities: tuple           # entities with >= 1 row, in row order
    group_starts: np.ndarray  # row offsets, len(entities) + 1
    dropped: dict             # entity -> number of periods dropped
    intercept: bool

    @property
    def n_obs(self):
        return self.y.shape[0]

    @property
    def n_entities(self):
        return len(self.entities)

    @property
    def group_sizes(self):
        return np.diff(self.group_starts)

    @property
    def slope_columns(self):
        return tuple(c for c in self.columns if c != "const")

    def column(self, name):
        return self.X[:, self.columns.index(name)]


def build_design(spec, data):
    """Evaluate the spec on ``data`` and drop every row that holds a hole."""
    y_grid = spec.regressand.evaluate(data)
    reg_grids = [r.evaluate(data) for r in spec.regressors]
    grids = list(reg_grids)
    for idx, dummy in spec.interactions:
        grids.append(reg_grids[idx] * np.asarray(data[dummy], dtype=np.float64))
    if spec.intercept:
        grids.insert(0, np.ones(data.shape))
    columns = tuple(spec.column_names)

    stacked = np.stack([y_grid] + grids, axis=-1)       # (n_ent, n_per, 1 + k)
    usable = np.isfinite(stacked).all(axis=-1)          # (n_ent, n_per)
    counts = usable.sum(axis=1)
    if counts.max(initial=0) < 2:
        raise SpecificationError("no entity contributes two or more usable rows")

    rows = stacked[usable]                              # entity-major, time-ordered
    ent_idx, per_idx = np.nonzero(usable)
    entity = np.asarray(data.entities, dtype=object)[ent_idx]
    period = np.asarray(data.periods, dtype=object)[per_idx]
    present = tuple(e for e, c in zip(data.entities, counts) if c > 0)
    starts = np.concatenate([[0], np.cumsum(counts[counts > 0])]).astype(np.int64)
    dropped = {e: int(len(data.periods) - c) for e, c in zip(data.entities, counts)}

    X = np.ascontiguousarray(rows[:, 1:])
    for a in range(X.shape[1]):
        for b in range(a + 1, X.shape[1]):
            if np.array_equal(X[:, a], X[:, b]):
                raise SpecificationError(
                    f"column {columns[b]!r} duplicates column {columns[a]!r}"
                )
    return DesignMatrix(
        entity=entity,
        period=period,
        y=np.ascontiguousarray(rows[:, 0]),
        X=X,
        columns=columns,
        response=spec.regressand.label,
        entities=present,
        group_starts=starts,
        dropped=dropped,
        intercept=spec.intercept,
    )


def design_from_arrays(y, X, columns, entity, period=None, intercept=None):
    """Assemble a :class:`DesignMatrix` from row arrays (rows sorted by entity)."""
    entity = np.asarray(entity, dtype=object)
    n = entity.shape[0]
    change = np.flatnonzero(entity[1:] != entity[:-1]) + 1
    starts = np.concatenate([[0], change, [n]]).astype(np.int64)
    ents = tuple(entity[starts[:-1]])
    if len(set(ents)) != len(ents):
        raise SpecificationError("rows must be grouped by entity")
    columns = tuple(columns)
    if period is None:
        period = np.concatenate([np.arange(s) for s in np.diff(starts)]).astype(object)
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64).reshape(n, -1))
    return DesignMatrix(
        entity=entity,
        period=np.asarray(period, dtype=object),
        y=np.ascontiguousarray(np.asarray(y, dtype=np.float64)),
        X=X,
        columns=columns,
        response="y",
        entities=ents,
        group_starts=starts,
        dropped={e: 0 for e in ents},
        intercept=("const" in columns) if intercept is None else intercept,
    )


def contiguous_span(values: Sequence[float]):
    """(start, stop) of the hole-free span after trimming leading/trailing holes.

    Raises DomainError on an interior hole; returns ``(0, 0)`` if all holes.
    """
    ok = ~np.isnan(np.asarray(values, dtype=np.float64))
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return 0, 0
    a, b = int(idx[0]), int(idx[-1]) + 1
    if not ok[a:b].all():
        raise DomainError("interior hole inside the series span")
    return a, b
