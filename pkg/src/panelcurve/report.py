"""Render an AnalysisReport as fixed-width text, tidy CSV or JSON."""
import csv
import io
import json
import math

FORMATS = ("text", "csv", "json")
STAR_LEVELS = ((0.01, "***"), (0.05, "**"), (0.10, "*"))
MODEL_ORDER = ("Pooled", "Fixed", "Random")


def _models(block):
    """Model entries in display order, whatever order the mapping holds."""
    return sorted(block.items(), key=lambda kv: MODEL_ORDER.index(kv[0]))


def stars(p):
    if p is None or not math.isfinite(p):
        return ""
    for level, mark in STAR_LEVELS:
        if p < level:
            return mark
    return ""


def fmt(x, digits=4):
    if x is None:
        return "-"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        return "n/a"
    s = f"{x:.{digits}f}"
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s


def cell(est, se, p):
    return f"{fmt(est)}{stars(p)} ({fmt(se)})"


def _table(header, rows):
    cols = list(zip(*([header] + rows))) if rows else [[h] for h in header]
    widths = [max(len(str(v)) for v in col) for col in cols]
    out = []
    for r in [header] + rows:
        out.append("  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip())
    rule = "-" * len(out[0]) if out else ""
    return [out[0], rule] + out[1:]


# -- text -------------------------------------------------------------------------

def _text_provenance(prov):
    cfg = prov["config"]
    tr = prov["transforms"]
    data = prov["data"]
    lines = [
        f"Report generated by {prov['software']}",
        f"Input: {cfg.get('input') or '-'}  sha256: {prov.get('input_sha256') or '-'}",
        f"Panel: {data['entities']} entities, {data['periods']} periods "
        f"({data['first_period']} to {data['last_period']}), "
        f"{'balanced' if data['balanced'] else 'unbalanced'}",
        f"Transforms: log shift c(CPI) = {fmt(tr['cpi_shift'])}, "
        f"c(U) = {fmt(tr['unemployment_shift'])}, HP lambda = {fmt(tr['hp_lambda'], 1)}, "
        f"NAIRU from {tr['nairu_source']}, recession rule = {tr['recession_rule']}",
    ]
    if prov.get("timestamp"):
        lines.append(f"Generated at: {prov['timestamp']}")
    lines.append("Config:")
    width = max(len(k) for k in cfg)
    for k in sorted(cfg):
        v = cfg[k]
        v = ",".join(v) if isinstance(v, list) else fmt(v) if isinstance(v, (float, bool)) else v
        lines.append(f"  {k:<{width}} = {'-' if v is None else v}")
    return lines


def _unit_root_cell(c):
    if "error" in c:
        return "n/a"
    order = f"L:{c['lag']}" if c["kind"] == "ADF" else f"B:{c['bandwidth']}"
    return f"{fmt(c['pvalue'])} ({order} N:{c['nobs']})"


def _text_unit_root(sec):
    tests, variables = sec["tests"], sec["variables"]
    header = ["Entity"] + [f"{t} {v}" for t in tests for v in variables]
    rows = [[r["entity"]] + [_unit_root_cell(r["cells"][v][t]) for t in tests for v in variables]
            for r in sec["rows"]]
    lines = ["Unit root tests, intercept case: p-value (L: ADF lag by SIC, "
             f"max {sec['max_lag']}; B: PP bandwidth; N: observations)"]
    return lines + _table(header, rows)


def _text_spec_tests(sec):
    keys = ("redundant_fe", "redundant_fe_chi2", "breusch_pagan", "honda", "hausman")
    names = ("Redundant FE (F)", "Redundant FE (chi2)", "Breusch-Pagan LM",
             "Honda LM", "Hausman")
    header = ["Model"] + list(names)
    rows, notes = [], []
    for mode in sorted(sec):
        rows.append([mode] + [f"{fmt(sec[mode][k]['statistic'])} ({fmt(sec[mode][k]['pvalue'])})"
                              for k in keys])
        dfs = ", ".join(f"{n} {sec[mode][k]['distribution']}"
                        f"({','.join(str(d) for d in sec[mode][k]['df'])})"
                        for k, n in zip(keys, names) if sec[mode][k]["df"])
        notes.append(f"  {mode} distributions: {dfs}, Honda N(0,1)")
        flags = sec[mode]["hausman"].get("flags")
        if flags:
            notes.append(f"  {mode} Hausman flags: {', '.join(sorted(flags))}")
    lines = ["Specification tests: statistic (p-value)"]
    return lines + _table(header, rows) + notes


def _text_model_choice(sec):
    lines = ["Model selection"]
    for mode in sorted(sec):
        c = sec[mode]
        lines.append(f"  {mode}: {c['selected']} (rule {c['row']}: {c['reason']}; "
                     f"level {fmt(c['level'], 2)})")
    return lines


def _estimate_columns(sec):
    return [(mode, model) for mode in sorted(sec) for model, _ in _models(sec[mode])]


def _text_estimates(sec):
    cols = _estimate_columns(sec)
    labels, seen = [], set()
    for mode, model in cols:
        for c in sec[mode][model]["coefficients"]:
            if c["name"] not in seen:
                seen.add(c["name"])
                labels.append((c["name"], c["label"]))
    header = ["Variables"] + [f"{mode} {model}" for mode, model in cols]
    rows = []
    for name, label in labels:
        row = [label]
        for mode, model in cols:
            coef = {c["name"]: c for c in sec[mode][model]["coefficients"]}.get(name)
            row.append(cell(coef["estimate"], coef["se"], coef["pvalue"]) if coef else "-")
        rows.append(row)

    def stat_row(label, get):
        rows.append([label] + [get(sec[mode][model]) for mode, model in cols])

    stat_row("Weighted R2", lambda b: fmt(b["r2_weighted"]) if b["effects"] == "random" else "-")
    stat_row("Unweighted R2", lambda b: fmt(b["r2_unweighted"]))
    stat_row("Panel Obs.", lambda b: str(b["nobs"]))
    stat_row("Entities", lambda b: str(b["n_entities"]))
    for key, label in (("u", "sigma_u"), ("e", "sigma_e")):
        stat_row(f"{label} (rho)", lambda b, key=key: (
            f"{fmt(b['variance_components'][f'sigma_{key}'])} "
            f"({fmt(b['variance_components'][f'rho_{key}'])})"
            if "variance_components" in b else "-"))
    kind = sec[cols[0][0]][cols[0][1]]["covariance"]
    white = sec[cols[0][0]][cols[0][1]]["white"]
    note = (f"Standard errors in parentheses ({'White ' + white.upper() if kind == 'white' else 'classical'}). "
            "*** p<0.01, ** p<0.05, * p<0.10; t distribution.")
    lines = ["Panel estimates: N = tranquil quarters, R = recession interaction"]
    return lines + _table(header, rows) + [note]


def _text_combined(sec):
    header = ["Model", "Term", "Tranquil", "Interaction", "Recession (se w/o cov)",
              "Recession (se with cov)"]
    rows = []
    for mode in sorted(sec):
        for model, terms in _models(sec[mode]):
            for t in terms:
                rows.append([
                    f"{mode} {model}",
                    t["term"],
                    cell(t["tranquil"], t["se_tranquil"], t["p_tranquil"]),
                    fmt(t["interaction"]),
                    cell(t["recession"], t["se_diag"], t["p_diag"]),
                    cell(t["recession"], t["se_full"], t["p_full"]),
                ])
    lines = ["Combined coefficients: recession = tranquil + interaction"]
    return lines + _table(header, rows) + [
        "Recession p-values use the standard normal; *** p<0.01, ** p<0.05, * p<0.10."]


TEXT_SECTIONS = (
    ("unit_root", _text_unit_root),
    ("spec_tests", _text_spec_tests),
    ("model_choice", _text_model_choice),
    ("estimates", _text_estimates),
    ("combined", _text_combined),
)


def render_text(report):
    blocks = [_text_provenance(report.provenance)]
    for name, fn in TEXT_SECTIONS:
        sec = getattr(report, name)
        if sec is not None:
            blocks.append(fn(sec))
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


# -- csv --------------------------------------------------------------------------

CSV_FIELDS = ("section", "mode", "model", "term", "estimate", "se", "statistic",
              "distribution", "df", "pvalue", "stars")


def _csv_rows(report):
    if report.unit_root:
        for r in report.unit_root["rows"]:
            for var in report.unit_root["variables"]:
                for kind in report.unit_root["tests"]:
                    c = r["cells"][var][kind]
                    if "error" in c:
                        continue
                    yield {"section": "unit_root", "model": kind, "term": f"{r['entity']}:{var}",
                           "statistic": c["statistic"], "distribution": "DF",
                           "df": c["nobs"], "pvalue": c["pvalue"]}
    if report.spec_tests:
        for mode, tests in sorted(report.spec_tests.items()):
            for t in tests.values():
                yield {"section": "spec_tests", "mode": mode, "model": t["name"],
                       "statistic": t["statistic"], "distribution": t["distribution"],
                       "df": " ".join(str(d) for d in t["df"]), "pvalue": t["pvalue"]}
    if report.estimates:
        for mode, models in sorted(report.estimates.items()):
            for model, b in _models(models):
                for c in b["coefficients"]:
                    yield {"section": "estimates", "mode": mode, "model": model,
                           "term": c["name"], "estimate": c["estimate"], "se": c["se"],
                           "statistic": c["statistic"], "distribution": "t",
                           "df": c["df"], "pvalue": c["pvalue"], "stars": stars(c["pvalue"])}
    if report.combined:
        for mode, models in sorted(report.combined.items()):
            for model, terms in _models(models):
                for t in terms:
                    for conv in ("diag", "full"):
                        se = t[f"se_{conv}"]
                        yield {"section": f"combined_{conv}", "mode": mode, "model": model,
                               "term": f"{t['term']}+{t['term']}:recession",
                               "estimate": t["recession"], "se": se,
                               "statistic": t[f"t_{conv}"], "distribution": "normal",
                               "pvalue": t[f"p_{conv}"], "stars": stars(t[f"p_{conv}"])}


def render_csv(report):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in _csv_rows(report):
        w.writerow({k: (fmt(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


# -- json -------------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def render_json(report):
    return json.dumps(_clean(report.to_dict()), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def render_report(report, format="text"):
    """Bytes of ``report`` in ``format`` (text, csv or json)."""
    if format == "text":
        out = render_text(report)
    elif format == "csv":
        out = render_csv(report)
    elif format == "json":
        out = render_json(report)
    else:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    return out.encode("utf-8")


def load_report(source):
    """Inverse of the json render."""
    from .pipeline import AnalysisReport
    if isinstance(source, (bytes, bytearray)):
        tree = json.loads(source.decode("utf-8"))
    else:
        with open(source, "rb") as fh:
            tree = json.load(fh)
    if not isinstance(tree, dict) or "provenance" not in tree:
        raise ValueError("not a panelcurve json report")
    return AnalysisReport.from_dict(tree)
