"""File formats: trial CSV, scenario config, reports, region grids, SVG.

Trial CSV
    Header row required.  Columns ``y`` (combined outcome) and ``r`` (group,
    0 or 1) are mandatory; further numeric columns named ``x1``, ``x2``, ...
    are read as covariates.  The atom is not a column, it is passed
    separately.  Any ``y`` exactly equal to the atom is treated as
    unobserved, even if it was a genuine measurement.

Scenario config
    INI-like text.  Each ``[name]`` section defines one scenario with keys
    ``mu0``, ``mu1``, ``pi0``, ``pi1`` (required), ``dist`` (``normal`` or
    ``t2sq``, default ``normal``) and ``atom`` (default 0).  ``#`` and ``;``
    start comments.
"""

from __future__ import annotations

import csv
import json
import math
import re
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import ConfigError, InputError
from .inference import ConfidenceInterval, ConfidenceRegion
from .model import DISTRIBUTIONS, ScenarioSpec, TrialData
from .parametric import METHOD_LABELS, TestResult
from .simulate import PowerTable

SCHEMA_VERSION = 1
_COVARIATE = re.compile(r"^x\d+$")


# ---------------------------------------------------------------------------
# trial data


def read_trial_csv(path, atom: float = 0.0, covariates: Optional[Sequence[str]] = None) -> TrialData:
    """Load a trial CSV.

    ``covariates=None`` picks up every ``x<k>`` column; pass an explicit list
    (possibly empty) to choose.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from None
    with fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        for col in ("y", "r"):
            if col not in header:
                raise InputError(f"{path}: missing required column {col!r}")
        if covariates is None:
            covariates = [h for h in header if _COVARIATE.match(h)]
        else:
            covariates = list(covariates)
            missing = [c for c in covariates if c not in header]
            if missing:
                raise InputError(f"{path}: covariate columns not found: {missing}")
        ys, rs, xs = [], [], []
        for lineno, row in enumerate(reader, start=2):
            row = {(k or "").strip(): v for k, v in row.items()}
            ys.append(_cell(row, "y", lineno, path))
            r = _cell(row, "r", lineno, path)
            if r not in (0.0, 1.0):
                raise InputError(f"{path}:{lineno}: r must be 0 or 1, got {row['r']!r}")
            rs.append(int(r))
            xs.append([_cell(row, c, lineno, path) for c in covariates])
    if not ys:
        raise InputError(f"{path}: no data rows")
    x = np.array(xs, dtype=float) if covariates else None
    return TrialData(np.array(ys), np.array(rs), atom, x, tuple(covariates))


def _cell(row, col, lineno, path) -> float:
    raw = row.get(col)
    if raw is None or raw.strip() == "" or raw.strip().upper() in ("NA", "NAN"):
        raise InputError(f"{path}:{lineno}: missing value in column {col!r}")
    try:
        v = float(raw)
    except ValueError:
        raise InputError(f"{path}:{lineno}: column {col!r} is not numeric: {raw!r}") from None
    if not math.isfinite(v):
        raise InputError(f"{path}:{lineno}: column {col!r} is not finite")
    return v


def write_trial_csv(data: TrialData, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y", "r", *data.covariate_names])
        for i in range(data.n):
            extra = [] if data.covariates is None else [repr(float(v)) for v in data.covariates[i]]
            w.writerow([repr(float(data.y[i])), int(data.group[i]), *extra])


# ---------------------------------------------------------------------------
# scenario config


def parse_scenarios(text: str, source: str = "<config>") -> list:
    specs, current, start = [], None, None

    def finish():
        if current is None:
            return
        name, fields = current
        for key in ("mu0", "mu1", "pi0", "pi1"):
            if key not in fields:
                raise ConfigError(f"{source}: scenario {name!r} lacks {key}", line=start, field=key)
        try:
            specs.append(ScenarioSpec(fields["mu0"][0], fields["mu1"][0], fields["pi0"][0],
                                      fields["pi1"][0], fields.get("dist", ("normal", 0))[0],
                                      fields.get("atom", (0.0, 0))[0], name))
        except InputError as exc:
            raise ConfigError(f"{source}: scenario {name!r}: {exc}", line=start) from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"[#;]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"{source}: malformed section header", line=lineno)
            finish()
            current, start = (line[1:-1].strip(), {}), lineno
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: expected key = value", line=lineno)
        if current is None:
            raise ConfigError(f"{source}: key outside of a [scenario] section", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key == "dist":
            if value not in DISTRIBUTIONS:
                raise ConfigError(f"{source}: dist must be one of {DISTRIBUTIONS}",
                                  line=lineno, field=key)
            current[1][key] = (value, lineno)
        elif key in ("mu0", "mu1", "pi0", "pi1", "atom"):
            try:
                current[1][key] = (float(value), lineno)
            except ValueError:
                raise ConfigError(f"{source}: not a number: {value!r}", line=lineno, field=key) from None
        else:
            raise ConfigError(f"{source}: unknown key", line=lineno, field=key)
    finish()
    if not specs:
        raise ConfigError(f"{source}: no scenarios defined")
    return specs


def load_scenarios(path=None) -> list:
    """Read a scenario config; ``None`` loads the bundled simulation setups."""
    if path is None:
        text = resources.files("atomtest").joinpath("data/table1.cfg").read_text()
        return parse_scenarios(text, "table1.cfg")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return parse_scenarios(text, str(path))


# ---------------------------------------------------------------------------
# reports


def fmt7(x: float) -> str:
    """Seven significant digits, the precision used in every report."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Inf" if x > 0 else "-Inf"
    return f"{x:.7g}"


def _json_num(x: float):
    s = fmt7(x)
    return float(s) if math.isfinite(x) else s


def build_report(result: TestResult, ci_mu: ConfidenceInterval, ci_or: ConfidenceInterval,
                 level: float, atom: float, baselines: Optional[dict] = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "method": result.method,
        "method_label": METHOD_LABELS[result.method],
        "confidence_level": level,
        "atom": atom,
        "contrasts": {
            "difference_in_means_observed": {
                "estimate": _json_num(result.estimates.mu_delta_hat),
                "ci_lower": _json_num(ci_mu.lower),
                "ci_upper": _json_num(ci_mu.upper),
            },
            "odds_ratio_observed": {
                "estimate": _json_num(result.estimates.or_hat),
                "ci_lower": _json_num(ci_or.lower),
                "ci_upper": _json_num(ci_or.upper),
            },
        },
        "delta_combined": _json_num(result.estimates.delta_hat),
        "W": _json_num(result.W),
        "W1": _json_num(result.W1),
        "W2": _json_num(result.W2),
        "df": result.df,
        "p_value": _json_num(result.p_value),
        "n_observed": list(result.n_obs),
        "n_total": list(result.n_total),
        "flags": sorted(set(result.flags) | set(ci_mu.flags) | set(ci_or.flags)),
    }
    if baselines:
        doc["baselines"] = {k: {"statistic": _json_num(v.statistic), "p_value": _json_num(v.p_value)}
                            for k, v in baselines.items()}
    return doc


def _txt(v) -> str:
    return v if isinstance(v, str) else fmt7(v)


def render_report(doc: dict) -> str:
    """Plain-text summary laid out like a regression summary table."""
    pct = f"{doc['confidence_level'] * 100:g}%"
    rows = [("Difference in means among the observed:", doc["contrasts"]["difference_in_means_observed"]),
            ("Odds ratio of being observed:", doc["contrasts"]["odds_ratio_observed"])]
    label_w = max(len(r[0]) for r in rows)
    cells = [[_txt(r[1]["estimate"]), _txt(r[1]["ci_lower"]), _txt(r[1]["ci_upper"])] for r in rows]
    col_w = [max(len(h), *(len(c[j]) for c in cells))
             for j, h in enumerate(("Estimate", "CI Lower", "CI Upper"))]
    lines = [f"Estimation method: {doc['method_label']}",
             f"Confidence level = {pct}",
             "",
             "Treatment contrasts",
             " " * (label_w + 1) + " ".join(h.rjust(w) for h, w in zip(("Estimate", "CI Lower", "CI Upper"), col_w))]
    for (label, _), c in zip(rows, cells):
        lines.append(label.ljust(label_w) + " " + " ".join(v.rjust(w) for v, w in zip(c, col_w)))
    lines += ["",
              f"Joint test statistic: W = {_txt(doc['W'])}",
              f"p-value: p = {_txt(doc['p_value'])}"]
    if doc.get("baselines"):
        lines.append("")
        lines.append("Comparator tests on the combined outcome")
        for name, b in doc["baselines"].items():
            lines.append(f"  {name}: statistic = {_txt(b['statistic'])}, p = {_txt(b['p_value'])}")
    if doc["flags"]:
        lines.append("")
        lines.append("Flags: " + ", ".join(doc["flags"]))
    return "\n".join(lines) + "\n"


def write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


# ---------------------------------------------------------------------------
# region output


def write_region_csv(region: ConfidenceRegion, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "b", "W", "member"])
        for m, b, wv, member in region.rows():
            w.writerow([repr(m), repr(b), repr(wv), int(member)])


def _heat(t: float) -> str:
    # light-to-dark blue ramp, t in [0, 1]
    t = min(max(t, 0.0), 1.0)
    r = int(round(247 - t * (247 - 8)))
    g = int(round(251 - t * (251 - 48)))
    b = int(round(255 - t * (255 - 107)))
    return f"#{r:02x}{g:02x}{b:02x}"


def _contour_segments(values: np.ndarray, level: float):
    """Marching squares on a (rows=m, cols=b) grid; yields index-space segments."""
    nr, nc = values.shape
    for i in range(nr - 1):
        for j in range(nc - 1):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            vals = [values[c] for c in corners]
            pts = []
            for k in range(4):
                (a, va), (b, vb) = (corners[k], vals[k]), (corners[(k + 1) % 4], vals[(k + 1) % 4])
                if (va <= level) != (vb <= level):
                    t = (level - va) / (vb - va) if vb != va else 0.5
                    pts.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
            if len(pts) == 2:
                yield pts[0], pts[1]
            elif len(pts) == 4:
                yield pts[0], pts[1]
                yield pts[2], pts[3]


def region_svg(region: ConfidenceRegion, width: int = 480, height: int = 480) -> str:
    """Heat map of ``W`` over the grid with the threshold contour drawn on top.

    Horizontal axis is the mean difference, vertical the log odds-ratio.
    """
    margin = 60
    pw, ph = width - 2 * margin, height - 2 * margin
    nm, nb = len(region.m_grid), len(region.b_grid)
    cw, chh = pw / nm, ph / nb
    wmax = 3.0 * region.threshold
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    for i in range(nm):
        for j in range(nb):
            x = margin + i * cw
            y = margin + (nb - 1 - j) * chh
            col = _heat(1.0 - region.w_values[i, j] / wmax)
            out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" '
                       f'height="{chh + 0.05:.2f}" fill="{col}"/>')

    def to_xy(pt):
        return margin + (pt[0] + 0.5) * cw, margin + (nb - 1 - pt[1] + 0.5) * chh

    path = []
    for a, b in _contour_segments(region.w_values, region.threshold):
        (x1, y1), (x2, y2) = to_xy(a), to_xy(b)
        path.append(f"M{x1:.2f},{y1:.2f}L{x2:.2f},{y2:.2f}")
    if path:
        out.append(f'<path d="{"".join(path)}" stroke="#d62728" stroke-width="2" fill="none"/>')
    m_lo, m_hi = region.m_grid[0], region.m_grid[-1]
    b_lo, b_hi = region.b_grid[0], region.b_grid[-1]
    out.append(f'<rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    labels = [
        (margin, height - margin + 18, "start", fmt7(m_lo)),
        (width - margin, height - margin + 18, "end", fmt7(m_hi)),
        (width / 2, height - 15, "middle", "difference in means among the observed"),
        (margin - 6, height - margin, "end", fmt7(b_lo)),
        (margin - 6, margin + 10, "end", fmt7(b_hi)),
        (width / 2, 30, "middle",
         f"{region.level * 100:g}% simultaneous region (W <= {fmt7(region.threshold)})"),
    ]
    for x, y, anchor, text in labels:
        out.append(f'<text x="{x:.1f}" y="{y:.1f}" font-family="sans-serif" font-size="12" '
                   f'text-anchor="{anchor}">{escape(text)}</text>')
    out.append(f'<text x="16" y="{height / 2:.1f}" font-family="sans-serif" font-size="12" '
               f'text-anchor="middle" transform="rotate(-90 16 {height / 2:.1f})">log odds-ratio of being observed</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# power tables

POWER_COLUMNS = ["scenario", "method", "n_per_group", "reps", "valid", "degenerate",
                 "rejections", "power", "mc_se"]


def _num(x: float) -> str:
    return "NA" if math.isnan(x) else f"{x:.10g}"


def write_power_csv(table: PowerTable, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POWER_COLUMNS)
        for r in table.rows:
            w.writerow([r.scenario, r.method, r.n_per_group, r.reps, r.valid, r.degenerate,
                        r.rejections, _num(r.power), _num(r.mc_se)])


def write_power_long(table: PowerTable, path) -> None:
    """Plot-ready long format: scenario, method, n, power, mc_se."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "method", "n", "power", "mc_se"])
        for r in table.rows:
            w.writerow([r.scenario, r.method, r.n_per_group, _num(r.power), _num(r.mc_se)])
