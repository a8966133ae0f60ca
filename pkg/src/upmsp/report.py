"""Aggregate telemetry into CSV tables and per-neighbourhood SVG plots."""

import csv
import math
from collections import defaultdict
from pathlib import Path

from .neighbourhoods import NEIGHBOURHOODS
from .regression import FEATURE_NAMES
from .svg import LogLogChart

N_DECILES = 10
CURVE_BINS = 12
CURVE_T_MIN = 1e-3


def time_decile(t):
    """Decile 1..10 of normalized time; decile d covers ((d-1)/10, d/10]."""
    return min(max(math.ceil(t * N_DECILES), 1), N_DECILES)


def curve_bin(t, bins=CURVE_BINS, t_min=CURVE_T_MIN):
    """Log-spaced bin of ``t`` over ``[t_min, 1]``; smaller t go to bin 0."""
    span = -math.log10(t_min)
    pos = (math.log10(max(t, t_min)) + span) / span
    return min(int(pos * bins), bins - 1)


def _bin_edges(b, bins=CURVE_BINS, t_min=CURVE_T_MIN):
    span = -math.log10(t_min)
    lo = 10.0 ** (-span + span * b / bins)
    hi = 10.0 ** (-span + span * (b + 1) / bins)
    return lo, hi


def decile_table(events):
    """Mean expected utility per neighbourhood and time decile."""
    sums = defaultdict(list)
    for ev in events:
        d = time_decile(ev.t)
        for st in ev.stats:
            sums[st.id, d].append(st.expected_utility)
    rows = []
    for nb in NEIGHBOURHOODS:
        for d in range(1, N_DECILES + 1):
            vals = sums.get((nb, d), [])
            rows.append({
                "neighbourhood": nb.label,
                "decile": d,
                "t_low": (d - 1) / N_DECILES,
                "t_high": d / N_DECILES,
                "events": len(vals),
                "mean_expected_utility": math.fsum(vals) / len(vals) if vals else None,
            })
    return rows


def curve_table(events):
    """Mean expected utility per neighbourhood, (M, J) cell and log-time bin."""
    sums = defaultdict(list)
    for ev in events:
        b = curve_bin(ev.t)
        for st in ev.stats:
            sums[st.id, ev.M, ev.J, b].append(st.expected_utility)
    rows = []
    for nb, M, J, b in sorted(sums):
        vals = sums[nb, M, J, b]
        lo, hi = _bin_edges(b)
        rows.append({
            "neighbourhood": nb.label,
            "M": M,
            "J": J,
            "bin": b,
            "t_low": lo,
            "t_high": hi,
            "t_mid": math.sqrt(lo * hi),
            "events": len(vals),
            "mean_expected_utility": math.fsum(vals) / len(vals),
        })
    return rows


def utility_charts(curves):
    """One chart per neighbourhood with a line per (M, J) cell."""
    charts = {}
    for nb in NEIGHBOURHOODS:
        chart = LogLogChart(f"Expected utility: {nb.label}",
                            "t (normalized time, log scale)",
                            "mean E[u] (log scale)")
        cells = sorted({(r["M"], r["J"]) for r in curves})
        for M, J in cells:
            pts = [(r["t_mid"], r["mean_expected_utility"]) for r in curves
                   if r["neighbourhood"] == nb.label and (r["M"], r["J"]) == (M, J)]
            chart.add_series(f"M={M}, J={J}", [p[0] for p in pts], [p[1] for p in pts])
        charts[nb] = chart
    return charts


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _write_rows(path, rows, columns):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def write_report(events, out_dir, models=None, comparison=None):
    """Write tables and plots into `out_dir`; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    deciles = decile_table(events)
    path = out / "utility_by_decile.csv"
    _write_rows(path, deciles, ("neighbourhood", "decile", "t_low", "t_high",
                                "events", "mean_expected_utility"))
    written.append(path)

    curves = curve_table(events)
    path = out / "utility_curves.csv"
    _write_rows(path, curves, ("neighbourhood", "M", "J", "bin", "t_low", "t_high",
                               "t_mid", "events", "mean_expected_utility"))
    written.append(path)

    for nb, chart in utility_charts(curves).items():
        path = out / f"utility_{nb.label}.svg"
        path.write_text(chart.render(), encoding="utf-8")
        written.append(path)

    if models is not None:
        rows = []
        for nb in NEIGHBOURHOODS:
            m = models[nb]
            row = {"neighbourhood": nb.label, "rows": m.n_rows_, "rss": m.rss_,
                   "r2": m.r2_}
            row.update(zip(FEATURE_NAMES, m.coef_.tolist()))
            rows.append(row)
        path = out / "model_coefficients.csv"
        _write_rows(path, rows, ("neighbourhood", *FEATURE_NAMES, "rows", "rss", "r2"))
        written.append(path)

    if comparison is not None:
        diffs = [int(r["difference"]) for r in comparison]
        summary = [{
            "pairs": len(diffs),
            "adaptive_better": sum(d < 0 for d in diffs),
            "ties": sum(d == 0 for d in diffs),
            "uniform_better": sum(d > 0 for d in diffs),
            "mean_difference": math.fsum(diffs) / len(diffs) if diffs else None,
        }]
        path = out / "comparison_summary.csv"
        _write_rows(path, summary, ("pairs", "adaptive_better", "ties",
                                    "uniform_better", "mean_difference"))
        written.append(path)
    return written
