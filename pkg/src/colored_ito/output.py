"""CSV persistence and gnuplot script generation.

Floats are written in scientific notation with 17 significant digits
(``%.16e``), which round-trips every IEEE double exactly. ``corrected`` is
written as 0/1.
"""

import csv
import math
from pathlib import Path

from .experiment import AggregateRecord, ConvergenceRecord

MEMBER_HEADER = ("alpha", "dt", "scheme", "lambda", "corrected", "realization", "l2_error")
AGGREGATE_HEADER = ("alpha", "dt", "scheme", "lambda", "corrected", "mean_error", "std_error", "n")


def fmt(x):
    return f"{x:.16e}"


def _member_row(r):
    return [fmt(r.alpha), fmt(r.dt), r.scheme, fmt(r.lam), str(int(r.corrected)), str(r.realization), fmt(r.l2_error)]


def _aggregate_row(r):
    return [fmt(r.alpha), fmt(r.dt), r.scheme, fmt(r.lam), str(int(r.corrected)),
            fmt(r.mean_error), fmt(r.std_error), str(r.n)]


def emit_csv(records, path, aggregate=None):
    """Write member or aggregate records, sorted, to ``path``.

    The record type is taken from the first record; for an empty list pass
    ``aggregate=True`` to get the aggregate header (member header otherwise).
    """
    records = list(records)
    if aggregate is None:
        aggregate = bool(records) and isinstance(records[0], AggregateRecord)
    if aggregate:
        header, row = AGGREGATE_HEADER, _aggregate_row
        key = lambda r: (r.alpha, r.dt, r.scheme, r.lam, r.corrected)
    else:
        header, row = MEMBER_HEADER, _member_row
        key = lambda r: (r.alpha, r.dt, r.scheme, r.lam, r.corrected, r.realization)
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for rec in sorted(records, key=key):
                writer.writerow(row(rec))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path):
    """Read a file produced by :func:`emit_csv`; returns a list of records."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            rows = list(reader)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if header == MEMBER_HEADER:
        return [
            ConvergenceRecord(float(a), float(dt), s, float(lam), c == "1", int(r), float(e))
            for a, dt, s, lam, c, r, e in rows
        ]
    if header == AGGREGATE_HEADER:
        return [
            AggregateRecord(float(a), float(dt), s, float(lam), c == "1", float(m), float(sd), int(n))
            for a, dt, s, lam, c, m, sd, n in rows
        ]
    raise ValueError(f"{path}: unrecognized header {header}")


def _variant_title(variant):
    scheme, lam, corrected = variant
    name = scheme if scheme != "decentered" else f"decentered lambda={lam:g}"
    return f"{name}, {'with' if corrected else 'without'} Ito correction"


def emit_plot_script(aggregates, path, image="convergence.png"):
    """Write a gnuplot script drawing mean error vs dt on log-log axes.

    One panel per scheme variant (uncorrected variants first), one series per
    alpha with standard-deviation error bars, and dashed reference lines of
    slope 0.5 (above the data) and 1.0 (below).
    """
    aggregates = list(aggregates)
    if not aggregates:
        raise ValueError("no aggregates to plot")
    variants = sorted({a.variant for a in aggregates}, key=lambda v: (v[2], v[0], v[1]))
    alphas = sorted({a.alpha for a in aggregates})
    table = {(a.alpha, a.variant, a.dt): a for a in aggregates}

    dt_max = max(a.dt for a in aggregates)
    at_coarse = [a.mean_error for a in aggregates if a.dt == dt_max and a.mean_error > 0]
    hi = max(at_coarse) if at_coarse else 1.0
    lo = min(at_coarse) if at_coarse else 1.0
    upper = 2.0 * hi / math.sqrt(dt_max)
    lower = 0.5 * lo / dt_max

    lines = [
        "# mean L2 error versus step size; generated by colored_ito",
        "set terminal pngcairo size %d,480 enhanced" % (480 * len(variants)),
        f"set output '{image}'",
        "set logscale xy",
        "set format x '10^{%L}'",
        "set format y '10^{%L}'",
        "set xlabel 'dt'",
        "set ylabel 'mean L2 error'",
        "set key left top",
        "set grid",
        f"ref05(x) = {upper:.6e} * x**0.5",
        f"ref10(x) = {lower:.6e} * x",
        "",
    ]
    for i, alpha in enumerate(alphas):
        lines.append(f"# alpha = {alpha:g}; columns: dt, then mean/std per panel")
        lines.append(f"$ALPHA{i} << EOD")
        for dt in sorted({a.dt for a in aggregates if a.alpha == alpha}):
            cells = [fmt(dt)]
            for v in variants:
                rec = table.get((alpha, v, dt))
                cells += [fmt(rec.mean_error), fmt(rec.std_error)] if rec else ["NaN", "NaN"]
            lines.append(" ".join(cells))
        lines.append("EOD")
        lines.append("")
    lines.append(f"set multiplot layout 1,{len(variants)}")
    for p, v in enumerate(variants):
        mean_col = 2 + 2 * p
        series = [
            f"$ALPHA{i} using 1:{mean_col}:{mean_col + 1} with yerrorlines "
            f"lc {i + 1} pt {i + 5} lw 1.5 title 'alpha = {alpha:g}'"
            for i, alpha in enumerate(alphas)
        ]
        series.append("ref05(x) with lines dt 2 lc rgb 'black' title 'order 0.5'")
        series.append("ref10(x) with lines dt 2 lc rgb 'gray40' title 'order 1'")
        lines.append(f"set title '{_variant_title(v)}'")
        lines.append("plot " + ", \\\n     ".join(series))
    lines.append("unset multiplot")
    lines.append("")
    path = Path(path)
    try:
        path.write_text("\n".join(lines))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
