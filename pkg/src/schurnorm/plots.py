"""Minimal deterministic SVG line plots for sweep, convergence and profile CSVs.

Output is plain SVG text built from fixed-precision numbers, so identical
input gives identical bytes.  Each data series is one ``<polyline>`` and each
reference level one ``<line class="hline">``.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence
from xml.sax.saxutils import escape

from .errors import MissingColumn, SchurNormError

WIDTH, HEIGHT = 640, 400
MARGIN = 50


def read_columns(path, required: Sequence[str]) -> Dict[str, List[float]]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [r for r in reader if r]
    if header is None or not rows:
        raise SchurNormError(f"{path} has no data rows")
    for name in required:
        if name not in header:
            raise MissingColumn(name)
    cols = {name: [float(r[k]) for r in rows] for k, name in enumerate(header)}
    return cols


def _range(values, pad=0.05):
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


class _Canvas:
    def __init__(self, title, xlim, ylim, xlabel, ylabel):
        self.xlim, self.ylim = xlim, ylim
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<title>{escape(title)}</title>',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<g class="axes" data-xmin="{xlim[0]:.6g}" data-xmax="{xlim[1]:.6g}" '
            f'data-ymin="{ylim[0]:.6g}" data-ymax="{ylim[1]:.6g}">',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
            f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="black"/>',
        ]
        for k in range(5):
            fx = xlim[0] + (xlim[1] - xlim[0]) * k / 4
            fy = ylim[0] + (ylim[1] - ylim[0]) * k / 4
            x, y = self.px(fx, ylim[0])
            self.parts.append(f'<text x="{x:.2f}" y="{HEIGHT - MARGIN + 15}" font-size="10" '
                              f'text-anchor="middle">{fx:.3g}</text>')
            x, y = self.px(xlim[0], fy)
            self.parts.append(f'<text x="{MARGIN - 5}" y="{y:.2f}" font-size="10" '
                              f'text-anchor="end">{fy:.3g}</text>')
        self.parts.append(f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 10}" font-size="12" '
                          f'text-anchor="middle">{escape(xlabel)}</text>')
        self.parts.append(f'<text x="12" y="{HEIGHT / 2:.0f}" font-size="12" '
                          f'transform="rotate(-90 12 {HEIGHT / 2:.0f})" '
                          f'text-anchor="middle">{escape(ylabel)}</text>')
        self.parts.append(f'<text x="{WIDTH / 2:.0f}" y="30" font-size="14" '
                          f'text-anchor="middle">{escape(title)}</text>')
        self.parts.append("</g>")

    def px(self, x, y):
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        u = MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)
        v = HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)
        return u, v

    def polyline(self, xs, ys, color, label, dash=None):
        pts = " ".join(
            "{:.2f},{:.2f}".format(*self.px(x, y))
            for x, y in zip(xs, ys)
            if math.isfinite(x) and math.isfinite(y)
        )
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline class="series" data-label="{escape(label)}" points="{pts}" '
            f'fill="none" stroke="{color}" stroke-width="1.5"{extra}/>'
        )

    def hline(self, y, color, label):
        x0, _ = self.px(self.xlim[0], y)
        x1, v = self.px(self.xlim[1], y)
        self.parts.append(
            f'<line class="hline" data-label="{escape(label)}" data-value="{y:.17g}" '
            f'x1="{x0:.2f}" y1="{v:.2f}" x2="{x1:.2f}" y2="{v:.2f}" stroke="{color}" '
            f'stroke-dasharray="6,3"/>'
        )

    def legend(self, items):
        for k, (label, color) in enumerate(items):
            y = MARGIN + 14 + 14 * k
            self.parts.append(f'<line x1="{WIDTH - MARGIN - 150}" y1="{y - 4}" '
                              f'x2="{WIDTH - MARGIN - 130}" y2="{y - 4}" stroke="{color}"/>')
            self.parts.append(f'<text x="{WIDTH - MARGIN - 125}" y="{y}" font-size="10">'
                              f'{escape(label)}</text>')

    def write(self, path):
        Path(path).write_text("\n".join(self.parts + ["</svg>"]) + "\n")


def plot_sweep(sweep_csv, out_svg, baselines: Optional[dict] = None) -> None:
    """Schur, L2 and truncation curves versus omega with reference levels."""
    cols = read_columns(sweep_csv, ("omega", "schur_estimate", "l2_norm_k", "truncation_norm"))
    series = [
        ("L2 norm of K", "l2_norm_k", "red"),
        ("Schur test estimate", "schur_estimate", "darkcyan"),
        ("truncation norm", "truncation_norm", "blue"),
    ]
    levels = []
    if baselines:
        for key, label, color in (
            ("threshold", "1/Lambda", "orange"),
            ("l2_kbar", "L2 norm of Kbar", "red"),
            ("norm_tkbar", "norm of T_Kbar", "olive"),
        ):
            if baselines.get(key) is not None:
                levels.append((float(baselines[key]), label, color))
    ys = [v for _, c, _ in series for v in cols[c]] + [v for v, _, _ in levels]
    canvas = _Canvas("Norm estimates versus omega", _range(cols["omega"], 0.0), _range(ys),
                     "omega", "norm")
    for label, col, color in series:
        canvas.polyline(cols["omega"], cols[col], color, label)
    for value, label, color in levels:
        canvas.hline(value, color, label)
    canvas.legend([(l, c) for l, _, c in series] + [(l, c) for _, l, c in levels])
    canvas.write(out_svg)


def plot_convergence(history_csv, out_svg) -> None:
    """Schur estimate and reference-point estimate (left), reference count (right)."""
    cols = read_columns(history_csv, ("iteration", "schur_estimate", "ref_estimate", "ref_points"))
    it = cols["iteration"]
    xlim = _range(it, 0.0)
    est = _Canvas("Estimates versus iteration", xlim,
                  _range(cols["schur_estimate"] + cols["ref_estimate"]), "iteration", "estimate")
    est.polyline(it, cols["schur_estimate"], "red", "Schur test estimate")
    est.polyline(it, cols["ref_estimate"], "blue", "value over reference points")
    est.legend([("Schur test estimate", "red"), ("over reference points", "blue")])
    refs = _Canvas("Reference points versus iteration", xlim, _range(cols["ref_points"]),
                   "iteration", "reference points")
    refs.polyline(it, cols["ref_points"], "blue", "reference points")
    out_svg = Path(out_svg)
    est.write(out_svg)
    refs.write(out_svg.with_name(out_svg.stem + "_refs.svg"))


def _blue_red(frac):
    frac = min(max(frac, 0.0), 1.0)
    return "#{:02x}00{:02x}".format(round(255 * frac), round(255 * (1 - frac)))


def plot_profiles(profiles_csv, out_svg) -> None:
    """Optimized p(theta) for every omega, blue (lowest) to red (highest)."""
    path = Path(profiles_csv)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [r for r in reader if r]
    if header is None or not rows:
        raise SchurNormError(f"{path} has no data rows")
    if header[0] != "omega":
        raise MissingColumn("omega")
    theta = [float(x) for x in header[1:]]
    # failed frequencies leave a row holding only omega; they have no profile
    data = [(float(r[0]), [float(v) for v in r[1:]]) for r in rows if any(r[1:])]
    if not data:
        raise SchurNormError(f"{path} has no completed profiles")
    omegas = [o for o, _ in data]
    lo, hi = min(omegas), max(omegas)
    canvas = _Canvas("Optimized test function p", _range(theta, 0.0),
                     _range([v for _, vals in data for v in vals]), "theta", "p(theta)")
    for omega, vals in data:
        frac = 0.0 if hi == lo else (omega - lo) / (hi - lo)
        canvas.polyline(theta, vals, _blue_red(frac), f"omega={omega:.6g}")
    canvas.write(out_svg)
