"""Deterministic SVG figures, no plotting dependencies.

Every renderer is a pure function of its analysis inputs and emits a
standalone SVG document with stable element ordering and fixed-precision
coordinates, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .errors import MissingInputError
from .frontier import Ellipse, MultivariateFit, conditional_ellipse
from .glq import DEFAULT_QEC, QecParams, generalized_logical_qubits, qec_overhead
from .trends import MilestoneForecast, UnivariateFit, gaussian_noise_band, glq_trajectory

__all__ = ["FIGURE_KINDS", "render_figure"]

WIDTH, HEIGHT = 860, 560
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 30, 46, 58
PLOT_W = WIDTH - MARGIN_L - MARGIN_R
PLOT_H = HEIGHT - MARGIN_T - MARGIN_B

PALETTE = ["#d62728", "#ff7f0e", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b"]


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Axis:
    """Linear or log10 mapping from data space to pixel space."""

    def __init__(self, lo: float, hi: float, pixels: tuple[float, float], log: bool):
        self.log = log
        if log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi <= lo:
            hi = lo + 1.0
        self.lo, self.hi = lo, hi
        self.p0, self.p1 = pixels

    def __call__(self, value: float) -> float:
        v = math.log10(value) if self.log else value
        frac = (v - self.lo) / (self.hi - self.lo)
        return self.p0 + frac * (self.p1 - self.p0)

    def ticks(self, n: int = 6) -> list[float]:
        if self.log:
            lo, hi = math.floor(self.lo), math.ceil(self.hi)
            step = max(1, int(round((hi - lo) / n)))
            return [10.0 ** e for e in range(int(lo), int(hi) + 1, step)]
        span = self.hi - self.lo
        raw = span / n
        mag = 10.0 ** math.floor(math.log10(raw))
        step = min((m for m in (1, 2, 5, 10) if m * mag >= raw), default=10) * mag
        start = math.ceil(self.lo / step) * step
        out = []
        t = start
        while t <= self.hi + 1e-9:
            out.append(t)
            t += step
        return out


def _tick_label(value: float, log: bool) -> str:
    if log:
        e = round(math.log10(value))
        return f"1e{e}" if abs(e) > 3 else f"{value:g}"
    return f"{value:g}"


class _Svg:
    def __init__(self, title: str, x_label: str, y_label: str):
        self.parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
            f'<text x="{WIDTH // 2}" y="26" font-size="16" text-anchor="middle" '
            f'font-family="sans-serif">{_esc(title)}</text>',
            f'<text x="{MARGIN_L + PLOT_W / 2:.0f}" y="{HEIGHT - 14}" font-size="13" '
            f'text-anchor="middle" font-family="sans-serif">{_esc(x_label)}</text>',
            f'<text x="20" y="{MARGIN_T + PLOT_H / 2:.0f}" font-size="13" '
            f'text-anchor="middle" font-family="sans-serif" '
            f'transform="rotate(-90 20 {MARGIN_T + PLOT_H / 2:.0f})">'
            f'{_esc(y_label)}</text>',
        ]

    def axes(self, xaxis: _Axis, yaxis: _Axis):
        x0, x1 = MARGIN_L, MARGIN_L + PLOT_W
        y0, y1 = MARGIN_T + PLOT_H, MARGIN_T
        self.parts.append(
            f'<rect x="{x0}" y="{y1}" width="{PLOT_W}" height="{PLOT_H}" '
            'fill="none" stroke="#333333"/>'
        )
        for t in xaxis.ticks():
            px = xaxis(t)
            if not x0 - 0.5 <= px <= x1 + 0.5:
                continue
            self.parts.append(
                f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" '
                'stroke="#333333"/>'
            )
            self.parts.append(
                f'<text x="{_fmt(px)}" y="{y0 + 20}" font-size="11" '
                f'text-anchor="middle" font-family="sans-serif">'
                f'{_tick_label(t, xaxis.log)}</text>'
            )
        for t in yaxis.ticks():
            py = yaxis(t)
            if not y1 - 0.5 <= py <= y0 + 0.5:
                continue
            self.parts.append(
                f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" '
                'stroke="#333333"/>'
            )
            self.parts.append(
                f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" font-size="11" '
                f'text-anchor="end" font-family="sans-serif">'
                f'{_tick_label(t, yaxis.log)}</text>'
            )

    def polyline(self, xs, ys, color: str, dashed: bool = False, width: float = 1.5):
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{dash}/>'
        )

    def circle(self, x: float, y: float, color: str, r: float = 3.5):
        self.parts.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" fill="{color}" '
            'fill-opacity="0.8"/>'
        )

    def label(self, x: float, y: float, text: str, color: str = "#333333"):
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="11" '
            f'font-family="sans-serif" fill="{color}">{_esc(text)}</text>'
        )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _xaxis(lo, hi, log=False):
    return _Axis(lo, hi, (MARGIN_L, MARGIN_L + PLOT_W), log)


def _yaxis(lo, hi, log=False):
    return _Axis(lo, hi, (MARGIN_T + PLOT_H, MARGIN_T), log)


def render_glq_contour(
    qec: QecParams = DEFAULT_QEC,
    thresholds: Sequence[float] = (1.0, 4100.0),
) -> str:
    """Contour map of the GLQ index over (error rate, physical qubits).

    Milestone thresholds are drawn dashed; all contours asymptote at the
    fault-tolerance threshold.
    """
    p_lo, p_hi = 1e-5, qec.p_th * 0.999
    n_lo, n_hi = 1.0, 1e9
    svg = _Svg("Generalized logical qubits", "two-qubit gate error rate",
               "physical qubits")
    xaxis = _xaxis(p_lo, 1e-1, log=True)
    yaxis = _yaxis(n_lo, n_hi, log=True)
    svg.axes(xaxis, yaxis)
    grid = np.logspace(math.log10(p_lo), math.log10(p_hi), 200)
    background = [10.0 ** e for e in (-6, -4, -2, 2, 6)]
    for level in background:
        xs, ys = [], []
        for p in grid:
            n_req = level / qec_overhead(p, qec)
            if n_lo <= n_req <= n_hi:
                xs.append(xaxis(p))
                ys.append(yaxis(n_req))
        if xs:
            svg.polyline(xs, ys, "#bbbbbb", width=1.0)
    for k, level in enumerate(thresholds):
        xs, ys = [], []
        for p in grid:
            n_req = level / qec_overhead(p, qec)
            if n_lo <= n_req <= n_hi:
                xs.append(xaxis(p))
                ys.append(yaxis(n_req))
        color = PALETTE[k % len(PALETTE)]
        svg.polyline(xs, ys, color, dashed=True, width=2.0)
        if xs:
            svg.label(xs[0] + 4, ys[0] - 6, f"GLQ = {level:g}", color)
    px = xaxis(qec.p_th)
    svg.polyline([px, px], [MARGIN_T, MARGIN_T + PLOT_H], "#888888", dashed=True,
                 width=1.0)
    return svg.render()


def _history_values(dataset: Dataset, metric: str, qec: QecParams):
    points = []
    for r in dataset.records:
        if metric == "qubits":
            points.append((r.fractional_year, float(r.physical_qubits)))
        elif metric == "error":
            if r.gate_error_rate is not None:
                points.append((r.fractional_year, r.gate_error_rate))
        elif metric == "glq":
            if r.gate_error_rate is not None and r.gate_error_rate < qec.p_th:
                v = generalized_logical_qubits(r.physical_qubits, r.gate_error_rate,
                                               qec)
                points.append((r.fractional_year, v.value))
        else:
            raise MissingInputError(f"unknown history metric {metric!r}")
    return points


_HISTORY_LABELS = {
    "qubits": "physical qubits",
    "error": "two-qubit gate error rate",
    "glq": "generalized logical qubits",
}


def render_history(dataset: Dataset, metric: str, qec: QecParams = DEFAULT_QEC) -> str:
    """Scatter of one metric against announcement date, log value axis."""
    points = _history_values(dataset, metric, qec)
    if not points:
        raise MissingInputError(f"no records carry the {metric} metric")
    years = [p[0] for p in points]
    values = [p[1] for p in points]
    svg = _Svg(f"Reported {_HISTORY_LABELS[metric]} over time", "year",
               _HISTORY_LABELS[metric])
    xaxis = _xaxis(math.floor(min(years)) - 0.5, math.ceil(max(years)) + 0.5)
    yaxis = _yaxis(min(values) / 2.0, max(values) * 2.0, log=True)
    svg.axes(xaxis, yaxis)
    for t, v in points:
        svg.circle(xaxis(t), yaxis(v), PALETTE[2])
    return svg.render()


def render_frontier_ellipses(
    fit: MultivariateFit,
    year: float,
    levels: Sequence[float] = (0.5, 0.9, 0.99),
    dataset: Optional[Dataset] = None,
) -> str:
    """Conditional metric distribution at a year as nested coverage ellipses."""
    ellipses = [conditional_ellipse(fit, year, lvl) for lvl in levels]
    spans = []
    for e in ellipses:
        r = max(e.semi_axes)
        spans.append((e.center[0] - r, e.center[0] + r, e.center[1] - r,
                      e.center[1] + r))
    x_lo = min(s[0] for s in spans)
    x_hi = max(s[1] for s in spans)
    y_lo = min(s[2] for s in spans)
    y_hi = max(s[3] for s in spans)
    svg = _Svg(f"Metric distribution conditioned on {year:g}",
               "log physical qubits", "log gate error rate")
    xaxis = _xaxis(x_lo - 0.5, x_hi + 0.5)
    yaxis = _yaxis(y_lo - 0.5, y_hi + 0.5)
    svg.axes(xaxis, yaxis)
    if dataset is not None:
        for r in dataset.records:
            if r.gate_error_rate is None:
                continue
            svg.circle(xaxis(math.log(r.physical_qubits)),
                       yaxis(math.log(r.gate_error_rate)), "#999999", r=2.5)
    for k, (lvl, e) in enumerate(zip(levels, ellipses)):
        boundary = e.boundary(180)
        xs = [xaxis(x) for x, _ in boundary]
        ys = [yaxis(y) for _, y in boundary]
        color = PALETTE[k % len(PALETTE)]
        svg.polyline(xs, ys, color)
        svg.label(xs[0] + 4, ys[0], f"{lvl:.0%}", color)
    svg.circle(xaxis(e.center[0]), yaxis(e.center[1]), "#333333", r=3.0)
    return svg.render()


def render_trajectories(
    forecast: MilestoneForecast,
    threshold: Optional[float] = None,
    dataset: Optional[Dataset] = None,
) -> str:
    """Quantile GLQ trajectories with the defined-GLQ points overlaid."""
    threshold = threshold if threshold is not None else forecast.thresholds[0]
    per_quantile = forecast.trajectories[threshold]
    qec = forecast.config.qec
    svg = _Svg(
        f"Extrapolated generalized logical qubits (threshold {threshold:g})",
        "year", "generalized logical qubits",
    )
    all_times = next(iter(per_quantile.values())).times
    xaxis = _xaxis(min(all_times), max(all_times))
    yaxis = _yaxis(1e-8, 1e8, log=True)
    svg.axes(xaxis, yaxis)
    py = yaxis(threshold)
    svg.polyline([MARGIN_L, MARGIN_L + PLOT_W], [py, py], "#888888", dashed=True,
                 width=1.0)
    for k, q in enumerate(sorted(per_quantile)):
        traj = per_quantile[q]
        xs, ys = [], []
        for t, v in zip(traj.times, traj.glq):
            if 1e-8 <= v <= 1e8:
                xs.append(xaxis(t))
                ys.append(yaxis(v))
        color = PALETTE[k % len(PALETTE)]
        if xs:
            svg.polyline(xs, ys, color)
            svg.label(MARGIN_L + 8, MARGIN_T + 16 + 14 * k, f"{q:.0%} quantile",
                      color)
    if dataset is not None:
        for r in dataset.records:
            if r.gate_error_rate is not None and r.gate_error_rate < qec.p_th:
                v = generalized_logical_qubits(r.physical_qubits, r.gate_error_rate,
                                               qec)
                if v.value > 0:
                    svg.circle(xaxis(r.fractional_year), yaxis(v.value), "#333333",
                               r=3.0)
    return svg.render()


def render_metric_trend(
    dataset: Dataset,
    fit: UnivariateFit,
    metric: str,
    horizon_end: float,
    qec: QecParams = DEFAULT_QEC,
) -> str:
    """One metric's data, with the fitted record trend extrapolated."""
    points = _history_values(dataset, metric, qec)
    if not points:
        raise MissingInputError(f"no records carry the {metric} metric")
    years = [p[0] for p in points]
    values = [p[1] for p in points]
    t_grid = np.arange(math.floor(min(years)), horizon_end + 0.5, 0.5)
    trend = np.exp(fit.predict_log(t_grid))
    svg = _Svg(f"Extrapolated {_HISTORY_LABELS[metric]}", "year",
               _HISTORY_LABELS[metric])
    xaxis = _xaxis(math.floor(min(years)), horizon_end)
    y_all = values + list(trend)
    yaxis = _yaxis(min(y_all) / 2.0, max(y_all) * 2.0, log=True)
    svg.axes(xaxis, yaxis)
    svg.polyline([xaxis(t) for t in t_grid], [yaxis(v) for v in trend], PALETTE[1],
                 width=2.0)
    for t, v in points:
        svg.circle(xaxis(t), yaxis(v), PALETTE[2])
    return svg.render()


def render_gaussian_band(
    fit_qubits: UnivariateFit,
    fit_error: UnivariateFit,
    qec: QecParams,
    level: float,
    window: tuple[float, float],
) -> str:
    """Median GLQ trajectory with its log-Gaussian noise band."""
    grid = np.arange(window[0], window[1] + 0.25, 0.25)
    median = glq_trajectory(fit_qubits, fit_error, qec, grid)
    lower, upper = gaussian_noise_band(fit_qubits, fit_error, qec, level, grid)
    svg = _Svg(f"Gaussian noise band at {level:.0%}", "year",
               "generalized logical qubits")
    xaxis = _xaxis(window[0], window[1])
    yaxis = _yaxis(1e-8, 1e8, log=True)
    svg.axes(xaxis, yaxis)
    for curve, color, dashed in ((median, PALETTE[1], False),
                                 (lower, PALETTE[2], True),
                                 (upper, PALETTE[0], True)):
        xs, ys = [], []
        for t, v in zip(grid, curve):
            if 1e-8 <= v <= 1e8:
                xs.append(xaxis(t))
                ys.append(yaxis(v))
        if xs:
            svg.polyline(xs, ys, color, dashed=dashed)
    return svg.render()


FIGURE_KINDS = (
    "glq-contour",
    "history-qubits",
    "history-error",
    "history-glq",
    "frontier-ellipses",
    "forecast-trajectories",
    "metric-trend-qubits",
    "metric-trend-error",
    "gaussian-band",
)


def render_figure(kind: str, **inputs) -> str:
    """Dispatch by figure id; raises MissingInputError when an input needed
    by the figure kind is absent."""

    def need(name):
        if name not in inputs or inputs[name] is None:
            raise MissingInputError(f"figure {kind!r} requires the {name!r} input")
        return inputs[name]

    qec = inputs.get("qec", DEFAULT_QEC)
    if kind == "glq-contour":
        return render_glq_contour(qec, inputs.get("thresholds", (1.0, 4100.0)))
    if kind in ("history-qubits", "history-error", "history-glq"):
        return render_history(need("dataset"), kind.removeprefix("history-"), qec)
    if kind == "frontier-ellipses":
        return render_frontier_ellipses(
            need("fit"), inputs.get("year", 2023.0),
            inputs.get("levels", (0.5, 0.9, 0.99)), inputs.get("dataset"),
        )
    if kind == "forecast-trajectories":
        return render_trajectories(need("forecast"), inputs.get("threshold"),
                                   inputs.get("dataset"))
    if kind in ("metric-trend-qubits", "metric-trend-error"):
        return render_metric_trend(
            need("dataset"), need("fit"), kind.removeprefix("metric-trend-"),
            inputs.get("horizon_end", 2060.0), qec,
        )
    if kind == "gaussian-band":
        return render_gaussian_band(
            need("fit_qubits"), need("fit_error"), qec,
            inputs.get("level", 0.95), need("window"),
        )
    raise MissingInputError(f"unknown figure kind {kind!r}")
