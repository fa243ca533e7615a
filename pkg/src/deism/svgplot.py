"""Minimal native SVG emission for spectra and sweep curves.

Hand-rolled on purpose: plots must be reproducible byte-for-byte from the
same data, with no plotting dependency. Layout is two stacked panels
(magnitude in dB over log frequency, unwrapped phase in radians) for spectra,
or a single log-log panel for sweeps.
"""

from __future__ import annotations

import math

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_W, _H = 720, 320
_ML, _MR, _MT, _MB = 64, 16, 28, 42


def _ticks_linear(lo, hi, n=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * abs(hi):
        ticks.append(t)
        t += step
    return ticks


def _ticks_log(lo, hi):
    ticks = []
    d = math.floor(math.log10(lo))
    while 10**d <= hi * 1.0001:
        if 10**d >= lo * 0.9999:
            ticks.append(10.0**d)
        d += 1
    return ticks or [lo, hi]


class _Panel:
    def __init__(self, x_log, y_label, x_label=""):
        self.x_log = x_log
        self.y_label = y_label
        self.x_label = x_label
        self.curves = []

    def add(self, x, y, label):
        self.curves.append((np.asarray(x, float), np.asarray(y, float), label))

    def render(self, y_off):
        xs = np.concatenate([c[0] for c in self.curves])
        ys = np.concatenate([c[1] for c in self.curves])
        finite = np.isfinite(ys)
        ys = ys[finite] if np.any(finite) else np.array([0.0, 1.0])
        x_lo, x_hi = float(xs.min()), float(xs.max())
        y_lo, y_hi = float(ys.min()), float(ys.max())
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

        def fx(x):
            if self.x_log:
                t = (math.log10(x) - math.log10(x_lo)) / (
                    math.log10(x_hi) - math.log10(x_lo) or 1.0
                )
            else:
                t = (x - x_lo) / ((x_hi - x_lo) or 1.0)
            return _ML + t * (_W - _ML - _MR)

        def fy(y):
            t = (y - y_lo) / (y_hi - y_lo)
            return y_off + _H - _MB - t * (_H - _MT - _MB)

        parts = [
            f'<rect x="{_ML}" y="{y_off + _MT}" width="{_W - _ML - _MR}" '
            f'height="{_H - _MT - _MB}" fill="none" stroke="#333"/>'
        ]
        x_ticks = _ticks_log(x_lo, x_hi) if self.x_log else _ticks_linear(x_lo, x_hi)
        for t in x_ticks:
            px = fx(t)
            parts.append(
                f'<line x1="{px:.2f}" y1="{y_off + _H - _MB}" x2="{px:.2f}" '
                f'y2="{y_off + _H - _MB + 4}" stroke="#333"/>'
            )
            parts.append(
                f'<text x="{px:.2f}" y="{y_off + _H - _MB + 16}" font-size="11" '
                f'text-anchor="middle">{t:g}</text>'
            )
        for t in _ticks_linear(y_lo, y_hi):
            py = fy(t)
            parts.append(
                f'<line x1="{_ML - 4}" y1="{py:.2f}" x2="{_ML}" y2="{py:.2f}" stroke="#333"/>'
            )
            parts.append(
                f'<text x="{_ML - 7}" y="{py + 3.5:.2f}" font-size="11" '
                f'text-anchor="end">{t:g}</text>'
            )
        for ci, (x, y, label) in enumerate(self.curves):
            color = _COLORS[ci % len(_COLORS)]
            pts = [
                f"{fx(float(xi)):.2f},{fy(float(yi)):.2f}"
                for xi, yi in zip(x, y)
                if np.isfinite(yi)
            ]
            parts.append(
                f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" '
                f'stroke-width="1.4"/>'
            )
            lx = _ML + 10 + 130 * ci
            parts.append(
                f'<line x1="{lx}" y1="{y_off + _MT - 12}" x2="{lx + 18}" '
                f'y2="{y_off + _MT - 12}" stroke="{color}" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{lx + 22}" y="{y_off + _MT - 8}" font-size="11">{label}</text>'
            )
        parts.append(
            f'<text x="14" y="{y_off + (_MT + _H - _MB) / 2:.1f}" font-size="12" '
            f'text-anchor="middle" transform="rotate(-90 14 '
            f'{y_off + (_MT + _H - _MB) / 2:.1f})">{self.y_label}</text>'
        )
        if self.x_label:
            parts.append(
                f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{y_off + _H - 8}" '
                f'font-size="12" text-anchor="middle">{self.x_label}</text>'
            )
        return parts


def _document(panels) -> str:
    total_h = _H * len(panels)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{total_h}" '
        f'viewBox="0 0 {_W} {total_h}" font-family="sans-serif">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for i, panel in enumerate(panels):
        parts.extend(panel.render(i * _H))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def spectrum_svg(spectra: dict) -> str:
    """Magnitude/phase panels for named spectra sharing a frequency grid."""
    mag = _Panel(x_log=True, y_label="SPL-style magnitude (dB)")
    ph = _Panel(x_log=True, y_label="unwrapped phase (rad)", x_label="frequency (Hz)")
    for label, spec in spectra.items():
        with np.errstate(divide="ignore"):
            mag_db = 20.0 * np.log10(np.abs(spec.values) / math.sqrt(2.0) / 2e-5)
        mag.add(spec.frequencies, mag_db, label)
        ph.add(spec.frequencies, np.unwrap(np.angle(spec.values)), label)
    return _document([mag, ph])


def loglog_svg(x, y, x_label: str, y_label: str, label: str = "") -> str:
    """Single log-log panel, for error-versus-distance style sweeps."""
    panel = _Panel(x_log=True, y_label=y_label, x_label=x_label)
    y = np.asarray(y, float)
    safe = np.where(y > 0, y, np.nan)
    panel.add(np.asarray(x, float), np.log10(safe), label or y_label)
    return _document([panel])
