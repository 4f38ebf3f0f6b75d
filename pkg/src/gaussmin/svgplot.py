"""Minimal static SVG plots: line and scatter series on linear or log axes.

Plots are diagnostics only; every asserted number lives in CSV/JSON outputs.
Output is deterministic: fixed canvas, fixed formatting, no timestamps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 55
COLORS = ("#1f6fb2", "#c44e52", "#55a868", "#8172b2", "#937860")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return []
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


@dataclass
class Series:
    x: list
    y: list
    label: str = ""
    mode: str = "line"  # "line", "dots" or "both"


@dataclass
class Plot:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    logx: bool = False
    logy: bool = False

    def add(self, x, y, label: str = "", mode: str = "line") -> "Plot":
        self.series.append(Series(list(map(float, x)), list(map(float, y)), label, mode))
        return self

    def _transform(self, v: float, log: bool) -> float:
        return math.log10(v) if log else v

    def render(self) -> str:
        pts = []
        for s in self.series:
            for x, y in zip(s.x, s.y):
                if self.logx and x <= 0 or self.logy and y <= 0:
                    continue
                pts.append((self._transform(x, self.logx), self._transform(y, self.logy)))
        if not pts:
            pts = [(0.0, 0.0), (1.0, 1.0)]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 - x0 < 1e-12:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 - y0 < 1e-12:
            y0, y1 = y0 - 0.5, y1 + 0.5
        padx, pady = 0.04 * (x1 - x0), 0.06 * (y1 - y0)
        x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady
        iw = WIDTH - MARGIN_L - MARGIN_R
        ih = HEIGHT - MARGIN_T - MARGIN_B

        def sx(v: float) -> float:
            return MARGIN_L + (v - x0) / (x1 - x0) * iw

        def sy(v: float) -> float:
            return MARGIN_T + ih - (v - y0) / (y1 - y0) * ih

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}">',
               f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
               f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="sans-serif" '
               f'font-size="15">{self.title}</text>']
        # axes frame
        out.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{iw}" height="{ih}" '
                   'fill="none" stroke="#333" stroke-width="1"/>')
        for t in _nice_ticks(x0, x1):
            px = sx(t)
            label = _fmt(10.0 ** t) if self.logx else _fmt(t)
            out.append(f'<line x1="{_fmt(px)}" y1="{MARGIN_T + ih}" x2="{_fmt(px)}" '
                       f'y2="{MARGIN_T + ih + 5}" stroke="#333"/>')
            out.append(f'<line x1="{_fmt(px)}" y1="{MARGIN_T}" x2="{_fmt(px)}" '
                       f'y2="{MARGIN_T + ih}" stroke="#ddd" stroke-width="0.5"/>')
            out.append(f'<text x="{_fmt(px)}" y="{MARGIN_T + ih + 20}" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="11">{label}</text>')
        for t in _nice_ticks(y0, y1):
            py = sy(t)
            label = _fmt(10.0 ** t) if self.logy else _fmt(t)
            out.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(py)}" x2="{MARGIN_L}" '
                       f'y2="{_fmt(py)}" stroke="#333"/>')
            out.append(f'<line x1="{MARGIN_L}" y1="{_fmt(py)}" x2="{MARGIN_L + iw}" '
                       f'y2="{_fmt(py)}" stroke="#ddd" stroke-width="0.5"/>')
            out.append(f'<text x="{MARGIN_L - 9}" y="{_fmt(py + 4)}" text-anchor="end" '
                       f'font-family="sans-serif" font-size="11">{label}</text>')
        out.append(f'<text x="{MARGIN_L + iw // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13">{self.xlabel}</text>')
        out.append(f'<text x="18" y="{MARGIN_T + ih // 2}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13" '
                   f'transform="rotate(-90 18 {MARGIN_T + ih // 2})">{self.ylabel}</text>')
        # series
        for i, s in enumerate(self.series):
            color = COLORS[i % len(COLORS)]
            coords = [(sx(self._transform(x, self.logx)), sy(self._transform(y, self.logy)))
                      for x, y in zip(s.x, s.y)
                      if not (self.logx and x <= 0 or self.logy and y <= 0)]
            if not coords:
                continue
            if s.mode in ("line", "both") and len(coords) > 1:
                path = " ".join(f"{'M' if j == 0 else 'L'}{_fmt(px)},{_fmt(py)}"
                                for j, (px, py) in enumerate(coords))
                out.append(f'<path d="{path}" fill="none" stroke="{color}" stroke-width="1.6"/>')
            if s.mode in ("dots", "both"):
                for px, py in coords:
                    out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="{color}"/>')
            if s.label:
                ly = MARGIN_T + 16 + 16 * i
                out.append(f'<line x1="{MARGIN_L + iw - 150}" y1="{ly - 4}" '
                           f'x2="{MARGIN_L + iw - 126}" y2="{ly - 4}" stroke="{color}" '
                           'stroke-width="2"/>')
                out.append(f'<text x="{MARGIN_L + iw - 120}" y="{ly}" font-family="sans-serif" '
                           f'font-size="11">{s.label}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
