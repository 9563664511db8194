"""Static SVG line charts of daily series with phase gridlines, change-point
markers and peak dots."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

from .io import atomic_write

PALETTE = ("#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
DASHES = ("", "6,3", "2,2", "8,3,2,3")

W, H = 960, 420
LEFT, RIGHT, TOP, BOTTOM = 60, 180, 30, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _month_ticks(d0: date, d1: date) -> list[date]:
    ticks = []
    y, m = d0.year, d0.month
    while True:
        t = date(y, m, 1)
        if t > d1:
            break
        if t >= d0:
            ticks.append(t)
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return ticks


def plot_svg(
    series: Sequence,
    path: str | Path,
    phases: Iterable = (),
    points: Iterable = (),
    title: str = "",
) -> Path:
    """Write a standalone SVG line chart.

    ``series`` are DailySeries (one polyline each). ``phases`` is a
    PhaseTable or an iterable of boundary dates (grey gridlines). ``points``
    are DetectedPoint-like objects with ``kind``, ``date`` and ``series``:
    change points become red vertical lines (purple when they coincide
    with a phase boundary), peaks become blue dots on their series.
    """
    if not series:
        raise ValueError("nothing to plot")
    boundaries = sorted(
        {getattr(p, "begin", p) for p in (phases.rows if hasattr(phases, "rows") else phases)}
    )
    d0 = min(s.dates[0] for s in series)
    d1 = max(s.dates[-1] for s in series)
    span = max((d1 - d0).days, 1)
    vals = [float(v) for s in series for v in s.values]
    lo, hi = min(vals + [0.0]), max(vals + [0.0])
    if hi == lo:
        hi = lo + 1.0
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def x(d: date) -> float:
        return LEFT + pw * (d - d0).days / span

    def y(v: float) -> float:
        return TOP + ph * (hi - v) / (hi - lo)

    root = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(W), height=str(H),
                      viewBox=f"0 0 {W} {H}")
    ET.SubElement(root, "rect", width=str(W), height=str(H), fill="white")
    if title:
        t = ET.SubElement(root, "text", x=str(LEFT), y="18", attrib={"font-size": "14", "font-family": "sans-serif"})
        t.text = title

    axes = ET.SubElement(root, "g", attrib={"class": "axes", "stroke": "black", "font-family": "sans-serif",
                                            "font-size": "10"})
    ET.SubElement(axes, "line", x1=str(LEFT), y1=_fmt(TOP + ph), x2=_fmt(LEFT + pw), y2=_fmt(TOP + ph))
    ET.SubElement(axes, "line", x1=str(LEFT), y1=str(TOP), x2=str(LEFT), y2=_fmt(TOP + ph))
    for tick in _month_ticks(d0, d1):
        ET.SubElement(axes, "line", x1=_fmt(x(tick)), y1=_fmt(TOP + ph), x2=_fmt(x(tick)), y2=_fmt(TOP + ph + 4))
        lab = ET.SubElement(axes, "text", x=_fmt(x(tick)), y=_fmt(TOP + ph + 16), stroke="none",
                            attrib={"text-anchor": "middle", "class": "tick"})
        lab.text = tick.strftime("%m/%Y")
    for v in (lo, (lo + hi) / 2, hi):
        lab = ET.SubElement(axes, "text", x=str(LEFT - 6), y=_fmt(y(v) + 3), stroke="none",
                            attrib={"text-anchor": "end"})
        lab.text = f"{v:g}"

    bset = set()
    for b in boundaries:
        if d0 <= b <= d1:
            bset.add(b)
            ET.SubElement(root, "line", x1=_fmt(x(b)), y1=str(TOP), x2=_fmt(x(b)), y2=_fmt(TOP + ph),
                          stroke="#999999", attrib={"class": "phase", "stroke-width": "1"})

    by_name = {}
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[(i // len(PALETTE)) % len(DASHES)]
        by_name[s.name] = s
        pts = " ".join(f"{_fmt(x(d))},{_fmt(y(float(v)))}" for d, v in zip(s.dates, s.values))
        attrs = {"class": "series", "fill": "none", "stroke": color, "stroke-width": "1.5", "data-name": s.name}
        if dash:
            attrs["stroke-dasharray"] = dash
        ET.SubElement(root, "polyline", points=pts, attrib=attrs)

    for p in points:
        if p.kind == "changepoint":
            same = p.date in bset
            ET.SubElement(root, "line", x1=_fmt(x(p.date)), y1=str(TOP), x2=_fmt(x(p.date)), y2=_fmt(TOP + ph),
                          stroke="purple" if same else "red",
                          attrib={"class": "changepoint", "stroke-width": "1.5"})
        elif p.kind == "peak":
            s = by_name.get(getattr(p, "series", ""), series[0])
            try:
                v = float(s.values[s.dates.index(p.date)])
            except ValueError:
                continue
            ET.SubElement(root, "circle", cx=_fmt(x(p.date)), cy=_fmt(y(v)), r="3.5", fill="blue",
                          attrib={"class": "peak"})

    legend = ET.SubElement(root, "g", attrib={"class": "legend", "font-family": "sans-serif", "font-size": "11"})
    lx = W - RIGHT + 15
    for i, s in enumerate(series):
        ly = TOP + 10 + 18 * i
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[(i // len(PALETTE)) % len(DASHES)]
        attrs = {"class": "legend-entry", "stroke": color, "stroke-width": "2"}
        if dash:
            attrs["stroke-dasharray"] = dash
        ET.SubElement(legend, "line", x1=str(lx), y1=str(ly), x2=str(lx + 20), y2=str(ly), attrib=attrs)
        t = ET.SubElement(legend, "text", x=str(lx + 26), y=str(ly + 4))
        t.text = s.name

    ET.indent(root)
    return atomic_write(path, ET.tostring(root, encoding="unicode") + "\n")
