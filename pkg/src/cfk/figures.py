"""SVG drawings of the complex through its g-vector embedding (rank <= 3).

A point ``sum c_i Y_i`` is sent to ``sum c_i g(Y_i)`` and pushed radially to
the unit sphere.  Rank 3 is then flattened by stereographic projection from
the direction ``-(1, 1, 1)``, which lies inside the all-negative cone.
Floating point is used for drawing only.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .flow import Point
from .store import ComplexStore

SIZE = 400
SAMPLES = 16


def _embed(p: Point) -> tuple[float, ...]:
    n = len(p.items[0][0])
    v = [0.0] * n
    for x, w in p.items:
        for i in range(n):
            v[i] += float(w) * x[i]
    norm = math.sqrt(sum(a * a for a in v)) or 1.0
    return tuple(a / norm for a in v)


def _flatten(v: tuple[float, ...]) -> tuple[float, float]:
    if len(v) == 1:
        return (v[0], 0.0)
    if len(v) == 2:
        return v
    s = 1 / math.sqrt(3)
    pole = (-s, -s, -s)
    # Orthonormal basis of the plane orthogonal to the pole.
    e1 = (1 / math.sqrt(2), -1 / math.sqrt(2), 0.0)
    e2 = (1 / math.sqrt(6), 1 / math.sqrt(6), -2 / math.sqrt(6))
    t = 1 - sum(a * b for a, b in zip(v, pole))
    t = max(t, 1e-6)
    return (sum(a * b for a, b in zip(v, e1)) / t, sum(a * b for a, b in zip(v, e2)) / t)


class Canvas:
    def __init__(self, rank: int, scale: float | None = None):
        if rank > 3:
            raise ValueError("drawing needs rank at most 3")
        self.scale = scale or (SIZE / 2.6 if rank < 3 else SIZE / 9)
        self.items: list[str] = []

    def xy(self, p: Point) -> tuple[float, float]:
        x, y = _flatten(_embed(p))
        return (SIZE / 2 + self.scale * x, SIZE / 2 - self.scale * y)

    def path(self, a: Point, b: Point, color: str, width: float = 1.0) -> None:
        pts = []
        wa, wb = a.weights, b.weights
        for i in range(SAMPLES + 1):
            lam = i / SAMPLES
            mix = {v: (1 - lam) * float(wa.get(v, 0)) + lam * float(wb.get(v, 0)) for v in set(wa) | set(wb)}
            pts.append(self.xy(_FloatPoint(mix)))
        d = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.items.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="{width}"/>')

    def dot(self, p: Point, label: str, color: str = "black") -> None:
        x, y = self.xy(p)
        self.items.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        self.items.append(f'<text x="{x + 4:.2f}" y="{y - 4:.2f}" font-size="10">{escape(label)}</text>')

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
            f'viewBox="0 0 {SIZE} {SIZE}">\n'
        )
        return head + "\n".join(self.items) + "\n</svg>\n"


class _FloatPoint:
    """Duck-typed point with float weights, only for drawing."""

    def __init__(self, weights: dict):
        self.items = tuple((k, w) for k, w in weights.items() if w)


def fan_svg(store: ComplexStore, traces=(), sink=None) -> str:
    """The 1-skeleton of the complex, optionally overlaid with traced leaves."""
    canvas = Canvas(store.rank)
    edges = set()
    for key in store.clusters:
        for a in key:
            for b in key:
                if a < b:
                    edges.add((a, b))
    for a, b in sorted(edges):
        canvas.path(Point.of({a: 1}), Point.of({b: 1}), "#999999")
    for tr in traces:
        color = "#1a7f37" if tr.sense == "down" else "#cf222e"
        for seg in tr.segments:
            canvas.path(seg.entry, seg.exit, color, 2.0)
    for x, i in sorted(store.variables.items(), key=lambda kv: kv[1]):
        canvas.dot(Point.of({x: 1}), str(i))
    if sink is not None:
        canvas.dot(sink.support, "sink", "#1a7f37")
        canvas.dot(sink.shifted_support, "source", "#cf222e")
    return canvas.render()
