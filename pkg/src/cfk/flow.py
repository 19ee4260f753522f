"""Evolving triangles, points of the complex and the X-evolution flow.

All arithmetic is exact: weights and flow values are ``Fraction``s.  The flow
is evaluated inside top cells through its affine form ``b - c p``, where the
coefficients ``b`` and the scalar ``c`` depend only on the top cell.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .store import Cluster, ClusterKey, ComplexStore, VarId

DOWN, UP = "down", "up"


class FlowError(RuntimeError):
    """The flow cannot be evaluated at the requested place."""


def _frozen(weights: Mapping[VarId, Fraction]) -> tuple[tuple[VarId, Fraction], ...]:
    return tuple(sorted((tuple(k), Fraction(v)) for k, v in weights.items()))


@dataclass(frozen=True)
class Point:
    """A point of the complex: positive weights on the vertices of a cell, summing to 1."""

    items: tuple[tuple[VarId, Fraction], ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("a point needs a nonempty support")
        if any(w <= 0 for _, w in self.items):
            raise ValueError("point weights must be positive")
        if sum(w for _, w in self.items) != 1:
            raise ValueError("point weights must sum to 1")

    @classmethod
    def of(cls, weights: Mapping[VarId, Fraction]) -> Point:
        """Build from a mapping, dropping zero weights."""
        return cls(_frozen({k: v for k, v in weights.items() if v != 0}))

    @property
    def weights(self) -> dict[VarId, Fraction]:
        return dict(self.items)

    @property
    def cell(self) -> frozenset:
        return frozenset(k for k, _ in self.items)

    def __getitem__(self, x: VarId) -> Fraction:
        return self.weights.get(tuple(x), Fraction(0))


@dataclass(frozen=True)
class Direction:
    """Tangent vector: rational coefficients on vertices summing to 0."""

    items: tuple[tuple[VarId, Fraction], ...]

    def __post_init__(self):
        if sum(w for _, w in self.items) != 0:
            raise ValueError("direction coefficients must sum to 0")

    @classmethod
    def of(cls, coeffs: Mapping[VarId, Fraction]) -> Direction:
        return cls(_frozen({k: v for k, v in coeffs.items() if v != 0}))

    @property
    def coeffs(self) -> dict[VarId, Fraction]:
        return dict(self.items)

    def is_zero(self) -> bool:
        return not self.items


def realize(m: Mapping[VarId, int]) -> Point:
    """The point ``sum d_i V_i / sum d_i`` of a multiset ``{V_i: d_i}``."""
    m = {tuple(k): v for k, v in m.items() if v}
    if not m:
        raise ValueError("cannot realize an empty multiset")
    total = sum(m.values())
    return Point.of({k: Fraction(v, total) for k, v in m.items()})


def barycenter(cell) -> Point:
    return realize({x: 1 for x in cell})


@dataclass(frozen=True)
class SinkSpec:
    """The sink point X^ and its shift X^[1]."""

    support: Point
    shifted_support: Point

    @property
    def cell(self) -> frozenset:
        return self.support.cell

    @property
    def shifted_cell(self) -> frozenset:
        return self.shifted_support.cell

    def is_generic(self, store: ComplexStore) -> bool:
        """True if the sink is interior to a top cell."""
        return len(self.cell) == store.rank


def make_sink(store: ComplexStore, weights: Mapping[VarId, Fraction] | Point) -> SinkSpec:
    p = weights if isinstance(weights, Point) else Point.of(weights)
    if not store.is_cell(p.cell):
        raise ValueError("sink support is not a cell of the store")
    shifted = Point.of({store.shift_var(x): w for x, w in p.items})
    if not store.is_cell(shifted.cell):
        raise ValueError("shifted sink support is not a cell of the store")
    return SinkSpec(p, shifted)


def vertex_sink(store: ComplexStore, x: VarId) -> SinkSpec:
    return make_sink(store, {tuple(x): Fraction(1)})


def parse_sink(store: ComplexStore, text: str) -> SinkSpec:
    """Parse ``vertex:<id>``, ``cell:<id,id,...>`` or ``point:<id=p/q,...>``."""
    return make_sink(store, parse_point(store, text, kinds=("vertex", "cell", "point")))


def parse_point(store: ComplexStore, text: str, kinds=("cell", "point")) -> Point:
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    if kind not in kinds or not body.strip():
        raise ValueError(f"expected one of {', '.join(k + ':...' for k in kinds)}, got {text!r}")
    try:
        if kind == "vertex":
            return Point.of({store.var_by_id(int(body)): Fraction(1)})
        if kind == "cell":
            return barycenter(store.var_by_id(int(i)) for i in body.split(","))
        weights = {}
        for part in body.split(","):
            i, _, w = part.partition("=")
            weights[store.var_by_id(int(i))] = Fraction(w.strip())
        return Point.of(weights)
    except KeyError as exc:
        raise ValueError(f"unknown variable id in {text!r}") from exc


class TriangleKind(enum.Enum):
    TRIVIAL_W = "W=X"
    TRIVIAL_U = "U=X[1]"
    NONTRIVIAL = "nontrivial"


@dataclass(frozen=True)
class EvolvingTriangle:
    """``X -> W -> U -> X[1]`` with ``W`` and ``U`` given as multisets of cluster variables."""

    x: VarId
    cluster: ClusterKey
    w: tuple[tuple[VarId, int], ...]
    u: tuple[tuple[VarId, int], ...]
    kind: TriangleKind


def evolving_triangle(store: ComplexStore, x: VarId, t: Cluster | ClusterKey) -> EvolvingTriangle:
    """Split the g-vector of ``x`` relative to ``t`` into its positive part ``W`` and negative part ``U``."""
    cl = store[t]
    x = tuple(x)
    coef = store.relative_gvector(cl, x)
    order = cl.order
    w = tuple(sorted((order[j], a) for j, a in enumerate(coef) if a > 0))
    u = tuple(sorted((order[j], -a) for j, a in enumerate(coef) if a < 0))
    if not u:
        if w != ((x, 1),):
            raise FlowError(f"trivial triangle mismatch: {x} has coordinates {coef} in its own cluster")
        kind = TriangleKind.TRIVIAL_W
    elif not w:
        if u != ((store.shift_var(x), 1),):
            raise FlowError(f"shift mismatch for {x}: coordinates {coef}")
        kind = TriangleKind.TRIVIAL_U
    else:
        kind = TriangleKind.NONTRIVIAL
    return EvolvingTriangle(x, cl.key, w, u, kind)


@dataclass(frozen=True)
class BCoeffs:
    """Affine data of the downward flow on a top cell: ``flow(p) = b - c_scalar * p``."""

    cluster: ClusterKey
    b: tuple[tuple[VarId, Fraction], ...]
    c_scalar: Fraction

    def __getitem__(self, x: VarId) -> Fraction:
        return dict(self.b).get(tuple(x), Fraction(0))

    @property
    def as_dict(self) -> dict[VarId, Fraction]:
        return dict(self.b)


def b_coeffs(store: ComplexStore, sink: SinkSpec, t: Cluster | ClusterKey) -> BCoeffs:
    cl = store[t]
    cache = store.memo.setdefault(("b", sink), {})
    hit = cache.get(cl.key)
    if hit is not None:
        return hit
    b = {v: Fraction(0) for v in cl.key}
    c = Fraction(0)
    for x, weight in sink.support.items:
        tri = evolving_triangle(store, x, cl)
        if tri.w:
            total = sum(m for _, m in tri.w)
            for v, m in tri.w:
                b[v] += weight * Fraction(m, total)
        else:
            c -= weight
        if tri.u:
            total = sum(m for _, m in tri.u)
            for v, m in tri.u:
                b[v] -= weight * Fraction(m, total)
        else:
            c += weight
    out = BCoeffs(cl.key, _frozen(b), c)
    cache[cl.key] = out
    return out


def affine_direction(bc: BCoeffs, p: Mapping[VarId, Fraction], sense: str = DOWN) -> dict[VarId, Fraction]:
    """``b - c p`` (down) or its negation (up), on every vertex of the top cell."""
    sign = 1 if sense == DOWN else -1
    return {v: sign * (bv - bc.c_scalar * p.get(v, 0)) for v, bv in bc.b}


def _check_sense(sense: str) -> None:
    if sense not in (DOWN, UP):
        raise ValueError(f"sense must be {DOWN!r} or {UP!r}")


def flow_direction(
    store: ComplexStore,
    sink: SinkSpec,
    p: Point,
    sense: str = DOWN,
    cluster: Cluster | ClusterKey | None = None,
) -> Direction:
    """The X^-evolution flow at ``p``.

    Supported places: interiors of top cells, cells in the star of the sink
    or of its shift, and any point if a top cell ``cluster`` containing it
    is given (the flow is then read off that cell's affine form).
    """
    _check_sense(sense)
    sign = 1 if sense == DOWN else -1
    cell = p.cell
    if cluster is not None:
        cl = store[cluster]
        if not cell <= cl.vars:
            raise FlowError("point does not lie in the given cluster")
    elif len(cell) == store.rank and store.is_cell(cell):
        cl = store[store.containing(cell)[0]]
    elif store.is_cell(cell | sink.cell):
        target = sink.support.weights
        return Direction.of({v: sign * (target.get(v, 0) - p[v]) for v in cell | sink.cell})
    elif store.is_cell(cell | sink.shifted_cell):
        source = sink.shifted_support.weights
        return Direction.of({v: sign * (p[v] - source.get(v, 0)) for v in cell | sink.shifted_cell})
    else:
        raise FlowError("flow is only evaluated in top cells or in the stars of the singularities")
    return Direction.of(affine_direction(b_coeffs(store, sink, cl), p.weights, sense))


def crossing_direction(store: ComplexStore, sink: SinkSpec, t: Cluster | ClusterKey, alpha: VarId) -> str | None:
    """``"out"`` if the downward flow crosses from ``t`` to its mutation at ``alpha``, ``"in"`` for the reverse."""
    cl = store[t]
    if tuple(alpha) not in cl.vars:
        raise KeyError(f"{alpha} is not in the cluster")
    b = b_coeffs(store, sink, cl)[alpha]
    if b < 0:
        return "out"
    if b > 0:
        return "in"
    return None
