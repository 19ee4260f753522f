"""Simplicial homology of cluster complexes and the polygon check on exchange graphs.

Simplices are oriented by sorting their vertices; the boundary of
``[v_0, ..., v_k]`` is ``sum (-1)^i [.., v_i omitted, ..]``.  Homology is
reduced: chains in degree -1 are spanned by the empty simplex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx
from sympy import Matrix
from sympy import ZZ
from sympy.matrices.normalforms import invariant_factors
from sympy.polys.matrices import DomainMatrix

from .store import ComplexStore, SimplicialComplex


class IncompleteStoreError(RuntimeError):
    """Homology of a truncated store is not meaningful."""


@dataclass
class ChainComplex:
    """Simplices by dimension (from -1) and integer boundary matrices.

    ``boundary[k]`` maps k-chains to (k-1)-chains, rows indexed by
    ``cells[k-1]`` and columns by ``cells[k]``.
    """

    cells: dict[int, list[tuple]]
    boundary: dict[int, list[list[int]]]

    @classmethod
    def from_complex(cls, cx: SimplicialComplex) -> ChainComplex:
        cells: dict[int, list[tuple]] = {-1: [()]}
        for face in cx.faces():
            cells.setdefault(len(face) - 1, []).append(tuple(sorted(face)))
        for k in cells:
            cells[k].sort()
        boundary = {}
        for k in sorted(cells):
            if k < 0:
                continue
            index = {s: i for i, s in enumerate(cells[k - 1])}
            mat = [[0] * len(cells[k]) for _ in cells[k - 1]]
            for j, s in enumerate(cells[k]):
                for i in range(len(s)):
                    mat[index[s[:i] + s[i + 1 :]]][j] = -1 if i % 2 else 1
            boundary[k] = mat
        return cls(cells, boundary)

    @property
    def top(self) -> int:
        return max(self.cells)

    def rank(self, k: int) -> int:
        mat = self.boundary.get(k)
        if not mat or not mat[0]:
            return 0
        return _rank(mat)


def _rank(mat) -> int:
    rows = [[ZZ(x) for x in row] for row in mat]
    return DomainMatrix(rows, (len(rows), len(rows[0])), ZZ).rank()


def _torsion(mat) -> list[int]:
    if not mat or not mat[0]:
        return []
    return [int(f) for f in invariant_factors(Matrix(mat), domain=ZZ) if abs(int(f)) > 1]


@dataclass
class BettiReport:
    """Reduced Betti numbers ``reduced[k]`` for k = 0..top; ``empty`` is the degree -1 number."""

    reduced: tuple[int, ...]
    empty: int
    euler: int
    torsion: dict[int, list[int]] | None = None

    def __getitem__(self, k: int) -> int:
        if k == -1:
            return self.empty
        return self.reduced[k] if 0 <= k < len(self.reduced) else 0

    def to_json(self) -> dict:
        out = {"betti": list(self.reduced), "euler": self.euler}
        if self.torsion is not None:
            out["torsion"] = [self.torsion.get(k, []) for k in range(len(self.reduced))]
        return out


def _as_complex(obj) -> SimplicialComplex:
    if isinstance(obj, ComplexStore):
        if not obj.exhausted:
            raise IncompleteStoreError("store is not exhausted")
        return obj.complex()
    return obj


def betti(obj, smith: bool = False) -> BettiReport:
    """Reduced Betti numbers over the rationals, with optional integer torsion."""
    cc = ChainComplex.from_complex(_as_complex(obj))
    ranks = {k: cc.rank(k) for k in range(0, cc.top + 2)}
    numbers = {}
    for k in range(-1, cc.top + 1):
        numbers[k] = len(cc.cells[k]) - ranks.get(k, 0) - ranks.get(k + 1, 0)
    euler = sum((-1) ** k * len(cc.cells[k]) for k in cc.cells if k >= 0)
    torsion = None
    if smith:
        # Torsion in degree k comes from the boundary of (k+1)-chains.
        torsion = {k: _torsion(cc.boundary[k + 1]) for k in range(0, cc.top) if k + 1 in cc.boundary}
    return BettiReport(tuple(numbers[k] for k in range(0, cc.top + 1)), numbers[-1], euler, torsion)


def sphere_betti(d: int) -> tuple[int, ...]:
    """Reduced Betti numbers of the d-sphere in degrees 0..d."""
    return tuple(int(k == d) for k in range(d + 1))


@dataclass
class SuspensionReport:
    holds: bool
    whole: BettiReport
    link: BettiReport


def suspension_check(store: ComplexStore, x) -> SuspensionReport:
    """Compare ``b~_k`` of the complex with ``b~_{k-1}`` of the link of ``x``."""
    whole = betti(store)
    link = betti(store.link({tuple(x)}))
    top = max(len(whole.reduced), len(link.reduced) + 1)
    holds = all(whole[k] == link[k - 1] for k in range(top + 1))
    return SuspensionReport(holds, whole, link)


def polygon_faces(store: ComplexStore) -> list[list]:
    """Cycles of clusters around each codimension-2 cell, kept when they are squares or pentagons."""
    graph = store.exchange_graph()
    n = store.rank
    if n < 2:
        return []
    ridges = set()
    for cl in store.clusters.values():
        ridges.update(frozenset(c) for c in itertools.combinations(sorted(cl.key), n - 2))
    faces = []
    for ridge in sorted(ridges, key=sorted):
        around = store.containing(ridge) if ridge else list(store.clusters)
        sub = graph.subgraph(around)
        if len(around) in (4, 5) and all(d == 2 for _, d in sub.degree()) and nx.is_connected(sub):
            faces.append([u for u, _ in nx.find_cycle(sub)])
    return faces


def polygon_h1(store: ComplexStore) -> int:
    """Rank of H1 of the exchange graph with its squares and pentagons filled in."""
    if not store.exhausted:
        raise IncompleteStoreError("store is not exhausted")
    graph = store.exchange_graph()
    edges = {frozenset(e): i for i, e in enumerate(graph.edges)}
    cycle_rank = graph.number_of_edges() - graph.number_of_nodes() + nx.number_connected_components(graph)
    faces = polygon_faces(store)
    if not faces:
        return cycle_rank
    mat = [[0] * len(faces) for _ in edges]
    ordered = list(graph.edges)
    for j, cyc in enumerate(faces):
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            i = edges[frozenset((a, b))]
            u, _ = ordered[i]
            mat[i][j] += 1 if u == a else -1
    return cycle_rank - _rank(mat)
