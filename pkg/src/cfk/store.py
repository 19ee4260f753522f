"""Cluster complex enumeration by breadth-first mutation.

A cluster variable is identified by its g-vector with respect to the root
seed; a cluster by the sorted tuple of its variables' g-vectors.  Stores for
finite type can be exhausted; for infinite type they grow lazily up to a
cluster budget.
"""

from __future__ import annotations

import itertools
import json
import threading
import warnings
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .tropical import GVector, Matrix, Seed, permute_seed, root_seed, shift_seed

VarId = GVector
ClusterKey = tuple[GVector, ...]
Cell = frozenset


class StoreBudgetError(RuntimeError):
    """Expanding the store would exceed its cluster budget."""


class PartialStoreWarning(UserWarning):
    """An answer was computed on a store that is not exhausted."""


def cluster_key(gvecs) -> ClusterKey:
    return tuple(sorted(gvecs))


@dataclass
class Cluster:
    key: ClusterKey
    witness: Seed
    neighbors: dict[VarId, ClusterKey] = field(default_factory=dict)

    @property
    def vars(self) -> frozenset:
        return frozenset(self.key)

    @property
    def order(self) -> tuple[VarId, ...]:
        """Variables in the column order of the witness seed."""
        return self.witness.gvectors()

    def index(self, x: VarId) -> int:
        return self.order.index(x)


@dataclass(frozen=True)
class SimplicialComplex:
    """A finite simplicial complex given by its facets."""

    facets: frozenset

    @classmethod
    def from_facets(cls, facets) -> SimplicialComplex:
        fs = {frozenset(f) for f in facets}
        maximal = {f for f in fs if not any(f < g for g in fs)}
        return cls(frozenset(maximal))

    @property
    def vertices(self) -> frozenset:
        return frozenset().union(*self.facets) if self.facets else frozenset()

    @property
    def dimension(self) -> int:
        return max((len(f) - 1 for f in self.facets), default=-1)

    def faces(self) -> set[frozenset]:
        out = set()
        for f in self.facets:
            items = sorted(f)
            for r in range(1, len(items) + 1):
                out.update(frozenset(c) for c in itertools.combinations(items, r))
        return out

    def is_empty(self) -> bool:
        return not self.facets or self.facets == frozenset({frozenset()})


class ComplexStore:
    """Append-only store of clusters reachable from the root seed.

    Insertions go through a single lock; readers only ever see fully built
    clusters because a cluster is published into ``clusters`` in one step.
    """

    def __init__(self, b0: Matrix, max_clusters: int | None = None):
        self.root_seed = root_seed(b0)
        self.b0 = self.root_seed.b
        self.rank = len(self.b0)
        self.max_clusters = max_clusters
        self.clusters: dict[ClusterKey, Cluster] = {}
        self.variables: dict[VarId, int] = {}
        self._containing: dict[VarId, list[ClusterKey]] = {}
        self._lock = threading.Lock()
        self._shift: dict[VarId, VarId] = {}
        self._relative: dict[tuple[ClusterKey, ClusterKey], tuple] = {}
        self._shifted_root: Seed | None = None
        self.memo: dict = {}
        root = self._insert(self.root_seed)
        self.root = root.key

    # -- construction --------------------------------------------------------

    def _insert(self, seed: Seed) -> Cluster:
        key = cluster_key(seed.gvectors())
        with self._lock:
            existing = self.clusters.get(key)
            if existing is not None:
                return existing
            if self.max_clusters is not None and len(self.clusters) >= self.max_clusters:
                raise StoreBudgetError(f"cluster budget {self.max_clusters} reached")
            cl = Cluster(key, seed)
            for x in key:
                if x not in self.variables:
                    self.variables[x] = len(self.variables)
                self._containing.setdefault(x, []).append(key)
            self.clusters[key] = cl
            return cl

    def expand(self, cluster: Cluster | ClusterKey, k: int) -> Cluster:
        """The neighbour of ``cluster`` by mutation at witness column ``k`` (memoized)."""
        cl = self[cluster]
        x = cl.order[k]
        known = cl.neighbors.get(x)
        if known is not None:
            return self.clusters[known]
        seed = cl.witness.mutate(k)
        new = self._insert(seed)
        cl.neighbors[x] = new.key
        y = next(iter(new.vars - cl.vars))
        new.neighbors.setdefault(y, cl.key)
        return new

    def mutate_at(self, cluster: Cluster | ClusterKey, x: VarId) -> Cluster:
        cl = self[cluster]
        return self.expand(cl, cl.index(x))

    def neighbor_key(self, cluster: Cluster | ClusterKey, x: VarId) -> ClusterKey:
        """Key of the neighbour across the wall opposite ``x``, without inserting it."""
        cl = self[cluster]
        known = cl.neighbors.get(x)
        if known is not None:
            return known
        return cluster_key(cl.witness.mutate(cl.index(x)).gvectors())

    def __getitem__(self, cluster: Cluster | ClusterKey) -> Cluster:
        if isinstance(cluster, Cluster):
            return cluster
        return self.clusters[tuple(cluster)]

    def __contains__(self, key) -> bool:
        return tuple(key) in self.clusters

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def frontier(self) -> list[ClusterKey]:
        return [k for k, cl in self.clusters.items() if len(cl.neighbors) < self.rank]

    @property
    def exhausted(self) -> bool:
        return not self.frontier

    def containing(self, cell) -> list[ClusterKey]:
        """Enumerated clusters containing every variable of ``cell``."""
        cell = frozenset(cell)
        if not cell:
            return list(self.clusters)
        first = min(cell, key=lambda v: len(self._containing.get(v, ())))
        return [k for k in self._containing.get(first, ()) if cell <= self.clusters[k].vars]

    def is_cell(self, cell) -> bool:
        return bool(cell) and bool(self.containing(cell))

    def var_id(self, x: VarId) -> int:
        return self.variables[x]

    def var_by_id(self, i: int) -> VarId:
        for x, j in self.variables.items():
            if j == i:
                return x
        raise KeyError(f"no variable with id {i}")

    # -- complex ---------------------------------------------------------------

    def _warn_partial(self, what: str) -> None:
        if not self.exhausted:
            warnings.warn(f"{what} computed on a non-exhausted store", PartialStoreWarning, stacklevel=3)

    def star(self, cell) -> set[frozenset]:
        """All enumerated cells containing ``cell``."""
        cell = frozenset(cell)
        self._warn_partial("star")
        out = set()
        for key in self.containing(cell):
            rest = sorted(self.clusters[key].vars - cell)
            for r in range(len(rest) + 1):
                out.update(cell | frozenset(c) for c in itertools.combinations(rest, r))
        return out

    def link(self, cell) -> SimplicialComplex:
        """Faces of star members disjoint from ``cell``."""
        cell = frozenset(cell)
        self._warn_partial("link")
        facets = [self.clusters[k].vars - cell for k in self.containing(cell)]
        return SimplicialComplex.from_facets(facets)

    def complex(self) -> SimplicialComplex:
        return SimplicialComplex(frozenset(cl.vars for cl in self.clusters.values()))

    def exchange_graph(self) -> nx.Graph:
        """Clusters as nodes; an edge per known mutation, labelled by ``(out, in)`` variables."""
        g = nx.Graph()
        g.add_nodes_from(self.clusters)
        for key, cl in self.clusters.items():
            for x, other in cl.neighbors.items():
                if other in self.clusters and not g.has_edge(key, other):
                    y = next(iter(self.clusters[other].vars - cl.vars))
                    g.add_edge(key, other, exchange=(x, y))
        return g

    # -- shift -------------------------------------------------------------------

    def unshift_via(self, x: VarId, cluster: Cluster | ClusterKey) -> VarId:
        """x[-1]: replay the witness path of ``cluster`` from the seed with ``g = c = -I``."""
        cl = self[cluster]
        j = cl.index(x)
        shifted = shift_seed(self.b0).mutate_path(cl.witness.path)
        return tuple(row[j] for row in shifted.g)

    def shifted_root(self) -> Seed:
        """Labelled seed of the root cluster shifted by [1].

        It is the cluster ``u`` whose [-1]-image is the root; column j holds
        ``e_j[1]``.  Found by breadth-first search, expanding the store lazily.
        """
        if self._shifted_root is not None:
            return self._shifted_root
        target = set(self.root)
        queue = deque([self.root])
        seen = {self.root}
        while queue:
            key = queue.popleft()
            cl = self.clusters[key]
            down = shift_seed(self.b0).mutate_path(cl.witness.path).gvectors()
            if set(down) == target:
                perm = [down.index(e) for e in self.root_seed.gvectors()]
                seed = permute_seed(cl.witness, perm)
                if seed.b != self.b0:
                    raise RuntimeError("shifted root has a different exchange matrix")
                self._shifted_root = Seed(seed.b, seed.g, seed.c, ())
                return self._shifted_root
            for k in range(self.rank):
                nb = self.expand(cl, k)
                if nb.key not in seen:
                    seen.add(nb.key)
                    queue.append(nb.key)
        raise RuntimeError("shifted root cluster not found")

    def shift_via(self, x: VarId, cluster: Cluster | ClusterKey) -> VarId:
        """x[1] computed from the witness path of ``cluster``."""
        cl = self[cluster]
        j = cl.index(x)
        shifted = self.shifted_root().mutate_path(cl.witness.path)
        return tuple(row[j] for row in shifted.g)

    def shift_var(self, x: VarId) -> VarId:
        """The variable x[1]."""
        x = tuple(x)
        if x not in self.variables:
            raise KeyError(f"variable {x} is not enumerated")
        hit = self._shift.get(x)
        if hit is None:
            cl = self.clusters[self._containing[x][0]]
            shifted = self.shifted_root().mutate_path(cl.witness.path)
            for j, v in enumerate(cl.order):
                self._shift.setdefault(v, tuple(row[j] for row in shifted.g))
            hit = self._shift[x]
        return hit

    def shift_cluster(self, cluster: Cluster | ClusterKey) -> ClusterKey:
        return cluster_key(self.shift_var(x) for x in self[cluster].key)

    # -- seeds rooted at other clusters -------------------------------------------

    def relative_seed(self, base: Cluster | ClusterKey, target: Cluster | ClusterKey):
        """Seed of ``target`` computed with ``base`` as the initial cluster.

        Returns ``(labels, base_order, seed)``: ``labels`` are the root g-vectors
        of the target's columns, ``base_order`` the base variables in the order
        of the relative coordinates, and ``seed`` carries g- and c-vectors
        with respect to ``base``.
        """
        b, t = self[base], self[target]
        hit = self._relative.get((b.key, t.key))
        if hit is not None:
            return hit
        path = tuple(reversed(b.witness.path)) + t.witness.path
        absolute = b.witness
        relative = root_seed(b.witness.b)
        for k in path:
            absolute = absolute.mutate(k)
            relative = relative.mutate(k)
        out = (absolute.gvectors(), b.order, relative)
        self._relative[(b.key, t.key)] = out
        return out

    def relative_gvector(self, base: Cluster | ClusterKey, x: VarId) -> tuple[int, ...]:
        """g-vector of ``x`` with ``base`` as the initial cluster, in base column order."""
        x = tuple(x)
        owners = self._containing.get(x)
        if not owners:
            raise KeyError(f"variable {x} is not enumerated")
        labels, _, seed = self.relative_seed(base, owners[0])
        j = labels.index(x)
        return tuple(row[j] for row in seed.g)

    # -- export --------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "variables": [{"id": i, "g": list(x)} for x, i in sorted(self.variables.items(), key=lambda kv: kv[1])],
            "clusters": [sorted(self.variables[x] for x in key) for key in self.clusters],
            "exhausted": self.exhausted,
        }

    def exchange_graph_dot(self) -> str:
        g = self.exchange_graph()
        names = {key: f"c{i}" for i, key in enumerate(self.clusters)}
        lines = ["graph exchange {"]
        for key in self.clusters:
            ids = ",".join(str(self.variables[x]) for x in key)
            lines.append(f'  {names[key]} [label="{ids}"];')
        for u, v, data in g.edges(data=True):
            x, y = data["exchange"]
            if x not in self.clusters[u].vars:
                x, y = y, x
            lines.append(f'  {names[u]} -- {names[v]} [label="{self.variables[x]}→{self.variables[y]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def enumerate_complex(b0: Matrix, max_clusters: int | None = None) -> ComplexStore:
    """Breadth-first enumeration from the root seed.

    Stops when the exchange graph closes or ``max_clusters`` clusters are
    stored; in the latter case the store keeps a nonempty frontier.
    """
    if max_clusters is not None and max_clusters < 1:
        raise ValueError("max_clusters must be >= 1")
    store = ComplexStore(b0, max_clusters)
    grow(store, store.root)
    return store


def grow(store: ComplexStore, start: ClusterKey, limit: int | None = None) -> None:
    """BFS from ``start`` until closed, ``limit`` clusters stored, or the budget is hit."""
    queue = deque([start])
    seen = {start}
    while queue:
        key = queue.popleft()
        cl = store.clusters[key]
        for k in range(store.rank):
            if limit is not None and len(store) >= limit and cl.order[k] not in cl.neighbors:
                return
            try:
                nb = store.expand(cl, k)
            except StoreBudgetError:
                return
            if nb.key not in seen:
                seen.add(nb.key)
                queue.append(nb.key)


def store_from_json(data: dict | str, b0: Matrix) -> dict:
    """Decode the JSON export into ``{"variables": {id: g}, "clusters": [...], "exhausted": bool}``."""
    if isinstance(data, str):
        data = json.loads(data)
    variables = {int(v["id"]): tuple(v["g"]) for v in data["variables"]}
    clusters = [frozenset(variables[i] for i in c) for c in data["clusters"]]
    return {"variables": variables, "clusters": clusters, "exhausted": bool(data["exhausted"]), "rank": len(b0)}
