"""Orientations of the exchange graph: from the flow and from c-vectors.

Convention: an arc ``t -> t'`` means the downward flow crosses from ``t`` into
``t'``, equivalently the mutation of ``t`` at the exchanged variable is green
with respect to the shifted base cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .flow import SinkSpec, b_coeffs, make_sink
from .store import ClusterKey, ComplexStore
from .tropical import InvariantError, _sign, transpose, unimodular_inverse

FLOW, CVECTOR = "flow", "cvector"


class OrientationError(RuntimeError):
    """The sink is not generic or the orientation is not a DAG."""


def _frontier_aware_edges(store: ComplexStore):
    for key, cl in store.clusters.items():
        for x, other in cl.neighbors.items():
            if other in store.clusters:
                yield key, x, other


def orient_from_flow(store: ComplexStore, sink: SinkSpec) -> nx.DiGraph:
    """Arc ``t -> mu_a(t)`` iff ``b_a(t) < 0``; raises on a zero coefficient."""
    og = nx.DiGraph(provenance=FLOW)
    og.add_nodes_from(store.clusters)
    for key, x, other in _frontier_aware_edges(store):
        b = b_coeffs(store, sink, key)[x]
        if b == 0:
            raise OrientationError(f"b vanishes at the wall opposite {x} in {key}: sink is not generic")
        if b < 0:
            y = next(iter(store[other].vars - store[key].vars))
            og.add_edge(key, other, exchange=(x, y))
    og.graph["frontier"] = set(store.frontier)
    return og


def cvectors_wrt_shift(store: ComplexStore, base: ClusterKey, t: ClusterKey) -> dict:
    """c-vectors of the variables of ``t`` with respect to ``base[1]``.

    Uses ``C^{X[1]}_V = -(C^V_X)^{-1}`` with ``C^V_X`` the c-matrix of the base
    cluster ``X`` computed with ``V = t`` as initial seed.
    """
    _, rows, seed = store.relative_seed(t, base)
    inv = unimodular_inverse(seed.c)
    cols = transpose(inv)
    return {v: tuple(-a for a in col) for v, col in zip(rows, cols)}


def orient_from_cvectors(store: ComplexStore, base: ClusterKey) -> nx.DiGraph:
    """Arc out of ``t`` at ``V_a`` iff the c-vector of ``V_a`` w.r.t. ``base[1]`` is non-negative."""
    base = store[base].key
    og = nx.DiGraph(provenance=CVECTOR)
    og.add_nodes_from(store.clusters)
    for key, cl in store.clusters.items():
        cvecs = cvectors_wrt_shift(store, base, key)
        for x, other in cl.neighbors.items():
            if other not in store.clusters:
                continue
            sign = _sign(cvecs[x])
            if sign == 0:
                raise InvariantError(f"c-vector of {x} in {key} is not sign-coherent: {cvecs[x]}")
            if sign > 0:
                y = next(iter(store[other].vars - cl.vars))
                og.add_edge(key, other, exchange=(x, y))
    og.graph["frontier"] = set(store.frontier)
    return og


@dataclass
class GreenReport:
    equal: bool
    mismatched_arcs: list = field(default_factory=list)
    is_dag: bool = False
    sources: list = field(default_factory=list)
    sinks: list = field(default_factory=list)
    expected_source: ClusterKey | None = None
    expected_sink: ClusterKey | None = None

    @property
    def ok(self) -> bool:
        return (
            self.equal
            and self.is_dag
            and self.sources == [self.expected_source]
            and self.sinks == [self.expected_sink]
        )

    def to_json(self, store: ComplexStore) -> dict:
        def ids(key):
            return None if key is None else sorted(store.var_id(x) for x in key)

        return {
            "equal": self.equal,
            "mismatched_arcs": [[ids(a), ids(b)] for a, b in self.mismatched_arcs],
            "source": ids(self.sources[0]) if len(self.sources) == 1 else [ids(s) for s in self.sources],
            "sink": ids(self.sinks[0]) if len(self.sinks) == 1 else [ids(s) for s in self.sinks],
            "dag": self.is_dag,
        }


def generic_sink(store: ComplexStore, base: ClusterKey, weights=None) -> SinkSpec:
    """The barycenter of ``base``, or the given positive weights on its variables."""
    cl = store[base]
    if weights is None:
        weights = {x: Fraction(1, store.rank) for x in cl.key}
    if set(weights) != set(cl.key):
        raise ValueError("a generic sink needs a weight on every variable of its cluster")
    return make_sink(store, weights)


def verify_green(store: ComplexStore, sink: SinkSpec) -> GreenReport:
    """Compare the flow and c-vector orientations and check the source/sink structure."""
    if not sink.is_generic(store):
        raise OrientationError("the sink must be interior to a top cell")
    base = store.containing(sink.cell)[0]
    flow = orient_from_flow(store, sink)
    cvec = orient_from_cvectors(store, base)
    a, b = set(flow.edges), set(cvec.edges)
    interior = [k for k in store.clusters if k not in flow.graph["frontier"]]
    return GreenReport(
        equal=a == b,
        mismatched_arcs=sorted(a ^ b),
        is_dag=nx.is_directed_acyclic_graph(flow),
        sources=[k for k in interior if flow.in_degree(k) == 0],
        sinks=[k for k in interior if flow.out_degree(k) == 0],
        expected_source=store.shift_cluster(base),
        expected_sink=base,
    )


def maximal_green_sequences(store: ComplexStore, og: nx.DiGraph, limit: int = 1000) -> list[tuple[int, ...]]:
    """Directed paths from the unique source to the unique sink, as sequences of mutated positions.

    Positions are those of the source cluster's labelled seed, carried along
    each path, so the sequences can be replayed with ``Seed.mutate_path``.
    """
    if not nx.is_directed_acyclic_graph(og):
        raise OrientationError("orientation is not acyclic")
    sources = [k for k in og if og.in_degree(k) == 0]
    sinks = [k for k in og if og.out_degree(k) == 0]
    if len(sources) != 1 or len(sinks) != 1:
        raise OrientationError("orientation needs a unique source and a unique sink")
    source, target = sources[0], sinks[0]
    out: list[tuple[int, ...]] = []

    def walk(key, labels, seq):
        if len(out) >= limit:
            return
        if key == target:
            out.append(tuple(seq))
            return
        for nxt in og.successors(key):
            x, y = og.edges[key, nxt]["exchange"]
            k = labels.index(x)
            walk(nxt, labels[:k] + (y,) + labels[k + 1 :], seq + [k])

    walk(source, store[source].order, [])
    return out


def orientation_dot(store: ComplexStore, og: nx.DiGraph, mismatched=()) -> str:
    """DOT digraph; arcs are green, and red where two orientations disagree."""
    names = {key: f"c{i}" for i, key in enumerate(store.clusters)}
    bad = set(mismatched)
    lines = ["digraph orientation {"]
    for key in og.nodes:
        ids = ",".join(str(store.var_id(x)) for x in key)
        lines.append(f'  {names[key]} [label="{ids}"];')
    for u, v, data in og.edges(data=True):
        x, y = data["exchange"]
        color = "red" if (u, v) in bad else "green"
        lines.append(f'  {names[u]} -> {names[v]} [color={color}, label="{store.var_id(x)}→{store.var_id(y)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
