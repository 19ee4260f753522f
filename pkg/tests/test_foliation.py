import random
from fractions import Fraction as F

import pytest

from cfk.flow import DOWN, UP, FlowError, Point, barycenter, flow_direction, make_sink, vertex_sink
from cfk.foliation import (
    Classification,
    Status,
    classify_foliation,
    perturb,
    project,
    random_point,
    trace,
    trace_both,
    trace_map,
)

P0 = (1, 0, 0)


def test_start_at_singularities(stores):
    s = stores("A3")
    sink = vertex_sink(s, P0)
    assert trace(s, sink, sink.support, UP).status is Status.REACHED_SINK
    assert trace(s, sink, sink.shifted_support, DOWN).status is Status.REACHED_SOURCE
    assert trace(s, sink, sink.support).segments == []


def test_a1_every_point_is_singular(stores):
    s = stores("A1")
    sink = vertex_sink(s, (1,))
    up = trace(s, sink, sink.shifted_support, UP)
    assert up.status is Status.REACHED_SOURCE and not up.segments


def test_segments_chain_and_follow_the_flow(stores):
    rng = random.Random(2)
    s = stores("D4")
    x = next(iter(s.variables))
    sink = vertex_sink(s, x)
    for key in list(s.clusters)[:15]:
        for sense in (DOWN, UP):
            tr = trace(s, sink, random_point(key, rng), sense)
            assert tr.terminated
            for a, b in zip(tr.segments, tr.segments[1:]):
                assert a.exit == b.entry
            for seg in tr.segments:
                d = flow_direction(s, sink, seg.entry, sense, cluster=seg.cluster).coeffs
                step = {v: seg.exit[v] - seg.entry[v] for v in seg.cluster}
                ratios = {step[v] / d[v] for v in d}
                assert len(ratios) == 1 and next(iter(ratios)) > 0
            end = tr.segments[-1].exit
            assert end == (sink.support if sense == DOWN else sink.shifted_support)


def test_leaf_determinism(stores):
    rng = random.Random(4)
    s = stores("A3")
    sink = make_sink(s, {(1, 0, 0): F(1, 4), (0, 1, 0): F(3, 4)})
    tr = trace(s, sink, random_point(s.root, rng))
    for k in range(1, len(tr.segments)):
        seg = tr.segments[k]
        if len(seg.entry.cell) == 3:
            again = trace(s, sink, seg.entry)
            assert again.segments == tr.segments[k:]


def test_budget_and_store_budget(stores):
    s = stores("Atilde:1,2", 60)
    sink = vertex_sink(s, (1, 0, 0))
    rng = random.Random(0)
    seen = set()
    for key in list(s.clusters):
        for sense in (DOWN, UP):
            tr = trace(s, sink, random_point(key, rng), sense, budget=3)
            seen.add((tr.status, tr.store_exhausted))
    assert (Status.BUDGET, False) in seen or (Status.BUDGET, True) in seen


def test_rank_two_walls_are_vertices(stores):
    s = stores("A2")
    sink = vertex_sink(s, (1, 0))
    tr = trace(s, sink, barycenter(s.root))
    assert tr.status is Status.REACHED_SINK


def test_leaf_into_a_vertex_is_non_generic_and_retried(stores):
    s = stores("A3")
    sink = vertex_sink(s, P0)
    key = s.mutate_at(s.root, P0).key
    v = (-1, 0, 0)
    # Inside a top cell every leaf is a line along b - c p, so stepping back from v along
    # the flow at v gives a start whose leaf runs straight into v.
    start = Point.of({v: F(49, 50), (0, 0, 1): F(1, 100), (0, 1, 0): F(1, 100)})
    assert set(start.cell) == set(key)
    tr = trace(s, sink, start, UP)
    assert tr.status is Status.NON_GENERIC
    assert tr.face == {v}
    down, up = trace_both(s, sink, start, rng=random.Random(1))
    assert down.terminated and up.terminated


def test_lower_dimensional_starts(stores):
    s = stores("A3")
    sink = vertex_sink(s, P0)
    edge = next(c for c in (frozenset(k) - {P0} for k in s.containing({P0})))
    tr = trace(s, sink, barycenter(edge), DOWN)
    assert tr.status is Status.REACHED_SINK and len(tr.segments) == 1
    far = next(v for v in s.variables if not s.is_cell({v, P0}) and not s.is_cell({v, s.shift_var(P0)}))
    with pytest.raises(FlowError):
        trace(s, sink, Point.of({far: 1}))


def test_random_points_are_interior():
    rng = random.Random(9)
    cell = [(1, 0), (0, 1), (1, 1)]
    for _ in range(50):
        p = random_point(cell, rng)
        assert p.cell == set(cell)
        assert all(w.denominator in (1, 997) or 997 % w.denominator == 0 for _, w in p.items)
        q = perturb(p, rng)
        assert q.cell == p.cell and q != p


@pytest.mark.parametrize("name", ["A2", "A3"])
def test_dynkin_foliations_are_compact(stores, name):
    s = stores(name)
    for x in s.variables:
        rep = classify_foliation(s, vertex_sink(s, x), samples=2)
        assert rep.classification is Classification.COMPACT
        assert rep.outcomes[DOWN][Status.CYCLE] == 0


def test_projection():
    x, v = (1, 0), (0, 1)
    assert project(Point.of({x: F(1, 2), v: F(1, 2)}), x) == Point.of({v: 1})
    with pytest.raises(ValueError):
        project(Point.of({x: 1}), x)


def test_trace_map_lands_in_the_link(stores):
    rng = random.Random(6)
    s = stores("A3")
    link = s.link({P0})
    assert len(link.vertices) == 4
    for key in s.clusters:
        p = random_point(key, rng)
        if P0 in key:
            continue
        img = trace_map(s, P0, p, DOWN)
        assert any(img.cell <= f for f in link.facets)


def test_trace_map_in_star_projects_directly(stores):
    s = stores("A3")
    key = s.containing({P0})[0]
    v = next(iter(set(key) - {P0}))
    assert trace_map(s, P0, Point.of({P0: F(1, 2), v: F(1, 2)})) == Point.of({v: 1})


def test_report_json(stores):
    s = stores("A2")
    rep = classify_foliation(s, vertex_sink(s, (1, 0)), samples=1)
    data = rep.to_json(s)
    assert data["classification"] == "Compact"
    tr = trace(s, rep.sink, barycenter(s.root))
    js = tr.to_json(s, rep.sink)
    assert js["status"] == "ReachedSink" and js["segments"][0]["cluster"] == sorted(s.var_id(x) for x in s.root)
