"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line with its runtime."""

import contextlib
import json
import random
import time
from pathlib import Path

import networkx as nx

from cfk.flow import DOWN, UP, Point, vertex_sink
from cfk.foliation import Classification, Status, classify_foliation, random_point, trace, trace_map
from cfk.green import generic_sink, orient_from_cvectors, orient_from_flow, verify_green
from cfk.topology import betti, polygon_h1, sphere_betti
from cfk.tropical import check_duality, root_seed

from .conftest import store_for

FIXTURES = Path(__file__).parent / "fixtures"


@contextlib.contextmanager
def criterion(request, number, title, limit):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        ok = ok and dt < limit
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({dt:.2f}s, limit {limit}s)"
        if reporter is not None:
            reporter.write_line(line)
        else:
            print(line)
    assert dt < limit, f"took {dt:.1f}s, limit {limit}s"


def random_skew(rng, n):
    b = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = rng.randint(-2, 2)
            b[i][j], b[j][i] = v, -v
    return tuple(map(tuple, b))


def test_duality_and_sign_coherence(request):
    # Walks are restarted from a fresh random matrix after 100 steps or once
    # g-vector entries pass 256 bits, so 10^4 mutations stay cheap.
    with criterion(request, 1, "tropical duality and sign-coherence", 10):
        rng = random.Random(2024)
        done = 0
        while done < 10_000:
            seed = root_seed(random_skew(rng, rng.randint(2, 6)))
            for _ in range(100):
                seed = seed.mutate(rng.randrange(seed.rank))
                done += 1
                assert check_duality(seed), seed
                if done == 10_000 or max(abs(a) for row in seed.g for a in row).bit_length() > 256:
                    break


def test_enumeration_counts(request):
    with criterion(request, 2, "enumeration counts", 5):
        for name, want in {"A1": (2, 2), "A2": (5, 5), "A3": (9, 14), "D4": (16, 50)}.items():
            s = store_for(name)
            assert s.exhausted and (len(s.variables), len(s)) == want, name


def test_sphericity(request):
    with criterion(request, 3, "cluster complexes are homology spheres", 30):
        for name in ("A1", "A2", "A3", "D4", "A1+A2"):
            s = store_for(name)
            assert betti(s).reduced == sphere_betti(s.rank - 1), name


def test_dynkin_compactness(request):
    with criterion(request, 4, "Dynkin foliations are compact and acyclic", 300):
        for name in ("A2", "A3", "D4"):
            s = store_for(name)
            for x in s.variables:
                rep = classify_foliation(s, vertex_sink(s, x), samples=10, budget=10_000, seed=1)
                assert rep.classification is Classification.COMPACT, (name, x, rep.outcomes)
                assert rep.outcomes[DOWN] == {Status.REACHED_SINK: rep.samples}
                assert rep.outcomes[UP] == {Status.REACHED_SOURCE: rep.samples}


def _drawn(data):
    top, bottom = nx.DiGraph(), nx.DiGraph()
    for t, h in data["cross"] + data["rest"]:
        top.add_edge(h, t)
    for t, h in data["rest"]:
        bottom.add_edge(h, t)
    for t, h in data["cross"]:
        bottom.add_edge(t, h)
    return top, bottom


def test_green_coincidence(request):
    with criterion(request, 5, "flow orientation equals the green orientation on A3", 60):
        s = store_for("A3")
        for base in s.clusters:
            rep = verify_green(s, generic_sink(s, base))
            assert rep.equal and rep.is_dag, base
            assert rep.sources == [s.shift_cluster(base)] and rep.sinks == [base]

        data = json.loads((FIXTURES / "a3_orientations.json").read_text())
        top, bottom = _drawn(data)
        u = s.mutate_at(s.root, (0, 0, 1))
        w = s.mutate_at(u, (1, 0, 0))
        ou = orient_from_flow(s, generic_sink(s, u.key))
        ow = orient_from_cvectors(s, w.key)
        matcher = nx.algorithms.isomorphism.DiGraphMatcher(top, ou)
        maps = [m for m in matcher.isomorphisms_iter() if all(ow.has_edge(m[a], m[b]) for a, b in bottom.edges)]
        assert len(maps) == 1
        assert maps[0][data["top_sink"]] == u.key and maps[0][data["bottom_sink"]] == w.key


def _affine_ball():
    return store_for("Atilde:1,2", 500)


def test_euclidean_compact_case(request):
    with criterion(request, 6, "affine A(1,2): the variable from vertex 2 has a compact foliation", 120):
        s = _affine_ball()
        x = next(iter(s.expand(s.root, 2).vars - s[s.root].vars))
        rep = classify_foliation(s, vertex_sink(s, x), samples=10, seed=3, clusters=list(s.clusters)[:60])
        assert rep.classification is Classification.COMPACT, rep.outcomes


def test_euclidean_semi_compact_case(request):
    with criterion(request, 7, "affine A(1,2): an initial projective gives a semi-compact foliation", 120):
        s = _affine_ball()
        x = s[s.root].order[0]
        rep = classify_foliation(s, vertex_sink(s, x), samples=10, seed=3, clusters=list(s.clusters)[:60], keep_traces=True)
        assert rep.classification is Classification.SEMI_COMPACT, rep.outcomes
        assert all(d.terminated or u.terminated for d, u in rep.traces)
        assert rep.one_sided >= 1
        assert Status.CYCLE not in rep.outcomes[DOWN] and Status.CYCLE not in rep.outcomes[UP]
        unfinished = [t for d, u in rep.traces for t in (d, u) if not t.terminated]
        assert all(t.status is Status.BUDGET for t in unfinished)


def _midpoint(seg):
    a, b = seg.entry.weights, seg.exit.weights
    return Point.of({v: (a.get(v, 0) + b.get(v, 0)) / 2 for v in set(a) | set(b)})


def test_trace_invariance(request):
    with criterion(request, 8, "trace maps are constant along leaves", 60):
        rng = random.Random(8)
        leaves = 0
        while leaves < 100:
            s = store_for(rng.choice(["A3", "D4"]))
            x = rng.choice(sorted(s.variables))
            sink = vertex_sink(s, x)
            key = rng.choice(list(s.clusters))
            start = random_point(key, rng)
            down = trace(s, sink, start, DOWN)
            up = trace(s, sink, start, UP)
            assert down.terminated and up.terminated
            if not down.segments or not up.segments:
                continue
            points = [start, _midpoint(rng.choice(down.segments)), _midpoint(rng.choice(up.segments))]
            if any(p.cell in ({x}, {s.shift_var(x)}) for p in points):
                continue
            for sense in (DOWN, UP):
                images = {trace_map(s, x, p, sense, sink=sink) for p in points}
                assert len(images) == 1, (x, sense, points, images)
            leaves += 1


def test_squares_and_pentagons(request):
    with criterion(request, 9, "squares and pentagons generate H1 of the exchange graph", 30):
        for name in ("A1+A1", "A2", "A3", "D4"):
            assert polygon_h1(store_for(name)) == 0, name


def test_shift_is_well_defined(request):
    with criterion(request, 10, "shift is independent of the witness and bijective", 30):
        for name in ("A3", "D4"):
            s = store_for(name)
            images = {}
            for key in s.clusters:
                for x in key:
                    y = s.shift_via(x, key)
                    assert images.setdefault(x, y) == y, (name, x)
            assert set(images) == set(s.variables)
            assert set(images.values()) == set(s.variables)
            assert all(s.shift_var(x) == y for x, y in images.items())
