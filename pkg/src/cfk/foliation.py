"""Piecewise-linear tracing of X^-leaves and foliation classification.

Inside a top cell the downward flow is ``b - c p``, so a leaf is a straight
segment whose flow vector keeps its direction and only rescales by
``1 - c s``.  A leaf therefore either runs into the singular point ``b / c``
of the cell or leaves it through a wall.  Walls are found exactly.
"""

from __future__ import annotations

import enum
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .flow import (
    DOWN,
    UP,
    FlowError,
    Point,
    SinkSpec,
    _check_sense,
    affine_direction,
    b_coeffs,
    barycenter,
)
from .store import ClusterKey, ComplexStore, StoreBudgetError, VarId

DEFAULT_BUDGET = 10_000
DENOMINATOR = 997


class Status(enum.Enum):
    REACHED_SINK = "ReachedSink"
    REACHED_SOURCE = "ReachedSource"
    CYCLE = "CycleDetected"
    BUDGET = "BudgetExhausted"
    NON_GENERIC = "NonGeneric"


class Classification(enum.Enum):
    COMPACT = "Compact"
    SEMI_COMPACT = "SemiCompactEvidence"
    UNRESOLVED = "Unresolved"
    CYCLE = "CycleFound"


@dataclass(frozen=True)
class Segment:
    cluster: ClusterKey
    entry: Point
    exit: Point


@dataclass
class LeafTrace:
    """Segments of one leaf in a fixed sense, with the reason the trace stopped.

    ``store_exhausted`` distinguishes a store budget hit from the crossing
    budget; ``cycle_start`` is the index of the first repeated segment;
    ``face`` describes the face hit by a non-generic leaf.
    """

    sense: str
    segments: list[Segment] = field(default_factory=list)
    status: Status = Status.BUDGET
    store_exhausted: bool = False
    cycle_start: int | None = None
    face: frozenset | None = None
    stopped_in: ClusterKey | None = None

    @property
    def terminated(self) -> bool:
        return self.status in (Status.REACHED_SINK, Status.REACHED_SOURCE)

    @property
    def end(self) -> Point | None:
        return self.segments[-1].exit if self.segments else None

    def to_json(self, store: ComplexStore, sink: SinkSpec) -> dict:
        def pt(p: Point) -> dict:
            return {str(store.var_id(x)): str(w) for x, w in p.items}

        return {
            "sink": pt(sink.support),
            "sense": self.sense,
            "status": self.status.value,
            "segments": [
                {"cluster": sorted(store.var_id(x) for x in seg.cluster), "entry": pt(seg.entry), "exit": pt(seg.exit)}
                for seg in self.segments
            ],
        }


def _top_cluster(store: ComplexStore, p: Point) -> ClusterKey | None:
    if len(p.cell) != store.rank:
        return None
    hits = store.containing(p.cell)
    return hits[0] if hits else None


def trace(
    store: ComplexStore,
    sink: SinkSpec,
    start: Point,
    sense: str = DOWN,
    budget: int = DEFAULT_BUDGET,
    until=None,
) -> LeafTrace:
    """Follow the leaf through ``start`` in the given sense.

    ``until(cluster_key)`` may stop the trace early when it returns true for
    the top cell being entered; ``stopped_in`` then records that cell and
    the last segment ends on its wall.
    """
    _check_sense(sense)
    out = LeafTrace(sense)
    if start == sink.support:
        out.status = Status.REACHED_SINK
        return out
    if start == sink.shifted_support:
        out.status = Status.REACHED_SOURCE
        return out

    key = _top_cluster(store, start)
    if key is None:
        # Lower-dimensional starts are only followed inside the stars of the singularities,
        # where the leaf is a straight segment to the singular point.
        for target, status, wanted in (
            (sink.support, Status.REACHED_SINK, DOWN),
            (sink.shifted_support, Status.REACHED_SOURCE, UP),
        ):
            owners = store.containing(start.cell | target.cell)
            if owners and sense == wanted:
                out.segments.append(Segment(owners[0], start, target))
                out.status = status
                return out
        raise FlowError("start must be interior to a top cell or lie in the star of a singularity")

    p = dict(start.weights)
    seen: dict[tuple, int] = {}
    crossings = 0
    while True:
        if until is not None and until(key):
            out.stopped_in = key
            return out
        bc = b_coeffs(store, sink, key)
        d = affine_direction(bc, p, sense)
        kappa = bc.c_scalar if sense == DOWN else -bc.c_scalar
        entry = Point.of(p)

        exit_s = None
        for v, dv in d.items():
            if dv < 0:
                s = p.get(v, Fraction(0)) / -dv
                if exit_s is None or s < exit_s:
                    exit_s = s
        if all(dv == 0 for dv in d.values()):
            out.status = _singular_status(entry, sink, sense)
            return out
        if kappa > 0 and (exit_s is None or 1 / kappa <= exit_s):
            q = Point.of({v: p.get(v, 0) + d[v] / kappa for v in d})
            out.segments.append(Segment(key, entry, q))
            out.status = _singular_status(q, sink, sense)
            return out

        q = {v: p.get(v, Fraction(0)) + exit_s * d[v] for v in d}
        vanishing = [v for v in d if q[v] == 0 and d[v] < 0]
        out.segments.append(Segment(key, entry, Point.of(q)))
        if len(vanishing) != 1:
            out.status = Status.NON_GENERIC
            out.face = frozenset(v for v in q if q[v] != 0)
            return out
        alpha = vanishing[0]
        b_alpha = bc[alpha]
        if (sense == DOWN and b_alpha >= 0) or (sense == UP and b_alpha <= 0):
            raise FlowError(f"leaf leaves {key} against the sign of b at the wall opposite {alpha}")

        crossings += 1
        if crossings > budget:
            out.status = Status.BUDGET
            return out
        try:
            nxt = store.mutate_at(key, alpha)
        except StoreBudgetError:
            out.status = Status.BUDGET
            out.store_exhausted = True
            return out
        new = next(iter(nxt.vars - store[key].vars))
        p = {v: q[v] for v in q if v != alpha}
        p[new] = Fraction(0)
        key = nxt.key

        d_new = affine_direction(b_coeffs(store, sink, key), p, sense)
        if d_new[new] <= 0:
            raise FlowError(f"flow at the wall does not enter {key}")
        state = (key, new, Point.of(p))
        if state in seen:
            out.status = Status.CYCLE
            out.cycle_start = seen[state]
            return out
        seen[state] = len(out.segments)


def _singular_status(q: Point, sink: SinkSpec, sense: str) -> Status:
    if sense == DOWN and q == sink.support:
        return Status.REACHED_SINK
    if sense == UP and q == sink.shifted_support:
        return Status.REACHED_SOURCE
    raise FlowError(f"flow vanishes at {q}, which is not the expected singularity")


def random_point(cell, rng: random.Random, denominator: int = DENOMINATOR) -> Point:
    """A random interior point with weights in ``1/denominator``."""
    cell = sorted(cell)
    if denominator < len(cell):
        raise ValueError("denominator too small for an interior point")
    cuts = sorted(rng.sample(range(1, denominator), len(cell) - 1))
    parts = [b - a for a, b in zip([0, *cuts], [*cuts, denominator])]
    return Point.of({v: Fraction(m, denominator) for v, m in zip(cell, parts)})


def perturb(p: Point, rng: random.Random, denominator: int = DENOMINATOR) -> Point:
    """Move ``p`` a small random step towards a random point of its cell."""
    r = random_point(p.cell, rng, denominator)
    eps = Fraction(1, denominator)
    return Point.of({v: (1 - eps) * p[v] + eps * r[v] for v in p.cell})


@dataclass
class FoliationReport:
    sink: SinkSpec
    samples: int
    outcomes: dict[str, Counter]
    classification: Classification
    one_sided: int = 0
    traces: list[tuple[LeafTrace, LeafTrace]] = field(default_factory=list, repr=False)

    def to_json(self, store: ComplexStore) -> dict:
        return {
            "sink": {str(store.var_id(x)): str(w) for x, w in self.sink.support.items},
            "samples": self.samples,
            "outcomes": {sense: {s.value: n for s, n in c.items()} for sense, c in self.outcomes.items()},
            "one_sided": self.one_sided,
            "classification": self.classification.value,
        }


def trace_both(store, sink, start, budget=DEFAULT_BUDGET, rng=None, retries=3):
    """Trace a leaf both ways, perturbing the start when it meets a face of codimension two or more."""
    rng = rng or random.Random(0)
    for attempt in range(retries + 1):
        down = trace(store, sink, start, DOWN, budget)
        up = trace(store, sink, start, UP, budget)
        if Status.NON_GENERIC not in (down.status, up.status) or attempt == retries:
            return down, up
        start = perturb(start, rng)
    raise AssertionError("unreachable")


def classify_foliation(
    store: ComplexStore,
    sink: SinkSpec,
    samples: int = 10,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    clusters=None,
    keep_traces: bool = False,
) -> FoliationReport:
    """Trace from every barycenter plus ``samples`` random points per top cell, in both senses."""
    rng = random.Random(seed)
    keys = list(store.clusters) if clusters is None else list(clusters)
    outcomes = {DOWN: Counter(), UP: Counter()}
    pairs = []
    for key in keys:
        starts = [barycenter(key)] + [random_point(key, rng) for _ in range(samples)]
        for start in starts:
            if start in (sink.support, sink.shifted_support):
                continue
            down, up = trace_both(store, sink, start, budget, rng)
            outcomes[DOWN][down.status] += 1
            outcomes[UP][up.status] += 1
            pairs.append((down, up))

    both = sum(1 for d, u in pairs if d.terminated and u.terminated)
    one = sum(1 for d, u in pairs if d.terminated != u.terminated)
    cycles = outcomes[DOWN][Status.CYCLE] + outcomes[UP][Status.CYCLE]
    if cycles:
        cls = Classification.CYCLE
    elif both == len(pairs):
        cls = Classification.COMPACT
    elif both + one == len(pairs) and one:
        cls = Classification.SEMI_COMPACT
    else:
        cls = Classification.UNRESOLVED
    return FoliationReport(sink, len(pairs), outcomes, cls, one, pairs if keep_traces else [])


def project(p: Point, x: VarId) -> Point:
    """Drop the ``x``-coordinate and renormalize: the projection from the star of ``x`` onto its link."""
    x = tuple(x)
    rest = {v: w for v, w in p.items if v != x}
    if not rest:
        raise ValueError("cannot project the vertex itself")
    total = sum(rest.values())
    return Point.of({v: w / total for v, w in rest.items()})


def trace_map(
    store: ComplexStore,
    x: VarId,
    p: Point,
    sense: str = DOWN,
    budget: int = DEFAULT_BUDGET,
    sink: SinkSpec | None = None,
) -> Point:
    """Follow the ``x``-leaf through ``p`` into the star of ``x`` (down) or ``x[1]`` (up) and project to the link."""
    from .flow import vertex_sink

    _check_sense(sense)
    x = tuple(x)
    sink = sink or vertex_sink(store, x)
    target = x if sense == DOWN else store.shift_var(x)
    if p.cell == {target}:
        raise ValueError("the singular point has no trace")
    if store.is_cell(p.cell | {target}):
        return project(p, target)
    leaf = trace(store, sink, p, sense, budget, until=lambda key: target in key)
    if leaf.stopped_in is None:
        raise FlowError(f"leaf did not reach the star of {target}: {leaf.status.value}")
    return project(leaf.segments[-1].exit, target)
