"""Command line entry point: ``cfk <command> --quiver NAME ...``.

Orientation convention in all displays: an arc ``t -> t'`` is a green
mutation of ``t`` with respect to the shifted base cluster, which is the
direction in which the downward flow crosses the wall.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import warnings
from pathlib import Path

from . import foliation as fol
from .figures import fan_svg
from .flow import DOWN, UP, FlowError, parse_point, parse_sink, vertex_sink
from .green import generic_sink, maximal_green_sequences, orient_from_flow, orientation_dot, verify_green
from .store import ComplexStore, PartialStoreWarning, enumerate_complex
from .topology import IncompleteStoreError, betti, polygon_h1, sphere_betti
from .tropical import check_duality, is_acyclic_quiver, load_quiver, root_seed

DEFAULTS = {
    "quiver": "A2",
    "budget": fol.DEFAULT_BUDGET,
    "samples": 10,
    "seed": 0,
    "output": None,
    "format": "json",
    "max_clusters": 10_000,
}
INT_KEYS = ("budget", "samples", "seed", "max_clusters")


class UsageError(Exception):
    """Bad input from the command line; exit status 1."""


def read_config(path: str | None) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    if not path:
        return {}
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"bad config line: {line!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then ``CFK_BUDGET``, then explicit flags."""
    cfg = dict(DEFAULTS)
    cfg.update(read_config(args.config))
    if os.environ.get("CFK_BUDGET"):
        cfg["budget"] = os.environ["CFK_BUDGET"]
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    for key in INT_KEYS:
        if cfg[key] is not None:
            try:
                cfg[key] = int(cfg[key])
            except ValueError as exc:
                raise UsageError(f"{key} must be an integer") from exc
    if cfg["budget"] < 1:
        raise UsageError("budget must be at least 1")
    if cfg["samples"] < 0:
        raise UsageError("samples must be non-negative")
    return cfg


def emit(cfg: dict, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if cfg["output"]:
        Path(cfg["output"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_store(cfg: dict) -> ComplexStore:
    try:
        b0 = load_quiver(cfg["quiver"])
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    return enumerate_complex(b0, cfg["max_clusters"])


def summary(store: ComplexStore) -> str:
    state = "exhausted" if store.exhausted else "partial"
    return f"{len(store.variables)} variables, {len(store)} clusters, {state}"


# -- commands ------------------------------------------------------------------


def cmd_enumerate(cfg, args) -> int:
    store = build_store(cfg)
    emit(cfg, {
        "variables": len(store.variables),
        "clusters": len(store),
        "exhausted": store.exhausted,
        "summary": summary(store),
    })
    return 0 if store.exhausted else 2


def cmd_export_complex(cfg, args) -> int:
    store = build_store(cfg)
    emit(cfg, store.exchange_graph_dot() if cfg["format"] == "dot" else store.to_json())
    return 0


def cmd_export_fan(cfg, args) -> int:
    store = build_store(cfg)
    if store.rank > 3:
        raise UsageError("fan export needs rank at most 3")
    emit(cfg, fan_svg(store))
    return 0


def _sink(store, text):
    try:
        return parse_sink(store, text)
    except ValueError as exc:
        raise UsageError(f"invalid sink: {exc}") from exc


def cmd_trace(cfg, args) -> int:
    store = build_store(cfg)
    sink = _sink(store, args.sink)
    try:
        start = parse_point(store, args.start)
    except ValueError as exc:
        raise UsageError(f"invalid start: {exc}") from exc
    senses = [DOWN, UP] if args.sense == "both" else [args.sense]
    traces = [fol.trace(store, sink, start, s, cfg["budget"]) for s in senses]
    if cfg["format"] == "svg":
        if store.rank > 3:
            raise UsageError("SVG output needs rank at most 3")
        emit(cfg, fan_svg(store, traces, sink))
    else:
        data = [t.to_json(store, sink) for t in traces]
        emit(cfg, data[0] if len(data) == 1 else data)
    return 0


def cmd_foliate(cfg, args) -> int:
    store = build_store(cfg)
    sink = _sink(store, args.sink)
    clusters = list(store.clusters)[: args.start_cells] if args.start_cells else None
    report = fol.classify_foliation(store, sink, cfg["samples"], cfg["budget"], cfg["seed"], clusters)
    emit(cfg, report.to_json(store))
    return 0


def _base(store, text):
    if text is None:
        return store.root
    try:
        cell = frozenset(store.var_by_id(int(i)) for i in text.split(","))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"invalid base cluster {text!r}") from exc
    hits = [k for k in store.containing(cell) if len(cell) == store.rank]
    if not hits:
        raise UsageError(f"{text!r} is not a cluster")
    return hits[0]


def cmd_green(cfg, args) -> int:
    store = build_store(cfg)
    if not is_acyclic_quiver(store.b0):
        warnings.warn("the quiver has oriented cycles; flow and green orientations may differ", stacklevel=1)
    base = _base(store, args.base)
    sink = generic_sink(store, base)
    report = verify_green(store, sink)
    if cfg["format"] == "dot":
        emit(cfg, orientation_dot(store, orient_from_flow(store, sink), report.mismatched_arcs))
    else:
        data = report.to_json(store)
        if args.sequences and store.exhausted and report.ok:
            data["maximal_green_sequences"] = [
                list(s) for s in maximal_green_sequences(store, orient_from_flow(store, sink), args.sequences)
            ]
        emit(cfg, data)
    return 0 if report.ok else 1


def cmd_homology(cfg, args) -> int:
    store = build_store(cfg)
    target = store
    if args.link:
        try:
            cell = {store.var_by_id(int(i)) for i in args.link.split(",")}
        except (KeyError, ValueError) as exc:
            raise UsageError(f"invalid cell {args.link!r}") from exc
        if not store.exhausted:
            raise UsageError("store is not exhausted")
        target = store.link(cell)
    try:
        emit(cfg, betti(target, smith=args.smith).to_json())
    except IncompleteStoreError as exc:
        raise UsageError(str(exc)) from exc
    return 0


def cmd_polygons(cfg, args) -> int:
    store = build_store(cfg)
    try:
        emit(cfg, {"h1": polygon_h1(store)})
    except IncompleteStoreError as exc:
        raise UsageError(str(exc)) from exc
    return 0


def _check_duality(store, cfg) -> bool:
    rng = random.Random(cfg["seed"])
    seed = root_seed(store.b0)
    for _ in range(1000):
        seed = seed.mutate(rng.randrange(store.rank))
        if not check_duality(seed):
            return False
        if any(abs(a) > 1 << 64 for row in seed.g for a in row):
            seed = root_seed(store.b0)
    return True


def _check_green(store, cfg) -> bool:
    return all(verify_green(store, generic_sink(store, key)).ok for key in list(store.clusters))


def _check_homology(store, cfg) -> bool:
    return betti(store).reduced == sphere_betti(store.rank - 1)


def _check_polygons(store, cfg) -> bool:
    return polygon_h1(store) == 0


def _check_foliation(store, cfg) -> bool:
    for x in store.variables:
        rep = fol.classify_foliation(store, vertex_sink(store, x), cfg["samples"], cfg["budget"], cfg["seed"])
        if rep.classification is not fol.Classification.COMPACT:
            return False
    return True


CHECKS = {
    "duality": _check_duality,
    "green": _check_green,
    "homology": _check_homology,
    "polygons": _check_polygons,
    "foliation": _check_foliation,
}


def cmd_verify(cfg, args) -> int:
    store = build_store(cfg)
    which = args.which or list(CHECKS)
    results = {}
    for name in which:
        if name != "duality" and not store.exhausted:
            results[name] = "fail: store is not exhausted"
            continue
        try:
            results[name] = "pass" if CHECKS[name](store, cfg) else "fail"
        except (FlowError, IncompleteStoreError, RuntimeError) as exc:
            results[name] = f"fail: {exc}"
    emit(cfg, results)
    return 0 if all(v == "pass" for v in results.values()) else 1


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiver", help="preset (A3, D4, Atilde:1,2, A1+A2) or B-matrix file")
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--budget", type=int, help="maximum wall crossings per leaf")
    common.add_argument("--samples", type=int, help="random starts per top cell")
    common.add_argument("--seed", type=int, help="PRNG seed")
    common.add_argument("--max-clusters", dest="max_clusters", type=int, help="cluster budget of the store")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--format", choices=["json", "dot", "svg"])

    parser = argparse.ArgumentParser(prog="cfk", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("enumerate", parents=[common], help="enumerate clusters").set_defaults(func=cmd_enumerate)
    sub.add_parser("export-complex", parents=[common], help="complex as JSON, exchange graph as DOT").set_defaults(
        func=cmd_export_complex
    )
    sub.add_parser("export-fan", parents=[common], help="SVG of the g-fan (rank <= 3)").set_defaults(func=cmd_export_fan)

    p = sub.add_parser("trace", parents=[common], help="trace one leaf")
    p.add_argument("--sink", required=True, help="vertex:<id>, cell:<ids> or point:<id=p/q,...>")
    p.add_argument("--start", required=True, help="cell:<ids> (barycenter) or point:<id=p/q,...>")
    p.add_argument("--sense", choices=[DOWN, UP, "both"], default=DOWN)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("foliate", parents=[common], help="classify a foliation by sampling leaves")
    p.add_argument("--sink", required=True)
    p.add_argument("--start-cells", type=int, default=0, help="sample only the first N clusters in BFS order")
    p.set_defaults(func=cmd_foliate)

    p = sub.add_parser("green", parents=[common], help="compare flow and green orientations")
    p.add_argument("--base", help="comma-separated variable ids of the base cluster (default: root)")
    p.add_argument("--sequences", type=int, default=0, help="also list up to N maximal green sequences")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("homology", parents=[common], help="reduced Betti numbers")
    p.add_argument("--link", help="comma-separated variable ids: use the link of this cell")
    p.add_argument("--smith", action="store_true", help="report torsion via Smith normal form")
    p.set_defaults(func=cmd_homology)

    sub.add_parser("polygons", parents=[common], help="H1 after filling squares and pentagons").set_defaults(
        func=cmd_polygons
    )

    p = sub.add_parser("verify", parents=[common], help="run checks; exit 0 iff all pass")
    p.add_argument("--which", action="append", choices=list(CHECKS))
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PartialStoreWarning)
            return args.func(cfg, args)
    except UsageError as exc:
        print(f"cfk: error: {exc}", file=sys.stderr)
        return 1
    except FlowError as exc:
        print(f"cfk: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
