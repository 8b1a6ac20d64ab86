"""Command-line front door: ``pebblex <subcommand> ...``.

Exit status: 0 when every check passes, 1 on a verification failure, 2 on
usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import random
import shlex
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .agents import GeneralAgent
from .anon_bfs import InvariantBreach, SameNode, decompose, first_visit_order
from .generators import random_bipartite_graph, random_graph
from .graph import GraphError, PortLabeledGraph, graph_from_dict, load_graph, save_graph
from .placement import NotBipartite, Placement, assign_roles, place_pebbles_bipartite, place_pebbles_general
from .sim import ConfigError, SimulationConfig, SimulationTrace, TraceFormatError, WakeupSchedule, run
from .uxs import (
    BudgetExceeded,
    Certified,
    ExplorationSequence,
    NoCertifiedSequence,
    Randomized,
    SequenceFormatError,
    load_sequence,
    save_sequence,
    uxs_for,
)
from .verify import (
    Instance,
    SweepReport,
    check_trace,
    exhaustive_general,
    impossibility_sweep,
    random_bipartite,
    random_general,
    sweep,
)

DEFAULT_SEED = 0
OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    """Everything needed to replay one simulation bit for bit."""

    version: str
    command: list[str]
    seed: int | None
    config: dict
    outcome: str
    checks: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)


# ---------------------------------------------------------------- parsing helpers


def _pair(text: str, what: str) -> tuple[int, int]:
    try:
        a, b = (int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must look like A,B (two integers), got {text!r}") from None
    return a, b


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers, got {text!r}") from None


def _load_graph(path: str) -> PortLabeledGraph:
    try:
        return load_graph(path)
    except FileNotFoundError:
        raise UsageError(f"graph file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"graph file {path} is not valid JSON: {exc}") from None
    except GraphError as exc:
        raise UsageError(f"invalid graph in {path}: {type(exc).__name__}: {exc}") from None


def _check_nodes(g: PortLabeledGraph, *nodes: int) -> None:
    for v in nodes:
        if not 0 <= v < g.n:
            raise UsageError(f"node {v} outside 0..{g.n - 1}")


def _placement(g: PortLabeledGraph, a: int, b: int, mode: str) -> Placement:
    _check_nodes(g, a, b)
    try:
        if mode == "bipartite":
            return place_pebbles_bipartite(g, a, b)
        return place_pebbles_general(g, a, b)
    except (SameNode, NotBipartite) as exc:
        raise UsageError(str(exc)) from None


def _sequence(g: PortLabeledGraph, path: str | None, seed: int) -> ExplorationSequence:
    if path is not None:
        try:
            seq = load_sequence(path)
        except FileNotFoundError:
            raise UsageError(f"sequence file not found: {path}") from None
        except SequenceFormatError as exc:
            raise UsageError(f"bad sequence file {path}: {exc}") from None
        return seq
    try:
        return uxs_for(g.n, Certified())
    except NoCertifiedSequence:
        pass
    try:
        return uxs_for(g.n, Randomized(seed=seed, graph=g))
    except BudgetExceeded as exc:
        raise UsageError(f"{exc}; pass --uxs or another --seed") from None


def to_dot(g: PortLabeledGraph, pebbles: dict | None = None, starts: Sequence[int] = ()) -> str:
    pebbles = pebbles or {}
    lines = ["graph G {"]
    for v in g.nodes:
        attrs = [f'label="{v}"']
        if v in pebbles:
            attrs.append(f'style=filled fillcolor="{pebbles[v].value}"')
        if v in starts:
            attrs.append("shape=doublecircle")
        lines.append(f"  {v} [{' '.join(attrs)}];")
    for u, v, pu, pv in g.edges():
        lines.append(f'  {u} -- {v} [taillabel="{pu}" headlabel="{pv}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- subcommands


def cmd_simulate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    g = _load_graph(args.graph)
    a, b = _pair(args.start, "--start")
    w1, w2 = _pair(args.wake, "--wake")
    pl = _placement(g, a, b, args.mode)
    seq = _sequence(g, args.uxs, args.seed) if args.mode == "bipartite" else None
    try:
        cfg = SimulationConfig(g, pl.pebbles, (a, b), WakeupSchedule(w1, w2), args.mode, seq, args.max_rounds)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    if args.literal and args.mode == "general":
        trace, out = run(cfg, lambda c, i: GeneralAgent(c.graph.n, literal=True))
    else:
        trace, out = run(cfg)
    rep = check_trace(trace, g, args.mode, pl, cfg.wake, len(seq) if seq else None, args.bound_constant)
    header = {
        "graph": g.to_dict(),
        "starts": [a, b],
        "wake": [w1, w2],
        "mode": args.mode,
        "pebbles": pl.pebbles.to_dict(),
        "roles": {"x": pl.roles.x, "y": pl.roles.y},
        "case": pl.case,
        "uxs": list(seq.offsets) if seq else None,
        "literal": bool(args.literal),
    }
    if args.trace:
        with open(args.trace, "w") as fh:
            trace.write(fh, header)
    if args.dot:
        Path(args.dot).write_text(to_dot(g, pl.pebbles, (a, b)))
    ok = out.ok and rep.ok
    manifest = RunManifest(
        __version__, list(argv), args.seed if seq is not None and args.uxs is None else None,
        header, out.summary(), dict(rep.checks),
    )
    if args.manifest:
        Path(args.manifest).write_text(manifest.to_json() + "\n")
    print(f"case {pl.case}; roles x={pl.roles.x} y={pl.roles.y}")
    if seq is not None:
        print(f"exploration sequence: length {len(seq)}, {seq.certificate.describe()}")
    print(f"outcome: {out.summary()}")
    if out.exploration_time is not None:
        print(f"exploration time {out.exploration_time}")
    for name, passed in rep.checks.items():
        print(f"  {name}: {'pass' if passed else 'FAIL'}")
    dec = pl.decomposition
    if not ok and dec is not None and dec.z_prime == pl.roles.x:
        print("note: flagged corner case, the waiter's final node equals its start")
    if not ok:
        _print_replay(args, argv, g, seq)
    print(f"RESULT: {'PASS' if ok else 'FAIL'}")
    return OK if ok else FAIL


def _print_replay(args, argv, g, seq) -> None:
    wdir = Path(args.witness_dir)
    wdir.mkdir(parents=True, exist_ok=True)
    gpath = wdir / f"graph_{g.digest()}.json"
    save_graph(g, gpath)
    cmd = ["pebblex", "simulate", "--graph", str(gpath), "--start", args.start, "--wake", args.wake, "--mode", args.mode]
    if seq is not None:
        spath = wdir / f"uxs_{g.digest()}.txt"
        save_sequence(seq, spath)
        cmd += ["--uxs", str(spath)]
    if args.max_rounds is not None:
        cmd += ["--max-rounds", str(args.max_rounds)]
    if args.literal:
        cmd.append("--literal")
    print("replay: " + shlex.join(cmd))


def cmd_place(args: argparse.Namespace, argv: Sequence[str]) -> int:
    g = _load_graph(args.graph)
    a, b = _pair(args.start, "--start")
    try:
        pl = _placement(g, a, b, args.mode)
    except InvariantBreach as exc:
        print(f"placement breach: {exc}")
        return FAIL
    print(f"mode {args.mode}")
    print(f"roles x={pl.roles.x} y={pl.roles.y} swapped={pl.roles.swapped}")
    print(f"case {pl.case}")
    print(f"color_index {pl.pebbles.color_index}")
    for v, c in sorted(pl.pebbles.items()):
        print(f"  {v}: {c.value}")
    if args.dot:
        Path(args.dot).write_text(to_dot(g, pl.pebbles, (a, b)))
    return OK


def cmd_bfs_order(args: argparse.Namespace, argv: Sequence[str]) -> int:
    g = _load_graph(args.graph)
    _check_nodes(g, args.root)
    fo = first_visit_order(g, args.root)
    print(f"root {args.root}")
    print("f-order " + " ".join(map(str, fo.order)))
    print(f"z {fo.last}")
    if args.pair:
        a, b = _pair(args.pair, "--pair")
        _check_nodes(g, a, b)
        try:
            roles = assign_roles(g, a, b)
            dec = decompose(g, roles.x, roles.y)
        except SameNode as exc:
            raise UsageError(str(exc)) from None
        except InvariantBreach as exc:
            print(f"decomposition breach: {exc}")
            return FAIL
        print(f"roles x={roles.x} y={roles.y} swapped={roles.swapped}")
        print(f"z_x {dec.z}")
        print(f"z'_x {dec.z_prime}")
        print(f"P nodes {' '.join(map(str, dec.to_z.nodes))} ports {' '.join(map(str, dec.to_z.ports))}"
              f"{'' if dec.avoided_x else ' (passes x)'}")
        print(f"P1 nodes {' '.join(map(str, dec.to_x.nodes))} ports {' '.join(map(str, dec.to_x.ports))}")
    return OK


def cmd_impossibility(args: argparse.Namespace, argv: Sequence[str]) -> int:
    offsets = _int_list(args.offsets, "--offsets")
    try:
        rep = impossibility_sweep(args.T, offsets)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(rep.summary())
    for pattern, dx, dy in rep.survivors[:20]:
        print(f"  survivor: pebbles(x,y)={pattern} x:{dx} y:{dy}")
    print(f"RESULT: {'PASS' if rep.ok else 'FAIL'}")
    return OK if rep.ok else FAIL


def cmd_sweep(args: argparse.Namespace, argv: Sequence[str]) -> int:
    if args.n_max < 2:
        raise UsageError("--n-max must be at least 2")
    print(f"seed {args.seed}")
    if args.mode == "general":
        if args.exhaustive:
            if args.n_max > 4:
                raise UsageError("exhaustive sweeps are limited to --n-max 4")
            insts = exhaustive_general(args.n_max, args.n_min or 2, args.literal)
        else:
            insts = random_general(args.count, args.seed, args.n_min or 5, args.n_max, args.literal)
    else:
        if args.exhaustive:
            raise UsageError("bipartite sweeps are random only")
        insts = random_bipartite(args.count, args.seed, args.n_min or 3, args.n_max)
    rep = sweep(insts, args.mode, args.jobs, args.bound_constant)
    print(rep.summary())
    print(f"{rep.seconds:.1f}s")
    _report_failures(rep, args)
    ok = rep.ok
    print(f"RESULT: {'PASS' if ok else 'FAIL'}")
    return OK if ok else FAIL


def _report_failures(rep: SweepReport, args: argparse.Namespace) -> None:
    wdir = Path(args.witness_dir)
    shown = rep.failures[: args.show]
    if shown:
        wdir.mkdir(parents=True, exist_ok=True)
    for r in shown:
        print(f"  FAIL {r.details.get('case')} {r.failed} {r.details.get('summary')}")
        print("    replay: " + replay_command(r.instance, wdir))
    for flag, inst in rep.flagged_examples.items():
        wdir.mkdir(parents=True, exist_ok=True)
        print(f"  flagged {flag}, example: " + replay_command(inst, wdir))


def replay_command(inst: Instance, wdir: Path) -> str:
    g = graph_from_dict(inst.graph)
    gpath = wdir / f"graph_{g.digest()}.json"
    save_graph(g, gpath)
    a, b = inst.starts
    cmd = ["pebblex", "simulate", "--graph", str(gpath), "--start", f"{a},{b}",
           "--wake", f"{inst.wake[0]},{inst.wake[1]}", "--mode", inst.mode]
    if inst.uxs is not None:
        spath = wdir / f"uxs_{g.digest()}.txt"
        save_sequence(ExplorationSequence(g.n, inst.uxs), spath)
        cmd += ["--uxs", str(spath)]
    if inst.literal:
        cmd.append("--literal")
    return shlex.join(cmd)


def cmd_gen_graph(args: argparse.Namespace, argv: Sequence[str]) -> int:
    n = args.n
    if n < 2:
        raise UsageError("--n must be at least 2")
    edges = args.edges if args.edges is not None else n - 1
    top = (n // 2) * (n - n // 2) if args.bipartite else n * (n - 1) // 2
    if not n - 1 <= edges <= top:
        raise UsageError(f"--edges must lie in {n - 1}..{top} for n={n}")
    rng = random.Random(args.seed)
    make = random_bipartite_graph if args.bipartite else random_graph
    for _ in range(1000):
        g = make(n, edges - (n - 1), rng)
        if len(g.edges()) == edges:
            break
    else:
        raise UsageError(f"could not reach {edges} edges with this bipartition; try another --seed")
    text = json.dumps(g.to_dict(), indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"seed {args.seed}; wrote {args.out} (n={n}, edges={edges})")
    else:
        sys.stdout.write(text)
    return OK


def cmd_check(args: argparse.Namespace, argv: Sequence[str]) -> int:
    try:
        text = Path(args.trace).read_text()
    except FileNotFoundError:
        raise UsageError(f"trace file not found: {args.trace}") from None
    try:
        trace, header = SimulationTrace.from_ndjson(text)
    except TraceFormatError as exc:
        raise UsageError(f"bad trace {args.trace}: {exc}") from None
    if args.graph:
        g = _load_graph(args.graph)
    elif "graph" in header:
        try:
            g = graph_from_dict(header["graph"])
        except GraphError as exc:
            raise UsageError(f"bad graph in trace header: {exc}") from None
    else:
        raise UsageError("trace header has no graph; pass --graph")
    mode = args.mode or header.get("mode", "general")
    a, b = trace.starts
    pl = _placement(g, a, b, mode)
    wake = WakeupSchedule(*header["wake"]) if "wake" in header else None
    uxs = header.get("uxs")
    rep = check_trace(trace, g, mode, pl, wake, len(uxs) if uxs else None, args.bound_constant)
    for name, passed in rep.checks.items():
        print(f"  {name}: {'pass' if passed else 'FAIL'}")
    for k, v in rep.details.items():
        print(f"  {k} = {v}")
    print(f"RESULT: {'PASS' if rep.ok else 'FAIL'}")
    return OK if rep.ok else FAIL


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pebblex", description="Two-agent pebble-guided graph exploration.")
    ap.add_argument("--version", action="version", version=f"pebblex {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one simulation and audit its trace")
    s.add_argument("--graph", required=True)
    s.add_argument("--start", required=True, help="A,B")
    s.add_argument("--wake", default="1,1", help="W1,W2 (global rounds, >= 1)")
    s.add_argument("--mode", choices=("general", "bipartite"), default="general")
    s.add_argument("--uxs", help="exploration sequence file (bipartite)")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for a randomized sequence")
    s.add_argument("--trace", help="write the trace as ndjson")
    s.add_argument("--manifest", help="write a replay manifest as JSON")
    s.add_argument("--max-rounds", type=int)
    s.add_argument("--dot", help="write graph and pebbles as DOT")
    s.add_argument("--literal", action="store_true", help="general mode: unhardened subroutine reading")
    s.add_argument("--bound-constant", type=float, default=3.0)
    s.add_argument("--witness-dir", default="witnesses")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("place-pebbles", help="print the pebble placement")
    s.add_argument("--graph", required=True)
    s.add_argument("--start", required=True)
    s.add_argument("--mode", choices=("general", "bipartite"), default="general")
    s.add_argument("--dot")
    s.set_defaults(func=cmd_place)

    s = sub.add_parser("bfs-order", help="print the first-visit order and path decomposition")
    s.add_argument("--graph", required=True)
    s.add_argument("--root", type=int, required=True)
    s.add_argument("--pair", help="A,B: also print roles, z_x, z'_x, P and P1")
    s.set_defaults(func=cmd_bfs_order)

    s = sub.add_parser("verify-impossibility", help="refute every decision pair on the three-graph class")
    s.add_argument("--T", type=int, default=6)
    s.add_argument("--offsets", default="0,1")
    s.set_defaults(func=cmd_impossibility)

    s = sub.add_parser("sweep", help="run many instances and audit every trace")
    s.add_argument("--mode", choices=("general", "bipartite"), default="general")
    s.add_argument("--n-max", type=int, default=9)
    s.add_argument("--n-min", type=int)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--exhaustive", action="store_true", help="general mode: every labeled graph up to --n-max")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--literal", action="store_true")
    s.add_argument("--bound-constant", type=float, default=3.0)
    s.add_argument("--show", type=int, default=10, help="failures to print with replay lines")
    s.add_argument("--witness-dir", default="witnesses")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("gen-graph", help="emit a seeded random port-labeled graph")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--edges", type=int, help="total edge count (default: a tree)")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--bipartite", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen_graph)

    s = sub.add_parser("check", help="audit a saved ndjson trace")
    s.add_argument("--trace", required=True)
    s.add_argument("--graph")
    s.add_argument("--mode", choices=("general", "bipartite"))
    s.add_argument("--bound-constant", type=float, default=3.0)
    s.set_defaults(func=cmd_check)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help exits 0, bad usage exits 2
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
