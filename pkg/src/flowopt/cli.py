"""Command-line front end: ``flowopt <subcommand> FILE``."""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from flowopt.flow import GeometryClass, UnsupportedGeometry, classify_geometry
from flowopt.generate import flow_geometry, gflow_only_geometry
from flowopt.graph import EmptyGeometry, GeometryError, OpenGraph, parse_geometry, serialize_geometry
from flowopt.optimizer import OptimizedPattern, display_level, optimize_geometry
from flowopt.rewrite import optimize_by_rules, optimize_pattern, standard_pattern
from flowopt.simulator import (
    MAX_MEASURED,
    SimulationError,
    check_determinism,
    extract_linear_map,
    patterns_equivalent,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SIMULATE_LIMIT = 12  # measured qubits; diff skips the simulator above this


@dataclass
class RunReport:
    geometry: str
    classification: str
    depth: int | None = None
    levels: dict[str, int] = field(default_factory=dict)
    pattern: str = ""
    timing_ms: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


class _Timer:
    def __init__(self, report: RunReport) -> None:
        self.report = report

    def __call__(self, stage: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        self.report.timing_ms[stage] = round((time.perf_counter() - t0) * 1000, 3)
        return out


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _load(path: str) -> OpenGraph:
    return parse_geometry(_read(path))


def _name(path: str) -> str:
    return "stdin" if path == "-" else Path(path).stem


def _map_lines(cls: GeometryClass) -> list[str]:
    sets = cls.correcting_sets
    lines = []
    for q in sorted(sets, key=lambda v: (cls.layer[v], v)):
        tgt = ",".join(map(str, sorted(sets[q])))
        lines.append(f"  {q} -> {{{tgt}}}  layer {cls.layer[q]}")
    outs = sorted(q for q in cls.layer if q not in sets)
    if outs:
        top = max(cls.layer[q] for q in outs)
        lines.append(f"  outputs {','.join(map(str, outs))}  layer {top}")
    return lines


def cmd_classify(args) -> int:
    g = _load(args.file)
    cls = classify_geometry(g)
    print(cls.describe())
    if not cls.deterministic:
        return EXIT_FAIL
    for line in _map_lines(cls):
        print(line)
    return EXIT_OK


def _optimize(g: OpenGraph, engine: str, timer: _Timer) -> OptimizedPattern:
    cls = timer("classify", classify_geometry, g)
    timer.report.classification = cls.kind.value
    if not cls.deterministic:
        raise UnsupportedGeometry("geometry has neither flow nor gflow")
    timer.report.depth = cls.map.depth()
    fn = optimize_geometry if engine == "direct" else optimize_by_rules
    return timer("optimize", fn, g, cls)


def cmd_optimize(args) -> int:
    g = _load(args.file)
    report = RunReport(_name(args.file), "")
    timer = _Timer(report)
    try:
        opt = _optimize(g, args.engine, timer)
    except UnsupportedGeometry as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    pattern = opt.to_pattern()
    report.pattern = pattern.to_text()
    report.levels = {str(q): display_level(v) for q, v in sorted(opt.levels.items())}
    report.counts = pattern.count()
    if args.format == "structured":
        doc = asdict(report)
        doc["optimized"] = opt.to_dict()
        print(json.dumps(doc, indent=2))
    else:
        print(report.pattern)
    return EXIT_OK


def cmd_rewrite(args) -> int:
    g = _load(args.file)
    cls = classify_geometry(g)
    if not cls.deterministic:
        print("error: geometry has neither flow nor gflow", file=sys.stderr)
        return EXIT_FAIL
    trace: list = []
    start = standard_pattern(g, cls)
    final, _ = optimize_pattern(start, trace)
    print(f"standard: {start.to_text()}")
    for rule, pos in trace:
        print(f"{rule} {pos}")
    print(f"optimized: {final.to_text()}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = _load(args.file)
    cls = classify_geometry(g)
    if not cls.deterministic:
        print("error: geometry has neither flow nor gflow", file=sys.stderr)
        return EXIT_FAIL
    if args.engine == "standard":
        p = standard_pattern(g, cls)
    elif args.engine == "rules":
        p = optimize_by_rules(g, cls).to_pattern()
    else:
        p = optimize_geometry(g, cls).to_pattern()
    try:
        ok = check_determinism(p, seed=args.seed)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print("deterministic" if ok else "not deterministic")
    if not ok:
        return EXIT_FAIL
    u = extract_linear_map(p, check=False)
    with np.printoptions(precision=4, suppress=True, linewidth=120):
        print(u)
    return EXIT_OK


def _first_divergence(a: OptimizedPattern, b: OptimizedPattern):
    for q in sorted(a.vertices):
        if a.x_lists[q] != b.x_lists[q] or a.z_lists[q] != b.z_lists[q]:
            return q
    return None


def cmd_diff(args) -> int:
    g = _load(args.file)
    cls = classify_geometry(g)
    if not cls.deterministic:
        print("error: geometry has neither flow nor gflow", file=sys.stderr)
        return EXIT_FAIL
    direct = optimize_geometry(g, cls)
    trace: list = []
    rules = optimize_by_rules(g, cls, trace)
    if not direct.same_corrections(rules):
        q = _first_divergence(direct, rules)
        print("DIVERGENT")
        if q is not None:
            print(f"qubit {q}: direct X={direct.x_lists[q]} Z={direct.z_lists[q]}")
            print(f"qubit {q}: rules  X={rules.x_lists[q]} Z={rules.z_lists[q]}")
        for rule, pos in trace:
            print(f"  {rule} {pos}")
        return EXIT_FAIL
    if len(g.non_outputs) <= min(SIMULATE_LIMIT, MAX_MEASURED):
        std = standard_pattern(g, cls)
        opt = direct.to_pattern()
        if not (check_determinism(std) and patterns_equivalent(std, opt)):
            print("DIVERGENT")
            print("simulated standard and optimized patterns differ")
            return EXIT_FAIL
    else:
        print(f"note: {len(g.non_outputs)} measured qubits, simulation skipped", file=sys.stderr)
    print("EQUIVALENT")
    return EXIT_OK


def cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    if args.kind == "flow":
        g, _ = flow_geometry(args.qubits, rng)
    else:
        try:
            g = gflow_only_geometry(args.qubits, rng)
        except RuntimeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
    data = serialize_geometry(g)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def geometry_to_dot(g: OpenGraph | None, cls: GeometryClass | None = None) -> str:
    """DOT text: undirected graph edges plus the correction arcs as a dashed overlay."""
    lines = ["digraph geometry {"]
    if g is not None:
        for q in sorted(g.vertices):
            attrs = []
            if q in g.inputs:
                attrs.append("style=filled, fillcolor=lightgrey")
            if q in g.outputs:
                attrs.append("shape=doublecircle")
            else:
                attrs.append(f'xlabel="{g.angles[q]}"')
            lines.append(f"  {q} [{', '.join(attrs)}];")
        for u, v in g.edges:
            lines.append(f"  {u} -> {v} [dir=none];")
        if cls is not None and cls.deterministic:
            sets = cls.correcting_sets
            for q in sorted(sets):
                for t in sorted(sets[q]):
                    lines.append(f"  {q} -> {t} [style=dashed, color=blue, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> int:
    try:
        g = _load(args.file)
    except EmptyGeometry:
        sys.stdout.write(geometry_to_dot(None))
        return EXIT_OK
    sys.stdout.write(geometry_to_dot(g, classify_geometry(g)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowopt", description="Optimize measurement patterns of open graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_file(name: str, fn, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("file", help="geometry JSON file, or - for stdin")
        p.set_defaults(func=fn)
        return p

    with_file("classify", cmd_classify, "report flow, gflow or none")
    p = with_file("optimize", cmd_optimize, "print the optimized pattern")
    p.add_argument("--engine", choices=("direct", "rules"), default="direct")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    with_file("rewrite", cmd_rewrite, "print the rewrite trace of the standard pattern")
    p = with_file("simulate", cmd_simulate, "check determinism and print the implemented map")
    p.add_argument("--engine", choices=("direct", "rules", "standard"), default="direct")
    p.add_argument("--seed", type=int, default=0)
    with_file("diff", cmd_diff, "cross-check both engines and the simulator")
    with_file("export-dot", cmd_export_dot, "render the geometry as Graphviz DOT")

    p = sub.add_parser("gen", help="generate a random geometry")
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=("flow", "gflow"), default="flow")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
