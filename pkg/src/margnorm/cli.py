"""Command line front end.

Exit codes: 0 normal / success, 10 not normal, 20 unknown, 2 unreadable or
mismatched input, 3 size guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from margnorm.complexes import Model, expand_coords, marginalize, reduce_coords
from margnorm.errors import GuardError, InputError, UnsupportedError
from margnorm.graphs import (
    Graph,
    find_k4_branch_sets,
    minor_sequence_to_k4,
    parse_graph_text,
    tw2_elimination,
)
from margnorm.normality import certify, hole_census
from margnorm.polyhedra import box_inequalities, certify_facets, cycle_inequalities
from margnorm import serialize

EXIT_OK = 0
EXIT_NOT_NORMAL = 10
EXIT_UNKNOWN = 20
EXIT_INPUT = 2
EXIT_GUARD = 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple[str, ...]
    max_n: int = 4
    beta: int = 3
    format: str = "text"
    workers: int = 1

    def __post_init__(self):
        if self.max_n < 0:
            raise InputError("--max-n must be nonnegative")
        if self.beta < 1:
            raise InputError("--beta must be at least 1")
        if self.workers < 1:
            raise InputError("--workers must be at least 1")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_model(path: str) -> Model:
    """Model JSON, or a graph text file read as a binary graph model."""
    text = _read(path)
    stripped = text.lstrip()
    if path.endswith(".json") or stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        return serialize.model_from_json(data)
    return parse_graph_text(text).model()


def load_graph(path: str) -> Graph:
    model = load_model(path)
    if not model.is_graph_model():
        raise InputError(f"{path}: facets of size three or more; not a graph")
    return Graph.from_complex(model.complex)


def _emit(cfg: RunConfig, data, text: str) -> None:
    sys.stdout.write(serialize.dumps(data) if cfg.format == "json" else text)


def cmd_check(cfg: RunConfig) -> int:
    model = load_model(cfg.inputs[0])
    cert = certify(model, cfg.max_n, cfg.workers, cfg.beta)
    lines = [f"model: {model}", f"verdict: {cert.verdict}"]
    if cert.verdict == "normal":
        lines.append(f"elimination order: {list(cert.elimination.order)}")
        lines.append(f"fill edges: {[list(e) for e in cert.elimination.fill]}")
        lines.append("decomposition leaves: " + " ".join(str(leaf) for leaf in cert.decomposition.leaves()))
        for d in cert.deletions:
            lines.append(f"delete edge {list(d.edge)}: {d.report.verdict} ({d.report.reason})")
    elif cert.verdict == "not_normal":
        if cert.branch_sets is not None:
            lines.append(f"K4 branch sets: {cert.branch_sets.as_lists()}")
            lines.append("minor ops: " + ", ".join(json.dumps(serialize.op_to_json(op)) for op in cert.ops))
        hole = cert.hole
        lines.append(f"hole at N={hole.sample_size}: {list(hole.point.coords)}")
        lines.append(f"table search exhausted after {hole.search.nodes} nodes")
    else:
        lines.append(f"no hole up to N={cert.bound}; normality not decided")
    _emit(cfg, serialize.certificate_to_json(cert), "\n".join(lines) + "\n")
    return cert.exit_code


def cmd_holes(cfg: RunConfig, census_path=None, plot_path=None) -> int:
    model = load_model(cfg.inputs[0])
    results = hole_census(model, cfg.max_n, cfg.workers)
    holes = [h for _, hs, _ in results for h in hs]
    census = [c for _, _, c in results]
    if census_path:
        from margnorm.report import write_census
        write_census(census, census_path)
    if plot_path:
        from margnorm.report import plot_census
        plot_census(census, plot_path, f"{model.complex}  r={list(model.shape)}")
    lines = [f"model: {model}"]
    for c in census:
        lines.append(f"N={c.level}: {c.lattice_points} lattice points, {c.holes} holes")
    for h in holes:
        lines.append(f"hole N={h.sample_size}: {list(h.point.coords)}")
    _emit(cfg, [serialize.hole_to_json(h) for h in holes], "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_facets(cfg: RunConfig) -> int:
    G = load_graph(cfg.inputs[0])
    model = G.model()
    free = tw2_elimination(G) is not None
    if not free:
        print("warning: graph has a K4 minor; these inequalities need not describe the cone",
              file=sys.stderr)
    system = box_inequalities(model) + cycle_inequalities(model)
    reports = certify_facets(system)
    lines = [f"graph model: {model}", f"{len(system)} inequalities"]
    for r in reports:
        flag = "facet" if r.facet else ("valid" if r.valid else "INVALID")
        lines.append(f"[{flag}] {r.inequality}    ({r.inequality.label})")
    data = {"model": serialize.model_to_json(model), "k4_minor_free": free,
            "inequalities": [serialize.facet_report_to_json(r) for r in reports]}
    _emit(cfg, data, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_minor(cfg: RunConfig) -> int:
    G = load_graph(cfg.inputs[0])
    elim = tw2_elimination(G)
    if elim is not None:
        data = {"k4_minor_free": True, "elimination_order": list(elim.order),
                "fill_edges": [list(e) for e in elim.fill]}
        text = (f"K4-minor-free (treewidth <= 2)\nelimination order: {list(elim.order)}\n"
                f"fill edges: {[list(e) for e in elim.fill]}\n")
    else:
        bs = find_k4_branch_sets(G)
        ops = minor_sequence_to_k4(G, bs)
        data = {"k4_minor_free": False, "branch_sets": bs.as_lists(),
                "minor_ops": [serialize.op_to_json(op) for op in ops]}
        text = (f"has a K4 minor\nbranch sets: {bs.as_lists()}\nminor ops: "
                + ", ".join(json.dumps(o) for o in data["minor_ops"]) + "\n")
    _emit(cfg, data, text)
    return EXIT_OK


def cmd_margin(cfg: RunConfig) -> int:
    try:
        table = serialize.table_from_json(json.loads(_read(cfg.inputs[0])))
    except json.JSONDecodeError as exc:
        raise InputError(f"{cfg.inputs[0]}: invalid JSON ({exc.msg})") from None
    model = load_model(cfg.inputs[1])
    full = marginalize(table, model)
    reduced = reduce_coords(full)
    roundtrip = expand_coords(reduced) == full
    lines = [f"model: {model}", f"sample size: {full.sample_size}", "full coordinates:"]
    lines += [f"  p^{list(F)}_{list(i)} = {x}" for (F, i), x in full.items()]
    lines.append("reduced coordinates:")
    lines += [f"  p^{list(F)}_{list(i)} = {x}" for (F, i), x in reduced.items()]
    lines.append(f"roundtrip: {'ok' if roundtrip else 'MISMATCH'}")
    data = {"full": serialize.vector_to_json(full), "reduced": serialize.vector_to_json(reduced),
            "roundtrip": roundtrip}
    _emit(cfg, data, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-n", type=int, default=4, help="largest sample size searched for holes")
    common.add_argument("--beta", type=int, default=3, help="right-hand-side bound for the integrality test")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--workers", type=int, default=1, help="processes for hole enumeration")

    parser = argparse.ArgumentParser(prog="margnorm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="decide normality with a certificate")
    p.add_argument("model")
    p = sub.add_parser("holes", parents=[common], help="list holes up to --max-n")
    p.add_argument("model")
    p.add_argument("--census", metavar="TSV", help="write the per-level census as tab-separated values")
    p.add_argument("--plot", metavar="PNG", help="render the per-level census as a figure")
    p = sub.add_parser("facets", parents=[common], help="box and cycle inequalities with facet flags")
    p.add_argument("graph")
    p = sub.add_parser("minor", parents=[common], help="K4-minor test with witness")
    p.add_argument("graph")
    p = sub.add_parser("margin", parents=[common], help="marginal vector of a table")
    p.add_argument("table")
    p.add_argument("model")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    inputs = {"check": (args.__dict__.get("model"),), "holes": (args.__dict__.get("model"),),
              "facets": (args.__dict__.get("graph"),), "minor": (args.__dict__.get("graph"),),
              "margin": (args.__dict__.get("table"), args.__dict__.get("model"))}[args.command]
    try:
        cfg = RunConfig(args.command, inputs, args.max_n, args.beta, args.format, args.workers)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "holes":
            return cmd_holes(cfg, args.census, args.plot)
        return {"facets": cmd_facets, "minor": cmd_minor, "margin": cmd_margin}[args.command](cfg)
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InputError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
