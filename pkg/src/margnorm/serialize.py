"""JSON encodings.  Numbers are JSON integers or exact ``"p/q"`` strings, never floats."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

from margnorm.complexes import (
    FullMarginalVector,
    Model,
    ReducedMarginalVector,
    Table,
    build_complex,
)
from margnorm.errors import InputError
from margnorm.graphs import ContractEdge, Decomposition, DeleteEdge, DeleteVertex, Graph
from margnorm.polyhedra import FacepopperReport, FacetReport, LinearInequality


def number(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fraction_string(x) -> str:
    return str(Fraction(x))


def _int_list(value, what: str) -> list[int]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise InputError(f"{what} must be a list of integers")
    return value


def model_from_json(data) -> Model:
    if not isinstance(data, dict):
        raise InputError("model JSON must be an object")
    for name in ("ground", "facets", "shape"):
        if name not in data:
            raise InputError(f"model JSON is missing {name!r}")
    ground = _int_list(data["ground"], "ground")
    if not isinstance(data["facets"], list):
        raise InputError("facets must be a list of vertex lists")
    facets = [_int_list(f, "each facet") for f in data["facets"]]
    shape = _int_list(data["shape"], "shape")
    # every ground vertex is a face, as in graph models
    facets = facets + [[v] for v in ground]
    return Model(build_complex(facets, ground), tuple(shape))


def model_to_json(model: Model) -> dict:
    return {"ground": list(model.ground),
            "facets": [list(f) for f in model.complex.facets if f],
            "shape": list(model.shape)}


def table_from_json(data) -> Table:
    if not isinstance(data, dict) or "shape" not in data or "cells" not in data:
        raise InputError("table JSON needs 'shape' and 'cells'")
    shape = _int_list(data["shape"], "shape")
    counts = {}
    for entry in data["cells"]:
        if not isinstance(entry, dict) or "index" not in entry or "count" not in entry:
            raise InputError("each cell needs 'index' and 'count'")
        cell = tuple(_int_list(entry["index"], "cell index"))
        count = entry["count"]
        if not isinstance(count, int) or isinstance(count, bool):
            raise InputError("cell counts must be integers")
        counts[cell] = counts.get(cell, 0) + count
    return Table(tuple(shape), counts)


def table_to_json(u: Table) -> dict:
    return {"shape": list(u.shape),
            "cells": [{"index": list(c), "count": n} for c, n in u.counts.items()]}


def vector_to_json(v: FullMarginalVector | ReducedMarginalVector) -> dict:
    kind = "full" if isinstance(v, FullMarginalVector) else "reduced"
    return {"kind": kind,
            "model": model_to_json(v.model),
            "coords": [{"face": list(F), "index": list(i), "value": number(x)} for (F, i), x in v.items()]}


def inequality_to_json(ineq: LinearInequality) -> dict:
    out = {"coeffs": [{"face": list(F), "index": list(i), "c": c} for (F, i), c in ineq.coeffs]}
    if ineq.label:
        out["label"] = ineq.label
    return out


def facet_report_to_json(report: FacetReport) -> dict:
    out = inequality_to_json(report.inequality)
    out.update(valid=report.valid, facet=report.facet, tight_rank=report.tight_rank)
    return out


def facepopper_to_json(report: FacepopperReport) -> dict:
    out = {"verdict": report.verdict, "reason": report.reason,
           "B": [list(r) for r in report.B]}
    if report.face is not None:
        out["face"] = list(report.face)
    if report.witness_b is not None:
        out["witness_b"] = list(report.witness_b)
        out["witness_y"] = [number(y) for y in report.witness_y]
    return out


def hole_to_json(hole) -> dict:
    s = hole.search
    return {"model": model_to_json(hole.model),
            "N": hole.sample_size,
            "point": [{"face": list(F), "index": list(i), "value": number(x)} for (F, i), x in hole.point.items()],
            "weights": [{"cell": list(c), "weight": fraction_string(w)} for c, w in sorted(hole.weights.items())],
            "search": {"exhaustive": not s.found, "nodes": s.nodes,
                       "cell_bound": s.cell_bound, "cells": s.cells}}


def op_to_json(op) -> dict:
    if isinstance(op, DeleteVertex):
        return {"op": "delete_vertex", "vertex": op.vertex}
    if isinstance(op, ContractEdge):
        return {"op": "contract_edge", "face": list(op.face), "label": op.label}
    if isinstance(op, DeleteEdge):
        return {"op": "delete_edge", "edge": list(op.edge)}
    raise TypeError(op)


def decomposition_to_json(tree: Decomposition) -> dict:
    out = {"facets": [list(f) for f in tree.complex.facets if f]}
    if not tree.is_leaf:
        out["separator"] = list(tree.separator)
        out["left"] = decomposition_to_json(tree.left)
        out["right"] = decomposition_to_json(tree.right)
    return out


def graph_to_json(G: Graph) -> dict:
    return {"vertices": list(G.vertices), "edges": [list(e) for e in G.sorted_edges]}


def certificate_to_json(cert) -> dict:
    out = {"verdict": cert.verdict, "model": model_to_json(cert.model)}
    evidence: dict = {}
    if cert.verdict == "normal":
        evidence["elimination_order"] = list(cert.elimination.order)
        evidence["fill_edges"] = [list(e) for e in cert.elimination.fill]
        evidence["chordal_completion"] = graph_to_json(cert.completion)
        evidence["decomposition"] = decomposition_to_json(cert.decomposition)
        evidence["edge_deletions"] = [{"edge": list(d.edge), "facepopper": facepopper_to_json(d.report)}
                                      for d in cert.deletions]
    elif cert.verdict == "not_normal":
        if cert.branch_sets is not None:
            evidence["branch_sets"] = cert.branch_sets.as_lists()
            evidence["minor_ops"] = [op_to_json(op) for op in cert.ops]
        evidence["hole"] = hole_to_json(cert.hole)
    if cert.bound is not None:
        evidence["bound"] = cert.bound
    out["evidence"] = evidence
    return out


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def load_schema(name: str) -> dict:
    text = resources.files("margnorm").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
