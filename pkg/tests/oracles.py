"""Independent reference implementations used only by the tests.

None of these call into the package's own marginalization, LP, search or
minor code; they rebuild the same objects from first principles with numpy,
scipy, sympy and networkx.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import networkx as nx
import numpy as np
import sympy
from scipy.optimize import Bounds, LinearConstraint, linprog, milp


def dense(shape, counts) -> np.ndarray:
    a = np.zeros(shape, dtype=np.int64)
    for cell, c in counts.items():
        a[tuple(i - 1 for i in cell)] += c
    return a


def naive_marginal(ground, shape, faces, counts) -> dict:
    """``{(F, i): count}`` for every face ``F`` and every full index ``i``, by summing axes."""
    a = dense(shape, counts)
    pos = {v: n for n, v in enumerate(ground)}
    out = {}
    for F in faces:
        axes = tuple(n for n, v in enumerate(ground) if v not in F)
        m = a.sum(axis=axes) if axes else a
        m = np.asarray(m)
        for idx in itertools.product(*(range(1, shape[pos[f]] + 1) for f in F)):
            out[(tuple(F), idx)] = int(m[tuple(i - 1 for i in idx)]) if F else int(m)
    return out


def marginal_matrix(ground, shape, faces, keys) -> np.ndarray:
    """Rows are the ``keys`` coordinates, columns the unit tables in lexicographic order."""
    cells = list(itertools.product(*(range(1, r + 1) for r in shape)))
    cols = []
    for cell in cells:
        m = naive_marginal(ground, shape, faces, {cell: 1})
        cols.append([m[k] for k in keys])
    return np.array(cols, dtype=float).T


def lp_feasible(columns, x) -> bool:
    """Floating point test of ``x ∈ cone(columns)`` with HiGHS."""
    A = np.array(columns, dtype=float).T
    b = np.array([float(v) for v in x])
    res = linprog(np.zeros(A.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


def ip_feasible(A: np.ndarray, b) -> bool:
    """Is there a nonnegative integer ``u`` with ``A u = b``?  Solved as a MILP."""
    b = np.array([float(v) for v in b])
    n = A.shape[1]
    res = milp(np.zeros(n), constraints=LinearConstraint(A, b, b),
               integrality=np.ones(n), bounds=Bounds(0, np.inf))
    return res.status == 0


def rank(rows) -> int:
    return sympy.Matrix([list(r) for r in rows]).rank() if rows else 0


def bruteforce_facets(gens) -> set[tuple[int, ...]]:
    """Primitive facet normals: hyperplanes through ``d - 1`` independent generators."""
    gens = [tuple(g) for g in gens]
    d = len(gens[0])
    out = set()
    for subset in itertools.combinations(gens, d - 1):
        M = sympy.Matrix([list(g) for g in subset])
        ns = M.nullspace()
        if len(ns) != 1:
            continue
        v = ns[0]
        den = sympy.ilcm(*[sympy.fraction(c)[1] for c in v])
        c = [int(x * den) for x in v]
        g = np.gcd.reduce([abs(t) for t in c])
        c = [t // g for t in c]
        vals = [sum(a * b for a, b in zip(c, gen)) for gen in gens]
        if all(v >= 0 for v in vals):
            out.add(tuple(c))
        elif all(v <= 0 for v in vals):
            out.add(tuple(-t for t in c))
    return out


def k4_minor_free(g: nx.Graph) -> bool:
    """Series-parallel reduction on a multigraph: strip degree <= 1, merge parallel
    edges, suppress degree 2.  The graph reduces to nothing iff it has no K4 minor."""
    m = nx.Graph()
    m.add_nodes_from(g.nodes)
    m.add_edges_from(g.edges)
    changed = True
    while changed and m.number_of_nodes():
        changed = False
        for v in list(m.nodes):
            deg = m.degree(v)
            if deg <= 1:
                m.remove_node(v)
                changed = True
                break
            if deg == 2:
                a, b = list(m.neighbors(v))
                m.remove_node(v)
                m.add_edge(a, b)  # a simple graph absorbs the parallel edge
                changed = True
                break
    return m.number_of_nodes() == 0


def atlas_graphs(max_nodes: int, connected: bool = True):
    """Graphs from the networkx atlas with vertices relabelled ``1..n``."""
    for g in nx.graph_atlas_g()[1:]:
        if g.number_of_nodes() > max_nodes:
            break
        if connected and not nx.is_connected(g):
            continue
        yield nx.relabel_nodes(g, {v: v + 1 for v in g.nodes})


def as_fraction_tuple(v) -> tuple:
    return tuple(Fraction(x) for x in v)
