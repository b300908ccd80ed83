"""Semigroup membership, hole search, and normality certificates.

A hole is an integer point of the marginal cone that no nonnegative integer
table attains.  Hole search works level by level in the sample size ``N``:
every reduced lattice point at level ``N`` whose full marginal is nonnegative
is compared with the set of sums of ``N`` generators, and the leftovers are
settled by exact LP.  Holes are then re-proved by an exhaustive table search.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from margnorm.complexes import (
    Face,
    FullMarginalVector,
    Model,
    ReducedMarginalVector,
    SimplicialComplex,
    Table,
    expand_coords,
    marginalize,
    reduce_coords,
    reduced_generators,
)
from margnorm.errors import InputError, InvariantError, UnsupportedError
from margnorm.graphs import (
    BranchSets,
    Decomposition,
    Elimination,
    Graph,
    MinorOp,
    apply_ops,
    decompose,
    face_embedding,
    find_k4_branch_sets,
    is_small_clique_complex,
    k4_relabeling,
    minor_sequence_to_k4,
    relabel_vector,
    tw2_elimination,
)
from margnorm.lattice import integer_points, semigroup_levels
from margnorm.linalg import dot
from margnorm.lp import cone_feasibility
from margnorm.polyhedra import (
    FacepopperReport,
    HOLDS,
    box_inequalities,
    cone_facets,
    cycle_inequalities,
    extract_B,
    facepopper_condition,
)

NORMAL = "normal"
NOT_NORMAL = "not_normal"
UNKNOWN = "unknown"

FACET_SEED_MAX_GENERATORS = 64


# ---------------------------------------------------------------------------
# integer feasibility


@dataclass(frozen=True)
class SemigroupSearch:
    table: Table | None
    nodes: int
    cell_bound: int
    cells: int

    @property
    def found(self) -> bool:
        return self.table is not None


def semigroup_search(x: FullMarginalVector) -> SemigroupSearch:
    """Depth-first search for a table with marginal ``x``.

    Cells are visited in lexicographic order.  A cell takes at most the
    smallest remaining requirement among its coordinates, and a coordinate
    must be exhausted once its last covering cell is passed.  Without a
    solution the search has covered every table with cells at most ``N``.
    """
    if not x.is_integral():
        raise InputError("semigroup membership needs an integral marginal vector")
    model = x.model
    N = x.sample_size
    ncells = len(model.cells)
    if N < 0 or any(c < 0 for c in x.coords) or not x.is_consistent():
        return SemigroupSearch(None, 0, max(N, 0), ncells)
    positions = model.cell_full_positions
    last_cover: list[list[int]] = [[] for _ in range(ncells)]
    last = {}
    for ci, pos in enumerate(positions):
        for p in pos:
            last[p] = ci
    for p, ci in last.items():
        last_cover[ci].append(p)
    remaining = [int(c) for c in x.coords]
    counts = [0] * ncells
    nodes = 0

    def rec(ci: int) -> bool:
        nonlocal nodes
        nodes += 1
        if remaining[0] == 0:
            return not any(remaining)
        if ci == ncells:
            return False
        pos = positions[ci]
        cap = min(remaining[p] for p in pos)
        for c in range(cap, -1, -1):
            for p in pos:
                remaining[p] -= c
            if all(remaining[p] == 0 for p in last_cover[ci]):
                counts[ci] = c
                if rec(ci + 1):
                    return True
            for p in pos:
                remaining[p] += c
        counts[ci] = 0
        return False

    found = rec(0)
    table = None
    if found:
        table = Table(model.shape, {model.cells[i]: c for i, c in enumerate(counts) if c})
        if marginalize(table, model) != x:
            raise InvariantError("table search returned a table with the wrong marginals")
    return SemigroupSearch(table, nodes, N, ncells)


def semigroup_membership(x: FullMarginalVector) -> Table | None:
    return semigroup_search(x).table


# ---------------------------------------------------------------------------
# lattice points and holes


@dataclass(frozen=True)
class HoleReport:
    point: ReducedMarginalVector
    weights: dict = field(compare=False)
    search: SemigroupSearch = field(compare=False)

    @property
    def model(self) -> Model:
        return self.point.model

    @property
    def sample_size(self) -> int:
        return self.point.sample_size

    def problems(self) -> list[str]:
        """Re-verify from scratch: in the cone, attained by no table."""
        errors = []
        gens = reduced_generators(self.model)
        if not self.point.is_integral():
            errors.append("hole point is not integral")
        if not cone_feasibility(gens, self.point.coords):
            errors.append("hole point is outside the cone")
        if semigroup_search(expand_coords(self.point)).found:
            errors.append("hole point is attained by a table")
        return errors


def nonnegativity_rows(model: Model) -> list[tuple[int, ...]]:
    """Each full coordinate as a linear form in reduced coordinates."""
    rows = []
    for terms in model.expansion:
        row = [0] * model.reduced_dim
        for s, p in terms:
            row[p] += s
        rows.append(tuple(row))
    return rows


def valid_inequalities(model: Model, use_facets: bool = True) -> list[tuple[int, ...]]:
    """Inequalities known to hold on the cone, used only to prune enumeration.

    Binary graph models get their box and cycle inequalities; small models get
    the double-description facets.  Every row is checked against all
    generators before it is returned, so pruning never discards a cone point.
    """
    gens = reduced_generators(model)
    rows: list[tuple[int, ...]] = []
    if model.is_binary() and model.is_graph_model() and len(model.ground) <= 12:
        system = box_inequalities(model) + cycle_inequalities(model)
        rows.extend(system.matrix())
    if use_facets and len(gens) <= FACET_SEED_MAX_GENERATORS:
        rows.extend(cone_facets(gens))
    rows = sorted(set(rows))
    for row in rows:
        if any(dot(row, g) < 0 for g in gens):
            raise InvariantError("an inequality used for pruning is not valid on the cone")
    return rows


@dataclass(frozen=True)
class LevelCensus:
    level: int
    candidates: int
    lattice_points: int
    semigroup_points: int
    holes: int
    lp_calls: int


def _scan_level(model: Model, level: int, pool: Sequence[tuple[int, ...]]):
    gens = reduced_generators(model)
    attained = semigroup_levels(gens, level)[level]
    rows = nonnegativity_rows(model) + list(pool)
    cuts: list[tuple[int, ...]] = []
    members, holes = [], []
    candidates = lps = 0
    for x in integer_points(model.reduced_dim, level, rows):
        candidates += 1
        if x in attained:
            members.append(x)
            continue
        if any(dot(c, x) < 0 for c in cuts):
            continue
        lps += 1
        result = cone_feasibility(gens, x)
        if result.feasible:
            holes.append((x, result.weights))
        else:
            cuts.append(result.functional)
    census = LevelCensus(level, candidates, len(members) + len(holes), len(members), len(holes), lps)
    return members, holes, census


def _report(model: Model, x, weights) -> HoleReport:
    point = ReducedMarginalVector(model, x)
    search = semigroup_search(expand_coords(point))
    if search.found:
        raise InvariantError(f"point {x} was classified as a hole but a table attains it")
    w = {cell: Fraction(v) for cell, v in zip(model.cells, weights) if v}
    return HoleReport(point, w, search)


def _scan_job(args):
    model, level, pool = args
    members, holes, census = _scan_level(model, level, pool)
    return members, [_report(model, x, w) for x, w in holes], census


def hole_census(model: Model, max_level: int, workers: int = 1, use_facets: bool = True):
    """Scan levels ``0..max_level``; returns ``(members, holes, census)`` per level, in order."""
    if max_level < 0:
        raise InputError("the level bound must be nonnegative")
    pool = valid_inequalities(model, use_facets)
    jobs = [(model, level, pool) for level in range(max_level + 1)]
    if workers > 1 and max_level > 0:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_scan_job, jobs))
    return [_scan_job(job) for job in jobs]


def enumerate_lattice_points(model: Model, level: int) -> list[ReducedMarginalVector]:
    """Integer points of the cone with sample size ``level``, sorted."""
    if level < 0:
        raise InputError("level must be nonnegative")
    members, holes, _ = _scan_level(model, level, valid_inequalities(model))
    points = sorted(members + [x for x, _ in holes])
    return [ReducedMarginalVector(model, x) for x in points]


def find_holes(model: Model, max_level: int, workers: int = 1) -> list[HoleReport]:
    return [h for _, holes, _ in hole_census(model, max_level, workers) for h in holes]


def first_hole(model: Model, max_level: int) -> HoleReport | None:
    for level in range(max_level + 1):
        _, holes, _ = _scan_job((model, level, valid_inequalities(model)))
        if holes:
            return holes[0]
    return None


# ---------------------------------------------------------------------------
# holes through minors


def lift_hole(hole: HoleReport, ops: Sequence[MinorOp], source: Model) -> HoleReport:
    """Carry a hole of the minor reached by ``ops`` back to ``source``."""
    models = apply_ops(ops, source)
    if models[-1] != hole.model:
        raise InputError("the operations do not lead to the hole's model")
    w = expand_coords(hole.point)
    for op, m in zip(reversed(ops), reversed(models[:-1])):
        w = face_embedding(op, w, m)
    point = reduce_coords(w)
    gens = reduced_generators(source)
    cone = cone_feasibility(gens, point.coords)
    search = semigroup_search(w)
    if not cone.feasible or search.found:
        raise InvariantError("lifted point failed to verify as a hole")
    weights = {cell: v for cell, v in zip(source.cells, cone.weights) if v}
    return HoleReport(point, weights, search)


# The unique hole of the binary K4 model on vertices 1..4, in reduced
# coordinates (p^∅, p^1..p^4, p^12, p^13, p^14, p^23, p^24, p^34).
K4_HOLE_COORDS = (4, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1)


@lru_cache(maxsize=1)
def k4_hole() -> HoleReport:
    """The K4 hole, re-verified by LP and exhaustive table search on first use."""
    model = Graph.complete(4).model()
    cone = cone_feasibility(reduced_generators(model), K4_HOLE_COORDS)
    if not cone.feasible:
        raise InvariantError("stored K4 hole is outside the cone")
    return _report(model, K4_HOLE_COORDS, cone.weights)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class EdgeDeletion:
    edge: tuple[int, int]
    report: FacepopperReport


@dataclass(frozen=True)
class NormalityCertificate:
    verdict: str
    model: Model
    graph: Graph | None = None
    elimination: Elimination | None = None
    completion: Graph | None = None
    decomposition: Decomposition | None = None
    deletions: tuple[EdgeDeletion, ...] = ()
    branch_sets: BranchSets | None = None
    ops: tuple[MinorOp, ...] = ()
    hole: HoleReport | None = None
    bound: int | None = None

    @property
    def exit_code(self) -> int:
        return {NORMAL: 0, NOT_NORMAL: 10, UNKNOWN: 20}[self.verdict]


def classify_normality(G: Graph, shape: Sequence[int] | None = None, beta: int = 3) -> NormalityCertificate:
    """Decide normality of a binary graph model, with evidence either way."""
    model = G.model(shape)
    if not model.is_binary():
        raise UnsupportedError("the K4-minor criterion covers binary shapes only; use find_holes")
    branch_sets = find_k4_branch_sets(G)
    elim = tw2_elimination(G)
    if (branch_sets is None) != (elim is not None):
        raise InvariantError("branch-set search and elimination disagree about a K4 minor")
    if branch_sets is not None:
        ops = tuple(minor_sequence_to_k4(G, branch_sets))
        minor = apply_ops(ops, model)[-1]
        mapping = k4_relabeling(minor.complex)
        if mapping is None:
            raise InvariantError("minor sequence did not end at K4")
        base = k4_hole()
        moved = reduce_coords(relabel_vector(expand_coords(base.point), mapping))
        cone = cone_feasibility(reduced_generators(minor), moved.coords)
        at_minor = HoleReport(moved, {}, base.search)
        if not cone.feasible:
            raise InvariantError("relabelled K4 hole left the cone")
        hole = lift_hole(at_minor, ops, model)
        return NormalityCertificate(NOT_NORMAL, model, G, branch_sets=branch_sets, ops=ops, hole=hole)

    H = G.add_edges(elim.fill)
    tree = decompose(H.complex())
    deletions = []
    current = H
    for e in reversed(elim.fill):
        system = box_inequalities(current) + cycle_inequalities(current)
        B, _ = extract_B(system, e)
        report = facepopper_condition(B, beta=beta, face=tuple(e))
        if report.verdict != HOLDS:
            raise InvariantError(f"edge {e} column is not in {{0, ±1}}")
        deletions.append(EdgeDeletion(tuple(e), report))
        current = current.remove_edge(e)
    return NormalityCertificate(NORMAL, model, G, elimination=elim, completion=H,
                                decomposition=tree, deletions=tuple(deletions))


def certify(model: Model, max_level: int = 4, workers: int = 1, beta: int = 3) -> NormalityCertificate:
    """Certificate for any model: the graph criterion when it applies, else hole search."""
    if model.is_binary() and model.is_graph_model():
        return classify_normality(Graph.from_complex(model.complex), beta=beta)
    for _, holes, _ in hole_census(model, max_level, workers):
        if holes:
            return NormalityCertificate(NOT_NORMAL, model, hole=holes[0], bound=max_level)
    return NormalityCertificate(UNKNOWN, model, bound=max_level)


def verify_certificate(cert: NormalityCertificate) -> list[str]:
    """Replay a certificate; returns the list of problems found (empty if sound)."""
    errors: list[str] = []
    if cert.verdict == NOT_NORMAL:
        if cert.hole is None:
            return ["not-normal verdict without a hole"]
        if cert.hole.model != cert.model:
            errors.append("hole lives on a different model")
        errors += cert.hole.problems()
        if cert.branch_sets is not None:
            errors += cert.branch_sets.problems(cert.graph)
            end = apply_ops(cert.ops, cert.model)[-1]
            if k4_relabeling(end.complex) is None:
                errors.append("minor operations do not reach K4")
        return errors
    if cert.verdict == NORMAL:
        G, H = cert.graph, cert.completion
        if H is None or cert.decomposition is None:
            return ["normal verdict without a decomposition"]
        if not G.edges <= H.edges:
            errors.append("completion does not contain the graph")
        if cert.decomposition.complex != H.complex():
            errors.append("decomposition is not of the completion")
        errors += cert.decomposition.problems()
        for leaf in cert.decomposition.leaves():
            if not is_small_clique_complex(leaf):
                errors.append(f"leaf {leaf} is not a clique on at most three vertices")
        deleted = {frozenset(d.edge) for d in cert.deletions}
        if deleted != set(H.edges - G.edges):
            errors.append("deleted edges are not exactly the fill edges")
        current = H
        for d in cert.deletions:
            system = box_inequalities(current) + cycle_inequalities(current)
            B, _ = extract_B(system, d.edge)
            if any(row[0] not in (-1, 0, 1) for row in B) or tuple(B) != d.report.B:
                errors.append(f"column of edge {d.edge} does not replay")
            if d.report.verdict != HOLDS:
                errors.append(f"edge {d.edge} deletion is not justified")
            current = current.remove_edge(d.edge)
        if current != G:
            errors.append("deletions do not end at the graph")
        return errors
    return []


# ---------------------------------------------------------------------------
# gluing along a reducible decomposition


def _union_model(m1: Model, m2: Model, S: Face) -> Model:
    sizes = dict(m1.sizes)
    for v, r in m2.sizes.items():
        if sizes.setdefault(v, r) != r:
            raise InputError(f"vertex {v} has different table sizes on the two sides")
    S = frozenset(S)
    simplex_S = {frozenset(t) for k in range(len(S) + 1) for t in itertools.combinations(sorted(S), k)}
    if m1.complex.faces & m2.complex.faces != simplex_S:
        raise InputError("the two complexes do not meet in the simplex on the separator")
    ground = tuple(sorted(sizes))
    cx = SimplicialComplex(ground, m1.complex.faces | m2.complex.faces)
    return Model(cx, tuple(sizes[v] for v in ground))


def glue_marginals(x1: FullMarginalVector, x2: FullMarginalVector, S: Face) -> FullMarginalVector:
    """The marginal vector of the union with shared coordinates stated once."""
    model = _union_model(x1.model, x2.model, S)
    coords = []
    for key in model.full_keys:
        in1 = key in x1.model.full_position
        in2 = key in x2.model.full_position
        if in1 and in2 and x1[key] != x2[key]:
            raise InputError(f"the two sides disagree on the shared coordinate {key}")
        coords.append(x1[key] if in1 else x2[key])
    return FullMarginalVector(model, tuple(coords))


def glue_tables(u1: Table, m1: Model, u2: Table, m2: Model, S: Face) -> Table:
    """Pair up cells of the two tables that agree on the separator."""
    model = _union_model(m1, m2, S)
    slot1 = {v: n for n, v in enumerate(m1.ground)}
    slot2 = {v: n for n, v in enumerate(m2.ground)}
    S = tuple(sorted(S))
    by_s1: dict[tuple, list] = {}
    by_s2: dict[tuple, list] = {}
    for cell, c in u1.counts.items():
        by_s1.setdefault(tuple(cell[slot1[s]] for s in S), []).extend([cell] * c)
    for cell, c in u2.counts.items():
        by_s2.setdefault(tuple(cell[slot2[s]] for s in S), []).extend([cell] * c)
    if {k: len(v) for k, v in by_s1.items()} != {k: len(v) for k, v in by_s2.items()}:
        raise InputError("the tables have different marginals on the separator")
    counts: dict[tuple, int] = {}
    for key, cells1 in by_s1.items():
        for c1, c2 in zip(cells1, by_s2[key]):
            cell = tuple(c1[slot1[v]] if v in slot1 else c2[slot2[v]] for v in model.ground)
            counts[cell] = counts.get(cell, 0) + 1
    return Table(model.shape, counts)


def glued_witness(x1: FullMarginalVector, x2: FullMarginalVector, S: Face) -> Table | None:
    """A table for the glued vector built from tables of the two sides."""
    glued = glue_marginals(x1, x2, S)
    u1 = semigroup_membership(x1)
    u2 = semigroup_membership(x2)
    if u1 is None or u2 is None:
        return semigroup_membership(glued)
    u = glue_tables(u1, x1.model, u2, x2.model, S)
    if marginalize(u, glued.model) != glued:
        raise InvariantError("glued table has the wrong marginals")
    return u
