"""Inequality descriptions of marginal cones in reduced coordinates.

Covers the box and cycle inequalities of binary graph models, exact cone
membership, facet certification against generators, facet enumeration by
double description, and the integrality test on the columns of one face.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from margnorm.complexes import (
    Face,
    Key,
    Model,
    ReducedMarginalVector,
    reduced_generators,
)
from margnorm.errors import GuardError, InputError, UnsupportedError
from margnorm.graphs import Graph
from margnorm.lattice import integer_points, semigroup_levels
from margnorm.linalg import dot, independent_rows, primitive, rank, row_echelon
from margnorm.lp import ConeMembership, cone_feasibility

MAX_CYCLE_VERTICES = 12

EMPTY: Key = ((), ())


@dataclass(frozen=True)
class LinearInequality:
    """``Σ c·p ≥ 0`` over reduced coordinates; coefficients are coprime integers."""

    coeffs: tuple[tuple[Key, int], ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        merged: dict[Key, int] = {}
        for key, c in self.coeffs:
            if Fraction(c).denominator != 1:
                raise InputError(f"non-integral coefficient {c!r}")
            merged[key] = merged.get(key, 0) + int(c)
        merged = {k: c for k, c in merged.items() if c}
        g = 0
        for c in merged.values():
            g = math.gcd(g, c)
        if g > 1:
            merged = {k: c // g for k, c in merged.items()}
        items = sorted(merged.items(), key=lambda kc: (len(kc[0][0]), kc[0]))
        object.__setattr__(self, "coeffs", tuple(items))

    @classmethod
    def from_vector(cls, model: Model, vector: Sequence[int], label: str = "") -> LinearInequality:
        return cls(tuple((k, c) for k, c in zip(model.reduced_keys, vector) if c), label)

    def vector(self, model: Model) -> tuple[int, ...]:
        out = [0] * model.reduced_dim
        for key, c in self.coeffs:
            try:
                out[model.reduced_position[key]] = c
            except KeyError:
                raise InputError(f"coordinate {key} is not in the model's reduced space") from None
        return tuple(out)

    def __str__(self) -> str:
        terms = []
        for (F, i), c in self.coeffs:
            name = "p^∅" if not F else "p^" + "".join(map(str, F)) + (
                "_" + "".join(map(str, i)) if any(k != 1 for k in i) else "")
            terms.append(f"{'+' if c > 0 else '-'} {abs(c) if abs(c) != 1 else ''}{name}")
        body = " ".join(terms).lstrip("+ ") if terms else "0"
        return f"{body} >= 0"


@dataclass(frozen=True)
class InequalitySystem:
    model: Model
    rows: tuple[LinearInequality, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __add__(self, other: InequalitySystem) -> InequalitySystem:
        if self.model != other.model:
            raise InputError("systems live in different coordinate spaces")
        return InequalitySystem(self.model, self.rows + other.rows)

    def matrix(self) -> list[tuple[int, ...]]:
        return [row.vector(self.model) for row in self.rows]


def _binary_graph_model(G: Graph | Model) -> tuple[Graph, Model]:
    if isinstance(G, Model):
        if not G.is_graph_model():
            raise UnsupportedError(f"{G.complex} is not a graph model")
        if not G.is_binary():
            raise UnsupportedError("box and cycle inequalities need a binary shape")
        return Graph.from_complex(G.complex), G
    return G, G.model()


def _p(*vertices: int) -> Key:
    return (tuple(sorted(vertices)), (1,) * len(vertices))


def box_inequalities(G: Graph | Model) -> InequalitySystem:
    G, model = _binary_graph_model(G)
    rows = []
    for j, k in G.sorted_edges:
        tag = f"box {j}{k}"
        rows.append(LinearInequality(((_p(j, k), 1),), tag))
        rows.append(LinearInequality(((_p(j), 1), (_p(j, k), -1)), tag))
        rows.append(LinearInequality(((_p(k), 1), (_p(j, k), -1)), tag))
        rows.append(LinearInequality(((EMPTY, 1), (_p(j), -1), (_p(k), -1), (_p(j, k), 1)), tag))
    return InequalitySystem(model, tuple(rows))


def enumerate_cycles(G: Graph, max_vertices: int = MAX_CYCLE_VERTICES) -> list[tuple[tuple[int, int], ...]]:
    """Every simple cycle once, as a sorted edge tuple; sorted output."""
    if len(G.vertices) > max_vertices:
        raise GuardError(f"cycle enumeration is limited to {max_vertices} vertices")
    adj = G.adjacency
    found: set[tuple[tuple[int, int], ...]] = set()
    for s in G.vertices:
        path = [s]
        on_path = {s}

        def extend(v):
            for w in adj[v]:
                if w == s and len(path) >= 3:
                    edges = [tuple(sorted(e)) for e in zip(path, path[1:] + [s])]
                    found.add(tuple(sorted(edges)))
                elif w > s and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    extend(w)
                    path.pop()
                    on_path.discard(w)

        extend(s)
    return sorted(found, key=lambda c: (len(c), c))


def cycle_inequalities(G: Graph | Model) -> InequalitySystem:
    """One inequality per simple cycle ``C`` and odd edge subset ``O ⊆ C``.

    Coefficients follow the displayed formula literally: ``+1`` on edges of
    ``O``, ``-1`` on the rest of ``C``, ``-1`` per vertex met by ``O``,
    ``+1`` per vertex met by ``C \\ O`` and ``(|O| - 1)/2`` on ``p^∅``.
    """
    G, model = _binary_graph_model(G)
    rows = []
    for cycle in enumerate_cycles(G):
        for size in range(1, len(cycle) + 1, 2):
            for odd in itertools.combinations(cycle, size):
                rest = [e for e in cycle if e not in odd]
                terms = [(_p(*e), 1) for e in odd] + [(_p(*e), -1) for e in rest]
                terms += [(_p(v), -1) for v in sorted({v for e in odd for v in e})]
                terms += [(_p(v), 1) for v in sorted({v for e in rest for v in e})]
                terms.append((EMPTY, (size - 1) // 2))
                label = "cycle " + "-".join(f"{a}{b}" for a, b in cycle) + " O=" + ",".join(
                    f"{a}{b}" for a, b in odd)
                rows.append(LinearInequality(tuple(terms), label))
    return InequalitySystem(model, tuple(rows))


def evaluate(ineq: LinearInequality, x: ReducedMarginalVector):
    return dot(ineq.vector(x.model), x.coords)


def _as_tuples(points) -> list[tuple]:
    return [tuple(p.coords) if isinstance(p, ReducedMarginalVector) else tuple(p) for p in points]


def cone_membership_lp(x, gens) -> ConeMembership:
    """Exact test of ``x ∈ cone(gens)`` returning weights or a separating functional."""
    gens = _as_tuples(gens)
    x = _as_tuples([x])[0]
    if gens and len(gens[0]) != len(x):
        raise InputError("point and generators live in different spaces")
    return cone_feasibility(gens, x)


@dataclass(frozen=True)
class FacetReport:
    inequality: LinearInequality
    valid: bool
    tight_rank: int
    facet: bool
    violated_by: int | None = None


def certify_facets(system: InequalitySystem, gens=None, dim: int | None = None) -> list[FacetReport]:
    """Validity on every generator and rank of the tight generators, per row."""
    gens = _as_tuples(gens) if gens is not None else reduced_generators(system.model)
    if dim is None:
        dim = rank(gens)
    reports = []
    for ineq in system.rows:
        c = ineq.vector(system.model)
        values = [dot(c, g) for g in gens]
        bad = next((n for n, v in enumerate(values) if v < 0), None)
        tight = [g for g, v in zip(gens, values) if v == 0]
        r = rank(tight) if tight else 0
        reports.append(FacetReport(ineq, bad is None, r, bad is None and r == dim - 1, bad))
    return reports


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    witness: tuple | None = None
    reason: str = ""
    points_checked: int = 0
    lp_calls: int = 0

    def __bool__(self) -> bool:
        return self.equivalent


def equivalence_check(system: InequalitySystem, gens=None, max_level: int = 3) -> EquivalenceReport:
    """Compare the inequality system with the generator cone on a lattice box.

    Both inclusions are checked: every row must hold on every generator (so
    the cone lies inside the system), and every integer point with
    ``0 <= p^∅ <= max_level`` and coordinates in ``[0, p^∅]`` satisfying the
    system must lie in the cone.  Points reached by sums of generators are
    cone members outright; the rest go to the exact LP.
    """
    gens = _as_tuples(gens) if gens is not None else reduced_generators(system.model)
    rows = system.matrix()
    for ineq, c in zip(system.rows, rows):
        for g in gens:
            if dot(c, g) < 0:
                return EquivalenceReport(False, g, f"generator violates {ineq}")
    levels = semigroup_levels(gens, max_level)
    checked = lps = 0
    for level in range(max_level + 1):
        for x in integer_points(system.model.reduced_dim, level, rows):
            checked += 1
            if x in levels[level]:
                continue
            lps += 1
            if not cone_feasibility(gens, x):
                return EquivalenceReport(False, x, "point satisfies the system but lies outside the cone",
                                         checked, lps)
    return EquivalenceReport(True, None, "", checked, lps)


# ---------------------------------------------------------------------------
# facet enumeration


def _inverse(A: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    n = len(A)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(A)]
    R, pivots = row_echelon(aug)
    if pivots[:n] != list(range(n)):
        raise InputError("matrix is singular")
    return [row[n:] for row in R]


def cone_facets(gens: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Facet normals of a full-dimensional cone by double description.

    The normals are the extreme rays of ``{c : c·g >= 0 for all g}``.  Rays
    are intersected with one generator halfspace at a time and adjacency is
    decided combinatorially from the sets of tight generators.
    """
    gens = [tuple(g) for g in gens]
    d = len(gens[0])
    basis = independent_rows(gens)
    if len(basis) < d:
        raise InputError(f"generators span only {len(basis)} of {d} dimensions")
    inv = _inverse([gens[i] for i in basis])
    rays = [primitive([inv[r][j] for r in range(d)]) for j in range(d)]
    # bit k of a zero set marks tightness on the k-th processed generator
    full = (1 << d) - 1
    zeros = [full & ~(1 << j) for j in range(d)]
    order = basis + [i for i in range(len(gens)) if i not in basis]
    for step, gi in enumerate(order[d:], start=d):
        g = gens[gi]
        vals = [dot(g, r) for r in rays]
        bit = 1 << step
        new_rays, new_zeros = [], []
        for r, z, v in zip(rays, zeros, vals):
            if v >= 0:
                new_rays.append(r)
                new_zeros.append(z | bit if v == 0 else z)
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        for p in pos:
            for n in neg:
                common = zeros[p] & zeros[n]
                if common.bit_count() < d - 2:
                    continue
                if any(k != p and k != n and zeros[k] & common == common for k in range(len(rays))):
                    continue
                ray = primitive([vals[p] * a - vals[n] * b for a, b in zip(rays[n], rays[p])])
                new_rays.append(ray)
                new_zeros.append(common | bit)
        rays, zeros = new_rays, new_zeros
    return sorted(set(rays), reverse=True)


def facet_description(model: Model) -> InequalitySystem:
    gens = reduced_generators(model)
    return InequalitySystem(model, tuple(
        LinearInequality.from_vector(model, c, "facet") for c in cone_facets(gens)))


# ---------------------------------------------------------------------------
# columns of one face


def extract_B(system: InequalitySystem, face: Iterable[int]) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Split the coefficient matrix into the columns on ``face`` (``B``) and the rest (``A``)."""
    model = system.model
    cols = model.face_reduced_positions(face)
    other = [p for p in range(model.reduced_dim) if p not in set(cols)]
    M = system.matrix()
    return [tuple(row[p] for p in cols) for row in M], [tuple(row[p] for p in other) for row in M]


HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

_TWO_COLUMN_ROWS = {(0, 0), (0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (-1, -1)}


@dataclass(frozen=True)
class FacepopperReport:
    B: tuple[tuple[int, ...], ...]
    verdict: str
    reason: str
    face: Face | None = None
    witness_b: tuple[int, ...] | None = None
    witness_y: tuple[Fraction, ...] | None = None
    subsystems_checked: int = 0


def _fm_eliminate(system: list[tuple[list[Fraction], Fraction]], var: int):
    """Fourier–Motzkin: drop ``var`` from rows ``a·y >= b``."""
    keep, lower, upper = [], [], []
    for a, b in system:
        if a[var] > 0:
            lower.append((a, b))
        elif a[var] < 0:
            upper.append((a, b))
        else:
            keep.append((a, b))
    for al, bl in lower:
        for au, bu in upper:
            s, t = -au[var], al[var]
            keep.append(([s * x + t * y for x, y in zip(al, au)], s * bl + t * bu))
    return keep


def _bounds(system, var: int, nvars: int) -> tuple[Fraction | None, Fraction | None, bool]:
    """Real range of ``var`` over the system; the flag is False when infeasible."""
    rows = system
    for other in range(nvars):
        if other != var:
            rows = _fm_eliminate(rows, other)
    lo = hi = None
    for a, b in rows:
        c = a[var]
        if c == 0:
            if b > 0:
                return None, None, False
        elif c > 0:
            lo = b / c if lo is None else max(lo, b / c)
        else:
            hi = b / c if hi is None else min(hi, b / c)
    if lo is not None and hi is not None and lo > hi:
        return lo, hi, False
    return lo, hi, True


def _substitute(system, var: int, value):
    out = []
    for a, b in system:
        a2 = list(a)
        b2 = b - a2[var] * value
        a2[var] = Fraction(0)
        out.append((a2, b2))
    return out


def _real_point(system, nvars: int):
    point = []
    for var in range(nvars):
        lo, hi, ok = _bounds(system, var, nvars)
        if not ok:
            return None
        value = lo if lo is not None else (hi if hi is not None else Fraction(0))
        point.append(value)
        system = _substitute(system, var, value)
    if any(b > 0 for a, b in system):
        return None
    return point


def _integer_point(system, nvars: int, var: int, clip: int):
    """Integer solution or ``None``; the flag says whether the search was exhaustive."""
    if var == nvars:
        return ([] if all(b <= 0 for a, b in system) else None), True
    lo, hi, ok = _bounds(system, var, nvars)
    if not ok:
        return None, True
    exhaustive = lo is not None and hi is not None
    start = math.ceil(lo) if lo is not None else -clip
    stop = math.floor(hi) if hi is not None else clip
    for y in range(start, stop + 1):
        rest, ex = _integer_point(_substitute(system, var, Fraction(y)), nvars, var + 1, clip)
        exhaustive = exhaustive and ex
        if rest is not None:
            return [y] + rest, exhaustive
    return None, exhaustive


def facepopper_condition(B: Sequence[Sequence[int]], beta: int = 3, face: Face | None = None) -> FacepopperReport:
    """Does ``B y >= b`` have an integer solution whenever it has a real one?

    One column of ``0, ±1`` entries, or two columns whose rows are among
    ``(0,0), ±(0,1), ±(1,0), ±(1,1)``, hold structurally.  Otherwise every
    subsystem of at most ``2^k`` distinct rows (``k`` columns) is tried with
    right-hand sides in ``[-beta, beta]``; by the Doignon–Bell–Scarf bound this
    finds a gap for some ``b`` in the box whenever one exists.
    """
    B = tuple(tuple(int(x) for x in row) for row in B)
    k = len(B[0]) if B else 0
    if k == 0:
        return FacepopperReport(B, HOLDS, "no columns", face)
    if k == 1 and all(row[0] in (-1, 0, 1) for row in B):
        return FacepopperReport(B, HOLDS, "single column with entries in {0, ±1}", face)
    if k == 2 and all(row in _TWO_COLUMN_ROWS for row in B):
        return FacepopperReport(B, HOLDS, "two columns with rows in {(0,0), ±(0,1), ±(1,0), ±(1,1)}", face)
    distinct = sorted({row for row in B if any(row)})
    clip = (beta + 1) * (max(abs(x) for row in distinct for x in row) + 1) * 2 ** k
    checked = 0
    for size in range(1, min(2 ** k, len(distinct)) + 1):
        for rows in itertools.combinations(distinct, size):
            for rhs in itertools.product(range(-beta, beta + 1), repeat=size):
                checked += 1
                system = [([Fraction(x) for x in r], Fraction(b)) for r, b in zip(rows, rhs)]
                y_real = _real_point(system, k)
                if y_real is None:
                    continue
                y_int, exhaustive = _integer_point(system, k, 0, clip)
                if y_int is not None or not exhaustive:
                    continue
                chosen = dict(zip(rows, rhs))
                witness = tuple(chosen[row] if row in chosen else math.floor(dot(row, y_real))
                                for row in B)
                return FacepopperReport(
                    B, FAILS, f"B y >= b is real feasible but has no integer solution "
                              f"(subsystem of {size} rows)", face, witness, tuple(y_real), checked)
    return FacepopperReport(B, INCONCLUSIVE, f"no gap for right-hand sides in [-{beta}, {beta}]",
                            face, subsystems_checked=checked)
