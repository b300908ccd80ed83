"""Exact phase-one simplex for cone membership.

Solves ``Σ_j λ_j g_j = x, λ ≥ 0`` over the rationals.  Bland's rule is used for
both the entering and the leaving variable, so the method terminates.  An
infeasible system comes back with a Farkas functional ``c`` satisfying
``c·g_j ≥ 0`` for every column and ``c·x < 0``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from margnorm.errors import InvariantError
from margnorm.linalg import dot, primitive


@dataclass(frozen=True)
class ConeMembership:
    feasible: bool
    weights: tuple[Fraction, ...] | None = None
    functional: tuple[int, ...] | None = None
    pivots: int = 0

    def __bool__(self) -> bool:
        return self.feasible


def cone_feasibility(columns: Sequence[Sequence[int]], x: Sequence) -> ConeMembership:
    m = len(x)
    n = len(columns)
    sign = [(-1 if xi < 0 else 1) for xi in x]
    width = n + m + 1
    T = []
    for i in range(m):
        row = [Fraction(sign[i] * columns[j][i]) for j in range(n)]
        row += [Fraction(int(k == i)) for k in range(m)]
        row.append(Fraction(sign[i] * x[i]))
        T.append(row)
    # objective row holds reduced costs of min Σ artificials, last entry is -value
    obj = [Fraction(0)] * width
    for row in T:
        for j in range(n):
            obj[j] -= row[j]
        obj[-1] -= row[-1]
    basis = [n + i for i in range(m)]
    pivots = 0
    while True:
        enter = next((j for j in range(n + m) if obj[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise InvariantError("phase-one objective is bounded below; no leaving row")
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * b for a, b in zip(T[i], T[leave])]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, T[leave])]
        basis[leave] = enter
        pivots += 1

    if obj[-1] == 0:
        weights = [Fraction(0)] * n
        for i, b in enumerate(basis):
            if b < n:
                weights[b] = T[i][-1]
        result = ConeMembership(True, weights=tuple(weights), pivots=pivots)
    else:
        y = [(1 - obj[n + i]) * sign[i] for i in range(m)]
        result = ConeMembership(False, functional=primitive([-v for v in y]), pivots=pivots)
    if not verify_membership(columns, x, result):
        raise InvariantError("simplex certificate failed to verify")
    return result


def verify_membership(columns: Sequence[Sequence[int]], x: Sequence, result: ConeMembership) -> bool:
    """Check a membership certificate by direct arithmetic."""
    if result.feasible:
        w = result.weights
        if w is None or len(w) != len(columns) or any(v < 0 for v in w):
            return False
        return all(sum(w[j] * columns[j][i] for j in range(len(columns))) == x[i]
                   for i in range(len(x)))
    c = result.functional
    if c is None:
        return False
    return all(dot(c, g) >= 0 for g in columns) and dot(c, x) < 0
