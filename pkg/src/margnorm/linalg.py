"""Exact rational linear algebra on small dense matrices (lists of rows)."""

from __future__ import annotations

import math
from collections.abc import Sequence
from fractions import Fraction


def row_echelon(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = [[Fraction(x) for x in r] for r in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        lead = M[r][c]
        M[r] = [x / lead for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(row_echelon(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{x : rows · x = 0}``."""
    if ncols is None:
        ncols = len(rows[0])
    R, pivots = row_echelon(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(R, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to the coprime integer vector with the same direction."""
    v = [Fraction(x) for x in v]
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def independent_rows(rows: Sequence[Sequence]) -> list[int]:
    """Indices of a lexicographically first maximal independent subset of rows."""
    chosen: list[int] = []
    basis: list[list[Fraction]] = []
    pivots: list[int] = []
    for n, row in enumerate(rows):
        v = [Fraction(x) for x in row]
        for b, p in zip(basis, pivots):
            if v[p] != 0:
                f = v[p]
                v = [a - f * c for a, c in zip(v, b)]
        p = next((i for i, x in enumerate(v) if x != 0), None)
        if p is None:
            continue
        lead = v[p]
        v = [x / lead for x in v]
        for k, b in enumerate(basis):
            if b[p] != 0:
                f = b[p]
                basis[k] = [a - f * c for a, c in zip(b, v)]
        basis.append(v)
        pivots.append(p)
        chosen.append(n)
    return chosen


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))
