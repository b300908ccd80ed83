"""Bounded integer point enumeration and level sets of finitely generated semigroups."""

from __future__ import annotations

from collections.abc import Iterator, Sequence


def integer_points(dim: int, level: int, rows: Sequence[Sequence[int]]) -> Iterator[tuple[int, ...]]:
    """Integer ``x`` with ``x[0] = level``, ``0 <= x[i] <= level`` and ``row · x >= 0`` for all rows.

    Points come out in lexicographic order.  Each row is tested as soon as its
    last nonzero coordinate has been fixed.
    """
    checks: list[list[tuple[tuple[int, int], ...]]] = [[] for _ in range(dim)]
    for row in rows:
        support = tuple((i, c) for i, c in enumerate(row) if c)
        if not support:
            continue
        checks[support[-1][0]].append(support)
    x = [0] * dim
    x[0] = level

    def ok(pos: int) -> bool:
        for support in checks[pos]:
            if sum(c * x[i] for i, c in support) < 0:
                return False
        return True

    if not ok(0):
        return
    if dim == 1:
        yield (level,)
        return

    def rec(pos: int):
        for value in range(level + 1):
            x[pos] = value
            if not ok(pos):
                continue
            if pos == dim - 1:
                yield tuple(x)
            else:
                yield from rec(pos + 1)
        x[pos] = 0

    yield from rec(1)


def semigroup_levels(gens: Sequence[tuple[int, ...]], max_level: int) -> list[set[tuple[int, ...]]]:
    """``levels[n]`` is the set of sums of exactly ``n`` generators (with repetition)."""
    dim = len(gens[0]) if gens else 0
    levels = [{(0,) * dim}]
    for _ in range(max_level):
        prev = levels[-1]
        levels.append({tuple(a + b for a, b in zip(p, g)) for p in prev for g in gens})
    return levels
