"""Simplicial complexes, table shapes, tables and marginal vectors.

Coordinates of the marginal space are keyed by ``(face, index)`` where
``face`` is a sorted tuple of vertex labels and ``index`` a tuple of levels
(1-based) aligned with it.  Faces are ordered by ``(cardinality, labels)`` and
indices lexicographically; every dense vector in the package uses this order.

The *reduced* coordinates keep only the indices whose every level is strictly
below the top level ``r_f``.  The empty face contributes the single coordinate
``((), ())``, the sample size.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType

from margnorm.errors import InputError

Face = tuple[int, ...]
Index = tuple[int, ...]
Key = tuple[Face, Index]


def face_sort_key(face: Iterable[int]) -> tuple[int, Face]:
    face = tuple(sorted(face))
    return (len(face), face)


def _powerset(items: Sequence[int]) -> Iterable[tuple[int, ...]]:
    return itertools.chain.from_iterable(
        itertools.combinations(items, k) for k in range(len(items) + 1))


@dataclass(frozen=True)
class SimplicialComplex:
    """A downward-closed family of subsets of ``ground``.

    Use :func:`build_complex` to construct one from facets.
    """

    ground: tuple[int, ...]
    faces: frozenset[frozenset[int]]

    def __post_init__(self):
        ground = tuple(sorted(set(self.ground)))
        if len(ground) != len(self.ground):
            raise InputError(f"repeated vertex in ground {self.ground!r}")
        object.__setattr__(self, "ground", ground)
        faces = frozenset(frozenset(f) for f in self.faces) | {frozenset()}
        object.__setattr__(self, "faces", faces)
        gset = set(ground)
        for f in faces:
            if not f <= gset:
                raise InputError(f"face {sorted(f)} uses vertices outside the ground set")
            for v in f:
                if f - {v} not in faces:
                    raise InputError(f"faces are not downward closed at {sorted(f)}")

    @cached_property
    def ordered_faces(self) -> tuple[Face, ...]:
        return tuple(sorted((tuple(sorted(f)) for f in self.faces), key=face_sort_key))

    @cached_property
    def facets(self) -> tuple[Face, ...]:
        """Maximal faces, in face order.  The complex ``{∅}`` has facet ``()``."""
        maximal = [f for f in self.faces if not any(f < g for g in self.faces)]
        return tuple(sorted((tuple(sorted(f)) for f in maximal), key=face_sort_key))

    def __contains__(self, face) -> bool:
        return frozenset(face) in self.faces

    def __len__(self) -> int:
        return len(self.faces)

    def dimension(self) -> int:
        return max(len(f) for f in self.faces) - 1

    def is_simplex(self) -> bool:
        return len(self.facets) == 1

    def vertices_used(self) -> tuple[int, ...]:
        return tuple(sorted(set().union(*self.faces)))

    def __str__(self) -> str:
        return "".join("[" + "".join(map(str, f)) + "]" for f in self.facets) or "[]"


def build_complex(facets: Iterable[Iterable[int]], ground: Iterable[int] | None = None) -> SimplicialComplex:
    """Downward closure of ``facets`` on ``ground`` (default: union of the facets)."""
    facets = [tuple(sorted(set(f))) for f in facets]
    if ground is None:
        ground = sorted(set().union(*map(set, facets))) if facets else []
    ground = tuple(ground)
    gset = set(ground)
    for f in facets:
        unknown = set(f) - gset
        if unknown:
            raise InputError(f"facet {list(f)} references unknown vertices {sorted(unknown)}")
    faces = {frozenset(s) for f in facets for s in _powerset(f)}
    faces.add(frozenset())
    return SimplicialComplex(ground, frozenset(faces))


def simplex(vertices: Iterable[int]) -> SimplicialComplex:
    vertices = tuple(vertices)
    return build_complex([vertices], vertices)


@dataclass(frozen=True)
class Model:
    """A simplicial complex paired with a table shape ``r_v`` per ground vertex."""

    complex: SimplicialComplex
    shape: tuple[int, ...]

    def __post_init__(self):
        shape = tuple(int(r) for r in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) != len(self.complex.ground):
            raise InputError(
                f"shape has {len(shape)} entries but the ground set has {len(self.complex.ground)}")
        if any(r < 1 for r in shape):
            raise InputError(f"table sizes must be positive, got {list(shape)}")

    @classmethod
    def from_facets(cls, facets, shape=None, ground=None) -> Model:
        cx = build_complex(facets, ground)
        if shape is None:
            shape = (2,) * len(cx.ground)
        return cls(cx, tuple(shape))

    @property
    def ground(self) -> tuple[int, ...]:
        return self.complex.ground

    @cached_property
    def sizes(self) -> dict[int, int]:
        return dict(zip(self.complex.ground, self.shape))

    def is_binary(self) -> bool:
        return all(r == 2 for r in self.shape)

    def is_graph_model(self) -> bool:
        return self.complex.dimension() <= 1

    @cached_property
    def cells(self) -> tuple[Index, ...]:
        return tuple(itertools.product(*(range(1, r + 1) for r in self.shape)))

    def full_indices(self, face: Face) -> list[Index]:
        return list(itertools.product(*(range(1, self.sizes[f] + 1) for f in face)))

    def reduced_indices(self, face: Face) -> list[Index]:
        return list(itertools.product(*(range(1, self.sizes[f]) for f in face)))

    @cached_property
    def full_keys(self) -> tuple[Key, ...]:
        return tuple((F, i) for F in self.complex.ordered_faces for i in self.full_indices(F))

    @cached_property
    def reduced_keys(self) -> tuple[Key, ...]:
        return tuple((F, i) for F in self.complex.ordered_faces for i in self.reduced_indices(F))

    @cached_property
    def full_position(self) -> dict[Key, int]:
        return {k: n for n, k in enumerate(self.full_keys)}

    @cached_property
    def reduced_position(self) -> dict[Key, int]:
        return {k: n for n, k in enumerate(self.reduced_keys)}

    @property
    def full_dim(self) -> int:
        return len(self.full_keys)

    @property
    def reduced_dim(self) -> int:
        return len(self.reduced_keys)

    def face_reduced_positions(self, face: Iterable[int]) -> list[int]:
        face = tuple(sorted(face))
        if face not in self.complex:
            raise InputError(f"{list(face)} is not a face of {self.complex}")
        return [self.reduced_position[(face, i)] for i in self.reduced_indices(face)]

    @cached_property
    def cell_number(self) -> dict[Index, int]:
        return {c: n for n, c in enumerate(self.cells)}

    @cached_property
    def cell_full_positions(self) -> tuple[tuple[int, ...], ...]:
        """For every cell, the full coordinate it contributes to on each face."""
        slots = {v: n for n, v in enumerate(self.ground)}
        faces = self.complex.ordered_faces
        pos = self.full_position
        return tuple(
            tuple(pos[(F, tuple(cell[slots[f]] for f in F))] for F in faces)
            for cell in self.cells)

    @cached_property
    def reduced_in_full(self) -> tuple[int, ...]:
        pos = self.full_position
        return tuple(pos[k] for k in self.reduced_keys)

    @cached_property
    def expansion(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Signed reduced positions summing to each full coordinate.

        For a full index ``j`` on ``F`` let ``T`` be the positions at their top
        level.  Then ``p^F_j`` is the alternating sum over ``S ⊆ T`` of the
        reduced coordinates on ``F \\ (T \\ S)`` that agree with ``j`` off ``T``
        and run over all sub-top levels on ``S``.
        """
        rpos = self.reduced_position
        sizes = self.sizes
        out = []
        for F, j in self.full_keys:
            top = [n for n, f in enumerate(F) if j[n] == sizes[f]]
            terms = []
            for kept in _powerset(top):
                dropped = set(top) - set(kept)
                sub = [n for n in range(len(F)) if n not in dropped]
                G = tuple(F[n] for n in sub)
                ranges = [range(1, sizes[F[n]]) if n in kept else (j[n],) for n in sub]
                sign = -1 if len(kept) % 2 else 1
                for idx in itertools.product(*ranges):
                    terms.append((sign, rpos[(G, idx)]))
            out.append(tuple(terms))
        return tuple(out)

    def __str__(self) -> str:
        return f"{self.complex} r={list(self.shape)}"


def graph_model(edges: Iterable[Iterable[int]], vertices: Iterable[int] | None = None,
                shape: Sequence[int] | None = None) -> Model:
    """Model whose faces are the vertices and edges of a graph (binary by default)."""
    edges = [tuple(e) for e in edges]
    if vertices is None:
        vertices = sorted({v for e in edges for v in e})
    vertices = sorted(vertices)
    facets = edges + [(v,) for v in vertices]
    return Model.from_facets(facets, shape, vertices)


@dataclass(frozen=True)
class Table:
    """Sparse nonnegative integer table: ``counts`` maps cells to positive counts."""

    shape: tuple[int, ...]
    counts: Mapping[Index, int] = field(default_factory=dict)

    def __post_init__(self):
        shape = tuple(self.shape)
        object.__setattr__(self, "shape", shape)
        clean = {}
        for cell, c in self.counts.items():
            cell = tuple(cell)
            if len(cell) != len(shape) or any(not 1 <= i <= r for i, r in zip(cell, shape)):
                raise InputError(f"cell {cell} is outside the table shape {list(shape)}")
            if int(c) != c or c < 0:
                raise InputError(f"count at {cell} must be a nonnegative integer, got {c!r}")
            if c:
                clean[cell] = clean.get(cell, 0) + int(c)
        object.__setattr__(self, "counts", MappingProxyType(dict(sorted(clean.items()))))

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        return self.shape == other.shape and dict(self.counts) == dict(other.counts)

    def __hash__(self):
        return hash((self.shape, tuple(self.counts.items())))

    @property
    def sample_size(self) -> int:
        return sum(self.counts.values())

    def __add__(self, other: Table) -> Table:
        if self.shape != other.shape:
            raise InputError("cannot add tables of different shapes")
        merged = dict(self.counts)
        for cell, c in other.counts.items():
            merged[cell] = merged.get(cell, 0) + c
        return Table(self.shape, merged)

    @classmethod
    def unit(cls, shape, cell) -> Table:
        return cls(tuple(shape), {tuple(cell): 1})


def _coerce(values) -> tuple:
    out = []
    for v in values:
        if isinstance(v, Fraction):
            out.append(int(v) if v.denominator == 1 else v)
        else:
            out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class FullMarginalVector:
    model: Model
    coords: tuple

    def __post_init__(self):
        coords = _coerce(self.coords)
        if len(coords) != self.model.full_dim:
            raise InputError(f"expected {self.model.full_dim} full coordinates, got {len(coords)}")
        object.__setattr__(self, "coords", coords)

    def __getitem__(self, key: Key):
        return self.coords[self.model.full_position[key]]

    def __add__(self, other: FullMarginalVector) -> FullMarginalVector:
        if self.model != other.model:
            raise InputError("marginal vectors live in different spaces")
        return FullMarginalVector(self.model, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def items(self):
        return zip(self.model.full_keys, self.coords)

    def is_integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for c in self.coords)

    @property
    def sample_size(self):
        return self.coords[0]

    def is_consistent(self) -> bool:
        """Summing out any one vertex of a face reproduces the smaller face."""
        sizes = self.model.sizes
        for (F, i), value in self.items():
            if not F:
                continue
            for n, f in enumerate(F):
                if i[n] != 1:
                    continue
                total = sum(self[(F, i[:n] + (k,) + i[n + 1:])] for k in range(1, sizes[f] + 1))
                if total != self[(F[:n] + F[n + 1:], i[:n] + i[n + 1:])]:
                    return False
        return True


@dataclass(frozen=True)
class ReducedMarginalVector:
    model: Model
    coords: tuple

    def __post_init__(self):
        coords = _coerce(self.coords)
        if len(coords) != self.model.reduced_dim:
            raise InputError(
                f"expected {self.model.reduced_dim} reduced coordinates, got {len(coords)}")
        object.__setattr__(self, "coords", coords)

    def __getitem__(self, key: Key):
        return self.coords[self.model.reduced_position[key]]

    def __add__(self, other: ReducedMarginalVector) -> ReducedMarginalVector:
        if self.model != other.model:
            raise InputError("marginal vectors live in different spaces")
        return ReducedMarginalVector(self.model, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def items(self):
        return zip(self.model.reduced_keys, self.coords)

    def is_integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for c in self.coords)

    @property
    def sample_size(self):
        return self.coords[0]


def marginalize(u: Table, model: Model) -> FullMarginalVector:
    if u.shape != model.shape:
        raise InputError(f"table shape {list(u.shape)} does not match model shape {list(model.shape)}")
    coords = [0] * model.full_dim
    positions = model.cell_full_positions
    for cell, c in u.counts.items():
        for p in positions[model.cell_number[cell]]:
            coords[p] += c
    return FullMarginalVector(model, tuple(coords))


def generators(model: Model) -> list[FullMarginalVector]:
    """Images of the unit tables, one per cell in lexicographic cell order."""
    out = []
    for positions in model.cell_full_positions:
        coords = [0] * model.full_dim
        for p in positions:
            coords[p] = 1
        out.append(FullMarginalVector(model, tuple(coords)))
    return out


def reduced_generators(model: Model) -> list[tuple[int, ...]]:
    keep = model.reduced_in_full
    return [tuple(g.coords[p] for p in keep) for g in generators(model)]


def reduce_coords(v: FullMarginalVector) -> ReducedMarginalVector:
    return ReducedMarginalVector(v.model, tuple(v.coords[p] for p in v.model.reduced_in_full))


def expand_coords(v: ReducedMarginalVector) -> FullMarginalVector:
    x = v.coords
    coords = tuple(sum(s * x[p] for s, p in terms) for terms in v.model.expansion)
    return FullMarginalVector(v.model, coords)


def subset_sums(v: ReducedMarginalVector, face: Iterable[int]) -> dict[Face, Fraction]:
    """``q^S``: the sum of the reduced coordinates on ``S``, for every ``S ⊆ face``."""
    model = v.model
    face = tuple(sorted(face))
    if face not in model.complex:
        raise InputError(f"{list(face)} is not a face of {model.complex}")
    return {S: Fraction(sum(v[(S, i)] for i in model.reduced_indices(S)))
            for S in sorted(_powerset(face), key=face_sort_key)}
