"""Graphs, complex minors, K4-minor detection and reducible decompositions.

A graph is turned into a model through its edge complex: the facets are the
edges plus the isolated vertices, and every vertex is a face.
"""

from __future__ import annotations

import itertools
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

from margnorm.complexes import (
    Face,
    FullMarginalVector,
    Model,
    SimplicialComplex,
    Table,
    build_complex,
)
from margnorm.errors import GuardError, InputError, PreconditionError

MAX_SEARCH_VERTICES = 12


@dataclass(frozen=True)
class Graph:
    vertices: tuple[int, ...]
    edges: frozenset[frozenset[int]]

    def __post_init__(self):
        vertices = tuple(sorted(set(self.vertices)))
        object.__setattr__(self, "vertices", vertices)
        edges = frozenset(frozenset(e) for e in self.edges)
        vset = set(vertices)
        for e in edges:
            if len(e) != 2:
                raise InputError(f"not a simple edge: {sorted(e)}")
            if not e <= vset:
                raise InputError(f"edge {sorted(e)} has an endpoint outside the vertex set")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]], vertices: Iterable[int] = ()) -> Graph:
        edges = [tuple(e) for e in edges]
        for e in edges:
            if len(e) != 2 or e[0] == e[1]:
                raise InputError(f"not a simple edge: {list(e)}")
        vs = set(vertices) | {v for e in edges for v in e}
        return cls(tuple(vs), frozenset(frozenset(e) for e in edges))

    @classmethod
    def from_complex(cls, cx: SimplicialComplex) -> Graph:
        if cx.dimension() > 1:
            raise InputError(f"{cx} has faces with more than two vertices; not a graph")
        return cls(cx.ground, frozenset(f for f in cx.faces if len(f) == 2))

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls.from_edges(itertools.combinations(range(1, n + 1), 2), range(1, n + 1))

    @classmethod
    def cycle(cls, n: int) -> Graph:
        return cls.from_edges([(i, i % n + 1) for i in range(1, n + 1)])

    @classmethod
    def wheel(cls, rim: int) -> Graph:
        """Hub ``rim + 1`` joined to every vertex of the cycle ``1..rim``."""
        hub = rim + 1
        return cls.from_edges([(i, i % rim + 1) for i in range(1, rim + 1)]
                              + [(i, hub) for i in range(1, rim + 1)])

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(tuple(sorted(e)) for e in self.edges))

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj = {v: set() for v in self.vertices}
        for a, b in self.sorted_edges:
            adj[a].add(b)
            adj[b].add(a)
        return {v: frozenset(n) for v, n in adj.items()}

    def has_edge(self, a, b) -> bool:
        return frozenset((a, b)) in self.edges

    def complex(self) -> SimplicialComplex:
        return build_complex(list(self.sorted_edges) + [(v,) for v in self.vertices], self.vertices)

    def model(self, shape: Sequence[int] | None = None) -> Model:
        return Model(self.complex(), tuple(shape) if shape else (2,) * len(self.vertices))

    def add_edges(self, edges) -> Graph:
        return Graph(self.vertices, self.edges | {frozenset(e) for e in edges})

    def remove_edge(self, e) -> Graph:
        return Graph(self.vertices, self.edges - {frozenset(e)})

    def induced_connected(self, vertices: Iterable[int]) -> bool:
        vertices = set(vertices)
        if not vertices:
            return False
        start = min(vertices)
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in self.adjacency[v]:
                if w in vertices and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == vertices

    def is_connected(self) -> bool:
        return not self.vertices or self.induced_connected(self.vertices)

    def to_text(self) -> str:
        lines = ["vertices: " + " ".join(map(str, self.vertices))]
        lines += [f"{a} {b}" for a, b in self.sorted_edges]
        return "\n".join(lines) + "\n"


def parse_graph_text(text: str) -> Graph:
    """One ``u v`` edge per line; an optional ``vertices:`` line lists isolated ones."""
    vertices: list[int] = []
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.lower().startswith("vertices:"):
                vertices.extend(int(t) for t in line.split(":", 1)[1].split())
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise InputError(f"line {lineno}: expected 'u v' or 'vertices: ...', got {raw!r}") from None
    if len(set(map(frozenset, edges))) != len(edges):
        raise InputError("repeated edge in graph file")
    return Graph.from_edges(edges, vertices)


# ---------------------------------------------------------------------------
# minor operations


@dataclass(frozen=True)
class DeleteVertex:
    vertex: int


@dataclass(frozen=True)
class ContractEdge:
    face: Face
    label: int


@dataclass(frozen=True)
class DeleteEdge:
    edge: Face


MinorOp = DeleteVertex | ContractEdge | DeleteEdge


def delete_vertex(cx: SimplicialComplex, v: int) -> SimplicialComplex:
    if v not in cx.ground:
        raise InputError(f"unknown vertex {v}")
    return SimplicialComplex(tuple(u for u in cx.ground if u != v),
                             frozenset(f for f in cx.faces if v not in f))


def _fresh_label(ground: Iterable[int]) -> int:
    used = set(ground)
    v = 1
    while v in used:
        v += 1
    return v


def contract_edge(cx: SimplicialComplex, face: Iterable[int], shape: Sequence[int],
                  label: int | None = None) -> tuple[SimplicialComplex, tuple[int, ...]]:
    """Identify the vertices of ``face`` into a new vertex ``label``.

    The new vertex gets the smallest table size among the contracted ones.
    """
    L = frozenset(face)
    if not L or L not in cx.faces:
        raise InputError(f"{sorted(L)} is not a nonempty face of {cx}")
    if len(shape) != len(cx.ground):
        raise InputError("shape does not match the ground set")
    if label is None:
        label = _fresh_label(cx.ground)
    elif label in cx.ground and label not in L:
        raise InputError(f"label {label} already names a surviving vertex")
    sizes = dict(zip(cx.ground, shape))
    faces = {f if not f & L else (f - L) | {label} for f in cx.faces}
    ground = sorted((set(cx.ground) - L) | {label})
    sizes[label] = min(sizes[f] for f in L)
    return SimplicialComplex(tuple(ground), frozenset(faces)), tuple(sizes[v] for v in ground)


def delete_edge(cx: SimplicialComplex, edge: Iterable[int]) -> SimplicialComplex:
    e = frozenset(edge)
    if e not in cx.faces or any(e < f for f in cx.faces):
        raise InputError(f"{sorted(e)} is not a maximal face of {cx}")
    return SimplicialComplex(cx.ground, cx.faces - {e})


def apply_op(op: MinorOp, model: Model) -> Model:
    cx = model.complex
    if isinstance(op, DeleteVertex):
        new = delete_vertex(cx, op.vertex)
        return Model(new, tuple(r for v, r in zip(cx.ground, model.shape) if v != op.vertex))
    if isinstance(op, ContractEdge):
        new, shape = contract_edge(cx, op.face, model.shape, op.label)
        return Model(new, shape)
    if isinstance(op, DeleteEdge):
        return Model(delete_edge(cx, op.edge), model.shape)
    raise InputError(f"unknown minor operation {op!r}")


def apply_ops(ops: Iterable[MinorOp], model: Model) -> list[Model]:
    """All intermediate models, starting with ``model`` itself."""
    models = [model]
    for op in ops:
        models.append(apply_op(op, models[-1]))
    return models


# ---------------------------------------------------------------------------
# treewidth two elimination


@dataclass(frozen=True)
class Elimination:
    order: tuple[int, ...]
    fill: tuple[tuple[int, int], ...]


def _simplicial(adj: dict[int, set[int]], v: int) -> bool:
    nbrs = list(adj[v])
    return len(nbrs) < 2 or nbrs[1] in adj[nbrs[0]]


def tw2_elimination(G: Graph) -> Elimination | None:
    """Eliminate vertices of degree at most two.

    Vertices whose elimination adds no fill edge go first, smallest label
    first; otherwise the smallest degree-two vertex is eliminated and its
    neighbours are joined by a fill edge.  Returns ``None`` when every remaining vertex has
    degree three or more, which happens exactly when ``G`` has a K4 minor.
    """
    adj = {v: set(n) for v, n in G.adjacency.items()}
    order: list[int] = []
    fill: list[tuple[int, int]] = []
    while adj:
        low = [u for u in sorted(adj) if len(adj[u]) <= 2]
        if not low:
            return None
        v = next((u for u in low if _simplicial(adj, u)), low[0])
        nbrs = sorted(adj.pop(v))
        for w in nbrs:
            adj[w].discard(v)
        if len(nbrs) == 2:
            a, b = nbrs
            if b not in adj[a]:
                adj[a].add(b)
                adj[b].add(a)
                fill.append((a, b))
        order.append(v)
    return Elimination(tuple(order), tuple(fill))


def is_k4_minor_free(G: Graph) -> bool:
    return tw2_elimination(G) is not None


def chordal_completion_tw2(G: Graph) -> Graph:
    """``G`` plus the fill edges of its treewidth-two elimination."""
    elim = tw2_elimination(G)
    if elim is None:
        raise PreconditionError("graph has a K4 minor; no chordal completion of clique number 3")
    return G.add_edges(elim.fill)


def perfect_elimination_order(G: Graph) -> list[int] | None:
    """Maximum cardinality search; ``None`` if ``G`` is not chordal."""
    weight = {v: 0 for v in G.vertices}
    visited: list[int] = []
    while weight:
        v = max(sorted(weight), key=lambda u: weight[u])
        del weight[v]
        visited.append(v)
        for w in G.adjacency[v]:
            if w in weight:
                weight[w] += 1
    order = visited[::-1]
    pos = {v: n for n, v in enumerate(order)}
    for v in order:
        later = sorted((w for w in G.adjacency[v] if pos[w] > pos[v]), key=pos.get)
        if later:
            parent = later[0]
            if not set(later[1:]) <= G.adjacency[parent]:
                return None
    return order


def clique_number(G: Graph) -> int:
    best = 1 if G.vertices else 0
    for k in range(2, len(G.vertices) + 1):
        found = any(all(G.has_edge(a, b) for a, b in itertools.combinations(c, 2))
                    for c in itertools.combinations(G.vertices, k))
        if not found:
            break
        best = k
    return best


# ---------------------------------------------------------------------------
# K4 branch sets


@dataclass(frozen=True)
class BranchSets:
    sets: tuple[frozenset[int], frozenset[int], frozenset[int], frozenset[int]]

    def __post_init__(self):
        sets = tuple(sorted((frozenset(s) for s in self.sets), key=lambda s: sorted(s)))
        object.__setattr__(self, "sets", sets)

    def as_lists(self) -> list[list[int]]:
        return [sorted(s) for s in self.sets]

    def problems(self, G: Graph) -> list[str]:
        errors = []
        if len(self.sets) != 4:
            errors.append("need exactly four branch sets")
            return errors
        seen: set[int] = set()
        for s in self.sets:
            if not s:
                errors.append("empty branch set")
                continue
            if not s <= set(G.vertices):
                errors.append(f"branch set {sorted(s)} leaves the graph")
                continue
            if s & seen:
                errors.append("branch sets overlap")
            seen |= s
            if not G.induced_connected(s):
                errors.append(f"branch set {sorted(s)} is not connected")
        for a, b in itertools.combinations(self.sets, 2):
            if not any(G.has_edge(x, y) for x in a for y in b):
                errors.append(f"no edge between {sorted(a)} and {sorted(b)}")
        return errors

    def is_valid(self, G: Graph) -> bool:
        return not self.problems(G)


def _partitions_into_four(U: Sequence[int], G: Graph):
    n = len(U)
    blocks: list[list[int]] = [[], [], [], []]

    def rec(i: int, opened: int):
        if n - i < 4 - opened:
            return
        if i == n:
            if all(G.induced_connected(b) for b in blocks):
                if all(any(G.has_edge(x, y) for x in a for y in b)
                       for a, b in itertools.combinations(blocks, 2)):
                    yield BranchSets(tuple(frozenset(b) for b in blocks))
            return
        for k in range(min(opened + 1, 4)):
            blocks[k].append(U[i])
            yield from rec(i + 1, max(opened, k + 1))
            blocks[k].pop()

    yield from rec(0, 0)


def find_k4_branch_sets(G: Graph, max_vertices: int = MAX_SEARCH_VERTICES) -> BranchSets | None:
    """Exhaustive search for K4 branch sets using as few vertices as possible.

    Vertex subsets are tried by size and then lexicographically, so the
    witness is deterministic.
    """
    if len(G.vertices) > max_vertices:
        raise GuardError(f"branch-set search is limited to {max_vertices} vertices")
    for k in range(4, len(G.vertices) + 1):
        for U in itertools.combinations(G.vertices, k):
            if not G.induced_connected(U):
                continue
            for bs in _partitions_into_four(U, G):
                return bs
    return None


def minor_sequence_to_k4(G: Graph, B: BranchSets) -> list[MinorOp]:
    """Delete everything outside the branch sets, then contract a spanning tree of each."""
    problems = B.problems(G)
    if problems:
        raise InputError("invalid branch sets: " + "; ".join(problems))
    used = set().union(*B.sets)
    ground = set(G.vertices)
    ops: list[MinorOp] = []
    for v in sorted(ground - used):
        ops.append(DeleteVertex(v))
        ground.discard(v)
    label = {v: v for v in used}
    for s in B.sets:
        root = min(s)
        seen = {root}
        queue = deque([root])
        while queue:
            p = queue.popleft()
            for c in sorted(G.adjacency[p] & s):
                if c in seen:
                    continue
                seen.add(c)
                queue.append(c)
                a, b = sorted((label[p], label[c]))
                new = _fresh_label(ground)
                ops.append(ContractEdge((a, b), new))
                ground -= {a, b}
                ground.add(new)
                for v, lv in label.items():
                    if lv in (a, b):
                        label[v] = new
    return ops


def k4_relabeling(cx: SimplicialComplex) -> dict[int, int] | None:
    """A map from K4's vertices 1..4 onto ``cx`` that carries faces to faces."""
    target = Graph.complete(4).complex()
    if len(cx.ground) != 4:
        return None
    for perm in itertools.permutations(cx.ground):
        m = dict(zip((1, 2, 3, 4), perm))
        if {frozenset(m[v] for v in f) for f in target.faces} == set(cx.faces):
            return m
    return None


def relabel_model(model: Model, mapping: dict[int, int]) -> Model:
    cx = model.complex
    faces = frozenset(frozenset(mapping[v] for v in f) for f in cx.faces)
    sizes = {mapping[v]: r for v, r in zip(cx.ground, model.shape)}
    ground = tuple(sorted(sizes))
    return Model(SimplicialComplex(ground, faces), tuple(sizes[v] for v in ground))


def relabel_vector(w: FullMarginalVector, mapping: dict[int, int]) -> FullMarginalVector:
    target = relabel_model(w.model, mapping)
    coords = [0] * target.full_dim
    for (F, i), value in w.items():
        pairs = sorted(zip((mapping[v] for v in F), i))
        key = (tuple(v for v, _ in pairs), tuple(k for _, k in pairs))
        coords[target.full_position[key]] = value
    return FullMarginalVector(target, tuple(coords))


# ---------------------------------------------------------------------------
# face embeddings of minors


def face_embedding(op: MinorOp, w: FullMarginalVector, source: Model) -> FullMarginalVector:
    """Carry a marginal vector of the minor onto the matching face of ``source``.

    Vertex deletion puts everything on level 1 of the deleted vertex;
    contraction puts everything on the diagonal of the contracted face.
    """
    if isinstance(op, DeleteEdge):
        raise InputError("edge deletion is a projection, not a face of the cone")
    target = apply_op(op, source)
    if w.model != target:
        raise InputError("vector does not live on the result of applying the operation")
    coords = []
    for F, i in source.full_keys:
        if isinstance(op, DeleteVertex):
            if op.vertex not in F:
                coords.append(w[(F, i)])
                continue
            n = F.index(op.vertex)
            coords.append(w[(F[:n] + F[n + 1:], i[:n] + i[n + 1:])] if i[n] == 1 else 0)
            continue
        L = set(op.face)
        levels = {k for f, k in zip(F, i) if f in L}
        if not levels:
            coords.append(w[(F, i)])
            continue
        k = levels.pop()
        if levels or k > target.sizes[op.label]:
            coords.append(0)
            continue
        pairs = sorted([(f, j) for f, j in zip(F, i) if f not in L] + [(op.label, k)])
        coords.append(w[(tuple(f for f, _ in pairs), tuple(j for _, j in pairs))])
    return FullMarginalVector(source, tuple(coords))


def lift_table(op: MinorOp, u: Table, source: Model) -> Table:
    """The table on ``source`` whose marginals are ``face_embedding`` of ``u``'s."""
    if isinstance(op, DeleteEdge):
        raise InputError("edge deletion does not lift tables")
    target = apply_op(op, source)
    if u.shape != target.shape:
        raise InputError("table does not match the result of applying the operation")
    slot = {v: n for n, v in enumerate(target.ground)}
    counts = {}
    for cell, c in u.counts.items():
        if isinstance(op, DeleteVertex):
            new = tuple(1 if v == op.vertex else cell[slot[v]] for v in source.ground)
        else:
            k = cell[slot[op.label]]
            new = tuple(k if v in op.face else cell[slot[v]] for v in source.ground)
        counts[new] = c
    return Table(source.shape, counts)


# ---------------------------------------------------------------------------
# reducible decompositions


@dataclass(frozen=True)
class Decomposition:
    complex: SimplicialComplex
    separator: Face | None = None
    left: Decomposition | None = None
    right: Decomposition | None = None

    @property
    def is_leaf(self) -> bool:
        return self.separator is None

    def leaves(self) -> list[SimplicialComplex]:
        if self.is_leaf:
            return [self.complex]
        return self.left.leaves() + self.right.leaves()

    def problems(self) -> list[str]:
        """Re-check every split; an empty list means the tree is valid."""
        if self.is_leaf:
            return []
        S = frozenset(self.separator)
        simplex_S = {frozenset(t) for k in range(len(S) + 1)
                     for t in itertools.combinations(sorted(S), k)}
        d1, d2 = self.left.complex.faces, self.right.complex.faces
        errors = []
        if d1 | d2 != self.complex.faces:
            errors.append(f"split at {sorted(S)} does not cover {self.complex}")
        if d1 & d2 != simplex_S:
            errors.append(f"split at {sorted(S)} does not meet in the simplex on the separator")
        if d1 == simplex_S or d2 == simplex_S:
            errors.append(f"split at {sorted(S)} has a side equal to the separator simplex")
        return errors + self.left.problems() + self.right.problems()


def _restrict(cx: SimplicialComplex, facets, S) -> SimplicialComplex:
    sub = build_complex(list(facets) + [S])
    return SimplicialComplex(sub.vertices_used(), sub.faces)


def reducible_decomposition(cx: SimplicialComplex) -> tuple[Face, SimplicialComplex, SimplicialComplex] | None:
    """First split ``(S, Δ1, Δ2)`` over faces ``S`` in face order, or ``None``.

    Facets are grouped by the components they form away from ``S``; ``Δ1``
    takes the component with the smallest vertex.
    """
    for S in cx.ordered_faces:
        Sset = set(S)
        outer = [f for f in cx.facets if not set(f) <= Sset]
        parent: dict[int, int] = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for f in outer:
            rest = [v for v in f if v not in Sset]
            for v in rest[1:]:
                parent[find(v)] = find(rest[0])
            find(rest[0])
        roots = {find(v) for v in parent}
        if len(roots) < 2:
            continue
        first = find(min(parent))
        g1 = [f for f in outer if find(next(v for v in f if v not in Sset)) == first]
        g2 = [f for f in outer if f not in g1]
        return S, _restrict(cx, g1, S), _restrict(cx, g2, S)
    return None


def decompose(cx: SimplicialComplex) -> Decomposition:
    split = reducible_decomposition(cx)
    if split is None:
        return Decomposition(cx)
    S, d1, d2 = split
    return Decomposition(cx, S, decompose(d1), decompose(d2))


def is_small_clique_complex(cx: SimplicialComplex, max_size: int = 3) -> bool:
    """True for the edge complex of a complete graph on at most ``max_size`` vertices."""
    if cx.dimension() > 1:
        return False
    vs = cx.vertices_used()
    if len(vs) > max_size:
        return False
    return all(frozenset(e) in cx.faces for e in itertools.combinations(vs, 2))


def edge_key(e) -> tuple[int, int]:
    a, b = sorted(e)
    return (a, b)

