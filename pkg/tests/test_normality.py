import itertools
import random

import pytest

from margnorm import Graph, Model, Table, expand_coords, generators, marginalize, reduce_coords
from margnorm.complexes import ReducedMarginalVector, reduced_generators
from margnorm.errors import InputError, UnsupportedError
from margnorm.graphs import ContractEdge, DeleteVertex, find_k4_branch_sets, minor_sequence_to_k4
from margnorm.normality import (
    K4_HOLE_COORDS,
    NORMAL,
    NOT_NORMAL,
    UNKNOWN,
    certify,
    classify_normality,
    enumerate_lattice_points,
    find_holes,
    glue_marginals,
    glue_tables,
    glued_witness,
    hole_census,
    k4_hole,
    lift_hole,
    semigroup_membership,
    semigroup_search,
    verify_certificate,
)
from margnorm.polyhedra import HOLDS

from oracles import atlas_graphs, ip_feasible, k4_minor_free, lp_feasible, marginal_matrix

TRIANGLE = Graph.complete(3)
K4 = Graph.complete(4)


def random_table(rng, shape, n=5):
    cells = list(itertools.product(*(range(1, r + 1) for r in shape)))
    return Table(shape, {rng.choice(cells): rng.randint(1, 3) for _ in range(n)})


# --- integer feasibility ----------------------------------------------------------------

def test_search_recovers_a_table_with_the_same_marginals():
    rng = random.Random(2)
    m = Model.from_facets([[1, 2], [2, 3], [1, 3]], (2, 3, 2))
    for _ in range(10):
        x = marginalize(random_table(rng, m.shape), m)
        u = semigroup_membership(x)
        assert u is not None and marginalize(u, m) == x


def test_search_on_zero_vector():
    m = TRIANGLE.model()
    assert semigroup_membership(marginalize(Table(m.shape), m)) == Table(m.shape)


def test_k4_hole_has_no_table():
    m = K4.model()
    x = expand_coords(ReducedMarginalVector(m, K4_HOLE_COORDS))
    result = semigroup_search(x)
    assert not result.found and result.nodes > 0
    keys = m.full_keys
    A = marginal_matrix(m.ground, m.shape, m.complex.ordered_faces, keys)
    assert not ip_feasible(A, x.coords)


def test_search_rejects_fractions():
    m = TRIANGLE.model()
    with pytest.raises(InputError):
        semigroup_search(expand_coords(ReducedMarginalVector(m, (1,) + (0,) * 5 + (0.5,))))


def test_search_agrees_with_milp_on_perturbed_points():
    rng = random.Random(8)
    m = Model.from_facets([[1, 2], [2, 3]], (2, 3, 2))
    A = marginal_matrix(m.ground, m.shape, m.complex.ordered_faces, m.full_keys)
    for _ in range(25):
        x = reduce_coords(marginalize(random_table(rng, m.shape, 3), m))
        coords = list(x.coords)
        coords[rng.randrange(1, len(coords))] += rng.choice((-1, 1))
        full = expand_coords(ReducedMarginalVector(m, coords))
        assert semigroup_search(full).found == ip_feasible(A, full.coords)


# --- lattice points ---------------------------------------------------------------------------

def test_level_zero_is_the_origin():
    m = TRIANGLE.model()
    assert [p.coords for p in enumerate_lattice_points(m, 0)] == [(0,) * 7]


def test_level_one_of_the_triangle_is_the_generators():
    m = TRIANGLE.model()
    assert sorted(p.coords for p in enumerate_lattice_points(m, 1)) == sorted(set(reduced_generators(m)))


@pytest.mark.parametrize("facets, shape", [
    ([[1, 2], [2, 3], [1, 3]], (2, 3, 2)),
    ([[1, 2, 3]], (2, 2, 3)),
    ([[1, 2], [3]], (3, 2, 2)),
])
def test_every_level_one_point_is_a_single_cell(facets, shape):
    m = Model.from_facets(facets, shape)
    gens = set(reduced_generators(m))
    for x in enumerate_lattice_points(m, 1):
        assert x.coords in gens
        assert semigroup_search(expand_coords(x)).found


def test_level_two_against_naive_lp_enumeration():
    m = Model.from_facets([[1, 2], [2, 3], [1, 3]])
    gens = reduced_generators(m)
    got = {p.coords for p in enumerate_lattice_points(m, 2)}
    naive = {x for x in itertools.product(range(3), repeat=6)
             if lp_feasible(gens, (2,) + x)}
    assert got == {(2,) + x for x in naive}


# --- holes --------------------------------------------------------------------------------------

def test_triangle_has_no_holes_to_four():
    assert find_holes(TRIANGLE.model(), 4) == []


def test_k4_hole_report():
    hole = k4_hole()
    assert hole.point.coords == K4_HOLE_COORDS
    assert hole.sample_size == 4
    assert hole.problems() == []
    assert sum(hole.weights.values()) == 4


def test_census_rows():
    census = [c for _, _, c in hole_census(K4.model(), 4)]
    assert [c.level for c in census] == [0, 1, 2, 3, 4]
    assert [c.holes for c in census] == [0, 0, 0, 0, 1]
    assert census[1].lattice_points == 16
    assert all(c.lattice_points == c.semigroup_points + c.holes for c in census)


def test_parallel_census_matches_serial():
    m = Model.from_facets([[1, 2], [1, 3], [1, 4], [2, 3, 4]])
    serial = find_holes(m, 4)
    assert [h.point for h in find_holes(m, 4, workers=2)] == [h.point for h in serial]
    assert [h.point.coords for h in serial] == [
        (4, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 0),
        (4, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1),
    ]


def test_negative_bound_rejected():
    with pytest.raises(InputError):
        find_holes(TRIANGLE.model(), -1)


# --- lifting ------------------------------------------------------------------------------------

def test_lift_through_no_operations():
    hole = k4_hole()
    assert lift_hole(hole, [], hole.model).point == hole.point


def test_lift_k4_hole_into_k5():
    G = Graph.complete(5)
    ops = minor_sequence_to_k4(G, find_k4_branch_sets(G))
    assert ops == [DeleteVertex(5)]
    lifted = lift_hole(k4_hole(), ops, G.model())
    assert lifted.problems() == []
    assert lifted.sample_size == 4
    full = expand_coords(lifted.point)
    assert full[((5,), (2,))] == 0


def test_lift_k4_hole_into_wheel():
    W = Graph.wheel(4)
    cert = classify_normality(W)
    assert cert.verdict == NOT_NORMAL
    assert any(isinstance(op, ContractEdge) for op in cert.ops)
    m = W.model()
    assert cert.hole.problems() == []
    gens = reduced_generators(m)
    assert lp_feasible(gens, cert.hole.point.coords)
    A = marginal_matrix(m.ground, m.shape, m.complex.ordered_faces, m.full_keys)
    assert not ip_feasible(A, expand_coords(cert.hole.point).coords)


def test_lift_rejects_wrong_ops():
    with pytest.raises(InputError):
        lift_hole(k4_hole(), [DeleteVertex(1)], Graph.complete(5).model())


# --- classification -------------------------------------------------------------------------------

def test_triangle_is_normal_with_one_leaf():
    cert = classify_normality(TRIANGLE)
    assert cert.verdict == NORMAL and cert.exit_code == 0
    assert len(cert.decomposition.leaves()) == 1
    assert cert.deletions == ()


def test_k4_is_not_normal_with_its_own_hole():
    cert = classify_normality(K4)
    assert cert.verdict == NOT_NORMAL and cert.exit_code == 10
    assert cert.ops == ()
    assert cert.hole.point.coords == K4_HOLE_COORDS


def test_c4_deletes_one_fill_edge():
    cert = classify_normality(Graph.cycle(4))
    assert cert.verdict == NORMAL
    (d,) = cert.deletions
    assert d.report.verdict == HOLDS
    assert all(row[0] in (-1, 0, 1) for row in d.report.B)


def test_classifier_needs_binary_shape():
    with pytest.raises(UnsupportedError):
        classify_normality(TRIANGLE, (2, 3, 2))


def test_certificates_verify_on_small_graphs():
    for g in atlas_graphs(6):
        G = Graph.from_edges(g.edges, g.nodes)
        cert = classify_normality(G)
        assert (cert.verdict == NORMAL) == k4_minor_free(g)
        assert verify_certificate(cert) == [], G


def test_tampered_certificate_is_caught():
    cert = classify_normality(K4)
    fake = type(cert)(NOT_NORMAL, cert.model, cert.graph, branch_sets=cert.branch_sets, ops=(),
                      hole=type(cert.hole)(reduce_coords(generators(cert.model)[0]), {}, cert.hole.search))
    assert verify_certificate(fake)


def test_certify_general_models():
    ex1 = Model.from_facets([[1, 2], [1, 3], [1, 4], [2, 3, 4]])
    cert = certify(ex1, 4)
    assert cert.verdict == NOT_NORMAL and verify_certificate(cert) == []
    ex2 = Model.from_facets([[1, 2], [1, 3, 4], [2, 3, 4]])
    cert = certify(ex2, 2)
    assert cert.verdict == UNKNOWN and cert.bound == 2 and cert.exit_code == 20


# --- gluing ----------------------------------------------------------------------------------------

def triangles():
    left = Model.from_facets([[1, 2], [1, 3], [2, 3]])
    right = Model.from_facets([[1, 3], [1, 4], [3, 4]], ground=[1, 3, 4])
    return left, right


def test_glue_zero():
    left, right = triangles()
    z1 = marginalize(Table(left.shape), left)
    z2 = marginalize(Table(right.shape), right)
    assert set(glue_marginals(z1, z2, (1, 3)).coords) == {0}


def test_glued_triangles_are_members():
    rng = random.Random(4)
    left, right = triangles()
    for _ in range(10):
        u = random_table(rng, (2, 2, 2, 2), 4)
        # marginals of one 4-way table agree on the shared edge by construction
        x1 = marginalize(Table(left.shape, _project(u, [0, 1, 2])), left)
        x2 = marginalize(Table(right.shape, _project(u, [0, 2, 3])), right)
        w = glued_witness(x1, x2, (1, 3))
        glued = glue_marginals(x1, x2, (1, 3))
        assert w is not None and marginalize(w, glued.model) == glued


def _project(u, axes):
    out = {}
    for cell, c in u.counts.items():
        key = tuple(cell[a] for a in axes)
        out[key] = out.get(key, 0) + c
    return out


def test_mismatched_sample_size_rejected():
    left, right = triangles()
    x1 = generators(left)[0]
    x2 = generators(right)[0] + generators(right)[1]
    with pytest.raises(InputError):
        glue_marginals(x1, x2, (1, 3))


def test_glue_tables_needs_matching_separator_margins():
    left, right = triangles()
    with pytest.raises(InputError):
        glue_tables(Table((2, 2, 2), {(1, 1, 1): 1}), left, Table((2, 2, 2), {(2, 1, 1): 1}), right, (1, 3))
