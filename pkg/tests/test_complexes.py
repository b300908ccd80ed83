import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from margnorm import (
    Model,
    Table,
    build_complex,
    expand_coords,
    generators,
    marginalize,
    reduce_coords,
)
from margnorm.complexes import (
    ReducedMarginalVector,
    face_sort_key,
    graph_model,
    reduced_generators,
    subset_sums,
)
from margnorm.errors import InputError

from oracles import naive_marginal, rank

TRIANGLE = [[1, 2], [1, 3], [2, 3]]


# --- complexes ---------------------------------------------------------------

def test_triangle_closure():
    # three edges, three vertices and the empty face; {1,2,3} itself is not a face
    cx = build_complex(TRIANGLE, [1, 2, 3])
    assert len(cx.faces) == 7
    assert cx.ordered_faces == ((), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3))
    assert cx.facets == ((1, 2), (1, 3), (2, 3))


def test_empty_complex_is_just_the_empty_face():
    cx = build_complex([], [1])
    assert cx.faces == frozenset({frozenset()})


def test_absorbed_facet():
    assert build_complex([[1, 2], [2]]) == build_complex([[1, 2]])


def test_unknown_vertex_rejected():
    with pytest.raises(InputError):
        build_complex([[1, 4]], [1, 2, 3])


def test_face_order_is_size_then_lex():
    faces = [(2, 3), (1,), (), (1, 3), (3,)]
    assert sorted(faces, key=face_sort_key) == [(), (1,), (3,), (1, 3), (2, 3)]


def test_str_lists_facets():
    assert str(build_complex([[1, 2], [2, 3, 4]])) == "[12][234]"


# --- marginalize ----------------------------------------------------------------

def test_zero_table_gives_zero_vector():
    m = Model.from_facets(TRIANGLE)
    assert set(marginalize(Table((2, 2, 2)), m).coords) == {0}


def test_two_by_two_identity_table():
    m = Model.from_facets([[1, 2]])
    v = marginalize(Table((2, 2), {(1, 1): 1, (2, 2): 1}), m)
    assert v[((), ())] == 2
    assert [v[((1,), (i,))] for i in (1, 2)] == [1, 1]
    assert [v[((2,), (i,))] for i in (1, 2)] == [1, 1]
    assert [[v[((1, 2), (i, j))] for j in (1, 2)] for i in (1, 2)] == [[1, 0], [0, 1]]


def test_unit_table_is_indicator():
    m = Model.from_facets(TRIANGLE, (2, 3, 2))
    cell = (2, 3, 1)
    v = marginalize(Table.unit(m.shape, cell), m)
    pos = dict(zip(m.ground, range(3)))
    for (F, i), x in v.items():
        assert x == int(all(cell[pos[f]] == k for f, k in zip(F, i)))


def test_shape_mismatch_rejected():
    with pytest.raises(InputError):
        marginalize(Table((2, 2)), Model.from_facets(TRIANGLE))


def test_cell_outside_shape_rejected():
    with pytest.raises(InputError):
        Table((2, 2), {(3, 1): 1})


@st.composite
def model_and_table(draw, max_vertices=4, max_size=3):
    n = draw(st.integers(1, max_vertices))
    shape = tuple(draw(st.lists(st.integers(1, max_size), min_size=n, max_size=n)))
    facets = draw(st.lists(st.sets(st.integers(1, n), min_size=1, max_size=n), max_size=4))
    model = Model.from_facets([sorted(f) for f in facets], shape, range(1, n + 1))
    cells = list(itertools.product(*(range(1, r + 1) for r in shape)))
    counts = draw(st.dictionaries(st.sampled_from(cells), st.integers(0, 4), max_size=6))
    return model, Table(shape, counts)


@settings(max_examples=60, deadline=None)
@given(model_and_table())
def test_marginalize_matches_axis_sums(mt):
    model, u = mt
    oracle = naive_marginal(model.ground, model.shape, model.complex.ordered_faces, u.counts)
    assert dict(marginalize(u, model).items()) == oracle


@settings(max_examples=40, deadline=None)
@given(model_and_table(), st.data())
def test_marginalize_is_additive(mt, data):
    model, u = mt
    cells = list(itertools.product(*(range(1, r + 1) for r in model.shape)))
    v = Table(model.shape, data.draw(st.dictionaries(st.sampled_from(cells), st.integers(0, 3), max_size=4)))
    assert marginalize(u + v, model) == marginalize(u, model) + marginalize(v, model)


@settings(max_examples=40, deadline=None)
@given(model_and_table())
def test_marginal_is_consistent_and_counts_sample(mt):
    model, u = mt
    v = marginalize(u, model)
    assert v.is_consistent()
    assert v.sample_size == u.sample_size


# --- generators and reduced coordinates ---------------------------------------------

@pytest.mark.parametrize("facets, shape, count", [
    (TRIANGLE, None, 8),
    ([[1]], (2,), 2),
    ([[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]], None, 16),
])
def test_generator_counts(facets, shape, count):
    assert len(generators(Model.from_facets(facets, shape))) == count


def test_triangle_dimensions():
    m = Model.from_facets(TRIANGLE)
    assert m.full_dim == 1 + 6 + 12
    assert m.reduced_dim == 7
    assert rank(reduced_generators(m)) == 7


def test_triangle_generator_111_reduces_to_all_ones():
    m = Model.from_facets(TRIANGLE)
    g = generators(m)[0]
    assert reduce_coords(g).coords == (1,) * 7


def test_zero_vectors_map_to_zero():
    m = Model.from_facets(TRIANGLE, (2, 3, 2))
    zero = ReducedMarginalVector(m, (0,) * m.reduced_dim)
    assert set(expand_coords(zero).coords) == {0}
    assert set(reduce_coords(expand_coords(zero)).coords) == {0}


def test_expansion_of_top_cell_on_an_edge():
    m = Model.from_facets([[1, 2]])
    x = ReducedMarginalVector(m, (Fraction(7), Fraction(3), Fraction(4), Fraction(2)))
    full = expand_coords(x)
    assert full[((1, 2), (2, 2))] == x[((), ())] - x[((1,), (1,))] - x[((2,), (1,))] + x[((1, 2), (1, 1))]


def test_top_cell_is_alternating_sum_of_subset_sums():
    m = Model.from_facets([[1, 2, 3]], (3, 2, 4))
    u = Table(m.shape, {(1, 1, 1): 2, (3, 2, 4): 1, (2, 1, 3): 5, (3, 1, 4): 1})
    x = reduce_coords(marginalize(u, m))
    q = subset_sums(x, (1, 2, 3))
    top = sum((-1) ** len(S) * v for S, v in q.items())
    assert top == marginalize(u, m)[((1, 2, 3), (3, 2, 4))] == 1


def test_subset_sums_rejects_non_face():
    m = Model.from_facets(TRIANGLE)
    with pytest.raises(InputError):
        subset_sums(reduce_coords(generators(m)[0]), (1, 2, 3))


@settings(max_examples=80, deadline=None)
@given(model_and_table())
def test_reduce_expand_roundtrip(mt):
    model, u = mt
    v = marginalize(u, model)
    assert expand_coords(reduce_coords(v)) == v


@settings(max_examples=30, deadline=None)
@given(model_and_table(max_vertices=3))
def test_reduced_dimension_formula_and_rank(mt):
    model, _ = mt
    expected = 0
    for F in model.complex.ordered_faces:
        size = 1
        for f in F:
            size *= model.sizes[f] - 1
        expected += size
    assert model.reduced_dim == expected
    assert rank(reduced_generators(model)) == expected


def test_graph_model_includes_isolated_vertices():
    m = graph_model([(1, 2)], vertices=[1, 2, 3])
    assert (3,) in m.complex.ordered_faces
    assert m.reduced_dim == 1 + 3 + 1
