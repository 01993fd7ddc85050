import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from engelnq.exactalg import GF, QQ, SparseRow, echelonize
from engelnq.freelie import TruncationSpec, multigraded_witt, witt_dimension
from engelnq.nqcore import (
    EngelSpec,
    GradedLieAlgebra,
    IntegralityError,
    NQError,
    OwnershipError,
    Presentation,
    build,
    ideal_class,
    left_normed,
    max_a_entries,
    multiply,
)


def free(names, ring=QQ, max_class=5):
    return build(Presentation(tuple(names), ring, trunc=TruncationSpec(max_class=max_class)))


def jacobi_failures_exhaustive(alg):
    prods = alg.products
    n = alg.dimension
    bad = []
    for i in range(n):
        for j in range(i + 1, n):
            pij = (i, j) in prods
            for k in range(j + 1, n):
                if pij or (j, k) in prods or (i, k) in prods:
                    if alg.jacobi_defect(i, j, k):
                        bad.append((i, j, k))
    return bad


def jacobi_failures_random(alg, count, seed=0):
    rng = random.Random(seed)
    n = alg.dimension
    bad = []
    for _ in range(count):
        i, j, k = rng.randrange(n), rng.randrange(n), rng.randrange(n)
        if alg.jacobi_defect(i, j, k):
            bad.append((i, j, k))
    return bad


# -- free algebras ---------------------------------------------------------------


@pytest.mark.parametrize("q,cls", [(2, 6), (3, 5)])
def test_free_algebra_dimensions_are_witt_numbers(q, cls):
    alg = free("abc"[:q], max_class=cls)
    for n in range(1, cls + 1):
        assert len(alg.indices_of_weight(n)) == witt_dimension(q, n)


def test_free_algebra_multidegree_components():
    alg = free("ab", max_class=6)
    for md, dim in alg.dimension_by_multidegree().items():
        assert dim == multigraded_witt(md)


def test_free_algebra_over_prime_field_has_same_dimensions():
    assert free("ab", GF(5), 6).dimension == free("ab", QQ, 6).dimension
    assert free("ab", GF(2), 5).dimension == free("ab", QQ, 5).dimension


def test_two_generator_class_two():
    alg = free("ab", max_class=2)
    assert alg.dimension == 3 and alg.lie_class == 2
    assert alg.structure_constant(2, 1) == {3: -1} or alg.structure_constant(1, 2) == {3: 1}


# -- identities ----------------------------------------------------------------


@pytest.mark.parametrize(
    "pres",
    [
        Presentation(("a", "b", "c"), QQ, trunc=TruncationSpec(max_class=5)),
        Presentation.x_and_commuting(3, QQ, cap_x=4),
        Presentation.x_and_commuting(3, GF(7), cap_x=5, engel=EngelSpec("direct")),
        Presentation.x_and_commuting(2, GF(5), cap_x=6, cap_a=2, engel=EngelSpec("multilinear+power")),
    ],
    ids=["free3", "m3q", "m3gf7engel", "m2gf5engel"],
)
def test_jacobi_exhaustive_small(pres):
    alg = build(pres)
    assert alg.dimension <= 300
    assert jacobi_failures_exhaustive(alg) == []


def test_jacobi_random_triples_larger_algebra():
    alg = build(Presentation.x_and_commuting(4, QQ, cap_x=4))
    assert alg.dimension > 300
    assert jacobi_failures_random(alg, 10_000) == []


def test_antisymmetry_and_grading():
    alg = build(Presentation.x_and_commuting(3, QQ, cap_x=4))
    for (i, j), prod in alg.products.items():
        assert i != j
        assert alg.products[(j, i)] == {k: -v for k, v in prod.items()}
    assert alg.grading_violations() == []


def test_commuting_generators_commute():
    alg = build(Presentation.x_and_commuting(3, QQ, cap_x=3))
    for i in range(1, 4):
        for j in range(1, 4):
            assert alg.product(i, j) == {}


def test_relator_is_imposed():
    base = Presentation.x_and_commuting(1, QQ, cap_x=3, cap_a=3)
    with_rel = Presentation(base.generators, QQ, base.commuting_pairs, base.trunc, None, (("x", "a1", "a1"),))
    alg = build(with_rel)
    x, a = alg.generator("x"), alg.generator("a1")
    assert left_normed(alg, [x, a, a]).is_zero()
    assert not left_normed(alg, [x, a]).is_zero()
    assert alg.dimension < build(base).dimension


# -- elements ------------------------------------------------------------------


def test_multiply_example():
    alg = free("ab", max_class=2)
    a, b = alg.generator("a"), alg.generator("b")
    assert multiply(alg, a + b, a - b) == -2 * multiply(alg, a, b)
    assert multiply(alg, a, a).is_zero()


def test_ownership_is_enforced():
    A, B = free("ab", max_class=2), free("ab", max_class=2)
    with pytest.raises(OwnershipError):
        multiply(A, A.generator("a"), B.generator("b"))
    with pytest.raises(OwnershipError):
        A.generator("a") + B.generator("a")


def test_left_normed_requires_factors():
    A = free("ab", max_class=3)
    with pytest.raises(NQError):
        left_normed(A, [])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_bracket_is_bilinear_and_alternating(cs):
    A = _free_ab4()
    g = [A.generator("a"), A.generator("b"), multiply(A, A.generator("a"), A.generator("b"))]
    u = cs[0] * g[0] + cs[1] * g[1] + cs[2] * g[2]
    v = cs[3] * g[0] + cs[4] * g[1] + cs[5] * g[2]
    assert multiply(A, u, v) == -multiply(A, v, u)
    assert multiply(A, u, u).is_zero()
    assert multiply(A, u + v, g[1]) == multiply(A, u, g[1]) + multiply(A, v, g[1])


_CACHE = {}


def _free_ab4():
    if "ab4" not in _CACHE:
        _CACHE["ab4"] = free("ab", max_class=4)
    return _CACHE["ab4"]


# -- invariance and serialisation ---------------------------------------------------


def test_relabeling_the_commuting_generators():
    pres = Presentation.x_and_commuting(3, QQ, cap_x=4, caps=(4, 1, 2, 1))
    swapped = Presentation.x_and_commuting(3, QQ, cap_x=4, caps=(4, 2, 1, 1))
    d1 = build(pres).dimension_by_multidegree()
    d2 = build(swapped).dimension_by_multidegree()
    perm = lambda md: (md[0], md[2], md[1], md[3])
    assert {perm(md): n for md, n in d1.items()} == d2


def test_table_round_trip():
    pres = Presentation.x_and_commuting(3, QQ, cap_x=4)
    alg = build(pres)
    text = alg.export_table()
    again = GradedLieAlgebra.import_table(text, pres)
    assert again.export_table() == text
    assert again.products == alg.products


def test_table_ring_mismatch_is_rejected():
    pres = Presentation.x_and_commuting(1, GF(5), cap_x=3)
    text = build(pres).export_table()
    with pytest.raises(NQError):
        GradedLieAlgebra.import_table(text, Presentation.x_and_commuting(1, QQ, cap_x=3))


def test_integrality_flag():
    alg = build(Presentation.x_and_commuting(3, QQ, cap_x=4))
    assert alg.is_integral
    alg.assert_integral()
    alg.non_integral.append(((0, 1), 2, Fraction(1, 2)))
    with pytest.raises(IntegralityError):
        alg.export_table()


# -- the ideal generated by x ------------------------------------------------------------


def _span(alg, vecs):
    rows = [SparseRow.from_dict(alg.ring, v) for v in vecs if v]
    return [r.to_dict() for r in echelonize(rows)[0]] if rows else []


def naive_ideal_class(alg, g):
    """gamma_1 = span of all [g, h_1, ..., h_r] over basis elements h;
    gamma_{k+1} = span of [u, v] for u in gamma_k and v in gamma_1."""
    basis = [{i: 1} for i in range(alg.dimension)]
    level = [{g: 1}]
    ideal = []
    while level:
        ideal.extend(level)
        ideal = _span(alg, ideal)
        nxt = [alg.bracket_dicts(u, h) for u in level for h in basis]
        nxt = [v for v in nxt if v]
        level = [v for v in _span(alg, nxt) if len(_span(alg, ideal + [v])) > len(ideal)]
    gamma = ideal
    k = 0
    while gamma:
        k += 1
        gamma = _span(alg, [alg.bracket_dicts(u, v) for u in gamma for v in ideal])
    return k


@pytest.mark.parametrize(
    "pres",
    [
        Presentation.x_and_commuting(2, QQ, cap_x=3),
        Presentation.x_and_commuting(2, GF(5), cap_x=5, cap_a=2, engel=EngelSpec("direct")),
        Presentation(("x", "y"), QQ, trunc=TruncationSpec(max_class=4)),
    ],
)
def test_ideal_class_matches_naive_lower_central_series(pres):
    alg = build(pres)
    assert ideal_class(alg, "x") == naive_ideal_class(alg, 0)


def test_ideal_class_simple_cases():
    commuting = build(Presentation(("x", "a"), QQ, frozenset({("x", "a")}), TruncationSpec(max_class=3)))
    assert ideal_class(commuting, "x") == 1
    with pytest.raises(NQError):
        ideal_class(commuting, "z")


def test_max_a_entries():
    assert max_a_entries(build(Presentation.x_and_commuting(3, QQ, cap_x=2))) == 3
    assert max_a_entries(build(Presentation.x_and_commuting(0, QQ, cap_x=2))) == 0
