import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from engelnq.exactalg import (
    GF,
    QQ,
    ZZ,
    ModeError,
    RingError,
    SNFResult,
    SparseRow,
    UnsupportedRingError,
    determinantal_divisors_bruteforce,
    echelonize,
    integer_rank,
    is_prime,
    prime_support,
    rref_rational,
    smith_normal_form,
)


def rows_of(ring, dense):
    return [SparseRow.from_dense(ring, r) for r in dense]


def naive_rref(dense):
    """Textbook Fraction elimination, the oracle for rational RREF."""
    m = [[Fraction(x) for x in row] for row in dense]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        m[r] = [x / m[r][c] for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def span_gf(rows, p, ncols):
    """Every vector in the GF(p) row space, by enumeration."""
    out = set()
    for coeffs in itertools.product(range(p), repeat=len(rows)):
        v = [0] * ncols
        for c, r in zip(coeffs, rows):
            for j in range(ncols):
                v[j] = (v[j] + c * r[j]) % p
        out.add(tuple(v))
    return out


# -- rings ---------------------------------------------------------------------


def test_rational_scalars_are_normalised():
    assert QQ.convert(Fraction(4, 2)) == 2 and type(QQ.convert(Fraction(4, 2))) is int
    assert QQ.convert(Fraction(2, -4)) == Fraction(-1, 2)
    assert QQ.convert("3/6") == Fraction(1, 2)


def test_prime_field_rejects_composites_and_reduces():
    with pytest.raises(RingError):
        GF(6)
    assert GF(5).convert(-1) == 4
    assert GF(5).convert(Fraction(1, 2)) == 3
    assert GF(7) == GF(7) and GF(7) != GF(5)


def test_booleans_are_not_scalars():
    with pytest.raises(ModeError):
        QQ.convert(True)


def test_sparse_row_invariants():
    with pytest.raises(ValueError):
        SparseRow(QQ, ((1, 1), (0, 1)))
    with pytest.raises(ValueError):
        SparseRow(QQ, ((0, 0),))
    row = SparseRow.from_dict(GF(3), {2: 3, 0: 4})
    assert row.entries == ((0, 1),)


# -- echelonize ----------------------------------------------------------------


def test_echelonize_examples():
    assert echelonize([]) == ([], [])
    basis, piv = echelonize(rows_of(QQ, [[1], [2]]))
    assert [r.entries for r in basis] == [((0, 1),)] and piv == [0]
    basis, piv = echelonize(rows_of(GF(5), [[1, 1], [1, -1]]))
    assert [r.entries for r in basis] == [((0, 1),), ((1, 1),)] and piv == [0, 1]


def test_echelonize_gf5_example_matches_bruteforce_span():
    dense = [[1, 1], [1, 4]]
    basis, _ = echelonize(rows_of(GF(5), dense))
    assert span_gf(dense, 5, 2) == span_gf([r.dense(2) for r in basis], 5, 2)


def test_echelonize_errors():
    with pytest.raises(UnsupportedRingError):
        echelonize(rows_of(ZZ, [[1, 2]]))
    with pytest.raises(ModeError):
        echelonize(rows_of(QQ, [[1]]) + rows_of(GF(5), [[1]]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(0, 4), min_size=3, max_size=3), min_size=1, max_size=4))
def test_gf5_row_space_against_enumeration(dense):
    basis, piv = echelonize(rows_of(GF(5), dense))
    assert span_gf(dense, 5, 3) == span_gf([r.dense(3) for r in basis] or [[0, 0, 0]], 5, 3)
    assert piv == sorted(set(piv))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=4, max_size=4), min_size=1, max_size=5))
def test_rational_rref_matches_fraction_oracle(dense):
    basis, piv = echelonize(rows_of(QQ, dense))
    expect, expect_piv = naive_rref(dense)
    assert piv == expect_piv
    assert [r.dense(4) for r in basis] == [[QQ.convert(x) for x in row] for row in expect]


def test_rational_rref_with_large_entries_needs_several_primes():
    rng = random.Random(3)
    dense = [[rng.randint(-10**20, 10**20) for _ in range(5)] for _ in range(4)]
    dense.append([a + 3 * b for a, b in zip(dense[0], dense[1])])
    basis, piv = echelonize(rows_of(QQ, dense))
    expect, expect_piv = naive_rref(dense)
    assert piv == expect_piv
    assert [r.dense(5) for r in basis] == [[QQ.convert(x) for x in row] for row in expect]


def test_rational_rref_accepts_fraction_input():
    piv = rref_rational([{0: Fraction(1, 3), 1: Fraction(1, 2)}, {1: 1}])
    assert piv == {0: {0: 1}, 1: {1: 1}}


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([QQ, GF(5), GF(7)]),
    st.lists(st.lists(st.integers(-5, 5), min_size=4, max_size=4), min_size=1, max_size=5),
)
def test_echelonize_is_idempotent(ring, dense):
    basis, piv = echelonize(rows_of(ring, dense))
    again, piv2 = echelonize(basis)
    assert again == basis and piv2 == piv


# -- Smith normal form -----------------------------------------------------------


def test_snf_examples():
    assert smith_normal_form(rows_of(ZZ, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]), 3) == SNFResult(3, (1, 1, 1))
    assert smith_normal_form(rows_of(ZZ, [[2, 4], [6, 8]]), 2) == SNFResult(2, (2, 4))
    assert smith_normal_form([], 4) == SNFResult(0, ())


def test_snf_rejects_non_integer_rows():
    with pytest.raises(ModeError):
        smith_normal_form(rows_of(QQ, [[1, 2]]), 2)


def test_snf_result_validates_chain():
    with pytest.raises(ValueError):
        SNFResult(2, (2, 3))
    with pytest.raises(ValueError):
        SNFResult(1, (1, 1))


def _check_against_minors(dense):
    ncols = len(dense[0])
    snf = smith_normal_form(rows_of(ZZ, dense), ncols)
    dd = [d for d in determinantal_divisors_bruteforce(dense) if d]
    prods = list(itertools.accumulate(snf.elementary_divisors, lambda a, b: a * b))
    assert prods == dd, (dense, snf, dd)
    assert all(b % a == 0 for a, b in zip(snf.elementary_divisors, snf.elementary_divisors[1:]))


def test_snf_determinantal_divisors_random_small():
    rng = random.Random(20240)
    pool = [0, 0, 0, 1, -1, 2, -2, 3, 4, 6, -9, 12, 30]
    for _ in range(500):
        nr, nc = rng.randint(1, 5), rng.randint(1, 5)
        dense = [[rng.choice(pool) if rng.random() < 0.8 else rng.randint(-50, 50) for _ in range(nc)] for _ in range(nr)]
        _check_against_minors(dense)


def test_snf_without_unit_entries_uses_the_modular_core():
    rng = random.Random(7)
    for _ in range(100):
        n = rng.randint(2, 5)
        dense = [[rng.choice([0, 2, 4, 6, -6, 10, 15, 21]) for _ in range(n)] for _ in range(n + rng.randint(0, 2))]
        _check_against_minors(dense)


def test_snf_matches_sympy_on_medium_matrices():
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form as sympy_snf
    from sympy.polys.domains import ZZ as SZZ

    rng = random.Random(11)
    for _ in range(6):
        nr, nc = rng.randint(6, 9), rng.randint(4, 7)
        dense = [[rng.choice([0, 0, 2, 3, -4, 6, 12, 1]) for _ in range(nc)] for _ in range(nr)]
        snf = smith_normal_form(rows_of(ZZ, dense), nc)
        d = sympy_snf(Matrix(dense), domain=SZZ)
        diag = sorted(abs(int(d[i, i])) for i in range(min(nr, nc)) if d[i, i] != 0)
        assert list(snf.elementary_divisors) == diag


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-8, 8), min_size=4, max_size=4), min_size=1, max_size=6))
def test_snf_rank_equals_rational_rank(dense):
    snf = smith_normal_form(rows_of(ZZ, dense), 4)
    basis, _ = echelonize(rows_of(QQ, dense))
    assert snf.rank == len(basis)
    assert integer_rank([{j: v for j, v in enumerate(r) if v} for r in dense], 4) == len(basis)


def test_snf_large_prime_in_divisor():
    q = 1000003 * 1000033  # both prime, beyond the trial-division range for the cofactor
    snf = smith_normal_form(rows_of(ZZ, [[1, 0], [0, q]]), 2)
    assert snf.elementary_divisors == (1, q)
    assert prime_support(snf) == [1000003, 1000033]


def test_modular_lu_determinant_matches_exact():
    import numpy as np

    from engelnq import exactalg

    rng = random.Random(5)
    for n in (1, 3, 70, 130):
        dense = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        exact = exactalg._det([row[:] for row in dense])
        p = exactalg._random_lu_prime(rng)
        res = exactalg._lu_mod_p(np.array(dense, dtype=np.int64) % p, p, block=32)
        assert res is not None and res[1] == exact % p and sorted(res[0]) == list(range(n))
    singular = np.array([[1, 2], [2, 4]], dtype=np.int64)
    assert exactalg._lu_mod_p(singular, 7) is None


def test_large_core_route_agrees_with_lattice_route(monkeypatch):
    from engelnq import exactalg

    rng = random.Random(8)
    # no entry is a unit, so the whole matrix is the core
    pool = [0, 0, 2, -2, 3, -3, 4, 6, 10]
    dense = [[rng.choice(pool) for _ in range(100)] for _ in range(112)]
    dense[0] = [30] * 100
    for row in dense:
        row[0] *= 7
        row[1] *= 4
        row[2] *= 4
    rows = rows_of(ZZ, dense)
    fast = smith_normal_form(rows, 100)
    monkeypatch.setattr(exactalg, "_LARGE_CORE", 10**6)
    slow = smith_normal_form(rows, 100)
    assert fast == slow and fast.rank == 100
    assert 7 in prime_support(fast) and fast.elementary_divisors[-2] % 4 == 0


@pytest.mark.parametrize("p,e", [(2, 5), (2, 40), (3, 25), (5, 3)])
def test_schur_local_valuations_match_direct_elimination(p, e):
    from engelnq import exactalg

    rng = random.Random(p * 100 + e)
    for _ in range(5):
        dense = [[rng.randint(-6, 6) for _ in range(30)] for _ in range(45)]
        for j in rng.sample(range(30), 6):
            scale = p ** rng.randint(1, 4)
            for row in dense:
                row[j] *= scale
        rows = [{j: v for j, v in enumerate(r) if v} for r in dense]
        fast = exactalg._local_valuations_schur(rows, 30, p, e, random.Random(1))
        slow = exactalg._local_divisor_valuations_py(rows, 30, p, e)
        assert sorted(fast) == sorted(slow)


# -- primes --------------------------------------------------------------------


def test_prime_support_examples():
    assert prime_support(SNFResult(3, (1, 1, 1))) == []
    assert prime_support(SNFResult(2, (1, 6))) == [2, 3]


def test_is_prime_against_sympy():
    from sympy import isprime

    for n in list(range(-3, 3000)) + [2**61 - 1, 2**61 + 1, 3317044064679887385961981 + 2]:
        assert is_prime(n) == bool(isprime(n)), n
    # strong pseudoprimes to several small bases
    for n in (3215031751, 2152302898747, 3474749660383, 341550071728321):
        assert not is_prime(n)
