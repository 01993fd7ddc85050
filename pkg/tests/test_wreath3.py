import random

import pytest

from engelnq import wreath3 as w3
from engelnq.exactalg import GF, SparseRow, echelonize
from engelnq.nqcore import build, left_normed, wreath_presentation


N = 4  # a_1..a_4 in the nqcore model


@pytest.fixture(scope="module")
def model():
    return build(wreath_presentation(N, GF(3)))


def _image(alg, mono):
    """The nqcore element [b, a1^e, a_S..., [a_r,a1]...]."""
    e, S, B = mono
    g = alg.generator
    factors = [g("b")] + [g("a1")] * e + [g(f"a{s}") for s in S]
    factors += [left_normed(alg, [g(f"a{r}"), g("a1")]) for r in B]
    return left_normed(alg, factors)


def _to_model(alg, elem):
    out = alg.zero()
    for mono, coeff in elem.c_part:
        out = out + coeff * _image(alg, mono)
    g = alg.generator
    for (kind, n), coeff in elem.a_part:
        term = g(f"a{n}") if kind == "a" else left_normed(alg, [g(f"a{n}"), g("a1")])
        out = out + coeff * term
    return out


def test_canonical_monomials_are_a_basis_of_the_module_part(model):
    alg = model
    monos = w3.monomials(N, 99)
    images = [_image(alg, m) for m in monos]
    assert all(not x.is_zero() for x in images)
    rows = [SparseRow.from_dict(GF(3), x.coeffs) for x in images]
    assert len(echelonize(rows)[0]) == len(monos)
    module_dim = sum(1 for md in alg.multidegrees if md[0] == 1)
    assert module_dim == len(monos)
    # the A part is a_1..a_N and [a_r, a_1]
    assert sum(1 for md in alg.multidegrees if md[0] == 0) == 2 * N - 1


def test_normal_form_agrees_with_the_model(model):
    alg = model
    rng = random.Random(4)
    g = alg.generator
    for _ in range(300):
        length = rng.randint(0, 6)
        factors = []
        for _ in range(length):
            if rng.random() < 0.7:
                factors.append(rng.randint(1, N))
            else:
                factors.append((rng.randint(1, N), rng.randint(1, N)))
        direct = g("b")
        for f in factors:
            term = g(f"a{f}") if isinstance(f, int) else left_normed(alg, [g(f"a{f[0]}"), g(f"a{f[1]}")])
            direct = left_normed(alg, [direct, term])
        assert _to_model(alg, w3.normal_form(factors)) == direct, factors


def test_bracket_agrees_with_the_model_on_mixed_elements(model):
    alg = model
    rng = random.Random(9)
    monos = w3.monomials(N, 7)
    keys = w3.a_basis(N)
    for _ in range(200):
        u = w3.WreathElement.make(
            {rng.choice(monos): rng.randint(1, 2)}, {rng.choice(keys): rng.randint(1, 2)}
        )
        v = w3.WreathElement.make(
            {rng.choice(monos): rng.randint(1, 2)}, {rng.choice(keys): rng.randint(1, 2)}
        )
        assert _to_model(alg, w3.bracket(u, v)) == left_normed(alg, [_to_model(alg, u), _to_model(alg, v)])


def test_normal_form_examples():
    assert w3.normal_form([1, 1, 1]).is_zero()
    assert w3.normal_form([2, 2]).is_zero()
    swapped = w3.normal_form([2, 1])
    assert swapped == w3.normal_form([1, 2]) + w3.normal_form([(2, 1)])


def test_swap_sign_by_jacobi_expansion(model):
    # [b,a2,a1] - [b,a1,a2] = [b,[a2,a1]] by the Jacobi identity; check in the model
    alg = model
    g = alg.generator
    lhs = left_normed(alg, [g("b"), g("a2"), g("a1")]) - left_normed(alg, [g("b"), g("a1"), g("a2")])
    assert lhs == left_normed(alg, [g("b"), left_normed(alg, [g("a2"), g("a1")])])
    assert w3.normal_form([2, 1]) - w3.normal_form([1, 2]) == w3.normal_form([(2, 1)])


def test_bracket_examples():
    c1 = w3.normal_form([2])
    c2 = w3.normal_form([3])
    assert w3.bracket(c1, c2).is_zero()
    assert w3.bracket(w3.c(2), w3.a(3)).is_zero()
    assert w3.bracket(w3.b(), w3.a(1)) == w3.normal_form([1])
    assert w3.c(1).is_zero()


def test_normal_form_is_idempotent_on_canonical_monomials():
    for mono in w3.monomials(5, 8):
        e, S, B = mono
        again = w3.normal_form([1] * e + list(S) + [(r, 1) for r in B])
        assert again.c_part == ((mono, 1),) and not again.a_part
        assert w3.is_canonical(mono)


def test_brackets_of_canonical_elements_stay_canonical():
    monos = w3.monomials(4, 7)
    for m in monos:
        for key in w3.a_basis(4):
            out = w3.bracket(w3.WreathElement.make({m: 1}), w3.WreathElement.make(a_part={key: 1}))
            assert all(w3.is_canonical(mm) for mm in out.monomials)


def test_arithmetic_is_mod_three():
    x = w3.normal_form([2])
    assert (x + x + x).is_zero()
    assert x.scale(4) == x


def test_verify_small_truncation_passes():
    rep = w3.verify_engel_cases(4, 5)
    assert rep.ok and rep.instances > 0


def test_verify_is_independent_of_worker_count():
    assert w3.verify_engel_cases(4, 5, workers=1) == w3.verify_engel_cases(4, 5, workers=2)


def test_witness_examples():
    w1 = w3.id_a1_nonnilpotence_witness(1, 6)
    assert w1 == w3.normal_form([(2, 1)])
    w5 = w3.id_a1_nonnilpotence_witness(5, 6)
    assert w5.monomials == [(0, (), (2, 3, 4, 5, 6))]
    with pytest.raises(ValueError):
        w3.id_a1_nonnilpotence_witness(5, 5)


def test_repeated_index_kills_the_witness_shape():
    assert w3.normal_form([(2, 1), (2, 1)]).is_zero()


def test_lcs_witness_is_a_product_of_ideal_elements():
    for k in range(1, 6):
        w = w3.lcs_witness(k, 6)
        assert w.monomials == [(1, (), tuple(range(2, k + 2)))]
