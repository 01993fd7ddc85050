"""A non-nilpotent 5-Engel Lie algebra in characteristic 3.

Over GF(3) let A be generated by ``a_1, a_2, ...`` with ``[a_i, a_j] = 0``
for ``i, j > 1`` and ``[A, A]`` central; write ``c_r = [a_r, a_1]``.  Let C
be the free A-module on ``b`` (an abelian ideal), ``L = A + C``, I the ideal
generated by ``[b, a_1, a_1, a_1]`` and J the span of the monomials below in
which some index ``n > 1`` occurs twice.  ``M = L / (I + J)``.

C/(I+J) has the basis of monomials

    [b, a_1^e, a_{s_1}, ..., a_{s_k}, c_{r_1}, ..., c_{r_l}],   e <= 2,

with ``S = {s_i}`` and ``B = {r_j}`` disjoint sets of indices ``> 1``.  A
monomial is stored as the triple ``(e, S, B)`` with S, B sorted tuples.

Factors other than ``a_1`` commute past each other; moving ``a_1`` left past
``a_k`` produces the correction ``[X, a_k, a_1] = [X, a_1, a_k] + [X, c_k]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Optional, Sequence, Union

__all__ = [
    "P",
    "Monomial",
    "WreathElement",
    "b",
    "a",
    "c",
    "normal_form",
    "bracket",
    "left_normed",
    "monomials",
    "is_canonical",
    "a_basis",
    "EngelReport",
    "verify_engel_cases",
    "id_a1_nonnilpotence_witness",
    "lcs_witness",
    "render_monomial",
]

P = 3

Monomial = tuple  # (e, S, B)

# A-part keys: ("a", i) for a_i (i >= 1), ("c", r) for c_r = [a_r, a_1] (r >= 2)
AKey = tuple


def _clean(d: dict) -> tuple:
    return tuple(sorted((k, v % P) for k, v in d.items() if v % P))


@dataclass(frozen=True)
class WreathElement:
    """GF(3)-combination of C-monomials plus an A-part."""

    c_part: tuple = ()
    a_part: tuple = ()

    @classmethod
    def make(cls, c_part: Optional[dict] = None, a_part: Optional[dict] = None) -> "WreathElement":
        cp = {}
        for mono, v in (c_part or {}).items():
            if _reduce(mono) is not None:
                cp[_reduce(mono)] = cp.get(_reduce(mono), 0) + v
        ap = {}
        for key, v in (a_part or {}).items():
            if key[0] == "c" and key[1] == 1:
                continue
            ap[key] = ap.get(key, 0) + v
        return cls(_clean(cp), _clean(ap))

    def __add__(self, other: "WreathElement") -> "WreathElement":
        cp = dict(self.c_part)
        for k, v in other.c_part:
            cp[k] = cp.get(k, 0) + v
        ap = dict(self.a_part)
        for k, v in other.a_part:
            ap[k] = ap.get(k, 0) + v
        return WreathElement(_clean(cp), _clean(ap))

    def scale(self, s: int) -> "WreathElement":
        return WreathElement(
            _clean({k: s * v for k, v in self.c_part}), _clean({k: s * v for k, v in self.a_part})
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.c_part and not self.a_part

    def __bool__(self):
        return not self.is_zero()

    @property
    def monomials(self) -> list:
        return [m for m, _ in self.c_part]

    def __str__(self) -> str:
        terms = []
        for m, v in self.c_part:
            terms.append(("" if v == 1 else f"{v}*") + render_monomial(m))
        for (kind, i), v in self.a_part:
            name = f"a{i}" if kind == "a" else f"[a{i},a1]"
            terms.append(("" if v == 1 else f"{v}*") + name)
        return " + ".join(terms) if terms else "0"


def _reduce(mono: Monomial) -> Optional[Monomial]:
    """Canonical form of a monomial, or None if it lies in I + J."""
    e, S, B = mono
    if e >= 3:
        return None
    idx = list(S) + list(B)
    if any(i < 2 for i in idx) or len(set(idx)) != len(idx):
        return None
    return (e, tuple(sorted(S)), tuple(sorted(B)))


def is_canonical(mono: Monomial) -> bool:
    return _reduce(mono) == mono


def render_monomial(mono: Monomial) -> str:
    e, S, B = mono
    parts = ["b"] + ["a1"] * e + [f"a{i}" for i in S] + [f"[a{r},a1]" for r in B]
    return "[" + ",".join(parts) + "]"


def b() -> WreathElement:
    return WreathElement((((0, (), ()), 1),), ())


def a(i: int) -> WreathElement:
    if i < 1:
        raise ValueError("a-indices start at 1")
    return WreathElement((), ((("a", i), 1),))


def c(r: int) -> WreathElement:
    """``[a_r, a_1]``; zero for r = 1."""
    if r < 1:
        raise ValueError("a-indices start at 1")
    return WreathElement.make(a_part={("c", r): 1})


def _mono_times(mono: Monomial, key: AKey) -> dict:
    """``[monomial, A-basis element]`` as a dict of monomials."""
    e, S, B = mono
    kind, n = key
    if kind == "c":
        return {(e, S, B + (n,)): 1}
    if n > 1:
        return {(e, S + (n,), B): 1}
    out = {(e + 1, S, B): 1}
    for k in S:
        rest = tuple(s for s in S if s != k)
        out[(e, rest, B + (k,))] = out.get((e, rest, B + (k,)), 0) + 1
    return out


def _a_bracket(k1: AKey, k2: AKey) -> dict:
    """Bracket of two A-basis elements (A has class 2)."""
    (t1, i), (t2, j) = k1, k2
    if t1 == "c" or t2 == "c" or i == j:
        return {}
    if j == 1:
        return {("c", i): 1}
    if i == 1:
        return {("c", j): -1}
    return {}


def bracket(u: WreathElement, v: WreathElement) -> WreathElement:
    cp: dict = {}
    ap: dict = {}
    for m, x in u.c_part:
        for key, y in v.a_part:
            for mm, z in _mono_times(m, key).items():
                cp[mm] = cp.get(mm, 0) + x * y * z
    for key, x in u.a_part:
        for m, y in v.c_part:
            for mm, z in _mono_times(m, key).items():
                cp[mm] = cp.get(mm, 0) - x * y * z
        for key2, y in v.a_part:
            for kk, z in _a_bracket(key, key2).items():
                ap[kk] = ap.get(kk, 0) + x * y * z
    return WreathElement.make(cp, ap)


def left_normed(factors: Sequence[WreathElement]) -> WreathElement:
    if not factors:
        raise ValueError("need at least one factor")
    acc = factors[0]
    for f in factors[1:]:
        acc = bracket(acc, f)
    return acc


Factor = Union[int, tuple]


def _factor(f: Factor) -> WreathElement:
    if isinstance(f, int):
        return a(f)
    if isinstance(f, tuple) and len(f) == 2:
        i, j = f
        return bracket(a(i), a(j))
    raise ValueError(f"bad factor {f!r}: use i for a_i or (i, j) for [a_i, a_j]")


def normal_form(factors: Iterable[Factor]) -> WreathElement:
    """``[b, f_1, f_2, ...]`` in canonical form.

    A factor ``i`` means ``a_i`` and a pair ``(i, j)`` means ``[a_i, a_j]``.
    """
    acc = b()
    for f in factors:
        acc = bracket(acc, _factor(f))
    return acc


def a_basis(max_index: int) -> list:
    """``a_1..a_N, c_2..c_N`` as A-part keys."""
    return [("a", i) for i in range(1, max_index + 1)] + [("c", r) for r in range(2, max_index + 1)]


def _weight(mono: Monomial) -> int:
    e, S, B = mono
    return 1 + e + len(S) + 2 * len(B)


def monomials(max_index: int, weight_cap: int) -> list:
    """Canonical monomials with indices up to ``max_index`` and weight at most ``weight_cap``."""
    idx = list(range(2, max_index + 1))
    out = []
    for e in range(3):
        for ns in range(len(idx) + 1):
            for S in combinations(idx, ns):
                rest = [i for i in idx if i not in S]
                for nb in range(len(rest) + 1):
                    for B in combinations(rest, nb):
                        m = (e, S, B)
                        if _weight(m) <= weight_cap:
                            out.append(m)
    out.sort(key=lambda m: (_weight(m), m))
    return out


@dataclass
class EngelReport:
    monomials: int
    case1: int
    case2: int
    case3: int
    failures: list

    @property
    def instances(self) -> int:
        return self.case1 + self.case2 + self.case3

    @property
    def ok(self) -> bool:
        return not self.failures


def _elem(key: AKey) -> WreathElement:
    return WreathElement((), ((key, 1),))


def _check_monomials(monos: Sequence[Monomial], max_index: int) -> tuple:
    basis = [_elem(k) for k in a_basis(max_index)]
    n = len(basis)
    failures = []
    n1 = n2 = n3 = 0
    for m in monos:
        cm = WreathElement(((m, 1),), ())
        cx = [bracket(cm, x) for x in basis]
        cxy = [[bracket(cx[i], basis[j]) for j in range(n)] for i in range(n)]
        for i, x in enumerate(basis):
            r = bracket(cxy[i][i], x)
            n1 += 1
            if r:
                failures.append(("case1", m, (i,), str(r)))
        for i, j in permutations(range(n), 2):
            x, y = basis[i], basis[j]
            r = bracket(cxy[i][i], y) + bracket(cxy[i][j], x) + bracket(cxy[j][i], x)
            n2 += 1
            if r:
                failures.append(("case2", m, (i, j), str(r)))
        for i, j, k in combinations(range(n), 3):
            r = WreathElement()
            for s, t, u in permutations((i, j, k)):
                r = r + bracket(cxy[s][t], basis[u])
            n3 += 1
            if r:
                failures.append(("case3", m, (i, j, k), str(r)))
    return n1, n2, n3, failures


def verify_engel_cases(max_index: int, weight_cap: int, workers: int = 1) -> EngelReport:
    """Evaluate the three Engel case expressions on every monomial c.

    x, y, z run over ``a_1..a_N`` and ``c_2..c_N``; case (2) takes ordered
    pairs and case (3) unordered triples, the expression being symmetric.
    Since ``[M, M, M]`` lies in C/(I+J), multilinearity carries a clean pass
    to the 5-Engel identity on the truncation.  ``workers > 1`` spreads the
    monomials over processes; the report does not depend on it.
    """
    if max_index < 3:
        raise ValueError("max_index must be at least 3")
    monos = monomials(max_index, weight_cap)
    chunks = [monos[i::workers] for i in range(workers)] if workers > 1 else [monos]
    if len(chunks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_check_monomials, chunks, [max_index] * len(chunks)))
    else:
        parts = [_check_monomials(monos, max_index)]
    failures = sorted((f for part in parts for f in part[3]), key=lambda f: (_weight(f[1]), f[1], f[0], f[2]))
    return EngelReport(
        len(monos), sum(p[0] for p in parts), sum(p[1] for p in parts), sum(p[2] for p in parts), failures
    )


def id_a1_nonnilpotence_witness(k: int, max_index: int) -> WreathElement:
    """``[b, c_2, ..., c_{k+1}]``: b followed by k factors from Id(a_1)."""
    if k < 1:
        raise ValueError("k must be positive")
    if max_index < k + 1:
        raise ValueError(f"max_index must be at least k + 1 = {k + 1}")
    w = normal_form([(r, 1) for r in range(2, k + 2)])
    mono = (0, (), tuple(range(2, k + 2)))
    assert w.c_part == ((mono, 1),) and not w.a_part, w
    return w


def lcs_witness(k: int, max_index: int) -> WreathElement:
    """``[[b, a_1], c_2, ..., c_{k+1}]``, a product of k + 1 elements of
    Id(a_1).  Being nonzero it lies in the (k+1)-th lower central term, so
    Id(a_1) has class greater than k."""
    if k < 1:
        raise ValueError("k must be positive")
    if max_index < k + 1:
        raise ValueError(f"max_index must be at least k + 1 = {k + 1}")
    w = normal_form([1] + [(r, 1) for r in range(2, k + 2)])
    mono = (1, (), tuple(range(2, k + 2)))
    assert w.c_part == ((mono, 1),) and not w.a_part, w
    return w
