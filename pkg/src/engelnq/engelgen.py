"""5-Engel relations and the experiments built on them.

Notation: for a multiset ``Z = {z_1^k_1, ..., z_r^k_r}`` of five basis
elements, ``partial(y, Z)`` is the sum of ``[y, w_1, ..., w_5]`` over the
distinct arrangements ``w`` of ``Z``.  The full symmetric sum over all 120
orderings equals ``k_1! ... k_r! * partial(y, Z)``.  ``partial(y, {z^5})`` is
``[y, z, z, z, z, z]`` itself.

Modes (used both while building over GF(p) and for relation matrices):

``direct``
    ``partial(y, Z)`` for every Z.  These are the coefficients of the
    monomials in ``t`` of ``[y, (sum t_i z_i)^5]``, so they are exactly the
    instances of the identity on linear combinations of basis elements.
``multilinear``
    ``k_1! ... k_r! * partial(y, Z)``, the symmetric sum.
``power``
    ``[y, z^5]`` for basis elements z only.
``multilinear_plus_power``
    the union of the two previous sets.  For p >= 5 and over the rationals
    it spans the same rows as ``direct``.

While building, y runs over generators only.  Once the lower layers satisfy
the identity, the map ``y -> [y, z^5]`` is a derivation-like expression in y
and vanishes on products of generators as soon as it vanishes on generators.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations
from typing import Iterable, NamedTuple, Optional, Sequence

from .exactalg import GF, QQ, ZZ, SparseRow, is_prime, prime_support, smith_normal_form
from .freelie import MultiDegree, TruncationSpec, md_add, md_weight
from .nqcore import (
    EngelSpec,
    GradedLieAlgebra,
    IntegralityError,
    LayerContext,
    LieElement,
    NQError,
    OwnershipError,
    Presentation,
    _addmul,
    build,
    ideal_class,
    left_normed,
    max_a_entries,
)

__all__ = [
    "EngelMode",
    "ExperimentCase",
    "KNOWN_CASES",
    "EXPECTED_TABLE",
    "TABLE_CONFIGS",
    "RelationMatrix",
    "PrimeReport",
    "TableRow",
    "TableRun",
    "multilinear_engel",
    "partial_linearization",
    "layer_engel_rows",
    "relation_rows",
    "case_algebra",
    "exceptional_primes",
    "gfp_table_row",
    "gfp_table_run",
    "direct_engel_defects",
]


class EngelMode:
    DIRECT = "direct"
    MULTILINEAR = "multilinear"
    POWER = "power"
    MULTILINEAR_PLUS_POWER = "multilinear_plus_power"
    ALL = (DIRECT, MULTILINEAR, POWER, MULTILINEAR_PLUS_POWER)


@dataclass(frozen=True)
class ExperimentCase:
    target: MultiDegree
    expected_primes: frozenset

    def __post_init__(self):
        target = tuple(self.target)
        if len(target) < 2 or any(d > 1 for d in target[1:]) or target[0] < 1:
            raise ValueError(f"target must look like (d_x, 1, ..., 1), got {target}")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "expected_primes", frozenset(self.expected_primes))

    @property
    def m(self) -> int:
        return len(self.target) - 1

    @property
    def name(self) -> str:
        return ",".join(map(str, self.target))

    @classmethod
    def parse(cls, text: str) -> "ExperimentCase":
        target = tuple(int(t) for t in text.replace(" ", "").split(","))
        known = KNOWN_CASES.get(target)
        return known if known else cls(target, frozenset())


def _case(target, primes):
    return ExperimentCase(tuple(target), frozenset(primes))


# the seven published configurations and their exceptional-prime sets
KNOWN_CASES = {
    c.target: c
    for c in (
        _case((6, 1, 1), {2, 3, 5, 7}),
        _case((6, 1, 1, 1), {2, 3, 5, 7, 19}),
        _case((6, 1, 1, 1, 1), {2, 3, 5}),
        _case((5, 1, 1, 1, 1, 1), {2, 3, 5, 7, 31}),
        _case((4, 1, 1, 1, 1, 1, 1), {2, 3, 5}),
        _case((3, 1, 1, 1, 1, 1, 1), {2, 3, 5, 7}),
        _case((2, 1, 1, 1, 1, 1, 1), {2, 3}),
    )
}


class TableRow(NamedTuple):
    class_L: int
    class_Id_x: int
    max_a: int


# published rows: p -> (class of L, class of Id(x), max number of a entries)
EXPECTED_TABLE = {
    5: TableRow(13, 7, 7),
    7: TableRow(11, 6, 6),
    19: TableRow(9, 6, 5),
    31: TableRow(10, 5, 5),
}

# (m, cap_x): caps sit one above the expected Id(x) class and a-count
TABLE_CONFIGS = {5: (8, 8), 7: (7, 7), 19: (6, 7), 31: (6, 6)}


# ---------------------------------------------------------------------------
# evaluating Engel expressions


def multilinear_engel(A: GradedLieAlgebra, y: LieElement, xs: Sequence[LieElement]) -> LieElement:
    """Sum of ``[y, x_s1, ..., x_s5]`` over all 120 orderings."""
    if len(xs) != 5:
        raise ValueError("need exactly five elements")
    for e in (y, *xs):
        if not isinstance(e, LieElement) or e.algebra is not A:
            raise OwnershipError("element does not belong to this algebra")
    total = A.zero()
    for perm in permutations(range(5)):
        total = total + left_normed(A, [y] + [xs[i] for i in perm])
    return total


def _distinct_profile(Z: Sequence[int]):
    distinct = sorted(set(Z))
    return distinct, tuple(Z.count(z) for z in distinct)


def _partial_dp(y: dict, distinct: Sequence, kvec: tuple, step, memo: Optional[dict] = None) -> dict:
    """T(k) = sum_i step(T(k - e_i), distinct[i]), T(0) = y."""
    if memo is None:
        memo = {}
    if kvec in memo:
        return memo[kvec]
    if not any(kvec):
        return y
    out: dict = {}
    for i, ki in enumerate(kvec):
        if ki:
            sub = kvec[:i] + (ki - 1,) + kvec[i + 1 :]
            step(out, _partial_dp(y, distinct, sub, step, memo), distinct[i])
    memo[kvec] = out
    return out


def partial_linearization(A: GradedLieAlgebra, y: dict, Z: Sequence[int]) -> dict:
    """``partial(y, Z)`` in ``A``; y is a 0-based dict, Z a list of 0-based indices."""
    distinct, kvec = _distinct_profile(list(Z))
    p = A.p

    def step(out, vec, z):
        _addmul(out, A.bracket_dicts(vec, {z: 1}), 1, p)

    return _partial_dp(dict(y), distinct, kvec, step)


def _profile_factor(kvec: tuple) -> int:
    return math.prod(math.factorial(k) for k in kvec)


def _mode_coefficients(mode: str, kvec: tuple) -> list:
    """Multipliers of ``partial(y, Z)`` that ``mode`` contributes for profile ``kvec``."""
    power = len(kvec) == 1
    if mode == EngelMode.DIRECT:
        return [1]
    if mode == EngelMode.MULTILINEAR:
        return [_profile_factor(kvec)]
    if mode == EngelMode.POWER:
        return [1] if power else []
    if mode == EngelMode.MULTILINEAR_PLUS_POWER:
        return [_profile_factor(kvec)] + ([1] if power else [])
    raise ValueError(f"unknown Engel mode {mode!r}")


def _components(alg: GradedLieAlgebra, indices: Iterable[int]) -> list:
    """(multidegree, weight, indices) groups, sorted by multidegree."""
    groups: dict = {}
    for i in indices:
        groups.setdefault(alg.multidegrees[i], []).append(i)
    return [(md, md_weight(md), ix) for md, ix in sorted(groups.items())]


def _multisets(comps: Sequence[tuple], size: int, weight: int, md: MultiDegree, fits, start: int = 0):
    """Multisets of ``size`` basis elements with total ``weight``.

    Components are chosen first (each at most once, in order, with a
    multiplicity), then elements inside each; ``md`` accumulates and must
    pass ``fits``.
    """
    if size == 0:
        if weight == 0:
            yield ()
        return
    for ci in range(start, len(comps)):
        cmd, w, ix = comps[ci]
        nmd = md
        for t in range(1, size + 1):
            if t * w + (size - t) > weight:
                break
            nmd = md_add(nmd, cmd)
            if not fits(nmd):
                break
            for rest in _multisets(comps, size - t, weight - t * w, nmd, fits, ci + 1):
                for chosen in combinations_with_replacement(ix, t):
                    yield chosen + rest


def layer_engel_rows(ctx: LayerContext, spec: EngelSpec, by_weight: dict) -> int:
    """Add the Engel rows of weight ``ctx.c`` to the layer; returns the instance count."""
    alg = ctx.alg
    c = ctx.c
    p = ctx.p
    comps = _components(alg, (b for w in range(1, c - 4) for b in by_weight.get(w, ())))

    def step(out, vec, z):
        _addmul(out, alg.bracket_dicts(vec, {z: 1}), 1, p)

    count = 0
    for y in by_weight[1]:
        for Z in _multisets(comps, 5, c - 1, alg.multidegrees[y], ctx.fits):
            distinct, kvec = _distinct_profile(list(Z))
            coeffs = _mode_coefficients(spec.mode, kvec)
            if p:
                coeffs = [f % p for f in coeffs if f % p]
            if not coeffs:
                continue
            memo: dict = {}
            row: dict = {}
            for i, ki in enumerate(kvec):
                sub = kvec[:i] + (ki - 1,) + kvec[i + 1 :]
                _addmul(row, ctx.rho_vec(_partial_dp({y: 1}, distinct, sub, step, memo), distinct[i]), 1, p)
            count += 1
            if row:
                md = alg.multidegrees[y]
                for z in Z:
                    md = md_add(md, alg.multidegrees[z])
                for f in sorted(set(coeffs)):
                    ctx.add_row(md, row if f == 1 else {k: (f * v) % p if p else f * v for k, v in row.items()})
    return count


# ---------------------------------------------------------------------------
# relation matrices over the integers


@dataclass
class RelationMatrix:
    rows: list  # SparseRow over ZZ, canonically sorted
    columns: list  # 1-based basis indices of the target multidegree
    instances: int = 0
    zero_rows: int = 0

    @property
    def num_columns(self) -> int:
        return len(self.columns)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def _sequences_for(A: GradedLieAlgebra, target: MultiDegree):
    """(y, Z) with Z a multiset of five basis elements and total multidegree ``target``."""
    def fits(md):
        return all(a <= t for a, t in zip(md, target))

    inside = [i for i, md in enumerate(A.multidegrees) if fits(md)]
    comps = _components(A, inside)
    total = md_weight(target)
    for y in inside:
        rest = total - A.weights[y]
        if rest >= 5:
            for Z in _multisets(comps, 5, rest, A.multidegrees[y], fits):
                yield y, Z


def relation_rows(A: GradedLieAlgebra, target: MultiDegree, mode: str = EngelMode.MULTILINEAR) -> RelationMatrix:
    """Integer relation rows of the Engel identity at ``target``.

    One row per (basis element y, multiset Z of five basis elements) whose
    multidegrees add up to ``target``.  Coordinates are over the basis
    elements of multidegree ``target`` in basis order.
    """
    if A.ring != QQ:
        raise NQError("relation rows need an algebra over the rationals")
    A.assert_integral()
    target = tuple(target)
    columns = A.by_multidegree().get(target, [])
    colpos = {b: i for i, b in enumerate(columns)}
    rows = []
    instances = zeros = 0
    if columns:
        for y, Z in _sequences_for(A, target):
            distinct, kvec = _distinct_profile(list(Z))
            part = partial_linearization(A, {y: 1}, Z)
            for f in _mode_coefficients(mode, kvec):
                instances += 1
                vec = {colpos[k]: f * v for k, v in part.items()}
                if vec:
                    rows.append(SparseRow.from_dict(ZZ, vec))
                else:
                    zeros += 1
    rows.sort(key=lambda r: r.entries)
    return RelationMatrix(rows, [b + 1 for b in columns], instances, zeros)


def case_algebra(case: ExperimentCase) -> GradedLieAlgebra:
    """The rational algebra on x, a_1..a_m truncated at the case's target."""
    pres = Presentation.x_and_commuting(
        case.m, QQ, cap_x=case.target[0], cap_a=1, max_class=md_weight(case.target)
    )
    return build(pres)


class PrimeReport(NamedTuple):
    rank: int
    full_rank: bool
    primes: tuple
    columns: int
    rows: int
    instances: int
    zero_rows: int
    elementary_divisors: tuple
    expected_primes: tuple
    discrepancy: bool
    algebra_dimension: int
    seconds: float


def exceptional_primes(case: ExperimentCase, algebra: Optional[GradedLieAlgebra] = None) -> PrimeReport:
    """Rank, full-rank flag and prime support of the case's relation matrix.

    When the matrix has full rank, every product of the target multidegree
    vanishes in characteristic p for each prime p outside the support.
    """
    t0 = time.perf_counter()
    A = algebra if algebra is not None else case_algebra(case)
    mat = relation_rows(A, case.target)
    snf = smith_normal_form(mat.rows, mat.num_columns)
    primes = tuple(prime_support(snf))
    expected = tuple(sorted(case.expected_primes))
    return PrimeReport(
        rank=snf.rank,
        full_rank=snf.rank == mat.num_columns,
        primes=primes,
        columns=mat.num_columns,
        rows=len(mat.rows),
        instances=mat.instances,
        zero_rows=mat.zero_rows,
        elementary_divisors=tuple(d for d in snf.elementary_divisors if d != 1),
        expected_primes=expected,
        discrepancy=bool(expected) and not set(primes) <= set(expected),
        algebra_dimension=A.dimension,
        seconds=round(time.perf_counter() - t0, 3),
    )


# ---------------------------------------------------------------------------
# the GF(p) table


@dataclass
class TableRun:
    p: int
    m: int
    trunc: TruncationSpec
    mode: str
    row: TableRow
    dimension: int
    max_dx: int
    boundary_clear: bool
    algebra: GradedLieAlgebra = field(repr=False)
    seconds: float = 0.0

    @property
    def expected(self) -> Optional[TableRow]:
        return EXPECTED_TABLE.get(self.p)


def _check_table_prime(p: int) -> None:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p must be a prime, got {p!r}")
    if p <= 3:
        raise ValueError(
            f"p = {p} is not supported: in characteristic 3 (and 2) a 5-Engel Lie algebra "
            "need not be nilpotent, see engelnq.wreath3 for the counterexample"
        )


def gfp_table_run(p: int, m: Optional[int] = None, caps: Optional[TruncationSpec] = None, mode: Optional[str] = None) -> TableRun:
    _check_table_prime(p)
    default_m, default_cap = TABLE_CONFIGS.get(p, (6, 7))
    m = default_m if m is None else m
    trunc = caps if caps is not None else TruncationSpec(cap_x=default_cap, cap_a=1)
    if mode is None:
        mode = EngelMode.MULTILINEAR_PLUS_POWER if p == 5 else EngelMode.DIRECT
    t0 = time.perf_counter()
    pres = Presentation.x_and_commuting(
        m, GF(p), cap_x=trunc.cap_x, cap_a=trunc.cap_a, max_class=trunc.max_class, engel=EngelSpec(mode), caps=trunc.caps
    )
    A = build(pres)
    row = TableRow(A.lie_class, ideal_class(A, "x"), max_a_entries(A))
    max_dx = max((md[0] for md in A.multidegrees), default=0)
    cap_x = pres.trunc.cap_vector(m + 1)[0]
    # the truncation did not bite if nothing reaches the caps
    clear = (cap_x is None or max_dx < cap_x) and row.max_a < m
    return TableRun(p, m, pres.trunc, mode, row, A.dimension, max_dx, clear, A, round(time.perf_counter() - t0, 3))


def gfp_table_row(p: int, m: Optional[int] = None, caps: Optional[TruncationSpec] = None) -> TableRow:
    """(class of L, class of Id(x), max a-count) for the 5-Engel algebra over GF(p)."""
    return gfp_table_run(p, m, caps).row


def direct_engel_defects(A: GradedLieAlgebra, samples: int = 20, seed: int = 0) -> list:
    """Pairs (c, a) with ``[c, a, a, a, a, a] != 0``, for basis elements c and
    random combinations a of generators.  Empty means no defect was found."""
    import random

    if not A.p:
        raise NQError("defect sampling is meant for GF(p) algebras")
    rng = random.Random(seed)
    bad = []
    for _ in range(samples):
        a = {g: rng.randrange(A.p) for g in range(A.num_generators)}
        a = {g: v for g, v in a.items() if v}
        if not a:
            continue
        for c in range(A.dimension):
            vec = {c: 1}
            for _ in range(5):
                vec = A.bracket_dicts(vec, a)
                if not vec:
                    break
            if vec:
                bad.append((c, a))
    return bad
