"""Exact coefficient rings and the linear algebra built on them.

Three ring modes are supported:

* ``QQ`` -- arbitrary precision rationals.  Scalars are ``int`` or
  ``fractions.Fraction``; a Fraction whose denominator is 1 is normalised to
  a plain ``int`` so that integral data stays cheap.
* ``GF(p)`` -- prime fields, scalars are ints in ``[0, p)``.
* ``ZZ`` -- arbitrary precision integers (Smith normal form only).

Sparse rows are stored as ``{column: coefficient}`` dicts internally and as
:class:`SparseRow` values at the public boundary.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "RingError",
    "ModeError",
    "UnsupportedRingError",
    "Ring",
    "Rationals",
    "Integers",
    "PrimeField",
    "QQ",
    "ZZ",
    "GF",
    "SparseRow",
    "SNFResult",
    "echelonize",
    "smith_normal_form",
    "prime_support",
    "rank_mod_p",
    "integer_rank",
    "is_prime",
    "is_smith_chain",
]


class RingError(ValueError):
    """Base class for coefficient-ring misuse."""


class ModeError(RingError):
    """Rows or scalars from different ring modes were combined."""


class UnsupportedRingError(RingError):
    """The operation is not defined over the requested ring."""


# ---------------------------------------------------------------------------
# primality

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool:
    """Primality test, deterministic for ``n < 3.3e24``.

    Larger inputs fall back to BPSW from sympy, which has no known
    counterexample.
    """
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    if n >= _MR_DETERMINISTIC_LIMIT:
        from sympy import isprime

        return bool(isprime(n))
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prime_stream(start: int = (1 << 30) - 35):
    """Descending primes below ``start`` (the default keeps products in 60 bits)."""
    n = start
    while n > 2:
        if is_prime(n):
            yield n
        n -= 2


# ---------------------------------------------------------------------------
# rings


class Ring:
    """A coefficient ring.  Scalars are plain Python numbers."""

    name = "ring"
    is_field = False
    characteristic = 0

    def convert(self, value):
        raise NotImplementedError

    def is_zero(self, value) -> bool:
        return value == 0

    def __repr__(self) -> str:
        return self.name

    # rings are compared by mode, so GF(5) built twice compares equal
    def __eq__(self, other) -> bool:
        return isinstance(other, Ring) and self.name == other.name

    def __hash__(self) -> int:
        return hash(self.name)


class Rationals(Ring):
    name = "QQ"
    is_field = True

    def convert(self, value):
        if isinstance(value, bool):
            raise ModeError("booleans are not rational scalars")
        if isinstance(value, int):
            return value
        if isinstance(value, Fraction):
            return value.numerator if value.denominator == 1 else value
        if isinstance(value, str):
            return self.convert(Fraction(value))
        raise ModeError(f"cannot interpret {value!r} as a rational")

    def inv(self, value):
        if value == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.convert(Fraction(1) / value)


class Integers(Ring):
    name = "ZZ"

    def convert(self, value):
        if isinstance(value, bool):
            raise ModeError("booleans are not integer scalars")
        if isinstance(value, int):
            return value
        if isinstance(value, Fraction) and value.denominator == 1:
            return value.numerator
        if isinstance(value, str):
            return int(value)
        raise ModeError(f"cannot interpret {value!r} as an integer")


class PrimeField(Ring):
    is_field = True

    def __init__(self, p: int):
        if not isinstance(p, int) or not is_prime(p):
            raise RingError(f"GF(p) needs a prime p, got {p!r}")
        self.p = p
        self.characteristic = p
        self.name = f"GF({p})"

    def convert(self, value):
        if isinstance(value, bool):
            raise ModeError("booleans are not field elements")
        if isinstance(value, int):
            return value % self.p
        if isinstance(value, Fraction):
            return value.numerator * pow(value.denominator, -1, self.p) % self.p
        if isinstance(value, str):
            return self.convert(Fraction(value))
        raise ModeError(f"cannot interpret {value!r} in {self.name}")

    def inv(self, value):
        if value % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(value, -1, self.p)


QQ = Rationals()
ZZ = Integers()


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


# ---------------------------------------------------------------------------
# sparse rows


@dataclass(frozen=True)
class SparseRow:
    """An immutable sparse vector: strictly increasing columns, no zeros."""

    ring: Ring
    entries: tuple

    def __post_init__(self):
        last = -1
        clean = []
        for col, val in self.entries:
            if not isinstance(col, int) or col <= last:
                raise ValueError("columns must be strictly increasing non-negative ints")
            last = col
            val = self.ring.convert(val)
            if val == 0:
                raise ValueError(f"stored zero at column {col}")
            clean.append((col, val))
        object.__setattr__(self, "entries", tuple(clean))

    @classmethod
    def from_dict(cls, ring: Ring, data: dict) -> "SparseRow":
        items = sorted((c, ring.convert(v)) for c, v in data.items())
        return cls(ring, tuple((c, v) for c, v in items if v != 0))

    @classmethod
    def from_dense(cls, ring: Ring, values: Iterable) -> "SparseRow":
        return cls.from_dict(ring, dict(enumerate(values)))

    def to_dict(self) -> dict:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def columns(self) -> tuple:
        return tuple(c for c, _ in self.entries)

    def dense(self, width: int) -> list:
        out = [0] * width
        for c, v in self.entries:
            out[c] = v
        return out


def _common_ring(rows: Sequence[SparseRow]) -> Ring:
    rings = {r.ring for r in rows}
    if len(rings) != 1:
        raise ModeError(f"rows mix ring modes: {sorted(map(str, rings))}")
    return rings.pop()


# ---------------------------------------------------------------------------
# elimination over GF(p)


def _reduce_modp(row: dict, piv: dict, p: int) -> dict:
    """Reduce ``row`` in place against semi-echelon pivots (leading 1)."""
    while row:
        c = min(row)
        prow = piv.get(c)
        if prow is None:
            return row
        f = row[c]
        for k, v in prow.items():
            nv = (row.get(k, 0) - f * v) % p
            if nv:
                row[k] = nv
            else:
                row.pop(k, None)
    return row


def _semi_echelon_modp(rows: Iterable[dict], p: int, piv: dict | None = None, used: list | None = None) -> dict:
    """Insert rows into a semi-echelon basis ``{pivot_col: row}``.

    When ``used`` is given, the position of every row that contributed a new
    pivot is appended to it.
    """
    if piv is None:
        piv = {}
    for pos, r in enumerate(rows):
        row = {k: v % p for k, v in r.items() if v % p}
        row = _reduce_modp(row, piv, p)
        if row:
            c = min(row)
            f = pow(row[c], -1, p)
            piv[c] = {k: v * f % p for k, v in row.items()}
            if used is not None:
                used.append(pos)
    return piv


def _back_substitute_modp(piv: dict, p: int) -> dict:
    """Turn a semi-echelon basis into reduced row-echelon form, in place."""
    for c in sorted(piv, reverse=True):
        row = piv[c]
        for k in sorted(k for k in row if k != c and k in piv):
            f = row.get(k)
            if not f:
                continue
            for kk, vv in piv[k].items():
                nv = (row.get(kk, 0) - f * vv) % p
                if nv:
                    row[kk] = nv
                else:
                    row.pop(kk, None)
    return piv


def rref_modp(rows: Iterable[dict], p: int) -> dict:
    """Reduced row-echelon basis ``{pivot_col: row}`` of dict rows over GF(p)."""
    return _back_substitute_modp(_semi_echelon_modp(rows, p), p)


_DENSE_LIMIT = 1 << 25


def rank_mod_p(rows: Iterable[dict], p: int) -> int:
    rows = list(rows)
    ncols = 1 + max((k for r in rows for k in r), default=-1)
    if p < (1 << 31) and 0 < len(rows) * ncols <= _DENSE_LIMIT:
        mat = np.zeros((len(rows), ncols), dtype=np.int64)
        for i, r in enumerate(rows):
            for k, v in r.items():
                if type(v) is not int:
                    v = v.numerator * pow(v.denominator, -1, p)
                mat[i, k] = v % p
        return _rank_dense_mod_p(mat, p)
    return len(_semi_echelon_modp(rows, p))


def _rank_dense_mod_p(a: "np.ndarray", p: int) -> int:
    """Rank of a reduced int64 matrix modulo a prime p < 2^31 (destroys a)."""
    rank = 0
    nrows = a.shape[0]
    for c in range(a.shape[1]):
        if rank == nrows:
            break
        nz = np.flatnonzero(a[rank:, c])
        if nz.size == 0:
            continue
        i = rank + int(nz[0])
        if i != rank:
            a[[rank, i]] = a[[i, rank]]
        inv = pow(int(a[rank, c]), -1, p)
        piv = a[rank, c:] * inv % p
        col = a[rank + 1 :, c]
        hit = np.flatnonzero(col)
        if 2 * hit.size > col.size:
            sub = a[rank + 1 :, c:]
            sub -= np.outer(col, piv) % p
            sub %= p
        elif hit.size:
            hit += rank + 1
            f = a[hit, c]
            a[hit, c:] = (a[hit, c:] - np.outer(f, piv) % p) % p
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# elimination over QQ: multimodular with exact certification


def _rational_reconstruct(a: int, m: int):
    """Return n/d with n = a*d (mod m), |n|, d <= sqrt(m/2), or None."""
    a %= m
    if a == 0:
        return 0
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound or math.gcd(r1, abs(t1)) != 1:
        return None
    if t1 < 0:
        r1, t1 = -r1, -t1
    return r1 if t1 == 1 else Fraction(r1, t1)


def _integral_rows(rows: Iterable[dict]) -> list:
    """Scale rational rows to primitive integer rows with the same span."""
    out = []
    for r in rows:
        den = 1
        for v in r.values():
            if isinstance(v, Fraction):
                den = den * v.denominator // math.gcd(den, v.denominator)
        row = {k: int(v * den) for k, v in r.items() if v != 0}
        if row:
            out.append(row)
    return out


def rref_rational(rows: Iterable[dict]) -> dict:
    """Exact reduced row-echelon basis over QQ as ``{pivot_col: row}``.

    The echelon form is computed modulo word-sized primes, lifted by CRT and
    rational reconstruction, and accepted only after checking exactly that
    every input row lies in the span of the lifted basis.  Since the rank over
    QQ is at least the rank modulo any prime, that check pins the row space.
    """
    rows = _integral_rows(rows)
    if not rows:
        return {}
    best_shape = None
    modulus = 1
    acc: dict = {}
    for p in _prime_stream():
        red = rref_modp(rows, p)
        shape = tuple(sorted(red))
        key = (len(shape), tuple(-c for c in shape))
        if best_shape is None or key > best_shape[0]:
            # a larger rank (or earlier pivots) means every previous prime was unlucky
            best_shape = (key, shape)
            modulus, acc = p, {c: dict(r) for c, r in red.items()}
        elif shape == best_shape[1]:
            acc = _crt_merge(acc, modulus, red, p)
            modulus *= p
        else:
            continue
        lifted = _lift(acc, modulus)
        if lifted is not None and _spans(lifted, rows):
            return lifted
    raise AssertionError("unreachable: prime stream exhausted")


def _crt_merge(acc: dict, m: int, red: dict, p: int) -> dict:
    inv_m = pow(m, -1, p)
    out = {}
    for c, row in acc.items():
        other = red[c]
        merged = {}
        for k in set(row) | set(other):
            a = row.get(k, 0)
            b = other.get(k, 0)
            merged[k] = a + m * ((b - a) * inv_m % p)
        out[c] = merged
    return out


def _lift(acc: dict, m: int) -> dict | None:
    out = {}
    for c, row in acc.items():
        lr = {}
        for k, v in row.items():
            q = _rational_reconstruct(v, m)
            if q is None:
                return None
            if q != 0:
                lr[k] = q
        out[c] = lr
    return out


def _spans(basis: dict, rows: list) -> bool:
    for r in rows:
        res = dict(r)
        for c, v in r.items():
            b = basis.get(c)
            if b is None:
                continue
            for k, w in b.items():
                nv = res.get(k, 0) - v * w
                if nv:
                    res[k] = nv
                else:
                    res.pop(k, None)
        # entries at pivot columns cancel exactly; anything left is a failure
        if res:
            return False
    return True


# ---------------------------------------------------------------------------
# public echelonize


def echelonize(rows: Sequence[SparseRow]) -> tuple[list, list]:
    """Reduced row-echelon basis of the row space, and its pivot columns."""
    rows = list(rows)
    if not rows:
        return [], []
    ring = _common_ring(rows)
    if not ring.is_field:
        raise UnsupportedRingError(f"echelonize needs a field, got {ring}")
    dict_rows = [r.to_dict() for r in rows]
    if isinstance(ring, PrimeField):
        piv = rref_modp(dict_rows, ring.p)
    else:
        piv = rref_rational(dict_rows)
    pivots = sorted(piv)
    return [SparseRow.from_dict(ring, piv[c]) for c in pivots], pivots


# ---------------------------------------------------------------------------
# integer lattices and Smith normal form


@dataclass(frozen=True)
class SNFResult:
    """Rank and elementary divisors (``d_1 | d_2 | ... | d_rank``)."""

    rank: int
    elementary_divisors: tuple

    def __post_init__(self):
        divs = tuple(int(d) for d in self.elementary_divisors)
        object.__setattr__(self, "elementary_divisors", divs)
        if len(divs) != self.rank:
            raise ValueError("need exactly one elementary divisor per unit of rank")
        if any(d < 1 for d in divs) or not is_smith_chain(divs):
            raise ValueError(f"not a divisor chain: {divs}")

    def to_report(self) -> dict:
        return {
            "rank": self.rank,
            "elementary_divisors": [str(d) for d in self.elementary_divisors],
        }


def is_smith_chain(divs: Sequence[int]) -> bool:
    return all(b % a == 0 for a, b in zip(divs, divs[1:]))


def _xgcd(a: int, b: int):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def _axpy(y: dict, a: int, x: dict, mod: int = 0) -> dict:
    """Return a new dict ``y + a*x`` (entries reduced mod ``mod`` when set)."""
    out = dict(y)
    for k, v in x.items():
        nv = out.get(k, 0) + a * v
        if mod:
            nv %= mod
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def _lincomb(a: int, x: dict, b: int, y: dict, mod: int = 0) -> dict:
    out = {}
    for k in x.keys() | y.keys():
        nv = a * x.get(k, 0) + b * y.get(k, 0)
        if mod:
            nv %= mod
        if nv:
            out[k] = nv
    return out


class _LatticeEchelon:
    """Triangular basis of ``L + D*Z^n`` for an integer row lattice L.

    The basis starts as ``D*e_1, ..., D*e_n`` and rows are merged in with
    extended-gcd steps, every entry reduced modulo ``D``.  When ``D*Z^n`` is
    already contained in L the result is a basis of L itself, and the
    product of its pivots is the index of L.
    """

    def __init__(self, ncols: int, modulus: int):
        if modulus < 1:
            raise ValueError("modulus must be positive")
        self.ncols = ncols
        self.modulus = modulus
        self.piv: dict = {c: {c: modulus} for c in range(ncols)}

    def insert(self, row: dict) -> None:
        mod = self.modulus
        row = {k: v % mod for k, v in row.items() if v % mod}
        while row:
            c = min(row)
            prow = self.piv[c]
            a, b = prow[c], row[c]
            if b % a == 0:
                row = _axpy(row, -(b // a), prow, mod)
                row.pop(c, None)
                continue
            g, s, t = _xgcd(a, b)
            new_p = _lincomb(s, prow, t, row, mod)
            new_p[c] = g
            row = _lincomb(b // g, prow, -(a // g), row, mod)
            row.pop(c, None)
            self.piv[c] = new_p

    def index(self) -> int:
        return math.prod(r[c] for c, r in self.piv.items())

    def rows(self) -> list:
        return [self.piv[c] for c in range(self.ncols)]


_UNIT_FILL_LIMIT = 20000
_UNIT_GROWTH_LIMIT = 64


def _unit_pivot_elimination(rows: list, ncols: int) -> tuple:
    """Eliminate +-1 pivots by unimodular operations.

    Each pivot removes one row and one column and contributes an elementary
    divisor 1.  Pivots are chosen greedily with a small Markowitz cost to
    limit fill-in.  Returns (number of unit divisors, remaining rows,
    remaining column count) with the remaining columns renumbered.
    """
    rows = [dict(r) for r in rows if r]
    alive = set(range(len(rows)))
    col_rows: dict = defaultdict(set)
    for i, r in enumerate(rows):
        for c in r:
            col_rows[c].add(i)
    removed_cols = set()
    units = 0
    progress = True
    while progress:
        progress = False
        for i in sorted(alive, key=lambda i: len(rows[i])):
            if i not in alive:
                continue
            r = rows[i]
            best = None
            for c, v in r.items():
                if v in (1, -1):
                    cost = len(col_rows[c])
                    if best is None or cost < best[0]:
                        best = (cost, c)
            if best is None:
                continue
            _, c = best
            # refuse pivots whose fill-in or entry growth is large
            if (len(col_rows[c]) - 1) * (len(r) - 1) > _UNIT_FILL_LIMIT:
                continue
            rmax = max(abs(v) for v in r.values())
            if rmax * max(abs(rows[j][c]) for j in col_rows[c]) > _UNIT_GROWTH_LIMIT:
                continue
            sign = r[c]
            for j in list(col_rows[c]):
                if j == i:
                    continue
                rj = rows[j]
                f = -rj[c] * sign
                for k, v in r.items():
                    nv = rj.get(k, 0) + f * v
                    if nv:
                        if k not in rj:
                            col_rows[k].add(j)
                        rj[k] = nv
                    else:
                        rj.pop(k, None)
                        col_rows[k].discard(j)
                if not rj:
                    alive.discard(j)
            for k in r:
                col_rows[k].discard(i)
            alive.discard(i)
            removed_cols.add(c)
            units += 1
            progress = True
    keep = [c for c in range(ncols) if c not in removed_cols]
    renum = {c: n for n, c in enumerate(keep)}
    core = []
    for i in sorted(alive):
        r = {renum[c]: v for c, v in rows[i].items()}
        if r:
            core.append(r)
    return units, core, len(keep)


def _det_mod_p(mat: "np.ndarray", p: int) -> int:
    """Determinant of a square int64 matrix modulo a prime p < 2^31."""
    a = mat % p
    n = a.shape[0]
    det = 1
    for k in range(n):
        nz = np.nonzero(a[k:, k])[0]
        if nz.size == 0:
            return 0
        i = k + int(nz[0])
        if i != k:
            a[[k, i]] = a[[i, k]]
            det = -det
        piv = int(a[k, k])
        det = det * piv % p
        if k + 1 < n:
            inv = pow(piv, -1, p)
            f = a[k + 1 :, k] * inv % p
            a[k + 1 :, k:] = (a[k + 1 :, k:] - (f[:, None] * a[k, k:][None, :]) % p) % p
    return det % p


def _abs_det(rows: list, n: int) -> int:
    """|det| of a square integer matrix by CRT under the Hadamard bound."""
    log2_bound = 0.0
    for r in rows:
        log2_bound += 0.5 * math.log2(max(1, sum(v * v for v in r.values())))
    if max((abs(v) for r in rows for v in r.values()), default=0) < (1 << 31) and n:
        mat = np.zeros((n, n), dtype=np.int64)
        for i, r in enumerate(rows):
            for k, v in r.items():
                mat[i, k] = v
        big = None
    else:
        mat, big = None, rows
    modulus, acc = 1, 0
    for p in _prime_stream((1 << 31) - 1):
        if big is None:
            d = _det_mod_p(mat, p)
        else:
            small = np.zeros((n, n), dtype=np.int64)
            for i, r in enumerate(big):
                for k, v in r.items():
                    small[i, k] = v % p
            d = _det_mod_p(small, p)
        acc = acc + modulus * ((d - acc) * pow(modulus, -1, p) % p)
        modulus *= p
        if math.log2(modulus) > log2_bound + 2:
            break
    if acc > modulus // 2:
        acc -= modulus
    return abs(acc)


_LU_PRIME_BOUND = 1 << 23  # p^2 * block < 2^53 keeps float64 products exact
_LU_BLOCK = 64


def _reduce_float(x: "np.ndarray", p: int, pinv: float) -> "np.ndarray":
    """In-place x mod p for float64 arrays holding integers of size below 2^53."""
    x -= np.floor(x * pinv) * p
    # the float quotient can be off by one either way
    x[x < 0] += p
    x[x >= p] -= p
    return x


def _lu_mod_p(a: "np.ndarray", p: int, block: int = _LU_BLOCK):
    """Blocked LU with row pivoting of an m x n (m >= n) matrix modulo p.

    ``a`` holds residues in [0, p).  Returns (pivot_rows, det) where
    pivot_rows are the original indices of n rows forming a submatrix that
    is invertible mod p and det is that submatrix's determinant mod p, or
    None if the rank mod p is below n.  All arithmetic is float64, exact
    because p < 2^23 keeps every intermediate below 2^53.
    """
    a = a.astype(np.float64)
    pinv = 1.0 / p
    m, n = a.shape
    perm = np.arange(m)
    det = 1
    for k0 in range(0, n, block):
        k1 = min(k0 + block, n)
        for j in range(k0, k1):
            nz = np.flatnonzero(a[j:, j])
            if nz.size == 0:
                return None
            i = j + int(nz[0])
            if i != j:
                a[[j, i]] = a[[i, j]]
                perm[[j, i]] = perm[[i, j]]
                det = -det
            piv = int(a[j, j])
            det = det * piv % p
            lcol = _reduce_float(a[j + 1 :, j] * float(pow(piv, -1, p)), p, pinv)
            a[j + 1 :, j] = lcol
            if j + 1 < k1:
                panel = a[j + 1 :, j + 1 : k1]
                panel -= np.outer(lcol, a[j, j + 1 : k1])
                _reduce_float(panel, p, pinv)
        if k1 < n:
            for j in range(k0, k1 - 1):
                strip = a[j + 1 : k1, k1:]
                strip -= np.outer(a[j + 1 : k1, j], a[j, k1:])
                _reduce_float(strip, p, pinv)
            trail = a[k1:, k1:]
            trail -= _reduce_float(a[k1:, k0:k1] @ a[k0:k1, k1:], p, pinv)
            trail[trail < 0] += p
    return perm[:n].tolist(), det % p


def _residues(rows: list, ncols: int, p: int) -> "np.ndarray":
    mat = np.zeros((len(rows), ncols), dtype=np.int64)
    for i, r in enumerate(rows):
        for k, v in r.items():
            mat[i, k] = v % p
    return mat


def _dense_int64(rows: list, ncols: int):
    """Dense int64 copy of the rows, or None if some entry does not fit."""
    mat = np.zeros((len(rows), ncols), dtype=np.int64)
    for i, r in enumerate(rows):
        for k, v in r.items():
            if not -(1 << 62) < v < (1 << 62):
                return None
            mat[i, k] = v
    return mat


def _square_subset(rows: list, n: int, rng: random.Random, bits: list) -> list:
    """Indices of n rows whose square matrix is nonsingular; [] if none found.

    Rows are tried roughly in order of increasing norm (``bits`` holds log2
    of each row norm), with jitter so that repeated calls differ.  Short rows
    keep the Hadamard bound, and so the number of CRT primes, down.
    """
    order = sorted(range(len(rows)), key=lambda i: bits[i] + 4 * rng.random())
    for _ in range(2):
        p = _random_lu_prime(rng)
        res = _lu_mod_p(_residues([rows[i] for i in order], n, p), p)
        if res is not None:
            return sorted(order[i] for i in res[0])
        rng.shuffle(order)
    return []


def _random_lu_prime(rng: random.Random) -> int:
    while True:
        q = rng.randrange(_LU_PRIME_BOUND // 2 + 1, _LU_PRIME_BOUND, 2)
        if is_prime(q):
            return q


def _row_bits(r: dict) -> float:
    return 0.5 * math.log2(max(1, sum(v * v for v in r.values())))


def _abs_dets(subsets: list, n: int) -> list:
    """Exact |det| of several square integer matrices, one CRT pass for all."""
    target = max(sum(_row_bits(r) for r in sub) for sub in subsets) + 2
    dense = [_dense_int64(sub, n) for sub in subsets]
    accs = [0] * len(subsets)
    modulus = 1
    for p in _prime_stream(_LU_PRIME_BOUND - 1):
        inv = pow(modulus, -1, p)
        for t, sub in enumerate(subsets):
            res = _lu_mod_p(_residues(sub, n, p) if dense[t] is None else dense[t] % p, p)
            d = 0 if res is None else res[1]
            accs[t] += modulus * ((d - accs[t]) * inv % p)
        modulus *= p
        if math.log2(modulus) > target:
            break
    return [abs(a - modulus if a > modulus // 2 else a) for a in accs]


_LARGE_CORE = 96


def _index_multiple(core: list, ncore: int, rng: random.Random, tries: int = 4):
    """A factored positive multiple of the lattice index [Z^n : L(core)].

    The index divides the determinant of every n x n row subset, so the gcd
    of a few such determinants is a multiple of it; random subsets make the
    gcd small enough to factor.  Returns None if the core is not of full
    rank n.
    """
    g = 0
    bits = [_row_bits(r) for r in core]
    for t in range(tries):
        subsets = []
        for _ in range(2 if t == 0 else 1):
            chosen = _square_subset(core, ncore, rng, bits)
            if not chosen:
                return None
            subsets.append([core[i] for i in chosen])
        for d in _abs_dets(subsets, ncore):
            g = math.gcd(g, d)
        small, cofactor = _trial_divide(g)
        if cofactor == 1 or is_prime(cofactor):
            if cofactor > 1:
                small[cofactor] = small.get(cofactor, 0) + 1
            return small
    return _factor_small(g)


def _trial_divide(n: int, limit: int = 1_000_000) -> tuple:
    out: dict = {}
    d = 2
    while d * d <= n and d <= limit:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    return out, n


def _independent_rows(rows: list, n: int) -> list:
    """Positions of n rows independent modulo a large prime, or [] if none."""
    used: list = []
    p = (1 << 31) - 1
    _semi_echelon_modp(rows, p, used=used)
    return used if len(used) == n else []


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _local_divisor_valuations(rows: list, ncols: int, p: int, e: int) -> list:
    """p-adic valuations of the Smith diagonal, computed over Z/p^e.

    Entries that vanish mod p^e are reported as valuation ``e``; callers pick
    ``e`` larger than any valuation that can occur.
    """
    q = p**e
    if q >= (1 << 31):
        return _local_divisor_valuations_py(rows, ncols, p, e)
    mat = np.zeros((len(rows), ncols), dtype=np.int64)
    for i, r in enumerate(rows):
        for k, v in r.items():
            mat[i, k] = v % q
    vals = []
    nr = len(rows)
    for step in range(min(nr, ncols)):
        sub = mat[step:, step:]
        units = np.flatnonzero(sub % p)
        if units.size:
            i, j = divmod(int(units[0]), sub.shape[1])
            v = 0
        elif not sub.any():
            break
        else:
            i, j, v = _min_valuation_entry(sub, p, e)
        if v >= e:
            break
        i += step
        j += step
        mat[[step, i]] = mat[[i, step]]
        mat[:, [step, j]] = mat[:, [j, step]]
        piv = int(mat[step, step])
        inv = pow(piv // p**v, -1, q)
        # eliminate below: row_k -= (a_k / p^v) * inv * row_step
        col = mat[step + 1 :, step]
        hit = np.flatnonzero(col)
        if hit.size:
            hit += step + 1
            factors = (mat[hit, step] // p**v) % q * inv % q
            mat[hit, step:] = (mat[hit, step:] - np.outer(factors, mat[step, step:]) % q) % q
        # eliminate to the right by column operations (only row `step` is affected)
        mat[step, step + 1 :] = 0
        vals.append(v)
    return vals


def _min_valuation_entry(sub: "np.ndarray", p: int, e: int) -> tuple:
    """Position and p-adic valuation (capped at e) of an entry of least valuation."""
    val = np.full(sub.shape, e, dtype=np.int64)
    work = sub.copy()
    nz = work != 0
    val[nz] = 0
    while nz.any():
        nz &= work % p == 0
        work[nz] //= p
        val[nz] += 1
    i, j = np.unravel_index(int(np.argmin(val)), val.shape)
    return int(i), int(j), int(val[i, j])


def _local_divisor_valuations_py(rows: list, ncols: int, p: int, e: int) -> list:
    q = p**e
    mat = [[0] * ncols for _ in rows]
    for i, r in enumerate(rows):
        for k, v in r.items():
            mat[i][k] = v % q
    vals = []
    nr = len(mat)
    for step in range(min(nr, ncols)):
        best = None
        for i in range(step, nr):
            for j in range(step, ncols):
                x = mat[i][j]
                if x:
                    v = _valuation(x, p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None or best[0] >= e:
            break
        v, i, j = best
        mat[step], mat[i] = mat[i], mat[step]
        for r in mat:
            r[step], r[j] = r[j], r[step]
        piv = mat[step][step]
        inv = pow(piv // p**v, -1, q)
        prow = mat[step]
        for i in range(step + 1, nr):
            a = mat[i][step]
            if a:
                f = (a // p**v) * inv % q
                ri = mat[i]
                for j in range(step, ncols):
                    if prow[j]:
                        ri[j] = (ri[j] - f * prow[j]) % q
        vals.append(v)
    return vals


def _pivot_columns_mod_p(a: "np.ndarray", p: int) -> list:
    """Pivot columns of a float64 residue matrix mod p (destroys a)."""
    pinv = 1.0 / p
    cols: list = []
    rank = 0
    for c in range(a.shape[1]):
        if rank == a.shape[0]:
            break
        nz = np.flatnonzero(a[rank:, c])
        if nz.size == 0:
            continue
        i = rank + int(nz[0])
        if i != rank:
            a[[rank, i]] = a[[i, rank]]
        piv = _reduce_float(a[rank, c:] * float(pow(int(a[rank, c]), -1, p)), p, pinv)
        hit = np.flatnonzero(a[rank + 1 :, c]) + rank + 1
        if hit.size:
            a[hit, c:] = _reduce_float(a[hit, c:] - np.outer(a[hit, c], piv), p, pinv)
        cols.append(c)
        rank += 1
    return cols


def _inverse_mod_p(a: "np.ndarray", p: int) -> "np.ndarray":
    """Inverse of a square float64 residue matrix mod p by Gauss-Jordan."""
    n = a.shape[0]
    pinv = 1.0 / p
    w = np.concatenate([a, np.eye(n)], axis=1)
    for c in range(n):
        nz = np.flatnonzero(w[c:, c])
        if nz.size == 0:
            raise ArithmeticError("matrix is singular mod p")
        i = c + int(nz[0])
        if i != c:
            w[[c, i]] = w[[i, c]]
        w[c] = _reduce_float(w[c] * float(pow(int(w[c, c]), -1, p)), p, pinv)
        col = w[:, c].copy()
        col[c] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            w[hit] = _reduce_float(w[hit] - np.outer(col[hit], w[c]), p, pinv)
    return w[:, n:]


def _local_valuations_schur(rows: list, ncols: int, p: int, e: int, rng: random.Random):
    """Same contract as _local_divisor_valuations, for tall dense cores.

    Choose an r x r block A11 that is invertible mod p, hence over Z_(p).
    The local Smith form is then I_r plus that of the Schur complement
    S = A22 - A21 A11^-1 A12, which has only ncols - r columns.  A11^-1 A12
    is lifted p-adically one digit at a time (Dixon), so no big-integer
    elimination is done on the full matrix.  Returns None when entries are
    too large for exact float64 products.
    """
    dense = _dense_int64(rows, ncols)
    if dense is None or not dense.size:
        return None
    bound = int(np.abs(dense).max())
    B = bound * p * ncols
    if B >= (1 << 50) or p * p * ncols >= (1 << 50):
        return None
    m = len(rows)
    pinv = 1.0 / p
    res = (dense % p).astype(np.float64)
    # columns independent in a random compression are independent in the core
    gen = np.random.default_rng(rng.getrandbits(64))
    comp = _reduce_float(gen.integers(0, p, size=(ncols + 8, m)).astype(np.float64) @ res, p, pinv)
    piv_cols = _pivot_columns_mod_p(comp, p)
    lu = _lu_mod_p(res[:, piv_cols], p)
    if lu is None:
        raise ArithmeticError("pivot columns are dependent mod p")
    piv_rows = lu[0]
    r = len(piv_cols)
    free = sorted(set(range(ncols)) - set(piv_cols))
    if not free:
        return [0] * ncols
    others = sorted(set(range(m)) - set(piv_rows))
    A = dense.astype(np.float64)
    A11 = A[np.ix_(piv_rows, piv_cols)]
    A21 = A[np.ix_(others, piv_cols)]
    R = A[np.ix_(piv_rows, free)]
    C = _inverse_mod_p(A11 % p, p)
    # valuations below e' are exact modulo p^e', so try a precision that
    # fits the int64 routine first
    small = e
    while p**small >= (1 << 31):
        small -= 1
    chunk = max(1, int((61 - math.log2(2 * B)) / math.log2(p)))
    total = np.zeros((len(others), len(free)), dtype=object)
    acc = np.zeros((len(others), len(free)), dtype=np.int64)
    done = 0

    def lift_to(prec):
        # A21 A11^-1 A12 modulo p^prec, one p-adic digit of A11^-1 A12 per step
        nonlocal R, total, done
        for i in range(done, prec):
            X = _reduce_float(C @ _reduce_float(R.copy(), p, pinv), p, pinv)
            R = (R - A11 @ X) / p
            acc[:] += (A21 @ X).astype(np.int64) * p ** (i % chunk)
            if i % chunk == chunk - 1 or i == prec - 1:
                total = total + acc.astype(object) * p ** (i - i % chunk)
                acc[:] = 0
        done = prec

    for prec in sorted({small, e}):
        if prec < 1:
            continue
        lift_to(prec)
        S = (dense[np.ix_(others, free)].astype(object) - total) % p**prec
        schur = [{k: int(v) for k, v in enumerate(row) if v} for row in S]
        vals = _local_divisor_valuations(schur, len(free), p, prec)
        if len(vals) == len(free) or prec == e:
            return [0] * r + vals
    return None


def _factor_small(n: int) -> dict:
    """Factor ``n`` by trial division to 1e6, then test/split the cofactor."""
    out: dict = {}
    n = abs(n)
    d = 2
    while d * d <= n and d <= 1_000_000:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        if is_prime(n):
            out[n] = out.get(n, 0) + 1
        else:
            from sympy import factorint

            for q, k in factorint(n).items():
                out[int(q)] = out.get(int(q), 0) + int(k)
    return out


def _snf_small_dense(rows: list, ncols: int) -> list:
    """Smith diagonal of a small integer matrix by minimal-entry pivoting."""
    mat = [[r.get(j, 0) for j in range(ncols)] for r in rows]
    nr = len(mat)
    diag = []
    t = 0
    while t < min(nr, ncols):
        entries = [(abs(mat[i][j]), i, j) for i in range(t, nr) for j in range(t, ncols) if mat[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        mat[t], mat[i] = mat[i], mat[t]
        for r in mat:
            r[t], r[j] = r[j], r[t]
        done = False
        while not done:
            done = True
            piv = mat[t][t]
            for i in range(t + 1, nr):
                q = mat[i][t] // piv
                if q:
                    mat[i] = [a - q * b for a, b in zip(mat[i], mat[t])]
            for j in range(t + 1, ncols):
                q = mat[t][j] // piv
                if q:
                    for r in mat:
                        r[j] -= q * r[t]
            rem = [(abs(mat[i][t]), i, t) for i in range(t + 1, nr) if mat[i][t]]
            rem += [(abs(mat[t][j]), t, j) for j in range(t + 1, ncols) if mat[t][j]]
            if rem:
                _, i, j = min(rem)
                if i != t:
                    mat[t], mat[i] = mat[i], mat[t]
                else:
                    for r in mat:
                        r[t], r[j] = r[j], r[t]
                done = False
                continue
            # enforce divisibility of the remaining block by the pivot
            for i in range(t + 1, nr):
                if any(mat[i][j] % piv for j in range(t + 1, ncols)):
                    mat[t] = [a + b for a, b in zip(mat[t], mat[i])]
                    done = False
                    break
        diag.append(abs(mat[t][t]))
        t += 1
    return diag


def smith_normal_form(rows: Sequence[SparseRow], num_columns: int) -> SNFResult:
    """Rank and elementary divisors of an integer matrix given by sparse rows."""
    rows = list(rows)
    if rows:
        ring = _common_ring(rows)
        if ring != ZZ:
            raise ModeError(f"Smith normal form needs integer rows, got {ring}")
    if num_columns < 0:
        raise ValueError("num_columns must be non-negative")
    return _snf_dict_rows([r.to_dict() for r in rows], num_columns)


def _snf_dict_rows(rows: list, ncols: int) -> SNFResult:
    for r in rows:
        if r and (max(r) >= ncols or min(r) < 0):
            raise ValueError("row entry outside 0..num_columns-1")
    units, core, ncore = _unit_pivot_elimination(rows, ncols)
    if not core:
        return SNFResult(units, (1,) * units)
    if ncore > _LARGE_CORE and len(core) >= ncore:
        factored = _index_multiple(core, ncore, random.Random(ncore))
        if factored is not None:
            # each valuation is at most v_p(index) <= v_p(multiple), so
            # working modulo p^(k+1) loses nothing
            divs = [1] * ncore
            rng = random.Random(ncore + 1)
            for p, k in sorted(factored.items()):
                vals = _local_valuations_schur(core, ncore, p, k + 1, rng)
                if vals is None:
                    vals = _local_divisor_valuations(core, ncore, p, k + 1)
                if len(vals) < ncore or sum(vals) > k:
                    raise ArithmeticError("local Smith form inconsistent with index bound")
                divs = [d * p**v for d, v in zip(divs, sorted(vals))]
            return SNFResult(units + ncore, (1,) * units + tuple(sorted(divs)))
    chosen = _independent_rows(core, ncore)
    if not chosen:
        # rank below the core width: no lattice index, use the dense reduction
        diag = sorted(d for d in _snf_small_dense(core, ncore) if d)
        return SNFResult(units + len(diag), (1,) * units + tuple(diag))
    # det of a full-rank square subset is a multiple of the index of the
    # core lattice, so D*Z^n lies in the lattice and we may work modulo D
    D = _abs_det([core[i] for i in chosen], ncore)
    lat = _LatticeEchelon(ncore, D)
    for i in chosen:
        lat.insert(core[i])
    chosen_set = set(chosen)
    for i, r in enumerate(core):
        if i not in chosen_set:
            lat.insert(r)
    basis = lat.rows()
    index = lat.index()
    divs = [1] * ncore
    for p, k in sorted(_factor_small(index).items()):
        vals = _local_divisor_valuations(basis, ncore, p, k + 1)
        vals = sorted(vals + [0] * (ncore - len(vals)))
        divs = [d * p**v for d, v in zip(divs, vals)]
    return SNFResult(units + ncore, (1,) * units + tuple(sorted(divs)))


def integer_rank(rows: Sequence[dict], ncols: int, trials: int = 3, seed: int = 0) -> int:
    """Rank over QQ of an integer matrix.

    Full rank is certified cheaply by a rank computation modulo random
    word-sized primes (the rank modulo p never exceeds the rational rank);
    otherwise an exact rational echelon form is computed.
    """
    rng = random.Random(seed)
    best = 0
    rows = list(rows)
    if len(rows) > ncols + 16 and _compressed_full_rank(rows, ncols, rng):
        return ncols
    for _ in range(trials):
        p = _random_prime(rng)
        best = max(best, rank_mod_p(rows, p))
        if best == ncols:
            return best
    return len(rref_rational(rows))


def _compressed_full_rank(rows: list, ncols: int, rng: random.Random) -> bool:
    """True if R*A has rank ncols mod p for a random {-1,0,1} matrix R.

    rank(R*A) <= rank(A), so a True answer certifies full column rank.
    """
    if len(rows) >= 1 << 30 or ncols * len(rows) > _DENSE_LIMIT or max((abs(v) for r in rows for v in r.values()), default=0) >= 1 << 20:
        return False
    a = np.zeros((len(rows), ncols), dtype=np.float64)
    for i, r in enumerate(rows):
        for k, v in r.items():
            if type(v) is not int:
                return False
            a[i, k] = v
    # float64 products stay exact: |entries| < 2^20 * len(rows) < 2^53
    gen = np.random.default_rng(rng.getrandbits(32))
    for _ in range(2):
        rmat = gen.integers(-1, 2, size=(ncols + 8, len(rows))).astype(np.float64)
        p = _random_prime(rng)
        b = (rmat @ a).astype(np.int64) % p
        if _rank_dense_mod_p(b, p) == ncols:
            return True
    return False


def _random_prime(rng: random.Random) -> int:
    while True:
        n = rng.randrange((1 << 29) + 1, 1 << 30, 2)
        if is_prime(n):
            return n


def prime_support(s: SNFResult) -> list:
    """Sorted primes dividing at least one elementary divisor."""
    primes = set()
    for d in s.elementary_divisors:
        if d > 1:
            primes.update(_factor_small(d))
    return sorted(primes)


def determinantal_divisors_bruteforce(matrix: Sequence[Sequence[int]]) -> list:
    """gcd of all k x k minors, k = 1..min(shape); an independent SNF oracle."""
    from itertools import combinations

    nr = len(matrix)
    nc = len(matrix[0]) if nr else 0
    out = []
    for k in range(1, min(nr, nc) + 1):
        g = 0
        for rs in combinations(range(nr), k):
            for cs in combinations(range(nc), k):
                g = math.gcd(g, _det([[matrix[i][j] for j in cs] for i in rs]))
        out.append(g)
    return out


def _det(m: list) -> int:
    """Bareiss fraction-free determinant."""
    m = [row[:] for row in m]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def lcm_list(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)
