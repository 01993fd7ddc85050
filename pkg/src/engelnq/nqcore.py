"""Graded nilpotent quotient engine for multigraded Lie rings.

A presentation lists generators (each of unit multidegree), pairs of
generators that commute, optional extra relators given as left-normed
generator words, a truncation and optionally an Engel condition.  ``build``
constructs the largest quotient of the free Lie ring satisfying all of it,
one weight layer at a time.

Layer ``c`` works as follows.  Every pair (basis element ``b`` of weight
``c-1``, generator ``g``) whose multidegree fits the caps becomes a
candidate symbol standing for ``[b, g]``.  Any other product of total weight
``c`` is expanded into candidates through

    [u, [v, h]] = [[u, v], h] - [[u, h], v]

using the (already known) lower products.  Antisymmetry, Jacobi instances
``(u, v, g)`` with ``g`` a generator, the presentation relations and the
Engel rows give linear relations among candidates.  They are eliminated per
multidegree; the surviving candidates become the new basis elements, chosen
as early in candidate order as possible.
"""

from __future__ import annotations

import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .exactalg import QQ, PrimeField, Ring, rref_modp, rref_rational
from .freelie import MultiDegree, TruncationSpec, md_add, unit_multidegree

__all__ = [
    "NQError",
    "OwnershipError",
    "IntegralityError",
    "EngelSpec",
    "Presentation",
    "BasisElement",
    "LieElement",
    "GradedLieAlgebra",
    "build",
    "multiply",
    "left_normed",
    "ideal_class",
    "max_a_entries",
    "wreath_presentation",
]

log = logging.getLogger(__name__)

ENGEL_MODES = ("direct", "multilinear", "multilinear_plus_power", "power")


class NQError(ValueError):
    pass


class OwnershipError(NQError):
    """Elements from different algebras were combined."""


class IntegralityError(NQError):
    """A rational structure constant turned out not to be an integer."""


@dataclass(frozen=True)
class EngelSpec:
    """Impose the n-Engel identity while building.  Only n = 5 is supported."""

    mode: str = "direct"
    degree: int = 5

    def __post_init__(self):
        if self.degree != 5:
            raise NQError("only the 5-Engel identity is supported")
        mode = self.mode.replace("+", "_plus_").replace("-", "_")
        if mode not in ENGEL_MODES:
            raise NQError(f"unknown Engel mode {self.mode!r}")
        object.__setattr__(self, "mode", mode)


@dataclass(frozen=True)
class Presentation:
    generators: tuple
    ring: Ring = QQ
    commuting_pairs: frozenset = frozenset()
    trunc: TruncationSpec = TruncationSpec()
    engel: Optional[EngelSpec] = None
    relators: tuple = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens):
            raise NQError("generator names must be distinct")
        object.__setattr__(self, "generators", gens)
        pairs = set()
        for pair in self.commuting_pairs:
            i, j = (self.index(g) if isinstance(g, str) else g for g in pair)
            if not (0 <= i < len(gens) and 0 <= j < len(gens)):
                raise NQError(f"commuting pair {pair} references an unknown generator")
            if i != j:
                pairs.add((min(i, j), max(i, j)))
        object.__setattr__(self, "commuting_pairs", frozenset(pairs))
        rels = []
        for word in self.relators:
            w = tuple(self.index(g) if isinstance(g, str) else g for g in word)
            if len(w) < 2 or not all(0 <= g < len(gens) for g in w):
                raise NQError(f"bad relator {word}")
            rels.append(w)
        object.__setattr__(self, "relators", tuple(rels))
        if self.trunc.caps is not None and len(self.trunc.caps) != len(gens):
            raise NQError("per-generator caps must match the generator count")
        if gens and self.trunc.weight_bound(len(gens)) is None:
            raise NQError("the truncation must bound the weight (set max_class or finite caps)")

    def index(self, name: str) -> int:
        try:
            return self.generators.index(name)
        except ValueError:
            raise NQError(f"unknown generator {name!r}") from None

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    def generator_multidegrees(self) -> list:
        n = len(self.generators)
        return [unit_multidegree(n, i) for i in range(n)]

    @classmethod
    def x_and_commuting(
        cls,
        m: int,
        ring: Ring = QQ,
        cap_x: Optional[int] = None,
        cap_a: Optional[int] = 1,
        max_class: Optional[int] = None,
        engel: Optional[EngelSpec] = None,
        caps: Optional[Sequence[int]] = None,
    ) -> "Presentation":
        """Generators ``x, a1..am`` with all a's commuting."""
        gens = ("x",) + tuple(f"a{i}" for i in range(1, m + 1))
        pairs = frozenset((i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1))
        trunc = TruncationSpec(cap_x=cap_x, cap_a=cap_a, max_class=max_class, caps=tuple(caps) if caps else None)
        return cls(gens, ring, pairs, trunc, engel)


def wreath_presentation(n: int, ring: Ring) -> Presentation:
    """``b, a1..an`` with ``[a_i,a_j] = 0`` for ``i, j > 1``, ``[a_i,a_1]``
    central among the a's, and ``[b,a1,a1,a1] = 0``; b and the ``a_i``
    (``i > 1``) occur at most once.
    """
    gens = ("b",) + tuple(f"a{i}" for i in range(1, n + 1))
    pairs = frozenset((i, j) for i in range(2, n + 1) for j in range(i + 1, n + 1))
    rels = [(i, 1, j) for i in range(2, n + 1) for j in range(1, n + 1)]
    rels.append((0, 1, 1, 1))
    caps = (1, None) + (1,) * (n - 1)
    trunc = TruncationSpec(caps=caps, max_class=2 * n + 3)
    return Presentation(gens, ring, pairs, trunc, None, tuple(rels))


@dataclass(frozen=True)
class BasisElement:
    index: int  # 1-based
    weight: int
    multidegree: MultiDegree
    definition: tuple  # ("gen", g) or ("comm", parent_index, generator_index), 1-based

    @property
    def is_generator(self) -> bool:
        return self.definition[0] == "gen"


class LieElement:
    """Sparse combination of basis elements of one algebra (0-based keys)."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: "GradedLieAlgebra", coeffs: dict):
        ring = algebra.ring
        clean = {}
        for k, v in coeffs.items():
            if not 0 <= k < algebra.dimension:
                raise NQError(f"basis index {k} out of range")
            v = ring.convert(v)
            if v != 0:
                clean[k] = v
        self.algebra = algebra
        self.coeffs = dict(sorted(clean.items()))

    def _check(self, other: "LieElement") -> None:
        if not isinstance(other, LieElement) or other.algebra is not self.algebra:
            raise OwnershipError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return LieElement(self.algebra, out)

    def __neg__(self):
        return LieElement(self.algebra, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        s = self.algebra.ring.convert(scalar)
        return LieElement(self.algebra, {k: s * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, LieElement) and other.algebra is self.algebra and other.coeffs == self.coeffs

    def __hash__(self):
        return hash((id(self.algebra), tuple(self.coeffs.items())))

    def __bool__(self):
        return bool(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{v}*b{k + 1}" for k, v in self.coeffs.items())


def _addmul(acc: dict, vec: dict, f, p: int) -> None:
    """acc += f * vec, dropping zeros (reduced mod p when p > 0)."""
    if p:
        for k, x in vec.items():
            nv = (acc.get(k, 0) + f * x) % p
            if nv:
                acc[k] = nv
            else:
                acc.pop(k, None)
    else:
        for k, x in vec.items():
            nv = acc.get(k, 0) + f * x
            if nv:
                acc[k] = nv
            else:
                acc.pop(k, None)


def _norm_q(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


class GradedLieAlgebra:
    """A finite-dimensional multigraded Lie ring with a full product table.

    Basis elements are stored 0-based internally and reported 1-based.  The
    table holds every nonzero product of two basis elements (both orders).
    """

    def __init__(self, presentation: Presentation):
        self.presentation = presentation
        self.ring = presentation.ring
        self.p = presentation.ring.p if isinstance(presentation.ring, PrimeField) else 0
        self.weights: list = []
        self.multidegrees: list = []
        self.definitions: list = []  # None for generators, else (parent, gen), 0-based
        self.products: dict = {}
        self.layer_stats: list = []
        self.non_integral: list = []
        self._by_md: Optional[dict] = None

    # -- construction helpers -------------------------------------------------

    def _append(self, weight: int, md: MultiDegree, definition) -> int:
        self.weights.append(weight)
        self.multidegrees.append(md)
        self.definitions.append(definition)
        self._by_md = None
        return len(self.weights) - 1

    # -- read-only views ------------------------------------------------------

    @property
    def dimension(self) -> int:
        return len(self.weights)

    @property
    def lie_class(self) -> int:
        return max(self.weights, default=0)

    @property
    def num_generators(self) -> int:
        return self.presentation.num_generators

    @property
    def basis(self) -> list:
        out = []
        for i, (w, md, d) in enumerate(zip(self.weights, self.multidegrees, self.definitions)):
            definition = ("gen", i + 1) if d is None else ("comm", d[0] + 1, d[1] + 1)
            out.append(BasisElement(i + 1, w, md, definition))
        return out

    def by_multidegree(self) -> dict:
        if self._by_md is None:
            comp = defaultdict(list)
            for i, md in enumerate(self.multidegrees):
                comp[md].append(i)
            self._by_md = dict(comp)
        return self._by_md

    def indices_of_weight(self, w: int) -> list:
        return [i for i, x in enumerate(self.weights) if x == w]

    def product(self, i: int, j: int) -> dict:
        """Product of basis elements ``i`` and ``j`` (0-based) as a dict."""
        return self.products.get((i, j), {})

    def structure_constant(self, i: int, j: int) -> dict:
        """``[b_i, b_j]`` with 1-based indices on both sides."""
        return {k + 1: v for k, v in self.product(i - 1, j - 1).items()}

    @property
    def is_integral(self) -> bool:
        return not self.non_integral

    def assert_integral(self) -> None:
        if self.non_integral:
            (i, j), k, v = self.non_integral[0]
            raise IntegralityError(
                f"[b{i + 1},b{j + 1}] has coefficient {v} at b{k + 1}; "
                f"{len(self.non_integral)} non-integral constants in total"
            )

    # -- elements -------------------------------------------------------------

    def element(self, coeffs: dict) -> LieElement:
        """Element from a 1-based ``{index: coefficient}`` map."""
        return LieElement(self, {k - 1: v for k, v in coeffs.items()})

    def basis_element(self, i: int) -> LieElement:
        return LieElement(self, {i - 1: 1})

    def generator(self, name) -> LieElement:
        g = self.presentation.index(name) if isinstance(name, str) else name
        if not 0 <= g < self.num_generators:
            raise NQError(f"unknown generator {name!r}")
        return LieElement(self, {g: 1})

    def zero(self) -> LieElement:
        return LieElement(self, {})

    def bracket_dicts(self, u: dict, v: dict) -> dict:
        p = self.p
        out: dict = {}
        for i, a in u.items():
            for j, b in v.items():
                prod = self.products.get((i, j))
                if prod:
                    _addmul(out, prod, a * b, p)
        if not p:
            out = {k: _norm_q(x) for k, x in out.items()}
        return out

    # -- checks -----------------------------------------------------------------

    def jacobi_defect(self, i: int, j: int, k: int) -> dict:
        """``[[i,j],k] + [[j,k],i] + [[k,i],j]`` for 0-based basis indices."""
        out: dict = {}
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            _addmul(out, self.bracket_dicts(self.product(a, b), {c: 1}), 1, self.p)
        return out

    def grading_violations(self) -> list:
        bad = []
        for (i, j), prod in self.products.items():
            target = md_add(self.multidegrees[i], self.multidegrees[j])
            for k in prod:
                if self.multidegrees[k] != target or not self.presentation.trunc.allows(target):
                    bad.append((i, j, k))
        return bad

    def dimension_by_multidegree(self) -> dict:
        return {md: len(ix) for md, ix in sorted(self.by_multidegree().items())}

    # -- table export -----------------------------------------------------------

    def export_table(self, allow_fractions: bool = False) -> str:
        """Text dump of the basis and every product ``[b_i, b_j]`` with i > j.

        Over the rationals the constants must be integers unless
        ``allow_fractions`` is set.
        """
        if self.ring == QQ and not allow_fractions:
            self.assert_integral()
        pres = self.presentation
        lines = [
            "# engelnq structure table",
            f"ring {self.ring.name}",
            f"dimension {self.dimension}",
            f"class {self.lie_class}",
            "generators " + " ".join(
                f"{name}:{','.join(map(str, md))}" for name, md in zip(pres.generators, pres.generator_multidegrees())
            ),
        ]
        for b in self.basis:
            d = "gen" if b.is_generator else f"{b.definition[1]},{b.definition[2]}"
            lines.append(f"basis {b.index} {b.weight} {','.join(map(str, b.multidegree))} {d}")
        lines.append("table")
        for (i, j) in sorted(k for k in self.products if k[0] > k[1]):
            prod = self.products[(i, j)]
            terms = " ".join(f"{k + 1}:{v}" for k, v in sorted(prod.items()))
            lines.append(f"{i + 1} {j + 1} : {terms}")
        return "\n".join(lines) + "\n"

    @classmethod
    def import_table(cls, text: str, presentation: Presentation) -> "GradedLieAlgebra":
        alg = cls(presentation)
        in_table = False
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == "table":
                in_table = True
                continue
            if not in_table:
                head, *rest = line.split()
                if head == "ring" and rest[0] != alg.ring.name:
                    raise NQError(f"table ring {rest[0]} does not match presentation ring {alg.ring.name}")
                if head == "basis":
                    _, w, md, d = rest
                    definition = None if d == "gen" else tuple(int(t) - 1 for t in d.split(","))
                    alg._append(int(w), tuple(int(t) for t in md.split(",")), definition)
                continue
            left, right = line.split(":", 1)
            i, j = (int(t) - 1 for t in left.split())
            prod = {}
            for term in right.split():
                k, v = term.split(":")
                prod[int(k) - 1] = alg.ring.convert(Fraction(v))
            alg.products[(i, j)] = prod
            alg.products[(j, i)] = {k: alg.ring.convert(-v) for k, v in prod.items()}
        return alg


# ---------------------------------------------------------------------------
# the layer loop


class LayerContext:
    """What relation generators see while layer ``c`` is being built."""

    def __init__(self, alg: GradedLieAlgebra, c: int, cands: dict, caps: tuple):
        self.alg = alg
        self.c = c
        self.cands = cands
        self.caps = caps
        self.p = alg.p
        self.rho_memo: dict = {}
        self.rows: dict = defaultdict(list)

    def fits(self, md: MultiDegree) -> bool:
        return all(cap is None or x <= cap for x, cap in zip(md, self.caps))

    def prod(self, u: int, v: int) -> dict:
        return self.alg.products.get((u, v), {})

    def rho(self, u: int, v: int) -> dict:
        """``[b_u, b_v]`` (total weight c) as a combination of candidates."""
        key = (u, v)
        r = self.rho_memo.get(key)
        if r is not None:
            return r
        alg = self.alg
        d = alg.definitions[v]
        if d is None:
            k = self.cands.get(key)
            r = {k: 1} if k is not None else {}
        else:
            vp, h = d
            r = {}
            p = self.p
            for b, cf in self.prod(u, vp).items():
                k = self.cands.get((b, h))
                if k is not None:
                    nv = r.get(k, 0) + cf
                    if p:
                        nv %= p
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k)
            for b, cf in self.prod(u, h).items():
                _addmul(r, self.rho(b, vp), -cf, p)
        self.rho_memo[key] = r
        return r

    def rho_vec(self, vec: dict, v: int) -> dict:
        """``[vec, b_v]`` in candidates, for ``vec`` of weight ``c - wt(v)``."""
        out: dict = {}
        for b, cf in vec.items():
            _addmul(out, self.rho(b, v), cf, self.p)
        return out

    def add_row(self, md: MultiDegree, row: dict) -> None:
        if row:
            self.rows[md].append(row)


def build(
    pres: Presentation,
    progress: Optional[Callable[[dict], None]] = None,
) -> GradedLieAlgebra:
    """Largest graded quotient satisfying ``pres``; see the module docstring."""
    alg = GradedLieAlgebra(pres)
    n = pres.num_generators
    if n == 0:
        return alg
    p = alg.p
    caps = pres.trunc.cap_vector(n)
    gen_mds = pres.generator_multidegrees()
    for g in range(n):
        alg._append(1, gen_mds[g], None)
    max_weight = pres.trunc.weight_bound(n)
    by_weight = {1: list(range(n))}
    relators = defaultdict(list)
    for word in pres.relators:
        relators[len(word)].append(word)
    engel_rows = None
    if pres.engel is not None:
        from .engelgen import layer_engel_rows as engel_rows

    c = 2
    while c <= max_weight:
        t0 = time.perf_counter()
        cands: dict = {}
        clist: list = []
        for b in by_weight[c - 1]:
            for g in range(n):
                md = md_add(alg.multidegrees[b], gen_mds[g])
                if all(cap is None or x <= cap for x, cap in zip(md, caps)):
                    cands[(b, g)] = len(clist)
                    clist.append((b, g, md))
        if not clist:
            break
        ctx = LayerContext(alg, c, cands, caps)
        components = defaultdict(list)
        for k, (_, _, md) in enumerate(clist):
            components[md].append(k)

        pairs = []
        for wu in range(1, c // 2 + 1):
            wv = c - wu
            for u in by_weight[wu]:
                mu = alg.multidegrees[u]
                for v in by_weight[wv]:
                    if wu == wv and v < u:
                        continue
                    md = md_add(mu, alg.multidegrees[v])
                    if md in components:
                        pairs.append((u, v, md))

        # antisymmetry
        for u, v, md in pairs:
            if u == v:
                ctx.add_row(md, ctx.rho(u, u))
            else:
                row = dict(ctx.rho(u, v))
                _addmul(row, ctx.rho(v, u), 1, p)
                ctx.add_row(md, row)

        # Jacobi instances (u, v, g) with u < v of total weight c - 1
        for wu in range(1, (c - 1) // 2 + 1):
            wv = c - 1 - wu
            for u in by_weight[wu]:
                for v in by_weight[wv]:
                    if wu == wv and v <= u:
                        continue
                    muv = md_add(alg.multidegrees[u], alg.multidegrees[v])
                    for g in range(n):
                        if g == u or g == v:
                            continue
                        md = md_add(muv, gen_mds[g])
                        if md not in components:
                            continue
                        row = ctx.rho_vec(ctx.prod(u, v), g)
                        _addmul(row, ctx.rho_vec(ctx.prod(v, g), u), 1, p)
                        _addmul(row, ctx.rho_vec(ctx.prod(g, u), v), 1, p)
                        ctx.add_row(md, row)

        if c == 2:
            for i, j in sorted(pres.commuting_pairs):
                md = md_add(gen_mds[i], gen_mds[j])
                for key in ((i, j), (j, i)):
                    if key in cands:
                        ctx.add_row(md, {cands[key]: 1})

        for word in relators.get(c, ()):
            vec = {word[0]: 1}
            for g in word[1:-1]:
                vec = alg.bracket_dicts(vec, {g: 1})
            md = tuple(map(sum, zip(*(gen_mds[g] for g in word))))
            if md in components:
                ctx.add_row(md, ctx.rho_vec(vec, word[-1]))

        if engel_rows is not None and c >= 6:
            engel_rows(ctx, pres.engel, by_weight)

        # eliminate per component; columns reversed so early candidates stay free
        expr: dict = {}
        free: list = []
        nrows = 0
        for md, ks in components.items():
            rows = ctx.rows.get(md, [])
            nrows += len(rows)
            last = len(ks) - 1
            local = {k: last - pos for pos, k in enumerate(ks)}
            rows = [{local[k]: x for k, x in r.items()} for r in rows]
            piv = (rref_modp(rows, p) if p else rref_rational(rows)) if rows else {}
            for pos, k in enumerate(ks):
                col = last - pos
                row = piv.get(col)
                if row is None:
                    free.append(k)
                else:
                    e = {}
                    for kk, vv in row.items():
                        if kk != col:
                            e[ks[last - kk]] = (-vv) % p if p else _norm_q(-vv)
                    expr[k] = e
        free.sort()
        newidx = {}
        for k in free:
            b, g, md = clist[k]
            newidx[k] = alg._append(c, md, (b, g))

        def to_basis(vec: dict) -> dict:
            out: dict = {}
            for k, x in vec.items():
                i = newidx.get(k)
                if i is not None:
                    _addmul(out, {i: 1}, x, p)
                else:
                    _addmul(out, {newidx[kk]: y for kk, y in expr[k].items()}, x, p)
            if not p:
                out = {k: _norm_q(v) for k, v in out.items()}
            return out

        for u, v, md in pairs:
            prod = to_basis(ctx.rho(u, v))
            if not prod:
                continue
            if not p:
                for k, x in prod.items():
                    if isinstance(x, Fraction):
                        alg.non_integral.append(((u, v), k, x))
            alg.products[(u, v)] = prod
            if u != v:
                alg.products[(v, u)] = {k: (-x) % p if p else -x for k, x in prod.items()}

        by_weight[c] = [newidx[k] for k in free]
        stats = {
            "weight": c,
            "candidates": len(clist),
            "new": len(free),
            "relation_rows": nrows,
            "seconds": round(time.perf_counter() - t0, 3),
        }
        alg.layer_stats.append(stats)
        log.info("layer %(weight)d: %(candidates)d candidates, %(new)d new, %(relation_rows)d rows, %(seconds).1fs", stats)
        if progress:
            progress(stats)
        if not free:
            break
        c += 1
    return alg


# ---------------------------------------------------------------------------
# element-level operations


def multiply(A: GradedLieAlgebra, u: LieElement, v: LieElement) -> LieElement:
    for e in (u, v):
        if not isinstance(e, LieElement) or e.algebra is not A:
            raise OwnershipError("element does not belong to this algebra")
    return LieElement(A, A.bracket_dicts(u.coeffs, v.coeffs))


def left_normed(A: GradedLieAlgebra, factors: Sequence[LieElement]) -> LieElement:
    if not factors:
        raise NQError("left_normed needs at least one factor")
    acc = factors[0]
    if not isinstance(acc, LieElement) or acc.algebra is not A:
        raise OwnershipError("element does not belong to this algebra")
    for f in factors[1:]:
        acc = multiply(A, acc, f)
    return acc


class _GradedSpan:
    """A subspace spanned by homogeneous vectors, echelonized per multidegree."""

    def __init__(self, alg: GradedLieAlgebra):
        self.alg = alg
        self.p = alg.p
        self.pivots: dict = defaultdict(dict)

    def insert(self, vec: dict) -> Optional[dict]:
        """Add ``vec``; return its reduced form if it was new, else None."""
        if not vec:
            return None
        md = self.alg.multidegrees[next(iter(vec))]
        piv = self.pivots[md]
        row = dict(vec)
        p = self.p
        while row:
            c = min(row)
            prow = piv.get(c)
            if prow is None:
                f = row[c]
                if p:
                    inv = pow(f, -1, p)
                    row = {k: v * inv % p for k, v in row.items()}
                else:
                    row = {k: _norm_q(Fraction(v) / f) for k, v in row.items()}
                piv[c] = row
                return row
            _addmul(row, prow, -row[c], p)
        return None

    def dimension(self) -> int:
        return sum(len(v) for v in self.pivots.values())

    def vectors(self) -> list:
        return [row for piv in self.pivots.values() for row in piv.values()]


def _ideal_closure(alg: GradedLieAlgebra, seeds: Iterable[dict]) -> _GradedSpan:
    span = _GradedSpan(alg)
    queue = []
    for s in seeds:
        r = span.insert(s)
        if r is not None:
            queue.append(r)
    gens = range(alg.num_generators)
    while queue:
        vec = queue.pop()
        for g in gens:
            r = span.insert(alg.bracket_dicts(vec, {g: 1}))
            if r is not None:
                queue.append(r)
    return span


def ideal_class(A: GradedLieAlgebra, x) -> int:
    """Nilpotency class of the ideal generated by the generator ``x``.

    ``gamma_1`` is the ideal itself; ``gamma_{k+1} = [gamma_k, Id(x)]`` is the
    ideal generated by ``[gamma_k, x]``.  Returns the last k with
    ``gamma_k != 0`` (0 for a zero ideal).
    """
    g = A.presentation.index(x) if isinstance(x, str) else x
    if not isinstance(g, int) or not 0 <= g < A.num_generators:
        raise NQError(f"unknown generator {x!r}")
    gamma = _ideal_closure(A, [{g: 1}])
    k = 0
    while gamma.dimension():
        k += 1
        seeds = (A.bracket_dicts(v, {g: 1}) for v in gamma.vectors())
        gamma = _ideal_closure(A, seeds)
    return k


def max_a_entries(A: GradedLieAlgebra) -> int:
    """Largest total degree in ``a_1..a_m`` over the basis."""
    return max((sum(md[1:]) for md in A.multidegrees), default=0)
