"""Hall bases of free multigraded Lie algebras and the derived-ideal count.

The Hall set used here is the Lyndon basis: Lyndon words over an ordered
alphabet, each bracketed by its standard factorisation.  Generator ``i`` of
an alphabet carries a multidegree; a word's multidegree is the sum over its
letters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Optional, Sequence

__all__ = [
    "MultiDegree",
    "md_add",
    "md_weight",
    "unit_multidegree",
    "TruncationSpec",
    "HallWord",
    "is_lyndon",
    "lyndon_words",
    "standard_bracketing",
    "hall_basis",
    "mobius",
    "witt_dimension",
    "multigraded_witt",
    "derived_ideal_generators",
    "derived_ideal_breakdown",
    "derived_ideal_upper_bound",
]

MultiDegree = tuple  # tuple[int, ...]: position 0 is x, positions 1..m are a_1..a_m


def md_add(a: MultiDegree, b: MultiDegree) -> MultiDegree:
    return tuple(x + y for x, y in zip(a, b))


def md_weight(d: MultiDegree) -> int:
    return sum(d)


def unit_multidegree(n: int, i: int) -> MultiDegree:
    return tuple(1 if k == i else 0 for k in range(n))


@dataclass(frozen=True)
class TruncationSpec:
    """Multidegree caps plus a bound on total weight.

    ``cap_x`` bounds position 0, ``cap_a`` bounds every other position, and
    ``caps`` (when given) overrides both with an explicit per-position vector.
    ``None`` means unbounded.
    """

    cap_x: Optional[int] = None
    cap_a: Optional[int] = None
    max_class: Optional[int] = None
    caps: Optional[tuple] = None

    def __post_init__(self):
        for name in ("cap_x", "cap_a"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.max_class is not None and self.max_class < 1:
            raise ValueError("max_class must be at least 1")
        if self.caps is not None:
            caps = tuple(self.caps)
            if any(c is not None and c < 0 for c in caps):
                raise ValueError("caps must be non-negative")
            object.__setattr__(self, "caps", caps)

    def cap_vector(self, n: int) -> tuple:
        if self.caps is not None:
            if len(self.caps) != n:
                raise ValueError(f"caps has length {len(self.caps)}, expected {n}")
            return self.caps
        if n == 0:
            return ()
        return (self.cap_x,) + (self.cap_a,) * (n - 1)

    def allows(self, d: MultiDegree) -> bool:
        if self.max_class is not None and md_weight(d) > self.max_class:
            return False
        return all(c is None or x <= c for x, c in zip(d, self.cap_vector(len(d))))

    def weight_bound(self, n: int) -> Optional[int]:
        """Largest weight any allowed multidegree of length ``n`` can have."""
        caps = self.cap_vector(n)
        bound = None if any(c is None for c in caps) else sum(caps)
        if self.max_class is not None:
            bound = self.max_class if bound is None else min(bound, self.max_class)
        return bound


@dataclass(frozen=True)
class HallWord:
    """A generator (``gen`` set) or the bracket ``[left, right]``."""

    gen: Optional[int]
    left: Optional["HallWord"]
    right: Optional["HallWord"]
    weight: int
    multidegree: MultiDegree
    word: tuple = field(compare=False)

    @classmethod
    def generator(cls, i: int, multidegree: MultiDegree) -> "HallWord":
        return cls(i, None, None, 1, tuple(multidegree), (i,))

    @classmethod
    def bracket(cls, left: "HallWord", right: "HallWord") -> "HallWord":
        return cls(
            None,
            left,
            right,
            left.weight + right.weight,
            md_add(left.multidegree, right.multidegree),
            left.word + right.word,
        )

    @property
    def is_generator(self) -> bool:
        return self.gen is not None

    def render(self, names: Optional[Sequence[str]] = None) -> str:
        if self.is_generator:
            return names[self.gen] if names else f"g{self.gen}"
        return f"[{self.left.render(names)},{self.right.render(names)}]"

    def __str__(self) -> str:
        return self.render()


def is_lyndon(w: Sequence[int]) -> bool:
    """Strictly smaller than each of its proper rotations."""
    n = len(w)
    if n == 0:
        return False
    w = tuple(w)
    return all(w < w[i:] + w[:i] for i in range(1, n))


def lyndon_words(q: int, n: int) -> Iterator[tuple]:
    """All Lyndon words of length 1..n over ``range(q)`` in lex order (Duval)."""
    if q < 1 or n < 1:
        return
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == q - 1:
            w.pop()


def standard_bracketing(w: tuple, gens: Sequence[HallWord]) -> HallWord:
    """Bracket a Lyndon word at its longest proper Lyndon suffix."""
    if len(w) == 1:
        return gens[w[0]]
    for i in range(1, len(w)):
        if is_lyndon(w[i:]):
            return HallWord.bracket(standard_bracketing(w[:i], gens), standard_bracketing(w[i:], gens))
    raise ValueError(f"{w} is not a Lyndon word")


def _capped_lyndon(gen_mds: Sequence[MultiDegree], trunc: TruncationSpec, max_len: int) -> list:
    """Lyndon words whose every prefix respects the caps.

    Prefix multidegrees are dominated by the word's, so pruning on prefixes
    loses nothing.
    """
    q = len(gen_mds)
    n = len(gen_mds[0]) if q else 0
    caps = trunc.cap_vector(n)
    found = []

    def fits(d):
        return all(c is None or x <= c for x, c in zip(d, caps))

    def extend(word, d):
        if is_lyndon(word):
            found.append(word)
        if len(word) == max_len:
            return
        for g in range(word[0], q):
            nd = md_add(d, gen_mds[g])
            if fits(nd):
                extend(word + (g,), nd)

    for g in range(q):
        if fits(gen_mds[g]):
            extend((g,), tuple(gen_mds[g]))
    return found


def hall_basis(
    num_generators: int,
    generator_multidegrees: Optional[Sequence[MultiDegree]] = None,
    trunc: TruncationSpec = TruncationSpec(),
) -> list:
    """Lyndon-Hall basis of the truncated free Lie algebra.

    Weight counts letters; ``trunc.max_class`` bounds it and the caps bound
    the multidegree.  Without any bound the algebra is infinite, so one of
    them must be finite.  Output is sorted by weight, then by word.
    """
    if num_generators <= 0:
        return []
    if generator_multidegrees is None:
        generator_multidegrees = [unit_multidegree(num_generators, i) for i in range(num_generators)]
    gen_mds = [tuple(d) for d in generator_multidegrees]
    if len(gen_mds) != num_generators:
        raise ValueError("need one multidegree per generator")
    width = len(gen_mds[0])
    max_len = trunc.max_class
    if max_len is None:
        caps = trunc.cap_vector(width)
        # every letter contributes at least 1 somewhere, so caps bound length
        if any(c is None for c in caps) or any(sum(d) == 0 for d in gen_mds):
            raise ValueError("truncation does not bound the word length")
        max_len = sum(caps)
    gens = [HallWord.generator(i, gen_mds[i]) for i in range(num_generators)]
    words = _capped_lyndon(gen_mds, TruncationSpec(caps=trunc.cap_vector(width)), max_len)
    words.sort(key=lambda w: (len(w), w))
    return [standard_bracketing(w, gens) for w in words]


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius needs n >= 1")
    result, k = 1, 2
    while k * k <= n:
        if n % k == 0:
            n //= k
            if n % k == 0:
                return 0
            result = -result
        k += 1
    return -result if n > 1 else result


def witt_dimension(num_generators: int, degree: int) -> int:
    """Dimension of the degree-``degree`` part of the free Lie algebra."""
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if num_generators < 1:
        raise ValueError("need at least one generator")
    total = sum(mobius(d) * num_generators ** (degree // d) for d in range(1, degree + 1) if degree % d == 0)
    return total // degree


def multigraded_witt(d: MultiDegree) -> int:
    """Dimension of the multidegree-``d`` component of the free Lie algebra."""
    from math import factorial, gcd
    from functools import reduce

    n = sum(d)
    if n == 0:
        return 0
    g = reduce(gcd, d)
    total = 0
    for k in range(1, g + 1):
        if g % k:
            continue
        parts = [x // k for x in d]
        multinom = factorial(n // k)
        for x in parts:
            multinom //= factorial(x)
        total += mobius(k) * multinom
    return total // n


# ---------------------------------------------------------------------------
# the derived-ideal count


def derived_ideal_generators(num_commuting: int) -> list:
    """Subsets of ``{1..m}`` ordered by (size, lex), with their multidegrees.

    Subset S stands for the product ``[x, a_S...]`` of multidegree
    ``d_x = 1, d_i = [i in S]``; the empty subset is ``x`` itself.
    """
    subsets = []
    for size in range(num_commuting + 1):
        subsets.extend(combinations(range(1, num_commuting + 1), size))
    mds = [tuple([1] + [1 if i in s else 0 for i in range(1, num_commuting + 1)]) for s in subsets]
    return list(zip(subsets, mds))


def derived_ideal_breakdown(num_commuting: int = 6, cap_x: int = 4) -> dict:
    """Per-multidegree Hall-word counts over the subset generators.

    Words have length at most ``cap_x`` and combined multidegree within
    ``d_x <= cap_x`` and ``d_i <= 1``.
    """
    gens = derived_ideal_generators(num_commuting)
    mds = [md for _, md in gens]
    trunc = TruncationSpec(cap_x=cap_x, cap_a=1, max_class=cap_x)
    words = _capped_lyndon(mds, trunc, cap_x) if cap_x >= 1 else []
    out: dict = {}
    for w in words:
        d = tuple(map(sum, zip(*(mds[g] for g in w))))
        out[d] = out.get(d, 0) + 1
    return dict(sorted(out.items()))


def derived_ideal_upper_bound(num_commuting: int = 6, cap_x: int = 4) -> int:
    """Upper bound on the dimension of the algebra generated by x and m
    commuting a's, truncated to ``d_x <= cap_x`` and ``d_i <= 1``.

    The a's span ``m`` dimensions; everything else lies in the ideal
    generated by the products ``[x, a_S]``.
    """
    return num_commuting + sum(derived_ideal_breakdown(num_commuting, cap_x).values())
