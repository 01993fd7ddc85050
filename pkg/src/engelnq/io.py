"""Text formats: presentation files and integer matrix dumps.

Presentation files are line oriented; ``#`` starts a comment::

    ring Q                 # or: ring GF 7
    gens x a1 a2 a3
    commute-all-a          # every pair of non-first generators commutes
    commute a1 a2          # a single pair
    cap x 4                # cap on the first generator
    cap a 1                # cap on every other generator
    cap a3 2               # cap on one named generator
    maxclass 10
    engel 5 direct         # or multilinear, multilinear+power, power
    relator a2 a1 a3       # the left-normed product [a2,a1,a3] is zero

Matrix dumps hold a ``# columns N`` header and then one row per line as
``col:coeff`` pairs in increasing column order (0-based columns).
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

from .exactalg import GF, QQ, ZZ, SparseRow
from .freelie import TruncationSpec
from .nqcore import EngelSpec, NQError, Presentation

__all__ = ["ParseError", "parse_presentation", "read_presentation", "write_matrix", "read_matrix", "format_matrix"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _tokens(line: str):
    """(column, token) pairs, columns 1-based."""
    out = []
    i = 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((i + 1, line[i:j]))
        i = j
    return out


def _int(tok, lineno, minimum=0):
    col, text = tok
    try:
        v = int(text)
    except ValueError:
        raise ParseError(f"expected an integer, got {text!r}", lineno, col) from None
    if v < minimum:
        raise ParseError(f"value must be at least {minimum}", lineno, col)
    return v


def parse_presentation(text: str) -> Presentation:
    ring = QQ
    gens: Optional[list] = None
    pairs = []
    commute_all = False
    cap_x = cap_a = max_class = None
    named_caps: dict = {}
    engel = None
    relators = []
    refs = []  # (name, line, column) to check once gens are known

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        (col, head), args = toks[0], toks[1:]

        def need(n, exact=True):
            if (len(args) != n) if exact else (len(args) < n):
                where = args[n][0] if exact and len(args) > n else col + len(head)
                raise ParseError(f"'{head}' takes {'exactly' if exact else 'at least'} {n} argument(s)", lineno, where)

        if head == "ring":
            need(1, exact=False)
            spec = "".join(t for _, t in args).replace("(", "").replace(")", "")
            if spec in ("Q", "QQ"):
                ring = QQ
            elif spec.startswith("GF"):
                try:
                    ring = GF(int(spec[2:]))
                except (ValueError, TypeError) as exc:
                    raise ParseError(f"bad prime field: {exc}", lineno, args[0][0]) from None
            else:
                raise ParseError(f"unknown ring {spec!r} (use Q or GF p)", lineno, args[0][0])
        elif head == "gens":
            need(1, exact=False)
            if gens is not None:
                raise ParseError("generators declared twice", lineno, col)
            gens = []
            for c, t in args:
                if t in gens:
                    raise ParseError(f"duplicate generator name {t!r}", lineno, c)
                gens.append(t)
        elif head == "commute":
            need(2)
            pairs.append((args[0][1], args[1][1]))
            refs.extend((t, lineno, c) for c, t in args)
        elif head == "commute-all-a":
            need(0)
            commute_all = True
        elif head == "cap":
            need(2)
            (gcol, which), n = args[0], _int(args[1], lineno)
            if which == "x":
                cap_x = n
            elif which == "a":
                cap_a = n
            else:
                named_caps[which] = n
                refs.append((which, lineno, gcol))
        elif head == "maxclass":
            need(1)
            max_class = _int(args[0], lineno, minimum=1)
        elif head == "engel":
            need(2)
            if _int(args[0], lineno) != 5:
                raise ParseError("only the 5-Engel identity is supported", lineno, args[0][0])
            try:
                engel = EngelSpec(args[1][1])
            except NQError as exc:
                raise ParseError(str(exc), lineno, args[1][0]) from None
        elif head == "relator":
            need(2, exact=False)
            relators.append(tuple(t for _, t in args))
            refs.extend((t, lineno, c) for c, t in args)
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, col)

    if gens is None:
        raise ParseError("missing 'gens' line", max(1, len(text.splitlines())), 1)
    for name, lineno, col in refs:
        if name not in gens:
            raise ParseError(f"unknown generator {name!r}", lineno, col)
    if commute_all:
        pairs.extend((gens[i], gens[j]) for i in range(1, len(gens)) for j in range(i + 1, len(gens)))
    caps = None
    if named_caps:
        base = TruncationSpec(cap_x=cap_x, cap_a=cap_a).cap_vector(len(gens))
        caps = tuple(named_caps.get(g, base[i]) for i, g in enumerate(gens))
    trunc = TruncationSpec(cap_x=cap_x, cap_a=cap_a, max_class=max_class, caps=caps)
    try:
        return Presentation(tuple(gens), ring, frozenset(pairs), trunc, engel, tuple(relators))
    except NQError as exc:
        raise ParseError(str(exc), len(text.splitlines()), 1) from None


def read_presentation(path) -> Presentation:
    return parse_presentation(Path(path).read_text())


def format_matrix(rows: Iterable[SparseRow], num_columns: int) -> str:
    lines = [f"# columns {num_columns}"]
    for r in rows:
        lines.append(" ".join(f"{c}:{v}" for c, v in r.entries))
    return "\n".join(lines) + "\n"


def write_matrix(path, rows: Iterable[SparseRow], num_columns: int) -> None:
    Path(path).write_text(format_matrix(rows, num_columns))


def read_matrix(path_or_text, is_text: bool = False) -> tuple:
    """Return (rows over ZZ, column count) from a matrix dump."""
    text = path_or_text if is_text else Path(path_or_text).read_text()
    ncols = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "columns":
                ncols = _int((2, parts[1]), lineno)
            continue
        entries = {}
        for col, tok in _tokens(raw):
            try:
                c, v = tok.split(":")
                c, v = int(c), int(v)
            except ValueError:
                raise ParseError(f"expected col:coeff, got {tok!r}", lineno, col) from None
            if c < 0 or c in entries:
                raise ParseError(f"bad or repeated column {c}", lineno, col)
            entries[c] = v
        rows.append(SparseRow.from_dict(ZZ, entries))
    if ncols is None:
        ncols = 1 + max((c for r in rows for c, _ in r.entries), default=-1)
    return rows, ncols
