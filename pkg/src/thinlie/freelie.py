"""The free Lie algebra on ``x`` and ``y``: bracket expressions and the Lyndon basis.

Words are strings over ``"xy"`` with ``x < y``.  Lie elements are kept with
integer coefficients (the Lyndon basis is a basis of the free Lie ring) and
reduced into a field only at the boundary, so the same tables serve every
characteristic.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
import scipy.sparse as sp

from .scalar import Field, rank

__all__ = [
    "GENERATORS",
    "Gen",
    "Bracket",
    "BracketExpr",
    "ParseError",
    "parse",
    "left_normed",
    "witt_dimension",
    "lyndon_words",
    "standard_factorization",
    "LyndonBasis",
    "lyndon_basis",
    "LinComb",
    "expand",
    "expand_int",
    "bracket_words",
    "left_normed_span_check",
    "left_normed_words",
    "degree_cap",
    "DEFAULT_DEGREE_CAP",
]

GENERATORS = ("x", "y")
DEFAULT_DEGREE_CAP = 16


def degree_cap() -> int:
    """Free-Lie degree cap, overridable through ``THINLIE_DEGREE_CAP``."""
    raw = os.environ.get("THINLIE_DEGREE_CAP")
    if raw is None or not raw.strip():
        return DEFAULT_DEGREE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"THINLIE_DEGREE_CAP must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError("THINLIE_DEGREE_CAP must be positive")
    return cap


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gen:
    name: str

    @property
    def degree(self) -> int:
        return 1

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Bracket:
    left: "Node"
    right: "Node"

    @property
    def degree(self) -> int:
        return self.left.degree + self.right.degree

    def __str__(self) -> str:
        # print left-normed chains flat, the way they are usually written
        items = [self.right]
        node = self.left
        while isinstance(node, Bracket):
            items.append(node.right)
            node = node.left
        items.append(node)
        return "[" + ",".join(str(i) for i in reversed(items)) + "]"


Node = Union[Gen, Bracket]


@dataclass(frozen=True)
class BracketExpr:
    """Formal integer combination of bracket monomials."""

    terms: tuple[tuple[int, Node], ...]

    @classmethod
    def of(cls, node: Node, coeff: int = 1) -> "BracketExpr":
        return cls(((coeff, node),))

    @property
    def degrees(self) -> set[int]:
        return {node.degree for _, node in self.terms}

    @property
    def is_homogeneous(self) -> bool:
        return len(self.degrees) <= 1

    @property
    def degree(self) -> int:
        degs = self.degrees
        if len(degs) != 1:
            raise ValueError(f"expression {self} is not homogeneous (degrees {sorted(degs)})")
        return next(iter(degs))

    def __str__(self) -> str:
        out = []
        for k, (c, node) in enumerate(self.terms):
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            if k == 0:
                out.append(f"{'-' if c < 0 else ''}{mag}{node}")
            else:
                out.append(f" {'-' if c < 0 else '+'} {mag}{node}")
        return "".join(out) if out else "0"


def left_normed(*items) -> Node:
    """[a1, a2, ..., an] = [[a1, a2], ..., an]; strings name generators."""
    nodes = [Gen(i) if isinstance(i, str) else i for i in items]
    if len(nodes) < 2:
        raise ValueError("a bracket needs at least two entries")
    out = nodes[0]
    for n in nodes[1:]:
        out = Bracket(out, n)
    return out


class ParseError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class _Parser:
    def __init__(self, text: str, generators):
        self.text = text
        self.generators = tuple(generators)
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expect(self, ch: str):
        if self._peek() != ch:
            found = self._peek() or "end of input"
            raise ParseError(f"expected {ch!r}, found {found!r}", self.text, self.pos)
        self.pos += 1

    def _int(self) -> int | None:
        self._skip()
        m = re.match(r"\d+", self.text[self.pos :])
        if not m:
            return None
        self.pos += m.end()
        return int(m.group())

    def expr(self) -> BracketExpr:
        terms = [self.term(sign=self._leading_sign())]
        while self._peek() in ("+", "-"):
            sign = 1 if self._peek() == "+" else -1
            self.pos += 1
            terms.append(self.term(sign))
        if self._peek():
            raise ParseError(f"unexpected {self._peek()!r}", self.text, self.pos)
        return BracketExpr(tuple(terms))

    def _leading_sign(self) -> int:
        if self._peek() == "-":
            self.pos += 1
            return -1
        return 1

    def term(self, sign: int) -> tuple[int, Node]:
        start = self.pos
        coeff = self._int()
        if coeff is not None:
            self._expect("*")
        else:
            coeff = 1
            self.pos = start
        if self._peek() != "[":
            found = self._peek() or "end of input"
            raise ParseError(f"expected '[', found {found!r}", self.text, self.pos)
        return sign * coeff, self.bracket()

    def bracket(self) -> Node:
        self._expect("[")
        items = [self.item()]
        while self._peek() == ",":
            self.pos += 1
            items.append(self.item())
        if len(items) < 2:
            raise ParseError("a bracket needs at least two entries", self.text, self.pos)
        self._expect("]")
        return left_normed(*items)

    def item(self) -> Node:
        ch = self._peek()
        if ch == "[":
            return self.bracket()
        if ch.isalpha():
            m = re.match(r"[A-Za-z_][A-Za-z_0-9]*", self.text[self.pos :])
            name = m.group()
            if name not in self.generators:
                raise ParseError(f"unknown generator {name!r}", self.text, self.pos)
            self.pos += m.end()
            return Gen(name)
        found = ch or "end of input"
        raise ParseError(f"expected a generator or '[', found {found!r}", self.text, self.pos)


def parse(text: str, generators=GENERATORS) -> BracketExpr:
    """Parse ``expr := term (('+'|'-') term)*`` with ``term := [int '*'] bracket``.

    Bracket lists of length three or more are read left-normed.
    """
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    return _Parser(text, generators).expr()


def _as_expr(e) -> BracketExpr:
    if isinstance(e, BracketExpr):
        return e
    if isinstance(e, str):
        return parse(e)
    if isinstance(e, (Gen, Bracket)):
        return BracketExpr.of(e)
    raise TypeError(f"not a bracket expression: {e!r}")


# ---------------------------------------------------------------------------
# Lyndon words
# ---------------------------------------------------------------------------

def _mobius(n: int) -> int:
    result, m, f = 1, n, 2
    while f * f <= m:
        if m % f == 0:
            m //= f
            if m % f == 0:
                return 0
            result = -result
        f += 1
    if m > 1:
        result = -result
    return result


def witt_dimension(n: int, generators: int = 2) -> int:
    """dim F_n for the free Lie algebra on ``generators`` letters."""
    if n < 1:
        raise ValueError(f"degree must be positive, got {n}")
    total = sum(_mobius(d) * generators ** (n // d) for d in range(1, n + 1) if n % d == 0)
    return total // n


@lru_cache(maxsize=None)
def lyndon_words(n: int) -> tuple[str, ...]:
    """Lyndon words of length ``n`` over x < y, increasing (Duval's algorithm)."""
    if n < 1:
        raise ValueError(f"degree must be positive, got {n}")
    out = []
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == n:
            out.append("".join("xy"[c] for c in w))
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == 1:
            w.pop()
    return tuple(out)


def _is_lyndon(w: str) -> bool:
    return all(w < w[i:] for i in range(1, len(w)))


@lru_cache(maxsize=None)
def standard_factorization(w: str) -> tuple[str, str]:
    """(u, v) with v the longest proper Lyndon suffix of ``w``."""
    if len(w) < 2:
        raise ValueError(f"letter {w!r} has no standard factorization")
    for i in range(1, len(w)):
        if _is_lyndon(w[i:]):
            return w[:i], w[i:]
    raise AssertionError("unreachable for Lyndon words")


@lru_cache(maxsize=None)
def _bracketing(w: str) -> Node:
    if len(w) == 1:
        return Gen(w)
    u, v = standard_factorization(w)
    return Bracket(_bracketing(u), _bracketing(v))


@dataclass(frozen=True)
class LyndonBasis:
    degree: int
    words: tuple[str, ...]

    @property
    def index(self) -> dict[str, int]:
        return _index(self.degree)

    def __len__(self) -> int:
        return len(self.words)

    def bracketing(self, word: str) -> Node:
        return _bracketing(word)


@lru_cache(maxsize=None)
def _index(n: int) -> dict[str, int]:
    return {w: i for i, w in enumerate(lyndon_words(n))}


@lru_cache(maxsize=None)
def lyndon_basis(n: int) -> LyndonBasis:
    return LyndonBasis(n, lyndon_words(n))


# ---------------------------------------------------------------------------
# bracket rewriting over the integers
# ---------------------------------------------------------------------------

_BRACKETS: dict[tuple[str, str], dict[str, int]] = {}


def bracket_words(u: str, v: str) -> dict[str, int]:
    """[P_u, P_v] in the Lyndon basis, integer coefficients.

    Standard rewriting: when u < v and the right factor of u is at least v,
    uv is Lyndon with standard factorization (u, v); otherwise unfold
    [[u1, u2], v] = [[u1, v], u2] - [[u2, v], u1] and recurse.
    """
    if u == v:
        return {}
    if u > v:
        return {w: -c for w, c in bracket_words(v, u).items()}
    key = (u, v)
    hit = _BRACKETS.get(key)
    if hit is not None:
        return hit
    if len(u) == 1 or standard_factorization(u)[1] >= v:
        out = {u + v: 1}
    else:
        u1, u2 = standard_factorization(u)
        acc: dict[str, int] = {}
        for w, c in bracket_words(u1, v).items():
            for z, d in bracket_words(w, u2).items():
                acc[z] = acc.get(z, 0) + c * d
        for w, c in bracket_words(u2, v).items():
            for z, d in bracket_words(w, u1).items():
                acc[z] = acc.get(z, 0) - c * d
        out = {w: c for w, c in acc.items() if c}
    _BRACKETS[key] = out
    return out


def _bracket_int(a: dict[str, int], b: dict[str, int]) -> dict[str, int]:
    acc: dict[str, int] = {}
    for u, c in a.items():
        for v, d in b.items():
            for w, e in bracket_words(u, v).items():
                acc[w] = acc.get(w, 0) + c * d * e
    return {w: c for w, c in acc.items() if c}


def _node_int(node: Node) -> dict[str, int]:
    if isinstance(node, Gen):
        if node.name not in GENERATORS:
            raise ValueError(f"unknown generator {node.name!r}")
        return {node.name: 1}
    return _bracket_int(_node_int(node.left), _node_int(node.right))


def expand_int(e) -> tuple[int, dict[str, int]]:
    """Degree and integer Lyndon coordinates (keyed by word) of ``e``."""
    expr = _as_expr(e)
    n = expr.degree
    acc: dict[str, int] = {}
    for c, node in expr.terms:
        for w, d in _node_int(node).items():
            acc[w] = acc.get(w, 0) + c * d
    return n, {w: c for w, c in acc.items() if c}


@dataclass(frozen=True)
class LinComb:
    """Element of F_n in Lyndon coordinates over a field."""

    field: Field
    degree: int
    coeffs: tuple[tuple[int, object], ...]  # (basis index, nonzero value), sorted

    @classmethod
    def from_int(cls, field: Field, degree: int, coords: dict[str, int]) -> "LinComb":
        idx = _index(degree)
        items = []
        for w, c in coords.items():
            v = field(c)
            if v != 0:
                items.append((idx[w], v))
        return cls(field, degree, tuple(sorted(items)))

    @classmethod
    def from_vector(cls, field: Field, degree: int, vector) -> "LinComb":
        vec = np.asarray(vector).reshape(-1)
        if len(vec) != witt_dimension(degree):
            raise ValueError("vector length does not match the degree")
        return cls(field, degree, tuple((int(i), field(vec[i])) for i in np.flatnonzero(vec != 0)))

    @property
    def vector(self) -> np.ndarray:
        out = self.field.zeros(witt_dimension(self.degree))
        for i, v in self.coeffs:
            out[i] = v
        return out

    def __len__(self) -> int:
        return witt_dimension(self.degree)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def as_dict(self) -> dict[int, object]:
        return dict(self.coeffs)

    def to_expr(self) -> BracketExpr:
        """Integer combination of standard bracketings (symmetric residues)."""
        words = lyndon_words(self.degree)
        terms = []
        for i, v in self.coeffs:
            c = self.field.symmetric(v)
            if self.field.is_rational and c.denominator != 1:
                raise ValueError("rational coefficients have no integer expression form")
            terms.append((int(c), _bracketing(words[i])))
        return BracketExpr(tuple(terms))

    def __str__(self) -> str:
        return str(self.to_expr()) if self.coeffs else "0"


def expand(e, field: Field) -> LinComb:
    """Coordinates of a homogeneous bracket expression in the Lyndon basis."""
    n, coords = expand_int(e)
    return LinComb.from_int(field, n, coords)


# ---------------------------------------------------------------------------
# left-normed words
# ---------------------------------------------------------------------------

def left_normed_words(e) -> dict[tuple[str, ...], int]:
    """Rewrite ``e`` as a combination of left-normed words [g1, ..., gn].

    Uses [u, [v, w]] = [[u, v], w] - [[u, w], v] recursively.
    """
    expr = _as_expr(e)
    acc: dict[tuple[str, ...], int] = {}

    def right(word: tuple[str, ...], node: Node, coeff: int):
        if isinstance(node, Gen):
            yield word + (node.name,), coeff
            return
        for w1, c1 in right(word, node.left, coeff):
            yield from right(w1, node.right, c1)
        for w2, c2 in right(word, node.right, coeff):
            yield from right(w2, node.left, -c2)

    def flatten(node: Node, coeff: int):
        if isinstance(node, Gen):
            yield (node.name,), coeff
            return
        for w, c in flatten(node.left, coeff):
            yield from right(w, node.right, c)

    for c, node in expr.terms:
        for w, d in flatten(node, c):
            if len(w) >= 2 and w[0] == w[1]:
                continue  # [g, g] = 0
            acc[w] = acc.get(w, 0) + d
    return {w: c for w, c in acc.items() if c}


def _left_normed_int(word) -> dict[str, int]:
    vec = {word[0]: 1}
    for g in word[1:]:
        vec = _bracket_int(vec, {g: 1})
    return vec


def left_normed_span_check(n: int, field: Field | None = None):
    """Whether the 2^n left-normed words of degree ``n`` span F_n.

    Returns ``(spans, rank)``.
    """
    from .scalar import make_field

    field = field or make_field(5)
    if n < 1:
        raise ValueError("degree must be positive")
    if n > degree_cap():
        raise ValueError(f"degree {n} exceeds the free-Lie cap {degree_cap()}")
    dim = witt_dimension(n)
    rows = []
    for bits in range(2**n):
        word = tuple("xy"[(bits >> (n - 1 - k)) & 1] for k in range(n))
        rows.append(LinComb.from_int(field, n, _left_normed_int(word)).vector)
    r = rank(np.array(rows, dtype=field.dtype).reshape(-1, dim), field)
    return r == dim, r


# ---------------------------------------------------------------------------
# per-degree tables for the quotient engine
# ---------------------------------------------------------------------------

def _section(u: str, v: str, memo: dict) -> dict[tuple[str, int], int]:
    """Write [P_u, P_v] as sum [a_g, g] over generators, keyed by (a, g)."""
    key = (u, v)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if len(v) == 1:
        out = {(u, GENERATORS.index(v)): 1}
    else:
        v1, v2 = standard_factorization(v)
        acc: dict[tuple[str, int], int] = {}
        for w, c in bracket_words(u, v1).items():
            for k, d in _section(w, v2, memo).items():
                acc[k] = acc.get(k, 0) + c * d
        for w, c in bracket_words(u, v2).items():
            for k, d in _section(w, v1, memo).items():
                acc[k] = acc.get(k, 0) - c * d
        out = {k: c for k, c in acc.items() if c}
    memo[key] = out
    return out


@dataclass(frozen=True)
class FreeStep:
    """Integer data linking F_{n-1} (x) <x, y> to F_n.

    ``ad`` is the (dim F_n) x (2 dim F_{n-1}) matrix of (a, g) -> [a, g] with
    column g * dim F_{n-1} + index(a).  ``section`` is a right inverse of it
    built from standard factorizations, so ad @ section = identity.
    """

    degree: int
    ad: sp.csr_array
    section: sp.csr_array


_SECTION_MEMO: dict = {}


@lru_cache(maxsize=None)
def free_step(n: int) -> FreeStep:
    if n < 2:
        raise ValueError("free_step needs n >= 2")
    prev = lyndon_words(n - 1)
    cur = lyndon_words(n)
    pidx, cidx = _index(n - 1), _index(n)
    dp, dc = len(prev), len(cur)
    rows, cols, vals = [], [], []
    for g, letter in enumerate(GENERATORS):
        for i, w in enumerate(prev):
            for z, c in bracket_words(w, letter).items():
                rows.append(cidx[z])
                cols.append(g * dp + i)
                vals.append(c)
    ad = sp.csr_array((np.array(vals, dtype=np.int64), (rows, cols)), shape=(dc, 2 * dp))
    rows, cols, vals = [], [], []
    for j, w in enumerate(cur):
        u, v = standard_factorization(w)
        for (a, g), c in _section(u, v, _SECTION_MEMO).items():
            rows.append(g * dp + pidx[a])
            cols.append(j)
            vals.append(c)
    section = sp.csr_array((np.array(vals, dtype=np.int64), (rows, cols)), shape=(2 * dp, dc))
    ad.sum_duplicates()
    section.sum_duplicates()
    return FreeStep(n, ad, section)

