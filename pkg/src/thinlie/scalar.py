"""Exact arithmetic over GF(p) and the rationals, plus dense/sparse linear algebra.

Matrices are numpy arrays: ``int64`` holding canonical residues for GF(p),
``object`` holding :class:`fractions.Fraction` for the rationals.  Nothing in
this package ever touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Field",
    "make_field",
    "is_prime",
    "rref",
    "echelon",
    "rank",
    "nullspace",
    "solve",
    "inverse",
    "RowSpace",
    "SparseRowSpace",
    "row_space",
    "quotient_map",
    "SPARSE_THRESHOLD",
]

MAX_CHARACTERISTIC = 2**31
SPARSE_THRESHOLD = 512

# (p-1)^2 * inner must stay below 2^63 for a single int64 matmul.
_INT64_LIMIT = 2**63 - 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class Field:
    """GF(p) for prime ``characteristic``, or the rationals when it is 0.

    Elements are plain Python values in canonical form: an ``int`` in
    ``[0, p)`` or a ``Fraction``.  Use :func:`make_field` rather than the
    constructor so instances are shared.
    """

    __slots__ = ("characteristic", "_small")

    def __init__(self, characteristic: int):
        if not isinstance(characteristic, (int, np.integer)) or isinstance(characteristic, bool):
            raise ValueError(f"characteristic must be an integer, got {characteristic!r}")
        characteristic = int(characteristic)
        if characteristic < 0:
            raise ValueError(f"characteristic must be non-negative, got {characteristic}")
        if characteristic != 0:
            if not is_prime(characteristic):
                raise ValueError(f"characteristic {characteristic} is not prime")
            if characteristic >= MAX_CHARACTERISTIC:
                raise ValueError(f"characteristic {characteristic} exceeds 2^31")
        self.characteristic = characteristic
        self._small = characteristic != 0

    # -- identity ---------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.characteristic == 0

    @property
    def order(self) -> int | None:
        return self.characteristic or None

    def __repr__(self) -> str:
        return "QQ" if self.is_rational else f"GF({self.characteristic})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.characteristic == self.characteristic

    def __hash__(self) -> int:
        return hash(("Field", self.characteristic))

    def __reduce__(self):
        return (make_field, (self.characteristic,))

    # -- scalars ----------------------------------------------------------
    def __call__(self, value) -> int | Fraction:
        p = self.characteristic
        if isinstance(value, str):
            value = Fraction(value.strip())
        if p == 0:
            return Fraction(value)
        if isinstance(value, Fraction):
            num, den = value.numerator, value.denominator
            if den % p == 0:
                raise ZeroDivisionError(f"denominator {den} vanishes in {self}")
            return num * pow(den, -1, p) % p
        return int(value) % p

    @property
    def zero(self):
        return Fraction(0) if self.is_rational else 0

    @property
    def one(self):
        return Fraction(1) if self.is_rational else 1

    def add(self, a, b):
        return a + b if self.is_rational else (a + b) % self.characteristic

    def sub(self, a, b):
        return a - b if self.is_rational else (a - b) % self.characteristic

    def mul(self, a, b):
        return a * b if self.is_rational else (a * b) % self.characteristic

    def neg(self, a):
        return -a if self.is_rational else (-a) % self.characteristic

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError(f"zero has no inverse in {self}")
        if self.is_rational:
            return 1 / Fraction(a)
        return pow(int(a), -1, self.characteristic)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def elements(self) -> Iterable[int]:
        if self.is_rational:
            raise ValueError("the rationals cannot be enumerated")
        return range(self.characteristic)

    def symmetric(self, a) -> int | Fraction:
        """Representative in (-p/2, p/2]; identity over the rationals."""
        if self.is_rational:
            return a
        a = int(a)
        return a - self.characteristic if a > self.characteristic // 2 else a

    def format(self, a) -> str:
        return str(self.symmetric(a))

    # -- arrays -----------------------------------------------------------
    @property
    def dtype(self):
        return object if self.is_rational else np.int64

    def array(self, data) -> np.ndarray:
        """Canonical array of field elements from ints, Fractions, or strings."""
        if isinstance(data, np.ndarray) and data.dtype != object:
            if not self.is_rational:
                return np.mod(data.astype(np.int64), self.characteristic)
            data = data.astype(object)
        arr = np.array(data, dtype=object)
        if self.is_rational:
            out = np.empty(arr.shape, dtype=object)
            out.reshape(-1)[:] = [Fraction(v) for v in arr.reshape(-1)]
            return out
        return np.array([self(v) for v in arr.reshape(-1)], dtype=np.int64).reshape(arr.shape)

    def zeros(self, shape) -> np.ndarray:
        if self.is_rational:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape, dtype=np.int64)

    def identity(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.one
        return out

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        if self.is_rational:
            return arr
        return np.mod(arr, self.characteristic)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.is_rational:
            if a.shape[-1] == 0:
                return self.zeros(a.shape[:-1] + b.shape[1:])
            return a @ b
        p = self.characteristic
        inner = a.shape[-1]
        step = max(1, _INT64_LIMIT // max(1, (p - 1) ** 2))
        if inner <= step:
            return (a @ b) % p
        out = None
        for s in range(0, inner, step):
            part = (a[..., s : s + step] @ b[s : s + step]) % p
            out = part if out is None else (out + part) % p
        return out

    def is_zero_array(self, arr: np.ndarray) -> bool:
        return not np.any(arr != 0)


@lru_cache(maxsize=None)
def make_field(characteristic: int) -> Field:
    """Shared field handle; 0 means the rationals, otherwise a prime."""
    return Field(characteristic)


# ---------------------------------------------------------------------------
# dense elimination
# ---------------------------------------------------------------------------

def echelon(m: np.ndarray, field: Field) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    a = np.array(m, dtype=field.dtype, copy=True)
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    rows, cols = a.shape
    pivots: list[int] = []
    r = c = 0
    while r < rows and c < cols:
        live = np.flatnonzero((a[r:, c:] != 0).any(axis=0))
        if live.size == 0:
            break
        c += int(live[0])
        i = r + int(np.flatnonzero(a[r:, c] != 0)[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = field.reduce(a[r] * field.inv(a[r, c]))
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col != 0)
        if hit.size:
            a[hit] = field.reduce(a[hit] - np.outer(col[hit], a[r]))
        pivots.append(c)
        r += 1
        c += 1
    return a[:r], pivots


def rref(m: np.ndarray, field: Field) -> tuple[np.ndarray, int]:
    """Reduced row echelon form with the shape of ``m`` and its rank."""
    m = np.asarray(m)
    red, piv = echelon(m, field)
    out = field.zeros(m.shape)
    if piv:
        out[: len(piv)] = red
    return out, len(piv)


def rank(m: np.ndarray, field: Field) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(echelon(m, field)[1])


def nullspace(m: np.ndarray, field: Field) -> "RowSpace":
    """Right kernel of ``m`` as a RowSpace in the column space."""
    m = np.asarray(m)
    ncols = m.shape[1]
    if m.shape[0] == 0:
        return RowSpace(field, ncols, field.identity(ncols), list(range(ncols)), _trusted=True)
    red, piv = echelon(m, field)
    free = [c for c in range(ncols) if c not in set(piv)]
    basis = field.zeros((len(free), ncols))
    for k, f in enumerate(free):
        basis[k, f] = field.one
        for i, pc in enumerate(piv):
            basis[k, pc] = field.neg(red[i, f])
    return RowSpace.span(field, ncols, basis)


def solve(m: np.ndarray, b: np.ndarray, field: Field) -> np.ndarray | None:
    """Some x with m @ x = b, or None when the system is inconsistent."""
    m = np.asarray(m)
    b = np.asarray(b).reshape(-1)
    rows, cols = m.shape
    aug = field.zeros((rows, cols + 1))
    aug[:, :cols] = m
    aug[:, cols] = b
    red, piv = echelon(aug, field)
    if piv and piv[-1] == cols:
        return None
    x = field.zeros(cols)
    for i, pc in enumerate(piv):
        x[pc] = red[i, cols]
    return x


def inverse(m: np.ndarray, field: Field) -> np.ndarray:
    m = np.asarray(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    aug = field.zeros((n, 2 * n))
    aug[:, :n] = m
    aug[:, n:] = field.identity(n)
    red, piv = echelon(aug, field)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("singular matrix")
    return red[:, n:]


def quotient_map(rows: np.ndarray, ncols: int, field: Field) -> tuple[np.ndarray, list[int]]:
    """Matrix of V -> V/span(rows) in the coordinates of the non-pivot columns.

    Returns (Q, kept) where Q has shape (len(kept), ncols).
    """
    rows = np.asarray(rows)
    if rows.size == 0:
        return field.identity(ncols), list(range(ncols))
    red, piv = echelon(rows.reshape(-1, ncols), field)
    pset = set(piv)
    kept = [c for c in range(ncols) if c not in pset]
    q = field.zeros((len(kept), ncols))
    for k, c in enumerate(kept):
        q[k, c] = field.one
    # v = sum v_c e_c; e_pivot == -(non-pivot part of its row) modulo the rows
    for i, pc in enumerate(piv):
        q[:, pc] = field.reduce(-red[i, kept]) if not field.is_rational else -red[i, kept]
    return q, kept


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

class RowSpace:
    """Subspace of field^ncols held as a reduced row-echelon basis."""

    __slots__ = ("field", "ncols", "basis", "pivots")

    def __init__(self, field: Field, ncols: int, basis: np.ndarray, pivots: Sequence[int], _trusted=False):
        if not _trusted:
            basis, pivots = echelon(np.asarray(basis).reshape(-1, ncols), field)
        self.field = field
        self.ncols = ncols
        basis = np.asarray(basis).reshape(-1, ncols)
        basis.flags.writeable = False
        self.basis = basis
        self.pivots = tuple(int(c) for c in pivots)

    @classmethod
    def span(cls, field: Field, ncols: int, vectors) -> "RowSpace":
        vectors = np.asarray(vectors, dtype=field.dtype) if len(vectors) else field.zeros((0, ncols))
        vectors = vectors.reshape(-1, ncols)
        basis, piv = echelon(vectors, field) if vectors.shape[0] else (vectors, [])
        return cls(field, ncols, basis, piv, _trusted=True)

    @classmethod
    def zero(cls, field: Field, ncols: int) -> "RowSpace":
        return cls(field, ncols, field.zeros((0, ncols)), [], _trusted=True)

    @classmethod
    def full(cls, field: Field, ncols: int) -> "RowSpace":
        return cls(field, ncols, field.identity(ncols), list(range(ncols)), _trusted=True)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def reduce(self, v) -> np.ndarray:
        """Remainder of ``v`` after clearing every pivot coordinate."""
        v = np.array(v, dtype=self.field.dtype, copy=True).reshape(-1)
        for row, pc in zip(self.basis, self.pivots):
            c = v[pc]
            if c != 0:
                v = self.field.reduce(v - c * row)
        return v

    def contains(self, v) -> bool:
        return not np.any(self.reduce(v) != 0)

    __contains__ = contains

    def contains_space(self, other: "RowSpace") -> bool:
        return all(self.contains(r) for r in other.basis)

    def sum(self, other: "RowSpace") -> "RowSpace":
        return RowSpace.span(self.field, self.ncols, np.vstack([self.basis, other.basis]))

    def quotient_map(self) -> tuple[np.ndarray, list[int]]:
        return quotient_map(self.basis, self.ncols, self.field)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RowSpace)
            and other.field == self.field
            and other.ncols == self.ncols
            and other.pivots == self.pivots
            and bool(np.all(other.basis == self.basis))
        )

    def __hash__(self):
        return hash((self.ncols, self.pivots, tuple(self.basis.reshape(-1).tolist())))

    def __repr__(self) -> str:
        return f"RowSpace(dim={self.dim}, ncols={self.ncols}, {self.field})"


class SparseRowSpace:
    """Subspace kept as reduced echelon rows stored as ``{column: value}``.

    Used for ideal components of the free algebra, where rows are long but
    carry few nonzeros.
    """

    def __init__(self, field: Field, ncols: int, vectors: Iterable = ()):
        self.field = field
        self.ncols = ncols
        self._rows: dict[int, dict[int, object]] = {}
        for v in vectors:
            self.add(v)

    @property
    def dim(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(sorted(self._rows))

    def rows(self) -> list[dict[int, object]]:
        return [dict(self._rows[c]) for c in self.pivots]

    @staticmethod
    def _as_dict(v) -> dict:
        if isinstance(v, dict):
            return {int(k): x for k, x in v.items() if x != 0}
        arr = np.asarray(v).reshape(-1)
        return {int(i): arr[i] for i in np.flatnonzero(arr != 0)}

    def reduce(self, v) -> dict[int, object]:
        f = self.field
        w = self._as_dict(v)
        w = {k: f(x) if not f.is_rational else Fraction(x) for k, x in w.items()}
        for pc in sorted(set(w) & set(self._rows)):
            c = w.get(pc)
            if not c:
                continue
            for k, x in self._rows[pc].items():
                nv = f.sub(w.get(k, f.zero), f.mul(c, x))
                if nv == 0:
                    w.pop(k, None)
                else:
                    w[k] = nv
        # reduction against a pivot can introduce only non-pivot columns
        return w

    def add(self, v) -> bool:
        """Insert ``v``; returns True when the dimension grew."""
        f = self.field
        w = self.reduce(v)
        if not w:
            return False
        pc = min(w)
        inv = f.inv(w[pc])
        w = {k: f.mul(x, inv) for k, x in w.items()}
        for row in self._rows.values():
            c = row.get(pc)
            if c:
                for k, x in w.items():
                    nv = f.sub(row.get(k, f.zero), f.mul(c, x))
                    if nv == 0:
                        row.pop(k, None)
                    else:
                        row[k] = nv
        self._rows[pc] = w
        return True

    def contains(self, v) -> bool:
        return not self.reduce(v)

    __contains__ = contains

    def to_dense(self) -> RowSpace:
        basis = self.field.zeros((self.dim, self.ncols))
        for i, pc in enumerate(self.pivots):
            for k, x in self._rows[pc].items():
                basis[i, k] = x
        return RowSpace(self.field, self.ncols, basis, self.pivots, _trusted=True)

    def __repr__(self) -> str:
        return f"SparseRowSpace(dim={self.dim}, ncols={self.ncols}, {self.field})"


def row_space(field: Field, ncols: int, vectors=(), threshold: int | None = None):
    """Dense RowSpace below ``threshold`` columns, SparseRowSpace above."""
    limit = SPARSE_THRESHOLD if threshold is None else threshold
    if ncols > limit:
        return SparseRowSpace(field, ncols, vectors)
    vecs = list(vectors)
    return RowSpace.span(field, ncols, np.array(vecs, dtype=field.dtype).reshape(-1, ncols) if vecs else field.zeros((0, ncols)))
