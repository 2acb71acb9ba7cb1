"""Graded quotients F/I of the free Lie algebra on x, y, computed degree by degree.

The ideal is never materialized.  Degree n of the quotient is obtained from
degree n-1 alone: with A the map F_{n-1} (x) <x,y> -> F_n, a -> [a, g], and S
a fixed right inverse of A, the kernel of A is spanned by the columns of
1 - S A.  Pushing everything through the projection P of degree n-1 gives

    L_n = (L_{n-1} (x) <x,y>) / (image of (P (+) P) - (P (+) P) S A, relators),

so each step only needs matrices with dim L_{n-1} rows.  The naive ideal
closure is kept in :func:`ideal_trace` and serves as the reference.

Basis of L_n: the Lyndon words w whose image is not in the span of the images
of the later words (the non-pivot columns of the reduced ideal component).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .freelie import (
    BracketExpr,
    LinComb,
    _as_expr,
    _bracketing,
    degree_cap,
    expand,
    free_step,
    lyndon_words,
    parse,
    witt_dimension,
)
from .graded import DegreeError, GradedAlgebra
from .scalar import (
    Field,
    RowSpace,
    SparseRowSpace,
    SPARSE_THRESHOLD,
    echelon,
    inverse,
    make_field,
    nullspace,
    quotient_map,
)

__all__ = [
    "Presentation",
    "PresentationError",
    "QuotientAlgebra",
    "IdealTrace",
    "compute_quotient",
    "evaluate",
    "ad_matrix",
    "quotient_by",
    "ideal_trace",
]

# below this characteristic int64 sparse products cannot overflow
_FAST_P = 2**20


class PresentationError(ValueError):
    """Malformed presentation: bad relator, wrong degree, cap exceeded."""


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------

Relator = BracketExpr | LinComb


def _relator_degree(r: Relator) -> int:
    if isinstance(r, LinComb):
        return r.degree
    if not r.is_homogeneous:
        raise PresentationError(f"relator {r} is not homogeneous")
    return r.degree


def _integral(lc: LinComb) -> LinComb:
    """Scale a rational combination to integer coefficients."""
    if not lc.field.is_rational:
        return lc
    m = lcm(*(Fraction(v).denominator for _, v in lc.coeffs)) if lc.coeffs else 1
    return LinComb(lc.field, lc.degree, tuple((i, v * m) for i, v in lc.coeffs))


def relator_string(r: Relator) -> str:
    if isinstance(r, LinComb):
        return str(_integral(r))
    return str(r)


@dataclass(frozen=True)
class Presentation:
    """Field, homogeneous relators of degree >= 2, and a degree horizon."""

    field: Field
    relators: tuple[Relator, ...]
    max_degree: int

    def __post_init__(self):
        if not isinstance(self.max_degree, int) or self.max_degree < 1:
            raise PresentationError(f"max_degree must be a positive integer, got {self.max_degree!r}")
        cap = degree_cap()
        if self.max_degree > cap:
            raise PresentationError(f"max_degree {self.max_degree} exceeds the free-Lie cap {cap}")
        for r in self.relators:
            if isinstance(r, LinComb) and r.field != self.field:
                raise PresentationError("relator coordinates live over a different field")
            if _relator_degree(r) < 2:
                raise PresentationError(f"degree-1 relator {r} would kill a generator")

    @classmethod
    def build(cls, char: int, relators: Iterable = (), max_degree: int = 10) -> "Presentation":
        try:
            field = make_field(char)
        except ValueError as exc:
            raise PresentationError(str(exc)) from exc
        rels = []
        for r in relators:
            if isinstance(r, str):
                r = parse(r)  # ParseError carries the position
            elif not isinstance(r, (BracketExpr, LinComb)):
                r = _as_expr(r)
            rels.append(r)
        return cls(field, tuple(rels), int(max_degree))

    @classmethod
    def from_json(cls, data) -> "Presentation":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        if not isinstance(data, dict):
            raise PresentationError("presentation must be a JSON object")
        unknown = set(data) - {"char", "relators", "max_degree"}
        if unknown:
            raise PresentationError(f"unknown presentation fields {sorted(unknown)}")
        for key in ("char", "max_degree"):
            if not isinstance(data.get(key), int) or isinstance(data.get(key), bool):
                raise PresentationError(f"field {key!r} must be an integer")
        rels = data.get("relators", [])
        if not isinstance(rels, list) or not all(isinstance(r, str) for r in rels):
            raise PresentationError("relators must be a list of strings")
        return cls.build(data["char"], rels, data["max_degree"])

    @classmethod
    def load(cls, path) -> "Presentation":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> dict:
        return {
            "char": self.field.characteristic,
            "relators": [relator_string(r) for r in self.relators],
            "max_degree": self.max_degree,
        }

    def with_max_degree(self, m: int) -> "Presentation":
        return Presentation(self.field, self.relators, m)

    def relator_vectors(self) -> dict[int, list[np.ndarray]]:
        """Lyndon coordinates of the relators grouped by degree."""
        out: dict[int, list[np.ndarray]] = {}
        for r in self.relators:
            lc = r if isinstance(r, LinComb) else expand(r, self.field)
            if lc.degree <= self.max_degree and not lc.is_zero:
                out.setdefault(lc.degree, []).append(lc.vector)
        return out


# ---------------------------------------------------------------------------
# free tables and field-aware products
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _tables(p: int, n: int) -> tuple[sp.csr_array, sp.csr_array]:
    """(A_n, S_n) with entries reduced mod p (kept as integers for p = 0)."""
    step = free_step(n)
    if p == 0 or p >= _FAST_P:
        return step.ad, step.section
    out = []
    for m in (step.ad, step.section):
        m = m.copy()
        m.data = np.mod(m.data, p)
        m.eliminate_zeros()
        out.append(m)
    return out[0], out[1]


def _dense_sparse(dense: np.ndarray, spm: sp.csr_array, field: Field) -> np.ndarray:
    """dense @ spm over the field."""
    rows, cols = dense.shape[0], spm.shape[1]
    p = field.characteristic
    if 0 < p < _FAST_P:
        if rows == 0:
            return field.zeros((0, cols))
        return np.asarray((spm.T @ dense.T).T) % p
    if rows == 0:
        return field.zeros((0, cols))
    out = np.zeros((rows, cols), dtype=object)
    coo = spm.tocoo()
    src = dense.astype(object)
    for i, j, v in zip(coo.row, coo.col, coo.data):
        out[:, j] = out[:, j] + src[:, i] * int(v)
    return field.array(out)


def _sparse_to_field(spm: sp.csr_array, field: Field) -> np.ndarray:
    return field.array(spm.toarray())


# ---------------------------------------------------------------------------
# one degree at a time
# ---------------------------------------------------------------------------

@dataclass
class Level:
    """Degree-n state: dimension, projection F_n -> L_n, and basis words.

    ``proj`` is None while the component is still free (projection = identity).
    """

    degree: int
    dim: int
    proj: np.ndarray | None
    reps: tuple[str, ...]


def _zero_level(field: Field, n: int) -> Level:
    return Level(n, 0, field.zeros((0, witt_dimension(n))), ())


def _free_level(n: int) -> Level:
    return Level(n, witt_dimension(n), None, lyndon_words(n))


def finalize(field: Field, n: int, proj: np.ndarray, ads: Sequence[np.ndarray]) -> tuple[Level, tuple]:
    """Rebase so that basis vector i of L_n is the image of Lyndon word reps[i]."""
    k = proj.shape[0]
    if k == 0:
        return _zero_level(field, n), tuple(ads)
    dF = proj.shape[1]
    _, piv = echelon(proj[:, ::-1], field)
    cols = sorted(dF - 1 - c for c in piv)
    if len(cols) != k:
        raise AssertionError("projection is not surjective")
    binv = inverse(proj[:, cols], field)
    proj = field.matmul(binv, proj)
    ads = tuple(field.matmul(binv, a) for a in ads)
    words = lyndon_words(n)
    return Level(n, k, proj, tuple(words[c] for c in cols)), ads


def raw_step(field: Field, prev: Level, n: int, relators: Sequence[np.ndarray] = ()):
    """Degree-n component from degree n-1 plus degree-n relator vectors.

    Returns (level, (ad_x, ad_y)) with ad_g : L_{n-1} -> L_n, not yet rebased
    when a fresh quotient was formed (see :func:`finalize`).
    """
    dF = witt_dimension(n)
    if prev.dim == 0:
        return _zero_level(field, n), (field.zeros((0, 0)), field.zeros((0, 0)))
    A, S = _tables(field.characteristic, n)
    dp = witt_dimension(n - 1)
    rels = [np.asarray(r) for r in relators]
    if prev.proj is None:
        ax, ay = A[:, :dp], A[:, dp:]
        if not rels:
            return _free_level(n), (ax, ay)
        q, kept = quotient_map(np.vstack(rels), dF, field)
        ads = (_dense_sparse(q, ax.tocsr(), field), _dense_sparse(q, ay.tocsr(), field))
        return Level(n, len(kept), q, ()), ads
    P = prev.proj
    d = prev.dim
    sig = np.vstack([_dense_sparse(P, S[:dp].tocsr(), field), _dense_sparse(P, S[dp:].tocsr(), field)])
    sa = _dense_sparse(sig, A, field)  # 2d x 2dp
    rel = field.zeros((2 * d, 2 * dp))
    rel[:d, :dp] = P
    rel[d:, dp:] = P
    rel = field.reduce(rel - sa)
    rows = [rel.T]
    if rels:
        rows.append(field.matmul(sig, np.vstack(rels).T).T)
    q, kept = quotient_map(np.vstack(rows), 2 * d, field)
    proj = field.matmul(q, sig)
    return Level(n, len(kept), proj, ()), (q[:, :d], q[:, d:])


def step(field: Field, prev: Level, n: int, relators: Sequence[np.ndarray] = ()):
    level, ads = raw_step(field, prev, n, relators)
    if level.proj is None or level.reps:
        return level, ads
    return finalize(field, n, level.proj, ads)


def apply_quotient(field: Field, level: Level, ads: Sequence[np.ndarray], r: np.ndarray):
    """Image of a component under a surjection ``r`` (rows = new coordinates)."""
    proj = level.proj if level.proj is not None else field.identity(level.dim)
    proj = field.matmul(r, proj)
    ads = tuple(field.matmul(r, a if not sp.issparse(a) else _sparse_to_field(a, field)) for a in ads)
    return finalize(field, level.degree, proj, ads)


def lift(level: Level, v, field: Field) -> LinComb:
    """Lyndon combination of the basis words with coordinates ``v``."""
    v = np.asarray(v).reshape(-1)
    if level.proj is None:
        return LinComb.from_vector(field, level.degree, v)
    idx = {w: i for i, w in enumerate(lyndon_words(level.degree))}
    out = field.zeros(witt_dimension(level.degree))
    for c, w in zip(v, level.reps):
        out[idx[w]] = c
    return LinComb.from_vector(field, level.degree, out)


# ---------------------------------------------------------------------------
# the quotient algebra
# ---------------------------------------------------------------------------

class QuotientAlgebra(GradedAlgebra):
    """A GradedAlgebra built from a presentation; remembers its projections."""

    def __init__(self, presentation: Presentation, levels: list[Level], ads: dict[int, tuple]):
        f = presentation.field
        labels = {lv.degree: [str(_bracketing(w)) for w in lv.reps] for lv in levels}
        super().__init__(
            f,
            [lv.dim for lv in levels],
            ads,
            provenance="presentation",
            labels=labels,
            meta={"relators": [relator_string(r) for r in presentation.relators]},
        )
        self.presentation = presentation
        self.levels = levels

    def level(self, n: int) -> Level:
        self.dim(n)
        return self.levels[n - 1]

    def projection(self, n: int) -> np.ndarray:
        lv = self.level(n)
        return lv.proj if lv.proj is not None else self.field.identity(lv.dim)

    def reps(self, n: int) -> tuple[str, ...]:
        return self.level(n).reps

    def evaluate(self, e) -> np.ndarray:
        if isinstance(e, LinComb):
            lc = e
        else:
            lc = expand(e, self.field)
        n = lc.degree
        if n < 1 or n > self.max_degree:
            raise DegreeError(f"degree {n} outside 1..{self.max_degree}")
        lv = self.levels[n - 1]
        if lv.proj is None:
            return lc.vector
        out = self.field.zeros(lv.dim)
        for i, c in lc.coeffs:
            out = self.field.reduce(out + lv.proj[:, i] * c)
        return out

    def lift(self, n: int, v) -> LinComb:
        return lift(self.level(n), v, self.field)

    def ideal(self, n: int) -> RowSpace:
        """I_n as the kernel of the projection F_n -> L_n."""
        lv = self.level(n)
        if lv.proj is None:
            return RowSpace.zero(self.field, witt_dimension(n))
        return nullspace(lv.proj, self.field)


def _build(pres: Presentation, levels: list[Level], ads: dict[int, tuple], extra=None) -> QuotientAlgebra:
    f = pres.field
    rel = pres.relator_vectors()
    for n, vecs in (extra or {}).items():
        rel.setdefault(n, []).extend(vecs)
    if not levels:
        if 1 in rel:
            raise PresentationError("degree-1 relators are not allowed")
        levels = [_free_level(1)]
    for n in range(len(levels) + 1, pres.max_degree + 1):
        lv, ad = step(f, levels[-1], n, rel.get(n, ()))
        levels.append(lv)
        ads[n - 1] = ad
    return QuotientAlgebra(pres, levels, ads)


def compute_quotient(pres: Presentation) -> QuotientAlgebra:
    """Largest graded quotient of F by the relators, up to ``pres.max_degree``."""
    return _build(pres, [], {})


def evaluate(L: GradedAlgebra, e) -> np.ndarray:
    """Image of a homogeneous bracket expression in its component of L."""
    if isinstance(L, QuotientAlgebra):
        return L.evaluate(e)
    expr = e if isinstance(e, BracketExpr) else _as_expr(e)
    return L.evaluate_recursive(expr)


def ad_matrix(L: GradedAlgebra, n: int, g) -> np.ndarray:
    return L.ad_matrix(n, g)


def quotient_by(L: QuotientAlgebra, n: int, U) -> QuotientAlgebra:
    """Quotient of L by the ideal generated by a subspace U of L_n."""
    if not isinstance(L, QuotientAlgebra):
        raise TypeError("quotient_by needs a presentation-built algebra")
    d = L.dim(n)
    if isinstance(U, RowSpace):
        if U.ncols != d:
            raise ValueError(f"subspace lives in a {U.ncols}-dim space, L_{n} has dim {d}")
        basis = U.basis
    else:
        basis = np.asarray(U).reshape(-1, d) if np.size(U) else L.field.zeros((0, d))
        basis = RowSpace.span(L.field, d, L.field.array(basis)).basis
    if basis.shape[0] == 0:
        return L
    lifts = [L.lift(n, row) for row in basis]
    pres = Presentation(L.field, L.presentation.relators + tuple(lifts), L.presentation.max_degree)
    levels = list(L.levels[: n - 1])
    ads = {k: v for k, v in L._ad.items() if k < n - 1}
    return _build(pres, levels, ads)


# ---------------------------------------------------------------------------
# reference implementation: the ideal itself
# ---------------------------------------------------------------------------

@dataclass
class IdealTrace:
    """I_n per degree, computed by direct closure inside the free algebra."""

    field: Field
    components: dict[int, RowSpace | SparseRowSpace] = dc_field(default_factory=dict)

    def dim(self, n: int) -> int:
        return self.components[n].dim

    def quotient_dims(self) -> list[int]:
        return [witt_dimension(n) - self.dim(n) for n in sorted(self.components)]


def ideal_trace(pres: Presentation, threshold: int | None = None) -> IdealTrace:
    """I_n = [I_{n-1}, x] + [I_{n-1}, y] + span(relators of degree n).

    Dense elimination over the full free component; meant as an oracle.
    """
    f = pres.field
    rel = pres.relator_vectors()
    limit = SPARSE_THRESHOLD if threshold is None else threshold
    trace = IdealTrace(f)
    basis = f.zeros((0, 2))
    for n in range(1, pres.max_degree + 1):
        dF = witt_dimension(n)
        rows = []
        if n > 1 and basis.shape[0]:
            A, _ = _tables(f.characteristic, n)
            dp = witt_dimension(n - 1)
            for g in range(2):
                rows.append(_dense_sparse(basis, A[:, g * dp : (g + 1) * dp].T.tocsr(), f))
        rows.extend(np.asarray(v).reshape(1, -1) for v in rel.get(n, ()))
        if rows:
            basis, piv = echelon(np.vstack(rows), f)
        else:
            basis, piv = f.zeros((0, dF)), []
        space = RowSpace(f, dF, basis, piv, _trusted=True)
        if dF > limit:
            sparse = SparseRowSpace(f, dF)
            for row in basis:
                sparse.add(row)
            trace.components[n] = sparse
        else:
            trace.components[n] = space
    return trace
