"""Finite-dimensional Z/N-graded Lie algebras and their loop algebras.

Given S = sum of S_k (k in Z/N), the loop algebra is the positively graded
algebra with L_k = S_{k mod N} (x) t^k and [a t^i, b t^j] = [a, b] t^(i+j).
A grading remap by a unit u replaces each degree d with u*d mod N, which
decides which component of S ends up in degree one.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Sequence

import numpy as np

from .graded import GradedAlgebra
from .scalar import Field, make_field, rank

__all__ = [
    "FiniteGradedAlgebra",
    "GradingRemap",
    "Violation",
    "AlgebraFileError",
    "GenerationWarning",
    "validate",
    "verify_cyclic_grading",
    "loop",
    "catalog",
    "CATALOG",
    "load_algebra",
]

CATALOG = ("sl2", "sl3", "witt")


class AlgebraFileError(ValueError):
    """Malformed or unsupported algebra description."""


class GenerationWarning(UserWarning):
    """Degree one of the loop algebra does not generate S."""


@dataclass(frozen=True)
class Violation:
    kind: str  # "jacobi" or "grading"
    indices: tuple[int, ...]
    names: tuple[str, ...]
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} violated at ({', '.join(self.names)}): {self.detail}"


class FiniteGradedAlgebra:
    """Structure constants c_ij^k (i < j) over a field with a Z/N degree map."""

    def __init__(
        self,
        field: Field,
        basis: Sequence[str],
        brackets: dict[tuple[int, int], dict[int, object]],
        period: int,
        deg: Sequence[int],
        name: str | None = None,
    ):
        if period < 1:
            raise ValueError("period must be at least 1")
        if len(set(basis)) != len(basis):
            raise ValueError("basis names must be distinct")
        if len(deg) != len(basis):
            raise ValueError("every basis element needs a degree")
        self.field = field
        self.basis = tuple(basis)
        self.period = int(period)
        self.deg = tuple(int(d) % self.period for d in deg)
        self.name = name
        clean: dict[tuple[int, int], dict[int, object]] = {}
        for (i, j), terms in brackets.items():
            if not 0 <= i < j < len(self.basis):
                raise ValueError(f"bracket entry ({i}, {j}) must satisfy i < j within the basis")
            row = {int(k): field(c) for k, c in terms.items()}
            row = {k: c for k, c in row.items() if c != 0}
            if row:
                clean[(i, j)] = row
        self.brackets = clean
        d = self.dim
        t = field.zeros((d, d, d))
        for (i, j), row in clean.items():
            for k, c in row.items():
                t[i, j, k] = c
                t[j, i, k] = field.neg(c)
        t.flags.writeable = False
        self.tensor = t

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        return self.basis.index(name)

    def bracket(self, a, b) -> np.ndarray:
        """[a, b] for coordinate vectors a, b."""
        f = self.field
        a = np.asarray(a)
        b = np.asarray(b)
        # sum_ij a_i b_j T[i, j, :]
        m = f.matmul(a.reshape(1, -1), self.tensor.reshape(self.dim, -1)).reshape(self.dim, self.dim)
        return f.matmul(b.reshape(1, -1), m).reshape(-1)

    def ad(self, v) -> np.ndarray:
        """Matrix of u -> [u, v] (columns are images of basis vectors)."""
        f = self.field
        v = np.asarray(v).reshape(-1)
        # column i = sum_j v_j T[i, j, :]
        m = f.matmul(self.tensor.transpose(0, 2, 1).reshape(-1, self.dim), v.reshape(-1, 1))
        return m.reshape(self.dim, self.dim).T

    def unit(self, i: int) -> np.ndarray:
        v = self.field.zeros(self.dim)
        v[i] = self.field.one
        return v

    def component(self, k: int) -> list[int]:
        return [i for i, d in enumerate(self.deg) if d == k % self.period]

    def regraded(self, remap: "GradingRemap") -> "FiniteGradedAlgebra":
        if remap.period not in (None, self.period):
            raise ValueError("remap period does not match the algebra")
        return FiniteGradedAlgebra(
            self.field,
            self.basis,
            self.brackets,
            self.period,
            [remap.unit * d for d in self.deg],
            self.name,
        )

    def generated_dim(self, indices: Sequence[int]) -> int:
        """Dimension of the subalgebra generated by the given basis vectors."""
        f = self.field
        span = f.zeros((0, self.dim))
        frontier = [self.unit(i) for i in indices]
        r = 0
        while frontier:
            span = np.vstack([span] + [v.reshape(1, -1) for v in frontier])
            new_r = rank(span, f)
            if new_r == r:
                break
            r = new_r
            gens = [self.unit(i) for i in indices]
            frontier = [self.bracket(v, g) for v in span for g in gens]
        return rank(span, f) if span.shape[0] else 0

    # -- files ------------------------------------------------------------
    def to_json(self) -> dict:
        entries = []
        for (i, j) in sorted(self.brackets):
            row = self.brackets[(i, j)]
            entries.append(
                [self.basis[i], self.basis[j], [[self.basis[k], _coeff_str(self.field, c)] for k, c in sorted(row.items())]]
            )
        out = {
            "char": self.field.characteristic,
            "period": self.period,
            "basis": list(self.basis),
            "deg": {n: d for n, d in zip(self.basis, self.deg)},
            "brackets": entries,
        }
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data) -> "FiniteGradedAlgebra":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        if not isinstance(data, dict):
            raise AlgebraFileError("algebra file must hold a JSON object")
        if "derivation" in data:
            raise AlgebraFileError("field 'derivation' is unsupported (twisted loop algebras are not implemented)")
        unknown = set(data) - {"char", "period", "basis", "deg", "brackets", "name"}
        if unknown:
            raise AlgebraFileError(f"unknown fields {sorted(unknown)}")
        try:
            field = make_field(data["char"])
            basis = [str(b) for b in data["basis"]]
            period = int(data["period"])
            degmap = data["deg"]
            deg = [int(degmap[b]) for b in basis]
        except KeyError as exc:
            raise AlgebraFileError(f"missing entry {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise AlgebraFileError(str(exc)) from exc
        pos = {b: i for i, b in enumerate(basis)}
        brackets: dict[tuple[int, int], dict[int, object]] = {}
        for entry in data.get("brackets", []):
            try:
                a, b, terms = entry
                i, j = pos[a], pos[b]
            except (ValueError, KeyError, TypeError) as exc:
                raise AlgebraFileError(f"bad bracket entry {entry!r}") from exc
            if not i < j:
                raise AlgebraFileError(f"bracket entry [{a}, {b}] must list the earlier basis element first")
            if (i, j) in brackets:
                raise AlgebraFileError(f"duplicate bracket entry [{a}, {b}]")
            row: dict[int, object] = {}
            for term in terms:
                try:
                    k, c = term
                    row[pos[k]] = field.add(row.get(pos[k], field.zero), field(Fraction(str(c))))
                except (ValueError, KeyError, TypeError, ZeroDivisionError) as exc:
                    raise AlgebraFileError(f"bad term {term!r} in [{a}, {b}]") from exc
            brackets[(i, j)] = row
        try:
            return cls(field, basis, brackets, period, deg, data.get("name"))
        except ValueError as exc:
            raise AlgebraFileError(str(exc)) from exc

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteGradedAlgebra)
            and self.field == other.field
            and self.basis == other.basis
            and self.period == other.period
            and self.deg == other.deg
            and self.brackets == other.brackets
        )

    def __repr__(self) -> str:
        label = self.name or "algebra"
        return f"FiniteGradedAlgebra({label}, {self.field}, dim={self.dim}, N={self.period})"


def _coeff_str(field: Field, c) -> str:
    return str(field.symmetric(c))


def load_algebra(path) -> FiniteGradedAlgebra:
    return FiniteGradedAlgebra.from_json(Path(path).read_text())


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def verify_cyclic_grading(S: FiniteGradedAlgebra, deg: Sequence[int] | None = None, period: int | None = None):
    """None when [S_a, S_b] lies in S_{a+b} for all basis pairs, else a Violation."""
    N = S.period if period is None else int(period)
    degs = S.deg if deg is None else tuple(int(d) % N for d in deg)
    for (i, j) in sorted(S.brackets):
        target = (degs[i] + degs[j]) % N
        for k in sorted(S.brackets[(i, j)]):
            if degs[k] % N != target:
                return Violation(
                    "grading",
                    (i, j),
                    (S.basis[i], S.basis[j]),
                    f"[{S.basis[i]}, {S.basis[j]}] has a {S.basis[k]} term of degree {degs[k] % N}, expected {target}",
                )
    return None


def validate(S: FiniteGradedAlgebra):
    """None if Jacobi and grading hold on all basis triples, else the first Violation."""
    f = S.field
    d = S.dim
    t = S.tensor
    # B[i, j, k, :] = [[e_i, e_j], e_k]
    flat = f.matmul(t.reshape(d * d, d), t.reshape(d, d * d)).reshape(d, d, d, d)
    jac = f.reduce(flat + flat.transpose(1, 2, 0, 3) + flat.transpose(2, 0, 1, 3))
    bad = np.argwhere((jac != 0).any(axis=3))
    for i, j, k in bad:
        if i < j < k:
            return Violation(
                "jacobi",
                (int(i), int(j), int(k)),
                (S.basis[i], S.basis[j], S.basis[k]),
                "[[a,b],c] + [[b,c],a] + [[c,a],b] != 0",
            )
    return verify_cyclic_grading(S)


# ---------------------------------------------------------------------------
# loop algebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradingRemap:
    """Multiply every degree by a unit of Z/N."""

    unit: int = 1
    period: int | None = None

    def __post_init__(self):
        if self.period is not None and gcd(self.unit, self.period) != 1:
            raise ValueError(f"unit {self.unit} is not invertible modulo {self.period}")

    def for_period(self, N: int) -> "GradingRemap":
        return GradingRemap(self.unit, N)


def loop(S: FiniteGradedAlgebra, remap: GradingRemap | int = 1, max_degree: int = 20) -> GradedAlgebra:
    """The loop algebra sum_{k>0} S_k (x) t^k of the remapped grading."""
    if isinstance(remap, int):
        remap = GradingRemap(remap)
    remap = remap.for_period(S.period)  # raises when the unit is not invertible
    bad = validate(S)
    if bad is not None:
        raise ValueError(f"algebra does not validate: {bad}")
    T = S.regraded(remap)
    f = S.field
    comps = [T.component(k) for k in range(1, max_degree + 2)]
    if not comps[0]:
        raise ValueError("degree one of the loop algebra is empty")
    if T.generated_dim(comps[0]) != S.dim:
        warnings.warn(
            "the degree-one component does not generate S; the loop algebra is not generated in degree one",
            GenerationWarning,
            stacklevel=2,
        )
    gens = comps[0]
    ad: dict[int, tuple] = {}
    for n in range(1, max_degree):
        src, dst = comps[n - 1], comps[n]
        mats = []
        for g in gens:
            m = f.zeros((len(dst), len(src)))
            for c, b in enumerate(src):
                v = S.bracket(S.unit(b), S.unit(g))
                m[:, c] = v[dst]
            mats.append(m)
        ad[n] = tuple(mats)

    def product(i, a, j, b):
        ea = f.zeros(S.dim)
        eb = f.zeros(S.dim)
        ea[comps[i - 1]] = a
        eb[comps[j - 1]] = b
        return S.bracket(ea, eb)[comps[i + j - 1]]

    names = ("x", "y") if len(gens) == 2 else tuple(f"g{i}" for i in range(len(gens)))
    labels = {k: [f"{S.basis[b]}*t^{k}" for b in comps[k - 1]] for k in range(1, max_degree + 1)}
    return GradedAlgebra(
        f,
        [len(c) for c in comps[:max_degree]],
        ad,
        provenance="loop",
        generators=names,
        labels=labels,
        product=product,
        meta={
            "source": S.name or "algebra",
            "unit": remap.unit,
            "period": S.period,
            "components": [list(c) for c in comps[:max_degree]],
            "generator_basis": [S.basis[g] for g in gens],
            "finite": S,
        },
    )


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def _from_matrices(field: Field, names, mats, coords, period, deg, name) -> FiniteGradedAlgebra:
    brackets = {}
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            c = mats[i] @ mats[j] - mats[j] @ mats[i]
            row = coords(c)
            if row:
                brackets[(i, j)] = row
    return FiniteGradedAlgebra(field, names, brackets, period, deg, name)


def _unit_matrix(n, i, j):
    m = np.zeros((n, n), dtype=object)
    m[i, j] = 1
    return m


def _sl2(field: Field) -> FiniteGradedAlgebra:
    e, f_, h = _unit_matrix(2, 0, 1), _unit_matrix(2, 1, 0), _unit_matrix(2, 0, 0) - _unit_matrix(2, 1, 1)

    def coords(c):
        out = {}
        if c[0, 1]:
            out[0] = c[0, 1]
        if c[1, 0]:
            out[1] = c[1, 0]
        if c[0, 0]:
            out[2] = c[0, 0]
        return out

    return _from_matrices(field, ("e", "f", "h"), [e, f_, h], coords, 2, (1, 1, 0), "sl2")


def _sl3(field: Field) -> FiniteGradedAlgebra:
    E = lambda i, j: _unit_matrix(3, i, j)  # noqa: E731
    names = ("e1", "e2", "e3", "f1", "f2", "f3", "h1", "h2")
    mats = [E(0, 1), E(1, 2), E(0, 2), E(1, 0), E(2, 1), E(2, 0), E(0, 0) - E(1, 1), E(1, 1) - E(2, 2)]
    spots = [(0, 1), (1, 2), (0, 2), (1, 0), (2, 1), (2, 0)]

    def coords(c):
        out = {k: c[s] for k, s in enumerate(spots) if c[s]}
        # diag(a, b, -a-b) = a h1 + (a + b) h2
        a, b = c[0, 0], c[1, 1]
        if a:
            out[6] = a
        if a + b:
            out[7] = a + b
        return out

    return _from_matrices(field, names, mats, coords, 1, (0,) * 8, "sl3")


def _witt(field: Field) -> FiniteGradedAlgebra:
    p = field.characteristic
    idx = list(range(-1, p - 1))
    names = tuple(f"e{i}" for i in idx)
    brackets = {}
    for a, i in enumerate(idx):
        for b in range(a + 1, len(idx)):
            j = idx[b]
            if -1 <= i + j <= p - 2 and (j - i) % p:
                brackets[(a, b)] = {idx.index(i + j): j - i}
    return FiniteGradedAlgebra(field, names, brackets, p - 1, idx, f"witt({p})")


def catalog(name: str, field: Field | int) -> FiniteGradedAlgebra:
    """Built-in algebras: sl2 (Z/2), sl3 (trivial grading), witt = W(1;1) (Z/(p-1))."""
    if isinstance(field, int):
        field = make_field(field)
    p = field.characteristic
    if name == "sl2":
        if p == 2:
            raise ValueError("sl2 needs characteristic other than 2")
        S = _sl2(field)
    elif name == "sl3":
        if p in (2, 3):
            raise ValueError("sl3 needs characteristic other than 2 and 3")
        S = _sl3(field)
    elif name == "witt":
        if p < 5:
            raise ValueError("witt needs a prime characteristic p >= 5")
        S = _witt(field)
    else:
        raise KeyError(f"unknown catalog algebra {name!r}; choose from {', '.join(CATALOG)}")
    bad = validate(S)
    if bad is not None:
        raise AssertionError(f"catalog algebra {name} fails validation: {bad}")
    return S
