"""Positively graded Lie algebras generated in degree one, held degree by degree.

A :class:`GradedAlgebra` knows the dimension of each component ``L_n`` up to
its horizon and, for every generator ``g`` (a basis vector of ``L_1``), the
matrix of ``ad g : L_n -> L_{n+1}``.  Everything else (products of arbitrary
elements, evaluation of bracket expressions) is derived from those maps.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .freelie import Bracket, Gen, Node, _as_expr
from .scalar import Field, solve

__all__ = ["GradedAlgebra", "DegreeError"]


class DegreeError(ValueError):
    """A degree outside the computed horizon was requested."""


def _frozen(a):
    if isinstance(a, np.ndarray):
        a.flags.writeable = False
    return a


class GradedAlgebra:
    """L = L_1 + ... + L_H with the adjoint maps of the generators.

    ``ad[n][g]`` is the (dim L_{n+1}) x (dim L_n) matrix of v -> [v, g] for
    n < H.  Matrices may be held sparse (free components) and are densified
    on request.
    """

    def __init__(
        self,
        field: Field,
        dims: Sequence[int],
        ad: dict[int, Sequence],
        *,
        provenance: str,
        generators: Sequence[str] = ("x", "y"),
        labels: dict[int, Sequence[str]] | None = None,
        product: Callable | None = None,
        meta: dict | None = None,
    ):
        self.field = field
        self.dims = tuple(int(d) for d in dims)
        self.max_degree = len(self.dims)
        self.generators = tuple(generators)
        self.provenance = provenance
        self._ad = {n: tuple(_frozen(m) for m in mats) for n, mats in ad.items()}
        self._labels = dict(labels or {})
        self._product = product
        self.meta = dict(meta or {})
        self._dense_cache: dict[tuple[int, int], np.ndarray] = {}
        self._ad_basis: dict[int, list] = {}
        if self.dims and self.dims[0] != len(self.generators):
            raise ValueError("dim L_1 must equal the number of generators")

    # -- basic shape ---------------------------------------------------------
    def dim(self, n: int) -> int:
        if n < 1:
            raise DegreeError(f"degree {n} is not positive")
        if n > self.max_degree:
            raise DegreeError(f"degree {n} beyond horizon {self.max_degree}")
        return self.dims[n - 1]

    @property
    def diamonds(self) -> list[int]:
        return [n for n, d in enumerate(self.dims, start=1) if d == 2]

    def labels(self, n: int) -> list[str]:
        if n in self._labels:
            return list(self._labels[n])
        return [f"b{n}_{i}" for i in range(self.dim(n))]

    def _gen_index(self, g) -> int:
        if isinstance(g, str):
            if g not in self.generators:
                raise ValueError(f"unknown generator {g!r}")
            return self.generators.index(g)
        g = int(g)
        if not 0 <= g < len(self.generators):
            raise ValueError(f"generator index {g} out of range")
        return g

    def ad_matrix(self, n: int, g) -> np.ndarray:
        """Matrix of ad g restricted to L_n (shape dim L_{n+1} x dim L_n)."""
        gi = self._gen_index(g)
        if n < 1 or n >= self.max_degree:
            raise DegreeError(f"ad maps exist for 1 <= n < {self.max_degree}, got {n}")
        key = (n, gi)
        hit = self._dense_cache.get(key)
        if hit is not None:
            return hit
        m = self._ad[n][gi]
        if sp.issparse(m):
            m = self.field.array(m.toarray())
            m.flags.writeable = False
            self._dense_cache[key] = m
        return m

    def ad_vector(self, n: int, v) -> np.ndarray:
        """Matrix of ad v on L_n for v in L_1 given in generator coordinates."""
        v = np.asarray(v).reshape(-1)
        out = self.field.zeros((self.dim(n + 1), self.dim(n)))
        for gi, c in enumerate(v):
            if c != 0:
                out = self.field.reduce(out + c * self.ad_matrix(n, gi))
        return out

    def raw_ad(self, n: int, g):
        return self._ad[n][self._gen_index(g)]

    def unit(self, n: int, i: int) -> np.ndarray:
        v = self.field.zeros(self.dim(n))
        v[i] = self.field.one
        return v

    def truncate(self, m: int) -> "GradedAlgebra":
        if m > self.max_degree:
            raise DegreeError(f"cannot truncate to {m} beyond horizon {self.max_degree}")
        return GradedAlgebra(
            self.field,
            self.dims[:m],
            {n: mats for n, mats in self._ad.items() if n < m},
            provenance=self.provenance,
            generators=self.generators,
            labels={n: l for n, l in self._labels.items() if n <= m},
            product=self._product,
            meta=self.meta,
        )

    # -- derived products ----------------------------------------------------
    def right_multiply(self, n: int, v, node: Node) -> tuple[int, np.ndarray]:
        """[v, node] for v in L_n, unfolding [v, [a, b]] = [[v, a], b] - [[v, b], a]."""
        f = self.field
        if isinstance(node, Gen):
            if n >= self.max_degree:
                raise DegreeError(f"product lands in degree {n + 1} beyond horizon {self.max_degree}")
            return n + 1, f.matmul(self.ad_matrix(n, node.name), np.asarray(v))
        d1, t1 = self.right_multiply(n, v, node.left)
        d1, t1 = self.right_multiply(d1, t1, node.right)
        d2, t2 = self.right_multiply(n, v, node.right)
        d2, t2 = self.right_multiply(d2, t2, node.left)
        return d1, f.reduce(t1 - t2)

    def evaluate_recursive(self, e) -> np.ndarray:
        """Image of a bracket expression computed purely from the ad maps."""
        expr = _as_expr(e)
        n = expr.degree
        if n > self.max_degree:
            raise DegreeError(f"degree {n} beyond horizon {self.max_degree}")
        f = self.field
        out = f.zeros(self.dim(n))
        for c, node in expr.terms:
            leftmost, rest = _split_leftmost(node)
            v = self.unit(1, self._gen_index(leftmost.name))
            d = 1
            for r in rest:
                d, v = self.right_multiply(d, v, r)
            out = f.reduce(out + f(c) * v)
        return out

    def preimage(self, n: int, v) -> list[np.ndarray]:
        """Vectors c_g in L_{n-1} with v = sum_g [c_g, g]."""
        if n < 2:
            raise DegreeError("only components of degree >= 2 are products")
        f = self.field
        stack = np.hstack([self.ad_matrix(n - 1, g) for g in range(len(self.generators))])
        sol = solve(stack, np.asarray(v), f)
        if sol is None:
            raise ValueError(f"L_{n} is not generated by products from L_{n - 1}")
        d = self.dim(n - 1)
        return [sol[g * d : (g + 1) * d] for g in range(len(self.generators))]

    def ad_basis(self, j: int) -> list[dict[int, np.ndarray]]:
        """For each basis vector b of L_j, ad b as matrices L_i -> L_{i+j}.

        Uses the direct product when one is available, otherwise
        ad [c, g] = ad g ad c - ad c ad g with c from a preimage of b.
        """
        hit = self._ad_basis.get(j)
        if hit is not None:
            return hit
        f = self.field
        top = self.max_degree - j
        out: list[dict[int, np.ndarray]] = []
        if j == 1:
            out = [{i: self.ad_matrix(i, g) for i in range(1, top + 1)} for g in range(len(self.generators))]
        elif self._product is not None:
            for a in range(self.dim(j)):
                b = self.unit(j, a)
                mats = {}
                for i in range(1, top + 1):
                    m = f.zeros((self.dim(i + j), self.dim(i)))
                    for c in range(self.dim(i)):
                        m[:, c] = self._product(i, self.unit(i, c), j, b)
                    mats[i] = m
                out.append(mats)
        else:
            lower = self.ad_basis(j - 1)
            for a in range(self.dim(j)):
                parts = self.preimage(j, self.unit(j, a))
                mats = {i: f.zeros((self.dim(i + j), self.dim(i))) for i in range(1, top + 1)}
                for gi, c in enumerate(parts):
                    for s, coef in enumerate(c):
                        if coef == 0:
                            continue
                        low = lower[s]
                        for i in range(1, top + 1):
                            term = f.matmul(self.ad_matrix(i + j - 1, gi), low[i]) - f.matmul(
                                low[i + 1], self.ad_matrix(i, gi)
                            )
                            mats[i] = f.reduce(mats[i] + coef * term)
                out.append(mats)
        self._ad_basis[j] = out
        return out

    def ad_operator(self, j: int, b) -> dict[int, np.ndarray]:
        """ad b as matrices L_i -> L_{i+j} for every i with i + j <= horizon."""
        f = self.field
        b = np.asarray(b).reshape(-1)
        basis = self.ad_basis(j)
        out = {}
        for i in range(1, self.max_degree - j + 1):
            m = f.zeros((self.dim(i + j), self.dim(i)))
            for coef, mats in zip(b, basis):
                if coef != 0:
                    m = f.reduce(m + coef * mats[i])
            out[i] = m
        return out

    def product(self, i: int, a, j: int, b) -> np.ndarray:
        """[a, b] for a in L_i, b in L_j."""
        if i + j > self.max_degree:
            raise DegreeError(f"product lands in degree {i + j} beyond horizon {self.max_degree}")
        if self._product is not None:
            return self._product(i, np.asarray(a), j, np.asarray(b))
        return self.field.matmul(self.ad_operator(j, b)[i], np.asarray(a))

    def derived_product(self, i: int, a, j: int, b) -> np.ndarray:
        """[a, b] from the generator ad maps only, ignoring any direct product."""
        return self.field.matmul(self.ad_operator(j, b)[i], np.asarray(a))

    def __repr__(self) -> str:
        return f"GradedAlgebra({self.provenance}, {self.field}, dims={self.dims})"


def _split_leftmost(node: Node) -> tuple[Gen, list[Node]]:
    rest: list[Node] = []
    while isinstance(node, Bracket):
        rest.append(node.right)
        node = node.left
    return node, list(reversed(rest))
