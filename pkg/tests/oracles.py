"""Independent oracles for the tests.

Nothing here imports the package: the free Lie algebra is realised inside
the free associative algebra (words in x, y) and graded quotients are found
by enumerating every subspace by brute force.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import combinations, product
from math import gcd

# ---------------------------------------------------------------------------
# dimensions
# ---------------------------------------------------------------------------


def necklace_dims(n: int, k: int = 2) -> list[int]:
    """Witt's formula by a plain divisor sum."""

    def mu(m):
        res, d = 1, 2
        while d * d <= m:
            if m % d == 0:
                m //= d
                if m % d == 0:
                    return 0
                res = -res
            d += 1
        return -res if m > 1 else res

    return [sum(mu(d) * k ** (m // d) for d in range(1, m + 1) if m % d == 0) // m for m in range(1, n + 1)]


# ---------------------------------------------------------------------------
# free associative algebra
# ---------------------------------------------------------------------------


def assoc(node) -> dict[str, int]:
    """Image of a bracket tree in the free associative algebra, [a, b] = ab - ba.

    Works on any object with ``name`` (leaf) or ``left``/``right`` (bracket).
    """
    if hasattr(node, "name"):
        return {node.name: 1}
    a, b = assoc(node.left), assoc(node.right)
    out: dict[str, int] = {}
    for u, c in a.items():
        for v, d in b.items():
            out[u + v] = out.get(u + v, 0) + c * d
            out[v + u] = out.get(v + u, 0) - c * d
    return {w: c for w, c in out.items() if c}


def assoc_combination(terms) -> dict[str, int]:
    out: dict[str, int] = {}
    for c, node in terms:
        for w, d in assoc(node).items():
            out[w] = out.get(w, 0) + c * d
    return {w: c for w, c in out.items() if c}


# ---------------------------------------------------------------------------
# linear algebra mod p on dict vectors
# ---------------------------------------------------------------------------


def _reduce(v: dict, basis: list[tuple[str, dict]], p: int) -> dict:
    v = dict(v)
    for piv, b in basis:
        c = v.get(piv, 0) % p
        if c:
            for w, a in b.items():
                v[w] = (v.get(w, 0) - c * a) % p
    return {w: c for w, c in v.items() if c % p}


def _insert(v: dict, basis: list[tuple[str, dict]], p: int) -> bool:
    """Add v to an echelon basis (pivot coefficient 1); False if dependent."""
    v = _reduce(v, basis, p)
    if not v:
        return False
    piv = min(v)
    inv = pow(v[piv], -1, p)
    v = {w: c * inv % p for w, c in v.items()}
    for i, (q, b) in enumerate(basis):
        c = b.get(piv, 0)
        if c:
            nb = {w: (b.get(w, 0) - c * v.get(w, 0)) % p for w in set(b) | set(v)}
            basis[i] = (q, {w: a for w, a in nb.items() if a})
    basis.append((piv, v))
    return True


def span(vectors, p: int) -> list[tuple[str, dict]]:
    basis: list[tuple[str, dict]] = []
    for v in vectors:
        _insert(v, basis, p)
    return basis


def _add(a: dict, b: dict, p: int, s: int = 1) -> dict:
    out = dict(a)
    for w, c in b.items():
        out[w] = (out.get(w, 0) + s * c) % p
    return {w: c for w, c in out.items() if c}


def _scale(a: dict, s: int, p: int) -> dict:
    return {w: c * s % p for w, c in a.items() if c * s % p}


def commutator(a: dict, g: str, p: int) -> dict:
    """[a, g] = a g - g a in the free associative algebra."""
    out: dict = {}
    for w, c in a.items():
        out[w + g] = (out.get(w + g, 0) + c) % p
        out[g + w] = (out.get(g + w, 0) - c) % p
    return {w: c for w, c in out.items() if c}


def quotient_dims(p: int, relators, max_degree: int) -> list[int]:
    """dim F_n / I_n with I the ideal generated by ``relators`` (assoc dicts).

    I_n = [I_{n-1}, x] + [I_{n-1}, y] + (relators of degree n), all inside
    the free associative algebra.
    """
    F = span([{"x": 1}, {"y": 1}], p)
    I: list = []
    dims = [2]
    for n in range(2, max_degree + 1):
        F = span([commutator(b, g, p) for _, b in F for g in "xy"], p)
        new = [commutator(b, g, p) for _, b in I for g in "xy"]
        new += [{w: c % p for w, c in r.items() if c % p} for r in relators if len(next(iter(r))) == n]
        I = span(new, p)
        dims.append(len(F) - len(I))
    return dims


# ---------------------------------------------------------------------------
# brute-force tower enumeration
# ---------------------------------------------------------------------------


def _vectors_mod(complement: list[dict], p: int):
    """All nonzero combinations of the given vectors (with all scalars)."""
    for coeffs in product(range(p), repeat=len(complement)):
        if any(coeffs):
            v: dict = {}
            for c, b in zip(coeffs, complement):
                if c:
                    v = _add(v, b, p, c)
            yield v


def _complement(F: list[tuple[str, dict]], I: list[tuple[str, dict]], p: int) -> list[dict]:
    basis = [(q, dict(b)) for q, b in I]
    out = []
    for _, f in F:
        if _insert(f, basis, p):
            out.append(f)
    return out


def _subspaces_containing(J, Fbasis, codim: int, p: int):
    """Every U with J <= U <= F and dim F/U = codim, each exactly once."""
    comp = _complement(Fbasis, J, p)
    m = len(comp)
    if codim > m:
        return
    target = m - codim
    seen = set()
    vecs = list(_vectors_mod(comp, p))
    for subset in combinations(range(len(vecs)), target):
        U = [(q, dict(b)) for q, b in J]
        ok = True
        for i in subset:
            if not _insert(vecs[i], U, p):
                ok = False
                break
        if not ok:
            continue
        key = frozenset((q, tuple(sorted(b.items()))) for q, b in U)
        if key in seen:
            continue
        seen.add(key)
        yield U


def _covers(zs, U, Fnext_dim: int, p: int) -> bool:
    for z in zs:
        basis = [(q, dict(b)) for q, b in U]
        for g in "xy":
            _insert(commutator(z, g, p), basis, p)
        if len(basis) != Fnext_dim:
            return False
    return True


def tower_leaves(p: int, horizon: int) -> Counter:
    """Multiset of (status, dims) over all graded quotient towers.

    Starts from the free algebra through degree 2; at each degree every
    subspace U of F_{n+1} containing [I_n, L_1] with dim F_{n+1}/U <= 2 and
    [z, L_1] + U = F_{n+1} for all z in F_n outside I_n is a child.
    Codimension 0 ends a branch ("terminal").  At the horizon a branch is
    "horizon" if some codimension-1 choice one degree up still covers, else
    "pruned".
    """
    F = {1: span([{"x": 1}, {"y": 1}], p)}
    for n in range(1, horizon + 1):
        F[n + 1] = span([commutator(b, g, p) for _, b in F[n] for g in "xy"], p)
    out: Counter = Counter()

    def rec(n, I, dims):
        zs = list(_vectors_mod(_complement(F[n], I, p), p))
        J = span([commutator(b, g, p) for _, b in I for g in "xy"], p)
        if n == horizon:
            alive = any(_covers(zs, U, len(F[n + 1]), p) for U in _subspaces_containing(J, F[n + 1], 1, p))
            out[("horizon" if alive else "pruned", dims)] += 1
            return
        for c in (0, 1, 2):
            for U in _subspaces_containing(J, F[n + 1], c, p):
                if not _covers(zs, U, len(F[n + 1]), p):
                    continue
                if c == 0:
                    out[("terminal", dims + (0,))] += 1
                else:
                    rec(n + 1, U, dims + (c,))

    rec(2, [], (2, 1))
    return out


# ---------------------------------------------------------------------------
# pencils
# ---------------------------------------------------------------------------


def pencil_anisotropic_bruteforce(A, B, p: int) -> bool:
    """det(sA + tB) != 0 for every (s, t) != (0, 0) over GF(p), by enumeration."""
    for s, t in product(range(p), repeat=2):
        if (s, t) == (0, 0):
            continue
        m = [[(s * A[i][j] + t * B[i][j]) % p for j in range(2)] for i in range(2)]
        if (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % p == 0:
            return False
    return True


def frac(x) -> Fraction:
    return Fraction(x)


__all__ = [
    "necklace_dims",
    "span",
    "commutator",
    "tower_leaves",
    "pencil_anisotropic_bruteforce",
    "gcd",
]
