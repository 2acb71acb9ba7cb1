import random
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinlie.scalar import (
    RowSpace,
    SparseRowSpace,
    echelon,
    inverse,
    make_field,
    nullspace,
    quotient_map,
    rank,
    rref,
    solve,
)

PRIMES = [2, 3, 5, 7, 13, 2_147_483_647]


def test_make_field_examples():
    assert make_field(5).characteristic == 5
    assert make_field(0).is_rational
    with pytest.raises(ValueError, match="not prime"):
        make_field(4)
    with pytest.raises(ValueError):
        make_field(-3)
    with pytest.raises(ValueError):
        make_field(2**31 + 11)  # prime, but beyond the supported range


def test_canonical_scalars():
    f = make_field(7)
    assert f(-1) == 6
    assert f("3/2") == 3 * pow(2, -1, 7) % 7
    q = make_field(0)
    assert q("6/4") == Fraction(3, 2)
    with pytest.raises(ZeroDivisionError):
        f(Fraction(1, 7))


def _check_axioms(f, a, b, c):
    assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
    assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    assert f.add(a, f.neg(a)) == f.zero
    if a != f.zero:
        assert f.mul(a, f.inv(a)) == f.one
        assert f.mul(f.div(b, a), a) == b


@pytest.mark.parametrize("p", PRIMES)
@settings(max_examples=300, deadline=None)
@given(a=st.integers(), b=st.integers(), c=st.integers())
def test_gfp_axioms(p, a, b, c):
    f = make_field(p)
    _check_axioms(f, f(a), f(b), f(c))


@settings(max_examples=300, deadline=None)
@given(
    a=st.fractions(max_denominator=10**6),
    b=st.fractions(max_denominator=10**6),
    c=st.fractions(max_denominator=10**6),
)
def test_rational_axioms(a, b, c):
    f = make_field(0)
    _check_axioms(f, f(a), f(b), f(c))


@pytest.mark.parametrize("p", PRIMES + [0])
def test_axioms_bulk(p):
    # 10^4 seeded random triples per field
    f = make_field(p)
    rng = random.Random(p)
    for _ in range(10_000):
        if p:
            a, b, c = (f(rng.randrange(-(2**40), 2**40)) for _ in range(3))
        else:
            a, b, c = (Fraction(rng.randrange(-999, 1000), rng.randrange(1, 1000)) for _ in range(3))
        _check_axioms(f, a, b, c)


def test_rref_examples():
    f = make_field(5)
    m, r = rref(np.eye(2, dtype=np.int64), f)
    assert r == 2 and (m == np.eye(2)).all()
    m, r = rref(np.array([[2, 4], [1, 2]]), f)
    assert r == 1 and m.tolist() == [[1, 2], [0, 0]]
    m, r = rref(np.zeros((2, 3), dtype=np.int64), f)
    assert r == 0 and not m.any()


def test_nullspace_examples():
    f = make_field(5)
    assert nullspace(np.eye(3, dtype=np.int64), f).dim == 0
    assert nullspace(np.zeros((2, 3), dtype=np.int64), f).dim == 3
    ker = nullspace(np.array([[1, 2]]), f)
    # enumeration oracle for x + 2y = 0 over GF(5)
    sols = [(x, y) for x, y in product(range(5), repeat=2) if (x + 2 * y) % 5 == 0 and (x, y) != (0, 0)]
    assert ker.dim == 1
    assert all(ker.contains(np.array(s)) for s in sols)
    assert ker.contains(np.array([3, 1]))


def _matrices(p):
    return st.integers(1, 5).flatmap(
        lambda r: st.integers(1, 6).flatmap(
            lambda c: st.lists(st.integers(-40, 40), min_size=r * c, max_size=r * c).map(
                lambda xs: np.array(xs, dtype=object if p == 0 else np.int64).reshape(r, c)
            )
        )
    )


@pytest.mark.parametrize("p", [2, 3, 7, 0])
@settings(max_examples=150, deadline=None)
@given(data=st.data())
def test_rref_idempotent_and_rank_nullity(p, data):
    f = make_field(p)
    m = f.array(data.draw(_matrices(p)))
    r1, k1 = rref(m, f)
    r2, k2 = rref(r1, f)
    assert k1 == k2 and (r1 == r2).all()
    ker = nullspace(m, f)
    assert rank(m, f) + ker.dim == m.shape[1]
    for v in ker.basis:
        assert f.is_zero_array(f.matmul(m, np.asarray(v)))


@pytest.mark.parametrize("p", [3, 0])
@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_solve_and_inverse(p, data):
    f = make_field(p)
    m = f.array(data.draw(_matrices(p)))
    x = f.array(np.array(data.draw(st.lists(st.integers(-9, 9), min_size=m.shape[1], max_size=m.shape[1])), dtype=object))
    b = f.matmul(m, x)
    sol = solve(m, b, f)
    assert sol is not None
    assert (f.matmul(m, sol) == b).all()
    if m.shape[0] == m.shape[1] and rank(m, f) == m.shape[0]:
        inv = inverse(m, f)
        assert (f.matmul(inv, m) == f.identity(m.shape[0])).all()


def test_solve_inconsistent():
    f = make_field(7)
    assert solve(np.array([[1, 1], [2, 2]]), np.array([1, 0]), f) is None


def test_rowspace_canonical():
    f = make_field(7)
    a = RowSpace.span(f, 3, np.array([[1, 2, 3], [2, 4, 6], [0, 1, 1]]))
    b = RowSpace.span(f, 3, np.array([[0, 1, 1], [1, 3, 4]]))
    assert a == b and hash(a) == hash(b)
    assert a.dim == 2
    assert a.contains(np.array([1, 3, 4]))
    assert not a.contains(np.array([0, 0, 1]))
    red, piv = echelon(a.basis, f)
    assert (red == a.basis).all() and len(set(piv)) == len(piv)


def test_quotient_map_kills_rows():
    f = make_field(5)
    rows = np.array([[1, 2, 0, 4], [0, 0, 1, 3]])
    q, kept = quotient_map(rows, 4, f)
    assert q.shape == (2, 4)
    assert f.is_zero_array(f.matmul(q, rows.T))
    assert rank(q, f) == 2


@pytest.mark.parametrize("p", [2, 7, 0])
def test_sparse_rowspace_matches_dense(p):
    f = make_field(p)
    rng = np.random.default_rng(p + 1)
    vecs = [f.array(rng.integers(-3, 4, size=20).astype(object)) for _ in range(12)]
    sp = SparseRowSpace(f, 20)
    for v in vecs:
        sp.add(v)
    dense = RowSpace.span(f, 20, np.array(vecs, dtype=object))
    assert sp.dim == dense.dim
    assert sp.to_dense() == dense
    probe = f.array(rng.integers(-3, 4, size=20).astype(object))
    assert sp.contains(probe) == dense.contains(probe)
