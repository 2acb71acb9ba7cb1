import json

import numpy as np
import pytest

from oracles import assoc_combination, quotient_dims
from thinlie.engine import (
    Presentation,
    PresentationError,
    compute_quotient,
    evaluate,
    ideal_trace,
    quotient_by,
)
from thinlie.freelie import Bracket, BracketExpr, Gen, LinComb, ParseError, _bracketing, expand, lyndon_words, parse, witt_dimension
from thinlie.identities import xyy_terms
from thinlie.loop import catalog, loop
from thinlie.scalar import RowSpace, make_field, rank

WITT = [witt_dimension(n) for n in range(1, 17)]
REGRESSION = ["[y,x,y]", "[y,x,x,y]", "[y,x,x,x,y]"]


def Q(char, rels, m):
    return compute_quotient(Presentation.build(char, rels, m))


def test_examples():
    assert Q(5, [], 10).dims == tuple(WITT[:10])
    assert Q(5, ["[x,y]"], 6).dims == (2, 0, 0, 0, 0, 0)
    assert Q(5, ["[y,x,y]", "[y,x,x]"], 6).dims == (2, 1, 0, 0, 0, 0)


def test_free_dims_to_cap():
    assert Q(2, [], 16).dims == tuple(WITT)


@pytest.mark.parametrize(
    "char,rels",
    [
        (7, REGRESSION),
        (0, REGRESSION),
        (2, ["[x,y,y]", "[x,y,x,x,x]"]),
        (3, ["[y,x,y]", "[x,y,x,x,x] - [x,y,y,y,x]"]),
        (5, ["[[x,y],[x,y,y]]", "2*[x,y,x,x] + [x,y,y,y]"]),
    ],
)
def test_dims_match_associative_oracle(char, rels):
    m = 8
    L = Q(char, rels, m)
    p = char or 1_000_003  # a large prime stands in for the rationals at this size
    oracle = quotient_dims(p, [assoc_combination(parse(r).terms) for r in rels], m)
    assert list(L.dims) == oracle


@pytest.mark.parametrize("char", [2, 7, 0])
def test_matches_ideal_closure(char):
    pres = Presentation.build(char, REGRESSION + ["[x,y,x,x,x,x,y]"], 12)
    assert list(compute_quotient(pres).dims) == ideal_trace(pres).quotient_dims()


def test_monotone_consistency():
    big = Q(7, ["[y,x,y]", "[y,x,x,y]"], 11)
    for m in (3, 6, 9):
        small = Q(7, ["[y,x,y]", "[y,x,x,y]"], m)
        assert small.dims == big.dims[:m]
        for n in range(1, m):
            for g in range(2):
                assert (small.ad_matrix(n, g) == big.ad_matrix(n, g)).all()


def test_dim_plus_ideal_is_witt():
    L = Q(3, ["[y,x,y]", "[x,y,x,x]"], 9)
    for n in range(1, 10):
        assert L.dim(n) + L.ideal(n).dim == witt_dimension(n)


def test_evaluate_kills_ideal_elements():
    f = make_field(7)
    L = Q(7, ["[y,x,y]", "[y,x,x,y]"], 9)
    rng = np.random.default_rng(3)
    for n in range(3, 10):
        I = L.ideal(n)
        if I.dim == 0:
            continue
        c = f.array(rng.integers(0, 7, size=I.dim))
        v = f.reduce(c @ I.basis)
        assert f.is_zero_array(L.evaluate(LinComb.from_vector(f, n, v)))
        # and something outside the ideal survives
        w = f.zeros(witt_dimension(n))
        w[[i for i in range(len(w)) if not I.contains(np.eye(1, len(w), i, dtype=np.int64)[0])][0]] = 1
        assert not f.is_zero_array(L.evaluate(LinComb.from_vector(f, n, w)))


def test_evaluate_free_examples():
    L = Q(5, [], 4)
    assert not evaluate(L, "[x,[y,y]]").any()
    with pytest.raises(ValueError):
        evaluate(L, "[x,y,y,y,x]")


def test_ad_matrix_examples():
    f = make_field(5)
    L = Q(5, [], 4)
    assert L.ad_matrix(1, "x").tolist() == [[0, f(-1)]]
    H = Q(5, ["[y,x,y]", "[y,x,x]"], 4)
    for g in "xy":
        assert H.ad_matrix(2, g).shape == (0, 1)
    S = loop(catalog("sl2", 7), 1, 6)
    stack = np.hstack([S.ad_matrix(2, g) for g in range(2)])
    assert S.dim(3) == 2 and rank(stack, S.field) == 2


def test_products_agree_with_evaluation():
    # grading and compatibility: [a, b] computed from the ad maps equals evaluate([a, b])
    L = Q(7, ["[y,x,y]"], 9)
    rng = np.random.default_rng(11)
    for _ in range(30):
        i, j = (int(k) for k in rng.integers(1, 5, size=2))
        a = _bracketing(lyndon_words(i)[int(rng.integers(len(lyndon_words(i))))])
        b = _bracketing(lyndon_words(j)[int(rng.integers(len(lyndon_words(j))))])
        ab = evaluate(L, BracketExpr.of(Bracket(a, b)))
        assert ab.shape == (L.dim(i + j),)
        prod = L.derived_product(i, evaluate(L, BracketExpr.of(a)), j, evaluate(L, BracketExpr.of(b)))
        assert (prod == ab).all()


@pytest.mark.parametrize("char", [7, 0])
def test_regression_identities(char):
    L = Q(char, REGRESSION, 6)
    f = L.field
    lhs = evaluate(L, "[y,[y,x,x,x,x]]")
    rhs = f.reduce(f(-4) * evaluate(L, "[y,x,x,x,y,x]"))
    assert (lhs == rhs).all()
    assert not evaluate(L, "[y,x,x,y]").any()
    # the yxxy derivation in the free algebra
    zero = expand(parse("[[y,x],[y,x]]"), f)
    diff = expand(parse("[y,x,y,x] - [y,x,x,y]"), f)
    assert zero.is_zero and diff.is_zero


@pytest.mark.parametrize("char", [7, 0])
def test_regression_identity_nonvacuous_form(char):
    # before imposing [yxxxy] = 0 both sides are nonzero
    L = Q(char, ["[y,x,y]", "[y,x,x,y]"], 6)
    lhs = evaluate(L, "[y,[y,x,x,x,x]]")
    assert lhs.any()
    assert (lhs == evaluate(L, "-4*[y,x,x,x,y,x] + [y,x,x,x,x,y]")).all()


@pytest.mark.parametrize("char", [7, 0])
def test_xyy_operator_identity(char):
    f = make_field(char)
    L = Q(char, [], 11)
    rng = np.random.default_rng(char + 5)
    for _ in range(40):
        n = int(rng.integers(1, 9))
        words = lyndon_words(n)
        picks = rng.choice(len(words), size=min(3, len(words)), replace=False)
        coeffs = [int(c) for c in rng.integers(-5, 6, size=len(picks))]
        for c, k in zip(coeffs, picks):
            lhs, rhs = xyy_terms(_bracketing(words[int(k)]))
            assert (evaluate(L, lhs) == evaluate(L, rhs)).all()
        # linear combinations u = sum c_k b_k
        u_terms = [(c, _bracketing(words[int(k)])) for c, k in zip(coeffs, picks)]
        lhs_sum = f.zeros(L.dim(n + 3))
        rhs_sum = f.zeros(L.dim(n + 3))
        for c, node in u_terms:
            lhs, rhs = xyy_terms(node)
            lhs_sum = f.reduce(lhs_sum + f(c) * evaluate(L, lhs))
            rhs_sum = f.reduce(rhs_sum + f(c) * evaluate(L, rhs))
        assert (lhs_sum == rhs_sum).all()


def test_quotient_by_examples():
    f = make_field(5)
    L = Q(5, [], 8)
    assert quotient_by(L, 3, RowSpace.zero(f, 2)).dims == L.dims
    full = quotient_by(L, 3, RowSpace.full(f, 2))
    assert full.dims[:3] == (2, 1, 0) and not any(full.dims[3:])
    cut = quotient_by(L, 3, np.array([evaluate(L, "[x,y,y]")]))
    assert cut.dims == Q(5, ["[x,y,y]"], 8).dims
    assert cut.dims[:3] == (2, 1, 1)
    with pytest.raises(ValueError):
        quotient_by(L, 3, RowSpace.zero(f, 3))


def test_presentation_validation(monkeypatch):
    with pytest.raises(PresentationError, match="degree-1"):
        Presentation.build(5, [BracketExpr.of(Gen("x"))], 5)
    with pytest.raises(ParseError) as info:
        Presentation.from_json({"char": 5, "relators": ["[x,y"], "max_degree": 4})
    assert info.value.position == 4
    with pytest.raises(PresentationError):
        Presentation.build(4, [], 5)
    with pytest.raises(PresentationError):
        Presentation.from_json({"char": 5, "relators": [], "max_degree": 4, "extra": 1})
    with pytest.raises(PresentationError):
        Presentation.from_json({"char": 5, "relators": [], "max_degree": "4"})
    with pytest.raises(PresentationError, match="cap"):
        Presentation.build(5, [], 17)
    monkeypatch.setenv("THINLIE_DEGREE_CAP", "18")
    Presentation.build(5, [], 17)
    monkeypatch.setenv("THINLIE_DEGREE_CAP", "8")
    with pytest.raises(PresentationError):
        Presentation.build(5, [], 9)


def test_presentation_json_roundtrip():
    pres = Presentation.build(7, REGRESSION, 9)
    again = Presentation.from_json(json.dumps(pres.to_json()))
    assert again.to_json() == pres.to_json()
    assert compute_quotient(again).dims == compute_quotient(pres).dims
