import json
import warnings
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from thinlie.analyze import projective_points
from thinlie.loop import (
    CATALOG,
    AlgebraFileError,
    FiniteGradedAlgebra,
    GenerationWarning,
    GradingRemap,
    catalog,
    loop,
    validate,
    verify_cyclic_grading,
)
from thinlie.scalar import make_field


def _sl2_by_matrices(p):
    # independent oracle: brackets of 2x2 matrices, read back in (e, f, h) coordinates
    e = np.array([[0, 1], [0, 0]])
    f = np.array([[0, 0], [1, 0]])
    h = np.array([[1, 0], [0, -1]])
    mats = [e, f, h]

    def coords(m):
        return [m[0, 1] % p, m[1, 0] % p, m[0, 0] % p]

    return {(i, j): coords(a @ b - b @ a) for i, a in enumerate(mats) for j, b in enumerate(mats)}


def test_sl2_constants():
    S = catalog("sl2", 7)
    ref = _sl2_by_matrices(7)
    for i, j in product(range(3), repeat=2):
        assert S.bracket(S.unit(i), S.unit(j)).tolist() == ref[(i, j)]
    e, f, h = (S.unit(i) for i in range(3))
    assert S.bracket(e, f).tolist() == h.tolist()
    assert S.bracket(h, e).tolist() == (2 * e).tolist()
    assert S.bracket(h, f).tolist() == (5 * f).tolist()


def test_witt_constants():
    S = catalog("witt", 5)
    assert S.basis == ("e-1", "e0", "e1", "e2", "e3")
    v = S.bracket(S.unit(S.index("e-1")), S.unit(S.index("e3")))
    assert v.tolist() == (4 * S.unit(S.index("e2"))).tolist()
    # [e_i, e_j] = (j - i) e_{i+j}, zero out of range
    for a, i in enumerate(range(-1, 4)):
        for b, j in enumerate(range(-1, 4)):
            want = S.field.zeros(5)
            if -1 <= i + j <= 3:
                want[i + j + 1] = (j - i) % 5
            assert S.bracket(S.unit(a), S.unit(b)).tolist() == want.tolist()


@pytest.mark.parametrize("name,char", [("sl2", 7), ("sl2", 0), ("sl2", 3), ("sl3", 5), ("sl3", 0), ("witt", 5), ("witt", 7), ("witt", 11)])
def test_catalog_validates(name, char):
    S = catalog(name, char)
    assert validate(S) is None
    assert verify_cyclic_grading(S) is None


def test_catalog_guards():
    assert CATALOG == ("sl2", "sl3", "witt")
    with pytest.raises(ValueError):
        catalog("witt", 3)
    with pytest.raises(ValueError):
        catalog("sl2", 2)
    with pytest.raises(ValueError):
        catalog("sl3", 3)
    with pytest.raises(KeyError):
        catalog("e8", 7)


def test_sl3_is_ungraded():
    S = catalog("sl3", 7)
    assert S.period == 1 and S.dim == 8


def test_perturbed_sl2_names_a_triple():
    S = catalog("sl2", 7)
    data = S.to_json()
    for entry in data["brackets"]:
        if entry[:2] == ["e", "h"]:
            entry[2] = [["e", "3"]]
    bad = validate(FiniteGradedAlgebra.from_json(data))
    assert bad is not None and bad.kind == "jacobi"
    assert set(bad.names) == {"e", "f", "h"}


def test_grading_violation_reports_pair():
    S = catalog("sl2", 7)
    bad = verify_cyclic_grading(S, deg=[1, 1, 1], period=2)
    assert bad is not None and bad.kind == "grading"
    assert bad.names == ("e", "f")


def test_loop_dims_examples():
    assert loop(catalog("sl2", 7), 1, 6).dims == (2, 1, 2, 1, 2, 1)
    W5 = loop(catalog("witt", 5), -1, 12)
    assert W5.dims == (2, 1, 1, 1, 2, 1, 1, 1, 2, 1, 1, 1)
    W7 = loop(catalog("witt", 7), -1, 14)
    assert W7.diamonds[:2] == [1, 7]


@pytest.mark.parametrize("name,char,u", [("sl2", 7, 1), ("witt", 5, -1), ("witt", 7, -1), ("witt", 11, 1)])
def test_periodicity(name, char, u):
    S = catalog(name, char)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GenerationWarning)
        L = loop(S, u, 30)
    for k in range(1, 31):
        assert L.dim(k) == sum(1 for d in S.deg if (u * d - k) % S.period == 0)


def test_remap_must_be_invertible():
    with pytest.raises(ValueError):
        loop(catalog("witt", 7), 2, 10)
    with pytest.raises(ValueError):
        GradingRemap(3, 6)


def test_empty_degree_one():
    with pytest.raises(ValueError, match="empty"):
        loop(FiniteGradedAlgebra(make_field(5), ["a", "b"], {}, 3, [0, 2]), 1, 5)


def test_generation_warning():
    # witt(7) with the identity remap puts e1 alone in degree one
    with pytest.warns(GenerationWarning):
        loop(catalog("witt", 7), 1, 10)


def test_loop_jacobi_random_triples():
    # Jacobi in the loop algebra using only the product callback
    for S, u in [(catalog("sl2", 7), 1), (catalog("witt", 7), -1), (catalog("sl2", 0), 1)]:
        L = loop(S, u, 16)
        f = L.field
        rng = np.random.default_rng(1)
        for _ in range(40):
            i, j, k = (int(t) for t in rng.integers(1, 6, size=3))
            a, b, c = (f.array(rng.integers(-3, 4, size=L.dim(d)).astype(object)) for d in (i, j, k))
            t1 = L.product(i + j, L.product(i, a, j, b), k, c)
            t2 = L.product(j + k, L.product(j, b, k, c), i, a)
            t3 = L.product(k + i, L.product(k, c, i, a), j, b)
            assert f.is_zero_array(f.reduce(t1 + t2 + t3))


def test_ad_matrices_match_product():
    L = loop(catalog("witt", 5), -1, 12)
    f = L.field
    for n in range(1, 11):
        for g in range(2):
            for i in range(L.dim(n)):
                col = L.ad_matrix(n, g)[:, i]
                assert (col == L.product(n, L.unit(n, i), 1, L.unit(1, g))).all()
    assert f.characteristic == 5


def _square_zero_in_S(S, c):
    A = S.ad(c)
    return S.field.is_zero_array(S.field.matmul(A, A))


def _square_zero_in_loop(L, y, H):
    f = L.field
    for n in range(1, H - 1):
        A = f.matmul(L.ad_vector(n + 1, y), L.ad_vector(n, y))
        if not f.is_zero_array(A):
            return False
    return True


@pytest.mark.parametrize("name,char,u", [("sl2", 7, 1), ("witt", 5, -1), ("witt", 7, -1)])
def test_sandwich_transfer(name, char, u):
    S = catalog(name, char)
    L = loop(S, u, 24)
    gens = L.meta["components"][0]
    seen = []
    for y in projective_points(L.field, 2):
        c = S.field.zeros(S.dim)
        c[gens] = y
        in_S = _square_zero_in_S(S, c)
        assert in_S == _square_zero_in_loop(L, y, 24)
        seen.append(in_S)
    # classical sl2 has none, W(1;1) has exactly one line in degree one
    assert sum(seen) == (0 if name == "sl2" else 1)


def test_algebra_json_roundtrip(tmp_path):
    for name, char in [("sl2", 7), ("witt", 5), ("sl3", 0)]:
        S = catalog(name, char)
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(S.to_json()))
        again = FiniteGradedAlgebra.from_json(path.read_text())
        assert again == S and validate(again) is None


def test_algebra_file_errors():
    data = catalog("sl2", 7).to_json()
    with pytest.raises(AlgebraFileError, match="unsupported"):
        FiniteGradedAlgebra.from_json({**data, "derivation": {}})
    with pytest.raises(AlgebraFileError):
        FiniteGradedAlgebra.from_json({**data, "colour": 1})
    with pytest.raises(AlgebraFileError):
        FiniteGradedAlgebra.from_json({**data, "brackets": [["f", "e", [["h", "1"]]]]})
    with pytest.raises(AlgebraFileError):
        FiniteGradedAlgebra.from_json({k: v for k, v in data.items() if k != "deg"})
    with pytest.raises(AlgebraFileError):
        FiniteGradedAlgebra.from_json("[1, 2]")


def test_fraction_coefficients():
    data = {
        "char": 0,
        "period": 1,
        "basis": ["a", "b", "c"],
        "deg": {"a": 0, "b": 0, "c": 0},
        "brackets": [["a", "b", [["c", "3/2"]]]],
    }
    S = FiniteGradedAlgebra.from_json(data)
    assert S.bracket(S.unit(0), S.unit(1))[2] == Fraction(3, 2)
    assert validate(S) is None
