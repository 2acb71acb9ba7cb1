"""Thin-algebra diagnostics: covering, diamonds, the centralizer element y, sandwiches.

Every verdict is exact and refers to a finite horizon H: covering is checked
for degrees n < H, and a statement about [L_i y y] is only made when i + 2 <= H.
Over the rationals the two-dimensional covering question reduces to whether a
binary quadratic form has a rational zero; the remaining higher-dimensional
cases are reported as undecided rather than guessed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field as dc_field
from fractions import Fraction
from itertools import product as iproduct
from math import isqrt

import numpy as np

from .graded import GradedAlgebra
from .scalar import Field, nullspace, rank

__all__ = [
    "CoveringResult",
    "ThinVerdict",
    "CentralizerResult",
    "SandwichResult",
    "SuiteItem",
    "AnalysisReport",
    "check_covering",
    "pencil_anisotropy",
    "is_thin",
    "classify_second_diamond",
    "second_diamond",
    "centralizer_y",
    "sandwich_check",
    "square_zero_elements",
    "property_suite",
    "analyze",
    "projective_points",
]

OK, FAIL, UNDECIDED = "ok", "fail", "undecided"
PASS, NA = "pass", "n/a"


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def projective_points(field: Field, d: int):
    """One representative per line of GF(p)^d (first nonzero entry 1)."""
    p = field.characteristic
    for lead in range(d):
        for tail in iproduct(range(p), repeat=d - lead - 1):
            v = np.zeros(d, dtype=np.int64)
            v[lead] = 1
            v[lead + 1 :] = tail
            yield v


def _is_rational_square(x: Fraction) -> bool:
    if x < 0:
        return False
    x = Fraction(x)
    n, m = x.numerator, x.denominator
    return isqrt(n) ** 2 == n and isqrt(m) ** 2 == m


def _det2(m) -> object:
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def _binary_form_zeros(field: Field, a, b, c) -> list[tuple]:
    """Projective zeros of a s^2 + b s t + c t^2 (all points if the form is zero)."""
    if field.is_rational:
        a, b, c = Fraction(a), Fraction(b), Fraction(c)
        if a == b == c == 0:
            return [("all",)]
        out = []
        if a == 0:
            out.append((Fraction(1), Fraction(0)))
            # remaining zeros: t (b s + c t) = 0 with t = 1
            if b != 0:
                out.append((-c / b, Fraction(1)))
            return out
        disc = b * b - 4 * a * c
        if not _is_rational_square(disc):
            return []
        r = Fraction(isqrt(disc.numerator), isqrt(disc.denominator))
        roots = {(-b + r) / (2 * a), (-b - r) / (2 * a)}
        return [(s, Fraction(1)) for s in sorted(roots)]
    p = field.characteristic
    if a % p == b % p == c % p == 0:
        return [("all",)]
    out = []
    for v in projective_points(field, 2):
        s, t = int(v[0]), int(v[1])
        if (a * s * s + b * s * t + c * t * t) % p == 0:
            out.append((s, t))
    return out


def _vec(field: Field, v) -> list[str]:
    return [field.format(x) for x in np.asarray(v).reshape(-1)]


# ---------------------------------------------------------------------------
# covering and pencils
# ---------------------------------------------------------------------------

@dataclass
class CoveringResult:
    degree: int
    status: str
    witness: list | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OK


def pencil_anisotropy(maps, field: Field) -> bool:
    """True iff every nonzero a M1 + b M2 of two 2x2 maps is invertible."""
    if len(maps) != 2:
        raise ValueError("a pencil is spanned by exactly two maps")
    m1, m2 = (np.asarray(m) for m in maps)
    if m1.shape != (2, 2) or m2.shape != (2, 2):
        raise ValueError(f"pencil maps must be 2x2, got {m1.shape} and {m2.shape}")
    m1, m2 = field.array(m1), field.array(m2)
    if field.is_rational:
        a = _det2(m1)
        c = _det2(m2)
        b = _det2(m1 + m2) - a - c
        return not _binary_form_zeros(field, a, b, c)
    p = field.characteristic
    for v in projective_points(field, 2):
        m = (int(v[0]) * m1 + int(v[1]) * m2) % p
        if int(_det2(m)) % p == 0:
            return False
    return True


def _product_maps(L: GradedAlgebra, n: int) -> tuple[np.ndarray, np.ndarray]:
    return L.ad_matrix(n, 0), L.ad_matrix(n, 1)


def check_covering(L: GradedAlgebra, n: int) -> CoveringResult:
    """Is [z, L_1] = L_{n+1} for every nonzero z in L_n?"""
    if n < 1 or n >= L.max_degree:
        from .graded import DegreeError

        raise DegreeError(f"covering at degree {n} needs 1 <= n < {L.max_degree}")
    f = L.field
    d, e = L.dim(n), L.dim(n + 1)
    if d == 0:
        return CoveringResult(n, OK, reason="L_n is zero")
    first = _vec(f, L.unit(n, 0))
    if e == 0:
        return CoveringResult(n, FAIL, first, f"L_{n + 1} = 0 while L_{n} != 0 (truncates)")
    if e > len(L.generators):
        return CoveringResult(n, FAIL, first, f"dim L_{n + 1} = {e} exceeds dim L_1")
    maps = [L.ad_matrix(n, g) for g in range(len(L.generators))]
    ker = nullspace(np.vstack(maps), f)
    if ker.dim:
        return CoveringResult(n, FAIL, _vec(f, ker.basis[0]), "some z has [z, L_1] = 0")
    if e == 1:
        return CoveringResult(n, OK)
    # e == 2 == number of generators; need det [ad_x z | ad_y z] != 0 for all z
    X, Y = maps

    def image(z):
        return np.column_stack([f.matmul(X, z), f.matmul(Y, z)])

    if d == 1:
        z = L.unit(n, 0)
        if rank(image(z), f) == 2:
            return CoveringResult(n, OK)
        return CoveringResult(n, FAIL, _vec(f, z), "[z, L_1] is a proper subspace")
    if f.is_rational:
        if d > 2:
            return CoveringResult(n, UNDECIDED, reason=f"dim L_{n} = {d} > 2 over the rationals")
        psi = [image(L.unit(n, i)) for i in range(2)]
        a = _det2(psi[0])
        c = _det2(psi[1])
        b = _det2(psi[0] + psi[1]) - a - c
        zeros = _binary_form_zeros(f, a, b, c)
        if not zeros:
            return CoveringResult(n, OK)
        z0 = zeros[0]
        wit = (1, 0) if z0 == ("all",) else z0
        return CoveringResult(n, FAIL, _vec(f, f.array(list(wit))), "determinant form has a rational zero")
    for z in projective_points(f, d):
        if rank(image(z), f) < 2:
            return CoveringResult(n, FAIL, _vec(f, z), "[z, L_1] is a proper subspace")
    return CoveringResult(n, OK)


@dataclass
class ThinVerdict:
    thin: bool
    status: str  # "thin", "not thin", "undecided"
    horizon: int
    failure_degree: int | None = None
    reason: str = ""
    maximal_class_like: bool = False
    failures: list[CoveringResult] = dc_field(default_factory=list)


def is_thin(L: GradedAlgebra, max_degree: int | None = None, *, all_failures: bool = False) -> ThinVerdict:
    """dim L_1 = 2 and covering at every degree below the horizon."""
    H = L.max_degree if max_degree is None else min(max_degree, L.max_degree)
    if L.dim(1) != 2:
        return ThinVerdict(False, "not thin", H, 1, f"dim L_1 = {L.dim(1)}")
    failures = []
    undecided = None
    for n in range(1, H):
        r = check_covering(L, n)
        if r.status == FAIL:
            failures.append(r)
            if not all_failures:
                break
        elif r.status == UNDECIDED and undecided is None:
            undecided = r
    mcl = not any(d == 2 for d in L.dims[1:H])
    if failures:
        first = failures[0]
        return ThinVerdict(False, "not thin", H, first.degree, first.reason, mcl, failures)
    if undecided is not None:
        return ThinVerdict(False, "undecided", H, undecided.degree, undecided.reason, mcl)
    reason = "maximal-class-like within horizon" if mcl else ""
    return ThinVerdict(True, "thin", H, None, reason, mcl)


# ---------------------------------------------------------------------------
# second diamond
# ---------------------------------------------------------------------------

def _prime_power_exponent(q: int, p: int) -> int | None:
    if q < p:
        return None
    m = 0
    while q % p == 0:
        q //= p
        m += 1
    return m if q == 1 else None


def classify_second_diamond(k: int, characteristic: int) -> tuple[str, int | None]:
    """Tag of k among 3, 5, q, 2q-1 (q a power of p), else VIOLATION."""
    p = characteristic
    if k == 3:
        return "3", None
    if p != 2 and k == 5:
        return "5", None
    if p:
        if p != 2 and _prime_power_exponent(k, p):
            return "q", k
        if (k + 1) % 2 == 0 and _prime_power_exponent((k + 1) // 2, p):
            return "2q-1", (k + 1) // 2
    return "VIOLATION", None


def second_diamond(L: GradedAlgebra, max_degree: int | None = None):
    """(k, tag, q) for the least diamond past L_1, or None within the horizon."""
    H = L.max_degree if max_degree is None else min(max_degree, L.max_degree)
    for n in range(2, H + 1):
        if L.dim(n) == 2:
            tag, q = classify_second_diamond(n, L.field.characteristic)
            return n, tag, q
    return None


# ---------------------------------------------------------------------------
# y and sandwiches
# ---------------------------------------------------------------------------

@dataclass
class CentralizerResult:
    status: str  # "ok", "centralizer is zero", "centralizer is all of L_1", "not applicable"
    y: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK


def centralizer_y(L: GradedAlgebra) -> CentralizerResult:
    """Spanning vector of C_{L_1}(L_2), first nonzero coordinate 1."""
    if L.max_degree < 3 or L.dim(1) != 2 or L.dim(2) != 1:
        return CentralizerResult("not applicable")
    f = L.field
    b = L.unit(2, 0)
    m = np.column_stack([f.matmul(L.ad_matrix(2, g), b) for g in range(2)])
    ker = nullspace(m, f)
    if ker.dim == 0:
        return CentralizerResult("centralizer is zero")
    if ker.dim == 2:
        return CentralizerResult("centralizer is all of L_1")
    return CentralizerResult(OK, np.array(ker.basis[0]))


@dataclass
class SandwichResult:
    horizon: int
    failures: list[int]
    triple_failures: list[tuple[int, int, int]] = dc_field(default_factory=list)
    triple_checked: bool = False

    @property
    def empty(self) -> bool:
        return not self.failures


def _ad_y(L: GradedAlgebra, y, H: int) -> dict[int, np.ndarray]:
    return {i: L.ad_vector(i, y) for i in range(1, H)}


def sandwich_check(L: GradedAlgebra, y, max_degree: int | None = None, *, triple: bool | None = None) -> SandwichResult:
    """Degrees i with [L_i y y] != 0, for i + 2 <= horizon.

    In characteristic two (or when ``triple`` is set) also checks
    (ad y)(ad z)(ad y) = 0 for every basis vector z of every component.
    """
    H = L.max_degree if max_degree is None else min(max_degree, L.max_degree)
    f = L.field
    y = np.asarray(y).reshape(-1)
    Y = _ad_y(L, y, H)
    failures = [i for i in range(1, H - 1) if not f.is_zero_array(f.matmul(Y[i + 1], Y[i]))]
    do_triple = f.characteristic == 2 if triple is None else triple
    tri: list[tuple[int, int, int]] = []
    if do_triple:
        # u in L_i:  [[[u, y], z], y] with z in L_j, landing in degree i + j + 2
        for j in range(1, H - 2):
            for a, mats in enumerate(L.ad_basis(j)):
                for i in range(1, H - j - 1):
                    m = f.matmul(Y[i + j + 1], f.matmul(mats[i + 1], Y[i]))
                    if not f.is_zero_array(m):
                        tri.append((i, j, a))
    return SandwichResult(H, failures, tri, do_triple)


def square_zero_elements(L: GradedAlgebra, max_degree: int | None = None) -> list[list]:
    """Projective points v of L_1 with (ad v)^2 = 0 on every L_i, i + 2 <= horizon.

    Exact over both kinds of field: every entry of (ad v)^2 is a binary
    quadratic form in the coordinates of v.
    """
    H = L.max_degree if max_degree is None else min(max_degree, L.max_degree)
    f = L.field
    if L.dim(1) != 2:
        raise ValueError("needs dim L_1 = 2")
    forms = []
    for i in range(1, H - 1):
        X0, Y0 = L.ad_matrix(i, 0), L.ad_matrix(i, 1)
        X1, Y1 = L.ad_matrix(i + 1, 0), L.ad_matrix(i + 1, 1)
        a = f.matmul(X1, X0)
        b = f.reduce(f.matmul(X1, Y0) + f.matmul(Y1, X0))
        c = f.matmul(Y1, Y0)
        for idx in np.ndindex(a.shape):
            if a[idx] != 0 or b[idx] != 0 or c[idx] != 0:
                forms.append((a[idx], b[idx], c[idx]))
    if not forms:
        if f.is_rational:
            return [["all"]]
        return [_vec(f, v) for v in projective_points(f, 2)]
    cands = _binary_form_zeros(f, *forms[0])
    out = []
    for z in cands:
        s, t = z
        if all(f.reduce(np.array([f(a) * s * s + f(b) * s * t + f(c) * t * t]))[0] == 0 for a, b, c in forms):
            out.append(_vec(f, f.array([s, t])))
    return out


# ---------------------------------------------------------------------------
# the property suite
# ---------------------------------------------------------------------------

@dataclass
class SuiteItem:
    id: str
    status: str
    witness: str = ""

    def as_dict(self) -> dict:
        return {"id": self.id, "status": self.status, "witness": self.witness}


SUITE_IDS = ("a", "b", "c", "d", "e", "f", "g", "h", "uxyy")


def property_suite(L: GradedAlgebra, max_degree: int | None = None, *, thin: ThinVerdict | None = None) -> list[SuiteItem]:
    """Structural checks over the horizon; N.A. whenever hypotheses fail."""
    H = L.max_degree if max_degree is None else min(max_degree, L.max_degree)
    f = L.field
    p = f.characteristic
    thin = thin or is_thin(L, H)

    def na(reason):
        return [SuiteItem(i, NA, reason) for i in SUITE_IDS]

    if not thin.thin:
        return na(f"not thin within horizon {H}: {thin.reason}")
    if H < 3 or L.dim(3) != 1:
        return na("dim L_3 != 1, no distinguished y")
    cen = centralizer_y(L)
    if not cen.ok:
        return [SuiteItem(i, FAIL if i == "a" else NA, f"thin with dim L_3 = 1 but {cen.status}") for i in SUITE_IDS]
    y = cen.y
    dims = {n: L.dim(n) for n in range(1, H + 1)}
    Y = _ad_y(L, y, H)
    ker = {i: Y[i].shape[1] - rank(Y[i], f) for i in range(1, H)}
    sq = {i: not f.is_zero_array(f.matmul(Y[i + 1], Y[i])) for i in range(1, H - 1)}
    bad_sq = [i for i, v in sq.items() if v]
    items: list[SuiteItem] = []

    def verdict(id_, fails):
        items.append(SuiteItem(id_, FAIL, "; ".join(fails)) if fails else SuiteItem(id_, PASS))

    # (a) one of any two consecutive components has a nonzero element killed by y
    verdict("a", [f"degrees {i},{i + 1}" for i in range(1, H - 1) if ker[i] == 0 and ker[i + 1] == 0])

    # (b) a diamond L_j, j > 1: dim L_{j-1} = 1, [L_{j-1} y y] = 0, and L_j meets ker ad y
    fails = []
    for j in range(2, H + 1):
        if dims[j] != 2:
            continue
        if dims[j - 1] != 1:
            fails.append(f"j={j}: dim L_{j - 1} = {dims[j - 1]}")
        if j + 1 <= H:
            if sq.get(j - 1):
                fails.append(f"j={j}: [L_{j - 1}yy] != 0")
            if ker[j] == 0:
                fails.append(f"j={j}: no element of L_{j} centralized by y")
    verdict("b", fails)

    # (c) [L_j y y] != 0 only on diamonds
    verdict("c", [f"j={j}: dim L_j = {dims[j]}" for j in bad_sq if dims[j] != 2])

    # (d) at the least such j: L_{j-2}, L_{j-3} one-dimensional and centralized by y
    fails = []
    if bad_sq:
        j = bad_sq[0]
        for m in (j - 2, j - 3):
            if m < 1:
                fails.append(f"j={j}: degree {m} does not exist")
            elif dims[m] != 1 or not f.is_zero_array(Y[m]):
                fails.append(f"j={j}: L_{m} has dim {dims[m]} or is not centralized by y")
    verdict("d", fails)

    # (e) no two consecutive diamonds
    verdict("e", [f"{j},{j + 1}" for j in range(1, H) if dims[j] == 2 and dims[j + 1] == 2])

    # (f) characteristic two
    if p == 2:
        verdict("f", [f"[L_{i}yy] != 0" for i in bad_sq])
    else:
        items.append(SuiteItem("f", NA, "characteristic is not two"))

    # (g) dim L_3 = dim L_5 = 1 away from characteristic two
    if p == 2:
        items.append(SuiteItem("g", NA, "characteristic two"))
    elif H < 5 or dims[5] != 1:
        items.append(SuiteItem("g", NA, "dim L_5 != 1" if H >= 5 else "horizon below 5"))
    else:
        verdict("g", [f"[L_{i}yy] != 0" for i in bad_sq])

    # (h) characteristic five, dim L_5 = 2 and [L_7 y] = 0
    if p != 5:
        items.append(SuiteItem("h", NA, "characteristic is not five"))
    elif H < 8 or dims[5] != 2 or not f.is_zero_array(Y[7]):
        items.append(SuiteItem("h", NA, "needs dim L_5 = 2 and [L_7 y] = 0 within horizon"))
    else:
        verdict("h", [f"[L_{i}yy] != 0" for i in bad_sq])

    # uxyy: [L_i y] != 0 and some nonzero u in L_{i-1} with [u y] = 0
    fails = []
    for i in range(2, H):
        if f.is_zero_array(Y[i]) or ker[i - 1] == 0:
            continue
        if dims[i] != 1:
            fails.append(f"i={i}: dim L_i = {dims[i]}")
        if i + 2 <= H:
            if sq[i]:
                fails.append(f"i={i}: [L_i yy] != 0")
            if dims[i + 2] != 1:
                fails.append(f"i={i}: dim L_(i+2) = {dims[i + 2]}")
    verdict("uxyy", fails)
    order = {k: n for n, k in enumerate(SUITE_IDS)}
    return sorted(items, key=lambda it: order[it.id])


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

@dataclass
class AnalysisReport:
    field: str
    horizon: int
    dims: list[int]
    thin: str
    thin_reason: str
    diamonds: list[int]
    k: int | None
    tag: str | None
    q: int | None
    centralizer: str
    y: list[str] | None
    y_label: str | None
    sandwich_failures: list[int]
    triple_failures: list[list[int]]
    covering_failures: list[dict]
    suite: list[dict]
    provenance: str = ""

    @property
    def suite_failed(self) -> bool:
        return any(item["status"] == FAIL for item in self.suite)

    def to_json(self) -> dict:
        out = asdict(self)
        out["failures"] = {
            "sandwich": self.sandwich_failures,
            "triple": self.triple_failures,
            "covering": self.covering_failures,
        }
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_text(self) -> str:
        lines = [
            f"field: {self.field}   horizon: {self.horizon}   provenance: {self.provenance}",
            "dims:  " + " ".join(f"{n}:{d}" for n, d in enumerate(self.dims, start=1)),
            f"thin:  {self.thin}" + (f" ({self.thin_reason})" if self.thin_reason else ""),
            "diamonds: " + (", ".join(map(str, self.diamonds)) or "none"),
        ]
        if self.k is not None:
            extra = f", q={self.q}" if self.q else ""
            lines.append(f"second diamond: k={self.k} tag {self.tag}{extra}")
        else:
            lines.append("second diamond: none within horizon")
        if self.y is not None:
            lines.append(f"y: ({', '.join(self.y)})" + (f" = {self.y_label}" if self.y_label else ""))
        else:
            lines.append(f"y: {self.centralizer}")
        if self.y is not None:
            if self.sandwich_failures:
                lines.append("[L_i y y] != 0 for i in " + ", ".join(map(str, self.sandwich_failures)))
            else:
                lines.append(f"sandwich confirmed: [L y y] = 0 through degree {self.horizon}")
            if self.triple_failures:
                i, j, a = self.triple_failures[0]
                lines.append(f"note: (ad y)(ad z)(ad y) != 0 on L_{i} for z = basis {a} of L_{j} (not claimed in characteristic two)")
        for c in self.covering_failures:
            lines.append(f"covering fails at degree {c['degree']}: {c['reason']}")
        if self.suite:
            lines.append("property suite:")
            for item in self.suite:
                w = f"  {item['witness']}" if item["witness"] else ""
                lines.append(f"  ({item['id']}) {item['status'].upper()}{w}")
        return "\n".join(lines)


def analyze(L: GradedAlgebra, max_degree: int | None = None, *, thin: ThinVerdict | None = None) -> AnalysisReport:
    """Full report; ``thin`` may be supplied when covering is already known."""
    H = L.max_degree if max_degree is None else min(max_degree, L.max_degree)
    f = L.field
    thin = thin if thin is not None else is_thin(L, H, all_failures=True)
    sd = second_diamond(L, H)
    cen = centralizer_y(L) if H >= 3 else None
    y = cen.y if cen is not None and cen.ok else None
    sand = sandwich_check(L, y, H) if y is not None else None
    y_label = None
    if y is not None:
        nz = [i for i, c in enumerate(y) if c != 0]
        if len(nz) == 1 and y[nz[0]] == f.one:
            y_label = L.labels(1)[nz[0]]
    return AnalysisReport(
        field=repr(f),
        horizon=H,
        dims=list(L.dims[:H]),
        thin=thin.status,
        thin_reason=thin.reason,
        diamonds=[n for n in range(1, H + 1) if L.dim(n) == 2],
        k=sd[0] if sd else None,
        tag=sd[1] if sd else None,
        q=sd[2] if sd else None,
        centralizer=cen.status if cen is not None else "not applicable",
        y=_vec(f, y) if y is not None else None,
        y_label=y_label,
        sandwich_failures=sand.failures if sand else [],
        triple_failures=[list(t) for t in sand.triple_failures] if sand else [],
        covering_failures=[{"degree": c.degree, "witness": c.witness, "reason": c.reason} for c in thin.failures],
        suite=[it.as_dict() for it in property_suite(L, H, thin=thin)],
        provenance=L.provenance,
    )
