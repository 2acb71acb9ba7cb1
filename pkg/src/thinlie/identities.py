"""Fixed regression set of bracket identities used around the sandwich arguments.

Each check returns an :class:`IdentityCheck`; the CLI prints them with
``thinlie quotient --paper-identities``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import Presentation, compute_quotient, evaluate
from .freelie import Bracket, BracketExpr, Gen, Node, _bracketing, expand, left_normed, lyndon_words
from .scalar import Field, make_field

__all__ = ["IdentityCheck", "xyy_terms", "run_identities"]

X, Y = Gen("x"), Gen("y")


@dataclass
class IdentityCheck:
    name: str
    field: str
    ok: bool
    detail: str = ""


def xyy_terms(u: Node) -> tuple[BracketExpr, BracketExpr]:
    """[u,[x,y,y]] and [u,x,y,y] - 2[u,y,x,y] + [u,y,y,x]."""
    lhs = BracketExpr.of(Bracket(u, left_normed("x", "y", "y")))
    rhs = BracketExpr(
        (
            (1, left_normed(u, "x", "y", "y")),
            (-2, left_normed(u, "y", "x", "y")),
            (1, left_normed(u, "y", "y", "x")),
        )
    )
    return lhs, rhs


def _same(f: Field, a, b) -> bool:
    return f.is_zero_array(f.reduce(np.asarray(a) - np.asarray(b)))


def _xyy_expansion(f: Field, max_u: int = 5) -> IdentityCheck:
    count = 0
    for n in range(1, max_u + 1):
        for w in lyndon_words(n):
            lhs, rhs = xyy_terms(_bracketing(w))
            if expand(lhs, f).coeffs != expand(rhs, f).coeffs:
                return IdentityCheck("xyy-expansion", repr(f), False, f"fails for u = {_bracketing(w)}")
            count += 1
    return IdentityCheck("xyy-expansion", repr(f), True, f"{count} basis elements u of degree <= {max_u}")


def _yxxy(f: Field) -> IdentityCheck:
    # [yx[yx]] = [yxyx] - [yxxy] holds in the free algebra; the left side is zero
    yx = left_normed("y", "x")
    left = expand(BracketExpr.of(Bracket(yx, yx)), f)
    right = expand(BracketExpr(((1, left_normed("y", "x", "y", "x")), (-1, left_normed("y", "x", "x", "y")))), f)
    if not (left.is_zero and right.is_zero):
        return IdentityCheck("yxxy-derivation", repr(f), False, "[yxyx] != [yxxy] in the free algebra")
    L = compute_quotient(Presentation.build(f.characteristic, ["[y,x,y]"], 4))
    v = evaluate(L, "[y,x,x,y]")
    ok = f.is_zero_array(v)
    return IdentityCheck("yxxy-derivation", repr(f), ok, f"[yxxy] = 0 modulo [yxy], dim L_4 = {L.dim(4)}")


def _minus_four(f: Field) -> IdentityCheck:
    L = compute_quotient(Presentation.build(f.characteristic, ["[y,x,y]", "[y,x,x,y]", "[y,x,x,x,y]"], 6))
    a = evaluate(L, "[y,[y,x,x,x,x]]")
    b = evaluate(L, "[y,x,x,x,y,x]")
    ok = _same(f, a, f.reduce(f(-4) * b))
    return IdentityCheck("minus-four", repr(f), ok, "[y[yxxxx]] = -4[yxxxyx] modulo [yxy], [yxxy], [yxxxy]")


def _minus_four_general(f: Field) -> IdentityCheck:
    # same expansion before imposing [yxxxy] = 0; both sides are nonzero here
    L = compute_quotient(Presentation.build(f.characteristic, ["[y,x,y]", "[y,x,x,y]"], 6))
    a = evaluate(L, "[y,[y,x,x,x,x]]")
    b = evaluate(L, "-4*[y,x,x,x,y,x] + [y,x,x,x,x,y]")
    ok = _same(f, a, b)
    nonzero = not f.is_zero_array(a)
    return IdentityCheck(
        "minus-four-general",
        repr(f),
        ok and nonzero,
        "[y[yxxxx]] = -4[yxxxyx] + [yxxxxy] modulo [yxy], [yxxy]" + ("" if nonzero else " (vacuous)"),
    )


def run_identities(characteristics=(7, 0)) -> list[IdentityCheck]:
    out = []
    for p in characteristics:
        f = make_field(p)
        out.extend([_xyy_expansion(f), _yxxy(f), _minus_four(f), _minus_four_general(f)])
    return out
