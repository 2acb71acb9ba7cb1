"""Exhaustive search over GF(p) for graded quotients with the covering property.

A node is a presentation-built algebra known up to degree n.  Its children
come from the largest possible next component M = F_{n+1}/([I_n, x] + [I_n, y]):
every quotient M/U of dimension 0, 1 or 2 such that each nonzero z in L_n
still satisfies [z, L_1] = M/U.  Quotients are enumerated as reduced echelon
surjections R : M -> M/U, so every subspace U appears exactly once.

Coordinates at each node depend only on the ideal (basis = surviving Lyndon
words, see the engine), hence a node can always be rebuilt from its relators
and results do not depend on traversal order or on the number of workers.

A branch that reaches the horizon is looked at one degree further: if no
nonzero covering quotient exists there it can only give finite-dimensional
algebras and is marked "pruned" instead of "horizon".
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from itertools import combinations, product as iproduct
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .analyze import ThinVerdict, analyze, classify_second_diamond, projective_points
from .engine import (
    Level,
    Presentation,
    _free_level,
    apply_quotient,
    compute_quotient,
    lift,
    relator_string,
    step,
)
from .freelie import LinComb, degree_cap, lyndon_words
from .graded import GradedAlgebra
from .scalar import Field, make_field, nullspace

__all__ = [
    "ExploreConstraints",
    "BranchNode",
    "BranchTree",
    "root",
    "extend",
    "explore",
    "branch_report",
    "echelon_surjections",
    "leaf_algebra",
]

DEFAULT_BUDGET = 2_000_000
# the search is split into subtrees once the frontier reaches this size;
# fixed so that the split, and hence every budget share, ignores --jobs
FRONTIER_TARGET = 64


@dataclass(frozen=True)
class ExploreConstraints:
    horizon: int
    require_dims: tuple[tuple[int, int], ...] = ()
    second_diamond: int | None = None
    forbid_second_diamond: tuple[int, ...] = ()
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.horizon < 3:
            raise ValueError("horizon must be at least 3")
        if self.horizon > degree_cap():
            raise ValueError(f"horizon {self.horizon} exceeds the free-Lie cap {degree_cap()}")
        for d, v in self.require_dims:
            if d < 1 or v < 0:
                raise ValueError(f"bad dimension requirement dim{d}={v}")
        if self.second_diamond is not None and self.second_diamond < 3:
            raise ValueError("the second diamond lies in degree 3 or later")

    @classmethod
    def parse_requirements(cls, specs: Iterable[str]) -> tuple[tuple[int, int], ...]:
        """Parse strings like ``"dim3=1"`` into (degree, dim) pairs."""
        out = []
        for s in specs:
            text = s.replace(" ", "")
            if not text.startswith("dim") or "=" not in text:
                raise ValueError(f"requirement {s!r} is not of the form dimN=D")
            left, right = text[3:].split("=", 1)
            try:
                out.append((int(left), int(right)))
            except ValueError as exc:
                raise ValueError(f"requirement {s!r} is not of the form dimN=D") from exc
        return tuple(sorted(out))

    def allowed(self, dims: tuple[int, ...]) -> bool:
        """May a branch whose dims so far are ``dims`` still satisfy the constraints?"""
        n = len(dims)
        req = dict(self.require_dims)
        for d, v in req.items():
            if d <= n and dims[d - 1] != v:
                return False
            if d > n and dims[-1] == 0 and v != 0 and d <= self.horizon:
                return False
        k = next((i for i in range(2, n + 1) if dims[i - 1] == 2), None)
        if self.second_diamond is not None:
            want = self.second_diamond
            if k is not None and k != want:
                return False
            if k is None and n >= want:
                return False
            if k is None and dims[-1] == 0 and want <= self.horizon:
                return False
        if k is not None and k in self.forbid_second_diamond:
            return False
        return True


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------

@dataclass
class BranchNode:
    """A node of the search tree; ``level`` and ``ads`` carry the algebra."""

    p: int
    degree: int
    dims: tuple[int, ...]
    relators: tuple[LinComb, ...]
    path: tuple[tuple[int, int], ...]
    level: Level
    ads: dict[int, tuple[np.ndarray, np.ndarray]]
    reps: tuple[tuple[str, ...], ...]
    status: str = "open"  # open | extended | terminal | horizon | pruned

    @property
    def field(self) -> Field:
        return make_field(self.p)

    @property
    def diamonds(self) -> list[int]:
        return [n for n, d in enumerate(self.dims, start=1) if d == 2]

    def relator_key(self) -> tuple:
        return tuple((r.degree, tuple((i, int(v)) for i, v in r.coeffs)) for r in self.relators)

    def relator_strings(self) -> list[str]:
        return [_relator_str(r) for r in self.relators]


_STR_CACHE: dict[tuple, str] = {}


def _relator_str(r: LinComb) -> str:
    key = (r.field.characteristic, r.degree, tuple((i, int(v)) for i, v in r.coeffs))
    hit = _STR_CACHE.get(key)
    if hit is None:
        hit = _STR_CACHE[key] = relator_string(r)
    return hit


def root(p: int) -> BranchNode:
    """The free algebra through degree 2."""
    f = make_field(p)
    lv1 = _free_level(1)
    lv2, ads = step(f, lv1, 2)
    dense = tuple(f.array(a.toarray()) for a in ads)
    return BranchNode(p, 2, (2, 1), (), (), lv2, {1: dense}, (lyndon_words(1), lyndon_words(2)))


def rebuild(p: int, relators: Iterable[str], degree: int, path: tuple = ()) -> BranchNode:
    """Node reached by the given relators, recomputed from scratch."""
    pres = Presentation.build(p, list(relators), degree)
    L = compute_quotient(pres)
    f = L.field
    ads = {n: tuple(f.array(L.ad_matrix(n, g)) for g in range(2)) for n in range(1, degree)}
    rels = tuple(
        r if isinstance(r, LinComb) else _as_lincomb(r, f) for r in pres.relators
    )
    return BranchNode(
        p, degree, L.dims, rels, path, L.levels[-1], ads, tuple(lv.reps for lv in L.levels)
    )


def _as_lincomb(r, f: Field) -> LinComb:
    from .freelie import expand

    return expand(r, f)


# ---------------------------------------------------------------------------
# enumeration of quotients
# ---------------------------------------------------------------------------

def echelon_surjections(p: int, c: int, m: int) -> Iterator[np.ndarray]:
    """All c x m reduced row echelon matrices of rank c over GF(p), in a fixed order."""
    if c == 0:
        yield np.zeros((0, m), dtype=np.int64)
        return
    for pivots in combinations(range(m), c):
        free = [(i, j) for i, pc in enumerate(pivots) for j in range(pc + 1, m) if j not in pivots]
        for vals in iproduct(range(p), repeat=len(free)):
            r = np.zeros((c, m), dtype=np.int64)
            for i, pc in enumerate(pivots):
                r[i, pc] = 1
            for (i, j), v in zip(free, vals):
                r[i, j] = v
            yield r


def _covering_ok(p: int, r: np.ndarray, W: np.ndarray) -> bool:
    """rank(R W_z) == rows(R) for every z; W has shape (points, m, 2)."""
    c = r.shape[0]
    if c == 0:
        return True
    img = np.einsum("im,zmk->zik", r, W) % p
    if c == 1:
        return bool(np.all((img[:, 0, :] != 0).any(axis=1)))
    det = (img[:, 0, 0] * img[:, 1, 1] - img[:, 0, 1] * img[:, 1, 0]) % p
    return bool(np.all(det != 0))


def extend(node: BranchNode, constraints: ExploreConstraints) -> list[BranchNode]:
    """Children of an open node (empty when the node sits at the horizon)."""
    if node.degree >= constraints.horizon:
        node.status = "horizon"
        return []
    f = node.field
    p = node.p
    n = node.degree + 1
    mlevel, (ax, ay) = step(f, node.level, n)
    ax = f.array(ax.toarray()) if hasattr(ax, "toarray") else ax
    ay = f.array(ay.toarray()) if hasattr(ay, "toarray") else ay
    m = mlevel.dim
    d = node.level.dim
    pts = np.array(list(projective_points(f, d)), dtype=np.int64).reshape(-1, d)
    W = np.stack([(pts @ ax.T) % p, (pts @ ay.T) % p], axis=2)  # (points, m, 2)
    children = []
    for c in range(0, min(2, m) + 1):
        dims = node.dims + (c,)
        if not constraints.allowed(dims):
            continue
        for i, r in enumerate(echelon_surjections(p, c, m)):
            path = node.path + ((c, i),)
            if not _covering_ok(p, r, W):
                continue
            ker = nullspace(r, f) if c else None
            if c == 0:
                kernel_rows = f.identity(m)
            else:
                kernel_rows = ker.basis
            new_rels = tuple(lift(mlevel, row, f) for row in kernel_rows)
            if c == m:
                clevel, cads = mlevel, (ax, ay)
            else:
                clevel, cads = apply_quotient(f, mlevel, (ax, ay), r)
            ads = dict(node.ads)
            ads[n - 1] = tuple(np.asarray(a) for a in cads)
            child = BranchNode(
                p,
                n,
                dims,
                node.relators + new_rels,
                path,
                clevel,
                ads,
                node.reps + (clevel.reps,),
                "terminal" if c == 0 else "open",
            )
            children.append(child)
    node.status = "extended"
    return children


def survives(node: BranchNode) -> bool | None:
    """Does the node admit a nonzero covering extension one degree further?

    A node without one generates only finite-dimensional algebras, so it cannot
    be the truncation of a thin algebra.  None when the next degree is past
    the free-Lie cap.
    """
    n = node.degree + 1
    if n > degree_cap() or node.level.dim == 0:
        return None if node.level.dim else False
    f = node.field
    p = node.p
    mlevel, (ax, ay) = step(f, node.level, n)
    ax = f.array(ax.toarray()) if hasattr(ax, "toarray") else ax
    ay = f.array(ay.toarray()) if hasattr(ay, "toarray") else ay
    m = mlevel.dim
    if m == 0:
        return False
    d = node.level.dim
    pts = np.array(list(projective_points(f, d)), dtype=np.int64).reshape(-1, d)
    W = np.stack([(pts @ ax.T) % p, (pts @ ay.T) % p], axis=2)
    # a covering rank-2 quotient composes to a covering rank-1 one, so rank 1 suffices
    return any(_covering_ok(p, r, W) for r in echelon_surjections(p, 1, m))


def _close(node: BranchNode) -> dict:
    """Leaf record for a node that reached the horizon."""
    node.status = "pruned" if survives(node) is False else "horizon"
    return _leaf_record(node)


# ---------------------------------------------------------------------------
# leaves and analysis
# ---------------------------------------------------------------------------

def leaf_algebra(node: BranchNode) -> GradedAlgebra:
    """The node's algebra; terminal nodes are cut at their last nonzero degree."""
    top = node.degree - 1 if node.status == "terminal" else node.degree
    f = node.field
    labels = {}
    from .freelie import _bracketing

    for k, reps in enumerate(node.reps[:top], start=1):
        labels[k] = [str(_bracketing(w)) for w in reps]
    return GradedAlgebra(
        f,
        node.dims[:top],
        {k: v for k, v in node.ads.items() if k < top},
        provenance="presentation",
        labels=labels,
        meta={"relators": node.relator_strings()},
    )


def _leaf_record(node: BranchNode) -> dict:
    L = leaf_algebra(node)
    # covering below the top degree holds by construction
    mcl = not any(d == 2 for d in L.dims[1:])
    known = ThinVerdict(True, "thin", L.max_degree, None, "maximal-class-like within horizon" if mcl else "", mcl)
    rep = analyze(L, thin=known)
    suite = rep.suite
    finite_suite = []
    if node.status in ("terminal", "pruned"):
        # finite-dimensional, hence not thin; raw verdicts kept for inspection
        why = "finite-dimensional" if node.status == "terminal" else "no covering extension beyond the horizon"
        finite_suite = suite
        suite = [{"id": item["id"], "status": "n/a", "witness": why} for item in suite]
    return {
        "path": list(node.path),
        "status": node.status,
        "relators": node.relator_strings(),
        "dims": list(node.dims),
        "diamonds": rep.diamonds,
        "k": rep.k,
        "tag": rep.tag,
        "thin": rep.thin,
        "horizon": rep.horizon,
        "y": rep.y,
        "sandwich_failures": rep.sandwich_failures,
        "suite": suite,
        "finite_suite": finite_suite,
        "_sort": node.relator_key(),
    }


@dataclass
class BranchTree:
    p: int
    constraints: ExploreConstraints
    leaves: list[dict] = dc_field(default_factory=list)
    expanded: int = 0
    partial: bool = False

    # -- aggregates ---------------------------------------------------------
    def thin_leaves(self) -> list[dict]:
        return [l for l in self.leaves if l["status"] == "horizon"]

    def observed_k(self) -> list[int]:
        return sorted({l["k"] for l in self.thin_leaves() if l["k"] is not None})

    def classification_violations(self) -> list[int]:
        return [k for k in self.observed_k() if classify_second_diamond(k, self.p)[0] == "VIOLATION"]

    def suite_failures(self) -> list[dict]:
        out = []
        for l in self.leaves:
            for item in l["suite"]:
                if item["status"] == "fail":
                    out.append({"relators": l["relators"], "item": item})
        return out

    def finite_suite_failures(self) -> list[dict]:
        """Suite failures on finite-dimensional leaves; not counterexamples, but reported."""
        return [
            {"relators": l["relators"], "dims": l["dims"], "item": item}
            for l in self.leaves
            for item in l.get("finite_suite", [])
            if item["status"] == "fail"
        ]

    def sharpness_witnesses(self) -> list[dict]:
        """Thin leaves with [L_j y y] != 0, recorded with the offending degrees."""
        return [
            {"diamonds": l["diamonds"], "sandwich_failures": l["sandwich_failures"], "relators": l["relators"]}
            for l in self.thin_leaves()
            if l["sandwich_failures"]
        ]

    def summary(self) -> dict:
        return {
            "p": self.p,
            "horizon": self.constraints.horizon,
            "leaves": len(self.leaves),
            "thin_leaves": len(self.thin_leaves()),
            "terminal_leaves": sum(1 for l in self.leaves if l["status"] == "terminal"),
            "pruned_leaves": sum(1 for l in self.leaves if l["status"] == "pruned"),
            "expanded": self.expanded,
            "partial": self.partial,
            "observed_k": self.observed_k(),
            "classification_violations": self.classification_violations(),
            "suite_failures": len(self.suite_failures()),
            "finite_suite_failures": len(self.finite_suite_failures()),
            "sharpness_witnesses": len(self.sharpness_witnesses()),
            "sandwich_on_all_thin_leaves": all(not l["sandwich_failures"] for l in self.thin_leaves()),
        }

    def jsonl(self) -> Iterator[str]:
        for l in self.leaves:
            yield json.dumps(
                {
                    "char": self.p,
                    "relators": l["relators"],
                    "dims": l["dims"],
                    "diamonds": l["diamonds"],
                    "k": l["k"],
                    "status": l["status"],
                    "sandwich_failures": l["sandwich_failures"],
                    "suite": l["suite"],
                },
                sort_keys=True,
            )


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

def _subtree(node: BranchNode, constraints: ExploreConstraints, budget: int) -> tuple[list[dict], int, bool]:
    """Depth-first search below ``node``; returns (leaf records, expansions, partial)."""
    stack = [node]
    leaves = []
    used = 0
    while stack:
        cur = stack.pop()
        if cur.status == "terminal":
            leaves.append(_leaf_record(cur))
            continue
        if cur.degree >= constraints.horizon:
            leaves.append(_close(cur))
            continue
        if used >= budget:
            return leaves, used, True
        used += 1
        kids = extend(cur, constraints)
        stack.extend(reversed(kids))
    return leaves, used, False


def _task(args):
    p, relators, degree, path, constraints, budget = args
    node = rebuild(p, relators, degree, tuple(tuple(x) for x in path))
    return _subtree(node, constraints, budget)


def _frontier(p: int, constraints: ExploreConstraints) -> tuple[list[BranchNode], list[dict], int]:
    """Breadth-first expansion until the frontier is big enough to split.

    Only open nodes below the horizon stay in the frontier; everything else
    is already a leaf.
    """
    frontier = [root(p)]
    leaves = []
    used = 0
    while frontier and len(frontier) < FRONTIER_TARGET:
        nxt = []
        for node in frontier:
            used += 1
            for kid in extend(node, constraints):
                if kid.status == "terminal":
                    leaves.append(_leaf_record(kid))
                elif kid.degree >= constraints.horizon:
                    leaves.append(_close(kid))
                else:
                    nxt.append(kid)
        frontier = nxt
    return frontier, leaves, used


def explore(
    p: int,
    constraints: ExploreConstraints,
    *,
    jobs: int = 1,
    checkpoint: str | os.PathLike | None = None,
) -> BranchTree:
    """Enumerate every admissible branch up to the horizon over GF(p)."""
    f = make_field(p)
    if f.is_rational:
        raise ValueError("exploration needs a finite field")
    tree = BranchTree(p, constraints)
    state = _load_checkpoint(checkpoint, p, constraints)
    if state is None:
        frontier, leaves, used = _frontier(p, constraints)
        tasks = [(n.relator_strings(), n.degree, list(n.path)) for n in frontier]
        state = {"leaves": leaves, "used": used, "tasks": tasks, "done": {}, "partial": False}
        _save_checkpoint(checkpoint, p, constraints, state)
    # every subtree may use whatever the frontier left over; independent of jobs
    share = max(0, constraints.budget - state["used"])
    todo = [i for i in range(len(state["tasks"])) if str(i) not in state["done"]]
    args = [(p, *state["tasks"][i], constraints, share) for i in todo]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, res in zip(todo, pool.map(_task, args)):
                state["done"][str(i)] = res
                _save_checkpoint(checkpoint, p, constraints, state)
    else:
        for i, a in zip(todo, args):
            state["done"][str(i)] = _task(a)
            _save_checkpoint(checkpoint, p, constraints, state)
    leaves = list(state["leaves"])
    used = state["used"]
    partial = False
    for i in range(len(state["tasks"])):
        lv, u, part = state["done"][str(i)]
        leaves.extend(lv)
        used += u
        partial = partial or part
    leaves.sort(key=lambda l: _sort_key(l["_sort"]))
    tree.leaves = leaves
    tree.expanded = used
    tree.partial = partial
    return tree


def _sort_key(key) -> tuple:
    return tuple((int(d), tuple(tuple(map(int, c)) for c in coeffs)) for d, coeffs in key)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def _constraint_dict(p: int, c: ExploreConstraints) -> dict:
    return {
        "p": p,
        "horizon": c.horizon,
        "require_dims": [list(x) for x in c.require_dims],
        "second_diamond": c.second_diamond,
        "forbid_second_diamond": list(c.forbid_second_diamond),
        "budget": c.budget,
    }


def _save_checkpoint(path, p, constraints, state) -> None:
    if path is None:
        return
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    doc = {"constraints": _constraint_dict(p, constraints), "state": state}
    tmp.write_text(json.dumps(doc, default=_jsonable))
    tmp.replace(path)


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _load_checkpoint(path, p, constraints):
    if path is None or not Path(path).exists():
        return None
    doc = json.loads(Path(path).read_text())
    if doc.get("constraints") != _constraint_dict(p, constraints):
        raise ValueError("checkpoint was written for a different exploration")
    state = doc["state"]
    state["done"] = {k: (v[0], v[1], v[2]) for k, v in state["done"].items()}
    return state


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def branch_report(tree: BranchTree | None) -> list[dict]:
    """One row per leaf in canonical order: dims, diamonds, k, tag, suite digest."""
    if tree is None:
        return []
    rows = []
    for l in tree.leaves:
        digest = "".join(
            {"pass": "+", "fail": "!", "n/a": "."}[item["status"]] for item in l["suite"]
        )
        rows.append(
            {
                "dims": l["dims"],
                "diamonds": l["diamonds"],
                "k": l["k"],
                "tag": l["tag"],
                "status": l["status"],
                "suite": digest,
            }
        )
    return rows
