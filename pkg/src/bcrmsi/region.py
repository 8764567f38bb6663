"""Rate regions as small polyhedra over (R0, R1, R2, R3, R4).

Every region here has nonnegative integer coefficients, so it is empty
exactly when some right-hand side is negative, and a coordinate is unbounded
exactly when its coefficient column is all zero.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .channel import AXES, CSIT, JointDist, SideInfoConfig
from .info import CLAMP, batch_entropy, conditional_mi, mutual_information

DIM = 5
SLACK = 1e-9


class EmptyRegion(ValueError):
    pass


class UnboundedObjective(ValueError):
    pass


class FamilyConfigMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RatePoint:
    r0: float = 0.0
    r1: float = 0.0
    r2: float = 0.0
    r3: float = 0.0
    r4: float = 0.0

    def __post_init__(self):
        if any(not (v >= 0) for v in self.as_tuple()):
            raise ValueError(f"rates must be nonnegative, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.r0, self.r1, self.r2, self.r3, self.r4)

    @classmethod
    def of(cls, values: Sequence[float]) -> "RatePoint":
        vals = list(values) + [0.0] * (DIM - len(values))
        return cls(*map(float, vals[:DIM]))


# ------------------------------------------------------------------ terms
# Each term is I(A;B|C) with groups written over the pseudo-axes; the same
# table feeds both the per-joint and the batched evaluators.

TERMS: dict[str, tuple[str, str, str | None]] = {
    "I(U0,U1;Y~1)": ("U0,U1", "Y~1", None),
    "I(U0,U2;Y~2)": ("U0,U2", "Y~2", None),
    "I(U2;Y~2|U0)": ("U2", "Y~2", "U0"),
    "I(U1;Y~1|U0)": ("U1", "Y~1", "U0"),
    "I(U1;U2|U0)": ("U1", "U2", "U0"),
    "I(U0;S)": ("U0", "S", None),
    "I(U0,U1;S)": ("U0,U1", "S", None),
    "I(U0,U2;S)": ("U0,U2", "S", None),
    "I(U0,U1,U2;S)": ("U0,U1,U2", "S", None),
    "I(U0;Y2)": ("U0", "Y2", None),
    "I(U0,U1;Y1)": ("U0,U1", "Y1", None),
    "I(U1;Y1|U0)": ("U1", "Y1", "U0"),
    "I(U0;Y~2)": ("U0", "Y~2", None),
    "I(X;Y1|S)": ("X", "Y1", "S"),
    "I(X;Y1|U0,S)": ("X", "Y1", "U0,S"),
}

STATE_TERMS = ("I(U0;S)", "I(U0,U1;S)", "I(U0,U2;S)", "I(U0,U1,U2;S)")

Expr = tuple[tuple[int, str], ...]


def _e(*parts: str) -> Expr:
    out = []
    for p in parts:
        sign = -1 if p.startswith("-") else 1
        out.append((sign, p.lstrip("+-")))
    return tuple(out)


class BoundFamily(str, enum.Enum):
    CAUSAL_NO_RMSI = "causal-no-rmsi"
    UNIFIED_NO_RMSI = "unified-no-rmsi"
    UNIFIED_RMSI = "unified-rmsi"
    CAP_TH3 = "cap-th3"
    CAP_TH4 = "cap-th4"
    CAP_TH5 = "cap-th5"


_A, _B = "I(U0,U1;Y~1)", "I(U0,U2;Y~2)"
_C, _D, _M = "I(U2;Y~2|U0)", "I(U1;Y~1|U0)", "-I(U1;U2|U0)"

_NO_RMSI = ((1, 1, 0, 0, 0), (1, 0, 1, 0, 0), (1, 1, 1, 0, 0), (1, 1, 1, 0, 0), (2, 1, 1, 0, 0))
_RMSI = ((1, 1, 0, 1, 0), (1, 0, 1, 0, 1), (1, 1, 1, 1, 0), (1, 1, 1, 0, 1), (2, 1, 1, 1, 1))
_CAP = ((1, 0, 1, 0, 1), (1, 1, 1, 1, 0), (1, 1, 1, 0, 1))

_UNIFIED_RHS = (
    _e(_A, "-I(U0,U1;S)"),
    _e(_B, "-I(U0,U2;S)"),
    _e(_A, _C, _M, "-I(U0,U1,U2;S)"),
    _e(_D, _B, _M, "-I(U0,U1,U2;S)"),
    _e(_A, _B, _M, "-I(U0,U1,U2;S)", "-I(U0;S)"),
)

FAMILIES: dict[BoundFamily, tuple[tuple[tuple[int, ...], Expr], ...]] = {
    BoundFamily.CAUSAL_NO_RMSI: tuple(zip(_NO_RMSI, (
        _e(_A), _e(_B), _e(_A, _C, _M), _e(_D, _B, _M), _e(_A, _B, _M),
    ))),
    BoundFamily.UNIFIED_NO_RMSI: tuple(zip(_NO_RMSI, _UNIFIED_RHS)),
    BoundFamily.UNIFIED_RMSI: tuple(zip(_RMSI, _UNIFIED_RHS)),
    BoundFamily.CAP_TH3: tuple(zip(_CAP, (
        _e("I(U0;Y2)"), _e("I(U0,U1;Y1)"), _e("I(U0;Y2)", "I(U1;Y1|U0)"),
    ))),
    BoundFamily.CAP_TH4: tuple(zip(_CAP, (
        _e("I(U0;Y~2)"), _e("I(X;Y1|S)"), _e("I(U0;Y~2)", "I(X;Y1|U0,S)"),
    ))),
    BoundFamily.CAP_TH5: tuple(zip(_CAP, (
        _e("I(U0;Y~2)", "-I(U0;S)"), _e("I(X;Y1|S)"),
        _e("I(U0;Y~2)", "-I(U0;S)", "I(X;Y1|U0,S)"),
    ))),
}


def family_terms(family: BoundFamily) -> list[str]:
    seen: dict[str, None] = {}
    for _, expr in FAMILIES[BoundFamily(family)]:
        for _, t in expr:
            seen.setdefault(t, None)
    return list(seen)


def check_family_config(family: BoundFamily, cfg: SideInfoConfig, u2_size: int) -> None:
    family = BoundFamily(family)
    problems = []
    if family is BoundFamily.CAUSAL_NO_RMSI and cfg.csit is CSIT.NONCAUSAL:
        problems.append("needs csit none or causal")
    if family is BoundFamily.CAP_TH3:
        if cfg.csit is not CSIT.CAUSAL or cfg.state_at_rx1 or cfg.state_at_rx2:
            problems.append("needs causal csit and no state at either receiver")
    if family is BoundFamily.CAP_TH4:
        if cfg.csit is not CSIT.CAUSAL or not cfg.state_at_rx1:
            problems.append("needs causal csit and state at receiver 1")
    if family is BoundFamily.CAP_TH5:
        if cfg.csit is not CSIT.NONCAUSAL or not cfg.state_at_rx1:
            problems.append("needs non-causal csit and state at receiver 1")
    if family in (BoundFamily.CAP_TH3, BoundFamily.CAP_TH4, BoundFamily.CAP_TH5) and u2_size != 1:
        problems.append("needs u2_size = 1")
    if problems:
        raise FamilyConfigMismatch(f"{family.value}: " + "; ".join(problems))


# ----------------------------------------------------------------- region

@dataclass(frozen=True)
class RateRegion:
    """Inequalities ``coeffs . R <= rhs`` with implicit ``R >= 0``."""

    coeffs: tuple[tuple[int, ...], ...]
    rhs: tuple[float, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        coeffs = tuple(tuple(int(c) for c in row) for row in self.coeffs)
        rhs = tuple(float(v) for v in self.rhs)
        if len(coeffs) != len(rhs):
            raise ValueError("coeffs and rhs differ in length")
        for row in coeffs:
            if len(row) != DIM or any(c < 0 for c in row):
                raise ValueError(f"coefficient rows must be {DIM} nonnegative integers, got {row}")
        if not all(np.isfinite(rhs)):
            raise ValueError("rhs must be finite")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.rhs)

    @property
    def empty(self) -> bool:
        return any(b < 0 for b in self.rhs)

    def bounded_coords(self) -> tuple[int, ...]:
        return tuple(j for j in range(DIM) if any(row[j] for row in self.coeffs))

    def shifted(self, delta: float) -> "RateRegion":
        return RateRegion(self.coeffs, tuple(b + delta for b in self.rhs), self.labels)

    def with_row(self, coeffs: Sequence[int], rhs: float) -> "RateRegion":
        return RateRegion(self.coeffs + (tuple(coeffs),), self.rhs + (rhs,), self.labels + ("",) if self.labels else ())

    def to_list(self) -> list[dict]:
        return [{"coeffs": list(c), "rhs": b} for c, b in zip(self.coeffs, self.rhs)]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), indent=2)

    @classmethod
    def from_list(cls, items: Iterable[dict]) -> "RateRegion":
        items = list(items)
        return cls(tuple(tuple(d["coeffs"]) for d in items), tuple(d["rhs"] for d in items))


def term_values(joint: JointDist, terms: Iterable[str]) -> dict[str, float]:
    out = {}
    for t in terms:
        a, b, c = TERMS[t]
        out[t] = mutual_information(joint, a, b) if c is None else conditional_mi(joint, a, b, c)
    return out


def _combine(expr: Expr, values: dict):
    total = 0.0
    for sign, t in expr:
        total = total + sign * values[t]
    # cancellation noise must not turn a zero-width region into an empty one
    return np.where((total < 0) & (total > -CLAMP), 0.0, total)


def eval_bound(joint: JointDist, family: BoundFamily) -> RateRegion:
    family = BoundFamily(family)
    check_family_config(family, joint.cfg, joint.sizes["U2"])
    vals = term_values(joint, family_terms(family))
    rows = FAMILIES[family]
    labels = tuple(" + ".join(f"{'-' if s < 0 else ''}{t}" for s, t in expr).replace("+ -", "- ") for _, expr in rows)
    return RateRegion(tuple(c for c, _ in rows), tuple(float(_combine(e, vals)) for _, e in rows), labels)


# ---------------------------------------------------------- batched terms

def _axes_of(group: str, cfg: SideInfoConfig) -> list[int]:
    out = []
    for name in group.split(","):
        if name in ("Y~1", "Y~2"):
            rx = name[-1]
            state = cfg.state_at_rx1 if rx == "1" else cfg.state_at_rx2
            out.append(AXES.index(f"Y{rx}"))
            if state:
                out.append(AXES.index("S"))
        else:
            out.append(AXES.index(name))
    return out


def batch_term_values(p: np.ndarray, cfg: SideInfoConfig, terms: Iterable[str]) -> dict[str, np.ndarray]:
    """Vectorised :func:`term_values` over ``p[B, s, u0, u1, u2, x, y1, y2]``."""
    full = tuple(range(p.ndim - 1))
    margs: dict[tuple[int, ...], np.ndarray] = {full: p}
    cache: dict[tuple[int, ...], np.ndarray] = {}

    def marginal(key: tuple[int, ...]) -> np.ndarray:
        # sum down from the smallest marginal already computed that covers key
        if key not in margs:
            src = min((k for k in margs if set(key) <= set(k)), key=len)
            drop = tuple(1 + src.index(a) for a in src if a not in key)
            margs[key] = margs[src].sum(axis=drop)
        return margs[key]

    def h(axes: Iterable[int]) -> np.ndarray:
        key = tuple(sorted(set(axes)))
        if key not in cache:
            cache[key] = batch_entropy(marginal(key), tuple(range(len(key))))
        return cache[key]

    groups = []
    for t in terms:
        a, b, c = TERMS[t]
        groups.append((t, _axes_of(a, cfg), _axes_of(b, cfg), _axes_of(c, cfg) if c else []))
    marginal(tuple(sorted({ax for _, ga, gb, gc in groups for ax in ga + gb + gc})))
    out = {}
    for t, ga, gb, gc in groups:
        val = h(ga + gc) + h(gb + gc) - h(ga + gb + gc) - (h(gc) if gc else 0.0)
        out[t] = np.maximum(val, 0.0)
    return out


def batch_rhs(p: np.ndarray, cfg: SideInfoConfig, family: BoundFamily) -> np.ndarray:
    family = BoundFamily(family)
    vals = batch_term_values(p, cfg, family_terms(family))
    return np.stack([_combine(e, vals) for _, e in FAMILIES[family]], axis=1)


# ------------------------------------------------------------ LP queries

def contains(region: RateRegion, point: RatePoint | Sequence[float]) -> bool:
    r = point.as_tuple() if isinstance(point, RatePoint) else tuple(point)
    if any(v < -SLACK for v in r):
        return False
    return all(b - sum(c * v for c, v in zip(row, r)) >= -SLACK for row, b in zip(region.coeffs, region.rhs))


def _solve_exact(m: list[list[int]], rhs: list[Fraction]) -> list[Fraction] | None:
    n = len(m)
    a = [[Fraction(v) for v in row] + [b] for row, b in zip(m, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


@lru_cache(maxsize=256)
def _bases(coeffs: tuple[tuple[int, ...], ...], cols: tuple[int, ...]):
    """Nonsingular active sets over ``cols`` with their float inverses.

    Row indices ``>= len(coeffs)`` stand for ``R_cols[i] >= 0``.
    """
    k, d = len(coeffs), len(cols)
    full = [[row[j] for j in cols] for row in coeffs]
    for i in range(d):
        full.append([-1 if jj == i else 0 for jj in range(d)])
    keep, invs = [], []
    for combo in itertools.combinations(range(k + d), d):
        mat = np.array([full[i] for i in combo], dtype=float)
        if abs(np.linalg.det(mat)) < 0.5:  # integer matrices: singular iff det == 0
            continue
        keep.append(combo)
        invs.append(np.linalg.inv(mat))
    return full, tuple(keep), np.array(invs).reshape(len(keep), d, d)


def _exact_vertex(full, combo, rhs_exact) -> list[Fraction] | None:
    sol = _solve_exact([full[i] for i in combo], [rhs_exact[i] for i in combo])
    if sol is None:
        return None
    for row, b in zip(full, rhs_exact):
        if sum(c * v for c, v in zip(row, sol)) > b:
            return None
    return sol


def _prepare(region: RateRegion, w: Sequence[float]):
    w = [float(v) for v in w]
    if len(w) != DIM or any(v < 0 for v in w) or not any(v > 0 for v in w):
        raise ValueError(f"weights must be {DIM} nonnegative values, not all zero; got {w}")
    if region.empty:
        raise EmptyRegion(f"region has negative rhs {min(region.rhs)!r}")
    cols = region.bounded_coords()
    loose = [j for j in range(DIM) if j not in cols and w[j] > 0]
    if loose:
        raise UnboundedObjective(f"no inequality bounds R{loose[0]}")
    return w, cols


def vertices(region: RateRegion) -> list[tuple[Fraction, ...]]:
    """All vertices (exact), with unbounded coordinates pinned at 0."""
    if region.empty:
        raise EmptyRegion(f"region has negative rhs {min(region.rhs)!r}")
    cols = region.bounded_coords()
    if not cols:
        return [(Fraction(0),) * DIM]
    full, combos, _ = _bases(region.coeffs, cols)
    rhs_exact = [Fraction(b) for b in region.rhs] + [Fraction(0)] * len(cols)
    seen: dict[tuple, None] = {}
    for combo in combos:
        v = _exact_vertex(full, combo, rhs_exact)
        if v is not None:
            point = [Fraction(0)] * DIM
            for j, val in zip(cols, v):
                point[j] = val
            seen.setdefault(tuple(point), None)
    return list(seen)


def support(region: RateRegion, w: Sequence[float]) -> float:
    """``max w.R`` over the region, exact over the float right-hand sides."""
    w, cols = _prepare(region, w)
    if not cols:
        return 0.0
    full, combos, invs = _bases(region.coeffs, cols)
    rhs = np.array(list(region.rhs) + [0.0] * len(cols))
    idx = np.array(combos)
    verts = np.einsum("vij,vj->vi", invs, rhs[idx])
    amat = np.array(full, dtype=float)
    scale = 1.0 + np.abs(rhs).max()
    ok = ((verts @ amat.T) <= rhs + 1e-9 * scale).all(axis=1)
    wc = np.array([w[j] for j in cols])
    vals = np.where(ok, verts @ wc, -np.inf)
    order = np.argsort(-vals, kind="stable")

    rhs_exact = [Fraction(b) for b in region.rhs] + [Fraction(0)] * len(cols)
    w_exact = [Fraction(w[j]) for j in cols]
    best = None
    cutoff = None
    for i in order:
        if not np.isfinite(vals[i]) or (cutoff is not None and vals[i] < cutoff):
            break
        v = _exact_vertex(full, combos[i], rhs_exact)
        if v is None:
            continue
        val = sum(a * b for a, b in zip(w_exact, v))
        if best is None or val > best:
            best = val
        if cutoff is None:
            cutoff = vals[i] - 1e-9 * scale
    if best is None:
        best = max(sum(w[j] * v[j] for j in range(DIM)) for v in vertices(region))
    return float(best)


@lru_cache(maxsize=256)
def _screen_mats(coeffs: tuple[tuple[int, ...], ...], cols: tuple[int, ...]):
    """Per-basis linear maps from the padded rhs to vertex slacks and coordinates."""
    full, combos, invs = _bases(coeffs, cols)
    k, d = len(coeffs), len(cols)
    amat = np.array(full, dtype=float)
    # vertex_v = invs[v] @ b[combo_v]  ->  vertex_v = place_v @ b
    place = np.zeros((len(combos), d, k + d))
    for v, combo in enumerate(combos):
        place[v][:, list(combo)] = invs[v]
    slack = np.eye(k + d)[None] - np.einsum("ri,vib->vrb", amat, place)
    return place, slack.reshape(-1, k + d)


def batch_support(
    coeffs: tuple[tuple[int, ...], ...], rhs: np.ndarray, weights: Sequence[Sequence[float]]
) -> np.ndarray:
    """Float support of many regions sharing ``coeffs``; empty regions score 0.

    Returns ``(B, len(weights))``.  Used for screening only; reported values
    go through :func:`support`.
    """
    rhs = np.atleast_2d(np.asarray(rhs, dtype=float))
    probe = RateRegion(coeffs, (0.0,) * len(coeffs))
    prepared = [_prepare(probe, w)[0] for w in weights]
    cols = probe.bounded_coords()
    out = np.zeros((len(rhs), len(prepared)))
    if not cols:
        return out
    place, slack = _screen_mats(probe.coeffs, cols)
    n_v = place.shape[0]
    b = np.concatenate([rhs, np.zeros((len(rhs), len(cols)))], axis=1)
    tol = 1e-9 * (1.0 + np.abs(b).max(axis=1))
    ok = ((b @ slack.T).reshape(len(b), n_v, -1) >= -tol[:, None, None]).all(axis=2)
    empty = (rhs < 0).any(axis=1)
    for k, w in enumerate(prepared):
        wc = np.array([w[j] for j in cols])
        vals = b @ np.einsum("vib,i->bv", place, wc)
        best = np.where(ok, vals, -np.inf).max(axis=1)
        out[:, k] = np.where(empty | ~np.isfinite(best), 0.0, best)
    return out


def score(region: RateRegion, w: Sequence[float]) -> float:
    """Support value, with an empty region scoring 0."""
    if region.empty:
        return 0.0
    return support(region, w)


def hull_support(regions: Iterable[RateRegion], w: Sequence[float]) -> float:
    """Support of the convex hull of a union of regions (empty members ignored)."""
    vals = [support(r, w) for r in regions if not r.empty]
    if not vals:
        raise EmptyRegion("every region in the union is empty")
    return max(vals)


def region_subset(inner: RateRegion, outer: RateRegion, tol: float = 0.0) -> bool:
    """Whether ``inner`` lies inside ``outer`` up to ``tol`` bits per inequality."""
    verts = vertices(inner)
    inner_cols = set(inner.bounded_coords())
    for j in range(DIM):
        if j not in inner_cols and any(row[j] for row in outer.coeffs):
            return False
    tol_f = Fraction(tol)
    for row, b in zip(outer.coeffs, outer.rhs):
        bound = Fraction(b) + tol_f
        for v in verts:
            if sum(c * x for c, x in zip(row, v)) > bound:
                return False
    return True


# ------------------------------------------------------------------ export

def frontier_csv(rows: Iterable[tuple[Sequence[float], float]]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow([f"w{i}" for i in range(DIM)] + ["value"])
    for w, value in rows:
        out.writerow([repr(float(x)) for x in w] + [repr(float(value))])
    return buf.getvalue()
