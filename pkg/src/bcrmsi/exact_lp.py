"""Exact rational feasibility for small linear systems.

Phase-one simplex with Bland's rule on a fraction-free integer tableau:
every row is kept up to a positive scale factor and reduced by its gcd, so
there is no rounding and no tolerance anywhere. Meant for systems with a few
dozen rows and columns.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


def _as_int_rows(a_eq, b_eq):
    out = []
    for coeffs, rhs in zip(a_eq, b_eq):
        vals = [Fraction(v) for v in coeffs] + [Fraction(rhs)]
        den = 1
        for v in vals:
            den = den * v.denominator // math.gcd(den, v.denominator)
        out.append([int(v * den) for v in vals])
    return out


def _reduce(row):
    g = 0
    for v in row:
        if v:
            g = math.gcd(g, v)
            if g == 1:
                return row
    if g > 1:
        return [v // g for v in row]
    return row


def feasible(a_eq: Sequence[Sequence], b_eq: Sequence) -> list[Fraction] | None:
    """Return some ``x >= 0`` with ``a_eq @ x == b_eq``, or ``None`` if none exists."""
    m = len(a_eq)
    n = len(a_eq[0]) if m else 0
    if m == 0:
        return [Fraction(0)] * n

    base = _as_int_rows(a_eq, b_eq)
    rows = []
    for i, r in enumerate(base):
        if r[-1] < 0:
            r = [-v for v in r]
        art = [0] * m
        art[i] = 1
        rows.append(_reduce(r[:-1] + art + [r[-1]]))
    width = n + m
    basis = list(range(n, n + m))

    # phase-one objective row: minimise the sum of artificials (each row
    # still carries a unit artificial, so the gcd reduction above was a no-op)
    obj = [0] * (width + 1)
    for r in rows:
        for j in range(n):
            obj[j] -= r[j]
        obj[width] -= r[width]
    obj = _reduce(obj)

    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave = None
        for i, r in enumerate(rows):
            if r[enter] > 0:
                if leave is None:
                    leave = i
                    continue
                lr = rows[leave]
                # compare r[w]/r[e] with lr[w]/lr[e]
                lhs = r[width] * lr[enter]
                rhs = lr[width] * r[enter]
                if lhs < rhs or (lhs == rhs and basis[i] < basis[leave]):
                    leave = i
        if leave is None:
            break
        pr = rows[leave]
        piv = pr[enter]
        for i, r in enumerate(rows):
            if i != leave and r[enter] != 0:
                f = r[enter]
                rows[i] = _reduce([piv * a - f * b for a, b in zip(r, pr)])
        if obj[enter] != 0:
            f = obj[enter]
            obj = _reduce([piv * a - f * b for a, b in zip(obj, pr)])
        basis[leave] = enter

    if obj[width] != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = Fraction(rows[i][width], rows[i][j])
    return x


def implied(rows: Sequence[Sequence[int]], target: Sequence[int]) -> bool:
    """Whether ``target . z <= 0`` follows from ``rows . z <= 0`` for all ``z >= 0``.

    By Farkas' lemma on the nonnegative orthant this holds iff some
    ``lam >= 0`` has ``sum(lam_i * rows_i) >= target`` componentwise.
    """
    d = len(target)
    if all(t <= 0 for t in target):
        return True
    if not rows:
        return False
    # columns with target <= 0 are satisfied by the slack alone; keep the rest
    cols = [c for c in range(d) if target[c] > 0 or any(r[c] for r in rows)]
    k = len(rows)
    a = []
    b = []
    for c in cols:
        line = [rows[i][c] for i in range(k)]
        line += [-1 if cc == c else 0 for cc in cols]
        a.append(line)
        b.append(target[c])
    return feasible(a, b) is not None
