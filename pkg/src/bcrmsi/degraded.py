"""Stochastic degradedness test by exact channel factorisation.

Receiver 2 is a degraded version of receiver 1 when some fixed kernel
T(y2|y1) reproduces p(y2|x,s) from p(y1|x,s) for every (x, s).  Finding T is
an LP feasibility problem; it is solved exactly on a rational version of the
channel, so a "yes" comes with a kernel that factors the rationalised channel
with zero error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .channel import ChannelSpec
from .exact_lp import feasible

MAX_DENOMINATOR = 10**6


@dataclass(frozen=True)
class DegradedResult:
    degraded: bool
    kernel: list[list[Fraction]] | None

    def to_dict(self) -> dict:
        kernel = None
        if self.kernel is not None:
            kernel = [[str(v) for v in row] for row in self.kernel]
        return {"degraded": self.degraded, "kernel": kernel}


def _rational(v: float) -> Fraction:
    return Fraction(float(v)).limit_denominator(MAX_DENOMINATOR)


def check_degraded(spec: ChannelSpec) -> DegradedResult:
    n1, n2 = spec.y1_size, spec.y2_size
    q = [[[[_rational(spec.p_trans[s, x, a, b]) for b in range(n2)] for a in range(n1)]
          for x in range(spec.x_size)] for s in range(spec.s_size)]

    def col(a: int, b: int) -> int:
        return a * n2 + b

    rows, rhs = [], []
    for a in range(n1):
        row = [Fraction(0)] * (n1 * n2)
        for b in range(n2):
            row[col(a, b)] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
    for s in range(spec.s_size):
        if spec.p_s[s] <= 0:
            continue
        for x in range(spec.x_size):
            w1 = [sum(q[s][x][a]) for a in range(n1)]
            for b in range(n2):
                row = [Fraction(0)] * (n1 * n2)
                for a in range(n1):
                    row[col(a, b)] = w1[a]
                rows.append(row)
                rhs.append(sum(q[s][x][a][b] for a in range(n1)))
    sol = feasible(rows, rhs)
    if sol is None:
        return DegradedResult(False, None)
    return DegradedResult(True, [[sol[col(a, b)] for b in range(n2)] for a in range(n1)])
