from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from bcrmsi.channel import ChannelSpec
from bcrmsi.degraded import check_degraded
from conftest import bsc, degraded_pair


def _lp_feasible(spec: ChannelSpec) -> bool:
    n1, n2 = spec.y1_size, spec.y2_size
    w1, w2 = spec.marginal_y1(), spec.marginal_y2()
    rows, rhs = [], []
    for a in range(n1):
        r = np.zeros(n1 * n2)
        r[a * n2:(a + 1) * n2] = 1
        rows.append(r)
        rhs.append(1.0)
    for s in range(spec.s_size):
        for x in range(spec.x_size):
            for b in range(n2):
                r = np.zeros(n1 * n2)
                r[np.arange(n1) * n2 + b] = w1[s, x]
                rows.append(r)
                rhs.append(w2[s, x, b])
    res = linprog(np.zeros(n1 * n2), A_eq=np.array(rows), b_eq=np.array(rhs),
                  bounds=[(0, None)] * (n1 * n2), method="highs")
    return res.status == 0


def _quantised(rng, shape, denom=8):
    counts = rng.multinomial(denom, np.ones(shape[-1]) / shape[-1], size=shape[:-1])
    return counts / denom


def test_degraded_pair_recovers_link():
    res = check_degraded(degraded_pair())
    assert res.degraded
    assert res.kernel == [[Fraction(17, 20), Fraction(3, 20)], [Fraction(3, 20), Fraction(17, 20)]]


def test_reversed_pair_is_not_degraded():
    w1 = np.array([[bsc(0.1)[x ^ s] for x in range(2)] for s in range(2)])
    w2 = np.einsum("sxa,ab->sxb", w1, bsc(0.15))
    assert not check_degraded(ChannelSpec.from_marginals([0.5, 0.5], w2, w1)).degraded


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_composed_channels_are_degraded_with_exact_kernel(seed):
    rng = np.random.default_rng(seed)
    y1, y2 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    w1 = _quantised(rng, (2, 2, y1))
    link = _quantised(rng, (y1, y2))
    spec = ChannelSpec.from_marginals([0.5, 0.5], w1, degraded=link)
    res = check_degraded(spec)
    assert res.degraded
    q1 = [[[Fraction(v).limit_denominator(64) for v in row] for row in m] for m in w1]
    for s in range(2):
        for x in range(2):
            for b in range(y2):
                got = sum(q1[s][x][a] * res.kernel[a][b] for a in range(y1))
                assert got == Fraction(float(spec.marginal_y2()[s, x, b])).limit_denominator(10**6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_agrees_with_float_lp(seed):
    rng = np.random.default_rng(seed)
    w1 = _quantised(rng, (2, 2, 2), denom=10)
    kind = int(rng.integers(3))
    if kind == 0:
        w2 = _quantised(rng, (2, 2, 2), denom=10)
    else:
        w2 = np.einsum("sxa,ab->sxb", w1, _quantised(rng, (2, 2), denom=10))
        if kind == 2:  # nudge one row off the composed channel
            s, x = rng.integers(2, size=2)
            shift = min(0.05, w2[s, x, 0])
            w2[s, x] += (-shift, shift)
    spec = ChannelSpec.from_marginals([0.5, 0.5], w1, w2)
    assert check_degraded(spec).degraded == _lp_feasible(spec)
