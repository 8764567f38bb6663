"""Reference implementations used only by the tests.

They share no code with the package: joints are built by explicit loops,
information measures by dictionary marginals, and linear programs go through
scipy's HiGHS solver.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np
from scipy.optimize import linprog

AXIS = {"S": 0, "U0": 1, "U1": 2, "U2": 3, "X": 4, "Y1": 5, "Y2": 6}


def bsc(e: float) -> np.ndarray:
    return np.array([[1 - e, e], [e, 1 - e]])


def brute_joint(channel: dict, scheme: dict, csit: str) -> dict[tuple, float]:
    """``{(s, u0, u1, u2, x, y1, y2): prob}`` from the raw JSON dictionaries."""
    p_s = channel["p_s"]
    p_trans = channel["p_trans"]
    p_aux = scheme["p_aux"]
    gamma = scheme["gamma"]
    out: dict[tuple, float] = {}
    for s in range(channel["s_size"]):
        k = s if csit == "noncausal" else 0
        g = 0 if csit == "none" else s
        for u0 in range(scheme["u0_size"]):
            for u1 in range(scheme["u1_size"]):
                for u2 in range(scheme["u2_size"]):
                    x = gamma[u0][u1][u2][g]
                    base = p_s[s] * p_aux[k][u0][u1][u2]
                    for y1 in range(channel["y1_size"]):
                        for y2 in range(channel["y2_size"]):
                            pr = base * p_trans[s][x][y1][y2]
                            if pr > 0:
                                out[(s, u0, u1, u2, x, y1, y2)] = pr
    return out


def _resolve(names: str, state1: bool, state2: bool) -> list[int]:
    idx = []
    for n in names.split(","):
        n = n.strip()
        if n == "Y~1":
            idx += [AXIS["Y1"]] + ([AXIS["S"]] if state1 else [])
        elif n == "Y~2":
            idx += [AXIS["Y2"]] + ([AXIS["S"]] if state2 else [])
        elif n:
            idx.append(AXIS[n])
    return idx


def brute_entropy(joint: dict[tuple, float], idx: list[int]) -> float:
    marg: dict[tuple, float] = defaultdict(float)
    for k, v in joint.items():
        marg[tuple(k[i] for i in idx)] += v
    return -sum(v * math.log2(v) for v in marg.values() if v > 0)


def brute_mi(joint, a: str, b: str, c: str | None = None, state1=False, state2=False) -> float:
    """``I(A;B|C)`` in bits as a sum of four marginal entropies."""
    ia, ib = _resolve(a, state1, state2), _resolve(b, state1, state2)
    ic = _resolve(c, state1, state2) if c else []
    h = lambda idx: brute_entropy(joint, sorted(set(idx))) if idx else 0.0  # noqa: E731
    return h(ia + ic) + h(ib + ic) - h(ia + ib + ic) - h(ic)


def lp_support(coeffs, rhs, w) -> float | None:
    """``max w.r`` over ``{r >= 0 : coeffs @ r <= rhs}``; ``inf`` if unbounded, ``None`` if empty."""
    res = linprog(-np.asarray(w, float), A_ub=np.asarray(coeffs, float), b_ub=np.asarray(rhs, float),
                  bounds=[(0, None)] * len(w), method="highs")
    if res.status == 3:
        return math.inf
    if res.status == 2:
        return None
    assert res.status == 0, res.message
    return -res.fun


def _lp_with_dual(a, b, w):
    res = linprog(-np.asarray(w, float), A_ub=a, b_ub=b, bounds=[(0, None)] * a.shape[1], method="highs")
    assert res.status == 0, res.message
    return -res.fun, -np.asarray(res.ineqlin.marginals)


def best_support(a: np.ndarray, rhs_batch: np.ndarray, w) -> float:
    """Largest LP value over many right-hand sides sharing one constraint matrix.

    Cutting-plane search: every solved LP contributes a dual vector, which is
    dual-feasible for all candidates and so bounds each of them from above.
    """
    a = np.asarray(a, float)
    duals = []
    i = 0
    while True:
        val, y = _lp_with_dual(a, rhs_batch[i], w)
        duals.append(y)
        ub = (rhs_batch @ np.array(duals).T).min(axis=1)
        i_next = int(np.argmax(ub))
        if ub[i_next] <= val + 1e-12:
            return val
        i = i_next


def compositions(total: int, parts: int):
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield out


def _mi_from_channel(p_in: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``I(input; output)`` for batches: ``p_in[N, k]``, ``w[N, k, y]``."""
    p_y = np.einsum("nk,nky->ny", p_in, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w > 0, w / p_y[:, None, :], 1.0)
        term = np.where(w > 0, w * np.log2(ratio), 0.0)
    return np.einsum("nk,nk->n", p_in, term.sum(axis=2))


def degraded_capacity_oracle(p_s, w1, link, denom: int, weights) -> list[float]:
    """Grid search over ``p(u0, u1)`` (binary U0, U1) for the causal, no-receiver-state
    degraded capacity region, with every map ``(u0, u1, s) -> x``.

    Mutual informations come from the effective channels ``p(y1 | u0, u1)`` and
    ``p(y2 | u0)``; each weighted support is an LP.
    """
    p_s = np.asarray(p_s, float)
    w1 = np.asarray(w1, float)  # [s, x, y1]
    link = np.asarray(link, float)
    n_s, n_x, _ = w1.shape
    grid = np.array(list(compositions(denom, 4)), float) / denom  # p(u0,u1) flattened (u0*2+u1)
    maps = np.array(list(itertools.product(range(n_x), repeat=4 * n_s))).reshape(-1, 2, 2, n_s)
    # effective p(y1 | u0, u1) per map: sum_s p(s) w1[s, gamma(u0,u1,s), :]
    eff1 = np.zeros((len(maps), 2, 2, w1.shape[2]))
    for s in range(n_s):
        eff1 += p_s[s] * w1[s][maps[..., s]]
    eff2 = eff1 @ link
    rhs_all = []
    for pu in grid:
        pu2 = pu.reshape(2, 2)
        p0 = pu2.sum(axis=1)
        n = len(maps)
        # I(U0,U1;Y1)
        i_01_y1 = _mi_from_channel(np.broadcast_to(pu, (n, 4)), eff1.reshape(n, 4, -1))
        # I(U0;Y2) through p(y2|u0) = sum_u1 p(u1|u0) p(y2|u0,u1)
        cond = np.divide(pu2, p0[:, None], out=np.full_like(pu2, 0.5), where=p0[:, None] > 0)
        y2_given_u0 = np.einsum("ab,nabx->nax", cond, eff2)
        i_0_y2 = _mi_from_channel(np.broadcast_to(p0, (n, 2)), y2_given_u0)
        y1_given_u0 = np.einsum("ab,nabx->nax", cond, eff1)
        i_0_y1 = _mi_from_channel(np.broadcast_to(p0, (n, 2)), y1_given_u0)
        i_1_y1_g0 = i_01_y1 - i_0_y1
        rhs_all.append(np.stack([i_0_y2, i_01_y1, i_0_y2 + i_1_y1_g0], axis=1))
    rhs_all = np.concatenate(rhs_all)
    a = np.array([[1, 0, 1, 0, 1], [1, 1, 1, 1, 0], [1, 1, 1, 0, 1]], float)
    return [best_support(a, rhs_all, w) for w in weights]


def box_probability_brute(total: int, probs, lo, hi) -> float:
    """Multinomial probability that every count lies in ``[lo_i, hi_i]``."""
    k = len(probs)
    acc = 0.0
    for counts in compositions(total, k):
        if all(l <= c <= h for c, l, h in zip(counts, lo, hi)):
            coef = math.factorial(total)
            pr = 1.0
            for c, p in zip(counts, probs):
                coef //= math.factorial(c)
                pr *= p ** c
            acc += coef * pr
    return acc


def wilson_oracle(k: int, n: int) -> tuple[float, float]:
    from scipy.stats import norm

    z = norm.ppf(0.975)
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return centre - half, centre + half
