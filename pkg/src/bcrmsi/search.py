"""Random and local search over auxiliary schemes for weighted-sum frontiers."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import CSIT, AuxScheme, ChannelSpec, SideInfoConfig, build_joint, joint_array, validate_channel
from .region import (
    DIM, BoundFamily, RateRegion, batch_rhs, batch_support, check_family_config, eval_bound, FAMILIES, score,
)

GAMMA_EXHAUSTIVE_LIMIT = 4096
CHUNK_ENTRIES = 4_000_000
STEP0 = 0.1
STEP_FLOOR = 1e-4

DEFAULT_WEIGHTS_NO_RMSI = (
    (1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0), (0, 1, 1, 0, 0), (1, 1, 1, 0, 0),
)
DEFAULT_WEIGHTS_RMSI = DEFAULT_WEIGHTS_NO_RMSI + ((0, 0, 0, 1, 0), (0, 0, 0, 0, 1), (1, 1, 1, 1, 1))


def default_weights(family: BoundFamily) -> tuple[tuple[float, ...], ...]:
    cols = {j for c, _ in FAMILIES[BoundFamily(family)] for j in range(DIM) if c[j]}
    if {3, 4} <= cols:
        return DEFAULT_WEIGHTS_RMSI
    return tuple(w for w in DEFAULT_WEIGHTS_RMSI if all(w[j] == 0 or j in cols for j in range(DIM)))


@dataclass(frozen=True)
class SearchBudget:
    n_random: int = 64
    n_refine: int = 100
    seed: int = 0
    cards: tuple[int, int, int] = (2, 2, 2)
    weights: tuple[tuple[float, ...], ...] | None = None
    grid: int | None = None
    """Simplex grid denominator; when set, every grid point is scored instead of sampling."""

    def __post_init__(self):
        if self.n_random < 0 or self.n_refine < 0:
            raise ValueError("search counts must be nonnegative")
        if len(self.cards) != 3 or any(int(c) != c or c < 1 for c in self.cards):
            raise ValueError(f"cardinalities must be three positive integers, got {self.cards}")
        object.__setattr__(self, "cards", tuple(int(c) for c in self.cards))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(tuple(float(v) for v in w) for w in self.weights))
        if self.grid is not None and self.grid < 1:
            raise ValueError("grid denominator must be positive")


@dataclass
class FrontierEntry:
    weight: tuple[float, ...]
    value: float
    scheme: AuxScheme
    region: RateRegion
    trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "weight": list(self.weight),
            "value": self.value,
            "scheme": self.scheme.to_dict(),
            "region": self.region.to_list(),
            "trace": list(self.trace),
        }


@dataclass
class FrontierReport:
    family: BoundFamily
    cfg: SideInfoConfig
    budget: SearchBudget
    entries: list[FrontierEntry]

    def values(self) -> list[float]:
        return [e.value for e in self.entries]

    def to_dict(self) -> dict:
        b = self.budget
        return {
            "family": self.family.value,
            "side_info": {
                "csit": self.cfg.csit.value,
                "state_at_rx1": self.cfg.state_at_rx1,
                "state_at_rx2": self.cfg.state_at_rx2,
            },
            "budget": {
                "n_random": b.n_random, "n_refine": b.n_refine, "seed": b.seed,
                "cards": list(b.cards), "grid": b.grid,
            },
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow([f"w{i}" for i in range(DIM)] + ["value"])
        for e in self.entries:
            out.writerow([repr(v) for v in e.weight] + [repr(e.value)])
        return buf.getvalue()


# ---------------------------------------------------------------- helpers

def _shapes(spec: ChannelSpec, cfg: SideInfoConfig, cards):
    k_aux = cfg.aux_slices(spec.s_size)
    k_gamma = cfg.gamma_slices(spec.s_size)
    return (k_aux,) + tuple(cards), tuple(cards) + (k_gamma,)


def sample_scheme(rng: np.random.Generator, spec: ChannelSpec, cfg: SideInfoConfig, cards) -> AuxScheme:
    """Dirichlet(1) slices and a uniformly random input map."""
    aux_shape, gamma_shape = _shapes(spec, cfg, cards)
    cells = int(np.prod(cards))
    p = rng.dirichlet(np.ones(cells), size=aux_shape[0]).reshape(aux_shape)
    g = rng.integers(0, spec.x_size, size=gamma_shape)
    return AuxScheme(*cards, p, g)


def uniform_scheme(spec: ChannelSpec, cfg: SideInfoConfig, cards, gamma: np.ndarray | None = None) -> AuxScheme:
    aux_shape, gamma_shape = _shapes(spec, cfg, cards)
    p = np.full(aux_shape, 1.0 / np.prod(cards))
    g = np.zeros(gamma_shape, dtype=np.int64) if gamma is None else gamma
    return AuxScheme(*cards, p, g)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row of ``v`` onto the probability simplex."""
    u = -np.sort(-v, axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    idx = np.arange(1, v.shape[-1] + 1)
    cond = u - css / idx > 0
    rho = v.shape[-1] - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1)
    return np.maximum(v - theta, 0.0)


def all_gammas(x_size: int, gamma_shape: tuple[int, ...]) -> np.ndarray:
    cells = int(np.prod(gamma_shape))
    grid = np.array(list(itertools.product(range(x_size), repeat=cells)), dtype=np.int64)
    return grid.reshape((-1,) + tuple(gamma_shape))


def simplex_grid(parts: int, denom: int) -> np.ndarray:
    """All points of the simplex with coordinates in multiples of ``1/denom``."""
    pts = []
    for bars in itertools.combinations(range(denom + parts - 1), parts - 1):
        prev, counts = -1, []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(denom + parts - 2 - prev)
        pts.append(counts)
    return np.array(pts, dtype=float) / denom


class _Scorer:
    """Screens batches of (p_aux, gamma) pairs with float arithmetic."""

    def __init__(self, spec: ChannelSpec, cfg: SideInfoConfig, family: BoundFamily, cards, weights):
        self.spec, self.cfg, self.family = spec, cfg, family
        self.coeffs = tuple(c for c, _ in FAMILIES[family])
        self.weights = weights
        aux_shape, gamma_shape = _shapes(spec, cfg, cards)
        self.item = spec.s_size * int(np.prod(cards)) * spec.x_size * spec.y1_size * spec.y2_size
        self.aux_shape, self.gamma_shape = aux_shape, gamma_shape

    def __call__(self, p_aux: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        """Return scores ``(B, n_weights)``; either batch may be of size 1."""
        n = max(len(p_aux), len(gamma))
        step = max(1, CHUNK_ENTRIES // self.item)
        out = np.empty((n, len(self.weights)))
        for lo in range(0, n, step):
            hi = min(n, lo + step)
            pa = p_aux if len(p_aux) == 1 else p_aux[lo:hi]
            g = gamma if len(gamma) == 1 else gamma[lo:hi]
            rhs = batch_rhs(joint_array(self.spec, self.cfg, pa, g), self.cfg, self.family)
            out[lo:hi] = batch_support(self.coeffs, rhs, self.weights)
        return out


def _finish(spec, cfg, family, weight, candidates, trace) -> FrontierEntry:
    """Canonically re-evaluate candidate schemes and keep the best one."""
    best = None
    for scheme in candidates:
        region = eval_bound(build_joint(spec, cfg, scheme), family)
        value = score(region, weight)
        if best is None or value > best[0]:
            best = (value, scheme, region)
    value, scheme, region = best
    return FrontierEntry(tuple(weight), value, scheme, region, trace)


# ---------------------------------------------------------------- search

def optimize(
    spec: ChannelSpec,
    cfg: SideInfoConfig,
    family: BoundFamily,
    budget: SearchBudget,
    seeds: Sequence[AuxScheme] = (),
) -> FrontierReport:
    """Best weighted-sum value of the family's region over sampled schemes.

    ``seeds`` are extra schemes placed in the pool; they are always evaluated
    on the canonical path, so the result can never fall below them.
    """
    family = BoundFamily(family)
    validate_channel(spec)
    check_family_config(family, cfg, budget.cards[2])
    weights = budget.weights or default_weights(family)
    scorer = _Scorer(spec, cfg, family, budget.cards, weights)
    aux_shape, gamma_shape = scorer.aux_shape, scorer.gamma_shape
    cells = int(np.prod(gamma_shape))
    exhaustive = spec.x_size ** cells <= GAMMA_EXHAUSTIVE_LIMIT
    gammas = all_gammas(spec.x_size, gamma_shape) if exhaustive else None

    pool_p: list[np.ndarray] = []
    pool_g: list[np.ndarray] = []
    pool_s: list[np.ndarray] = []

    def add(p_aux: np.ndarray, gamma_hint: np.ndarray | None):
        if exhaustive:
            s = scorer(p_aux[None], gammas)
            pick = s.argmax(axis=0)
            for k in range(len(weights)):
                pool_p.append(p_aux)
                pool_g.append(gammas[pick[k]])
                pool_s.append(s[pick[k]])
        else:
            pool_p.append(p_aux)
            pool_g.append(gamma_hint)
            pool_s.append(scorer(p_aux[None], gamma_hint[None])[0])

    if budget.grid is not None:
        pts = simplex_grid(int(np.prod(budget.cards)), budget.grid)
        if aux_shape[0] > 1:
            raise ValueError("grid mode supports single-slice auxiliary distributions only")
        grid_p = pts.reshape((-1,) + aux_shape)
        if exhaustive:
            # score every (grid point, gamma) pair without materialising the product
            for k_idx in range(0, len(grid_p), max(1, CHUNK_ENTRIES // (scorer.item * len(gammas)))):
                block = grid_p[k_idx:k_idx + max(1, CHUNK_ENTRIES // (scorer.item * len(gammas)))]
                p_rep = np.repeat(block, len(gammas), axis=0)
                g_rep = np.tile(gammas, (len(block),) + (1,) * len(gamma_shape))
                s = scorer(p_rep, g_rep)
                pick = s.argmax(axis=0)
                for k in range(len(weights)):
                    pool_p.append(p_rep[pick[k]])
                    pool_g.append(g_rep[pick[k]])
                    pool_s.append(s[pick[k]])
        else:
            for p_aux in grid_p:
                add(p_aux, np.zeros(gamma_shape, dtype=np.int64))
    else:
        add(uniform_scheme(spec, cfg, budget.cards).p_aux, np.zeros(gamma_shape, dtype=np.int64))
        for i in range(budget.n_random):
            rng = np.random.default_rng(np.random.SeedSequence(budget.seed, spawn_key=(0, i)))
            sch = sample_scheme(rng, spec, cfg, budget.cards)
            add(sch.p_aux, sch.gamma)

    for sch in seeds:
        add(sch.p_aux, sch.gamma)

    scores = np.array(pool_s)
    entries = []
    for k, w in enumerate(weights):
        start = int(np.argmax(scores[:, k]))
        p_best, g_best, v_best = pool_p[start], pool_g[start], float(scores[start, k])
        trace = [v_best]
        rng = np.random.default_rng(np.random.SeedSequence(budget.seed, spawn_key=(1, k)))
        step = STEP0
        for _ in range(budget.n_refine):
            noise = rng.normal(0.0, step, size=p_best.shape)
            p_new = project_simplex((p_best + noise).reshape(aux_shape[0], -1)).reshape(p_best.shape)
            g_new = g_best.copy()
            flat = g_new.reshape(-1)
            pos = int(rng.integers(flat.size))
            flat[pos] = (flat[pos] + 1 + int(rng.integers(max(spec.x_size - 1, 1)))) % spec.x_size
            cand = scorer(np.stack([p_new, p_best]), np.stack([g_best, g_new]))[:, k]
            j = int(np.argmax(cand))
            if cand[j] > v_best:
                if j == 0:
                    p_best = p_new
                else:
                    g_best = g_new
                v_best = float(cand[j])
            else:
                step /= 2
                if step < STEP_FLOOR:
                    step = STEP0
            trace.append(v_best)
        cands = [AuxScheme(*budget.cards, p_best, g_best)]
        cands.append(AuxScheme(*budget.cards, pool_p[start], pool_g[start]))
        cands.extend(seeds)
        entries.append(_finish(spec, cfg, family, w, cands, trace))
    return FrontierReport(family, cfg, budget, entries)


@dataclass
class InclusionReport:
    causal: FrontierReport
    noncausal: FrontierReport
    holds: bool
    per_weight: list[bool]

    def to_dict(self) -> dict:
        return {
            "verdict": "HOLDS" if self.holds else "FAILS",
            "per_weight": [
                {"weight": list(c.weight), "causal": c.value, "noncausal": n.value, "holds": ok}
                for c, n, ok in zip(self.causal.entries, self.noncausal.entries, self.per_weight)
            ],
            "causal": self.causal.to_dict(),
            "noncausal": self.noncausal.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def causal_vs_noncausal(
    spec: ChannelSpec,
    state_at_rx1: bool,
    state_at_rx2: bool,
    budget: SearchBudget,
    family: BoundFamily = BoundFamily.UNIFIED_NO_RMSI,
) -> InclusionReport:
    causal_cfg = SideInfoConfig(CSIT.CAUSAL, state_at_rx1, state_at_rx2)
    nc_cfg = causal_cfg.replace(csit=CSIT.NONCAUSAL)
    causal = optimize(spec, causal_cfg, family, budget)
    seeds = [e.scheme.replicate(spec.s_size) if spec.s_size > 1 else e.scheme for e in causal.entries]
    noncausal = optimize(spec, nc_cfg, family, budget, seeds=seeds)
    per = [n.value >= c.value for c, n in zip(causal.entries, noncausal.entries)]
    return InclusionReport(causal, noncausal, all(per), per)


def trace_is_monotone(trace: Sequence[float]) -> bool:
    return all(b >= a for a, b in zip(trace, trace[1:]))

