"""Monte Carlo block-error simulation of the superposition/Marton schemes.

Two engines share one trial structure:

* ``exhaustive`` materialises every codebook and runs the joint-typicality
  decoders over the full candidate sets.
* ``ensemble`` materialises only the codewords the encoder looks at (the
  transmitted cloud centres and their transmitted bins).  The candidates the
  encoder never touched are independent of the channel output, so the chance
  that none of them is jointly typical is integrated exactly over the joint
  type of the competing cloud centre against the received sequences.  One
  uniform draw then picks the outcome at both receivers.  The statistics are
  those of the same random-coding ensemble; only the sampling is cheaper.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import CSIT, AuxScheme, ChannelSpec, SideInfoConfig, build_joint, validate_channel
from .region import RatePoint

TYPICAL_TOL = 1e-9
MAX_INDEX = 2**20
WORK_BUDGET = 10**9
AUTO_EXHAUSTIVE_WORK = 10**6
MAX_TYPES = 400_000
WILSON_Z = 1.959963984540054
DECODE_CHUNK = 1 << 22


class BudgetExceeded(RuntimeError):
    pass


class PackingFail(Exception):
    """Decoder found no consistent tuple (``kind="none"``) or several (``"ambiguous"``)."""

    def __init__(self, kind: str, count: int = 0):
        self.kind, self.count = kind, count
        super().__init__(f"packing failure: {kind} ({count} tuples)")


def index_size(n: int, rate: float) -> int:
    return 2 ** max(0, math.ceil(n * rate - 1e-9))


@dataclass(frozen=True)
class SimConfig:
    n: int
    rates: RatePoint = field(default_factory=RatePoint)
    r11: float | None = None
    r12: float | None = None
    r21: float | None = None
    r22: float | None = None
    rp0: float = 0.0
    rp1: float = 0.0
    rp2: float = 0.0
    eps_prime: float = 0.1
    eps1: float = 0.2
    eps2: float = 0.2
    trials: int = 100
    seed: int = 0
    mode: str = "auto"
    fixed_codebook: bool = False

    def __post_init__(self):
        if not isinstance(self.rates, RatePoint):
            object.__setattr__(self, "rates", RatePoint.of(self.rates))
        if self.n < 1:
            raise ValueError("blocklength must be at least 1")
        if self.trials < 0:
            raise ValueError("trial count must be nonnegative")
        for rate_name, a, b in (("r1", "r11", "r12"), ("r2", "r21", "r22")):
            total = getattr(self.rates, rate_name)
            lo, hi = getattr(self, a), getattr(self, b)
            if lo is None and hi is None:
                lo, hi = 0.0, total
            elif lo is None:
                lo = total - hi
            elif hi is None:
                hi = total - lo
            if lo < -1e-12 or hi < -1e-12 or abs(lo + hi - total) > 1e-12:
                raise ValueError(f"split {a}={lo}, {b}={hi} does not add up to {rate_name}={total}")
            object.__setattr__(self, a, max(float(lo), 0.0))
            object.__setattr__(self, b, max(float(hi), 0.0))
        if min(self.rp0, self.rp1, self.rp2) < 0:
            raise ValueError("bin rates must be nonnegative")
        if not (0 < self.eps_prime < min(self.eps1, self.eps2)):
            raise ValueError("need 0 < eps_prime < eps1, eps2")
        if self.mode not in ("auto", "exhaustive", "ensemble"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def sizes(self) -> dict[str, int]:
        r, n = self.rates, self.n
        return {
            "m0": index_size(n, r.r0), "m3": index_size(n, r.r3), "m4": index_size(n, r.r4),
            "m11": index_size(n, self.r11), "m12": index_size(n, self.r12),
            "m21": index_size(n, self.r21), "m22": index_size(n, self.r22),
            "l0": index_size(n, self.rp0), "l1": index_size(n, self.rp1), "l2": index_size(n, self.rp2),
        }

    def rates_dict(self) -> dict[str, float]:
        r = self.rates
        return {
            "R0": r.r0, "R1": r.r1, "R2": r.r2, "R3": r.r3, "R4": r.r4,
            "R11": self.r11, "R12": self.r12, "R21": self.r21, "R22": self.r22,
            "Rp0": self.rp0, "Rp1": self.rp1, "Rp2": self.rp2,
        }


# ------------------------------------------------------------ typicality

def typical_counts(counts: np.ndarray, ref: np.ndarray, n: int, eps: float) -> np.ndarray:
    """Row-wise robust typicality of joint-symbol counts ``(C, K)`` against ``ref``."""
    target = n * ref
    return (np.abs(counts - target) <= eps * target + TYPICAL_TOL).all(axis=-1)


def joint_counts(sym: np.ndarray, k: int) -> np.ndarray:
    """Per-row histograms of a ``(C, n)`` array of joint-symbol indices."""
    c = sym.shape[0]
    flat = sym.astype(np.int64) + k * np.arange(c, dtype=np.int64)[:, None]
    return np.bincount(flat.ravel(), minlength=c * k).reshape(c, k)


def typical(seqs: Sequence[np.ndarray], p: np.ndarray, eps: float) -> bool:
    """Whether the sequences are jointly ``eps``-robustly typical for ``p``."""
    p = np.asarray(p, dtype=float)
    arrs = [np.asarray(s, dtype=np.int64) for s in seqs]
    if len(arrs) != p.ndim or len({len(a) for a in arrs}) != 1:
        raise ValueError("need one sequence per axis of p, all of equal length")
    sym = np.ravel_multi_index(arrs, p.shape)
    counts = np.bincount(sym, minlength=p.size)
    return bool(typical_counts(counts[None], p.reshape(-1), len(arrs[0]), eps)[0])


# ----------------------------------------------------------------- model

class _Model:
    """Reference distributions and samplers derived from one joint."""

    def __init__(self, spec: ChannelSpec, cfg: SideInfoConfig, scheme: AuxScheme):
        self.spec, self.cfg, self.scheme = spec, cfg, scheme
        p = build_joint(spec, cfg, scheme).p
        s, u0, u1, u2 = spec.s_size, *scheme.cards
        self.s, self.u0, self.u1, self.u2 = s, u0, u1, u2
        self.noncausal = cfg.csit is CSIT.NONCAUSAL
        pu = p.sum(axis=(4, 5, 6))  # (s, u0, u1, u2)
        self.ref_enc = (pu.transpose(1, 2, 3, 0) if self.noncausal else pu.sum(axis=0)).reshape(-1)
        self.p_u0 = pu.sum(axis=(0, 2, 3))
        self.cond1 = self._cond(pu.sum(axis=(0, 3)))
        self.cond2 = self._cond(pu.sum(axis=(0, 2)))
        self.ref1, self.y1 = self._rx_ref(p.sum(axis=(3, 4, 6)), cfg.state_at_rx1)
        self.ref2, self.y2 = self._rx_ref(p.sum(axis=(2, 4, 5)), cfg.state_at_rx2)
        self.cdf_u0 = np.cumsum(self.p_u0)
        self.cdf1 = np.cumsum(self.cond1, axis=1)
        self.cdf2 = np.cumsum(self.cond2, axis=1)
        self.cdf_s = np.cumsum(spec.p_s)
        self.cdf_y = np.cumsum(spec.p_trans.reshape(s, spec.x_size, -1), axis=2)
        self.gamma = scheme.gamma
        self.dtype = np.uint8 if max(u0, u1, u2) <= 255 else np.int32

    def _cond(self, pair: np.ndarray) -> np.ndarray:
        tot = pair.sum(axis=1, keepdims=True)
        uniform = np.full_like(pair, 1.0 / pair.shape[1])
        return np.where(tot > 0, pair / np.where(tot > 0, tot, 1.0), uniform)

    def _rx_ref(self, m: np.ndarray, state: bool):
        # m is (s, u0, ui, yi); the composite output index is yi * s_size + s
        m = m.transpose(1, 2, 3, 0)
        if state:
            m = m.reshape(m.shape[0], m.shape[1], -1)
        else:
            m = m.sum(axis=3)
        return m.reshape(-1), m.shape[2]

    @staticmethod
    def _draw(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
        return (u[..., None] >= cdf[..., :-1]).sum(axis=-1)

    def sample_u0(self, rng, shape) -> np.ndarray:
        return self._draw(self.cdf_u0, rng.random(shape)).astype(self.dtype)

    def sample_sat(self, rng, cdf, centres: np.ndarray, extra: tuple[int, ...]) -> np.ndarray:
        """Satellites for each centre sequence: shape ``centres.shape[:-1] + extra + (n,)``."""
        lead, n = centres.shape[:-1], centres.shape[-1]
        u = rng.random(lead + extra + (n,))
        c = centres.reshape(lead + (1,) * len(extra) + (n,)).astype(np.int64)
        return self._draw(cdf[c], u).astype(self.dtype)

    def sample_state(self, rng, n: int) -> np.ndarray:
        return self._draw(self.cdf_s, rng.random(n))

    def transmit(self, rng, x: np.ndarray, s: np.ndarray):
        out = self._draw(self.cdf_y[s, x], rng.random(len(x)))
        y1, y2 = np.divmod(out, self.spec.y2_size)
        yt1 = y1 * self.s + s if self.cfg.state_at_rx1 else y1
        yt2 = y2 * self.s + s if self.cfg.state_at_rx2 else y2
        return yt1, yt2

    def input_symbols(self, u0, u1, u2, s) -> np.ndarray:
        st = s if self.gamma.shape[3] > 1 else np.zeros_like(s)
        return self.gamma[u0.astype(np.int64), u1.astype(np.int64), u2.astype(np.int64), st]


# ------------------------------------------------------------- codebooks

@dataclass
class Codebooks:
    """Explicit codebooks indexed ``[m0, m3, m4, m11, m21, l0, ...]``.

    ``u1`` carries two more axes ``[m12, l1]`` and ``u2`` carries ``[m22, l2]``.
    """

    model: _Model
    sizes: dict[str, int]
    n: int
    eps_prime: float
    u0: np.ndarray
    u1: np.ndarray
    u2: np.ndarray

    def cloud(self, msg: dict) -> tuple[int, ...]:
        return (msg["m0"], msg["m3"], msg["m4"], msg["m11"], msg["m21"])


_COMMON = ("m0", "m3", "m4", "m11", "m21", "l0")


def generate_codebooks(model: _Model, sim: SimConfig, rng) -> Codebooks:
    sz = sim.sizes()
    shape = tuple(sz[k] for k in _COMMON)
    u0 = model.sample_u0(rng, shape + (sim.n,))
    u1 = model.sample_sat(rng, model.cdf1, u0, (sz["m12"], sz["l1"]))
    u2 = model.sample_sat(rng, model.cdf2, u0, (sz["m22"], sz["l2"]))
    return Codebooks(model, sz, sim.n, sim.eps_prime, u0, u1, u2)


def _first_hit(mask: np.ndarray) -> int | None:
    hits = np.flatnonzero(mask)
    return int(hits[0]) if hits.size else None


def _search_causal(model: _Model, u0, u1s, u2s, eps) -> tuple[int, int, bool]:
    """First ``(l1, l2)`` in lexicographic order with ``(u0, u1, u2)`` typical."""
    n, l2n = u0.shape[-1], len(u2s)
    k = model.u0 * model.u1 * model.u2
    base = u0.astype(np.int64) * model.u1
    for l1, row in enumerate(u1s):
        sym = ((base + row) * model.u2)[None, :] + u2s.astype(np.int64)
        ok = typical_counts(joint_counts(sym, k), model.ref_enc, n, eps)
        hit = _first_hit(ok)
        if hit is not None:
            return l1, hit, False
    return 0, 0, True


def _search_noncausal(model: _Model, u0s, u1s, u2s, s, eps) -> tuple[int, int, int, bool]:
    """First ``(l0, l1, l2)`` with ``(u0, u1, u2, s)`` typical; ``u1s`` is ``[l0, l1, n]``."""
    n = u0s.shape[-1]
    k = model.u0 * model.u1 * model.u2 * model.s
    for l0 in range(len(u0s)):
        base = u0s[l0].astype(np.int64) * model.u1
        for l1, row in enumerate(u1s[l0]):
            sym = ((base + row) * model.u2)[None, :] + u2s[l0].astype(np.int64)
            sym = sym * model.s + s[None, :]
            hit = _first_hit(typical_counts(joint_counts(sym, k), model.ref_enc, n, eps))
            if hit is not None:
                return l0, l1, hit, False
    return 0, 0, 0, True


def encode_causal(codebooks: Codebooks, messages: dict, s: np.ndarray, scheme: AuxScheme | None = None, rng=None):
    """Return ``(x, (l1, l2), covering_failed)``; ``x[j]`` reads only ``s[j]``."""
    m = codebooks.model
    c = codebooks.cloud(messages) + (0,)
    u0 = codebooks.u0[c]
    u1s = codebooks.u1[c + (messages["m12"],)]
    u2s = codebooks.u2[c + (messages["m22"],)]
    l1, l2, failed = _search_causal(m, u0, u1s, u2s, codebooks.eps_prime)
    x = m.input_symbols(u0, u1s[l1], u2s[l2], np.asarray(s))
    return x, (l1, l2), failed


def encode_noncausal(codebooks: Codebooks, messages: dict, s: np.ndarray, scheme: AuxScheme | None = None, rng=None):
    """Return ``(x, (l0, l1, l2), covering_failed)`` using the whole state sequence."""
    m = codebooks.model
    c = codebooks.cloud(messages)
    s = np.asarray(s)
    u0s = codebooks.u0[c]
    u1s = codebooks.u1[c][:, messages["m12"]]
    u2s = codebooks.u2[c][:, messages["m22"]]
    l0, l1, l2, failed = _search_noncausal(m, u0s, u1s, u2s, s, codebooks.eps_prime)
    x = m.input_symbols(u0s[l0], u1s[l0, l1], u2s[l0, l2], s)
    return x, (l0, l1, l2), failed


def decode(rx: int, codebooks: Codebooks, ytilde: np.ndarray, known: dict, eps: float) -> tuple[int, ...]:
    """Exhaustive joint-typicality decoding at receiver ``rx``.

    Receiver 1 returns ``(m0, m3, m11, m12)`` and uses ``known["m4"]``;
    receiver 2 returns ``(m0, m4, m21, m22)`` and uses ``known["m3"]``.
    """
    m = codebooks.model
    n = codebooks.n
    y = np.asarray(ytilde, dtype=np.int64)
    if rx == 1:
        u0 = codebooks.u0[:, :, known["m4"]]  # (m0, m3, m11, m21, l0, n)
        sat = codebooks.u1[:, :, known["m4"]]  # (..., l0, m12, l1, n)
        ref, ysz, usz, free = m.ref1, m.y1, m.u1, (3, 4, 6)
    elif rx == 2:
        u0 = codebooks.u0[:, known["m3"]].transpose(0, 1, 3, 2, 4, 5)  # (m0, m4, m21, m11, l0, n)
        sat = codebooks.u2[:, known["m3"]].transpose(0, 1, 3, 2, 4, 5, 6, 7)
        ref, ysz, usz, free = m.ref2, m.y2, m.u2, (3, 4, 6)
    else:
        raise ValueError("rx must be 1 or 2")
    k = m.u0 * usz * ysz
    shape = sat.shape[:-1]
    sats = sat.reshape(-1, n)
    centres = np.broadcast_to(u0[..., None, None, :], sat.shape).reshape(-1, n)
    hits = np.empty(len(sats), dtype=bool)
    step = max(1, DECODE_CHUNK // n)
    for lo in range(0, len(sats), step):
        sym = (centres[lo:lo + step].astype(np.int64) * usz + sats[lo:lo + step]) * ysz + y
        hits[lo:lo + step] = typical_counts(joint_counts(sym, k), ref, n, eps)
    found = hits.reshape(shape).any(axis=free)
    tuples = np.argwhere(found)
    if len(tuples) == 0:
        raise PackingFail("none")
    if len(tuples) > 1:
        raise PackingFail("ambiguous", len(tuples))
    return tuple(int(v) for v in tuples[0])


# --------------------------------------------------------------- outcomes

@dataclass
class TrialOutcome:
    rx1_ok: bool
    rx2_ok: bool
    covering_failed: bool
    chosen: tuple[int, ...]
    rx1_kind: str = "ok"
    rx2_kind: str = "ok"

    @property
    def error(self) -> bool:
        return not (self.rx1_ok and self.rx2_ok)


def wilson(k: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = k / trials
    den = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


@dataclass
class SimReport:
    n: int
    rates: dict
    trials: int
    errors: int
    causes: dict
    mode: str
    outcomes: list[TrialOutcome] = field(default_factory=list, repr=False)

    @property
    def p_e(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson(self.errors, self.trials)

    def to_dict(self) -> dict:
        lo, hi = self.ci
        return {
            "n": self.n, "rates": self.rates, "trials": self.trials,
            "p_e": self.p_e, "ci_low": lo, "ci_high": hi, "causes": dict(self.causes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def sweep_csv(reports: Sequence[SimReport]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["n", "trials", "p_e", "ci_low", "ci_high", "covering", "rx1_packing", "rx2_packing"])
    for r in reports:
        lo, hi = r.ci
        c = r.causes
        out.writerow([r.n, r.trials, repr(r.p_e), repr(lo), repr(hi), c["covering"], c["rx1_packing"], c["rx2_packing"]])
    return buf.getvalue()


# ------------------------------------------------------------- budgeting

def _tuple_spaces(sz: dict) -> tuple[int, int]:
    rx1 = sz["m0"] * sz["m3"] * sz["m11"] * sz["m12"]
    rx2 = sz["m0"] * sz["m4"] * sz["m21"] * sz["m22"]
    return rx1, rx2


def exhaustive_work(sim: SimConfig, noncausal: bool) -> int:
    sz, n = sim.sizes(), sim.n
    clouds = sz["m0"] * sz["m3"] * sz["m4"] * sz["m11"] * sz["m21"] * sz["l0"]
    gen = clouds * (1 + sz["m12"] * sz["l1"] + sz["m22"] * sz["l2"])
    enc = (sz["l0"] if noncausal else 1) * sz["l1"] * sz["l2"]
    rx1 = clouds // sz["m4"] * sz["m12"] * sz["l1"]
    rx2 = clouds // sz["m3"] * sz["m22"] * sz["l2"]
    return (gen + enc + rx1 + rx2) * n


def ensemble_work(sim: SimConfig, noncausal: bool) -> int:
    sz = sim.sizes()
    l0 = sz["l0"] if noncausal else 1
    return l0 * (1 + 2 * sz["l1"] + 2 * sz["l2"] + sz["l1"] * sz["l2"]) * sim.n


def choose_mode(sim: SimConfig, noncausal: bool) -> str:
    sz = sim.sizes()
    explicit_ok = all(v <= MAX_INDEX for v in sz.values())
    ex = exhaustive_work(sim, noncausal)
    if sim.mode == "exhaustive":
        if not explicit_ok:
            raise BudgetExceeded(f"index sizes {sz} exceed {MAX_INDEX} for explicit codebooks")
        if ex > WORK_BUDGET:
            raise BudgetExceeded(f"exhaustive work {ex} exceeds {WORK_BUDGET} symbol operations per trial")
        return "exhaustive"
    ens_ok = ensemble_work(sim, noncausal) <= WORK_BUDGET and all(
        sz[k] <= MAX_INDEX for k in ("l0", "l1", "l2")
    )
    if sim.mode == "ensemble" or not (explicit_ok and ex <= AUTO_EXHAUSTIVE_WORK):
        if sim.fixed_codebook:
            raise BudgetExceeded("a fixed codebook needs the exhaustive engine, which is over budget")
        if not ens_ok:
            raise BudgetExceeded(f"ensemble work {ensemble_work(sim, noncausal)} exceeds {WORK_BUDGET}")
        return "ensemble"
    return "exhaustive"


# --------------------------------------------------------- exhaustive run

def _draw_messages(rng, sz: dict) -> dict:
    return {k: int(rng.integers(sz[k])) for k in ("m0", "m3", "m4", "m11", "m12", "m21", "m22")}


def _exhaustive_trial(model: _Model, sim: SimConfig, rng, fixed: Codebooks | None) -> TrialOutcome:
    cb = fixed if fixed is not None else generate_codebooks(model, sim, rng)
    msg = _draw_messages(rng, cb.sizes)
    s = model.sample_state(rng, sim.n)
    if model.noncausal:
        x, chosen, failed = encode_noncausal(cb, msg, s)
    else:
        x, chosen, failed = encode_causal(cb, msg, s)
    y1, y2 = model.transmit(rng, x, s)
    space1, space2 = _tuple_spaces(cb.sizes)
    res = []
    for rx, y, eps, space, truth in (
        (1, y1, sim.eps1, space1, (msg["m0"], msg["m3"], msg["m11"], msg["m12"])),
        (2, y2, sim.eps2, space2, (msg["m0"], msg["m4"], msg["m21"], msg["m22"])),
    ):
        if space == 1:
            res.append((True, "ok"))
            continue
        try:
            got = decode(rx, cb, y, msg, eps)
        except PackingFail as e:
            res.append((False, e.kind))
            continue
        res.append((got == truth, "ok" if got == truth else "wrong"))
    return TrialOutcome(res[0][0], res[1][0], failed, tuple(chosen), res[0][1], res[1][1])


# ----------------------------------------------------------- ensemble run

def _binom_logpmf(k: int, r: int, theta: float) -> float:
    if theta <= 0:
        return 0.0 if k == 0 else -math.inf
    if theta >= 1:
        return 0.0 if k == r else -math.inf
    return (math.lgamma(r + 1) - math.lgamma(k + 1) - math.lgamma(r - k + 1)
            + k * math.log(theta) + (r - k) * math.log1p(-theta))


def box_probability(total: int, probs: Sequence[float], lo: Sequence[int], hi: Sequence[int]) -> float:
    """P(multinomial(total, probs) has every count ``k_b`` within ``[lo_b, hi_b]``)."""
    dp = {total: 1.0}  # remaining trials -> probability
    mass = 1.0
    last = len(probs) - 1
    for b, pb in enumerate(probs):
        nxt: dict[int, float] = {}
        for rem, pr in dp.items():
            if b == last:
                if lo[b] <= rem <= hi[b]:
                    nxt[0] = nxt.get(0, 0.0) + pr
                continue
            theta = min(1.0, pb / mass) if mass > 0 else 0.0
            for k in range(max(lo[b], 0), min(hi[b], rem) + 1):
                lp = _binom_logpmf(k, rem, theta)
                if lp > -math.inf:
                    nxt[rem - k] = nxt.get(rem - k, 0.0) + pr * math.exp(lp)
        dp = nxt
        mass -= pb
        if not dp:
            return 0.0
    return dp.get(0, 0.0)


class _SatelliteHit:
    """Chance that one fresh satellite is typical with a given centre/output type."""

    def __init__(self, ref: np.ndarray, cond: np.ndarray, u0: int, u: int, y: int, n: int, eps: float):
        p = ref.reshape(u0, u, y)
        target = n * p
        self.lo = np.ceil(target - eps * target - TYPICAL_TOL).astype(int)
        self.hi = np.floor(target + eps * target + TYPICAL_TOL).astype(int)
        self.cond = cond
        self.memo: dict[bytes, float] = {}

    def __call__(self, counts: np.ndarray) -> float:
        key = counts.tobytes()
        hit = self.memo.get(key)
        if hit is None:
            hit = 1.0
            for a in range(counts.shape[0]):
                for c in range(counts.shape[1]):
                    hit *= box_probability(int(counts[a, c]), self.cond[a], self.lo[a, :, c], self.hi[a, :, c])
                    if hit == 0.0:
                        break
                if hit == 0.0:
                    break
            self.memo[key] = hit
        return hit


def _compositions(total: int, parts: int, allowed: np.ndarray) -> np.ndarray:
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, counts = -1, []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(total + parts - 2 - prev)
        if all(allowed[i] or counts[i] == 0 for i in range(parts)):
            rows.append(counts)
    return np.array(rows, dtype=np.int64).reshape(-1, parts)


class _Ensemble:
    def __init__(self, model: _Model, sim: SimConfig):
        self.model, self.sim = model, sim
        n = sim.n
        self.hit1 = _SatelliteHit(model.ref1, model.cond1, model.u0, model.u1, model.y1, n, sim.eps1)
        self.hit2 = _SatelliteHit(model.ref2, model.cond2, model.u0, model.u2, model.y2, n, sim.eps2)
        sz = sim.sizes()
        self.sz = sz
        self.space1, self.space2 = _tuple_spaces(sz)
        l0 = float(sz["l0"]) if model.noncausal else 1.0
        n0, n3, n4 = float(sz["m0"]), float(sz["m3"]), float(sz["m4"])
        n11, n21 = float(sz["m11"]), float(sz["m21"])
        everything = n0 * n11 * n21
        # competing cloud centres, by what each receiver would read off them:
        # (rx1 role, rx2 role, count); role "D" keeps the receiver's own
        # message tuple intact, "E" breaks it, None means not a candidate there
        self.categories = [
            ("D", "E", (n21 - 1) * l0),
            ("E", "D", (n11 - 1) * l0),
            ("E", "E", (everything - n11 - n21 + 1) * l0),
            ("E", None, (n3 - 1) * everything * l0),
            (None, "E", (n4 - 1) * everything * l0),
        ]
        self.l1, self.l2 = float(sz["l1"]), float(sz["l2"])
        self.n12, self.n22 = float(sz["m12"]), float(sz["m22"])
        self.allowed = model.p_u0 > 0
        self.log_pu0 = np.log(np.where(self.allowed, model.p_u0, 1.0))

    def _types(self, y1: np.ndarray, y2: np.ndarray):
        """Joint types of a fresh centre against ``(y1, y2)``: probs and count matrices."""
        m = self.model
        pair = y1 * m.y2 + y2
        vals, counts = np.unique(pair, return_counts=True)
        logp = np.zeros(1)
        c1 = np.zeros((1, m.u0, m.y1), dtype=np.int64)
        c2 = np.zeros((1, m.u0, m.y2), dtype=np.int64)
        for v, nv in zip(vals, counts):
            comp = _compositions(int(nv), m.u0, self.allowed)
            lp = (math.lgamma(nv + 1) - np.array([sum(math.lgamma(k + 1) for k in row) for row in comp])
                  + comp @ self.log_pu0)
            if len(logp) * len(comp) > MAX_TYPES:
                raise BudgetExceeded(f"more than {MAX_TYPES} competitor types at n={self.sim.n}")
            a, b = divmod(int(v), m.y2)
            logp = (logp[:, None] + lp[None, :]).reshape(-1)
            n1 = np.repeat(c1, len(comp), axis=0)
            n2 = np.repeat(c2, len(comp), axis=0)
            tiled = np.tile(comp, (len(c1), 1))
            n1[:, :, a] += tiled
            n2[:, :, b] += tiled
            c1, c2 = n1, n2
        return np.exp(logp), c1, c2

    def _hits(self, hit: _SatelliteHit, counts: np.ndarray) -> np.ndarray:
        flat = counts.reshape(len(counts), -1)
        uniq, inv = np.unique(flat, axis=0, return_inverse=True)
        vals = np.array([hit(row.reshape(counts.shape[1:])) for row in uniq])
        return vals[np.asarray(inv).reshape(-1)]

    def _centre_log_miss(self, hit: _SatelliteHit, u0: np.ndarray, y: np.ndarray, ysz: int) -> float:
        cnt = joint_counts((u0.astype(np.int64) * ysz + y)[None], self.model.u0 * ysz)[0]
        q = hit(cnt.reshape(self.model.u0, ysz))
        return math.log1p(-q) if q < 1 else -math.inf

    def outcome_probs(self, y1, y2, centres, g1_explicit: bool, g2_explicit: bool) -> tuple[float, float, float]:
        """``(P(S1), P(S2), P(S1 and S2))`` given the explicit part of the trial.

        ``S_i`` is success at receiver ``i``; ``g*_explicit`` say whether an
        examined codeword already carries the right tuple to that receiver.
        """
        m = self.model
        need1, need2 = self.space1 > 1, self.space2 > 1
        probs, c1, c2 = self._types(y1, y2)
        with np.errstate(divide="ignore"):
            lq1 = np.log1p(-self._hits(self.hit1, c1))
            lq2 = np.log1p(-self._hits(self.hit2, c2))

        # wrong bins hanging off the examined centres
        base1 = base2 = 0.0
        for u0 in centres:
            if need1 and self.n12 > 1:
                base1 += (self.n12 - 1) * self.l1 * self._centre_log_miss(self.hit1, u0, y1, m.y1)
            if need2 and self.n22 > 1:
                base2 += (self.n22 - 1) * self.l2 * self._centre_log_miss(self.hit2, u0, y2, m.y2)

        def f(a: int, b: int, use1: bool, use2: bool) -> float:
            """P(no wrong tuple typical anywhere it matters, and no right one where flagged)."""
            total = (base1 if use1 else 0.0) + (base2 if use2 else 0.0)
            for r1, r2, count in self.categories:
                if count <= 0 or total == -math.inf:
                    continue
                alpha1 = alpha2 = 0.0
                if use1 and r1 == "D":
                    alpha1 = (self.n12 - 1 + a) * self.l1
                elif use1 and r1 == "E":
                    alpha1 = self.n12 * self.l1
                if use2 and r2 == "D":
                    alpha2 = (self.n22 - 1 + b) * self.l2
                elif use2 and r2 == "E":
                    alpha2 = self.n22 * self.l2
                if alpha1 == 0 and alpha2 == 0:
                    continue
                expo = np.zeros_like(probs)
                if alpha1:
                    expo = expo + np.where(lq1 == -np.inf, -np.inf, alpha1 * np.where(lq1 == -np.inf, 0.0, lq1))
                if alpha2:
                    expo = expo + np.where(lq2 == -np.inf, -np.inf, alpha2 * np.where(lq2 == -np.inf, 0.0, lq2))
                delta = float(np.sum(probs * -np.expm1(expo)))
                if delta >= 1.0:
                    return 0.0
                total += count * math.log1p(-delta)
            return math.exp(total)

        ng1, ng2 = int(not g1_explicit), int(not g2_explicit)
        p1 = f(0, 0, True, False) - ng1 * f(1, 0, True, False) if need1 else 1.0
        p2 = f(0, 0, False, True) - ng2 * f(0, 1, False, True) if need2 else 1.0
        if need1 and need2:
            p12 = (f(0, 0, True, True) - ng1 * f(1, 0, True, True)
                   - ng2 * f(0, 1, True, True) + ng1 * ng2 * f(1, 1, True, True))
        else:
            p12 = p1 if need1 else p2
        clip = lambda v: min(max(v, 0.0), 1.0)  # noqa: E731
        p1, p2 = clip(p1), clip(p2)
        return p1, p2, clip(min(p12, p1, p2))


def _ensemble_trial(ens: _Ensemble, rng) -> TrialOutcome:
    model, sim, sz = ens.model, ens.sim, ens.sz
    n = sim.n
    s = model.sample_state(rng, n)
    l0 = sz["l0"] if model.noncausal else 1
    u0s = model.sample_u0(rng, (l0, n))
    u1s = model.sample_sat(rng, model.cdf1, u0s, (sz["l1"],))
    u2s = model.sample_sat(rng, model.cdf2, u0s, (sz["l2"],))
    if model.noncausal:
        a, b, c, failed = _search_noncausal(model, u0s, u1s, u2s, s, sim.eps_prime)
        chosen = (a, b, c)
    else:
        a = 0
        b, c, failed = _search_causal(model, u0s[0], u1s[0], u2s[0], sim.eps_prime)
        chosen = (b, c)
    x = model.input_symbols(u0s[a], u1s[a, b], u2s[a, c], s)
    y1, y2 = model.transmit(rng, x, s)

    def explicit_hit(sats, ref, usz, ysz, y, eps) -> bool:
        sym = ((u0s.astype(np.int64)[:, None, :] * usz + sats) * ysz + y).reshape(-1, n)
        return bool(typical_counts(joint_counts(sym, model.u0 * usz * ysz), ref, n, eps).any())

    g1 = explicit_hit(u1s, model.ref1, model.u1, model.y1, y1, sim.eps1)
    g2 = explicit_hit(u2s, model.ref2, model.u2, model.y2, y2, sim.eps2)
    p1, p2, p12 = ens.outcome_probs(y1, y2, u0s, g1, g2)
    u = rng.random()
    # cumulative order: both succeed, only rx1, only rx2, neither
    if u < p12:
        ok1, ok2 = True, True
    elif u < p1:
        ok1, ok2 = True, False
    elif u < p1 + p2 - p12:
        ok1, ok2 = False, True
    else:
        ok1, ok2 = False, False
    return TrialOutcome(ok1, ok2, failed, chosen, "ok" if ok1 else "packing", "ok" if ok2 else "packing")


# --------------------------------------------------------------- driver

def run_trials(
    spec: ChannelSpec,
    cfg: SideInfoConfig,
    scheme: AuxScheme,
    sim: SimConfig,
    rmsi: bool = False,
    keep_outcomes: bool = False,
) -> SimReport:
    """Estimate the block error probability over fresh random codebooks."""
    validate_channel(spec)
    if not rmsi and (sim.rates.r3 > 0 or sim.rates.r4 > 0):
        raise ValueError("R3 and R4 must be zero without receiver message side information")
    model = _Model(spec, cfg, scheme)
    mode = choose_mode(sim, model.noncausal)
    fixed = None
    if mode == "exhaustive" and sim.fixed_codebook:
        fixed = generate_codebooks(model, sim, np.random.default_rng(np.random.SeedSequence(sim.seed, spawn_key=(2**31,))))
    ens = _Ensemble(model, sim) if mode == "ensemble" else None
    causes = {"covering": 0, "rx1_packing": 0, "rx2_packing": 0}
    errors = 0
    kept = []
    for t in range(sim.trials):
        rng = np.random.default_rng(np.random.SeedSequence(sim.seed, spawn_key=(t,)))
        out = _exhaustive_trial(model, sim, rng, fixed) if ens is None else _ensemble_trial(ens, rng)
        if out.error:
            errors += 1
            causes["covering"] += int(out.covering_failed)
            causes["rx1_packing"] += int(not out.rx1_ok)
            causes["rx2_packing"] += int(not out.rx2_ok)
        if keep_outcomes:
            kept.append(out)
    return SimReport(sim.n, sim.rates_dict(), sim.trials, errors, causes, mode, kept)


def sweep(spec, cfg, scheme, sim: SimConfig, ns: Sequence[int], rmsi: bool = False) -> list[SimReport]:
    return [run_trials(spec, cfg, scheme, replace(sim, n=int(n)), rmsi) for n in ns]
