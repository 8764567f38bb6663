import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bcrmsi.channel import CSIT, AuxScheme, ChannelSpec, SideInfoConfig
from bcrmsi.sim import (
    BudgetExceeded, PackingFail, SimConfig, _Model, box_probability, decode, encode_causal, encode_noncausal,
    generate_codebooks, index_size, run_trials, sweep, sweep_csv, typical, wilson,
)
from conftest import bit_pipe, bsc, random_channel, random_scheme
from oracles import box_probability_brute, brute_joint, wilson_oracle

PIPE_SCHEME = AuxScheme(2, 1, 1, np.full((1, 2, 1, 1), 0.5), np.array([0, 1]).reshape(2, 1, 1, 1))


def test_index_sizes():
    assert index_size(8, 0.5) == 16
    assert index_size(8, 0.0) == 1
    assert index_size(10, 0.3) == 8
    assert index_size(6, 1 / 3) == 4  # float noise in n * R must not add a bit


def test_typicality_by_hand():
    p = np.array([[0.25, 0.25], [0.5, 0.0]])
    assert typical([[0, 0, 1, 1], [0, 1, 0, 0]], p, 0.01)
    assert not typical([[0, 0, 1, 1], [0, 1, 0, 1]], p, 0.99)  # a zero-probability pair
    assert not typical([[0, 0, 0, 1], [0, 1, 0, 0]], p, 0.5)


def test_wilson_interval():
    for k, n in [(0, 10), (3, 10), (735, 1000), (1000, 1000)]:
        lo, hi = wilson(k, n)
        want = wilson_oracle(k, n)
        assert lo == pytest.approx(max(0.0, want[0]), abs=1e-12)
        assert hi == pytest.approx(min(1.0, want[1]), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_box_probability_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    total = int(rng.integers(0, 9))
    probs = rng.dirichlet(np.ones(k))
    lo = rng.integers(0, 3, size=k)
    hi = lo + rng.integers(0, 6, size=k)
    assert box_probability(total, probs, lo, hi) == pytest.approx(
        box_probability_brute(total, probs, lo, hi), abs=1e-12)


def test_config_checks():
    with pytest.raises(ValueError):
        SimConfig(8, (0, 1, 0, 0, 0), r11=0.3, r12=0.3)
    with pytest.raises(ValueError):
        SimConfig(8, eps_prime=0.3, eps1=0.2)
    with pytest.raises(ValueError):
        SimConfig(8, mode="fast")
    cfg = SimConfig(8, (0, 1, 0.5, 0, 0), r11=0.25)
    assert (cfg.r11, cfg.r12, cfg.r21, cfg.r22) == (0.25, 0.75, 0.0, 0.5)


def test_rmsi_rates_need_rmsi_flag():
    with pytest.raises(ValueError):
        run_trials(bit_pipe(), SideInfoConfig(CSIT.NONE), PIPE_SCHEME, SimConfig(8, (0, 0, 0, 0.5, 0)))


def test_over_budget_is_refused():
    with pytest.raises(BudgetExceeded):
        run_trials(bit_pipe(), SideInfoConfig(CSIT.NONE), PIPE_SCHEME,
                   SimConfig(64, (1.0, 0, 0, 0, 0), mode="exhaustive", trials=1))


# ------------------------------------------------------------------ decoding

def _ref_triples(spec, cfg, sch, rx):
    joint = brute_joint(spec.to_dict(), sch.to_dict(), cfg.csit.value)
    state = cfg.state_at_rx1 if rx == 1 else cfg.state_at_rx2
    ref = Counter()
    for (s, u0, u1, u2, x, y1, y2), pr in joint.items():
        u, y = (u1, y1) if rx == 1 else (u2, y2)
        ref[(u0, u, y * spec.s_size + s if state else y)] += pr
    return ref


def _typical_oracle(ref, seqs, eps):
    n = len(seqs[0])
    counts = Counter(zip(*(map(int, s) for s in seqs)))
    if any(k not in ref or ref[k] == 0 for k in counts):
        return False
    return all(abs(counts.get(k, 0) - n * p) <= eps * n * p + 1e-9 for k, p in ref.items())


def _decode_oracle(cb, rx, y, known, ref, eps):
    sz = cb.sizes
    found = set()
    for m0, mi, mj, mk, l0 in itertools.product(
            range(sz["m0"]), range(sz["m3" if rx == 1 else "m4"]), range(sz["m11"]),
            range(sz["m21"]), range(sz["l0"])):
        if rx == 1:
            idx = (m0, mi, known["m4"], mj, mk, l0)
            sats, own = cb.u1[idx], (m0, mi, mj)
        else:
            idx = (m0, known["m3"], mi, mj, mk, l0)
            sats, own = cb.u2[idx], (m0, mi, mk)
        for m_sat, l_sat in itertools.product(range(sats.shape[0]), range(sats.shape[1])):
            if _typical_oracle(ref, [cb.u0[idx], sats[m_sat, l_sat], y], eps):
                found.add(own + (m_sat,))
    return found


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decoder_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    spec = random_channel(rng)
    cfg = SideInfoConfig(CSIT.CAUSAL, bool(rng.integers(2)), bool(rng.integers(2)))
    sch = random_scheme(rng, spec, cfg)
    sim = SimConfig(6, (1 / 3, 1 / 3, 1 / 6, 0, 0), r11=1 / 6, r21=0.0, rp1=1 / 6, rp2=1 / 6,
                    eps_prime=0.5, eps1=1.0, eps2=1.0)
    model = _Model(spec, cfg, sch)
    cb = generate_codebooks(model, sim, rng)
    msg = {k: int(rng.integers(v)) for k, v in cb.sizes.items() if k.startswith("m")}
    s = model.sample_state(rng, 6)
    x, _, _ = encode_causal(cb, msg, s)
    y1, y2 = model.transmit(rng, x, s)
    for rx, y in ((1, y1), (2, y2)):
        want = _decode_oracle(cb, rx, y, msg, _ref_triples(spec, cfg, sch, rx), 1.0)
        if len(want) == 1:
            assert decode(rx, cb, y, msg, 1.0) == next(iter(want))
        else:
            with pytest.raises(PackingFail) as e:
                decode(rx, cb, y, msg, 1.0)
            assert e.value.kind == ("none" if not want else "ambiguous")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_causal_encoder_never_reads_ahead(seed):
    rng = np.random.default_rng(seed)
    spec = random_channel(rng, s=3)
    cfg = SideInfoConfig(CSIT.CAUSAL)
    sch = random_scheme(rng, spec, cfg)
    sim = SimConfig(12, (0.25, 0.25, 0.25, 0, 0), rp1=0.25, rp2=0.25, eps_prime=0.5, eps1=1, eps2=1)
    model = _Model(spec, cfg, sch)
    cb = generate_codebooks(model, sim, rng)
    msg = {k: int(rng.integers(v)) for k, v in cb.sizes.items() if k.startswith("m")}
    s = model.sample_state(rng, 12)
    x, _, _ = encode_causal(cb, msg, s)
    j = int(rng.integers(12))
    s2 = s.copy()
    s2[j + 1:] = rng.integers(0, 3, size=11 - j)
    x2, _, _ = encode_causal(cb, msg, s2)
    assert np.array_equal(x[:j + 1], x2[:j + 1])


# ------------------------------------------------------------------ reports

def test_runs_are_reproducible_and_seed_sensitive():
    sim = SimConfig(8, (0.5, 0, 0, 0, 0), trials=200, seed=4)
    a = run_trials(bit_pipe(), SideInfoConfig(CSIT.NONE), PIPE_SCHEME, sim)
    b = run_trials(bit_pipe(), SideInfoConfig(CSIT.NONE), PIPE_SCHEME, sim)
    c = run_trials(bit_pipe(), SideInfoConfig(CSIT.NONE), PIPE_SCHEME, SimConfig(8, (0.5, 0, 0, 0, 0), trials=200, seed=5))
    assert a.to_json() == b.to_json()
    assert a.errors != c.errors or a.causes != c.causes
    assert set(a.to_dict()) == {"n", "rates", "trials", "p_e", "ci_low", "ci_high", "causes"}


def test_zero_capacity_channel_always_fails():
    w = np.full((1, 2, 2), 0.5)
    spec = ChannelSpec.from_marginals([1.0], w, w)
    rep = run_trials(spec, SideInfoConfig(CSIT.NONE), PIPE_SCHEME, SimConfig(16, (0.5, 0, 0, 0, 0), trials=200))
    assert rep.p_e > 0.95


def test_receiver_with_nothing_to_decode_always_succeeds():
    sim = SimConfig(8, (0, 0.5, 0, 0, 0), trials=100)
    sch = AuxScheme(1, 2, 1, np.full((1, 1, 2, 1), 0.5), np.array([0, 1]).reshape(1, 2, 1, 1))
    rep = run_trials(bit_pipe(), SideInfoConfig(CSIT.NONE), sch, sim)
    assert rep.causes["rx2_packing"] == 0 and rep.errors > 0


def test_sweep_csv_has_one_row_per_blocklength():
    reps = sweep(bit_pipe(), SideInfoConfig(CSIT.NONE), PIPE_SCHEME, SimConfig(8, (0.5, 0, 0, 0, 0), trials=50), [8, 12])
    lines = sweep_csv(reps).splitlines()
    assert lines[0].startswith("n,trials,p_e") and [l.split(",")[0] for l in lines[1:]] == ["8", "12"]


def _two_sided_close(k1, k2, n, z=4.5):
    p = (k1 + k2) / (2 * n)
    sd = math.sqrt(2 * n * p * (1 - p)) + 1e-9
    return abs(k1 - k2) <= z * sd


def _satellite_case():
    spec = ChannelSpec.from_marginals([1.0], bsc(0.03)[None], bsc(0.08)[None])
    g = np.zeros((2, 2, 2, 1), dtype=int)
    for a, b, c in itertools.product(range(2), repeat=3):
        g[a, b, c, 0] = (a + b * c) % 2
    sch = AuxScheme(2, 2, 2, np.full((1, 2, 2, 2), 1 / 8), g)
    kw = dict(rates=(0.1, 0.2, 0.1, 0.1, 0.0), r11=0.1, r21=0.0, rp1=0.2, rp2=0.1,
              eps_prime=0.9, eps1=1.2, eps2=1.2)
    return spec, SideInfoConfig(CSIT.CAUSAL), sch, kw, True


def _binned_case():
    w1 = np.array([[bsc(0.05)[x ^ s] for x in range(2)] for s in range(2)])
    w2 = np.array([[bsc(0.1)[x] for x in range(2)] for s in range(2)])
    spec = ChannelSpec.from_marginals([0.5, 0.5], w1, w2)
    g = np.zeros((2, 2, 1, 2), dtype=int)
    for a, b, st_ in itertools.product(range(2), repeat=3):
        g[a, b, 0, st_] = a ^ b ^ st_
    p = np.random.default_rng(3).dirichlet(np.ones(4) * 3, size=2).reshape(2, 2, 2, 1)
    kw = dict(rates=(0.1, 0.1, 0.0, 0.0, 0.0), r11=0.0, rp0=0.1, rp1=0.1,
              eps_prime=1.0, eps1=1.5, eps2=1.5)
    return spec, SideInfoConfig(CSIT.NONCAUSAL, True, False), AuxScheme(2, 2, 1, p, g), kw, False


def _failures(rep):
    o = rep.outcomes
    return (sum(not t.rx1_ok for t in o), sum(not t.rx2_ok for t in o),
            sum(not (t.rx1_ok or t.rx2_ok) for t in o))


@pytest.mark.parametrize("case", [_satellite_case, _binned_case])
def test_engines_agree_statistically(case):
    spec, cfg, sch, kw, rmsi = case()
    trials = 4000
    ex = run_trials(spec, cfg, sch, SimConfig(10, mode="exhaustive", trials=trials, seed=2, **kw), rmsi, True)
    en = run_trials(spec, cfg, sch, SimConfig(10, mode="ensemble", trials=trials, seed=2, **kw), rmsi, True)
    assert (ex.mode, en.mode) == ("exhaustive", "ensemble")
    for a, b in zip(_failures(ex), _failures(en)):
        assert 0 < a < trials
        assert _two_sided_close(a, b, trials), (_failures(ex), _failures(en))


def _encoder_pair(seed, s_size):
    # uniform aux law and state keep every cell reachable at n=16
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, s=s_size)
    spec = ChannelSpec(2, s_size, 2, 2, np.full(s_size, 1 / s_size), ch.p_trans)
    causal = SideInfoConfig(CSIT.CAUSAL)
    sch = AuxScheme(2, 2, 1, np.full((1, 2, 2, 1), 0.25), rng.integers(0, 2, size=(2, 2, 1, s_size)))
    sim = SimConfig(16, (0.25, 0.25, 0.25, 0, 0), rp1=0.4, rp2=0.4, eps_prime=0.6, eps1=1, eps2=1)
    cm = _Model(spec, causal, sch)
    nm = _Model(spec, causal.replace(csit=CSIT.NONCAUSAL), sch.replicate(s_size))
    cb_c = generate_codebooks(cm, sim, np.random.default_rng(seed + 1))
    cb_n = generate_codebooks(nm, sim, np.random.default_rng(seed + 1))
    msg = {k: int(rng.integers(v)) for k, v in cb_c.sizes.items() if k.startswith("m")}
    return rng, cm, cb_c, cb_n, msg


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_noncausal_encoder_without_state_is_the_causal_one(seed):
    rng, cm, cb_c, cb_n, msg = _encoder_pair(seed, 1)
    s = cm.sample_state(rng, 16)
    x_c, (l1, l2), fail_c = encode_causal(cb_c, msg, s)
    x_n, picks, fail_n = encode_noncausal(cb_n, msg, s)
    assert fail_c == fail_n
    assert picks == (0, l1, l2) and np.array_equal(x_c, x_n)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31))
def test_state_aware_pick_never_precedes_the_causal_pick(seed):
    # typicality with s implies typicality of the u-marginal, so the causal search
    # stops no later; the two agree exactly when the causal pick is also typical with s
    rng, cm, cb_c, cb_n, msg = _encoder_pair(seed, 2)
    s = cm.sample_state(rng, 16)
    _, (l1, l2), fail_c = encode_causal(cb_c, msg, s)
    _, (_, m1, m2), fail_n = encode_noncausal(cb_n, msg, s)
    if fail_n:
        return
    assert not fail_c and (l1, l2) <= (m1, m2)
    c = cb_c.cloud(msg) + (0,)
    u0, u1, u2 = cb_c.u0[c], cb_c.u1[c + (msg["m12"], l1)], cb_c.u2[c + (msg["m22"], l2)]
    p = cb_n.model.ref_enc.reshape(cm.u0, cm.u1, cm.u2, cm.s)
    with_state = typical([u0, u1, u2, s], p, 0.6)
    assert ((l1, l2) == (m1, m2)) == with_state
