import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bcrmsi.channel import CSIT, AuxScheme, ChannelSpec, SideInfoConfig  # noqa: E402

DATA = Path(__file__).parent / "data"


def random_channel(rng, x=2, s=2, y1=2, y2=2) -> ChannelSpec:
    p_s = rng.dirichlet(np.ones(s))
    p = rng.dirichlet(np.ones(y1 * y2), size=(s, x)).reshape(s, x, y1, y2)
    return ChannelSpec(x, s, y1, y2, p_s, p)


def random_scheme(rng, spec: ChannelSpec, cfg: SideInfoConfig, cards=(2, 2, 2)) -> AuxScheme:
    k = cfg.aux_slices(spec.s_size)
    g = cfg.gamma_slices(spec.s_size)
    p = rng.dirichlet(np.ones(int(np.prod(cards))), size=k).reshape((k,) + tuple(cards))
    gamma = rng.integers(0, spec.x_size, size=tuple(cards) + (g,))
    return AuxScheme(*cards, p, gamma)


def random_cfg(rng, csit=None) -> SideInfoConfig:
    csit = csit or [CSIT.NONE, CSIT.CAUSAL, CSIT.NONCAUSAL][rng.integers(3)]
    return SideInfoConfig(csit, bool(rng.integers(2)), bool(rng.integers(2)))


def bsc(e):
    return np.array([[1 - e, e], [e, 1 - e]])


def degraded_pair() -> ChannelSpec:
    w1 = np.array([[bsc(0.1)[x ^ s] for x in range(2)] for s in range(2)])
    return ChannelSpec.from_marginals([0.5, 0.5], w1, degraded=bsc(0.15))


def flip_channel() -> ChannelSpec:
    w = np.array([[np.eye(2)[x ^ s] for x in range(2)] for s in range(2)])
    return ChannelSpec.from_marginals([0.5, 0.5], w, w)


def bit_pipe() -> ChannelSpec:
    w = np.array([[np.eye(2)[x] for x in range(2)]])
    return ChannelSpec.from_marginals([1.0], w, w)


@pytest.fixture
def data_dir():
    return DATA
