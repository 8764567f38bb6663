"""Channel, side-information configuration, auxiliary scheme, joint PMF.

The joint array always has the seven axes ``(s, u0, u1, u2, x, y1, y2)`` in
that order.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12
MAX_JOINT_ENTRIES = 10**8

AXES = ("S", "U0", "U1", "U2", "X", "Y1", "Y2")


class ChannelError(ValueError):
    """Base class for malformed channel or scheme inputs."""


class NegativeProbability(ChannelError):
    def __init__(self, where: str, index, value: float):
        self.where, self.index, self.value = where, index, value
        super().__init__(f"NegativeProbability in {where} at {index}: {value!r}")


class RowSumMismatch(ChannelError):
    def __init__(self, where: str, index, total: float):
        self.where, self.index, self.total = where, index, total
        self.deviation = total - 1.0
        super().__init__(
            f"RowSumMismatch in {where} at {index}: sum={total!r} (deviation {self.deviation:+.3g})"
        )


class DimensionMismatch(ChannelError):
    pass


class CSIT(str, enum.Enum):
    NONE = "none"
    CAUSAL = "causal"
    NONCAUSAL = "noncausal"


@dataclass(frozen=True)
class SideInfoConfig:
    csit: CSIT = CSIT.CAUSAL
    state_at_rx1: bool = False
    state_at_rx2: bool = False

    def __post_init__(self):
        object.__setattr__(self, "csit", CSIT(self.csit))

    def aux_slices(self, s_size: int) -> int:
        """Number of ``s~`` slices of the auxiliary distribution."""
        return s_size if self.csit is CSIT.NONCAUSAL else 1

    def gamma_slices(self, s_size: int) -> int:
        """Number of ``s~`` values the input map may depend on."""
        return 1 if self.csit is CSIT.NONE else s_size

    def replace(self, **kw) -> "SideInfoConfig":
        d = {"csit": self.csit, "state_at_rx1": self.state_at_rx1, "state_at_rx2": self.state_at_rx2}
        d.update(kw)
        return SideInfoConfig(**d)


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Finite broadcast channel with i.i.d. state.

    ``p_trans[s, x, y1, y2]`` is ``p(y1, y2 | x, s)``.
    """

    x_size: int
    s_size: int
    y1_size: int
    y2_size: int
    p_s: np.ndarray
    p_trans: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_s", np.asarray(self.p_s, dtype=float))
        object.__setattr__(self, "p_trans", np.asarray(self.p_trans, dtype=float))
        for name in ("x_size", "s_size", "y1_size", "y2_size"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DimensionMismatch(f"{name} must be a positive integer, got {v!r}")
        if self.p_s.shape != (self.s_size,):
            raise DimensionMismatch(f"p_s has shape {self.p_s.shape}, expected ({self.s_size},)")
        want = (self.s_size, self.x_size, self.y1_size, self.y2_size)
        if self.p_trans.shape != want:
            raise DimensionMismatch(f"p_trans has shape {self.p_trans.shape}, expected {want}")
        self.p_s.flags.writeable = False
        self.p_trans.flags.writeable = False

    @classmethod
    def from_marginals(cls, p_s, w1, w2=None, degraded: np.ndarray | None = None) -> "ChannelSpec":
        """Build from per-receiver laws ``w1[s, x, y1]``.

        Either ``w2[s, x, y2]`` (outputs conditionally independent given
        ``(x, s)``) or a physically degraded link ``degraded[y1, y2]``.
        """
        w1 = np.asarray(w1, dtype=float)
        s_size, x_size, y1_size = w1.shape
        if degraded is not None:
            deg = np.asarray(degraded, dtype=float)
            p = w1[..., :, None] * deg[None, None, :, :]
        else:
            w2 = np.asarray(w2, dtype=float)
            p = w1[..., :, None] * w2[..., None, :]
        return cls(x_size, s_size, y1_size, p.shape[-1], np.asarray(p_s, dtype=float), p)

    def to_dict(self) -> dict:
        return {
            "x_size": self.x_size,
            "s_size": self.s_size,
            "y1_size": self.y1_size,
            "y2_size": self.y2_size,
            "p_s": self.p_s.tolist(),
            "p_trans": self.p_trans.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelSpec":
        try:
            return cls(
                int(d["x_size"]), int(d["s_size"]), int(d["y1_size"]), int(d["y2_size"]),
                np.array(d["p_s"], dtype=float), np.array(d["p_trans"], dtype=float),
            )
        except KeyError as e:
            raise DimensionMismatch(f"channel file is missing field {e.args[0]!r}") from None
        except (TypeError, ValueError) as e:
            if isinstance(e, ChannelError):
                raise
            raise DimensionMismatch(f"channel file is malformed: {e}") from None

    def marginal_y1(self) -> np.ndarray:
        """``p(y1 | x, s)`` indexed ``[s, x, y1]``."""
        return self.p_trans.sum(axis=3)

    def marginal_y2(self) -> np.ndarray:
        return self.p_trans.sum(axis=2)


@dataclass(frozen=True, eq=False)
class AuxScheme:
    """``p_aux[s~, u0, u1, u2]`` and ``gamma[u0, u1, u2, s~] -> x``."""

    u0_size: int
    u1_size: int
    u2_size: int
    p_aux: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_aux", np.asarray(self.p_aux, dtype=float))
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=np.int64))
        cards = (self.u0_size, self.u1_size, self.u2_size)
        if any(int(c) != c or c < 1 for c in cards):
            raise DimensionMismatch(f"cardinalities must be positive integers, got {cards}")
        if self.p_aux.ndim != 4 or self.p_aux.shape[1:] != cards:
            raise DimensionMismatch(f"p_aux has shape {self.p_aux.shape}, expected (k, {cards})")
        if self.gamma.ndim != 4 or self.gamma.shape[:3] != cards:
            raise DimensionMismatch(f"gamma has shape {self.gamma.shape}, expected ({cards}, k)")
        self.p_aux.flags.writeable = False
        self.gamma.flags.writeable = False

    @property
    def cards(self) -> tuple[int, int, int]:
        return (self.u0_size, self.u1_size, self.u2_size)

    def to_dict(self) -> dict:
        return {
            "u0_size": self.u0_size,
            "u1_size": self.u1_size,
            "u2_size": self.u2_size,
            "p_aux": self.p_aux.tolist(),
            "gamma": self.gamma.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuxScheme":
        try:
            return cls(
                int(d["u0_size"]), int(d["u1_size"]), int(d["u2_size"]),
                np.array(d["p_aux"], dtype=float), np.array(d["gamma"], dtype=np.int64),
            )
        except KeyError as e:
            raise DimensionMismatch(f"scheme file is missing field {e.args[0]!r}") from None
        except (TypeError, ValueError) as e:
            if isinstance(e, ChannelError):
                raise
            raise DimensionMismatch(f"scheme file is malformed: {e}") from None

    def replicate(self, s_size: int) -> "AuxScheme":
        """Copy a single-slice scheme into ``s_size`` identical slices."""
        if self.p_aux.shape[0] != 1:
            raise DimensionMismatch("only single-slice schemes can be replicated")
        p = np.repeat(self.p_aux, s_size, axis=0)
        return AuxScheme(self.u0_size, self.u1_size, self.u2_size, p, self.gamma)


def _check_pmf(arr: np.ndarray, axes: int, where: str, tol: float = INPUT_TOL):
    """Check nonnegativity and that the trailing ``axes`` axes sum to one."""
    bad = np.argwhere(~(arr >= 0))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise NegativeProbability(where, idx, float(arr[idx]))
    sums = arr.reshape(arr.shape[: arr.ndim - axes] + (-1,)).sum(axis=-1)
    dev = np.abs(np.atleast_1d(sums) - 1.0)
    if dev.size and dev.max() > tol:
        flat = int(np.argmax(dev > tol))
        idx = np.unravel_index(flat, np.atleast_1d(sums).shape) if np.ndim(sums) else ()
        total = float(np.atleast_1d(sums).reshape(-1)[flat])
        raise RowSumMismatch(where, tuple(int(i) for i in idx), total)


def validate_channel(spec: ChannelSpec) -> None:
    """Raise on the first violated invariant; return ``None`` when valid."""
    _check_pmf(spec.p_s, 1, "p_s")
    _check_pmf(spec.p_trans, 2, "p_trans")


def validate_scheme(spec: ChannelSpec, cfg: SideInfoConfig, scheme: AuxScheme) -> None:
    want_aux = cfg.aux_slices(spec.s_size)
    if scheme.p_aux.shape[0] != want_aux:
        raise DimensionMismatch(
            f"p_aux has {scheme.p_aux.shape[0]} s~ slices; csit={cfg.csit.value} needs {want_aux}"
        )
    want_g = cfg.gamma_slices(spec.s_size)
    if scheme.gamma.shape[3] != want_g:
        raise DimensionMismatch(
            f"gamma has {scheme.gamma.shape[3]} s~ slices; csit={cfg.csit.value} needs {want_g}"
        )
    if scheme.gamma.min() < 0 or scheme.gamma.max() >= spec.x_size:
        raise DimensionMismatch(f"gamma outputs must lie in [0, {spec.x_size})")
    _check_pmf(scheme.p_aux, 3, "p_aux")


def effective_output_sizes(spec: ChannelSpec, cfg: SideInfoConfig) -> tuple[int, int]:
    y1 = spec.y1_size * spec.s_size if cfg.state_at_rx1 else spec.y1_size
    y2 = spec.y2_size * spec.s_size if cfg.state_at_rx2 else spec.y2_size
    return y1, y2


@dataclass(frozen=True, eq=False)
class JointDist:
    """Dense PMF over ``(s, u0, u1, u2, x, y1, y2)``."""

    p: np.ndarray
    cfg: SideInfoConfig
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.p.shape

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(AXES, self.p.shape))

    def marginal(self, axes) -> np.ndarray:
        """Marginal over the named axes, returned in joint-axis order."""
        keep = sorted(AXES.index(a) for a in axes)
        drop = tuple(i for i in range(len(AXES)) if i not in keep)
        return self.p.sum(axis=drop) if drop else self.p


def _s_index(cfg: SideInfoConfig, s_size: int, slices: int) -> np.ndarray:
    return np.arange(s_size) if slices == s_size and slices > 1 else np.zeros(s_size, dtype=np.int64)


def build_joint(spec: ChannelSpec, cfg: SideInfoConfig, scheme: AuxScheme) -> JointDist:
    validate_scheme(spec, cfg, scheme)
    u0, u1, u2 = scheme.cards
    total = spec.s_size * u0 * u1 * u2 * spec.x_size * spec.y1_size * spec.y2_size
    if total > MAX_JOINT_ENTRIES:
        raise DimensionMismatch(f"joint would have {total} entries (cap {MAX_JOINT_ENTRIES})")
    p = joint_array(spec, cfg, scheme.p_aux[None], scheme.gamma[None])[0]
    return JointDist(p, cfg)


def joint_array(spec: ChannelSpec, cfg: SideInfoConfig, p_aux: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Batched joint construction.

    ``p_aux`` is ``(B, k_aux, u0, u1, u2)`` and ``gamma`` is
    ``(B, u0, u1, u2, k_gamma)``; either batch axis may be 1 to broadcast.
    Returns ``(B, s, u0, u1, u2, x, y1, y2)``.
    """
    s = spec.s_size
    aux_idx = _s_index(cfg, s, p_aux.shape[1])
    g_idx = _s_index(cfg, s, gamma.shape[4])
    # (B, s, u0, u1, u2)
    pa = p_aux[:, aux_idx] * spec.p_s[None, :, None, None, None]
    g = np.moveaxis(gamma[..., g_idx], 4, 1)  # (B, s, u0, u1, u2)
    onehot = g[..., None] == np.arange(spec.x_size)  # (B, s, u0, u1, u2, x)
    p_sx = pa[..., None] * onehot
    # p_trans[s, x, y1, y2] broadcast against (B, s, u0, u1, u2, x)
    return p_sx[..., None, None] * spec.p_trans[None, :, None, None, None, :, :, :]


# --------------------------------------------------------------------- JSON

def load_json(path) -> dict:
    with open(Path(path), encoding="utf-8") as fh:
        return json.load(fh)


def load_channel(path) -> ChannelSpec:
    return ChannelSpec.from_dict(load_json(path))


def load_scheme(path) -> AuxScheme:
    return AuxScheme.from_dict(load_json(path))


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
