"""Entropy and mutual information of axis groups of a joint PMF, in bits."""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

from .channel import AXES, JointDist

CLAMP = 1e-10

GroupLike = Union[str, Iterable[str]]


class EmptyGroup(ValueError):
    pass


class OverlappingGroups(ValueError):
    pass


class InconsistentMeasure(ArithmeticError):
    """A quantity that must be nonnegative came out clearly negative."""


_ALIASES = {"Y~1": "YT1", "Y~2": "YT2", "Ỹ1": "YT1", "Ỹ2": "YT2"}


def expand(joint: JointDist, group: GroupLike) -> frozenset[str]:
    """Resolve a group (``"U0,U1"``, ``["U0", "Y~1"]``...) to joint axes."""
    if isinstance(group, str):
        names = [t.strip() for t in group.split(",") if t.strip()]
    else:
        names = [str(t).strip() for t in group]
    out: list[str] = []
    for name in names:
        name = _ALIASES.get(name, name)
        if name in ("YT1", "YT2"):
            rx = name[-1]
            state = joint.cfg.state_at_rx1 if rx == "1" else joint.cfg.state_at_rx2
            out.extend([f"Y{rx}", "S"] if state else [f"Y{rx}"])
        elif name in AXES:
            out.append(name)
        else:
            raise ValueError(f"unknown variable {name!r}")
    if not out:
        raise EmptyGroup("variable group is empty")
    if len(set(out)) != len(out):
        raise OverlappingGroups(f"group {names} repeats an axis after expansion")
    return frozenset(out)


def _entropy_of(p: np.ndarray) -> float:
    q = p[p > 0]
    return float(max(-(q * np.log2(q)).sum(), 0.0))


def _axes_entropy(joint: JointDist, axes: frozenset[str]) -> float:
    hit = joint._memo.get(axes)
    if hit is None:
        hit = _entropy_of(joint.marginal(axes))
        joint._memo[axes] = hit
    return hit


def entropy(joint: JointDist, group: GroupLike) -> float:
    return _axes_entropy(joint, expand(joint, group))


def _clamp(value: float, what: str) -> float:
    if value < 0:
        if value < -CLAMP:
            raise InconsistentMeasure(f"{what} = {value!r} < -{CLAMP}")
        return 0.0
    return value


def _disjoint(*groups: frozenset[str]) -> None:
    seen: set[str] = set()
    for g in groups:
        if seen & g:
            raise OverlappingGroups(f"groups share axes {sorted(seen & g)}")
        seen |= g


def mutual_information(joint: JointDist, a: GroupLike, b: GroupLike) -> float:
    ga, gb = expand(joint, a), expand(joint, b)
    _disjoint(ga, gb)
    h = _axes_entropy
    return _clamp(h(joint, ga) + h(joint, gb) - h(joint, ga | gb), f"I({a};{b})")


def conditional_mi(joint: JointDist, a: GroupLike, b: GroupLike, c: GroupLike) -> float:
    ga, gb, gc = expand(joint, a), expand(joint, b), expand(joint, c)
    _disjoint(ga, gb, gc)
    h = _axes_entropy
    val = h(joint, ga | gc) + h(joint, gb | gc) - h(joint, ga | gb | gc) - h(joint, gc)
    return _clamp(val, f"I({a};{b}|{c})")


def parse_term(text: str) -> tuple[str, str, str | None]:
    """Split ``"I(U0,U1;Y~1|U0)"`` into its three groups (the last may be None)."""
    t = text.replace(" ", "")
    if not (t.startswith("I(") and t.endswith(")")):
        raise ValueError(f"not a mutual-information term: {text!r}")
    body = t[2:-1]
    if ";" not in body:
        raise ValueError(f"missing ';' in {text!r}")
    a, rest = body.split(";", 1)
    b, _, c = rest.partition("|")
    return a, b, (c or None)


def measure(joint: JointDist, term: str) -> float:
    """Evaluate a symbol such as ``"I(U1;U2|U0)"`` or ``"H(X)"`` on a joint."""
    t = term.replace(" ", "")
    if t.startswith("H(") and t.endswith(")"):
        return entropy(joint, t[2:-1])
    a, b, c = parse_term(t)
    if c is None:
        return mutual_information(joint, a, b)
    return conditional_mi(joint, a, b, c)


# ------------------------------------------------------------ batched forms

def batch_entropy(p: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    """Entropies of a batch of joints ``p[B, ...]`` marginalised onto ``keep``.

    ``keep`` lists axes of the per-item array (0-based, batch axis excluded).
    """
    item_dims = p.ndim - 1
    drop = tuple(1 + i for i in range(item_dims) if i not in keep)
    m = p.sum(axis=drop) if drop else p
    m = m.reshape(m.shape[0], -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(m > 0, m * np.log2(np.where(m > 0, m, 1.0)), 0.0)
    return np.maximum(-t.sum(axis=1), 0.0)
