"""Symbolic Fourier-Motzkin elimination over rate variables.

Right-hand sides are integer combinations of opaque information-measure
symbols such as ``I(U1;U2|U0)``. The only axiom about a symbol is that it is
nonnegative; rate variables are nonnegative as well. Every inequality

    sum_v a_v * v  <=  sum_k b_k * sigma_k

is stored as one primitive integer row ``c`` over the joint column space
``(variables..., symbols...)`` with meaning ``c . z <= 0`` for ``z >= 0``,
where ``c = (a, -b)``. The whole system is therefore a polyhedral cone and
all arithmetic stays in exact integers.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact_lp import implied

Row = tuple[int, ...]

_VAR_RE = re.compile(r"R[0-9']*")
_TERM_RE = re.compile(
    r"\s*([+-])?\s*(\d+(?:/\d+)?(?:\.\d+)?)?\s*\*?\s*([IH]\([^()]*\)|R[0-9']*)\s*"
)


class GrammarError(ValueError):
    pass


def _primitive(vec: Iterable) -> Row:
    """Scale a rational vector by a positive factor to coprime integers."""
    vals = [Fraction(v) for v in vec]
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(v * den) for v in vals]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def _norm_symbol(s: str) -> str:
    return re.sub(r"\s+", "", s)


@dataclass(frozen=True)
class Inequality:
    """``sum(lhs[v] * v) <= sum(rhs[s] * s)`` with exact rational coefficients."""

    lhs: Mapping[str, Fraction]
    rhs: Mapping[str, Fraction]

    def __str__(self) -> str:
        return f"{_fmt_side(self.lhs)} <= {_fmt_side(self.rhs)}"


def _fmt_side(terms: Mapping[str, Fraction]) -> str:
    parts = []
    for name, c in terms.items():
        if c == 0:
            continue
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, f"{coef}{name}"))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, t in parts[1:]:
        out += f" {sign} {t}"
    return out


@dataclass(frozen=True)
class SymbolicSystem:
    variables: tuple[str, ...]
    symbols: tuple[str, ...]
    rows: tuple[Row, ...]

    def __post_init__(self):
        width = len(self.variables) + len(self.symbols)
        for r in self.rows:
            if len(r) != width:
                raise ValueError("row width does not match the column space")
        if len(set(self.variables)) != len(self.variables) or len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate variable or symbol name")

    @property
    def columns(self) -> tuple[str, ...]:
        return self.variables + self.symbols

    @classmethod
    def from_inequalities(
        cls,
        ineqs: Sequence[Inequality],
        variables: Sequence[str] | None = None,
        symbols: Sequence[str] | None = None,
    ) -> "SymbolicSystem":
        if variables is None:
            variables = sorted({v for q in ineqs for v in q.lhs}, key=_var_key)
        if symbols is None:
            symbols = sorted({s for q in ineqs for s in q.rhs})
        cols = {name: i for i, name in enumerate(list(variables) + list(symbols))}
        nv = len(variables)
        rows = []
        for q in ineqs:
            vec = [Fraction(0)] * len(cols)
            for v, c in q.lhs.items():
                if v not in cols or cols[v] >= nv:
                    raise ValueError(f"undeclared variable {v!r}")
                vec[cols[v]] += Fraction(c)
            for s, c in q.rhs.items():
                if s not in cols or cols[s] < nv:
                    raise ValueError(f"undeclared symbol {s!r}")
                vec[cols[s]] -= Fraction(c)
            rows.append(_primitive(vec))
        return cls(tuple(variables), tuple(symbols), _dedupe(rows))

    def inequalities(self) -> list[Inequality]:
        nv = len(self.variables)
        out = []
        for r in self.rows:
            lhs = {self.variables[i]: Fraction(r[i]) for i in range(nv) if r[i]}
            rhs = {self.symbols[i - nv]: Fraction(-r[i]) for i in range(nv, len(r)) if r[i]}
            out.append(Inequality(lhs, rhs))
        return out

    def to_text(self) -> str:
        return "\n".join(str(q) for q in self.inequalities())

    def with_columns(self, variables: Sequence[str], symbols: Sequence[str]) -> "SymbolicSystem":
        """Re-express over a superset column space (missing columns are zero)."""
        old = self.columns
        nv_old = len(self.variables)
        new_cols = list(variables) + list(symbols)
        idx = {n: i for i, n in enumerate(new_cols)}
        for i, n in enumerate(old):
            if n not in idx:
                if any(r[i] for r in self.rows):
                    raise ValueError(f"column {n!r} is used but absent from the new space")
        rows = []
        for r in self.rows:
            vec = [0] * len(new_cols)
            for i, n in enumerate(old):
                if r[i]:
                    if (idx[n] < len(variables)) != (i < nv_old):
                        raise ValueError(f"column {n!r} changes kind")
                    vec[idx[n]] = r[i]
            rows.append(tuple(vec))
        return SymbolicSystem(tuple(variables), tuple(symbols), _dedupe(rows))

    def set_zero(self, names: Iterable[str]) -> "SymbolicSystem":
        """Force the given symbols (or variables) to zero and drop their columns."""
        names = set(names)
        keep = [i for i, n in enumerate(self.columns) if n not in names]
        variables = tuple(n for n in self.variables if n not in names)
        symbols = tuple(n for n in self.symbols if n not in names)
        rows = [_primitive(r[i] for i in keep) for r in self.rows]
        return SymbolicSystem(variables, symbols, _dedupe(rows))


def _var_key(name: str):
    digits = name[1:].replace("'", "")
    return ("'" in name, len(digits), digits)


def _dedupe(rows: Iterable[Row]) -> tuple[Row, ...]:
    """Drop duplicates and rows implied by nonnegativity alone (all entries <= 0)."""
    seen = set()
    out = []
    for r in rows:
        if all(v <= 0 for v in r):
            continue
        if r not in seen:
            seen.add(r)
            out.append(r)
    return tuple(sorted(out))


# ---------------------------------------------------------------- grammar

def _parse_side(text: str, lineno: int) -> dict[str, Fraction]:
    text = text.strip()
    terms: dict[str, Fraction] = {}
    if text in ("", "0"):
        return terms
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise GrammarError(f"line {lineno}: cannot parse near {text[pos:]!r}")
        sign, coef, name = m.groups()
        if sign is None and not first:
            raise GrammarError(f"line {lineno}: missing operator before {name!r}")
        c = Fraction(coef) if coef else Fraction(1)
        if sign == "-":
            c = -c
        if name.startswith("R"):
            if not _VAR_RE.fullmatch(name):
                raise GrammarError(f"line {lineno}: bad variable {name!r}")
            key = name
        else:
            key = _norm_symbol(name)
        terms[key] = terms.get(key, Fraction(0)) + c
        pos = m.end()
        first = False
    return terms


def parse_system(text: str) -> SymbolicSystem:
    """Parse one inequality per line.

    ``<=``, ``<``, ``>=``, ``>`` and ``=`` are accepted; strict relations are
    read as their closures. Variables match ``R[0-9']*``; ``I(...)`` and
    ``H(...)`` are atomic symbols. ``#`` starts a comment.
    """
    ineqs: list[Inequality] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.search(r"<=|>=|<|>|=", line)
        if not m:
            raise GrammarError(f"line {lineno}: no relation in {raw!r}")
        op = m.group(0)
        left = _parse_side(line[: m.start()], lineno)
        right = _parse_side(line[m.end():], lineno)
        if re.search(r"<=|>=|<|>|=", line[m.end():]):
            raise GrammarError(f"line {lineno}: chained relations are not supported")
        # move everything into  vars - syms <= 0  form
        combined: dict[str, Fraction] = {}
        for k, v in left.items():
            combined[k] = combined.get(k, Fraction(0)) + v
        for k, v in right.items():
            combined[k] = combined.get(k, Fraction(0)) - v
        forms = {"<=": [1], "<": [1], ">=": [-1], ">": [-1], "=": [1, -1]}[op]
        for sgn in forms:
            lhs = {k: sgn * v for k, v in combined.items() if k.startswith("R") and v}
            rhs = {k: -sgn * v for k, v in combined.items() if not k.startswith("R") and v}
            ineqs.append(Inequality(lhs, rhs))
    return SymbolicSystem.from_inequalities(ineqs)


# ---------------------------------------------------------------- elimination

def eliminate(sys: SymbolicSystem, v: str) -> SymbolicSystem:
    """Project out variable ``v`` (including its own bound ``v >= 0``)."""
    if v not in sys.variables:
        raise KeyError(v)
    j = sys.variables.index(v)
    rows, _ = _eliminate_rows([(r, frozenset()) for r in sys.rows], j, len(sys.columns), limit=None, tag=v)
    variables = sys.variables[:j] + sys.variables[j + 1:]
    return SymbolicSystem(variables, sys.symbols, _dedupe(r for r, _ in rows))


def _eliminate_rows(rows, j, width, limit, tag):
    """One FME step on rows tagged with their origin sets; drops column ``j``."""
    nonneg = tuple(-1 if c == j else 0 for c in range(width))
    pos, neg, zero = [], [], []
    for r, h in rows:
        if r[j] > 0:
            pos.append((r, h))
        elif r[j] < 0:
            neg.append((r, h))
        else:
            zero.append((r, h))
    neg.append((nonneg, frozenset([("nonneg", tag)])))
    out = [(r[:j] + r[j + 1:], h) for r, h in zero]
    for (p, hp), (q, hq) in itertools.product(pos, neg):
        h = hp | hq
        if limit is not None and len(h) > limit:
            continue
        a, b = -q[j], p[j]
        comb = [a * x + b * y for x, y in zip(p, q)]
        del comb[j]
        out.append((_primitive(comb), h))
    # dedupe, keeping the smallest history for each row
    best: dict[Row, frozenset] = {}
    for r, h in out:
        if all(x <= 0 for x in r):
            continue
        if r not in best or len(h) < len(best[r]):
            best[r] = h
    return sorted(best.items()), len(out)


def project(sys: SymbolicSystem, eliminate_vars: Sequence[str], reduce: bool = True) -> SymbolicSystem:
    """Eliminate several variables in the given order.

    Chernikov's rule prunes rows built from more than ``k + 1`` original
    inequalities after ``k`` steps; the final system is made irredundant
    unless ``reduce`` is false.
    """
    rows = [(r, frozenset([("row", i)])) for i, r in enumerate(sys.rows)]
    variables = list(sys.variables)
    width = len(sys.columns)
    for k, v in enumerate(eliminate_vars, 1):
        j = variables.index(v)
        rows, _ = _eliminate_rows(rows, j, width, limit=k + 1, tag=v)
        variables.pop(j)
        width -= 1
    out = SymbolicSystem(tuple(variables), sys.symbols, _dedupe(r for r, _ in rows))
    return reduce_redundant(out) if reduce else out


def substitute(sys: SymbolicSystem, v: str, expr: Mapping[str, int]) -> SymbolicSystem:
    """Replace variable ``v`` by an integer combination of other variables.

    The nonnegativity of ``v`` survives as the explicit row ``expr >= 0``.
    """
    j = sys.variables.index(v)
    idx = {n: i for i, n in enumerate(sys.variables)}
    rows = []
    for r in sys.rows:
        vec = list(r)
        c = vec[j]
        vec[j] = 0
        for name, a in expr.items():
            vec[idx[name]] += c * a
        rows.append(vec)
    bound = [0] * len(sys.columns)
    for name, a in expr.items():
        bound[idx[name]] -= a
    rows.append(bound)
    variables = sys.variables[:j] + sys.variables[j + 1:]
    rows = [_primitive(r[:j] + r[j + 1:]) for r in rows]
    return SymbolicSystem(variables, sys.symbols, _dedupe(rows))


# ---------------------------------------------------------------- redundancy

def _single_implies(src: Row, tgt: Row) -> bool:
    # does lam * src >= tgt hold for some lam >= 0 ?
    lo, hi = Fraction(0), None
    for s, t in zip(src, tgt):
        if s > 0:
            lo = max(lo, Fraction(t, s))
        elif s < 0:
            bound = Fraction(t, s)
            hi = bound if hi is None else min(hi, bound)
        elif t > 0:
            return False
    return hi is None or lo <= hi


def reduce_redundant(sys: SymbolicSystem, axioms: Sequence[Row] = ()) -> SymbolicSystem:
    """Drop every row implied by the remaining rows plus nonnegativity.

    ``axioms`` are extra rows over the same columns (typically symbol-only
    identities) that may be used in implications but are never emitted.
    """
    axioms = list(axioms)
    rows = [r for r in _dedupe(sys.rows) if not any(_single_implies(a, r) for a in axioms)]
    # cheap pass: single-row domination
    keep = []
    for i, r in enumerate(rows):
        others = [o for k, o in enumerate(rows) if k != i and (k > i or o in keep)]
        if any(_single_implies(o, r) for o in others + axioms):
            continue
        keep.append(r)
    rows = keep
    i = 0
    while i < len(rows):
        others = rows[:i] + rows[i + 1:]
        if implied(others + axioms, rows[i]):
            rows.pop(i)
        else:
            i += 1
    return SymbolicSystem(sys.variables, sys.symbols, tuple(sorted(rows)))


def implies(sys: SymbolicSystem, row: Row, axioms: Sequence[Row] = ()) -> bool:
    return implied(list(sys.rows) + list(axioms), row)


def canonical(sys: SymbolicSystem) -> tuple:
    """Column-name-keyed, order-free form of an irredundant system."""
    red = reduce_redundant(sys)
    cols = red.columns
    out = []
    for r in red.rows:
        out.append(tuple(sorted((cols[i], r[i]) for i in range(len(r)) if r[i])))
    return tuple(sorted(out))


# ---------------------------------------------------------------- builtins

CAUSAL_TH1_RAW = """
R'1 + R'2 >= I(U1;U2|U0)
R12 + R'1 <= I(U1;Y~1|U0)
R0 + R1 + R21 + R'1 <= I(U0,U1;Y~1)
R22 + R'2 <= I(U2;Y~2|U0)
R0 + R2 + R11 + R'2 <= I(U0,U2;Y~2)
"""

CAUSAL_TH1_TARGET = """
R0 + R1 <= I(U0,U1;Y~1)
R0 + R2 <= I(U0,U2;Y~2)
R0 + R1 + R2 <= I(U0,U1;Y~1) + I(U2;Y~2|U0) - I(U1;U2|U0)
R0 + R1 + R2 <= I(U1;Y~1|U0) + I(U0,U2;Y~2) - I(U1;U2|U0)
2R0 + R1 + R2 <= I(U0,U1;Y~1) + I(U0,U2;Y~2) - I(U1;U2|U0)
"""

RMSI_CAUSAL_TH2_RAW = """
R'1 + R'2 >= I(U1;U2|U0)
R12 + R'1 <= I(U1;Y~1|U0)
R0 + R1 + R3 + R21 + R'1 <= I(U0,U1;Y~1)
R22 + R'2 <= I(U2;Y~2|U0)
R0 + R2 + R4 + R11 + R'2 <= I(U0,U2;Y~2)
"""

RMSI_NONCAUSAL_TH2_RAW = """
R'0 >= I(U0;S)
R'0 + R'1 >= I(U0,U1;S)
R'0 + R'2 >= I(U0,U2;S)
R'0 + R'1 + R'2 >= I(U0,U1,U2;S) + I(U1;U2|U0)
R12 + R'1 <= I(U1;Y~1|U0)
R0 + R1 + R3 + R21 + R'0 + R'1 <= I(U0,U1;Y~1)
R22 + R'2 <= I(U2;Y~2|U0)
R0 + R2 + R4 + R11 + R'0 + R'2 <= I(U0,U2;Y~2)
"""

RMSI_TH2_TARGET = """
R0 + R1 + R3 <= I(U0,U1;Y~1) - I(U0,U1;S)
R0 + R2 + R4 <= I(U0,U2;Y~2) - I(U0,U2;S)
R0 + R1 + R2 + R3 <= I(U0,U1;Y~1) + I(U2;Y~2|U0) - I(U1;U2|U0) - I(U0,U1,U2;S)
R0 + R1 + R2 + R4 <= I(U1;Y~1|U0) + I(U0,U2;Y~2) - I(U1;U2|U0) - I(U0,U1,U2;S)
2R0 + R1 + R2 + R3 + R4 <= I(U0,U1;Y~1) + I(U0,U2;Y~2) - I(U1;U2|U0) - I(U0,U1,U2;S) - I(U0;S)
"""

STATE_SYMBOLS = ("I(U0;S)", "I(U0,U1;S)", "I(U0,U2;S)", "I(U0,U1,U2;S)")
SPLIT = {"R11": {"R1": 1, "R12": -1}, "R21": {"R2": 1, "R22": -1}}

# Monotonicity facts that hold for every joint distribution. They relate
# symbols the proofs treat as opaque, so they are declared rather than
# inferred; the non-causal reduction needs them.
SHANNON_IDENTITIES = """
I(U0;S) <= I(U0,U1;S)
I(U0;S) <= I(U0,U2;S)
I(U0,U1;S) <= I(U0,U1,U2;S)
I(U0,U2;S) <= I(U0,U1,U2;S)
I(U1;Y~1|U0) <= I(U0,U1;Y~1)
I(U2;Y~2|U0) <= I(U0,U2;Y~2)
"""


class Builtin(enum.Enum):
    CAUSAL_TH1 = "causal-th1"
    RMSI_CAUSAL_TH2 = "rmsi-causal-th2"
    RMSI_NONCAUSAL_TH2 = "rmsi-noncausal-th2"


def builtin_system(b: Builtin) -> tuple[SymbolicSystem, SymbolicSystem, tuple[str, ...]]:
    """Return (raw proof system, target region, symbols forced to zero)."""
    if b is Builtin.CAUSAL_TH1:
        return parse_system(CAUSAL_TH1_RAW), parse_system(CAUSAL_TH1_TARGET), ()
    if b is Builtin.RMSI_CAUSAL_TH2:
        return parse_system(RMSI_CAUSAL_TH2_RAW), parse_system(RMSI_TH2_TARGET), STATE_SYMBOLS
    return parse_system(RMSI_NONCAUSAL_TH2_RAW), parse_system(RMSI_TH2_TARGET), ()


RATE_VARS = ("R0", "R1", "R2", "R3", "R4")


def auxiliary_vars(sys: SymbolicSystem) -> list[str]:
    return [v for v in sys.variables if v not in RATE_VARS]


class Verdict(str, enum.Enum):
    EQUAL = "EQUAL"
    DERIVED_LARGER = "DERIVED⊋TARGET"
    TARGET_LARGER = "TARGET⊋DERIVED"
    INCOMPARABLE = "INCOMPARABLE"
    # no target given: the report only carries the projection
    PROJECTED = "PROJECTED"


@dataclass
class ProofReport:
    name: str
    verdict: Verdict
    derived: list[str]
    target: list[str]
    # derived rows not implied by the target (they cut the target down)
    derived_only: list[str] = field(default_factory=list)
    # target rows not implied by the derived system
    target_only: list[str] = field(default_factory=list)
    # derived rows that mention no rate variable at all
    side_conditions: list[str] = field(default_factory=list)
    eliminated: list[str] = field(default_factory=list)
    zeroed: list[str] = field(default_factory=list)
    identities: list[str] = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return self.verdict is Verdict.EQUAL

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict.value,
            "eliminated": self.eliminated,
            "zeroed": self.zeroed,
            "identities": self.identities,
            "derived": self.derived,
            "target": self.target,
            "derived_only": self.derived_only,
            "target_only": self.target_only,
            "side_conditions": self.side_conditions,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        lines = [f"{self.name}: {self.verdict.value}"]
        if self.zeroed:
            lines.append("  zeroed: " + ", ".join(self.zeroed))
        if self.identities:
            lines.append("  identities:")
            lines += [f"    {s}" for s in self.identities]
        lines.append("  eliminated: " + ", ".join(self.eliminated))
        lines.append("  derived:")
        lines += [f"    {s}" for s in self.derived]
        if self.derived_only:
            lines.append("  in derived but not implied by target:")
            lines += [f"    {s}" for s in self.derived_only]
        if self.target_only:
            lines.append("  in target but not implied by derived:")
            lines += [f"    {s}" for s in self.target_only]
        return "\n".join(lines)


def _pad_axioms(identities: SymbolicSystem | None, variables, symbols) -> list[Row]:
    if identities is None or not identities.rows:
        return []
    if identities.variables:
        raise ValueError("identities may only relate symbols")
    nv = len(variables)
    return [(0,) * nv + r for r in identities.with_columns((), symbols).rows]


def compare(
    derived: SymbolicSystem,
    target: SymbolicSystem,
    name: str = "system",
    identities: SymbolicSystem | None = None,
    **extra,
) -> ProofReport:
    """Compare two systems as cones, using ``identities`` as extra axioms."""
    variables = sorted(set(derived.variables) | set(target.variables), key=_var_key)
    symbols = set(derived.symbols) | set(target.symbols)
    if identities is not None:
        symbols |= set(identities.symbols)
    symbols = sorted(symbols)
    axioms = _pad_axioms(identities, variables, symbols)
    d = reduce_redundant(derived.with_columns(variables, symbols), axioms)
    t = reduce_redundant(target.with_columns(variables, symbols), axioms)
    d_only = [r for r in d.rows if not implies(t, r, axioms)]
    t_only = [r for r in t.rows if not implies(d, r, axioms)]
    if not d_only and not t_only:
        verdict = Verdict.EQUAL
    elif d_only and not t_only:
        verdict = Verdict.TARGET_LARGER
    elif t_only and not d_only:
        verdict = Verdict.DERIVED_LARGER
    else:
        verdict = Verdict.INCOMPARABLE
    nv = len(variables)
    side = [r for r in d.rows if not any(r[:nv])]

    def txt(rows):
        return [str(q) for q in SymbolicSystem(d.variables, d.symbols, tuple(rows)).inequalities()]

    return ProofReport(
        name=name,
        verdict=verdict,
        derived=txt(d.rows),
        target=txt(t.rows),
        derived_only=txt(d_only),
        target_only=txt(t_only),
        side_conditions=txt(side),
        identities=[] if identities is None else identities.to_text().splitlines(),
        **extra,
    )


def prepare(raw: SymbolicSystem) -> SymbolicSystem:
    """Apply the rate-split substitution R_i1 = R_i - R_i2 where present."""
    sys = raw
    for v, expr in SPLIT.items():
        if v in sys.variables:
            needed = [n for n in expr if n not in sys.variables]
            if needed:
                sys = sys.with_columns(
                    sorted(set(sys.variables) | set(needed), key=_var_key), sys.symbols
                )
            sys = substitute(sys, v, expr)
    return sys


def derive(raw: SymbolicSystem, zero: Sequence[str] = ()) -> SymbolicSystem:
    """Split substitution, zeroing, and elimination of every non-rate variable."""
    sys = prepare(raw)
    zero = [z for z in zero if z in sys.columns]
    if zero:
        sys = sys.set_zero(zero)
    return project(sys, auxiliary_vars(sys))


def verify_system(
    raw: SymbolicSystem,
    target: SymbolicSystem,
    zero: Sequence[str] = (),
    identities: SymbolicSystem | None = None,
    name: str = "user",
) -> ProofReport:
    zero = list(zero)
    derived = derive(raw, zero)
    tz = [z for z in zero if z in target.columns]
    if tz:
        target = target.set_zero(tz)
    if identities is not None and zero:
        identities = identities.set_zero(z for z in zero if z in identities.columns)
    return compare(
        derived,
        target,
        name=name,
        identities=identities,
        eliminated=auxiliary_vars(prepare(raw)),
        zeroed=zero,
    )


def verify_reduction(builtin: Builtin | str, identities: bool = True) -> ProofReport:
    """Certify one of the transcribed proof systems against its stated region."""
    b = Builtin(builtin)
    raw, target, zero = builtin_system(b)
    ids = parse_system(SHANNON_IDENTITIES) if identities else None
    return verify_system(raw, target, zero, identities=ids, name=b.value)


def parse_sections(text: str) -> dict[str, str]:
    """Split a user file into ``[system]``, ``[target]``, ``[identities]``, ``[zero]`` parts.

    A file without headers is a bare ``[system]``.
    """
    sections: dict[str, list[str]] = {}
    current = "system"
    for line in text.splitlines():
        m = re.fullmatch(r"\s*\[(\w+)\]\s*", line)
        if m:
            current = m.group(1).lower()
            if current not in ("system", "target", "identities", "zero"):
                raise GrammarError(f"unknown section [{current}]")
            continue
        sections.setdefault(current, []).append(line)
    return {k: "\n".join(v) for k, v in sections.items()}
