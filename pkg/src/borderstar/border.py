"""Reduced-form implementability of interim allocation rules.

Three routes decide the same question for a prior ``mu`` and interim rule
``Q``:

* :func:`border_bruteforce` enumerates every subset profile ``E_1..E_n`` and
  checks the ceiling (or floor) inequality together with the adding-up
  equality ``sum_i int Q_i dmu_i = 1``.
* :func:`flow_feasibility` solves a bipartite max-flow problem exactly and
  returns either an ex-post allocation implementing ``Q`` or a min-cut witness.
* :func:`level_set_check` scans upper threshold sets only, which is exact for
  independent priors with nondecreasing rules.

Types with zero marginal mass are ignored throughout; their interim values
are unconstrained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product as _cartesian
from math import lcm, prod
from typing import Mapping, Sequence

import numpy as np

from ._flow import FlowNetwork
from .errors import (
    InstanceTooLarge,
    MeasureError,
    NotIndependent,
    NotMonotone,
    SaturatingCut,
)
from .measures import FiniteMeasure, Grid, fmt, is_independent, rational, set_mass

DEFAULT_BRUTEFORCE_CAP = 20

CEILING = "ceiling"
FLOOR = "floor"
MARTINGALE = "martingale"


class InterimRule:
    """Per-agent winning probability ``Q_i(t_i)`` on every axis point."""

    __slots__ = ("grid", "_values")

    def __init__(self, grid: Grid, values: Sequence[Mapping]):
        if not isinstance(grid, Grid):
            grid = Grid(grid)
        if len(values) != grid.n:
            raise MeasureError(f"need interim values for {grid.n} agents, got {len(values)}")
        vals = []
        for i, (axis, v) in enumerate(zip(grid.axes, values)):
            got = {rational(k): rational(q) for k, q in v.items()}
            missing = set(axis) - set(got)
            extra = set(got) - set(axis)
            if missing or extra:
                raise MeasureError(
                    f"agent {i}: interim values must cover exactly the axis "
                    f"(missing {sorted(missing)}, extra {sorted(extra)})"
                )
            for k, q in got.items():
                if not 0 <= q <= 1:
                    raise MeasureError(f"agent {i}: Q({k}) = {q} outside [0, 1]")
            vals.append({k: got[k] for k in axis})
        self.grid = grid
        self._values = tuple(vals)

    @classmethod
    def identity(cls, grid: Grid) -> "InterimRule":
        """``Q_i(x) = x``: the revelation rule on a belief grid."""
        return cls(grid, [{x: x for x in axis} for axis in grid.axes])

    @classmethod
    def constant(cls, grid: Grid, values: Sequence) -> "InterimRule":
        return cls(grid, [{x: rational(v) for x in axis} for axis, v in zip(grid.axes, values)])

    @property
    def n(self):
        return self.grid.n

    def __getitem__(self, i) -> dict:
        return dict(self._values[i])

    def value(self, i, t_i) -> Fraction:
        return self._values[i][rational(t_i)]

    def at(self, point) -> tuple:
        return tuple(self._values[i][x] for i, x in enumerate(point))

    def agrees_on(self, other: "InterimRule", prior: FiniteMeasure) -> bool:
        """Equal on every type with positive marginal mass under ``prior``."""
        return all(
            self._values[i][x] == other._values[i][x]
            for i in range(self.n)
            for x in prior.axis_support(i)
        )

    def __eq__(self, other):
        if not isinstance(other, InterimRule):
            return NotImplemented
        return self._values == other._values

    def __repr__(self):
        parts = []
        for v in self._values:
            parts.append("{" + ", ".join(f"{fmt(k)}: {fmt(q)}" for k, q in v.items()) + "}")
        return f"InterimRule([{', '.join(parts)}])"


class GameInstance:
    """A prior together with a winner lottery at every support point."""

    __slots__ = ("prior", "_allocation")

    def __init__(self, prior: FiniteMeasure, allocation: Mapping[Sequence, Sequence]):
        alloc = {}
        for p, lot in allocation.items():
            pt = tuple(rational(x) for x in p)
            lottery = tuple(rational(q) for q in lot)
            if len(lottery) != prior.n:
                raise MeasureError(f"lottery at {pt} has {len(lottery)} entries, need {prior.n}")
            if any(q < 0 for q in lottery) or sum(lottery) != 1:
                raise MeasureError(f"lottery at {pt} is not a probability vector: {lottery}")
            alloc[pt] = lottery
        missing = [p for p in prior.support if p not in alloc]
        if missing:
            raise MeasureError(f"allocation undefined on support points {missing}")
        self.prior = prior
        self._allocation = {p: alloc[p] for p in prior.support}

    @property
    def n(self):
        return self.prior.n

    @property
    def allocation(self) -> dict:
        return dict(self._allocation)

    def lottery(self, point) -> tuple:
        return self._allocation[tuple(rational(x) for x in point)]

    def __repr__(self):
        return f"GameInstance(prior={self.prior!r}, allocation={self._allocation!r})"


@dataclass(frozen=True)
class Witness:
    """One evaluated inequality of the Border family.

    ``slack`` is nonnegative exactly when the inequality holds (for the
    martingale equality: zero exactly when it holds).
    """

    form: str
    sets: tuple
    lhs: Fraction
    rhs: Fraction
    thresholds: tuple | None = None

    @property
    def slack(self) -> Fraction:
        if self.form == FLOOR:
            return self.lhs - self.rhs
        return self.rhs - self.lhs

    @property
    def violated(self) -> bool:
        if self.form == MARTINGALE:
            return self.slack != 0
        return self.slack < 0


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    witness: Witness | None = None
    complement: Witness | None = None
    certificate: GameInstance | None = None
    reason: str | None = None
    flow_value: Fraction | None = None
    tight: tuple = ()
    details: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "Feasible" if self.feasible else "Infeasible"


@dataclass(frozen=True)
class MinCut:
    """Source side of a minimum cut, read off as per-agent type sets."""

    prior: FiniteMeasure
    rule: InterimRule
    sets: tuple
    value: Fraction


def _active_types(prior: FiniteMeasure) -> list:
    return [prior.axis_support(i) for i in range(prior.n)]


def _check_rule(prior: FiniteMeasure, Q: InterimRule):
    if Q.grid.n != prior.n:
        raise MeasureError("interim rule and prior have different agent counts")
    for i in range(prior.n):
        missing = set(prior.axis_support(i)) - set(Q.grid[i])
        if missing:
            raise MeasureError(f"interim rule of agent {i} undefined at {sorted(missing)}")


def interim_of_game(g: GameInstance) -> InterimRule:
    """Interim winning probabilities; zero-mass types get 0."""
    prior = g.prior
    num = [{x: Fraction(0) for x in prior.grid[i]} for i in range(g.n)]
    for p, q in prior.items():
        lot = g.lottery(p)
        for i in range(g.n):
            num[i][p[i]] += lot[i] * q
    vals = []
    for i in range(g.n):
        mass = prior.axis_weights(i)
        vals.append({x: (num[i][x] / mass[x] if mass[x] else Fraction(0)) for x in prior.grid[i]})
    return InterimRule(prior.grid, vals)


def allocation_total(prior: FiniteMeasure, Q: InterimRule) -> Fraction:
    """The adding-up total ``sum_i sum_t Q_i(t) mu_i(t)``; feasibility needs 1."""
    _check_rule(prior, Q)
    total = Fraction(0)
    for i in range(prior.n):
        for x, q in prior.axis_weights(i).items():
            if q:
                total += Q.value(i, x) * q
    return total


def interim_mass(prior: FiniteMeasure, Q: InterimRule, i: int, subset) -> Fraction:
    """``int over E_i of Q_i dmu_i``."""
    mass = prior.axis_weights(i)
    out = Fraction(0)
    for x in subset:
        x = rational(x)
        if x not in mass:
            raise MeasureError(f"{x} is not an axis point of agent {i}")
        if mass[x]:
            out += Q.value(i, x) * mass[x]
    return out


def evaluate_profile(prior: FiniteMeasure, Q: InterimRule, sets: Sequence, form: str = CEILING,
                     thresholds=None) -> Witness:
    """Evaluate one inequality from scratch by direct summation."""
    _check_rule(prior, Q)
    canon = tuple(tuple(sorted({rational(x) for x in s})) for s in sets)
    if form == MARTINGALE:
        return Witness(MARTINGALE, tuple(tuple(prior.grid[i]) for i in range(prior.n)),
                       allocation_total(prior, Q), Fraction(1))
    lhs = sum((interim_mass(prior, Q, i, s) for i, s in enumerate(canon)), Fraction(0))
    if form == CEILING:
        rhs = set_mass(prior, canon, "union")
    elif form == FLOOR:
        rhs = set_mass(prior, canon, "box")
    else:
        raise ValueError(f"unknown inequality form {form!r}")
    return Witness(form, canon, lhs, rhs, thresholds)


def complement_sets(prior: FiniteMeasure, sets: Sequence) -> tuple:
    """Complement of each set within the positive-mass types of its agent."""
    out = []
    for i, s in enumerate(sets):
        s = {rational(x) for x in s}
        out.append(tuple(x for x in prior.axis_support(i) if x not in s))
    return tuple(out)


def _other_form(prior, Q, w: Witness) -> Witness:
    other = FLOOR if w.form == CEILING else CEILING
    return evaluate_profile(prior, Q, complement_sets(prior, w.sets), other)


def _martingale_verdict(prior, Q, **details) -> FeasibilityVerdict | None:
    w = evaluate_profile(prior, Q, (), MARTINGALE)
    if w.violated:
        return FeasibilityVerdict(False, witness=w, reason="martingale", details=details)
    return None


def _scaled_int(values: Sequence[Fraction]) -> int:
    return reduce(lcm, (v.denominator for v in values), 1)


def _lattice_slacks(prior: FiniteMeasure, Q: InterimRule, active: list, form: str):
    """Slack of every subset profile, scaled by a common denominator.

    Profiles are indexed by one bit per active type (agent 0's lowest type
    first).  The box masses come from a subset-sum transform over these bits.
    """
    bits = [(i, x) for i in range(prior.n) for x in active[i]]
    pos = {b: k for k, b in enumerate(bits)}
    B = len(bits)
    margs = [prior.axis_weights(i) for i in range(prior.n)]
    terms = [Q.value(i, x) * margs[i][x] for i, x in bits]
    weights = [q for _, q in prior.items()]
    D = _scaled_int(terms + weights)
    dtype = np.int64 if (prior.n + 2) * D < 2**62 else object

    h = np.zeros((2,) * B, dtype=dtype)
    for p, q in prior.items():
        idx = [0] * B
        for i, x in enumerate(p):
            idx[pos[(i, x)]] = 1
        h[tuple(idx)] += int(q * D)
    g = h
    for k in range(B):
        g = np.cumsum(g, axis=k, dtype=dtype)

    lhs = np.zeros((2,) * B, dtype=dtype)
    for k, t in enumerate(terms):
        shape = [1] * B
        shape[k] = 2
        lhs = lhs + np.array([0, int(t * D)], dtype=dtype).reshape(shape)

    if form == CEILING:
        slack = (D - np.flip(g)) - lhs
    else:
        slack = lhs - g
    return bits, slack, D


def min_slack_profile(prior: FiniteMeasure, Q: InterimRule, *, form: str = CEILING,
                      cap: int = DEFAULT_BRUTEFORCE_CAP) -> tuple[Witness, dict]:
    """The subset profile of smallest slack, with enumeration statistics.

    Ties go to the first profile in enumeration order.
    """
    if form not in (CEILING, FLOOR):
        raise ValueError(f"unknown inequality form {form!r}")
    _check_rule(prior, Q)
    active = _active_types(prior)
    nbits = sum(len(a) for a in active)
    if nbits > cap:
        raise InstanceTooLarge(nbits, cap)
    bits, slack, D = _lattice_slacks(prior, Q, active, form)
    flat = slack.reshape(-1)
    k = int(np.argmin(flat))
    details = {
        "profiles_checked": 2**nbits,
        "min_slack": Fraction(int(flat[k]), D),
        "tight_profiles": int(np.count_nonzero(flat == 0)),
    }
    idx = np.unravel_index(k, slack.shape)
    sets = [[] for _ in range(prior.n)]
    for on, (i, x) in zip(idx, bits):
        if on:
            sets[i].append(x)
    return evaluate_profile(prior, Q, sets, form), details


def border_bruteforce(prior: FiniteMeasure, Q: InterimRule, *, form: str = CEILING,
                      cap: int = DEFAULT_BRUTEFORCE_CAP) -> FeasibilityVerdict:
    """Check every subset profile of positive-mass types.

    Returns the maximally violated profile when infeasible.  Feasible
    verdicts carry no certificate.
    """
    if form not in (CEILING, FLOOR):
        raise ValueError(f"unknown inequality form {form!r}")
    _check_rule(prior, Q)
    nbits = sum(len(a) for a in _active_types(prior))
    if nbits > cap:
        raise InstanceTooLarge(nbits, cap)
    bad = _martingale_verdict(prior, Q, profiles_checked=0)
    if bad is not None:
        return bad
    w, details = min_slack_profile(prior, Q, form=form, cap=cap)
    if not w.violated:
        return FeasibilityVerdict(True, details=details)
    return FeasibilityVerdict(False, witness=w, complement=_other_form(prior, Q, w),
                              reason=form, details=details)


@dataclass
class _Network:
    net: FlowNetwork
    source: int
    sink: int
    point_node: dict
    type_node: dict


def build_network(prior: FiniteMeasure, Q: InterimRule) -> _Network:
    """source -> support point (mu(t)) -> its types (uncapped) -> sink (Q_i mu_i)."""
    active = _active_types(prior)
    support = prior.support
    point_node = {p: 1 + k for k, p in enumerate(support)}
    type_node = {}
    nxt = 1 + len(support)
    for i in range(prior.n):
        for x in active[i]:
            type_node[(i, x)] = nxt
            nxt += 1
    sink = nxt
    net = FlowNetwork(sink + 1)
    for p, q in prior.items():
        net.add_edge(0, point_node[p], q)
    # Capacity 2 exceeds the total supply of 1, so these edges never bind.
    for p in support:
        for i, x in enumerate(p):
            net.add_edge(point_node[p], type_node[(i, x)], Fraction(2))
    for i in range(prior.n):
        mass = prior.axis_weights(i)
        for x in active[i]:
            net.add_edge(type_node[(i, x)], sink, Q.value(i, x) * mass[x])
    return _Network(net, 0, sink, point_node, type_node)


def cut_value_formula(prior: FiniteMeasure, Q: InterimRule, sets: Sequence) -> Fraction:
    """``1 - mu(E_1 x ... x E_n) + sum_i int_{E_i} Q_i dmu_i``."""
    box = set_mass(prior, sets, "box")
    return 1 - box + sum((interim_mass(prior, Q, i, s) for i, s in enumerate(sets)), Fraction(0))


def cut_to_witness(cut: MinCut) -> Witness:
    """Floor-form witness from the source side of a cut of value below one."""
    if cut.value >= 1:
        raise SaturatingCut(f"cut value {cut.value} does not certify infeasibility")
    w = evaluate_profile(cut.prior, cut.rule, cut.sets, FLOOR)
    assert w.violated, "min-cut identity broken"
    return w


def flow_feasibility(prior: FiniteMeasure, Q: InterimRule) -> FeasibilityVerdict:
    """Decide implementability by exact max flow.

    Feasible verdicts carry an ex-post allocation; infeasible ones carry the
    ceiling-form witness with the floor-form min-cut reading as ``complement``.
    """
    _check_rule(prior, Q)
    bad = _martingale_verdict(prior, Q)
    if bad is not None:
        return bad
    nw = build_network(prior, Q)
    value = nw.net.max_flow(nw.source, nw.sink)
    if value == 1:
        alloc = {}
        for p, q in prior.items():
            u = nw.point_node[p]
            alloc[p] = tuple(nw.net.flow[(u, nw.type_node[(i, x)])] / q for i, x in enumerate(p))
        return FeasibilityVerdict(True, certificate=GameInstance(prior, alloc), flow_value=value)
    side = nw.net.source_side(nw.source)
    sets = tuple(
        tuple(x for x in prior.axis_support(i) if nw.type_node[(i, x)] in side)
        for i in range(prior.n)
    )
    cut = MinCut(prior, Q, sets, nw.net.cut_value(side))
    floor = cut_to_witness(cut)
    ceiling = _other_form(prior, Q, floor)
    return FeasibilityVerdict(False, witness=ceiling, complement=floor, reason=CEILING,
                              flow_value=value, details={"cut_value": cut.value})


def nondecreasing(values: Sequence) -> bool:
    return all(a <= b for a, b in zip(values, values[1:]))


def _threshold_scan(margs: list, Qvals: list, active: list) -> tuple[list, Witness, list]:
    """Evaluate every upper-threshold profile under a product prior."""
    n = len(active)
    per_agent = []
    for i in range(n):
        axis = active[i]
        opts = []
        for k in range(len(axis) + 1):
            upper = axis[k:]
            lhs = sum((Qvals[i][x] * margs[i][x] for x in upper), Fraction(0))
            below = sum((margs[i][x] for x in axis[:k]), Fraction(0))
            opts.append((tuple(upper), axis[k] if k < len(axis) else None, lhs, below))
        per_agent.append(opts)
    evaluated = []
    worst = None
    for combo in _cartesian(*per_agent):
        lhs = sum((c[2] for c in combo), Fraction(0))
        rhs = 1 - prod((c[3] for c in combo), start=Fraction(1))
        w = Witness(CEILING, tuple(c[0] for c in combo), lhs, rhs, tuple(c[1] for c in combo))
        evaluated.append(w)
        if worst is None or w.slack < worst.slack:
            worst = w
    tight = [w for w in evaluated if w.slack == 0]
    return evaluated, worst, tight


def level_set_check(prior: FiniteMeasure, Q: InterimRule) -> FeasibilityVerdict:
    """Border check over threshold profiles ``E_i = {t_i >= a_i}`` only.

    Requires an independent prior and a rule nondecreasing on positive-mass
    types; under those hypotheses the verdict matches :func:`border_bruteforce`.
    """
    _check_rule(prior, Q)
    if not is_independent(prior):
        raise NotIndependent("level-set check needs an independent prior")
    active = _active_types(prior)
    bad_agents = [i for i in range(prior.n) if not nondecreasing([Q.value(i, x) for x in active[i]])]
    if bad_agents:
        raise NotMonotone(bad_agents)
    bad = _martingale_verdict(prior, Q)
    if bad is not None:
        return bad
    margs = [prior.axis_weights(i) for i in range(prior.n)]
    qv = [Q[i] for i in range(prior.n)]
    evaluated, worst, tight = _threshold_scan(margs, qv, active)
    details = {"profiles_checked": len(evaluated), "min_slack": worst.slack}
    if not worst.violated:
        return FeasibilityVerdict(True, tight=tuple(tight), details=details)
    return FeasibilityVerdict(False, witness=worst, complement=_other_form(prior, Q, worst),
                              reason=CEILING, tight=tuple(tight), details=details)
