"""Information structures over a finite state space.

An :class:`InfoStructure` is a joint distribution over states and signal
profiles.  Each agent cares about one payoff-relevant event ``A_i`` and holds
the posterior ``P(A_i | s_i)``.  When the events partition the states, every
feasible belief distribution is generated by some structure, and
:func:`construct_infostructure` builds one from the certifying game.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .beliefs import construct_game
from .errors import BadEventStructure, MeasureError
from .measures import FiniteMeasure, Grid, mean_vector, rational


@dataclass(frozen=True)
class StateSpace:
    """State labels and one payoff-relevant event per agent."""

    states: tuple
    events: tuple

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        if len(set(states)) != len(states):
            raise BadEventStructure("duplicate state labels")
        events = tuple(frozenset(str(s) for s in e) for e in self.events)
        for i, e in enumerate(events):
            stray = e - set(states)
            if stray:
                raise BadEventStructure(f"event of agent {i} names unknown states {sorted(stray)}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "events", events)

    @property
    def n(self):
        return len(self.events)

    @classmethod
    def poker(cls, n: int) -> "StateSpace":
        """``n`` states ``w1..wn`` with ``A_i = {w_i}``."""
        labels = tuple(f"w{i + 1}" for i in range(n))
        return cls(labels, tuple((s,) for s in labels))

    def require_partition(self):
        """Raise unless the events are nonempty, pairwise disjoint and exhaustive."""
        seen = set()
        for i, e in enumerate(self.events):
            if not e:
                raise BadEventStructure(f"event of agent {i} is empty")
            overlap = seen & e
            if overlap:
                raise BadEventStructure(f"event of agent {i} overlaps earlier events at {sorted(overlap)}")
            seen |= e
        missing = set(self.states) - seen
        if missing:
            raise BadEventStructure(f"events do not cover states {sorted(missing)}")

    def owner(self, state: str) -> int:
        for i, e in enumerate(self.events):
            if state in e:
                return i
        raise BadEventStructure(f"state {state} belongs to no event")


class InfoStructure:
    """Exact joint weights ``P(state, signal profile)``."""

    __slots__ = ("space", "signals", "_joint")

    def __init__(self, space: StateSpace, joint: Mapping[tuple, object], signals: Grid | None = None):
        w = {}
        for (state, sig), q in joint.items():
            state = str(state)
            if state not in space.states:
                raise MeasureError(f"unknown state {state!r}")
            sig = tuple(rational(x) for x in sig)
            if len(sig) != space.n:
                raise MeasureError(f"signal {sig} does not have {space.n} coordinates")
            q = rational(q)
            if q < 0:
                raise MeasureError(f"negative weight at ({state}, {sig})")
            w[(state, sig)] = w.get((state, sig), Fraction(0)) + q
        if sum(w.values()) != 1:
            raise MeasureError(f"joint weights sum to {sum(w.values())}, not 1")
        if signals is None:
            signals = Grid.spanning((s for _, s in w), space.n)
        order = {s: k for k, s in enumerate(space.states)}
        self.space = space
        self.signals = signals
        self._joint = dict(sorted(w.items(), key=lambda kv: (kv[0][1], order[kv[0][0]])))

    @property
    def n(self):
        return self.space.n

    def items(self):
        return ((k, q) for k, q in self._joint.items() if q > 0)

    def prior(self) -> dict:
        """``p0(state)``: the state marginal."""
        out = {s: Fraction(0) for s in self.space.states}
        for (state, _), q in self.items():
            out[state] += q
        return out

    def event_prior(self, i: int) -> Fraction:
        p0 = self.prior()
        return sum((p0[s] for s in self.space.events[i]), Fraction(0))

    def signal_marginal(self) -> dict:
        out = {}
        for (_, sig), q in self.items():
            out[sig] = out.get(sig, Fraction(0)) + q
        return dict(sorted(out.items()))

    def mass(self, states, signal) -> Fraction:
        signal = tuple(rational(x) for x in signal)
        states = set(states)
        return sum((q for (s, sig), q in self.items() if sig == signal and s in states), Fraction(0))


def posteriors_of(I: InfoStructure, i: int) -> dict:
    """``P(A_i | s_i)`` for each of agent ``i``'s axis signals; ``None`` if ``P(s_i) = 0``."""
    if not 0 <= i < I.n:
        raise IndexError(f"agent index {i} out of range")
    event = I.space.events[i]
    num = {x: Fraction(0) for x in I.signals[i]}
    den = {x: Fraction(0) for x in I.signals[i]}
    for (state, sig), q in I.items():
        den[sig[i]] += q
        if state in event:
            num[sig[i]] += q
    return {x: (num[x] / den[x] if den[x] else None) for x in I.signals[i]}


def belief_distribution_of(I: InfoStructure) -> FiniteMeasure:
    """Distribution of the posterior vector ``(P(A_i | s_i))_i``."""
    post = [posteriors_of(I, i) for i in range(I.n)]
    w = {}
    for sig, q in I.signal_marginal().items():
        x = tuple(post[i][s] for i, s in enumerate(sig))
        w[x] = w.get(x, Fraction(0)) + q
    return FiniteMeasure(w)


def direct_reduction(I: InfoStructure) -> InfoStructure:
    """Relabel every signal by the posterior it induces, merging equal ones."""
    post = [posteriors_of(I, i) for i in range(I.n)]
    joint = {}
    for (state, sig), q in I.items():
        x = tuple(post[i][s] for i, s in enumerate(sig))
        joint[(state, x)] = joint.get((state, x), Fraction(0)) + q
    return InfoStructure(I.space, joint)


def is_direct(I: InfoStructure) -> bool:
    for i in range(I.n):
        for s, x in posteriors_of(I, i).items():
            if x is not None and x != s:
                return False
    return True


def implied_prior(nu: FiniteMeasure) -> tuple:
    """Event priors ``p0(A_i) = E[x_i]`` forced by the martingale identity."""
    return mean_vector(nu)


def construct_infostructure(nu: FiniteMeasure, states: StateSpace | None = None) -> InfoStructure:
    """A direct information structure whose belief distribution is ``nu``.

    The certifying game ``(mu, a)`` from :func:`construct_game` is turned into
    ``P(w, t) = a_i(t) mu(t) / |A_i|`` for ``w`` in ``A_i``.
    """
    if states is None:
        states = StateSpace.poker(nu.n)
    if states.n != nu.n:
        raise BadEventStructure(f"{states.n} events for {nu.n} agents")
    states.require_partition()
    game = construct_game(nu)
    joint = {}
    for t, q in game.prior.items():
        lot = game.lottery(t)
        for i, event in enumerate(states.events):
            share = lot[i] * q / len(event)
            for w in sorted(event):
                joint[(w, t)] = share
    return InfoStructure(states, joint, nu.grid)
