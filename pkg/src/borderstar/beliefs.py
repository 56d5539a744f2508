"""Feasibility of joint posterior-belief distributions.

A belief distribution ``nu`` on [0,1]^n is feasible iff, for all subsets
``C_1..C_n`` of the belief axes,

    sum_i sum_{x in C_i} x nu_i(x)  <=  nu(some x_i in C_i)     (ceiling)

and ``sum_i E[x_i] = 1``.  Equivalently the floor form
``sum_i sum_{C_i} x nu_i(x) >= nu(C_1 x ... x C_n)`` holds for all profiles.
Feasibility is decided by taking ``nu`` itself as the prior and the identity
as the interim rule, then running the reduced-form machinery in :mod:`border`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import auctions, border
from .border import (
    CEILING,
    DEFAULT_BRUTEFORCE_CAP,
    FLOOR,
    FeasibilityVerdict,
    GameInstance,
    InterimRule,
    Witness,
)
from .errors import (
    AtomSplitRequired,
    InfeasibleInput,
    MeasureError,
    NotIndependentPrior,
)
from .measures import (
    FiniteMeasure,
    expectation_over,
    is_independent,
    marginal,
    mean_vector,
    pushforward,
    rational,
    set_mass,
)


@dataclass(frozen=True)
class TestingProfile:
    """One subset of belief values per agent, optionally from thresholds."""

    __test__ = False  # not a pytest class

    sets: tuple
    thresholds: tuple | None = None

    def __post_init__(self):
        sets = tuple(tuple(sorted({rational(x) for x in s})) for s in self.sets)
        object.__setattr__(self, "sets", sets)

    @classmethod
    def from_thresholds(cls, nu: FiniteMeasure, thresholds: Sequence) -> "TestingProfile":
        """``C_i = {x_i >= a_i}`` over the grid; ``None`` gives the empty set."""
        sets = []
        for i, a in enumerate(thresholds):
            if a is None:
                sets.append(())
            else:
                sets.append(tuple(x for x in nu.grid[i] if x >= rational(a)))
        th = tuple(None if a is None else rational(a) for a in thresholds)
        return cls(tuple(sets), th)

    def complement(self, nu: FiniteMeasure) -> "TestingProfile":
        return TestingProfile(tuple(
            tuple(x for x in nu.grid[i] if x not in set(s)) for i, s in enumerate(self.sets)
        ))


def _identity(nu: FiniteMeasure) -> InterimRule:
    return InterimRule.identity(nu.grid)


def _check_beliefs(nu: FiniteMeasure):
    if not isinstance(nu, FiniteMeasure):
        raise TypeError("belief distribution must be a FiniteMeasure")


def martingale_check(nu: FiniteMeasure) -> Fraction:
    """``sum_i E[x_i]``; a feasible distribution has exactly 1."""
    return sum(mean_vector(nu), Fraction(0))


def borderstar_bruteforce(nu: FiniteMeasure, *, form: str = CEILING,
                          cap: int = DEFAULT_BRUTEFORCE_CAP) -> FeasibilityVerdict:
    """Enumerate every testing profile of the support values."""
    _check_beliefs(nu)
    return border.border_bruteforce(nu, _identity(nu), form=form, cap=cap)


def borderstar_feasibility(nu: FiniteMeasure) -> FeasibilityVerdict:
    """Decide feasibility by max flow; feasible verdicts carry the game."""
    _check_beliefs(nu)
    return border.flow_feasibility(nu, _identity(nu))


def construct_game(nu: FiniteMeasure) -> GameInstance:
    """A game whose prior is ``nu`` and whose interim rule is the identity."""
    v = borderstar_feasibility(nu)
    if not v.feasible:
        raise InfeasibleInput(v)
    return v.certificate


def beliefs_of_game(g: GameInstance) -> FiniteMeasure:
    """Joint distribution of posteriors: the prior pushed forward by ``Q``."""
    Q = border.interim_of_game(g)
    return pushforward(g.prior, Q.at)


def _lhs(nu: FiniteMeasure, sets) -> Fraction:
    return sum((expectation_over(nu, i, s) for i, s in enumerate(sets)), Fraction(0))


def core_slack(nu: FiniteMeasure, profile: TestingProfile) -> Fraction:
    """Floor-form slack ``sum_i int_{C_i} x dnu_i - nu(C_1 x ... x C_n)``.

    Nonnegative for every profile exactly when ``x -> x`` is a core
    allocation of the coalition game whose worth is ``nu`` of the box.
    """
    return _lhs(nu, profile.sets) - set_mass(nu, profile.sets, "box")


def no_trade_gap(nu: FiniteMeasure, profile: TestingProfile) -> Fraction:
    """Mediator's payout bound minus revenue when agent i bets iff ``x_i in C_i``.

    This is the ceiling-form slack of the profile.
    """
    return set_mass(nu, profile.sets, "union") - _lhs(nu, profile.sets)


def min_core_slack(nu: FiniteMeasure, cap: int = DEFAULT_BRUTEFORCE_CAP) -> Witness:
    """Floor-form profile of smallest slack over all support-value profiles."""
    _check_beliefs(nu)
    return border.min_slack_profile(nu, _identity(nu), form=FLOOR, cap=cap)[0]


def fixed_prior_feasibility(mu: FiniteMeasure, nu: FiniteMeasure) -> FeasibilityVerdict:
    """Feasibility of ``nu`` for some game on the given independent prior ``mu``.

    Requires ``nu`` independent, the belief inequalities, and for each agent a
    monotone grouping of ``mu_i``'s atoms onto ``nu_i``'s atoms (no atom may
    be split).  Infeasible verdicts name the failed condition in ``reason``.
    """
    if mu.n != nu.n:
        raise MeasureError(f"prior has {mu.n} agents, beliefs have {nu.n}")
    if not is_independent(mu):
        raise NotIndependentPrior("fixed-prior mode needs an independent prior")
    if not is_independent(nu):
        return FeasibilityVerdict(False, reason="NotIndependentPosterior")
    maps = []
    for i in range(mu.n):
        try:
            maps.append(auctions.quantile_pushforward(marginal(mu, i), marginal(nu, i)))
        except AtomSplitRequired as exc:
            return FeasibilityVerdict(False, reason="AtomSplitRequired",
                                      details={"agent": i, "message": str(exc)})
    star = borderstar_feasibility(nu)
    if not star.feasible:
        return FeasibilityVerdict(False, witness=star.witness, complement=star.complement,
                                  reason="BorderStarViolated", flow_value=star.flow_value,
                                  details={"maps": maps})
    Q = auctions.induced_rule(mu, maps)
    if pushforward(mu, Q.at) != nu:
        raise AssertionError("monotone grouping failed to push the prior onto the beliefs")
    game = border.flow_feasibility(mu, Q)
    if not game.feasible:
        raise AssertionError("change of measure broke the Border inequalities")
    return FeasibilityVerdict(True, certificate=game.certificate,
                              details={"maps": maps, "interim": Q})
