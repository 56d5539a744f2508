import random
from fractions import Fraction as F
from itertools import product as cartesian

import pytest

from borderstar.beliefs import (
    TestingProfile,
    beliefs_of_game,
    borderstar_bruteforce,
    borderstar_feasibility,
    construct_game,
    core_slack,
    fixed_prior_feasibility,
    martingale_check,
    min_core_slack,
    no_trade_gap,
)
from borderstar.border import CEILING, FLOOR, GameInstance, interim_of_game
from borderstar.errors import InfeasibleInput, NotIndependentPrior
from borderstar.measures import FiniteMeasure, is_independent, product

import gen
import oracles

DIAG = FiniteMeasure({(F(1), F(1)): F(1, 2), (F(0), F(0)): F(1, 2)})
ANTI = FiniteMeasure({(F(1, 4), F(3, 4)): F(1, 2), (F(3, 4), F(1, 4)): F(1, 2)})
HALF = FiniteMeasure.point_mass((F(1, 2), F(1, 2)))
TWO = FiniteMeasure.on_axis({F(1, 4): F(1, 2), F(3, 4): F(1, 2)})
SYM = product([TWO, TWO])


def test_martingale_values():
    assert martingale_check(HALF) == 1
    assert martingale_check(DIAG) == 1


class TestBruteforce:
    def test_diag(self):
        v = borderstar_bruteforce(DIAG)
        assert not v.feasible
        assert v.witness.sets == ((F(1),), (F(1),))
        assert (v.witness.lhs, v.witness.rhs) == (1, F(1, 2))

    def test_antidiagonal_feasible(self):
        assert borderstar_bruteforce(ANTI).feasible

    def test_point_mass_tight(self):
        assert borderstar_bruteforce(HALF).feasible
        p = TestingProfile(((F(1, 2),), (F(1, 2),)))
        assert no_trade_gap(HALF, p) == 0

    def test_three_way_equivalence(self):
        rng = random.Random(11)
        for _ in range(80):
            nu = gen.rand_beliefs(rng, rng.choice((2, 3)), max_vals=3)
            ceil = borderstar_bruteforce(nu, form=CEILING).feasible
            floor = borderstar_bruteforce(nu, form=FLOOR).feasible
            flow = borderstar_feasibility(nu).feasible
            ref = oracles.border_feasible(nu.weights(), oracles.identity_rule(nu.weights(), nu.n), nu.n)
            assert ceil == floor == flow == ref
            if flow:
                assert martingale_check(nu) == 1


class TestFeasibility:
    def test_antidiagonal_certificate(self):
        v = borderstar_feasibility(ANTI)
        g = v.certificate
        assert g.prior == ANTI
        Q = interim_of_game(g)
        assert all(Q.at(p) == p for p in ANTI.support)

    def test_diag_same_witness_as_bruteforce(self):
        assert borderstar_feasibility(DIAG).witness == borderstar_bruteforce(DIAG).witness

    def test_symmetric_independent(self):
        v = borderstar_feasibility(SYM)
        assert v.feasible
        assert all(interim_of_game(v.certificate).at(p) == p for p in SYM.support)

    def test_stated_symmetric_allocation_is_valid(self):
        # a_1 = 1 at (3/4,1/4), 1/2 at (3/4,3/4) and (1/4,1/4), 0 at (1/4,3/4)
        lo, hi = F(1, 4), F(3, 4)
        a1 = {(hi, lo): 1, (hi, hi): F(1, 2), (lo, lo): F(1, 2), (lo, hi): 0}
        g = GameInstance(SYM, {p: (q, 1 - q) for p, q in a1.items()})
        assert all(interim_of_game(g).at(p) == p for p in SYM.support)


class TestConstructGame:
    @pytest.mark.parametrize("nu", [ANTI, HALF, SYM])
    def test_round_trip(self, nu):
        g = construct_game(nu)
        assert g.prior == nu and beliefs_of_game(g) == nu

    def test_point_mass_lottery(self):
        g = construct_game(HALF)
        assert g.lottery((F(1, 2), F(1, 2))) == (F(1, 2), F(1, 2))

    def test_infeasible_carries_witness(self):
        with pytest.raises(InfeasibleInput) as exc:
            construct_game(DIAG)
        assert exc.value.verdict.witness.sets == ((F(1),), (F(1),))


class TestCoreSlack:
    def test_full_axes_is_martingale_minus_one(self):
        rng = random.Random(12)
        for _ in range(20):
            nu = gen.rand_measure(rng, 2)
            full = TestingProfile(tuple(nu.grid[i] for i in range(2)))
            assert core_slack(nu, full) == martingale_check(nu) - 1

    def test_diag_blocking_coalition(self):
        assert core_slack(DIAG, TestingProfile(((F(0),), (F(0),)))) == F(-1, 2)

    def test_antidiagonal_min_slack_zero(self):
        assert min_core_slack(ANTI).slack == 0

    def test_complement_identity(self):
        rng = random.Random(13)
        for _ in range(40):
            nu = gen.rand_beliefs(rng, 2, max_vals=3)
            feasible = borderstar_bruteforce(nu).feasible
            assert (min_core_slack(nu).slack >= 0 and martingale_check(nu) == 1) == feasible
            for sets in cartesian(*(list(oracles.powerset(nu.grid[i])) for i in range(2))):
                p = TestingProfile(sets)
                # the no-trade gap of the complement equals the core slack when the martingale holds
                if martingale_check(nu) == 1:
                    assert no_trade_gap(nu, p.complement(nu)) == core_slack(nu, p)


class TestThresholdProfile:
    def test_from_thresholds(self):
        p = TestingProfile.from_thresholds(SYM, [F(3, 4), None])
        assert p.sets == ((F(3, 4),), ())


class TestFixedPrior:
    def test_identity(self):
        v = fixed_prior_feasibility(SYM, SYM)
        assert v.feasible
        Q = v.details["interim"]
        assert all(Q.at(p) == p for p in SYM.support)

    def test_four_atoms_grouped(self):
        mu_i = FiniteMeasure.on_axis({F(k, 4): F(1, 4) for k in range(4)})
        nu_i = FiniteMeasure.on_axis({F(0): F(1, 4), F(1): F(3, 4)})
        v_map = fixed_prior_feasibility(product([mu_i, mu_i]), product([nu_i, nu_i]))
        maps = v_map.details["maps"]
        assert maps[0].mapping == {F(0): 0, F(1, 4): 1, F(1, 2): 1, F(3, 4): 1}
        # the joint of two such agents fails the martingale (3/4 + 3/4)
        star = borderstar_feasibility(product([nu_i, nu_i]))
        assert v_map.feasible == star.feasible is False
        assert v_map.reason == "BorderStarViolated"

    def test_atom_split(self):
        mu_i = FiniteMeasure.on_axis({F(0): F(1, 2), F(1): F(1, 2)})
        nu_i = FiniteMeasure.on_axis({F(0): F(1, 3), F(1, 2): F(2, 3)})
        v = fixed_prior_feasibility(product([mu_i, mu_i]), product([nu_i, FiniteMeasure.on_axis({F(0): 1})]))
        assert not v.feasible and v.reason == "AtomSplitRequired"

    def test_correlated_prior_rejected(self):
        with pytest.raises(NotIndependentPrior):
            fixed_prior_feasibility(DIAG, SYM)

    def test_correlated_posterior(self):
        v = fixed_prior_feasibility(SYM, ANTI)
        assert not v.feasible and v.reason == "NotIndependentPosterior"


def test_independent_prior_gives_independent_beliefs():
    # Q_i depends on t_i alone, so the pushforward of a product prior is a product
    rng = random.Random(14)
    for _ in range(40):
        n = rng.choice((2, 3))
        prior = gen.rand_independent(rng, n, martingale=False)
        g = GameInstance(prior, {p: gen.rand_lottery(rng, n) for p in prior.support})
        assert is_independent(beliefs_of_game(g))
