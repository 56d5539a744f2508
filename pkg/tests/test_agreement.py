import random
from fractions import Fraction as F

import pytest

from borderstar.agreement import agreement_check, knowledge_partitions, partition_meet
from borderstar.beliefs import borderstar_bruteforce, construct_game
from borderstar.border import GameInstance
from borderstar.errors import MeasureError
from borderstar.measures import FiniteMeasure

import gen

H, L = F(1), F(0)


class TestMeet:
    def test_fully_informed_diagonal(self):
        m = FiniteMeasure({(H, H): F(1, 2), (L, L): F(1, 2)})
        assert partition_meet(knowledge_partitions(m)) == [((L, L),), ((H, H),)]

    def test_full_support_connected(self):
        m = FiniteMeasure.uniform([(a, b) for a in (L, H) for b in (L, H)])
        assert len(partition_meet(knowledge_partitions(m))) == 1

    def test_uninformed_agent(self):
        m = FiniteMeasure({(L, L): F(1, 2), (H, L): F(1, 2)})
        assert len(partition_meet(knowledge_partitions(m))) == 1

    def test_mismatched_supports(self):
        with pytest.raises(MeasureError):
            partition_meet([[((L,),)], [((H,),)]])

    def test_cells_are_unions_of_every_agents_cells(self):
        rng = random.Random(31)
        for _ in range(30):
            m = gen.rand_measure(rng, 3)
            parts = knowledge_partitions(m)
            meet = partition_meet(parts)
            assert sorted(p for c in meet for p in c) == sorted(m.support)
            for part in parts:
                for cell in part:
                    assert any(set(cell) <= set(c) for c in meet)


class TestAgreementCheck:
    def test_uninformative(self):
        m = FiniteMeasure.uniform([(a, b) for a in (L, H) for b in (L, H)])
        rep = agreement_check(GameInstance(m, {p: (F(1, 2), F(1, 2)) for p in m.support}))
        assert len(rep.cells) == 1 and rep.cells[0].values == (F(1, 2), F(1, 2)) and rep.passed

    def test_diagonal_game(self):
        m = FiniteMeasure({(H, H): F(1, 2), (L, L): F(1, 2)})
        rep = agreement_check(GameInstance(m, {(H, H): (1, 0), (L, L): (0, 1)}))
        assert [(c.points, c.values) for c in rep.cells] == [
            (((L, L),), (0, 1)),
            (((H, H),), (1, 0)),
        ]
        assert rep.passed and all(c.complementary for c in rep.cells)

    def test_non_constant_cells_skipped(self):
        m = FiniteMeasure.uniform([(a, b) for a in (L, H) for b in (L, H)])
        alloc = {p: (1, 0) if p[0] == H else (0, 1) for p in m.support}
        rep = agreement_check(GameInstance(m, alloc))
        assert rep.cells[0].passed is None and rep.checked == 0 and rep.passed

    def test_non_product_cell(self):
        # staircase support: one connected cell that is not a product
        m = FiniteMeasure({(L, L): F(1, 3), (L, H): F(1, 3), (H, H): F(1, 3)})
        rep = agreement_check(GameInstance(m, {p: (F(1, 4), F(3, 4)) for p in m.support}))
        (cell,) = rep.cells
        assert not cell.product and cell.passed

    def test_constructed_games_pass(self):
        rng = random.Random(32)
        for _ in range(30):
            nu = gen.rand_beliefs(rng, 2, max_vals=3)
            if borderstar_bruteforce(nu).feasible:
                assert agreement_check(construct_game(nu)).passed


def test_diagonal_beliefs_always_infeasible():
    rng = random.Random(33)
    for _ in range(30):
        n = rng.choice((2, 3))
        xs = gen.rand_axis(rng, rng.randint(2, 4))
        ws = gen.rand_weights(rng, len(xs))
        nu = FiniteMeasure({(x,) * n: w for x, w in zip(xs, ws)})
        v = borderstar_bruteforce(nu)
        assert not v.feasible and v.witness.violated
