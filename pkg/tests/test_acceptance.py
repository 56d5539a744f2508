"""End-to-end acceptance checks.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import random
import subprocess
import sys
import time
from fractions import Fraction as F
from functools import lru_cache
from pathlib import Path

from borderstar import auctions, gallery
from borderstar.agreement import agreement_check
from borderstar.auctions import bic_feasibility, example1_nonconvexity, quantile_pushforward
from borderstar.beliefs import (
    borderstar_bruteforce,
    borderstar_feasibility,
    construct_game,
)
from borderstar.border import CEILING, MARTINGALE, GameInstance, interim_of_game
from borderstar.errors import AtomSplitRequired
from borderstar.infostruct import (
    StateSpace,
    belief_distribution_of,
    construct_infostructure,
)
from borderstar.measures import FiniteMeasure, mean_vector, product, pushforward

from conftest import record_acceptance
import gen
import oracles

FIX = Path(__file__).parent / "fixtures"


@lru_cache(maxsize=None)
def random_instances():
    rng = random.Random(2024)
    out = []
    for k in range(240):
        out.append(gen.rand_beliefs(rng, 2 if k % 2 else 3, max_vals=4))
    return tuple(out)


def reevaluate(nu, w) -> bool:
    """Independent recomputation of a witness; True if it is violated as stated."""
    weights = nu.weights()
    n = nu.n
    Q = oracles.identity_rule(weights, n)
    if w.form == MARTINGALE:
        return oracles.adding_up(weights, Q, n) == w.lhs != 1
    ceil, floor = oracles.profile_slacks(weights, Q, n, [set(s) for s in w.sets])
    slack = ceil if w.form == CEILING else floor
    return slack == w.slack and slack < 0


def test_oracle_equivalence():
    t0 = time.perf_counter()
    nus = random_instances()
    agree = witnesses_ok = True
    infeasible = 0
    for nu in nus:
        flow = borderstar_feasibility(nu)
        brute = borderstar_bruteforce(nu)
        ref = oracles.border_feasible(nu.weights(), oracles.identity_rule(nu.weights(), nu.n), nu.n)
        agree &= flow.feasible == brute.feasible == ref
        if not flow.feasible:
            infeasible += 1
            for v in (flow, brute):
                witnesses_ok &= reevaluate(nu, v.witness)
                if v.complement is not None:
                    witnesses_ok &= reevaluate(nu, v.complement)
    elapsed = time.perf_counter() - t0
    ok = agree and witnesses_ok and elapsed < 60 and len(nus) >= 200
    record_acceptance("01 oracle equivalence", ok,
                      f"{len(nus)} instances, {infeasible} infeasible, {elapsed:.1f}s")
    assert ok


def test_certificate_round_trip():
    feasible = [nu for nu in random_instances() if borderstar_feasibility(nu).feasible]
    ok = bool(feasible)
    for nu in feasible:
        g = construct_game(nu)
        ok &= pushforward(g.prior, interim_of_game(g).at) == nu
        ok &= all(sum(g.lottery(p)) == 1 for p in g.prior.support)
    record_acceptance("02 certificate round trip", ok, f"{len(feasible)} feasible instances")
    assert ok


def test_diagonal_beliefs():
    diag = FiniteMeasure({(F(1), F(1)): F(1, 2), (F(0), F(0)): F(1, 2)})
    v = borderstar_bruteforce(diag)
    ok = (not v.feasible and v.witness.sets == ((F(1),), (F(1),))
          and v.witness.lhs == 1 and v.witness.rhs == F(1, 2))
    rng = random.Random(7)
    for _ in range(50):
        n = rng.choice((2, 3))
        xs = gen.rand_axis(rng, rng.randint(2, 4))
        nu = FiniteMeasure({(x,) * n: w for x, w in zip(xs, gen.rand_weights(rng, len(xs)))})
        ok &= not borderstar_bruteforce(nu).feasible and not borderstar_feasibility(nu).feasible
    record_acceptance("03 diagonal beliefs infeasible", ok)
    assert ok


def _block_game(rng):
    """Disjoint blocks, each with one fixed lottery, so cells have constant posteriors."""
    n = 2 if rng.random() < 0.5 else 3
    vals = [gen.rand_axis(rng, 4, den=12) for _ in range(n)]
    weights = {}
    alloc = {}
    cut = rng.randint(1, 3)
    blocks = [[v[:cut] for v in vals], [v[cut:] for v in vals]]
    for block in blocks:
        lot = gen.rand_lottery(rng, n)
        pts = {tuple(rng.choice(ax) for ax in block) for _ in range(4)}
        # chain the points so the block is one cell, possibly non-product
        for p in sorted(pts):
            weights[p] = rng.randint(1, 4)
            alloc[p] = lot
        first = sorted(pts)[0]
        for i in range(n):
            for x in block[i]:
                q = first[:i] + (x,) + first[i + 1:]
                weights.setdefault(q, rng.randint(1, 4))
                alloc.setdefault(q, lot)
    s = sum(weights.values())
    return GameInstance(FiniteMeasure({p: F(w, s) for p, w in weights.items()}), alloc)


def test_agreement_identity():
    rng = random.Random(99)
    games = [gen.rand_game(rng, rng.choice((2, 3))) for _ in range(150)]
    games += [_block_game(rng) for _ in range(100)]
    ok, checked, non_product = True, 0, 0
    for g in games:
        for c in agreement_check(g).cells:
            if c.passed is None:
                continue
            checked += 1
            non_product += not c.product
            ok &= c.total == 1
            if g.n == 2:
                ok &= c.values[0] == 1 - c.values[1]
    ok &= len(games) >= 200
    record_acceptance("04 agreement identity", ok,
                      f"{len(games)} games, {checked} constant cells, {non_product} non-product")
    assert ok


def test_info_structure_round_trip():
    feasible = [nu for nu in random_instances() if borderstar_feasibility(nu).feasible]
    ok = True
    for k, nu in enumerate(feasible):
        if k % 2:
            labels = tuple(f"s{j}" for j in range(nu.n + 2))
            space = StateSpace(labels, (labels[:3],) + tuple((s,) for s in labels[3:]))
        else:
            space = StateSpace.poker(nu.n)
        I = construct_infostructure(nu, space)
        ok &= belief_distribution_of(I) == nu
        ok &= tuple(I.event_prior(i) for i in range(nu.n)) == mean_vector(nu)
    record_acceptance("05 information structure round trip", ok, f"{len(feasible)} instances")
    assert ok


def test_copula_verdicts():
    fr = gallery.quadratic_bound_scan(gallery.CopulaSpec("frechet_upper"))
    a = (F(1, 2), F(1, 2))
    ok = fr.holds is False and fr.worst_point == a
    ok &= gallery.copula_cdf(gallery.CopulaSpec("frechet_upper"), *a) == F(1, 2)
    ok &= (a[0] ** 2 + a[1] ** 2) / 2 == F(1, 4)
    for family, lo, hi in (("fgm", -10, 10), ("amh", -10, 9), ("clayton", -10, 20)):
        for k in range(lo, hi + 1):
            r = gallery.quadratic_bound_scan(gallery.CopulaSpec(family, F(k, 10)))
            ok &= r.points_checked == 441
            ok &= r.holds is (k <= 0)
    for th in (F(1, 10), F(-1, 10), F(1, 2), F(-1, 2)):
        c = gallery.CopulaSpec("clayton", th)
        ok &= not gallery.quadratic_bound_scan(c).boundary and not gallery.pqd_check(c).boundary
    record_acceptance("06 copula bound verdicts", ok)
    assert ok


def test_uninformed_seller_bound():
    U = gallery.SymmetricMarginal("uniform")
    ok = gallery.large_n_bound(U, 3) and not gallery.large_n_bound(U, 4)
    ok &= gallery.large_n_value(U, 3) == 1 and gallery.large_n_value(U, 4) == F(3, 2)
    record_acceptance("07 uniform beliefs with uninformed seller", ok)
    assert ok


def test_upper_triangle():
    spec = gallery.CopulaSpec("upper_triangle")
    bary = {m: borderstar_feasibility(
        gallery.discretize(spec, m, representative="barycenter").measure).feasible
        for m in (1, 2, 4, 8)}
    center = {m: borderstar_feasibility(gallery.discretize(spec, m).measure).feasible
              for m in (1, 2, 4, 8)}
    c = gallery.triangle_condition(F(3, 5))
    rep = gallery.triangle_violation_report()
    ok = not any(bary.values())
    ok &= c.violated_halved and c.lhs == F(392, 375) and c.rhs_halved == F(49, 50)
    ok &= bool(rep["notes"])
    # cell centers collapse the one-cell discretization onto (1/2, 1/2)
    assert center == {1: True, 2: False, 4: False, 8: False}
    record_acceptance(
        "08 upper-triangle uniform infeasible", ok,
        "barycenter cells; center cells are feasible at m=1 (point mass at (1/2,1/2))",
    )
    assert ok


def test_bic_consistency():
    rng = random.Random(5)
    ok, n_inst, outcomes = True, 0, set()
    for _ in range(120):
        nu = gen.rand_independent(rng, rng.choice((2, 3)), max_vals=4)
        b = bic_feasibility(nu).feasible
        ok &= b == borderstar_feasibility(nu).feasible == borderstar_bruteforce(nu).feasible
        outcomes.add(b)
        n_inst += 1
    two = FiniteMeasure.on_axis({F(1, 4): F(1, 2), F(3, 4): F(1, 2)})
    v = bic_feasibility(product([two, two]))
    ok &= v.feasible and (F(3, 4), F(3, 4)) in {w.thresholds for w in v.tight}
    ok &= outcomes == {True, False}
    record_acceptance("09 threshold profiles match full check", ok, f"{n_inst} independent instances")
    assert ok


def test_quantile_pushforward():
    rng = random.Random(8)
    ok = True
    for _ in range(120):
        mu, nu = gen.alignable_pair(rng)
        m = quantile_pushforward(mu, nu)
        pf = oracles.pushforward({(x,): q for x, q in mu.items()}, lambda p: (m(p[0]),))
        ok &= m.is_nondecreasing() and pf == {(x,): q for x, q in nu.items()}
    raised = expected = 0
    for _ in range(200):
        mu_ax, nu_ax = gen.rand_axis(rng, rng.randint(1, 4)), gen.rand_axis(rng, rng.randint(1, 4))
        mu = dict(zip(mu_ax, gen.rand_weights(rng, len(mu_ax))))
        nu = dict(zip(nu_ax, gen.rand_weights(rng, len(nu_ax))))
        misaligned = not oracles.aligned(mu, nu)
        expected += misaligned
        try:
            quantile_pushforward(mu, nu)
            ok &= not misaligned
        except AtomSplitRequired:
            raised += 1
            ok &= misaligned
    ok &= raised == expected > 0
    record_acceptance("10 monotone pushforwards", ok, f"{raised} atom splits detected")
    assert ok


def test_example1_nonconvexity():
    r = example1_nonconvexity()
    ok = r["box"] == ((F(1, 2), F(1)), (F(0), F(1, 2)))
    ok &= r["mass_c"] == 1 and r["mixture_mass"] == F(5, 8) and not r["c_is_mixture"]
    ok &= auctions.example1_box_mass("b", r["box"]) == F(1, 4)
    record_acceptance("11 belief map is not affine", ok)
    assert ok


CLI_RUNS = [
    ["check-beliefs", "--input", "diagonal.json"],
    ["check-beliefs", "--input", "antidiagonal.json", "--method", "bruteforce"],
    ["check-beliefs", "--input", "antidiagonal.json", "--general-model",
     "--states", "a,b,c", "--events", "a;b,c"],
    ["check-beliefs", "--input", "bad_mass.json"],
    ["check-beliefs", "--input", "bad_rational.json"],
    ["check-reduced-form", "--input", "interim_feasible.json"],
    ["check-reduced-form", "--input", "interim_infeasible.json", "--output", "table"],
    ["construct-game", "--input", "symmetric_two_point.json"],
    ["construct-info", "--input", "antidiagonal.json"],
    ["agreement", "--input", "game_antidiagonal.json"],
    ["auction-check", "--input", "symmetric_two_point.json"],
    ["auction-check", "--mode", "fixed-prior", "--input", "symmetric_two_point.json",
     "--prior", "uniform_prior_2x2.json"],
    ["copula-scan", "--family", "fgm", "--theta", "1/2"],
    ["copula-scan", "--input", "copula_fgm.json", "--discretize", "3", "--full-check"],
    ["copula-scan", "--family", "clayton", "--theta", "1/2", "--discretize", "3"],
    ["copula-scan", "--family", "upper_triangle", "--discretize", "2", "--full-check"],
    ["core-slack", "--input", "diagonal.json"],
    ["example1", "--point", "1/2,1/2", "--point", "1/4,3/4"],
]


def _run(argv):
    args = [a if not a.endswith(".json") else str(FIX / a) for a in argv]
    p = subprocess.run([sys.executable, "-m", "borderstar", *args], capture_output=True)
    return p.returncode, p.stdout, p.stderr


def test_cli_determinism():
    ok = True
    codes = set()
    for argv in CLI_RUNS:
        first, second = _run(argv), _run(argv)
        ok &= first == second and first[0] in (0, 1, 2)
        codes.add(first[0])
    ok &= codes == {0, 1, 2}
    record_acceptance("12 CLI determinism", ok, f"{len(CLI_RUNS)} commands run twice each")
    assert ok
