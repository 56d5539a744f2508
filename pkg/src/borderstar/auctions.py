"""Monotone interim rules, threshold tests and one-dimensional transport maps."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import border
from .border import FeasibilityVerdict, InterimRule, Witness
from .errors import AtomSplitRequired, MeasureError
from .measures import FiniteMeasure, is_independent, rational


@dataclass(frozen=True)
class MonotoneMap:
    """Nondecreasing map from one agent's prior atoms to belief atoms."""

    mapping: dict

    def __call__(self, t):
        return self.mapping[rational(t)]

    def is_nondecreasing(self) -> bool:
        keys = sorted(self.mapping)
        return border.nondecreasing([self.mapping[k] for k in keys])


def monotone_check(Q: InterimRule) -> tuple:
    """Per agent: is ``Q_i`` nondecreasing along the sorted axis?"""
    return tuple(
        border.nondecreasing([Q.value(i, x) for x in Q.grid[i]]) for i in range(Q.n)
    )


def _axis(m) -> dict:
    if isinstance(m, FiniteMeasure):
        if m.n != 1:
            raise MeasureError("expected a single-axis measure")
        return {x: q for x, q in m.axis_weights(0).items() if q > 0}
    w = {rational(k): rational(v) for k, v in m.items()}
    if sum(w.values()) != 1:
        raise MeasureError("marginal weights do not sum to 1")
    return {k: w[k] for k in sorted(w) if w[k] > 0}


def quantile_pushforward(mu_i, nu_i) -> MonotoneMap:
    """Group consecutive prior atoms, in increasing order, onto belief atoms.

    The grouping exists iff every cumulative mass of ``nu_i`` is also a
    cumulative mass of ``mu_i``; otherwise some prior atom would have to be
    split and :class:`AtomSplitRequired` is raised.
    """
    src = _axis(mu_i)
    dst = _axis(nu_i)
    targets = list(dst.items())
    mapping = {}
    j = 0
    filled = Fraction(0)
    for t, q in src.items():
        y, need = targets[j]
        if filled + q > need:
            raise AtomSplitRequired(
                f"prior atom {t} (mass {q}) straddles belief atom {y} "
                f"(remaining mass {need - filled})"
            )
        mapping[t] = y
        filled += q
        if filled == need:
            j += 1
            filled = Fraction(0)
    return MonotoneMap(mapping)


def pushes_forward(mapping: MonotoneMap, mu_i, nu_i) -> bool:
    src = _axis(mu_i)
    out = {}
    for t, q in src.items():
        y = mapping(t)
        out[y] = out.get(y, Fraction(0)) + q
    return out == _axis(nu_i)


def induced_rule(mu: FiniteMeasure, maps) -> InterimRule:
    """Interim rule applying ``maps[i]`` coordinate-wise.

    Zero-mass axis points inherit the value of the nearest positive-mass
    point below them (the lowest image if there is none), so the rule
    stays nondecreasing.
    """
    vals = []
    for i, m in enumerate(maps):
        axis = mu.grid[i]
        lowest = min(m.mapping.values())
        cur = lowest
        v = {}
        for x in axis:
            if x in m.mapping:
                cur = m.mapping[x]
            v[x] = cur
        vals.append(v)
    return InterimRule(mu.grid, vals)


def bic_feasibility(nu: FiniteMeasure) -> FeasibilityVerdict:
    """Feasibility for some independent prior and monotone (BIC) auction.

    Checks independence of ``nu``, the martingale equality and the threshold
    inequalities ``sum_i int_{x_i >= a_i} x_i dnu_i <= 1 - prod_i nu_i(x_i < a_i)``.
    DIC feasibility is reported as the same flag; no DIC allocation is built.
    """
    Q = InterimRule.identity(nu.grid)
    if not is_independent(nu):
        return FeasibilityVerdict(False, reason="NotIndependentPosterior",
                                  details={"bic": False, "dic": False})
    v = border.level_set_check(nu, Q)
    details = dict(v.details, bic=v.feasible, dic=v.feasible)
    certificate = None
    if v.feasible:
        certificate = border.flow_feasibility(nu, Q).certificate
    return FeasibilityVerdict(v.feasible, witness=v.witness, complement=v.complement,
                              certificate=certificate, reason=v.reason, tight=v.tight,
                              details=details)


def fixed_prior_bic(mu: FiniteMeasure, nu: FiniteMeasure) -> FeasibilityVerdict:
    """BIC feasibility with the prior fixed: quantile maps plus the threshold test."""
    from .beliefs import fixed_prior_feasibility

    v = fixed_prior_feasibility(mu, nu)
    if not v.feasible:
        return v
    maps = v.details["maps"]
    mono = all(m.is_nondecreasing() for m in maps)
    thr = bic_feasibility(nu)
    ok = mono and thr.feasible
    return FeasibilityVerdict(ok, witness=thr.witness, complement=thr.complement,
                              certificate=v.certificate if ok else None,
                              reason=None if ok else thr.reason, tight=thr.tight,
                              details=dict(v.details, monotone=mono, bic=ok, dic=ok))


# Example: two bidders with independent uniform priors on [0, 1].
# Auction a always awards bidder 1, b awards the higher type, c mixes a and b
# half and half.

EXAMPLE1_AUCTIONS = ("a", "b", "c")


def _example1_rule(auction: str, t1: Fraction, t2: Fraction) -> tuple:
    if auction == "a":
        return (Fraction(1), Fraction(0))
    if auction == "b":
        return (t1, t2)
    if auction == "c":
        return (Fraction(1, 2) + t1 / 2, t2 / 2)
    raise ValueError(f"unknown auction {auction!r}; expected one of {EXAMPLE1_AUCTIONS}")


EXAMPLE1_SUPPORT = {
    "a": ((Fraction(1), Fraction(1)), (Fraction(0), Fraction(0))),
    "b": ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1))),
    "c": ((Fraction(1, 2), Fraction(1)), (Fraction(0), Fraction(1, 2))),
}


def example1_belief_cdf(auction: str, x1, x2) -> Fraction:
    """CDF of the belief distribution ``nu(X_1 <= x1, X_2 <= x2)``."""
    x1, x2 = rational(x1), rational(x2)
    clip = lambda v: min(max(v, Fraction(0)), Fraction(1))
    if auction == "a":
        return Fraction(int(x1 >= 1 and x2 >= 0))
    if auction == "b":
        return clip(x1) * clip(x2)
    if auction == "c":
        return clip(2 * x1 - 1) * clip(2 * x2)
    raise ValueError(f"unknown auction {auction!r}")


def example1_box_mass(auction: str, box) -> Fraction:
    """Mass of the closed box ``[l1,u1] x [l2,u2]``.

    Inclusion-exclusion on the CDF gives the half-open box; the lower edges
    carry mass only for the point mass of auction ``a``, handled directly.
    """
    (l1, u1), (l2, u2) = [(rational(a), rational(b)) for a, b in box]
    if auction == "a":
        return Fraction(int(l1 <= 1 <= u1 and l2 <= 0 <= u2))
    F = lambda a, b: example1_belief_cdf(auction, a, b)
    return F(u1, u2) - F(l1, u2) - F(u1, l2) + F(l1, l2)


def example1_eval(auction: str, point) -> dict:
    """Interim values at a type profile plus the belief support box."""
    t1, t2 = (rational(p) for p in point)
    if not (0 <= t1 <= 1 and 0 <= t2 <= 1):
        raise ValueError(f"type profile {point} outside [0, 1]^2")
    return {
        "auction": auction,
        "point": (t1, t2),
        "interim": _example1_rule(auction, t1, t2),
        "support_box": EXAMPLE1_SUPPORT[auction],
    }


def example1_nonconvexity() -> dict:
    """Box-mass comparison showing ``nu^c`` differs from ``(nu^a + nu^b) / 2``."""
    box = ((Fraction(1, 2), Fraction(1)), (Fraction(0), Fraction(1, 2)))
    mass = {k: example1_box_mass(k, box) for k in EXAMPLE1_AUCTIONS}
    mixture = (mass["a"] + mass["b"]) / 2
    return {
        "box": box,
        "mass_a": mass["a"],
        "mass_b": mass["b"],
        "mass_c": mass["c"],
        "mixture_mass": mixture,
        "c_is_mixture": mass["c"] == mixture,
    }


def threshold_witness(nu: FiniteMeasure, thresholds) -> Witness:
    """Evaluate the threshold inequality at ``a`` (``None`` = empty set)."""
    sets = []
    below = []
    for i, a in enumerate(thresholds):
        w = nu.axis_weights(i)
        if a is None:
            sets.append(())
            below.append(Fraction(1))
            continue
        a = rational(a)
        sets.append(tuple(x for x in nu.grid[i] if x >= a))
        below.append(sum((q for x, q in w.items() if x < a), Fraction(0)))
    lhs = Fraction(0)
    for i, s in enumerate(sets):
        w = nu.axis_weights(i)
        lhs += sum((x * w[x] for x in s), Fraction(0))
    rhs = Fraction(1)
    for b in below:
        rhs *= b
    return Witness(border.CEILING, tuple(sets), lhs, 1 - rhs,
                   tuple(None if a is None else rational(a) for a in thresholds))
