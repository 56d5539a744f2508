"""Dependence bounds for bivariate belief distributions.

Closed-form CDFs for a handful of copula families plus the uniform law on
the upper triangle ``{x_1 + x_2 >= 1}``; scans of positive quadrant
dependence and of the feasibility bound ``C(a_1, a_2) <= (a_1^2 + a_2^2) / 2``;
one-parameter conditions for symmetric independent beliefs; and
discretization of any family into a finite belief distribution.

Everything is exact except the Clayton family away from its boundary, which
is evaluated with mpmath and compared against a guard band.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import mpmath

from .errors import MeasureError
from .measures import FiniteMeasure, mean_vector, rational

GUARD = mpmath.mpf("1e-12")
NUMERIC_DPS = 50
_ROUND = 10**18  # numeric cell masses are rounded to this denominator

FAMILIES = ("fgm", "clayton", "amh", "frechet_upper", "independent", "upper_triangle")
_ALIASES = {
    "fgm": "fgm",
    "farlie-gumbel-morgenstern": "fgm",
    "clayton": "clayton",
    "amh": "amh",
    "ali-mikhail-haq": "amh",
    "frechet_upper": "frechet_upper",
    "frechetupper": "frechet_upper",
    "frechet-upper": "frechet_upper",
    "comonotone": "frechet_upper",
    "independent": "independent",
    "upper_triangle": "upper_triangle",
    "uppertriangleuniform": "upper_triangle",
    "upper-triangle": "upper_triangle",
}
_HAS_THETA = {"fgm", "clayton", "amh"}


@dataclass(frozen=True)
class CopulaSpec:
    family: str
    theta: Fraction | None = None

    def __post_init__(self):
        fam = _ALIASES.get(str(self.family).lower())
        if fam is None:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if fam in _HAS_THETA:
            if self.theta is None:
                raise ValueError(f"family {fam} needs a parameter theta")
            th = rational(self.theta)
            if fam == "fgm" and not -1 <= th <= 1:
                raise ValueError(f"FGM theta must lie in [-1, 1], got {th}")
            if fam == "clayton" and th < -1:
                raise ValueError(f"Clayton theta must be >= -1, got {th}")
            if fam == "amh" and not -1 <= th < 1:
                raise ValueError(f"AMH theta must lie in [-1, 1), got {th}")
            object.__setattr__(self, "theta", th)
        elif self.theta is not None:
            raise ValueError(f"family {fam} takes no parameter")

    @property
    def exact(self) -> bool:
        return self.family != "clayton" or self.theta in (0, -1)

    @property
    def uniform_marginals(self) -> bool:
        return self.family != "upper_triangle"

    @property
    def metadata(self) -> dict:
        meta = {"family": self.family, "exact": self.exact}
        if self.family == "clayton":
            meta["note"] = (
                "Clayton CDF uses outer exponent -1/theta, the form for which "
                "C >= a1*a2 holds iff theta >= 0; an outer exponent of -theta "
                "would not define this family"
            )
        return meta

    def marginal_cdf(self, a):
        a = rational(a)
        return a * a if self.family == "upper_triangle" else a


def _clip01(a: Fraction) -> Fraction:
    return min(max(a, Fraction(0)), Fraction(1))


def _clayton(theta: Fraction, u: Fraction, v: Fraction):
    if u == 0 or v == 0:
        return Fraction(0)
    if u == 1:
        return v
    if v == 1:
        return u
    if theta == 0:
        return u * v
    if theta == -1:
        return max(u + v - 1, Fraction(0))
    with mpmath.workdps(NUMERIC_DPS):
        t = mpmath.mpf(theta.numerator) / theta.denominator
        mu = mpmath.mpf(u.numerator) / u.denominator
        mv = mpmath.mpf(v.numerator) / v.denominator
        base = mu ** (-t) + mv ** (-t) - 1
        if base <= 0:
            return Fraction(0)
        return base ** (-1 / t)


def copula_cdf(c: CopulaSpec, a1, a2):
    """``nu(X_1 <= a1, X_2 <= a2)``; a Fraction, or an mpf for numeric Clayton."""
    a1, a2 = rational(a1), rational(a2)
    if not (0 <= a1 <= 1 and 0 <= a2 <= 1):
        raise ValueError(f"CDF arguments must lie in [0, 1], got ({a1}, {a2})")
    fam, th = c.family, c.theta
    if fam == "independent":
        return a1 * a2
    if fam == "frechet_upper":
        return min(a1, a2)
    if fam == "fgm":
        return a1 * a2 + th * a1 * a2 * (1 - a1) * (1 - a2)
    if fam == "amh":
        return a1 * a2 / (1 - th * (1 - a1) * (1 - a2))
    if fam == "clayton":
        return _clayton(th, a1, a2)
    if fam == "upper_triangle":
        s = a1 + a2 - 1
        return s * s if s > 0 else Fraction(0)
    raise AssertionError(fam)


def _is_exact(x) -> bool:
    return isinstance(x, Fraction)


@dataclass(frozen=True)
class ScanResult:
    """Outcome of checking an inequality ``gap >= 0`` on a grid.

    ``holds`` is ``None`` when no point fails but some numeric point lies
    inside the guard band.
    """

    holds: bool | None
    worst_point: tuple
    worst_gap: object
    boundary: tuple = ()
    points_checked: int = 0
    metadata: dict = field(default_factory=dict)


def _grid(resolution: int):
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    return [Fraction(k, resolution) for k in range(resolution + 1)]


def _as_mpf(x):
    return mpmath.mpf(x.numerator) / x.denominator if _is_exact(x) else x


def _less(x, y) -> bool:
    if _is_exact(x) and _is_exact(y):
        return x < y
    with mpmath.workdps(NUMERIC_DPS):
        return _as_mpf(x) < _as_mpf(y)


def _sub(x, y):
    if _is_exact(x) and _is_exact(y):
        return x - y
    with mpmath.workdps(NUMERIC_DPS):
        return _as_mpf(x) - _as_mpf(y)


def _scan(c: CopulaSpec, resolution: int, gap_fn) -> ScanResult:
    worst_pt, worst = None, None
    boundary = []
    failed = False
    pts = _grid(resolution)
    for a1 in pts:
        for a2 in pts:
            gap = gap_fn(a1, a2)
            if _is_exact(gap):
                if gap < 0:
                    failed = True
            elif abs(gap) < GUARD:
                boundary.append((a1, a2))
            elif gap < 0:
                failed = True
            if worst is None or _less(gap, worst):
                worst_pt, worst = (a1, a2), gap
    holds = False if failed else (None if boundary else True)
    return ScanResult(holds, worst_pt, worst, tuple(boundary), len(pts) ** 2, c.metadata)


def pqd_check(c: CopulaSpec, resolution: int = 20) -> ScanResult:
    """Positive quadrant dependence: ``C(a1, a2) >= F_1(a1) F_2(a2)`` on the grid.

    ``worst_gap`` is the most negative deficit found.
    """
    return _scan(c, resolution,
                 lambda a1, a2: _sub(copula_cdf(c, a1, a2), c.marginal_cdf(a1) * c.marginal_cdf(a2)))


def quadratic_bound_scan(c: CopulaSpec, resolution: int = 20) -> ScanResult:
    """Check ``C(a1, a2) <= (a1^2 + a2^2) / 2`` on the grid (uniform marginals only).

    ``worst_gap`` is ``bound - C`` at the worst point, negative on failure.
    """
    if not c.uniform_marginals:
        raise MeasureError(f"family {c.family} does not have uniform marginals; "
                           "use triangle_condition instead")
    return _scan(c, resolution, lambda a1, a2: _sub((a1 * a1 + a2 * a2) / 2, copula_cdf(c, a1, a2)))


@dataclass(frozen=True)
class Discretization:
    measure: FiniteMeasure
    residual: Fraction
    representative: str


def _to_fraction(x) -> Fraction:
    if _is_exact(x):
        return x
    with mpmath.workdps(NUMERIC_DPS):
        return Fraction(int(mpmath.nint(x * _ROUND)), _ROUND)


def _fgm_barycenter(theta, u0, u1, v0, v1):
    du, dv = u1 - u0, v1 - v0
    i1 = lambda a, b: (b - b * b) - (a - a * a)                       # int (1 - 2u)
    ix = lambda a, b: (b * b / 2 - a * a / 2)                         # int u
    ixw = lambda a, b: (b**2 / 2 - 2 * b**3 / 3) - (a**2 / 2 - 2 * a**3 / 3)  # int u(1 - 2u)
    mass = du * dv + theta * i1(u0, u1) * i1(v0, v1)
    mx = ix(u0, u1) * dv + theta * ixw(u0, u1) * i1(v0, v1)
    my = ix(v0, v1) * du + theta * ixw(v0, v1) * i1(u0, u1)
    return mass, (mx / mass, my / mass)


def _simpson(f, a, b):
    # Exact for cubic integrands.
    return (b - a) / 6 * (f(a) + 4 * f((a + b) / 2) + f(b))


def _triangle_barycenter(x0, x1, y0, y1):
    """Centroid and density-2 mass of the cell clipped to ``x + y >= 1``."""
    cuts = sorted({x0, x1} | {c for c in (1 - y1, 1 - y0) if x0 < c < x1})
    area = mx = my = Fraction(0)
    for a, b in zip(cuts, cuts[1:]):
        lo = lambda x: max(y0, 1 - x)
        ln = lambda x: max(y1 - lo(x), Fraction(0))
        area += _simpson(ln, a, b)
        mx += _simpson(lambda x: x * ln(x), a, b)
        my += _simpson(lambda x: (y1 * y1 - lo(x) ** 2) / 2 if ln(x) > 0 else Fraction(0), a, b)
    if area == 0:
        return Fraction(0), None
    return 2 * area, (mx / area, my / area)


def discretize(c: CopulaSpec, m: int, *, representative: str = "center",
               uninformed: bool = False) -> Discretization:
    """Finite belief distribution from an ``m x m`` cell partition of the square.

    Cell masses come from CDF inclusion-exclusion.  Each cell is represented
    by its center, or by its barycenter (not offered for Clayton or AMH),
    which keeps every marginal mean unchanged.  Numeric CDF values are
    rounded on the grid; any negative cell mass this creates is dropped and
    the rest renormalized, with the shortfall reported as ``residual``.  With
    ``uninformed`` a third agent with constant belief ``1 - E[x_1] - E[x_2]``
    is appended.
    """
    if m < 1:
        raise ValueError("need at least one cell per axis")
    if representative not in ("center", "barycenter"):
        raise ValueError(f"unknown representative {representative!r}")
    if representative == "barycenter" and c.family in ("clayton", "amh"):
        raise ValueError(f"barycenter representative is not available for {c.family}")
    edges = [Fraction(k, m) for k in range(m + 1)]
    # Rounding the CDF on the grid, not the cell masses, keeps marginals exact.
    cdf = [[_to_fraction(copula_cdf(c, u, v)) for v in edges] for u in edges]
    raw = {}
    clipped = Fraction(0)
    for j in range(m):
        for k in range(m):
            u0, u1, v0, v1 = edges[j], edges[j + 1], edges[k], edges[k + 1]
            mass = cdf[j + 1][k + 1] - cdf[j][k + 1] - cdf[j + 1][k] + cdf[j][k]
            if mass <= 0:
                clipped -= mass
                continue
            if representative == "center":
                pt = ((u0 + u1) / 2, (v0 + v1) / 2)
            elif c.family == "fgm":
                mass_b, pt = _fgm_barycenter(c.theta, u0, u1, v0, v1)
                assert mass_b == mass
            elif c.family == "upper_triangle":
                mass_b, pt = _triangle_barycenter(u0, u1, v0, v1)
                assert mass_b == mass
            else:
                # independent: uniform density; comonotone: mass on the cell diagonal
                pt = ((u0 + u1) / 2, (v0 + v1) / 2)
            raw[pt] = raw.get(pt, Fraction(0)) + mass
    total = sum(raw.values())
    residual = 1 - total if clipped else Fraction(0)
    weights = {p: q / total for p, q in raw.items()} if residual else raw
    nu = FiniteMeasure(weights)
    if uninformed:
        x3 = 1 - sum(mean_vector(nu), Fraction(0))
        if not 0 <= x3 <= 1:
            raise MeasureError(f"uninformed agent would need belief {x3} outside [0, 1]")
        nu = FiniteMeasure({p + (x3,): q for p, q in nu.items()})
    return Discretization(nu, residual, representative)


@dataclass(frozen=True)
class SymmetricMarginal:
    """One-axis belief law: ``uniform``, ``triangular`` (density 2x) or atoms."""

    kind: str
    atoms: Mapping | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "triangular", "atoms"):
            raise ValueError(f"unsupported marginal {self.kind!r}")
        if self.kind == "atoms":
            if not self.atoms:
                raise ValueError("atoms marginal needs atoms")
            w = {rational(k): rational(v) for k, v in self.atoms.items()}
            if sum(w.values()) != 1 or any(v < 0 for v in w.values()):
                raise MeasureError("atom weights must be nonnegative and sum to 1")
            if any(not 0 <= k <= 1 for k in w):
                raise MeasureError("atoms must lie in [0, 1]")
            object.__setattr__(self, "atoms", dict(sorted(w.items())))

    @classmethod
    def from_atoms(cls, atoms: Mapping) -> "SymmetricMarginal":
        return cls("atoms", atoms)

    def mean(self) -> Fraction:
        return self.upper_moment(Fraction(0))

    def upper_moment(self, a: Fraction) -> Fraction:
        """``int_{[a, 1]} x dF(x)``."""
        a = _clip01(rational(a))
        if self.kind == "uniform":
            return (1 - a * a) / 2
        if self.kind == "triangular":
            return Fraction(2, 3) * (1 - a**3)
        return sum((x * q for x, q in self.atoms.items() if x >= a), Fraction(0))

    def cdf_below(self, a: Fraction) -> Fraction:
        """``F(a-)``, the mass strictly below ``a``."""
        a = _clip01(rational(a))
        if self.kind == "uniform":
            return a
        if self.kind == "triangular":
            return a * a
        return sum((q for x, q in self.atoms.items() if x < a), Fraction(0))


@dataclass(frozen=True)
class SymmetricCondition:
    a: Fraction
    n: int
    lhs: Fraction
    rhs: Fraction
    mean_condition: Fraction  # n * E[x]; must equal 1

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def martingale(self) -> bool:
        return self.mean_condition == 1


def symmetric_condition(F: SymmetricMarginal, n: int, a) -> SymmetricCondition:
    """Threshold test for ``n`` i.i.d. beliefs with marginal ``F``.

    ``lhs = int_a^1 x dF`` and ``rhs = int_a^1 F^{n-1} dF = (1 - F(a-)^n) / n``.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    a = rational(a)
    rhs = (1 - F.cdf_below(a) ** n) / n
    return SymmetricCondition(a, n, F.upper_moment(a), rhs, n * F.mean())


def large_n_value(F: SymmetricMarginal, n: int) -> Fraction:
    """``(n - 1) E_F[x]`` for an uninformed agent plus ``n - 1`` informed ones."""
    return (n - 1) * F.mean()


def large_n_bound(F: SymmetricMarginal, n: int) -> bool:
    return large_n_value(F, n) <= 1


@dataclass(frozen=True)
class TriangleCondition:
    a: Fraction
    lhs: Fraction
    rhs: Fraction
    rhs_halved: Fraction

    @property
    def violated(self) -> bool:
        return self.lhs > self.rhs

    @property
    def violated_halved(self) -> bool:
        return self.lhs > self.rhs_halved


def triangle_condition(a) -> TriangleCondition:
    """Diagonal threshold test for the uniform law on the upper triangle.

    ``lhs = 2 int_a^1 2x^2 dx``.  ``rhs = 1 - nu([0,a]^2)`` with
    ``nu([0,a]^2) = (2a - 1)^2`` for ``a >= 1/2``; ``rhs_halved`` uses
    ``(2a - 1)^2 / 2`` in its place, a variant that circulates for this bound.
    """
    a = rational(a)
    if not 0 <= a <= 1:
        raise ValueError("threshold must lie in [0, 1]")
    lhs = Fraction(4, 3) * (1 - a**3)
    box = (2 * a - 1) ** 2 if a >= Fraction(1, 2) else Fraction(0)
    return TriangleCondition(a, lhs, 1 - box, 1 - box / 2)


def _intervals(flags):
    """Maximal runs of consecutive True grid points as (first, last)."""
    runs, start, prev = [], None, None
    for a, on in flags:
        if on and start is None:
            start = a
        if not on and start is not None:
            runs.append((start, prev))
            start = None
        prev = a
    if start is not None:
        runs.append((start, prev))
    return runs


REFERENCE_INTERVAL = (Fraction(1, 2), Fraction(33, 50))


def triangle_violation_report(resolution: int = 100,
                              reference=REFERENCE_INTERVAL) -> dict:
    """Where the triangle condition fails on ``a = k / resolution``.

    Compares the computed violation set against a reference interval
    ``(lo, hi]`` and lists every disagreement as a note.
    """
    pts = [Fraction(k, resolution) for k in range(resolution + 1)]
    conds = [triangle_condition(a) for a in pts]
    direct = _intervals([(c.a, c.violated) for c in conds])
    halved = _intervals([(c.a, c.violated_halved) for c in conds])
    lo, hi = reference
    notes = []
    outside = [c.a for c in conds if c.violated_halved and not lo < c.a <= hi]
    if outside:
        notes.append(
            f"violation also occurs outside the reference interval ({lo}, {hi}]: "
            f"{len(outside)} grid points from a={outside[0]} to a={outside[-1]}; "
            "for every a < 1/2 the right side is 1 while the left side exceeds 1"
        )
    missing = [c.a for c in conds if lo < c.a <= hi and not c.violated_halved]
    if missing:
        notes.append(f"no violation at {len(missing)} reference points, first a={missing[0]}")
    if direct != halved:
        notes.append("the unhalved right side changes the violation set: "
                     f"{direct} vs halved {halved}")
    return {"direct": direct, "halved": halved, "reference": reference, "notes": notes}
