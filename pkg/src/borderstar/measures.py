"""Exact finite measures on product grids.

Every probability is a :class:`fractions.Fraction`.  A :class:`Grid` fixes the
sorted axis points of each agent; a :class:`FiniteMeasure` assigns weights to
joint grid points.  Zero-weight points may be present in the grid but are never
part of the support.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _cartesian
from math import prod
from typing import Callable, Iterable, Mapping, Sequence

from .errors import MeasureError

Point = tuple  # tuple[Fraction, ...]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def rational(value) -> Fraction:
    """Coerce ``value`` to an exact Fraction.

    Accepts ints, Fractions and strings of the form ``"p/q"`` or ``"p"``.
    Floats are rejected: they are almost never the number the caller meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if not m:
            raise MeasureError(f"malformed rational {value!r}; expected 'p/q' or integer")
        if m.group(2) is not None and int(m.group(2)) == 0:
            raise MeasureError(f"zero denominator in {value!r}")
        return Fraction(int(m.group(1)), int(m.group(2) or 1))
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def fmt(q: Fraction) -> str:
    """Canonical text form of a rational: ``"p/q"`` or ``"p"``."""
    return str(Fraction(q))


def unit_interval(q: Fraction) -> bool:
    return 0 <= q <= 1


@dataclass(frozen=True)
class Grid:
    """Per-agent sorted lists of distinct axis points in [0, 1]."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(tuple(rational(x) for x in axis) for axis in self.axes)
        if not axes:
            raise MeasureError("a grid needs at least one agent")
        for i, axis in enumerate(axes):
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise MeasureError(f"axis {i} is not strictly increasing")
            if any(not unit_interval(x) for x in axis):
                raise MeasureError(f"axis {i} has points outside [0, 1]")
        object.__setattr__(self, "axes", axes)

    @property
    def n(self) -> int:
        return len(self.axes)

    def __len__(self):
        return len(self.axes)

    def __getitem__(self, i):
        return self.axes[i]

    def points(self):
        """All joint grid points in canonical (lexicographic) order."""
        return _cartesian(*self.axes)

    @classmethod
    def spanning(cls, points: Iterable[Sequence], n: int | None = None) -> "Grid":
        """Smallest grid containing every point."""
        pts = [tuple(p) for p in points]
        if n is None:
            if not pts:
                raise MeasureError("cannot infer agent count from no points")
            n = len(pts[0])
        axes = [set() for _ in range(n)]
        for p in pts:
            if len(p) != n:
                raise MeasureError(f"point {p} does not have {n} coordinates")
            for i, x in enumerate(p):
                axes[i].add(rational(x))
        return cls(tuple(tuple(sorted(a)) for a in axes))


class FiniteMeasure:
    """An exact probability mass function on a finite product grid.

    Instances are immutable.  Equality compares supports and weights only, so
    two measures that differ just in zero-weight grid points are equal.
    """

    __slots__ = ("_grid", "_weights", "_support")

    def __init__(self, weights: Mapping[Sequence, object], grid: Grid | None = None):
        w = {}
        for p, v in weights.items():
            pt = tuple(rational(x) for x in p)
            q = rational(v)
            if q < 0:
                raise MeasureError(f"negative weight {q} at {pt}")
            w[pt] = w.get(pt, Fraction(0)) + q
        if not w:
            raise MeasureError("a measure needs at least one point")
        if grid is None:
            grid = Grid.spanning(w)
        elif not isinstance(grid, Grid):
            grid = Grid(grid)
        axis_sets = [set(a) for a in grid.axes]
        for pt in w:
            if len(pt) != grid.n:
                raise MeasureError(f"point {pt} does not have {grid.n} coordinates")
            for i, x in enumerate(pt):
                if x not in axis_sets[i]:
                    raise MeasureError(f"coordinate {x} of {pt} is not on axis {i}")
        total = sum(w.values())
        if total != 1:
            raise MeasureError(f"weights sum to {total}, not 1")
        self._grid = grid
        self._weights = dict(sorted(w.items()))
        self._support = tuple(p for p, q in self._weights.items() if q > 0)

    @classmethod
    def point_mass(cls, point: Sequence) -> "FiniteMeasure":
        return cls({tuple(point): 1})

    @classmethod
    def uniform(cls, points: Iterable[Sequence], grid: Grid | None = None) -> "FiniteMeasure":
        pts = [tuple(p) for p in points]
        q = Fraction(1, len(pts))
        w = {}
        for p in pts:
            key = tuple(rational(x) for x in p)
            w[key] = w.get(key, 0) + q
        return cls(w, grid)

    @classmethod
    def on_axis(cls, weights: Mapping[object, object]) -> "FiniteMeasure":
        """A one-agent measure from ``{value: weight}``."""
        return cls({(k,): v for k, v in weights.items()})

    @property
    def grid(self) -> Grid:
        return self._grid

    @property
    def n(self) -> int:
        return self._grid.n

    @property
    def support(self) -> tuple:
        return self._support

    def __getitem__(self, point) -> Fraction:
        return self._weights.get(tuple(rational(x) for x in point), Fraction(0))

    def items(self):
        """(point, weight) pairs over the support, in canonical order."""
        return ((p, self._weights[p]) for p in self._support)

    def weights(self) -> dict:
        return dict(self.items())

    def axis_weights(self, i: int) -> dict:
        """Marginal of agent ``i`` as ``{axis point: mass}`` over the whole axis."""
        _check_agent(self, i)
        out = {x: Fraction(0) for x in self._grid[i]}
        for p, q in self.items():
            out[p[i]] += q
        return out

    def axis_support(self, i: int) -> tuple:
        return tuple(x for x, q in self.axis_weights(i).items() if q > 0)

    def __eq__(self, other):
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return self.weights() == other.weights()

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self):
        body = ", ".join(
            "(" + ",".join(fmt(x) for x in p) + "):" + fmt(q) for p, q in self.items()
        )
        return f"FiniteMeasure({{{body}}})"


def _check_agent(m: FiniteMeasure, i: int):
    if not isinstance(i, int) or not 0 <= i < m.n:
        raise IndexError(f"agent index {i} out of range for {m.n} agents")


def marginal(m: FiniteMeasure, i: int) -> FiniteMeasure:
    """One-axis measure of agent ``i``; points are 1-tuples."""
    _check_agent(m, i)
    return FiniteMeasure({(x,): q for x, q in m.axis_weights(i).items()}, Grid((m.grid[i],)))


def product(factors: Sequence[FiniteMeasure]) -> FiniteMeasure:
    """Independent product of single-axis measures."""
    if not factors:
        raise MeasureError("product of no factors")
    for f in factors:
        if f.n != 1:
            raise MeasureError("product factors must be single-axis measures")
    grid = Grid(tuple(f.grid[0] for f in factors))
    w = {}
    for combo in _cartesian(*(list(f.items()) for f in factors)):
        w[tuple(p[0] for p, _ in combo)] = prod((q for _, q in combo), start=Fraction(1))
    return FiniteMeasure(w, grid)


def pushforward(m: FiniteMeasure, f: Callable[[tuple], Sequence]) -> FiniteMeasure:
    """Image measure of ``m`` under ``f``.

    ``f`` maps a support point to a point of [0,1]^k; a ``KeyError`` or
    ``None`` result means undefined and raises :class:`MeasureError`.
    """
    w = {}
    for p, q in m.items():
        try:
            y = f(p)
        except KeyError as exc:
            raise MeasureError(f"map undefined on support point {p}") from exc
        if y is None:
            raise MeasureError(f"map undefined on support point {p}")
        y = tuple(rational(c) for c in y)
        if any(not unit_interval(c) for c in y):
            raise MeasureError(f"image {y} of {p} leaves the unit cube")
        w[y] = w.get(y, Fraction(0)) + q
    return FiniteMeasure(w)


def _check_subsets(m: FiniteMeasure, subsets: Sequence[Iterable]) -> list:
    if len(subsets) != m.n:
        raise MeasureError(f"need {m.n} subsets, got {len(subsets)}")
    out = []
    for i, c in enumerate(subsets):
        s = {rational(x) for x in c}
        axis = set(m.grid[i])
        stray = s - axis
        if stray:
            raise MeasureError(f"subset for agent {i} contains non-grid points {sorted(stray)}")
        out.append(s)
    return out


def set_mass(m: FiniteMeasure, subsets: Sequence[Iterable], mode: str = "union") -> Fraction:
    """Mass of ``{t: some t_i in C_i}`` (union) or of ``C_1 x ... x C_n`` (box)."""
    sets = _check_subsets(m, subsets)
    if mode == "union":
        hit = lambda p: any(x in s for x, s in zip(p, sets))
    elif mode == "box":
        hit = lambda p: all(x in s for x, s in zip(p, sets))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return sum((q for p, q in m.items() if hit(p)), Fraction(0))


def expectation_over(m: FiniteMeasure, i: int, subset: Iterable | None = None) -> Fraction:
    """``sum over x in C_i of x * m_i(x)``; the whole axis when ``subset`` is None."""
    _check_agent(m, i)
    if subset is None:
        s = set(m.grid[i])
    else:
        s = {rational(x) for x in subset}
        stray = s - set(m.grid[i])
        if stray:
            raise MeasureError(f"subset for agent {i} contains non-grid points {sorted(stray)}")
    return sum((x * q for x, q in m.axis_weights(i).items() if x in s), Fraction(0))


def mean_vector(m: FiniteMeasure) -> tuple:
    return tuple(expectation_over(m, i) for i in range(m.n))


def is_independent(m: FiniteMeasure) -> bool:
    """True iff ``m`` equals the product of its own marginals exactly."""
    margs = [m.axis_weights(i) for i in range(m.n)]
    supports = [[x for x, q in mg.items() if q > 0] for mg in margs]
    count = prod(len(s) for s in supports)
    if count != len(m.support):
        return False
    for p in _cartesian(*supports):
        if m[p] != prod((margs[i][x] for i, x in enumerate(p)), start=Fraction(1)):
            return False
    return True
