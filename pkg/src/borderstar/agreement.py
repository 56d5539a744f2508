"""Common-knowledge cells of finite games and the agreement identity.

Each agent knows her own coordinate, so agent i's information partition of
the prior's support has one cell per axis value.  The meet of these
partitions (their finest common coarsening) lists the self-evident events.
Whenever every agent's interim winning probability is constant on a meet
cell, those constants sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _cartesian
from typing import Sequence

from .border import GameInstance, interim_of_game
from .errors import MeasureError
from .measures import FiniteMeasure


def knowledge_partitions(m: FiniteMeasure) -> list:
    """Per agent, the cells ``{t in support : t_i = v}`` in axis order."""
    out = []
    for i in range(m.n):
        cells = {}
        for p in m.support:
            cells.setdefault(p[i], []).append(p)
        out.append([tuple(cells[v]) for v in sorted(cells)])
    return out


def partition_meet(partitions: Sequence[Sequence[Sequence]]) -> list:
    """Connected components of the cell-overlap graph, sorted by first point."""
    if not partitions:
        return []
    supports = [frozenset(p for cell in part for p in cell) for part in partitions]
    if any(s != supports[0] for s in supports):
        raise MeasureError("partitions do not cover the same support")
    parent = {p: p for p in supports[0]}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for part in partitions:
        for cell in part:
            cell = list(cell)
            root = find(cell[0])
            for p in cell[1:]:
                r = find(p)
                if r != root:
                    parent[max(r, root)] = min(r, root)
                    root = min(r, root)
    comps = {}
    for p in sorted(supports[0]):
        comps.setdefault(find(p), []).append(p)
    return sorted((tuple(c) for c in comps.values()), key=lambda c: c[0])


@dataclass(frozen=True)
class CellReport:
    points: tuple
    constant: tuple        # per agent: is Q_i constant on the cell?
    values: tuple          # per agent: the constant r_i, or None
    product: bool          # cell equals the product of its projections
    total: Fraction | None
    passed: bool | None    # None when some posterior is not constant
    complementary: bool | None = None  # two agents: r_1 == 1 - r_2


@dataclass(frozen=True)
class AgreementReport:
    cells: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.cells)

    @property
    def checked(self) -> int:
        return sum(c.passed is not None for c in self.cells)


def agreement_check(g: GameInstance) -> AgreementReport:
    """Check ``sum_i r_i = 1`` on every meet cell with constant posteriors."""
    Q = interim_of_game(g)
    parts = knowledge_partitions(g.prior)
    reports = []
    for cell in partition_meet(parts):
        consts, vals = [], []
        for i in range(g.n):
            seen = {Q.value(i, p[i]) for p in cell}
            consts.append(len(seen) == 1)
            vals.append(next(iter(seen)) if len(seen) == 1 else None)
        projections = [sorted({p[i] for p in cell}) for i in range(g.n)]
        cellset = set(cell)
        is_product = all(p in cellset for p in _cartesian(*projections))
        if all(consts):
            total = sum(vals, Fraction(0))
            comp = (vals[0] == 1 - vals[1]) if g.n == 2 else None
            reports.append(CellReport(cell, tuple(consts), tuple(vals), is_product,
                                      total, total == 1, comp))
        else:
            reports.append(CellReport(cell, tuple(consts), tuple(vals), is_product, None, None))
    return AgreementReport(tuple(reports))
