"""JSON documents for measures, games, interim problems and info structures.

Every rational is a string ``"p/q"`` or an integer string.  Parsing errors
carry the offending field path (``support[2].weight``) and, for malformed
JSON, the line and column.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .border import FeasibilityVerdict, GameInstance, InterimRule, Witness
from .errors import BorderStarError, MeasureError
from .infostruct import InfoStructure, StateSpace
from .measures import FiniteMeasure, Grid, fmt, rational

KINDS = ("belief_distribution", "game", "interim_problem", "info_structure", "copula_request")


class InputError(BorderStarError, ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}" if field else message)


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise InputError("", "top-level value must be an object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise InputError("kind", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    return doc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=True) + "\n"


def _rat(value, field: str) -> Fraction:
    if not isinstance(value, str):
        raise InputError(field, f"rational must be a string like \"p/q\", got {value!r}")
    try:
        return rational(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(field, str(exc)) from None


def _list(doc, key: str, field: str | None = None) -> list:
    field = field or key
    val = doc.get(key)
    if not isinstance(val, list):
        raise InputError(field, "missing or not a list")
    return val


def _point(value, field: str, n: int | None) -> tuple:
    if not isinstance(value, list):
        raise InputError(field, "point must be a list of rationals")
    pt = tuple(_rat(x, f"{field}[{k}]") for k, x in enumerate(value))
    if n is not None and len(pt) != n:
        raise InputError(field, f"expected {n} coordinates, got {len(pt)}")
    return pt


def _agents(doc) -> int | None:
    n = doc.get("agents")
    if n is None:
        return None
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InputError("agents", f"must be a positive integer, got {n!r}")
    return n


def parse_measure(doc: dict) -> FiniteMeasure:
    """The ``support`` list of any document as a finite measure."""
    n = _agents(doc)
    weights = {}
    for k, entry in enumerate(_list(doc, "support")):
        f = f"support[{k}]"
        if not isinstance(entry, dict):
            raise InputError(f, "entry must be an object with point and weight")
        pt = _point(entry.get("point"), f + ".point", n)
        if n is None:
            n = len(pt)
        if pt in weights:
            raise InputError(f + ".point", f"duplicate point {[fmt(x) for x in pt]}")
        weights[pt] = _rat(entry.get("weight"), f + ".weight")
    if not weights:
        raise InputError("support", "empty support")
    total = sum(weights.values())
    if total != 1:
        raise InputError("support", f"weights sum to {fmt(total)}, not 1")
    for k, (pt, q) in enumerate(weights.items()):
        if q < 0:
            raise InputError(f"support[{k}].weight", f"negative weight {fmt(q)}")
        if any(not 0 <= x <= 1 for x in pt):
            raise InputError(f"support[{k}].point", "coordinates must lie in [0, 1]")
    try:
        return FiniteMeasure(weights)
    except MeasureError as exc:
        raise InputError("support", str(exc)) from None


def parse_game(doc: dict) -> GameInstance:
    prior = parse_measure(doc)
    alloc = {}
    for k, entry in enumerate(_list(doc, "allocation")):
        f = f"allocation[{k}]"
        if not isinstance(entry, dict):
            raise InputError(f, "entry must be an object with point and lottery")
        pt = _point(entry.get("point"), f + ".point", prior.n)
        lot = _point(entry.get("lottery"), f + ".lottery", prior.n)
        alloc[pt] = lot
    try:
        return GameInstance(prior, alloc)
    except (MeasureError, ValueError) as exc:
        raise InputError("allocation", str(exc)) from None


def parse_interim(doc: dict) -> tuple:
    """``(prior, rule)``; ``interim[i]`` lists ``{"type", "value"}`` for agent ``i``."""
    prior = parse_measure(doc)
    rows = _list(doc, "interim")
    if len(rows) != prior.n:
        raise InputError("interim", f"expected {prior.n} agents, got {len(rows)}")
    values = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise InputError(f"interim[{i}]", "must be a list")
        vals = {}
        for k, entry in enumerate(row):
            f = f"interim[{i}][{k}]"
            if not isinstance(entry, dict):
                raise InputError(f, "entry must be an object with type and value")
            vals[_rat(entry.get("type"), f + ".type")] = _rat(entry.get("value"), f + ".value")
        values.append(vals)
    grid = Grid(tuple(tuple(sorted(set(prior.grid[i]) | set(values[i]))) for i in range(prior.n)))
    try:
        prior = FiniteMeasure(prior.weights(), grid)
        return prior, InterimRule(grid, values)
    except (MeasureError, ValueError) as exc:
        raise InputError("interim", str(exc)) from None


def parse_state_space(states, events, field: str = "") -> StateSpace:
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise InputError(field + "states", "must be a list of state labels")
    if not isinstance(events, list) or not all(
        isinstance(e, list) and all(isinstance(s, str) for s in e) for e in events
    ):
        raise InputError(field + "events", "must be a list of lists of state labels")
    try:
        return StateSpace(tuple(states), tuple(tuple(e) for e in events))
    except BorderStarError as exc:
        raise InputError(field + "events", str(exc)) from None


def parse_info(doc: dict) -> InfoStructure:
    space = parse_state_space(doc.get("states"), doc.get("events"))
    joint = {}
    for k, entry in enumerate(_list(doc, "joint")):
        f = f"joint[{k}]"
        if not isinstance(entry, dict):
            raise InputError(f, "entry must be an object with state, signal and weight")
        state = entry.get("state")
        if state not in space.states:
            raise InputError(f + ".state", f"unknown state {state!r}")
        sig = _point(entry.get("signal"), f + ".signal", space.n)
        joint[(state, sig)] = _rat(entry.get("weight"), f + ".weight")
    try:
        return InfoStructure(space, joint)
    except MeasureError as exc:
        raise InputError("joint", str(exc)) from None


def require_kind(doc: dict, *kinds: str):
    if doc["kind"] not in kinds:
        raise InputError("kind", f"expected {' or '.join(kinds)}, got {doc['kind']!r}")


# -- serialization -----------------------------------------------------------

def _pt(p) -> list:
    return [fmt(x) for x in p]


def _opt(q):
    return None if q is None else fmt(q)


def measure_doc(m: FiniteMeasure) -> dict:
    return {
        "kind": "belief_distribution",
        "agents": m.n,
        "support": [{"point": _pt(p), "weight": fmt(q)} for p, q in m.items()],
    }


def game_doc(g: GameInstance) -> dict:
    doc = measure_doc(g.prior)
    doc["kind"] = "game"
    doc["allocation"] = [{"point": _pt(p), "lottery": _pt(g.lottery(p))} for p in g.prior.support]
    return doc


def interim_rows(Q: InterimRule) -> list:
    return [[{"type": fmt(t), "value": fmt(v)} for t, v in Q[i].items()] for i in range(Q.n)]


def info_doc(I: InfoStructure) -> dict:
    return {
        "kind": "info_structure",
        "agents": I.n,
        "states": list(I.space.states),
        "events": [sorted(e, key=I.space.states.index) for e in I.space.events],
        "joint": [{"state": s, "signal": _pt(sig), "weight": fmt(q)} for (s, sig), q in I.items()],
    }


def witness_doc(w: Witness | None):
    if w is None:
        return None
    return {
        "form": w.form,
        "profile": [_pt(s) for s in w.sets],
        "thresholds": None if w.thresholds is None else [_opt(a) for a in w.thresholds],
        "lhs": fmt(w.lhs),
        "rhs": fmt(w.rhs),
        "slack": fmt(w.slack),
    }


def _detail(v):
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    return str(v)


def verdict_doc(v: FeasibilityVerdict) -> dict:
    """Status plus the witness fields at top level; ``complement`` in the other form."""
    w = witness_doc(v.witness)
    doc = {"status": v.status}
    if w is not None:
        doc.update(w)
    else:
        doc.update({"form": None, "profile": None, "thresholds": None,
                    "lhs": None, "rhs": None, "slack": None})
    doc["reason"] = v.reason
    doc["complement"] = witness_doc(v.complement)
    doc["flow_value"] = _opt(v.flow_value)
    if v.tight:
        doc["tight"] = [witness_doc(t) for t in v.tight]
    details = {k: _detail(x) for k, x in sorted(v.details.items())
               if k not in ("maps", "interim")}
    if details:
        doc["details"] = details
    return doc
