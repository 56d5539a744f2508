"""Command-line front end.

Each command reads one JSON document (``--input PATH`` or stdin), writes a
JSON verdict (or a plain table with ``--output table``) and exits with
0 for feasible/pass, 1 for infeasible/fail and 2 for input errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import agreement, auctions, beliefs, border, gallery, infostruct
from . import io as docio
from .errors import (
    BadEventStructure,
    BorderStarError,
    InstanceTooLarge,
    MeasureError,
    NotIndependentPrior,
)
from .measures import fmt

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


# -- rendering ---------------------------------------------------------------

def _table(obj, indent: int = 0) -> list:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_table(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_cell(v)}")
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, (dict, list)) and not _flat(item):
                lines.append(f"{pad}-")
                lines.extend(_table(item, indent + 1))
            else:
                lines.append(f"{pad}- {_cell(item)}")
    else:
        lines.append(pad + _cell(obj))
    return lines


def _flat(v) -> bool:
    if isinstance(v, dict):
        return False
    return all(not isinstance(x, (dict, list)) or (isinstance(x, list) and _flat(x)) for x in v)


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, list):
        return "(" + ", ".join(_cell(x) for x in v) + ")"
    if isinstance(v, dict):
        return "{}"
    return str(v)


def render(obj: dict, mode: str) -> str:
    if mode == "table":
        return "\n".join(_table(obj)) + "\n"
    return docio.dumps(obj)


# -- input -------------------------------------------------------------------

def _read_doc(path: str | None) -> dict:
    if path is None or path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise docio.InputError("--input", str(exc)) from None
    return docio.loads(text)


def _csv_states(text: str) -> list:
    return [s.strip() for s in text.split(",") if s.strip()]


def _events(text: str) -> list:
    return [_csv_states(group) for group in text.split(";")]


def _space(args, n: int):
    if args.states is None and args.events is None:
        return None
    if args.states is None or args.events is None:
        raise docio.InputError("--states/--events", "give both or neither")
    space = docio.parse_state_space(_csv_states(args.states), _events(args.events), "--")
    if space.n != n:
        raise docio.InputError("--events", f"{space.n} events for {n} agents")
    try:
        space.require_partition()
    except BadEventStructure as exc:
        raise docio.InputError("--events", str(exc)) from None
    return space


# -- commands ----------------------------------------------------------------

def _beliefs(doc):
    docio.require_kind(doc, "belief_distribution")
    return docio.parse_measure(doc)


def cmd_check_beliefs(args, doc):
    nu = _beliefs(doc)
    if args.method == "bruteforce":
        v = beliefs.borderstar_bruteforce(nu, cap=args.max_bruteforce_bits)
    else:
        v = beliefs.borderstar_feasibility(nu)
    out = {"command": "check-beliefs", "method": args.method, "agents": nu.n}
    out.update(docio.verdict_doc(v))
    out["martingale"] = fmt(beliefs.martingale_check(nu))
    if args.general_model:
        space = _space(args, nu.n) or infostruct.StateSpace.poker(nu.n)
        space.require_partition()
        out["states"] = list(space.states)
        out["events"] = [sorted(e, key=space.states.index) for e in space.events]
        out["event_priors"] = [fmt(x) for x in infostruct.implied_prior(nu)]
    return out, v.feasible


def cmd_check_reduced_form(args, doc):
    docio.require_kind(doc, "interim_problem")
    prior, Q = docio.parse_interim(doc)
    if args.method == "bruteforce":
        v = border.border_bruteforce(prior, Q, cap=args.max_bruteforce_bits)
    else:
        v = border.flow_feasibility(prior, Q)
    out = {"command": "check-reduced-form", "method": args.method, "agents": prior.n}
    out.update(docio.verdict_doc(v))
    out["allocation_total"] = fmt(border.allocation_total(prior, Q))
    if v.certificate is not None:
        out["certificate"] = docio.game_doc(v.certificate)
    return out, v.feasible


def cmd_construct_game(args, doc):
    nu = _beliefs(doc)
    v = beliefs.borderstar_feasibility(nu)
    out = {"command": "construct-game"}
    out.update(docio.verdict_doc(v))
    if v.feasible:
        out["game"] = docio.game_doc(v.certificate)
        out["beliefs_reproduced"] = beliefs.beliefs_of_game(v.certificate) == nu
    return out, v.feasible


def cmd_construct_info(args, doc):
    nu = _beliefs(doc)
    space = _space(args, nu.n)
    v = beliefs.borderstar_feasibility(nu)
    out = {"command": "construct-info"}
    out.update(docio.verdict_doc(v))
    if v.feasible:
        I = infostruct.construct_infostructure(nu, space)
        out["info_structure"] = docio.info_doc(I)
        out["p0"] = {s: fmt(q) for s, q in I.prior().items()}
        out["event_priors"] = [fmt(I.event_prior(i)) for i in range(I.n)]
        out["beliefs_reproduced"] = infostruct.belief_distribution_of(I) == nu
    return out, v.feasible


def cmd_agreement(args, doc):
    docio.require_kind(doc, "game")
    g = docio.parse_game(doc)
    rep = agreement.agreement_check(g)
    cells = []
    for c in rep.cells:
        cells.append({
            "points": [[fmt(x) for x in p] for p in c.points],
            "constant": list(c.constant),
            "values": [None if x is None else fmt(x) for x in c.values],
            "product": c.product,
            "total": None if c.total is None else fmt(c.total),
            "passed": c.passed,
            "complementary": c.complementary,
        })
    out = {"command": "agreement", "status": "Pass" if rep.passed else "Fail",
           "cells_checked": rep.checked, "cells": cells}
    return out, rep.passed


def cmd_auction_check(args, doc):
    nu = _beliefs(doc)
    if args.mode == "bic":
        v = auctions.bic_feasibility(nu)
    else:
        if args.prior is None:
            raise docio.InputError("--prior", "fixed-prior mode needs --prior PATH")
        mu = docio.parse_measure(_read_doc(args.prior))
        try:
            v = auctions.fixed_prior_bic(mu, nu)
        except NotIndependentPrior as exc:
            raise docio.InputError("--prior", str(exc)) from None
    out = {"command": "auction-check", "mode": args.mode}
    out.update(docio.verdict_doc(v))
    if "maps" in v.details:
        out["maps"] = [{fmt(t): fmt(x) for t, x in m.mapping.items()} for m in v.details["maps"]]
    if v.certificate is not None:
        out["certificate"] = docio.game_doc(v.certificate)
    return out, v.feasible


def _scan_doc(r: gallery.ScanResult) -> dict:
    gap = r.worst_gap
    gap_s = fmt(gap) if isinstance(gap, Fraction) else gallery.mpmath.nstr(gap, 20)
    return {
        "holds": r.holds,
        "worst_point": [fmt(x) for x in r.worst_point],
        "worst_gap": gap_s,
        "boundary": [[fmt(x) for x in p] for p in r.boundary],
        "points_checked": r.points_checked,
    }


def _copula_from(args, doc):
    family, theta = args.family, args.theta
    if doc is not None:
        docio.require_kind(doc, "copula_request")
        family = doc.get("family", family)
        theta = doc.get("theta", theta)
    if family is None:
        raise docio.InputError("--family", "copula-scan needs a family")
    try:
        return gallery.CopulaSpec(family, theta)
    except (ValueError, TypeError) as exc:
        raise docio.InputError("--theta" if "theta" in str(exc) else "--family", str(exc)) from None


def cmd_copula_scan(args, doc):
    c = _copula_from(args, doc)
    out = {"command": "copula-scan", "family": c.family,
           "theta": None if c.theta is None else fmt(c.theta), "grid": args.grid}
    meta = c.metadata
    if "note" in meta:
        out["note"] = meta["note"]
    out["pqd"] = _scan_doc(gallery.pqd_check(c, args.grid))
    if c.uniform_marginals:
        bound = gallery.quadratic_bound_scan(c, args.grid)
        out["bound"] = _scan_doc(bound)
        ok = bound.holds is True
        out["status"] = {True: "Pass", False: "Fail", None: "Boundary"}[bound.holds]
    else:
        rep = gallery.triangle_violation_report(args.grid)
        fmt_runs = lambda runs: [[fmt(a), fmt(b)] for a, b in runs]
        out["triangle"] = {
            "violated_direct": fmt_runs(rep["direct"]),
            "violated_halved": fmt_runs(rep["halved"]),
            "reference_interval": [fmt(x) for x in rep["reference"]],
            "notes": rep["notes"],
        }
        ok = not rep["direct"] and not rep["halved"]
        out["status"] = "Pass" if ok else "Fail"
    if args.discretize is not None:
        try:
            d = gallery.discretize(c, args.discretize, representative=args.representative,
                                   uninformed=args.uninformed)
        except (ValueError, MeasureError) as exc:
            raise docio.InputError("--discretize", str(exc)) from None
        out["discretization"] = {
            "cells": args.discretize,
            "representative": d.representative,
            "residual": fmt(d.residual),
            "martingale": fmt(beliefs.martingale_check(d.measure)),
            "beliefs": docio.measure_doc(d.measure),
        }
        if args.full_check:
            v = beliefs.borderstar_feasibility(d.measure)
            out["discretization"]["verdict"] = docio.verdict_doc(v)
            ok = v.feasible
            out["status"] = v.status
    return out, ok


def cmd_core_slack(args, doc):
    nu = _beliefs(doc)
    w = beliefs.min_core_slack(nu, cap=args.max_bruteforce_bits)
    ok = not w.violated
    out = {"command": "core-slack", "status": "Pass" if ok else "Fail",
           "martingale": fmt(beliefs.martingale_check(nu))}
    out.update(docio.witness_doc(w))
    return out, ok


def cmd_example1(args, doc):
    points = args.point or ["1/2,1/2"]
    evals = []
    for text in points:
        parts = text.split(",")
        if len(parts) != 2:
            raise docio.InputError("--point", f"expected t1,t2, got {text!r}")
        for a in auctions.EXAMPLE1_AUCTIONS:
            try:
                e = auctions.example1_eval(a, parts)
            except ValueError as exc:
                raise docio.InputError("--point", str(exc)) from None
            evals.append({
                "auction": a,
                "point": [fmt(x) for x in e["point"]],
                "interim": [fmt(x) for x in e["interim"]],
                "support_box": [[fmt(x) for x in side] for side in e["support_box"]],
            })
    nc = auctions.example1_nonconvexity()
    nonconvex = {k: ([[fmt(x) for x in side] for side in v] if k == "box" else
                     fmt(v) if isinstance(v, Fraction) else v) for k, v in nc.items()}
    out = {"command": "example1", "status": "Pass", "evaluations": evals,
           "nonconvexity": nonconvex}
    return out, True


COMMANDS = {
    "check-beliefs": (cmd_check_beliefs, "feasibility of a joint belief distribution"),
    "check-reduced-form": (cmd_check_reduced_form, "implementability of an interim rule"),
    "construct-game": (cmd_construct_game, "a game generating the given beliefs"),
    "construct-info": (cmd_construct_info, "an information structure generating the beliefs"),
    "agreement": (cmd_agreement, "agreement identity on common-knowledge cells of a game"),
    "auction-check": (cmd_auction_check, "feasibility through a monotone (BIC) auction"),
    "copula-scan": (cmd_copula_scan, "dependence scans for a bivariate copula family"),
    "core-slack": (cmd_core_slack, "smallest floor-form slack over all profiles"),
    "example1": (cmd_example1, "two-bidder example values and the non-convexity witness"),
}
_NO_INPUT = {"example1"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="input document (default: stdin)")
    common.add_argument("--output", choices=("json", "table"), default="json")
    common.add_argument("--max-bruteforce-bits", type=int, default=border.DEFAULT_BRUTEFORCE_CAP,
                        metavar="N")

    parser = argparse.ArgumentParser(prog="borderstar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    ps = {}
    for name, (_, help_text) in COMMANDS.items():
        ps[name] = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    for name in ("check-beliefs", "check-reduced-form"):
        ps[name].add_argument("--method", choices=("flow", "bruteforce"), default="flow")
    for name in ("check-beliefs", "construct-info"):
        ps[name].add_argument("--states", help="comma-separated state labels")
        ps[name].add_argument("--events", help="events per agent: 'w1;w2,w3'")
    ps["check-beliefs"].add_argument("--general-model", action="store_true",
                                     help="validate a partition of states into agent events")
    ps["auction-check"].add_argument("--mode", choices=("bic", "fixed-prior"), default="bic")
    ps["auction-check"].add_argument("--prior", metavar="PATH")
    cs = ps["copula-scan"]
    cs.add_argument("--family")
    cs.add_argument("--theta", help="parameter as p/q")
    cs.add_argument("--grid", type=int, default=20, metavar="M")
    cs.add_argument("--discretize", type=int, metavar="M")
    cs.add_argument("--representative", choices=("center", "barycenter"), default="center")
    cs.add_argument("--uninformed", action="store_true",
                    help="append a third agent with constant belief 1 - E[x1] - E[x2]")
    cs.add_argument("--full-check", action="store_true")
    ps["example1"].add_argument("--point", action="append", metavar="T1,T2")
    return parser


def _glue_negative_theta(argv: list) -> list:
    # argparse reads "-1/2" as an option; bind it to --theta explicitly
    out, k = [], 0
    while k < len(argv):
        if argv[k] == "--theta" and k + 1 < len(argv) and argv[k + 1][:1] == "-" \
                and argv[k + 1][1:2].isdigit():
            out.append(f"--theta={argv[k + 1]}")
            k += 2
        else:
            out.append(argv[k])
            k += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_theta(argv))
    func = COMMANDS[args.command][0]
    try:
        doc = None
        if args.command == "copula-scan":
            if args.input is not None:
                doc = _read_doc(args.input)
        elif args.command not in _NO_INPUT:
            doc = _read_doc(args.input)
        if args.command == "copula-scan" and args.grid < 2:
            raise docio.InputError("--grid", "resolution must be at least 2")
        out, ok = func(args, doc)
    except docio.InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        sys.stdout.write(render({"status": "InputError", "field": exc.field,
                                 "message": exc.message}, args.output))
        return EXIT_INPUT
    except InstanceTooLarge as exc:
        sys.stderr.write(f"input error: {exc}\n")
        sys.stdout.write(render({"status": "InputError", "field": "--max-bruteforce-bits",
                                 "message": str(exc)}, args.output))
        return EXIT_INPUT
    except (BorderStarError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        sys.stdout.write(render({"status": "InputError", "field": None,
                                 "message": str(exc)}, args.output))
        return EXIT_INPUT
    sys.stdout.write(render(out, args.output))
    return EXIT_PASS if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
