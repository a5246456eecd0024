"""Command-line front end.

Exit status: 0 on success, 1 when a scenario claim fails, 2 for usage or
validation errors (diagnostics go to stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from typing import Callable, Optional, Sequence

from . import fixtures
from .costmodel import rates_of
from .documents import (
    SCHEMA_VERSION,
    dumps,
    dynamics_body,
    group_to_doc,
    jsonable,
    load_topology,
    net_to_doc,
    params_to_doc,
    settlement_to_doc,
    topology_to_doc,
    validate_report,
)
from .dynamics import DynamicsConfig, NetworkState, Order, evaluate_pair, run
from .estimate import Degradation, estimate_params, estimation_error, observe
from .game import convergence_table
from .money import MICRO, DomainError, money_str, to_micro, to_money
from .scenarios import SCENARIOS, scenario_traffic_ratio, tier1_world
from .topology import Topology, validate

EXIT_OK, EXIT_CLAIM_FAILED, EXIT_USAGE = 0, 1, 2

BUILTIN: dict[str, Callable[[], NetworkState]] = {
    "three-as-transit": fixtures.three_as_transit,
    "common-provider": fixtures.common_provider,
    "oscillator": fixtures.oscillator,
    "tier1": tier1_world,
}


class UsageError(Exception):
    pass


# -- input helpers ----------------------------------------------------------

def _load_state(ref: str) -> tuple[NetworkState, dict]:
    """Resolve ``ref`` (a file path or ``builtin:<name>``) and validate it."""
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in BUILTIN:
            raise UsageError(f"unknown builtin topology {name!r}; choose from {', '.join(sorted(BUILTIN))}")
        state = BUILTIN[name]()
        digest = hashlib.sha256(dumps(topology_to_doc(state.topology, state.demands)).encode()).hexdigest()
    else:
        try:
            topo, demands = load_topology(ref)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        state = NetworkState(topo, demands)
        with open(ref, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
    problems = validate(state.topology)
    if problems:
        lines = [f"{d.code}: {d.message}" for d in problems]
        raise UsageError("invalid topology:\n  " + "\n  ".join(lines))
    for d in state.demands:
        if d.source not in state.topology.nodes:
            raise UsageError(f"demand source {d.source!r} is not a known AS")
        if d.destination not in state.topology.destinations:
            raise UsageError(f"demand destination {d.destination!r} is not a known destination")
    return state, {"topology": ref, "topology_sha256": digest}


def _require_as(topo: Topology, *ids: str) -> None:
    for x in ids:
        if x not in topo.nodes:
            raise UsageError(f"unknown AS id {x!r}")


def _pair(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise UsageError(f"--pair expects A,B; got {text!r}")
    if parts[0] == parts[1]:
        raise UsageError("--pair needs two distinct ASes")
    return parts[0], parts[1]


def _tolerance(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        tol = to_money(text, "rate tolerance")
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if tol < 0:
        raise UsageError("--rate-tolerance must be >= 0")
    return tol


def _tolerance_doc(tol):
    return "inf" if tol == math.inf else to_micro(tol)


def _header(command: str, config: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": config}


# -- commands ---------------------------------------------------------------

def cmd_evaluate(args) -> tuple[dict, int]:
    state, src = _load_state(args.topology)
    a, b = _pair(args.pair)
    _require_as(state.topology, a, b)
    tol = _tolerance(args.rate_tolerance)
    config = DynamicsConfig(rate_tolerance=tol)
    try:
        ev = evaluate_pair(state, a, b, config, location=args.location)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    groups = []
    for o in ev.outcomes:
        groups.append({
            **group_to_doc(o.group),
            "params": params_to_doc(o.params),
            "settlement": settlement_to_doc(o.settlement),
        })
    doc = _header("evaluate", {**src, "pair": [a, b], "location": args.location,
                               "rate_tolerance": _tolerance_doc(tol)})
    doc.update({
        "pair": [a, b],
        "location": ev.location,
        "groups": groups,
        "net_settlement": net_to_doc(ev.net, a, b),
        "proposed_exports": {a: sorted(ev.proposed_exports[0]), b: sorted(ev.proposed_exports[1])},
    })
    return doc, EXIT_OK


def cmd_dynamics(args) -> tuple[dict, int]:
    state, src = _load_state(args.topology)
    pairs = None
    if args.candidate:
        pairs = tuple(_pair(p) for p in args.candidate)
        for p in pairs:
            _require_as(state.topology, *p)
    tol = _tolerance(args.rate_tolerance)
    try:
        config = DynamicsConfig(order=Order(args.order), max_rounds=args.max_rounds, seed=args.seed,
                                rate_tolerance=tol, candidate_pairs=pairs)
        report = run(state, config)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    doc = _header("dynamics", {
        **src,
        "order": config.order.value,
        "seed": config.seed,
        "max_rounds": config.max_rounds,
        "rate_tolerance": _tolerance_doc(tol),
        "candidate_pairs": [list(p) for p in config.candidate_pairs] if config.candidate_pairs else "all-colocated",
    })
    doc.update(dynamics_body(report))
    return doc, EXIT_OK


def _probabilities(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        try:
            p = float(part)
        except ValueError:
            raise UsageError(f"invalid probability {part!r}") from None
        if not (0 <= p <= 1) or math.isnan(p):
            raise UsageError(f"breakdown probability must lie in [0, 1], got {part.strip()}")
        out.append(p)
    return out


def cmd_game(args) -> tuple[dict, int]:
    if not (math.isfinite(args.surplus) and args.surplus > 0):
        raise UsageError("--surplus must be a positive number")
    ps = _probabilities(args.p)
    if args.horizon is not None and args.horizon < 1:
        raise UsageError("--horizon must be >= 1")
    try:
        rows = convergence_table(args.surplus, ps, horizon=args.horizon, seed=args.seed)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    for row in rows:
        if row["p"] == 1:
            row["note"] = "ultimatum"
    doc = _header("game", {"surplus": args.surplus, "p": ps, "horizon": args.horizon, "seed": args.seed})
    doc["rows"] = rows
    return doc, EXIT_OK


def cmd_scenario(args) -> tuple[dict, int]:
    if args.name not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.name!r}; valid names: {', '.join(SCENARIOS)}")
    if args.gamma is not None and args.name != "traffic-ratio":
        raise UsageError("--gamma only applies to the traffic-ratio scenario")
    try:
        if args.name == "traffic-ratio":
            result = scenario_traffic_ratio(to_money(args.gamma, "gamma") if args.gamma is not None else 3)
        else:
            result = SCENARIOS[args.name]()
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    config = {"name": args.name}
    if args.name == "traffic-ratio":
        config["gamma"] = args.gamma if args.gamma is not None else 3
    doc = _header("scenario", config)
    doc.update({
        "name": result.name,
        "passed": result.passed,
        "fixture": jsonable(result.fixture),
        "claims": [{"text": c.text, "passed": c.passed, "witness": jsonable(c.witness)} for c in result.claims],
        "settlements": {k: settlement_to_doc(s) for k, s in result.settlements.items()},
    })
    return doc, EXIT_OK if result.passed else EXIT_CLAIM_FAILED


def cmd_estimate(args) -> tuple[dict, int]:
    state, src = _load_state(args.topology)
    a, b = args.estimator, args.peer
    _require_as(state.topology, a, b)
    if a == b:
        raise UsageError("--estimator and --peer must differ")
    try:
        degrade = Degradation.parse(args.degrade)
        ev = evaluate_pair(state, a, b, location=args.location)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    topo = state.topology
    dests = sorted({d for o in ev.outcomes for d in o.group.destinations})
    obs = observe(topo, [a, b], dests, exclude_pair=(a, b), degrade=degrade)
    own = rates_of(topo)[a]
    groups = []
    for o in ev.outcomes:
        entry = {"group_id": o.group.id, "exporter": o.group.exporter, "importer": o.group.importer}
        try:
            est = estimate_params(obs, own, b, o.group)
        except DomainError as exc:
            entry.update({"status": "not-estimable", "reason": str(exc)})
            groups.append(entry)
            continue
        err = estimation_error(est, o.params)
        truth_c = o.params.cost_direct_a if b == o.params.party_a else o.params.cost_direct_b
        truth_o = o.params.cost_outside_a if b == o.params.party_a else o.params.cost_outside_b
        entry.update({
            "status": "estimated",
            "basis": est.basis.value,
            "per_destination_basis": {d: v.value for d, v in sorted(est.per_destination_basis.items())},
            "flagged": list(est.flagged),
            "assumptions": list(est.assumptions),
            "est_cost_direct": to_micro(est.est_cost_direct),
            "est_cost_outside": to_micro(est.est_cost_outside),
            "true_cost_direct": to_micro(truth_c),
            "true_cost_outside": to_micro(truth_o),
            "absolute_error_direct": to_micro(err.absolute_direct),
            "absolute_error_outside": to_micro(err.absolute_outside),
            "relative_error_direct": str(err.relative_direct),
            "relative_error_outside": str(err.relative_outside),
        })
        groups.append(entry)
    doc = _header("estimate", {**src, "estimator": a, "peer": b, "location": ev.location,
                               "degrade": args.degrade or ""})
    doc.update({
        "estimator": a,
        "peer": b,
        "observables": {
            "measured_paths": [
                {"source": s, "destination": d, "path": list(p)} for (s, d), p in sorted(obs.measured_paths.items())
            ],
            "customer_cones": {x: sorted(c) for x, c in sorted(obs.customer_cones.items())},
            "transit_prices": {x: to_micro(v) for x, v in sorted(obs.transit_prices.items())},
        },
        "groups": groups,
    })
    return doc, EXIT_OK


def cmd_fixture(args) -> tuple[dict, int]:
    if args.name not in BUILTIN:
        raise UsageError(f"unknown fixture {args.name!r}; choose from {', '.join(sorted(BUILTIN))}")
    state = BUILTIN[args.name]()
    return topology_to_doc(state.topology, state.demands), EXIT_OK


# -- text rendering ---------------------------------------------------------

def _money(v) -> str:
    """Micro-units back to currency units for display."""
    return money_str(to_money(v) / MICRO)


def render_text(doc: dict) -> str:
    cmd = doc.get("command")
    lines = [f"# {cmd} (schema {doc.get('schema_version')})"] if cmd else []
    if cmd:
        for k, v in doc["config"].items():
            lines.append(f"  {k}: {v}")
    if cmd == "evaluate":
        lines.append(f"pair {doc['pair'][0]}-{doc['pair'][1]} at {doc['location']}")
        for g in doc["groups"]:
            p, s = g["params"], g["settlement"]
            lines.append(
                f"  {g['id']}: dests={','.join(g['destinations'])} T={g['volume']} "
                f"c_a={_money(p['cost_direct_a'])} c_b={_money(p['cost_direct_b'])} "
                f"c'_a={_money(p['cost_outside_a'])} c'_b={_money(p['cost_outside_b'])} "
                f"surplus={_money(s['surplus'])} r={_money(s['price'])} {s['relation']}"
            )
        n = doc["net_settlement"]
        lines.append(f"net {_money(n['net'])} ({n['payer']})")
    elif cmd == "dynamics":
        lines.append(f"outcome {doc['outcome']} after {doc['rounds_executed']} round(s)"
                     + (f", cycle length {doc['cycle_length']}" if doc["cycle_length"] else ""))
        for e in doc["events"]:
            lines.append(f"  round {e['round']}: {e['a']}-{e['b']} {e['kind']} "
                         f"exports {e['a']}={e['exports_a']} {e['b']}={e['exports_b']} net={_money(e['net'])}")
        for l in doc["final_links"]:
            lines.append(f"  link {l['a']}-{l['b']} {l['kind']} @{l['location']}")
    elif cmd == "game":
        lines.append("  p            proposer     responder    |dist|       bound")
        for r in doc["rows"]:
            lines.append(f"  {r['p']:<12g} {r['proposer']:<12.6g} {r['responder']:<12.6g} "
                         f"{r['distance_to_nash']:<12.3g} {r['bound']:<12.3g}"
                         + (f" oracle={r['oracle_proposer']:.6g}" if "oracle_proposer" in r else "")
                         + (f" [{r['note']}]" if "note" in r else ""))
    elif cmd == "scenario":
        lines.append(f"scenario {doc['name']}: {'PASS' if doc['passed'] else 'FAIL'}")
        for c in doc["claims"]:
            lines.append(f"  [{'pass' if c['passed'] else 'FAIL'}] {c['text']}")
    elif cmd == "estimate":
        lines.append(f"{doc['estimator']} estimating {doc['peer']}")
        for g in doc["groups"]:
            if g["status"] != "estimated":
                lines.append(f"  {g['group_id']}: {g['status']} ({g['reason']})")
                continue
            lines.append(
                f"  {g['group_id']}: basis={g['basis']} c_hat={_money(g['est_cost_direct'])} "
                f"(true {_money(g['true_cost_direct'])}, rel err {g['relative_error_direct']}) "
                f"c'_hat={_money(g['est_cost_outside'])} (true {_money(g['true_cost_outside'])}, "
                f"rel err {g['relative_error_outside']})"
            )
    else:
        return dumps(doc)
    return "\n".join(lines) + "\n"


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="nashpeering", description="Nash-Peering interconnection simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="settle one AS pair")
    p.add_argument("--topology", required=True, help="topology JSON file or builtin:<name>")
    p.add_argument("--pair", required=True, help="A,B")
    p.add_argument("--location")
    p.add_argument("--rate-tolerance", default="inf")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("dynamics", parents=[common], help="run link-formation dynamics")
    p.add_argument("--topology", required=True)
    p.add_argument("--max-rounds", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", choices=[o.value for o in Order], default=Order.ROUND_ROBIN.value)
    p.add_argument("--candidate", action="append", metavar="A,B",
                   help="restrict to these pairs (repeatable); default: all co-located pairs")
    p.add_argument("--rate-tolerance", default="inf")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("game", parents=[common], help="alternating-offers convergence table")
    p.add_argument("--surplus", type=float, required=True)
    p.add_argument("--p", required=True, help="comma-separated breakdown probabilities")
    p.add_argument("--horizon", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("scenario", parents=[common], help="run a self-checking dispute scenario")
    p.add_argument("name")
    p.add_argument("--gamma", type=float)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("estimate", parents=[common], help="one-sided parameter estimation")
    p.add_argument("--topology", required=True)
    p.add_argument("--estimator", required=True)
    p.add_argument("--peer", required=True)
    p.add_argument("--location")
    p.add_argument("--degrade", help="truncate=<n>,stale-cones")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("fixture", parents=[common], help="print a built-in topology document")
    p.add_argument("name")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc, status = args.func(args)
        if "command" in doc:
            validate_report(doc)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = dumps(doc) if args.format == "json" else render_text(doc)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.out!r}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
