"""JSON documents: the topology input format and the report formats.

Money travels as integer micro-units. Amounts finer than a micro-unit (a
Nash price halves an odd micro-unit count, for instance) are written as an
exact decimal string of micro-units, so reading a document back never loses
precision. Traffic volumes are plain numbers or exact decimal strings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping, Optional

import jsonschema

from .bargain import InterconnectionParams, NetSettlement, Settlement
from .costmodel import RouteGroup, TrafficDemand
from .dynamics import DynamicsReport, NegotiationEvent, NetworkState
from .money import DomainError, from_micro, to_micro, to_money
from .topology import AsNode, Destination, LinkKind, RelationshipLink, Role, Topology

SCHEMA_VERSION = "1.0"

_MICRO = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^-?\d+(\.\d+)?(/\d+)?$"}]}
_AMOUNT = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?\d+(\.\d+)?(/\d+)?$"}]}
_ID = {"type": "string", "minLength": 1}
_IDS = {"type": "array", "items": _ID}

TOPOLOGY_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "topology document",
    "type": "object",
    "required": ["ases", "links", "destinations"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "string"},
        "ases": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {
                    "id": _ID,
                    "role": {"enum": [r.value for r in Role]},
                    "internal_cost_rate": _MICRO,
                    "transit_price": _MICRO,
                    "locations": _IDS,
                    "haul": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
                },
            },
        },
        "links": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["a", "b", "kind"],
                "additionalProperties": False,
                "properties": {
                    "a": _ID,
                    "b": _ID,
                    "kind": {"enum": [k.value for k in LinkKind]},
                    "location": _ID,
                    "export_a": _IDS,
                    "export_b": _IDS,
                },
            },
        },
        "destinations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "origin"],
                "additionalProperties": False,
                "properties": {"id": _ID, "origin": _ID, "haul": {"type": "integer", "minimum": 0}},
            },
        },
        "demands": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["source", "destination", "volume"],
                "additionalProperties": False,
                "properties": {"source": _ID, "destination": _ID, "volume": _AMOUNT},
            },
        },
        "rate_overrides": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": False,
                "properties": {"internal_cost_rate": _MICRO, "transit_price": _MICRO},
            },
        },
    },
}

_HEADER = {
    "schema_version": {"const": SCHEMA_VERSION},
    "command": {"type": "string"},
    "config": {"type": "object"},
}

_PARAMS = {
    "type": "object",
    "required": ["group_id", "cost_direct_a", "cost_direct_b", "cost_outside_a", "cost_outside_b", "volume"],
}
_SETTLEMENT = {
    "type": "object",
    "required": ["surplus", "price", "payoff_a", "payoff_b", "agreed", "relation"],
    "properties": {"surplus": _MICRO, "price": _MICRO, "payoff_a": _MICRO, "payoff_b": _MICRO,
                   "agreed": {"type": "boolean"}, "relation": {"type": "string"}},
}
_NET = {
    "type": "object",
    "required": ["price_b_to_a", "price_a_to_b", "net", "payer"],
    "properties": {"price_b_to_a": _MICRO, "price_a_to_b": _MICRO, "net": _MICRO},
}


def _report(command: str, body: Mapping[str, Any], required: list[str]) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": f"{command} report",
        "type": "object",
        "required": ["schema_version", "command", "config", *required],
        "properties": {**_HEADER, "command": {"const": command}, **body},
    }


REPORT_SCHEMAS: dict[str, dict] = {
    "evaluate": _report("evaluate", {
        "pair": {"type": "array", "items": _ID, "minItems": 2, "maxItems": 2},
        "location": _ID,
        "groups": {"type": "array", "items": {
            "type": "object",
            "required": ["exporter", "importer", "destinations", "params", "settlement"],
            "properties": {"params": _PARAMS, "settlement": _SETTLEMENT, "destinations": _IDS},
        }},
        "net_settlement": _NET,
    }, ["pair", "location", "groups", "net_settlement"]),
    "dynamics": _report("dynamics", {
        "outcome": {"enum": ["fixpoint", "cycle-detected", "max-rounds-exceeded"]},
        "rounds_executed": {"type": "integer", "minimum": 0},
        "cycle_length": {"type": ["integer", "null"]},
        "events": {"type": "array", "items": {
            "type": "object",
            "required": ["round", "a", "b", "kind", "exports_a", "exports_b", "surpluses", "net"],
        }},
        "final_links": {"type": "array"},
        "settlements": {"type": "array"},
        "state_hashes": {"type": "array", "items": {"type": "string"}},
    }, ["outcome", "rounds_executed", "cycle_length", "events", "final_links", "settlements"]),
    "game": _report("game", {
        "rows": {"type": "array", "items": {
            "type": "object",
            "required": ["p", "proposer", "responder", "distance_to_nash", "bound"],
        }},
    }, ["rows"]),
    "scenario": _report("scenario", {
        "name": {"type": "string"},
        "passed": {"type": "boolean"},
        "claims": {"type": "array", "items": {
            "type": "object", "required": ["text", "passed", "witness"],
            "properties": {"passed": {"type": "boolean"}},
        }},
        "settlements": {"type": "object", "additionalProperties": _SETTLEMENT},
    }, ["name", "passed", "claims", "settlements"]),
    "estimate": _report("estimate", {
        "estimator": _ID,
        "peer": _ID,
        "observables": {"type": "object"},
        "groups": {"type": "array", "items": {
            "type": "object", "required": ["group_id", "status"],
        }},
    }, ["estimator", "peer", "observables", "groups"]),
}


def validate_document(doc: Any, schema: Mapping) -> None:
    """Raise :class:`DomainError` with a path-qualified message on failure."""
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DomainError(f"{where}: {exc.message}") from None


def validate_report(doc: Mapping) -> None:
    schema = REPORT_SCHEMAS.get(doc.get("command"))
    if schema is None:
        raise DomainError(f"no schema for command {doc.get('command')!r}")
    validate_document(doc, schema)


# -- topology input ---------------------------------------------------------

def topology_from_doc(doc: Mapping) -> tuple[Topology, tuple[TrafficDemand, ...]]:
    validate_document(doc, TOPOLOGY_SCHEMA)
    overrides = doc.get("rate_overrides", {})
    known = {a["id"] for a in doc["ases"]}
    for x in overrides:
        if x not in known:
            raise DomainError(f"rate_overrides: unknown AS {x!r}")
    nodes = []
    for a in doc["ases"]:
        over = overrides.get(a["id"], {})
        nodes.append(AsNode(
            id=a["id"],
            role=a.get("role", Role.TRANSIT.value),
            internal_cost_rate=from_micro(over.get("internal_cost_rate", a.get("internal_cost_rate", 0))),
            transit_price=from_micro(over.get("transit_price", a.get("transit_price", 0))),
            locations=frozenset(a.get("locations", ())),
            haul=a.get("haul", {}),
        ))
    links = [
        RelationshipLink(l["a"], l["b"], l["kind"], l.get("location", "default"),
                         frozenset(l.get("export_a", ())), frozenset(l.get("export_b", ())))
        for l in doc["links"]
    ]
    dests = [Destination(d["id"], d["origin"], d.get("haul", 0)) for d in doc["destinations"]]
    demands = tuple(
        TrafficDemand(d["source"], d["destination"], to_money(d["volume"], "volume"))
        for d in doc.get("demands", ())
    )
    return Topology(nodes, links, dests), demands


def load_topology(path: str) -> tuple[Topology, tuple[TrafficDemand, ...]]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read topology {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return topology_from_doc(doc)


def amount(x: Fraction):
    """Volumes: an int when integral, otherwise an exact string."""
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else str(x)


def topology_to_doc(topology: Topology, demands=()) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "ases": [
            {
                "id": n.id, "role": n.role.value,
                "internal_cost_rate": to_micro(n.internal_cost_rate),
                "transit_price": to_micro(n.transit_price),
                "locations": sorted(n.locations),
                "haul": dict(sorted(n.haul.items())),
            }
            for n in sorted(topology.nodes.values(), key=lambda n: n.id)
        ],
        "links": [link_to_doc(l) for l in topology.links],
        "destinations": [
            {"id": d.id, "origin": d.origin, "haul": d.haul}
            for d in sorted(topology.destinations.values(), key=lambda d: d.id)
        ],
        "demands": [
            {"source": d.source, "destination": d.destination, "volume": amount(d.volume)}
            for d in demands
        ],
    }


def state_from_doc(doc: Mapping) -> NetworkState:
    topo, demands = topology_from_doc(doc)
    return NetworkState(topo, demands)


# -- report fragments -------------------------------------------------------

def link_to_doc(l: RelationshipLink) -> dict:
    out = {"a": l.a, "b": l.b, "kind": l.kind.value, "location": l.location}
    if l.kind is LinkKind.NASH_PEER:
        out["export_a"] = sorted(l.export_a)
        out["export_b"] = sorted(l.export_b)
    return out


def params_to_doc(p: InterconnectionParams) -> dict:
    return {
        "group_id": p.group_id,
        "direction": p.direction.value,
        "party_a": p.party_a,
        "party_b": p.party_b,
        "cost_direct_a": to_micro(p.cost_direct_a),
        "cost_direct_b": to_micro(p.cost_direct_b),
        "cost_outside_a": to_micro(p.cost_outside_a),
        "cost_outside_b": to_micro(p.cost_outside_b),
        "volume": amount(p.volume),
    }


def settlement_to_doc(s: Settlement) -> dict:
    return {
        "group_id": s.group_id,
        "party_a": s.party_a,
        "party_b": s.party_b,
        "surplus": to_micro(s.surplus),
        "price": to_micro(s.price),
        "payoff_a": to_micro(s.payoff_a),
        "payoff_b": to_micro(s.payoff_b),
        "outside_payoff_a": to_micro(s.outside_payoff_a),
        "outside_payoff_b": to_micro(s.outside_payoff_b),
        "agreed": s.agreed,
        "relation": s.relation.value,
    }


def net_to_doc(net: NetSettlement, a: Optional[str] = None, b: Optional[str] = None) -> dict:
    if net.net > 0:
        payer = f"{b or 'B'} pays {a or 'A'}"
    elif net.net < 0:
        payer = f"{a or 'A'} pays {b or 'B'}"
    else:
        payer = "none"
    return {
        "price_b_to_a": to_micro(net.price_b_to_a),
        "price_a_to_b": to_micro(net.price_a_to_b),
        "net": to_micro(net.net),
        "payer": payer,
    }


def group_to_doc(g: RouteGroup) -> dict:
    return {
        "id": g.id,
        "exporter": g.exporter,
        "importer": g.importer,
        "location": g.location,
        "destinations": list(g.destinations),
        "volume": amount(g.volume),
    }


def event_to_doc(e: NegotiationEvent) -> dict:
    return {
        "round": e.round,
        "a": e.a,
        "b": e.b,
        "kind": e.kind.value,
        "exports_a": list(e.exports_a),
        "exports_b": list(e.exports_b),
        "surpluses": [{"group_id": g, "surplus": to_micro(s)} for g, s in e.surpluses],
        "net": to_micro(e.net),
    }


def dynamics_body(report: DynamicsReport) -> dict:
    return {
        "outcome": report.outcome.value,
        "rounds_executed": report.rounds_executed,
        "cycle_length": report.cycle_length,
        "events": [event_to_doc(e) for e in report.event_log],
        "final_links": [link_to_doc(l) for l in report.final_state.topology.links],
        "settlements": [
            {"a": a, "b": b, **settlement_to_doc(s)}
            for (a, b, _), s in sorted(report.final_state.settlements.items())
        ],
        "state_hashes": list(report.state_hashes),
    }


def jsonable(value: Any) -> Any:
    """Best-effort conversion of claim witnesses.

    Witnesses mix money, ratios and counts, so exact rationals are written
    as their plain string form (``"3/2"``) rather than as micro-units.
    """
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, float, str)):
        return value
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, InterconnectionParams):
        return params_to_doc(value)
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return str(value)


def dumps(doc: Mapping) -> str:
    """Canonical rendering: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
