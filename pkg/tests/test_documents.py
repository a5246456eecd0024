import json
from fractions import Fraction as F

import pytest

from nashpeering.bargain import InterconnectionParams, settle
from nashpeering.documents import (
    REPORT_SCHEMAS,
    TOPOLOGY_SCHEMA,
    dumps,
    jsonable,
    load_topology,
    net_to_doc,
    settlement_to_doc,
    state_from_doc,
    topology_from_doc,
    topology_to_doc,
    validate_document,
    validate_report,
)
from nashpeering.bargain import net_settlement
from nashpeering.fixtures import oscillator, three_as_transit
from nashpeering.money import DomainError, from_micro
from nashpeering.scenarios import tier1_world


@pytest.mark.parametrize("make", [three_as_transit, oscillator, lambda: oscillator(True), tier1_world])
def test_topology_round_trip(make):
    state = make()
    doc = topology_to_doc(state.topology, state.demands)
    validate_document(doc, TOPOLOGY_SCHEMA)
    topo, demands = topology_from_doc(json.loads(dumps(doc)))
    assert topology_to_doc(topo, demands) == doc
    assert demands == state.demands


def minimal():
    return {
        "ases": [{"id": "A", "internal_cost_rate": 100000, "locations": ["IX"]}, {"id": "B"}],
        "links": [{"a": "A", "b": "B", "kind": "customer-provider", "location": "p"}],
        "destinations": [{"id": "dA", "origin": "A"}],
        "demands": [{"source": "B", "destination": "dA", "volume": "2.5"}],
    }


def test_defaults_and_exact_volumes():
    topo, demands = topology_from_doc(minimal())
    assert topo.nodes["A"].internal_cost_rate == F(1, 10)
    assert topo.nodes["B"].transit_price == 0
    assert demands[0].volume == F(5, 2)


def test_rate_overrides_apply():
    doc = minimal()
    doc["rate_overrides"] = {"A": {"internal_cost_rate": 200000}}
    topo, _ = topology_from_doc(doc)
    assert topo.nodes["A"].internal_cost_rate == F(1, 5)
    doc["rate_overrides"] = {"Z": {"transit_price": 1}}
    with pytest.raises(DomainError, match="unknown AS"):
        topology_from_doc(doc)


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda d: d["links"][0].update(kind="friends"), "links/0/kind"),
        (lambda d: d["ases"][0].update(colour="red"), "ases/0"),
        (lambda d: d.pop("destinations"), "<root>"),
        (lambda d: d["ases"][1].update(haul={"x": -1}), "ases/1/haul/x"),
        (lambda d: d["ases"][0].update(transit_price=1.5), "ases/0/transit_price"),
    ],
)
def test_schema_errors_carry_the_path(mutate, where):
    doc = minimal()
    mutate(doc)
    with pytest.raises(DomainError) as exc:
        topology_from_doc(doc)
    assert str(exc.value).startswith(where)


def test_load_topology_errors(tmp_path):
    with pytest.raises(DomainError, match="cannot read"):
        load_topology(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(DomainError, match="invalid JSON"):
        load_topology(str(bad))
    good = tmp_path / "good.json"
    good.write_text(json.dumps(minimal()))
    assert state_from_doc(minimal()).topology == load_topology(str(good))[0]


def test_settlement_document_uses_micro_units():
    s = settle(InterconnectionParams(2, 2, 4, 10, group_id="g"))
    doc = settlement_to_doc(s)
    assert (doc["surplus"], doc["price"], doc["payoff_b"]) == (10_000_000, 3_000_000, -5_000_000)
    half = settle(InterconnectionParams(0, 0, 0, F(1, 10**6)))
    assert from_micro(settlement_to_doc(half)["price"]) == F(1, 2 * 10**6)


def test_net_document_names_the_payer():
    s = settle(InterconnectionParams(2, 2, 4, 10, party_a="A", party_b="B"))
    assert net_to_doc(net_settlement(s, []), "A", "B")["payer"] == "B pays A"


def test_jsonable_witnesses():
    assert jsonable({"r": F(3, 2), "xs": (F(1), None), "ok": True}) == {"r": "3/2", "xs": ["1", None], "ok": True}


def test_report_schema_dispatch():
    assert set(REPORT_SCHEMAS) == {"evaluate", "dynamics", "game", "scenario", "estimate"}
    with pytest.raises(DomainError):
        validate_report({"command": "nope"})
    with pytest.raises(DomainError):
        validate_report({"command": "game", "schema_version": "1.0", "config": {}})


def test_dumps_is_canonical():
    assert dumps({"b": 1, "a": [1, 2]}) == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'
