import math
from fractions import Fraction as F

import pytest

from nashpeering.bargain import surplus
from nashpeering.costmodel import (
    FlowCostBreakdown,
    RateCard,
    RouteGroup,
    TrafficDemand,
    candidate_flows,
    direct_costs,
    direct_params,
    flow_cost,
    group_routes,
    merge_groups,
    outside_params,
    rates_of,
)
from nashpeering.fixtures import common_provider, three_as_transit
from nashpeering.money import DomainError
from nashpeering.topology import AsNode, Destination, LinkKind, RelationshipLink, Role, Route, RouteKind, Topology

CP, SF = LinkKind.CUSTOMER_PROVIDER, LinkKind.SF_PEER
TENTH = F(1, 10)


def group(exp, imp, dests, flows, loc="IX", gid="g"):
    flows = tuple(TrafficDemand(*f) for f in flows)
    return RouteGroup(gid, exp, imp, tuple(dests), sum((f.volume for f in flows), F(0)), loc, flows)


# -- flow_cost ---------------------------------------------------------------

def test_terminating_flow_costs_one_segment():
    t = Topology([AsNode("X", internal_cost_rate=TENTH), AsNode("S", internal_cost_rate=TENTH)],
                 [RelationshipLink("S", "X", SF)], [Destination("d", "X")])
    b = flow_cost(t, None, "X", Route("d", ("S", "X"), RouteKind.SF_PEER), 10)
    assert b == FlowCostBreakdown(internal=F(1))
    assert b.net == 1


def test_zero_volume_is_free():
    t = Topology([AsNode("X", internal_cost_rate=TENTH)], [], [Destination("d", "X")])
    assert flow_cost(t, None, "X", Route("d", ("X",), RouteKind.ORIGIN), 0) == FlowCostBreakdown()


def test_transit_through_customer_and_provider():
    t = Topology(
        [AsNode("C"), AsNode("X", Role.TRANSIT, TENTH, F(2, 5)), AsNode("P", Role.TRANSIT, 0, F(1, 2))],
        [RelationshipLink("C", "X", CP), RelationshipLink("X", "P", CP)],
        [Destination("d", "P")],
    )
    b = flow_cost(t, None, "X", Route("d", ("C", "X", "P"), RouteKind.CUSTOMER), 10)
    assert (b.internal, b.transit_paid, b.transit_revenue, b.net) == (2, 5, 4, 3)


def test_flow_cost_requires_x_on_path():
    st = three_as_transit()
    with pytest.raises(DomainError):
        flow_cost(st.topology, None, "Z", Route("dA", ("A",), RouteKind.ORIGIN), 1)


def test_rate_overrides_win():
    st = three_as_transit()
    rates = rates_of(st.topology, {"A": RateCard(1, 0)})
    assert rates["A"].internal_cost_rate == 1 and rates["B"].internal_cost_rate == F(1, 5)


# -- direct and outside parameters -----------------------------------------------

def two_stubs(haul_a=1, price=F(1, 2), volume=10):
    st = common_provider(price=price, rate=TENTH, volume=volume)
    if haul_a != 1:
        a = st.topology.nodes["A"]
        t = st.topology.with_nodes([AsNode("A", a.role, a.internal_cost_rate, a.transit_price, a.locations,
                                           {"IX": haul_a})])
        return t
    return st.topology


def test_direct_costs_adjacent_sides():
    g = group("A", "B", ["dA"], [("B", "dA", 10)])
    assert direct_costs(two_stubs(), None, g) == (1, 1)


def test_exporter_backbone_haul_doubles_its_cost():
    g = group("A", "B", ["dA"], [("B", "dA", 10)])
    c_a, c_b = direct_costs(two_stubs(haul_a=2), None, g)
    assert (c_a, c_b) == (2, 1)


def test_zero_volume_group_is_neutral():
    g = group("A", "B", ["dA"], [("B", "dA", 0)])
    p = direct_params(two_stubs(), None, g)
    assert (p.cost_direct_a, p.cost_direct_b, p.cost_outside_a, p.cost_outside_b) == (0, 0, 0, 0)
    assert surplus(p) == 0


def test_outside_via_common_provider():
    g = group("A", "B", ["dA"], [("B", "dA", 10)])
    assert outside_params(two_stubs(), None, g) == (6, 6)


def test_outside_equal_to_direct_when_transit_is_free_and_short():
    t = Topology(
        [AsNode("A", internal_cost_rate=TENTH, locations={"IX"}), AsNode("B", internal_cost_rate=TENTH, locations={"IX"}),
         AsNode("C")],
        [RelationshipLink("A", "C", SF, "IX"), RelationshipLink("B", "C", SF, "IX")],
        [Destination("dA", "A")],
    )
    g = group("A", "B", ["dA"], [("B", "dA", 10)])
    p = direct_params(t, None, g)
    # B has no route to dA without the direct link (peer routes are not re-exported)
    assert (p.cost_outside_a, p.cost_outside_b) == (1000, 1000)
    free = Topology(t.nodes.values(), [RelationshipLink("A", "C", CP, "IX"), RelationshipLink("B", "C", CP, "IX")],
                    t.destinations.values())
    q = direct_params(free, None, g)
    assert (q.cost_outside_a, q.cost_outside_b) == (q.cost_direct_a, q.cost_direct_b)
    assert surplus(q) == 0


def test_no_outside_route_costs_the_penalty():
    t = Topology([AsNode("A", internal_cost_rate=TENTH), AsNode("B", internal_cost_rate=TENTH)],
                 [RelationshipLink("A", "B", SF, "IX")], [Destination("dA", "A")])
    g = group("A", "B", ["dA"], [("B", "dA", 10)])
    assert outside_params(t, None, g) == (1000, 1000)
    assert outside_params(t, None, g, penalty=7) == (70, 70)


def test_three_as_fixture_parameters():
    st = three_as_transit()
    (g,) = group_routes(st.topology, None, st.demands, "A", "B", "IX")
    p = direct_params(st.topology, None, g)
    assert (p.cost_direct_a, p.cost_direct_b, p.cost_outside_a, p.cost_outside_b) == (2, 2, 4, 10)
    assert g.id == "A>B@IX#0" and g.volume == 10


# -- location sensitivity -------------------------------------------------------

def test_closer_location_lowers_that_partys_cost_only():
    near, far = two_stubs(haul_a=1), two_stubs(haul_a=3)
    g = group("A", "B", ["dA"], [("B", "dA", 10)])
    p_near, p_far = direct_params(near, None, g), direct_params(far, None, g)
    assert p_near.cost_direct_a < p_far.cost_direct_a
    assert p_near.cost_direct_b == p_far.cost_direct_b
    assert p_near.cost_outside_b == p_far.cost_outside_b


# -- grouping -------------------------------------------------------------------

def coast_to_coast():
    """A exports a local prefix and a transcontinental one (haul 5)."""
    t = Topology(
        [AsNode("A", Role.TRANSIT, TENTH, 0, {"IX"}), AsNode("B", Role.ACCESS, TENTH, 0, {"IX"}),
         AsNode("C", Role.TRANSIT, TENTH, F(1, 2))],
        [RelationshipLink("A", "C", CP, "C-A"), RelationshipLink("B", "C", CP, "C-B")],
        [Destination("local", "A"), Destination("local2", "A"), Destination("far", "A", haul=5)],
    )
    demands = [TrafficDemand("B", "local", 10), TrafficDemand("B", "local2", 5), TrafficDemand("B", "far", 10)]
    return t, demands


def test_identical_destinations_form_one_group():
    t, demands = coast_to_coast()
    groups = group_routes(t, None, demands[:2], "A", "B", "IX", rate_tolerance=0)
    assert [g.destinations for g in groups] == [("local", "local2")]


def test_transcontinental_route_splits_off():
    t, demands = coast_to_coast()
    groups = group_routes(t, None, demands, "A", "B", "IX", rate_tolerance=F(1, 10))
    assert [g.destinations for g in groups] == [("far",), ("local", "local2")]
    assert [g.volume for g in groups] == [10, 15]


def test_infinite_tolerance_bundles_everything():
    t, demands = coast_to_coast()
    (g,) = group_routes(t, None, demands, "A", "B", "IX", rate_tolerance=math.inf)
    assert g.destinations == ("far", "local", "local2") and g.volume == 25


def test_negative_tolerance_rejected():
    t, demands = coast_to_coast()
    with pytest.raises(DomainError):
        group_routes(t, None, demands, "A", "B", "IX", rate_tolerance=-1)


def test_merged_group_parameters_are_additive():
    t, demands = coast_to_coast()
    groups = group_routes(t, None, demands, "A", "B", "IX", rate_tolerance=0)
    parts = [direct_params(t, None, g) for g in groups]
    merged = direct_params(t, None, merge_groups(groups))
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    assert (merged.cost_direct_a, merged.cost_direct_b, merged.cost_outside_a, merged.cost_outside_b, merged.volume) == (
        total.cost_direct_a, total.cost_direct_b, total.cost_outside_a, total.cost_outside_b, total.volume)


def test_merge_rejects_mixed_pairs():
    a = group("A", "B", ["x"], [("B", "x", 1)])
    b = group("B", "A", ["y"], [("A", "y", 1)])
    with pytest.raises(DomainError):
        merge_groups([a, b])
    with pytest.raises(DomainError):
        merge_groups([])


def test_candidate_flows_use_cones():
    t = Topology(
        [AsNode("A"), AsNode("B"), AsNode("CA"), AsNode("CB"), AsNode("T")],
        [RelationshipLink("CA", "A", CP), RelationshipLink("CB", "B", CP),
         RelationshipLink("A", "T", CP), RelationshipLink("B", "T", CP)],
        [Destination("dCA", "CA"), Destination("dT", "T"), Destination("dB", "B")],
    )
    demands = [TrafficDemand("CB", "dCA", 3), TrafficDemand("B", "dT", 4), TrafficDemand("CA", "dCA", 1),
               TrafficDemand("B", "dCA", 0)]
    flows = candidate_flows(t, demands, "A", "B")
    assert list(flows) == ["dCA"]
    assert [f.source for f in flows["dCA"]] == ["CB"]


def test_group_and_demand_validation():
    with pytest.raises(DomainError):
        RouteGroup("g", "A", "B", (), 0, "IX")
    with pytest.raises(DomainError):
        TrafficDemand("A", "d", -1)
