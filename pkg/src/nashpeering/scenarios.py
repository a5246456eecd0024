"""Self-checking reproductions of four classic interconnection disputes.

Every scenario builds its own fixture, recomputes all numbers through the
public APIs and records machine-checked claims with witness values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Any, Callable, Optional

from . import bargain
from .bargain import InterconnectionParams, Relation, Settlement, net_settlement, nash_price, settle, surplus
from .costmodel import TrafficDemand, direct_params, group_routes
from .dynamics import DynamicsConfig, NetworkState, Outcome, evaluate_pair, run
from .money import DomainError
from .topology import AsNode, Destination, LinkKind, RelationshipLink, Role, Topology, compute_routes

CP = LinkKind.CUSTOMER_PROVIDER
SF = LinkKind.SF_PEER


@dataclass(frozen=True)
class Claim:
    text: str
    passed: bool
    witness: dict = field(default_factory=dict)


@dataclass
class ScenarioResult:
    name: str
    fixture: dict
    settlements: dict[str, Settlement] = field(default_factory=dict)
    claims: list[Claim] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.claims) and all(c.passed for c in self.claims)

    def check(self, text: str, predicate: bool, **witness: Any) -> None:
        self.claims.append(Claim(text, bool(predicate), witness))


# -- access vs. content ---------------------------------------------------

def _ap_cp_world(*, cp_transit: bool, ap_haul_ix: int, cp_haul_ix: int, ap_haul_out: int,
                 price) -> NetworkState:
    """CP sends 10 units to the AP's eyeballs; the AP exports dAP to the CP."""
    rate = F(1, 10)
    nodes = [
        AsNode("AP", Role.ACCESS, rate, 0, locations={"IX"}, haul={"IX": ap_haul_ix, "AP-pop": ap_haul_out}),
        AsNode("CP", Role.CONTENT, rate, 0, locations={"IX"}, haul={"IX": cp_haul_ix}),
        AsNode("T", Role.TRANSIT, rate, price),
    ]
    links = [RelationshipLink("CP", "T", CP, "T-pop-CP")]
    if cp_transit:
        # AP's outside option is an sf-peering link with the CP's transit provider
        links.append(RelationshipLink("AP", "T", SF, "AP-pop"))
    else:
        links.append(RelationshipLink("AP", "T", CP, "T-pop-AP"))
    topo = Topology(nodes, links, [Destination("dAP", "AP"), Destination("dCP", "CP")])
    return NetworkState(topo, (TrafficDemand("CP", "dAP", 10),))


def _ap_cp_settle(state: NetworkState) -> tuple[InterconnectionParams, Settlement]:
    groups = group_routes(state.topology, None, state.demands, "AP", "CP", "IX")
    params = direct_params(state.topology, None, groups[0])
    return params, settle(params)


def scenario_ap_cp() -> ScenarioResult:
    res = ScenarioResult("ap-cp", {
        "variant-1": "CP buys transit from T (price 1.9); AP sf-peers with T; link at IX near the CP",
        "variant-2": "both buy transit from T (price 0.5); CP backbone makes both sides haul 2 segments",
        "variant-3": "as variant 2 but the CP hauls further than the AP",
    })

    p1, s1 = _ap_cp_settle(_ap_cp_world(cp_transit=True, ap_haul_ix=5, cp_haul_ix=1, ap_haul_out=2, price=F(19, 10)))
    res.settlements["variant-1"] = s1
    res.check("CP's outside option is far costlier than the AP's (c'_CP >> c'_AP)",
              p1.cost_outside_b >= 5 * p1.cost_outside_a,
              c_out_cp=p1.cost_outside_b, c_out_ap=p1.cost_outside_a)
    res.check("interconnecting near the CP costs the AP more (c_AP >> c_CP)",
              p1.cost_direct_a >= 5 * p1.cost_direct_b, c_ap=p1.cost_direct_a, c_cp=p1.cost_direct_b)
    expected = ((p1.cost_outside_b - p1.cost_direct_b) - (p1.cost_outside_a - p1.cost_direct_a)) / 2
    res.check("the CP pays the AP the equal-gain price",
              s1.agreed and s1.price == expected and s1.price > 0
              and s1.relation is Relation.PAID_PEERING_B_TO_A,
              price=s1.price, expected=expected, surplus=s1.surplus)

    p2, s2 = _ap_cp_settle(_ap_cp_world(cp_transit=False, ap_haul_ix=2, cp_haul_ix=2, ap_haul_out=1, price=F(1, 2)))
    res.settlements["variant-2"] = s2
    res.check("with a CP backbone and a shared transit provider the payment vanishes",
              p2.cost_outside_a == p2.cost_outside_b and p2.cost_direct_a == p2.cost_direct_b
              and s2.agreed and s2.price == 0 and s2.relation is Relation.SETTLEMENT_FREE,
              price=s2.price, c_out=p2.cost_outside_a, c=p2.cost_direct_a)

    p3, s3 = _ap_cp_settle(_ap_cp_world(cp_transit=False, ap_haul_ix=1, cp_haul_ix=3, ap_haul_out=1, price=F(1, 2)))
    res.settlements["variant-3"] = s3
    res.check("when the AP's side is cheaper the payment reverses (AP pays CP)",
              p3.cost_direct_a < p3.cost_direct_b and s3.agreed and s3.price < 0
              and s3.relation is Relation.PAID_PEERING_A_TO_B and s3.price == nash_price(p3),
              price=s3.price, c_ap=p3.cost_direct_a, c_cp=p3.cost_direct_b)
    return res


# -- traffic ratios ---------------------------------------------------------

def _direction(volume, c_a, c_b, o_a, o_b, direction, gid) -> InterconnectionParams:
    v = F(volume)
    return InterconnectionParams(c_a * v, c_b * v, o_a * v, o_b * v, v, gid, direction)


def ratio_within(t_ab, t_ba, gamma) -> bool:
    """Conventional sf-peering eligibility: 1/gamma < T_AB / T_BA < gamma."""
    ratio = F(t_ab) / F(t_ba)
    return 1 / F(gamma) < ratio < F(gamma)


def scenario_traffic_ratio(gamma=3) -> ScenarioResult:
    gamma = F(gamma)
    if gamma <= 1:
        raise DomainError(f"gamma must exceed 1, got {gamma}")
    far = max(F(10), 2 * gamma)
    # per-unit costs (c_a, c_b, c'_a, c'_b) chosen so each direction's surplus has the wanted sign
    good = (F(1, 10), F(1, 10), F(1, 4), F(1, 4))  # +0.3 per unit
    bad = (F(1, 5), F(1, 5), F(3, 20), F(3, 20))  # -0.1 per unit
    fixtures = {
        "in-bounds/no-deal": (F(10), F(10), bad),
        "out-of-bounds/deal": (2 * far, F(2), good),
        "in-bounds/deal": (F(10), F(10), good),
        "out-of-bounds/no-deal": (2 * far, F(2), bad),
    }
    res = ScenarioResult("traffic-ratio", {"gamma": gamma, "far_ratio": far,
                                           "quadrants": {k: {"T_AB": v[0], "T_BA": v[1]} for k, v in fixtures.items()}})
    witnessed = {}
    for name, (t_ab, t_ba, unit) in fixtures.items():
        # T_AB flows A -> B, i.e. over routes B exports
        ab = _direction(t_ab, *unit, bargain.Direction.B_EXPORTS, f"{name}:A->B")
        ba = _direction(t_ba, *unit, bargain.Direction.A_EXPORTS, f"{name}:B->A")
        s_ab, s_ba = settle(ab), settle(ba)
        res.settlements[f"{name}:A->B"] = s_ab
        res.settlements[f"{name}:B->A"] = s_ba
        total = s_ab.surplus + s_ba.surplus
        nash_deal = s_ab.agreed or s_ba.agreed
        in_bounds = ratio_within(t_ab, t_ba, gamma)
        witnessed[name] = (in_bounds, nash_deal)
        want_in, want_deal = name.split("/")
        res.check(f"quadrant {name} witnessed",
                  in_bounds == (want_in == "in-bounds") and nash_deal == (want_deal == "deal")
                  and (total > 0) == nash_deal,
                  ratio=F(t_ab) / F(t_ba), surplus=total, sf_eligible=in_bounds, nash_peering=nash_deal)
    res.check("ratio rule admits an interconnection whose surplus is negative",
              witnessed["in-bounds/no-deal"] == (True, False))
    res.check("ratio rule rejects an interconnection whose surplus is positive",
              witnessed["out-of-bounds/deal"] == (False, True))
    return res


# -- tier-1 clique ----------------------------------------------------------

def tier1_world(dest_haul: int = 1, vol_12: int = 30, vol_21: int = 10) -> NetworkState:
    """Provider-free clique T1, T2, T3 plus newcomer N, a customer of T3.

    ``vol_12`` units flow from T2 to T1's prefix and ``vol_21`` from T1 to
    T2's prefix; N sends 10 units to T1's prefix.
    """
    rate = F(1, 10)
    nodes = [
        AsNode("T1", Role.TRANSIT, rate, F(1, 2), locations={"IX-N"}),
        AsNode("T2", Role.TRANSIT, rate, F(1, 2)),
        AsNode("T3", Role.TRANSIT, rate, F(3, 5)),
        AsNode("N", Role.ACCESS, rate, 0, locations={"IX-N"}),
    ]
    links = [
        RelationshipLink("T1", "T2", SF, "core"),
        RelationshipLink("T1", "T3", SF, "core"),
        RelationshipLink("T2", "T3", SF, "core"),
        RelationshipLink("N", "T3", CP, "T3-pop"),
    ]
    dests = [Destination("d1", "T1", dest_haul), Destination("d2", "T2", dest_haul),
             Destination("d3", "T3", dest_haul), Destination("dN", "N")]
    demands = (
        TrafficDemand("N", "d1", 10),
        TrafficDemand("T2", "d1", vol_12),
        TrafficDemand("T1", "d2", vol_21),
    )
    return NetworkState(Topology(nodes, links, dests), demands)


def scenario_tier1() -> ScenarioResult:
    res = ScenarioResult("tier1", {
        "clique": ["T1", "T2", "T3"], "newcomer": "N (customer of T3, co-located with T1 at IX-N)",
    })
    state = tier1_world()

    ev = evaluate_pair(state, "N", "T1")
    (n_grp,) = [o for o in ev.outcomes if o.group.exporter == "T1"]
    s = n_grp.settlement
    res.settlements["N<-T1"] = s
    res.check("newcomer and clique member have a positive surplus and agree",
              s.agreed and s.surplus == surplus(n_grp.params), surplus=s.surplus)
    res.check("the newcomer pays the member the equal-gain price",
              s.price == nash_price(n_grp.params) and s.price > 0 and s.relation is Relation.PAID_PEERING_B_TO_A,
              price=s.price)
    report = run(state, DynamicsConfig(candidate_pairs=(("N", "T1"),), max_rounds=5))
    formed = [e for e in report.event_log if e.kind.value == "link-formed"]
    res.check("the dynamics form the N-T1 Nash-Peering link and settle",
              report.outcome is Outcome.FIXPOINT and len(formed) == 1,
              outcome=report.outcome.value, rounds=report.rounds_executed)

    base = state.topology.without_links("T1", "T2")
    cut = "T2" not in compute_routes(base, "d1")
    res.check("dropping the T1-T2 sf link partitions T2 from T1's prefix", cut)

    ev12 = evaluate_pair(state, "T1", "T2", location="core")
    net = ev12.net
    res.settlements["T1-T2:T1-exports"] = ev12.groups_a[0].settlement
    res.settlements["T1-T2:T2-exports"] = ev12.groups_b[0].settlement
    res.check("clique members pay each other in both directions, netted to one lump sum",
              net.price_b_to_a > 0 and net.price_a_to_b > 0 and net.net == net.price_b_to_a - net.price_a_to_b,
              price_b_to_a=net.price_b_to_a, price_a_to_b=net.price_a_to_b, net=net.net)

    flipped = evaluate_pair(tier1_world(vol_12=10, vol_21=30), "T1", "T2", location="core").net
    res.check("swapping the traffic mix reverses the net payment",
              net.net > 0 > flipped.net, before=net.net, after=flipped.net)

    sym = evaluate_pair(tier1_world(dest_haul=0), "T1", "T2", location="core")
    prices = [o.settlement.price for o in sym.outcomes]
    res.check("symmetric clique members settle at r = 0",
              all(o.settlement.agreed for o in sym.outcomes) and all(p == 0 for p in prices), prices=prices)
    return res


# -- high-cost routes -------------------------------------------------------

def scenario_high_cost_route(delta=2, steps: int = 5,
                             base: Optional[InterconnectionParams] = None) -> ScenarioResult:
    base = base or InterconnectionParams(cost_direct_a=2, cost_direct_b=2, cost_outside_a=4, cost_outside_b=10)
    delta = F(delta)
    res = ScenarioResult("high-cost-route", {"base": base, "delta": delta, "steps": steps})
    sweep = []
    for k in range(steps + 1):
        p = InterconnectionParams(base.cost_direct_a + k * delta, base.cost_direct_b,
                                  base.cost_outside_a, base.cost_outside_b, base.volume, f"step-{k}")
        s = settle(p)
        res.settlements[f"step-{k}"] = s
        sweep.append((p, s))
    for k in range(steps):
        (p0, s0), (p1, s1) = sweep[k], sweep[k + 1]
        if not s0.agreed:
            break
        if s1.agreed:
            res.check(f"step {k}->{k + 1}: price up by delta/2, surplus down by delta",
                      s1.price - s0.price == delta / 2 and s0.surplus - s1.surplus == delta,
                      price=(s0.price, s1.price), surplus=(s0.surplus, s1.surplus))
        else:
            res.check(f"step {k}->{k + 1}: agreement ends once surplus <= 0",
                      s1.surplus <= 0 and s1.relation is Relation.NO_AGREEMENT
                      and nash_price(p1) - nash_price(p0) == delta / 2,
                      surplus=s1.surplus)
    if delta == 0:
        res.check("zero cost increase leaves the price unchanged",
                  all(s.price == sweep[0][1].price for _, s in sweep))
    return res


SCENARIOS: dict[str, Callable[..., ScenarioResult]] = {
    "ap-cp": scenario_ap_cp,
    "traffic-ratio": scenario_traffic_ratio,
    "tier1": scenario_tier1,
    "high-cost-route": scenario_high_cost_route,
}
