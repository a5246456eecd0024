"""Interconnection parameters from topology, cost rates and traffic.

Cost model:

* internal cost = own rate x volume x segments, where an AS spends
  ``haul_at(location)`` segments (default 1) on each path edge adjacent to
  it, plus the destination's extra haul if it originates the destination;
* a customer pays its provider's transit price on every unit it sends or
  receives through that provider;
* a provider earns its own transit price on every unit exchanged with a
  customer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .bargain import Direction, InterconnectionParams
from .money import DomainError, MoneyLike, to_money
from .topology import (
    LinkKind,
    Rel,
    RelationshipLink,
    Route,
    Topology,
    compute_routes,
    customer_cone,
)

#: Per-unit cost charged to each party when no outside route exists.
DEFAULT_PENALTY = Fraction(100)


@dataclass(frozen=True)
class RateCard:
    internal_cost_rate: Fraction
    transit_price: Fraction

    def __post_init__(self):
        object.__setattr__(self, "internal_cost_rate", to_money(self.internal_cost_rate, "internal_cost_rate"))
        object.__setattr__(self, "transit_price", to_money(self.transit_price, "transit_price"))


Rates = Mapping[str, RateCard]


def rates_of(topology: Topology, overrides: Optional[Rates] = None) -> dict[str, RateCard]:
    rates = {x: RateCard(n.internal_cost_rate, n.transit_price) for x, n in topology.nodes.items()}
    if overrides:
        rates.update(overrides)
    return rates


@dataclass(frozen=True)
class TrafficDemand:
    source: str
    destination: str
    volume: Fraction

    def __post_init__(self):
        object.__setattr__(self, "volume", to_money(self.volume, "volume"))
        if self.volume < 0:
            raise DomainError(f"demand {self.source}->{self.destination} has negative volume")


@dataclass(frozen=True)
class RouteGroup:
    id: str
    exporter: str
    importer: str
    destinations: tuple[str, ...]
    volume: Fraction
    location: str
    flows: tuple[TrafficDemand, ...] = ()

    def __post_init__(self):
        if not self.destinations:
            raise DomainError(f"route group {self.id!r} has no destinations")
        object.__setattr__(self, "destinations", tuple(sorted(self.destinations)))
        object.__setattr__(self, "volume", to_money(self.volume, "volume"))


@dataclass(frozen=True)
class FlowCostBreakdown:
    internal: Fraction = Fraction(0)
    transit_paid: Fraction = Fraction(0)
    transit_revenue: Fraction = Fraction(0)

    @property
    def net(self) -> Fraction:
        return self.internal + self.transit_paid - self.transit_revenue

    def __add__(self, other: "FlowCostBreakdown") -> "FlowCostBreakdown":
        return FlowCostBreakdown(
            self.internal + other.internal,
            self.transit_paid + other.transit_paid,
            self.transit_revenue + other.transit_revenue,
        )


def _resolve_rates(topology: Topology, rates: Optional[Rates]) -> Rates:
    return rates if rates is not None else rates_of(topology)


def _edge_location(topology: Topology, x: str, y: str, overrides: Optional[Mapping[frozenset, str]]) -> str:
    if overrides:
        loc = overrides.get(frozenset((x, y)))
        if loc is not None:
            return loc
    adj = topology.adjacency.get(x, {}).get(y)
    if adj is None:
        raise DomainError(f"route uses {x}-{y} but the topology has no such link")
    # parallel links: the lowest location id carries the cost
    return adj.location


def flow_cost(
    topology: Topology,
    rates: Optional[Rates],
    x: str,
    route: Route,
    volume: MoneyLike,
    link_locations: Optional[Mapping[frozenset, str]] = None,
) -> FlowCostBreakdown:
    """Cost to ``x`` of carrying ``volume`` along ``route``."""
    rates = _resolve_rates(topology, rates)
    path = route.path
    if x not in path:
        raise DomainError(f"{x} is not on the path {'-'.join(path)}")
    volume = to_money(volume, "volume")
    if volume == 0:
        return FlowCostBreakdown()
    i = path.index(x)
    node = topology.node(x)
    card = rates[x]
    segments = 0
    paid = Fraction(0)
    revenue = Fraction(0)
    for j in (i - 1, i + 1):
        if not 0 <= j < len(path):
            continue
        y = path[j]
        segments += node.haul_at(_edge_location(topology, x, y, link_locations))
        rel = topology.relation(x, y)
        if rel is Rel.PROVIDER:
            paid += volume * rates[y].transit_price
        elif rel is Rel.CUSTOMER:
            revenue += volume * card.transit_price
    if i == len(path) - 1:
        segments += topology.destination(route.destination).haul
    internal = card.internal_cost_rate * volume * segments
    return FlowCostBreakdown(internal, paid, revenue)


def direct_topology(topology: Topology, group: RouteGroup) -> Topology:
    """The pair's links replaced by one NashPeer link exporting the group."""
    link = RelationshipLink(
        group.exporter, group.importer, LinkKind.NASH_PEER, group.location,
        export_a=frozenset(group.destinations),
    )
    return topology.without_links(group.exporter, group.importer).with_links([link])


def _flows_by_destination(group: RouteGroup) -> dict[str, list[TrafficDemand]]:
    by_dest: dict[str, list[TrafficDemand]] = {d: [] for d in group.destinations}
    for f in group.flows:
        if f.destination not in by_dest:
            raise DomainError(f"flow to {f.destination} is not in group {group.id}")
        by_dest[f.destination].append(f)
    return by_dest


def direct_costs(topology: Topology, rates: Optional[Rates], group: RouteGroup) -> tuple[Fraction, Fraction]:
    """(c_exporter, c_importer) with the candidate link in place."""
    rates = _resolve_rates(topology, rates)
    topo = direct_topology(topology, group)
    loc = {frozenset((group.exporter, group.importer)): group.location}
    c_exp = c_imp = Fraction(0)
    for dest, flows in _flows_by_destination(group).items():
        routes = compute_routes(topo, dest)
        for f in flows:
            route = routes.get(f.source)
            if route is None:
                raise DomainError(f"destination {dest} unreachable from {f.source} in the direct configuration")
            if group.exporter in route.path:
                c_exp += flow_cost(topo, rates, group.exporter, route, f.volume, loc).net
            if group.importer in route.path:
                c_imp += flow_cost(topo, rates, group.importer, route, f.volume, loc).net
    return c_exp, c_imp


def outside_params(
    topology: Topology,
    rates: Optional[Rates],
    group: RouteGroup,
    penalty: MoneyLike = DEFAULT_PENALTY,
) -> tuple[Fraction, Fraction]:
    """(c'_exporter, c'_importer) with every exporter-importer link removed.

    A flow with no alternative route costs each party ``penalty`` per unit.
    """
    rates = _resolve_rates(topology, rates)
    penalty = to_money(penalty, "penalty")
    topo = topology.without_links(group.exporter, group.importer)
    c_exp = c_imp = Fraction(0)
    for dest, flows in _flows_by_destination(group).items():
        routes = compute_routes(topo, dest)
        for f in flows:
            route = routes.get(f.source)
            if route is None:
                c_exp += penalty * f.volume
                c_imp += penalty * f.volume
                continue
            if group.exporter in route.path:
                c_exp += flow_cost(topo, rates, group.exporter, route, f.volume).net
            if group.importer in route.path:
                c_imp += flow_cost(topo, rates, group.importer, route, f.volume).net
    return c_exp, c_imp


def direct_params(
    topology: Topology,
    rates: Optional[Rates],
    group: RouteGroup,
    penalty: MoneyLike = DEFAULT_PENALTY,
) -> InterconnectionParams:
    """All four parameters of ``group``; role a is the exporter."""
    c_a, c_b = direct_costs(topology, rates, group)
    o_a, o_b = outside_params(topology, rates, group, penalty)
    return InterconnectionParams(
        cost_direct_a=c_a, cost_direct_b=c_b,
        cost_outside_a=o_a, cost_outside_b=o_b,
        volume=group.volume, group_id=group.id, direction=Direction.A_EXPORTS,
        party_a=group.exporter, party_b=group.importer,
    )


def candidate_flows(
    topology: Topology,
    demands: Iterable[TrafficDemand],
    exporter: str,
    importer: str,
) -> dict[str, list[TrafficDemand]]:
    """Importer-side demands towards destinations in the exporter's cone.

    Sources are the importer and its customer cone, excluding anything also
    inside the exporter's cone. Destinations the importer already reaches
    through its own customers are skipped too: a customer route always beats
    a peer route, so the link would never carry them.
    """
    base = topology.without_links(exporter, importer)
    exp_cone = customer_cone(base, exporter)
    full_imp_cone = customer_cone(base, importer)
    imp_cone = full_imp_cone - exp_cone
    flows: dict[str, list[TrafficDemand]] = {}
    for d in demands:
        if d.volume <= 0 or d.source not in imp_cone:
            continue
        dest = topology.destinations.get(d.destination)
        if dest is None or dest.origin not in exp_cone or dest.origin in full_imp_cone:
            continue
        flows.setdefault(d.destination, []).append(d)
    return dict(sorted(flows.items()))


def group_routes(
    topology: Topology,
    rates: Optional[Rates],
    demands: Sequence[TrafficDemand],
    exporter: str,
    importer: str,
    location: str,
    rate_tolerance: Union[MoneyLike, float] = math.inf,
    penalty: MoneyLike = DEFAULT_PENALTY,
) -> list[RouteGroup]:
    """Partition the exporter's demanded destinations into route groups.

    Destinations are visited in id order and placed, first fit, into the
    first group whose every member has all four per-unit parameters within
    ``rate_tolerance`` of the newcomer's.
    """
    if isinstance(rate_tolerance, float) and math.isinf(rate_tolerance):
        tol = None
    else:
        tol = to_money(rate_tolerance, "rate_tolerance")
        if tol < 0:
            raise DomainError("rate_tolerance must be >= 0")
    rates = _resolve_rates(topology, rates)
    flows = candidate_flows(topology, demands, exporter, importer)

    members: list[list[tuple[str, tuple[Fraction, ...]]]] = []
    for dest, dflows in flows.items():
        single = RouteGroup(f"{dest}", exporter, importer, (dest,),
                            sum((f.volume for f in dflows), Fraction(0)), location, tuple(dflows))
        unit = direct_params(topology, rates, single, penalty).per_unit()
        for bucket in members:
            if tol is None or all(
                max(abs(u - v) for u, v in zip(unit, other)) <= tol for _, other in bucket
            ):
                bucket.append((dest, unit))
                break
        else:
            members.append([(dest, unit)])

    groups = []
    for k, bucket in enumerate(members):
        dests = tuple(d for d, _ in bucket)
        gflows = tuple(f for d in dests for f in flows[d])
        groups.append(RouteGroup(
            id=f"{exporter}>{importer}@{location}#{k}",
            exporter=exporter, importer=importer, destinations=dests,
            volume=sum((f.volume for f in gflows), Fraction(0)),
            location=location, flows=gflows,
        ))
    return groups


def merge_groups(groups: Sequence[RouteGroup], group_id: Optional[str] = None) -> RouteGroup:
    if not groups:
        raise DomainError("nothing to merge")
    first = groups[0]
    for g in groups[1:]:
        if (g.exporter, g.importer, g.location) != (first.exporter, first.importer, first.location):
            raise DomainError("can only merge groups of the same pair, direction and location")
    return RouteGroup(
        id=group_id or "+".join(g.id for g in groups),
        exporter=first.exporter, importer=first.importer,
        destinations=tuple(d for g in groups for d in g.destinations),
        volume=sum((g.volume for g in groups), Fraction(0)),
        location=first.location,
        flows=tuple(f for g in groups for f in g.flows),
    )
