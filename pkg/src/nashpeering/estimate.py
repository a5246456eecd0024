"""One-sided estimation of a prospective peer's interconnection parameters.

The estimator only sees :class:`Observables`: relationship data, customer
cones, measured AS paths, published transit prices and prefix origins.
:func:`observe` is the simulator side that produces them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .bargain import InterconnectionParams
from .costmodel import DEFAULT_PENALTY, RateCard, RouteGroup
from .money import MONEY_UNIT, DomainError, MoneyLike, to_money
from .topology import LinkKind, Topology, compute_routes, customer_cone


class Basis(str, enum.Enum):
    CUSTOMER_OR_PEER_REACH = "customer-or-peer-reach"
    PROVIDER_TRANSIT = "provider-transit"
    UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class Observables:
    # (a, b, kind); for customer-provider links a is the customer
    relationships: frozenset
    customer_cones: Mapping[str, frozenset]
    # (source, destination) -> AS path, source first; taken without the negotiating pair's links
    measured_paths: Mapping[tuple[str, str], tuple[str, ...]]
    transit_prices: Mapping[str, Fraction]
    origins: Mapping[str, str]
    # (exporter, importer) -> announced destinations over NashPeer links
    nash_exports: Mapping[tuple[str, str], frozenset] = field(default_factory=dict)

    def providers(self, x: str) -> list[str]:
        return sorted(b for a, b, k in self.relationships if k is LinkKind.CUSTOMER_PROVIDER and a == x)

    def customers(self, x: str) -> list[str]:
        return sorted(a for a, b, k in self.relationships if k is LinkKind.CUSTOMER_PROVIDER and b == x)

    def peers(self, x: str) -> list[tuple[str, LinkKind]]:
        out = []
        for a, b, k in self.relationships:
            if k is LinkKind.CUSTOMER_PROVIDER:
                continue
            if a == x:
                out.append((b, k))
            elif b == x:
                out.append((a, k))
        return sorted(out)

    def knows(self, x: str) -> bool:
        return x in self.customer_cones or any(x in (a, b) for a, b, _ in self.relationships)


@dataclass(frozen=True)
class Degradation:
    """Ways to make observables less complete, for robustness studies."""

    truncate_paths: Optional[int] = None  # keep only the first n hops
    stale_cones: bool = False  # cones shrink to the AS itself

    @classmethod
    def parse(cls, spec: Optional[str]) -> "Degradation":
        if not spec:
            return cls()
        truncate = None
        stale = False
        for part in spec.split(","):
            part = part.strip()
            if part.startswith("truncate="):
                truncate = int(part.split("=", 1)[1])
                if truncate < 1:
                    raise DomainError("truncate must be >= 1")
            elif part == "stale-cones":
                stale = True
            elif part:
                raise DomainError(f"unknown degradation {part!r}; use truncate=<n> or stale-cones")
        return cls(truncate, stale)


def observe(
    topology: Topology,
    sources: Iterable[str],
    destinations: Iterable[str],
    exclude_pair: Optional[tuple[str, str]] = None,
    degrade: Degradation = Degradation(),
) -> Observables:
    """What public data and measurements would reveal about ``topology``.

    Paths are measured with ``exclude_pair``'s links removed, i.e. in the
    network as it is before the pair interconnects.
    """
    topo = topology.without_links(*exclude_pair) if exclude_pair else topology
    rels = set()
    nash = {}
    for l in topo.links:
        rels.add((l.a, l.b, l.kind))
        if l.kind is LinkKind.NASH_PEER:
            nash[(l.a, l.b)] = nash.get((l.a, l.b), frozenset()) | l.export_a
            nash[(l.b, l.a)] = nash.get((l.b, l.a), frozenset()) | l.export_b
    if degrade.stale_cones:
        cones = {x: frozenset({x}) for x in topo.nodes}
    else:
        cones = {x: customer_cone(topo, x) for x in topo.nodes}
    paths = {}
    sources = sorted(set(sources))
    for d in sorted(set(destinations)):
        routes = compute_routes(topo, d)
        for s in sources:
            r = routes.get(s)
            if r is None:
                continue
            path = r.path
            if degrade.truncate_paths is not None:
                path = path[: degrade.truncate_paths]
            paths[(s, d)] = path
    return Observables(
        relationships=frozenset(rels),
        customer_cones=cones,
        measured_paths=paths,
        transit_prices={x: n.transit_price for x, n in topo.nodes.items()},
        origins={d: dest.origin for d, dest in topo.destinations.items()},
        nash_exports=nash,
    )


def infer_outside_basis(obs: Observables, b: str, dest: str, exclude: Optional[str] = None) -> Basis:
    """How ``b`` would reach ``dest`` without its link to ``exclude``."""
    if not obs.knows(b):
        raise DomainError(f"unknown AS {b!r}")
    origin = obs.origins.get(dest)
    if origin is None:
        return Basis.UNREACHABLE
    if origin in obs.customer_cones.get(b, frozenset({b})):
        return Basis.CUSTOMER_OR_PEER_REACH
    for peer, kind in obs.peers(b):
        if peer == exclude:
            continue
        if origin not in obs.customer_cones.get(peer, frozenset({peer})):
            continue
        if kind is LinkKind.SF_PEER or dest in obs.nash_exports.get((peer, b), frozenset()):
            return Basis.CUSTOMER_OR_PEER_REACH
    if [p for p in obs.providers(b) if p != exclude]:
        return Basis.PROVIDER_TRANSIT
    return Basis.UNREACHABLE


def _path_cost(obs: Observables, rate: Fraction, b: str, path: tuple[str, ...], volume: Fraction) -> Fraction:
    """Estimator's cost model applied to ``b``'s position on ``path``."""
    i = path.index(b)
    providers = set(obs.providers(b))
    customers = set(obs.customers(b))
    own_price = obs.transit_prices.get(b, Fraction(0))
    cost = Fraction(0)
    for j in (i - 1, i + 1):
        if not 0 <= j < len(path):
            continue
        y = path[j]
        cost += rate * volume  # one segment per adjacent interconnection
        if y in providers:
            cost += volume * obs.transit_prices.get(y, Fraction(0))
        elif y in customers:
            cost -= volume * own_price
    return cost


def _direct_path(obs: Observables, group: RouteGroup, source: str, dest: str) -> tuple[str, ...]:
    if source != group.importer:
        raise DomainError(f"estimation covers importer-originated flows only; {source} is not {group.importer}")
    tail = obs.measured_paths.get((group.exporter, dest))
    if tail is None or tail[0] != group.exporter:
        raise DomainError(f"no measured path from {group.exporter} to {dest}")
    return (source,) + tuple(tail)


def estimate_internal_cost(obs: Observables, estimator_rates: RateCard, b: str, group: RouteGroup) -> Fraction:
    """Internal cost of ``b`` for ``group`` over the direct interconnection.

    ``b``'s ingress/egress comes from the measured paths; each adjacent
    interconnection is priced at the estimator's own internal rate.
    """
    total = Fraction(0)
    for f in group.flows:
        path = _direct_path(obs, group, f.source, f.destination)
        if b not in path:
            raise DomainError(f"measured path {'-'.join(path)} does not cover {b}")
        i = path.index(b)
        segments = sum(1 for j in (i - 1, i + 1) if 0 <= j < len(path))
        total += estimator_rates.internal_cost_rate * f.volume * segments
    return total


def estimate_direct_cost(obs: Observables, estimator_rates: RateCard, b: str, group: RouteGroup) -> Fraction:
    total = Fraction(0)
    for f in group.flows:
        path = _direct_path(obs, group, f.source, f.destination)
        if b not in path:
            raise DomainError(f"measured path {'-'.join(path)} does not cover {b}")
        total += _path_cost(obs, estimator_rates.internal_cost_rate, b, path, f.volume)
    return total


def estimate_outside_cost(
    obs: Observables,
    estimator_rates: RateCard,
    b: str,
    group: RouteGroup,
    penalty: MoneyLike = DEFAULT_PENALTY,
) -> tuple[Fraction, dict[str, Basis]]:
    """Estimated c' of ``b`` for ``group`` and the basis per destination.

    Unreachable destinations are flagged and charged ``penalty`` per unit.
    """
    penalty = to_money(penalty, "penalty")
    other = group.exporter if b == group.importer else group.importer
    bases: dict[str, Basis] = {}
    total = Fraction(0)
    for f in group.flows:
        basis = infer_outside_basis(obs, b, f.destination, exclude=other)
        path = obs.measured_paths.get((f.source, f.destination))
        if path is None:
            # both sides of a cut-off flow pay the disconnection penalty
            basis = Basis.UNREACHABLE
            total += penalty * f.volume
        elif b in path:
            total += _path_cost(obs, estimator_rates.internal_cost_rate, b, path, f.volume)
        bases[f.destination] = basis
    return total, bases


@dataclass(frozen=True)
class ParamEstimate:
    party: str
    group_id: str
    est_cost_outside: Fraction
    est_cost_direct: Fraction
    basis: Basis
    assumptions: tuple[str, ...] = ("cost-symmetry", "unit-haul")
    per_destination_basis: Mapping[str, Basis] = field(default_factory=dict)
    flagged: tuple[str, ...] = ()


def estimate_params(
    obs: Observables,
    estimator_rates: RateCard,
    b: str,
    group: RouteGroup,
    penalty: MoneyLike = DEFAULT_PENALTY,
) -> ParamEstimate:
    if b not in (group.exporter, group.importer):
        raise DomainError(f"{b} is not a party of group {group.id}")
    outside, bases = estimate_outside_cost(obs, estimator_rates, b, group, penalty)
    direct = estimate_direct_cost(obs, estimator_rates, b, group)
    values = set(bases.values())
    if Basis.UNREACHABLE in values:
        basis = Basis.UNREACHABLE
    elif Basis.PROVIDER_TRANSIT in values:
        basis = Basis.PROVIDER_TRANSIT
    else:
        basis = Basis.CUSTOMER_OR_PEER_REACH
    flagged = tuple(sorted(d for d, v in bases.items() if v is Basis.UNREACHABLE))
    return ParamEstimate(b, group.id, outside, direct, basis, per_destination_basis=bases, flagged=flagged)


@dataclass(frozen=True)
class EstimationError:
    absolute_direct: Fraction
    absolute_outside: Fraction
    relative_direct: Fraction
    relative_outside: Fraction


def estimation_error(
    estimate: ParamEstimate,
    truth: InterconnectionParams,
    epsilon: MoneyLike = MONEY_UNIT,
) -> EstimationError:
    """Per-term absolute error and error relative to max(|truth|, epsilon)."""
    eps = to_money(epsilon, "epsilon")
    if estimate.party == truth.party_a:
        c, o = truth.cost_direct_a, truth.cost_outside_a
    elif estimate.party == truth.party_b:
        c, o = truth.cost_direct_b, truth.cost_outside_b
    elif truth.party_a is None and truth.party_b is None:
        c, o = truth.cost_direct_b, truth.cost_outside_b
    else:
        raise DomainError(f"{estimate.party} is not a party of the ground-truth parameters")
    abs_c = abs(estimate.est_cost_direct - c)
    abs_o = abs(estimate.est_cost_outside - o)
    return EstimationError(abs_c, abs_o, abs_c / max(abs(c), eps), abs_o / max(abs(o), eps))
