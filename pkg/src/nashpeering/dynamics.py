"""Network-wide Nash-Peering link formation.

Candidate pairs are activated one at a time. Each activation re-negotiates
every route group of the pair against the current network with the pair's
own links removed, keeps exporting exactly the groups with positive
surplus, and the network is re-routed before the next pair moves.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .bargain import InterconnectionParams, NetSettlement, Settlement, net_settlement, settle
from .costmodel import (
    DEFAULT_PENALTY,
    RouteGroup,
    TrafficDemand,
    direct_params,
    group_routes,
    rates_of,
)
from .money import DomainError, MoneyLike, quantize_micro
from .topology import LinkKind, RelationshipLink, Topology


class Order(str, enum.Enum):
    ROUND_ROBIN = "round-robin"
    RANDOM = "random"


class Outcome(str, enum.Enum):
    FIXPOINT = "fixpoint"
    CYCLE_DETECTED = "cycle-detected"
    MAX_ROUNDS_EXCEEDED = "max-rounds-exceeded"


class EventKind(str, enum.Enum):
    LINK_FORMED = "link-formed"
    LINK_DROPPED = "link-dropped"
    EXPORTS_CHANGED = "exports-changed"


Pair = tuple[str, str]


@dataclass(frozen=True)
class DynamicsConfig:
    order: Order = Order.ROUND_ROBIN
    max_rounds: int = 20
    seed: int = 0
    rate_tolerance: Union[MoneyLike, float] = math.inf
    # None means every co-located pair not already linked by transit or sf-peering
    candidate_pairs: Optional[tuple[Pair, ...]] = None
    penalty: MoneyLike = DEFAULT_PENALTY

    def __post_init__(self):
        object.__setattr__(self, "order", Order(self.order))
        if self.max_rounds < 1:
            raise DomainError("max_rounds must be >= 1")
        if self.candidate_pairs is not None:
            pairs = tuple(tuple(sorted(p)) for p in self.candidate_pairs)
            object.__setattr__(self, "candidate_pairs", tuple(sorted(set(pairs))))


@dataclass(frozen=True)
class NetworkState:
    topology: Topology
    demands: tuple[TrafficDemand, ...] = ()
    # (a, b, group id) -> latest settlement, a < b
    settlements: Mapping[tuple[str, str, str], Settlement] = field(default_factory=dict)
    round: int = 0

    def nash_exports(self, a: str, b: str) -> tuple[frozenset, frozenset]:
        """Destinations currently exported (a -> b, b -> a) over NashPeer links."""
        out_a: frozenset = frozenset()
        out_b: frozenset = frozenset()
        for link in self.topology.links_between(a, b):
            if link.kind is LinkKind.NASH_PEER:
                out_a |= link.exports_from(a)
                out_b |= link.exports_from(b)
        return out_a, out_b


@dataclass(frozen=True)
class GroupOutcome:
    group: RouteGroup
    params: InterconnectionParams
    settlement: Settlement


@dataclass(frozen=True)
class PairEvaluation:
    a: str
    b: str
    location: str
    groups_a: tuple[GroupOutcome, ...]  # a exports
    groups_b: tuple[GroupOutcome, ...]  # b exports
    current_exports: tuple[frozenset, frozenset]
    proposed_exports: tuple[frozenset, frozenset]
    net: NetSettlement
    current_location: Optional[str] = None

    @property
    def changes(self) -> dict:
        """Per exporter: destinations to add and to remove; plus a relocation
        of the existing link if any. Empty when stable."""
        out: dict = {}
        if any(self.proposed_exports) and self.current_location not in (None, self.location):
            out["location"] = (self.current_location, self.location)
        for who, cur, new in ((self.a, self.current_exports[0], self.proposed_exports[0]),
                              (self.b, self.current_exports[1], self.proposed_exports[1])):
            added, removed = new - cur, cur - new
            if added or removed:
                out[who] = {"add": tuple(sorted(added)), "remove": tuple(sorted(removed))}
        return out

    @property
    def outcomes(self) -> tuple[GroupOutcome, ...]:
        return self.groups_a + self.groups_b

    @property
    def realized_surplus(self) -> Fraction:
        return sum((o.settlement.surplus for o in self.outcomes if o.settlement.agreed), Fraction(0))


@dataclass(frozen=True)
class NegotiationEvent:
    round: int
    a: str
    b: str
    kind: EventKind
    exports_a: tuple[str, ...]
    exports_b: tuple[str, ...]
    surpluses: tuple[tuple[str, Fraction], ...]  # group id -> surplus at application time
    net: Fraction


@dataclass(frozen=True)
class DynamicsReport:
    outcome: Outcome
    rounds_executed: int
    cycle_length: Optional[int]
    event_log: tuple[NegotiationEvent, ...]
    final_state: NetworkState
    config: DynamicsConfig
    state_hashes: tuple[str, ...] = ()


def colocations(topology: Topology, a: str, b: str) -> list[str]:
    return sorted(topology.presence(a) & topology.presence(b))


def _settle_groups(state: NetworkState, groups: Sequence[RouteGroup], penalty) -> tuple[GroupOutcome, ...]:
    rates = rates_of(state.topology)
    out = []
    for g in groups:
        params = direct_params(state.topology, rates, g, penalty)
        out.append(GroupOutcome(g, params, settle(params)))
    return tuple(out)


def evaluate_pair(
    state: NetworkState,
    a: str,
    b: str,
    config: DynamicsConfig = DynamicsConfig(),
    location: Optional[str] = None,
) -> PairEvaluation:
    """Negotiate both directions of ``a``-``b``.

    Without an explicit ``location`` every common exchange point is tried and
    the one realizing the most surplus wins (lowest id on ties).
    """
    topo = state.topology
    topo.node(a)
    topo.node(b)
    if a == b:
        raise DomainError("a pair needs two distinct ASes")
    common = colocations(topo, a, b)
    if not common:
        raise DomainError(f"{a} and {b} are not co-located at any exchange point")
    if location is not None:
        if location not in common:
            raise DomainError(f"{a} and {b} are not both present at {location}")
        return _evaluate_at(state, a, b, location, config)
    best = None
    for loc in common:
        ev = _evaluate_at(state, a, b, loc, config)
        if best is None or ev.realized_surplus > best.realized_surplus:
            best = ev
    return best


def _evaluate_at(state: NetworkState, a: str, b: str, location: str, config: DynamicsConfig) -> PairEvaluation:
    topo = state.topology
    rates = rates_of(topo)
    groups_a = group_routes(topo, rates, state.demands, a, b, location, config.rate_tolerance, config.penalty)
    groups_b = group_routes(topo, rates, state.demands, b, a, location, config.rate_tolerance, config.penalty)
    out_a = _settle_groups(state, groups_a, config.penalty)
    out_b = _settle_groups(state, groups_b, config.penalty)
    proposed = (
        frozenset(d for o in out_a if o.settlement.agreed for d in o.group.destinations),
        frozenset(d for o in out_b if o.settlement.agreed for d in o.group.destinations),
    )
    net = net_settlement([o.settlement for o in out_a], [o.settlement for o in out_b])
    current = [l.location for l in topo.links_between(a, b) if l.kind is LinkKind.NASH_PEER]
    return PairEvaluation(a, b, location, out_a, out_b, state.nash_exports(a, b), proposed, net,
                          current[0] if current else None)


def candidate_pairs(state: NetworkState, config: DynamicsConfig) -> list[Pair]:
    topo = state.topology
    if config.candidate_pairs is not None:
        pairs = list(config.candidate_pairs)
        for a, b in pairs:
            kinds = {l.kind for l in topo.links_between(a, b)}
            if kinds - {LinkKind.NASH_PEER}:
                raise DomainError(f"candidate pair {a}-{b} is already linked by {sorted(k.value for k in kinds)}")
            if not colocations(topo, a, b):
                raise DomainError(f"candidate pair {a}-{b} is not co-located")
        return pairs
    ids = sorted(topo.nodes)
    pairs = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            kinds = {l.kind for l in topo.links_between(a, b)}
            if kinds - {LinkKind.NASH_PEER}:
                continue
            if colocations(topo, a, b):
                pairs.append((a, b))
    return pairs


def _apply(state: NetworkState, ev: PairEvaluation) -> NetworkState:
    a, b = ev.a, ev.b
    topo = state.topology.without_links(a, b)
    exp_a, exp_b = ev.proposed_exports
    if exp_a or exp_b:
        topo = topo.with_links([RelationshipLink(a, b, LinkKind.NASH_PEER, ev.location, exp_a, exp_b)])
    settlements = {k: v for k, v in state.settlements.items() if k[:2] != (a, b)}
    for o in ev.outcomes:
        settlements[(a, b, o.group.id)] = o.settlement
    return NetworkState(topo, state.demands, dict(sorted(settlements.items())), state.round)


def _event(round_no: int, ev: PairEvaluation) -> Optional[NegotiationEvent]:
    if not ev.changes:
        return None
    had = any(ev.current_exports)
    has = any(ev.proposed_exports)
    if not had and has:
        kind = EventKind.LINK_FORMED
    elif had and not has:
        kind = EventKind.LINK_DROPPED
    else:
        kind = EventKind.EXPORTS_CHANGED
    return NegotiationEvent(
        round=round_no, a=ev.a, b=ev.b, kind=kind,
        exports_a=tuple(sorted(ev.proposed_exports[0])),
        exports_b=tuple(sorted(ev.proposed_exports[1])),
        surpluses=tuple((o.group.id, o.settlement.surplus) for o in ev.outcomes),
        net=ev.net.net,
    )


def pair_order(pairs: list[Pair], config: DynamicsConfig, round_no: int) -> list[Pair]:
    pairs = sorted(pairs)
    if config.order is Order.RANDOM:
        random.Random(f"{config.seed}:{round_no}").shuffle(pairs)
    return pairs


def step(state: NetworkState, config: DynamicsConfig) -> tuple[NetworkState, list[NegotiationEvent]]:
    """One round: every candidate pair moves once, in the configured order."""
    round_no = state.round + 1
    events = []
    for a, b in pair_order(candidate_pairs(state, config), config, round_no):
        ev = evaluate_pair(state, a, b, config)
        event = _event(round_no, ev)
        # settlements are refreshed even when exports stay put
        state = _apply(state, ev)
        if event is not None:
            events.append(event)
    return NetworkState(state.topology, state.demands, state.settlements, round_no), events


def state_hash(state: NetworkState) -> str:
    """Digest of links, export sets and micro-unit-quantized prices."""
    links = [
        [l.a, l.b, l.kind.value, l.location, sorted(l.export_a), sorted(l.export_b)]
        for l in state.topology.links
    ]
    prices = [[a, b, g, quantize_micro(s.price), s.agreed] for (a, b, g), s in sorted(state.settlements.items())]
    blob = json.dumps({"links": links, "prices": prices}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def run(initial: NetworkState, config: DynamicsConfig = DynamicsConfig()) -> DynamicsReport:
    state = initial
    seen = {state_hash(state): state.round}
    hashes = [state_hash(state)]
    log: list[NegotiationEvent] = []
    for _ in range(config.max_rounds):
        state, events = step(state, config)
        log.extend(events)
        h = state_hash(state)
        hashes.append(h)
        if not events:
            return DynamicsReport(Outcome.FIXPOINT, state.round, None, tuple(log), state, config, tuple(hashes))
        if h in seen:
            return DynamicsReport(Outcome.CYCLE_DETECTED, state.round, state.round - seen[h],
                                  tuple(log), state, config, tuple(hashes))
        seen[h] = state.round
    return DynamicsReport(Outcome.MAX_ROUNDS_EXCEEDED, state.round, None, tuple(log), state, config, tuple(hashes))
