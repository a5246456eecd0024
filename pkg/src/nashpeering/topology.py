"""AS-level topology, customer cones and valley-free policy routing."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional

import networkx as nx

from .money import DomainError, to_money

DEFAULT_LOCATION = "default"


class Role(str, enum.Enum):
    TRANSIT = "transit"
    ACCESS = "access"
    CONTENT = "content"
    ENTERPRISE = "enterprise"


class LinkKind(str, enum.Enum):
    CUSTOMER_PROVIDER = "customer-provider"  # a is the customer of b
    SF_PEER = "sf-peer"
    NASH_PEER = "nash-peer"


class Rel(str, enum.Enum):
    """What a neighbor is to a given AS."""

    CUSTOMER = "customer"
    PROVIDER = "provider"
    SF_PEER = "sf-peer"
    NASH_PEER = "nash-peer"


class RouteKind(str, enum.Enum):
    """How an AS learned its route; ORIGIN for the originator itself."""

    ORIGIN = "origin"
    CUSTOMER = "customer"
    SF_PEER = "sf-peer"
    NASH_PEER = "nash-peer"
    PROVIDER = "provider"

    @property
    def rank(self) -> int:
        return _RANK[self]

    @property
    def exportable_to_all(self) -> bool:
        return self in (RouteKind.ORIGIN, RouteKind.CUSTOMER)


_RANK = {
    RouteKind.ORIGIN: 0,
    RouteKind.CUSTOMER: 1,
    RouteKind.SF_PEER: 2,
    RouteKind.NASH_PEER: 2,
    RouteKind.PROVIDER: 3,
}

_REL_TO_ROUTE = {
    Rel.CUSTOMER: RouteKind.CUSTOMER,
    Rel.PROVIDER: RouteKind.PROVIDER,
    Rel.SF_PEER: RouteKind.SF_PEER,
    Rel.NASH_PEER: RouteKind.NASH_PEER,
}


@dataclass(frozen=True)
class AsNode:
    id: str
    role: Role = Role.TRANSIT
    internal_cost_rate: Fraction = Fraction(0)
    transit_price: Fraction = Fraction(0)
    # exchange points where the AS is present in addition to its link locations
    locations: frozenset = frozenset()
    # internal segments needed to reach an interconnection at a location; 1 if absent
    haul: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "internal_cost_rate", to_money(self.internal_cost_rate, "internal_cost_rate"))
        object.__setattr__(self, "transit_price", to_money(self.transit_price, "transit_price"))
        object.__setattr__(self, "locations", frozenset(self.locations))
        object.__setattr__(self, "haul", dict(self.haul))

    def haul_at(self, location: str) -> int:
        return self.haul.get(location, 1)


@dataclass(frozen=True)
class RelationshipLink:
    a: str
    b: str
    kind: LinkKind
    location: str = DEFAULT_LOCATION
    # NashPeer only: destinations a exports to b, and b exports to a
    export_a: frozenset = frozenset()
    export_b: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "kind", LinkKind(self.kind))
        object.__setattr__(self, "export_a", frozenset(self.export_a))
        object.__setattr__(self, "export_b", frozenset(self.export_b))

    @property
    def pair(self) -> frozenset:
        return frozenset((self.a, self.b))

    def exports_from(self, x: str) -> frozenset:
        if x == self.a:
            return self.export_a
        if x == self.b:
            return self.export_b
        raise DomainError(f"{x} is not an endpoint of link {self.a}-{self.b}")

    def sort_key(self):
        return (min(self.a, self.b), max(self.a, self.b), self.location, self.kind.value)


@dataclass(frozen=True)
class Destination:
    id: str
    origin: str
    # extra internal segments the originator hauls to deliver this destination
    haul: int = 0


@dataclass(frozen=True)
class Adjacency:
    """One neighbor as seen from an AS; parallel links collapse into one."""

    neighbor: str
    rel: Rel
    locations: tuple[str, ...]
    exports_out: frozenset  # NashPeer: destinations this AS exports to the neighbor
    exports_in: frozenset  # NashPeer: destinations the neighbor exports to this AS

    @property
    def location(self) -> str:
        return self.locations[0]


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class Route:
    destination: str
    path: tuple[str, ...]
    first_hop_kind: RouteKind

    @property
    def next_hop(self) -> Optional[str]:
        return self.path[1] if len(self.path) > 1 else None

    def preference_key(self):
        """Smaller is better: relationship class, then length, then neighbor id."""
        return (self.first_hop_kind.rank, len(self.path), self.next_hop or "")


class Topology:
    """Immutable AS graph. Derived views are cached per instance."""

    def __init__(
        self,
        nodes: Iterable[AsNode] = (),
        links: Iterable[RelationshipLink] = (),
        destinations: Iterable[Destination] = (),
    ):
        self._nodes = {}
        self._duplicate_ids = []
        for n in nodes:
            if n.id in self._nodes:
                self._duplicate_ids.append(n.id)
            self._nodes[n.id] = n
        self._links = tuple(sorted(links, key=RelationshipLink.sort_key))
        self._destinations = {}
        for d in destinations:
            self._destinations[d.id] = d
        self._route_cache: dict[str, dict[str, Route]] = {}

    @property
    def nodes(self) -> Mapping[str, AsNode]:
        return self._nodes

    @property
    def links(self) -> tuple[RelationshipLink, ...]:
        return self._links

    @property
    def destinations(self) -> Mapping[str, Destination]:
        return self._destinations

    def node(self, x: str) -> AsNode:
        try:
            return self._nodes[x]
        except KeyError:
            raise DomainError(f"unknown AS {x!r}") from None

    def destination(self, dest: str) -> Destination:
        try:
            return self._destinations[dest]
        except KeyError:
            raise DomainError(f"unknown destination {dest!r}") from None

    # -- derived structure -------------------------------------------------

    @cached_property
    def adjacency(self) -> dict[str, dict[str, Adjacency]]:
        grouped: dict[frozenset, list[RelationshipLink]] = {}
        for link in self._links:
            grouped.setdefault(link.pair, []).append(link)
        adj: dict[str, dict[str, Adjacency]] = {x: {} for x in self._nodes}
        for pair, links in grouped.items():
            if len(pair) != 2 or not pair <= self._nodes.keys():
                continue
            kinds = {(l.kind, l.a if l.kind is LinkKind.CUSTOMER_PROVIDER else None) for l in links}
            if len(kinds) > 1:
                continue  # reported by validate(); ambiguous, so not routed
            kind = links[0].kind
            locs = tuple(sorted({l.location for l in links}))
            for x in pair:
                (y,) = pair - {x}
                if kind is LinkKind.CUSTOMER_PROVIDER:
                    customer = links[0].a
                    rel = Rel.PROVIDER if x == customer else Rel.CUSTOMER
                elif kind is LinkKind.SF_PEER:
                    rel = Rel.SF_PEER
                else:
                    rel = Rel.NASH_PEER
                out = frozenset().union(*(l.exports_from(x) for l in links)) if rel is Rel.NASH_PEER else frozenset()
                inn = frozenset().union(*(l.exports_from(y) for l in links)) if rel is Rel.NASH_PEER else frozenset()
                adj[x][y] = Adjacency(y, rel, locs, out, inn)
        return {x: dict(sorted(nbrs.items())) for x, nbrs in adj.items()}

    @cached_property
    def provider_graph(self) -> nx.DiGraph:
        """Directed customer -> provider edges."""
        g = nx.DiGraph()
        g.add_nodes_from(self._nodes)
        for link in self._links:
            if link.kind is LinkKind.CUSTOMER_PROVIDER:
                g.add_edge(link.a, link.b)
        return g

    def neighbors(self, x: str, rel: Optional[Rel] = None) -> list[str]:
        nbrs = self.adjacency.get(x, {})
        return [y for y, adj in nbrs.items() if rel is None or adj.rel is rel]

    def relation(self, x: str, y: str) -> Optional[Rel]:
        adj = self.adjacency.get(x, {}).get(y)
        return adj.rel if adj else None

    def presence(self, x: str) -> frozenset:
        node = self.node(x)
        locs = set(node.locations)
        for link in self._links:
            if x in (link.a, link.b):
                locs.add(link.location)
        return frozenset(locs)

    def links_between(self, a: str, b: str) -> list[RelationshipLink]:
        pair = frozenset((a, b))
        return [l for l in self._links if l.pair == pair]

    # -- functional updates ------------------------------------------------

    def without_links(self, a: str, b: str) -> "Topology":
        pair = frozenset((a, b))
        return Topology(self._nodes.values(), [l for l in self._links if l.pair != pair], self._destinations.values())

    def with_links(self, links: Iterable[RelationshipLink]) -> "Topology":
        return Topology(self._nodes.values(), [*self._links, *links], self._destinations.values())

    def with_nodes(self, nodes: Iterable[AsNode]) -> "Topology":
        merged = dict(self._nodes)
        for n in nodes:
            merged[n.id] = n
        return Topology(merged.values(), self._links, self._destinations.values())

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return (self._nodes == other._nodes and self._links == other._links
                and self._destinations == other._destinations)

    __hash__ = None

    def __repr__(self):
        return f"Topology({len(self._nodes)} ASes, {len(self._links)} links, {len(self._destinations)} destinations)"


def validate(topology: Topology) -> list[Diagnostic]:
    """Check the structural invariants; an empty list means valid."""
    diags: list[Diagnostic] = []
    nodes = topology.nodes
    for dup in topology._duplicate_ids:
        diags.append(Diagnostic("duplicate-as", f"AS id {dup} defined more than once", (dup,)))
    for n in nodes.values():
        if n.internal_cost_rate < 0 or n.transit_price < 0:
            diags.append(Diagnostic("negative-rate", f"AS {n.id} has a negative cost rate or price", (n.id,)))
        for loc, segs in n.haul.items():
            if segs < 0:
                diags.append(Diagnostic("negative-haul", f"AS {n.id} has negative haul at {loc}", (n.id,)))
    seen: dict[tuple, RelationshipLink] = {}
    kinds: dict[frozenset, set] = {}
    for link in topology.links:
        ids = (link.a, link.b)
        if link.a == link.b:
            diags.append(Diagnostic("self-link", f"link from {link.a} to itself", ids))
            continue
        missing = [x for x in ids if x not in nodes]
        if missing:
            diags.append(Diagnostic("unknown-endpoint", f"link {link.a}-{link.b} references unknown AS {', '.join(missing)}", tuple(missing)))
        key = (link.pair, link.location)
        if key in seen:
            diags.append(Diagnostic("duplicate-link", f"more than one link between {link.a} and {link.b} at {link.location}", ids))
        seen[key] = link
        kinds.setdefault(link.pair, set()).add((link.kind, link.a if link.kind is LinkKind.CUSTOMER_PROVIDER else None))
        if link.kind is not LinkKind.NASH_PEER and (link.export_a or link.export_b):
            diags.append(Diagnostic("export-set-on-non-nash", f"link {link.a}-{link.b} carries export sets but is {link.kind.value}", ids))
        unknown = sorted((link.export_a | link.export_b) - topology.destinations.keys())
        if unknown:
            diags.append(Diagnostic("unknown-export-destination", f"link {link.a}-{link.b} exports unknown destinations {unknown}", tuple(unknown)))
    for pair, ks in kinds.items():
        if len(ks) > 1:
            ids = tuple(sorted(pair))
            diags.append(Diagnostic("conflicting-relationships", f"pair {ids[0]}-{ids[1]} has links of different kinds or orientations", ids))
    try:
        cycle = nx.find_cycle(topology.provider_graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        ids = tuple(u for u, _ in cycle)
        diags.append(Diagnostic("provider-cycle", f"customer-provider cycle: {' -> '.join(ids + ids[:1])}", ids))
    for d in topology.destinations.values():
        if d.origin not in nodes:
            diags.append(Diagnostic("dangling-origin", f"destination {d.id} originated by unknown AS {d.origin}", (d.id, d.origin)))
        if d.haul < 0:
            diags.append(Diagnostic("negative-haul", f"destination {d.id} has negative haul", (d.id,)))
    return diags


def customer_cone(topology: Topology, x: str) -> frozenset:
    """``x`` plus everything reachable by descending provider->customer edges."""
    topology.node(x)
    # customer->provider edges, so the cone is x's ancestors
    return frozenset(nx.ancestors(topology.provider_graph, x)) | {x}


def compute_routes(topology: Topology, dest: str) -> dict[str, Route]:
    """Best route of every AS towards ``dest`` under Gao-Rexford policies.

    Preference is customer > peer (sf or Nash) > provider, then shorter
    AS path, then lower neighbor id. Customer-learned routes are exported to
    everyone, peer- and provider-learned routes only to customers. A NashPeer
    link carries a destination only if it is in the exporter's negotiated
    export set and the exporter itself learned it from a customer (or
    originates it). ASes without any route are absent from the result.
    """
    cached = topology._route_cache.get(dest)
    if cached is not None:
        return dict(cached)
    origin = topology.destination(dest).origin
    if origin not in topology.nodes:
        raise DomainError(f"destination {dest!r} originated by unknown AS {origin!r}")
    adj = topology.adjacency
    best: dict[str, Route] = {origin: Route(dest, (origin,), RouteKind.ORIGIN)}

    # customer routes climb customer->provider edges; pop order = (length, via id)
    heap = [(2, origin, p) for p, a in adj[origin].items() if a.rel is Rel.PROVIDER]
    heapq.heapify(heap)
    while heap:
        length, via, x = heapq.heappop(heap)
        if x in best:
            continue
        best[x] = Route(dest, (x,) + best[via].path, RouteKind.CUSTOMER)
        for p, a in adj[x].items():
            if a.rel is Rel.PROVIDER and p not in best:
                heapq.heappush(heap, (length + 1, x, p))

    # one peer hop from an AS holding a customer (or own) route
    peer_routes: dict[str, Route] = {}
    for y, route in best.items():
        for x, a in adj[y].items():
            if x in best:
                continue
            if a.rel is Rel.SF_PEER:
                kind = RouteKind.SF_PEER
            elif a.rel is Rel.NASH_PEER and dest in a.exports_out:
                kind = RouteKind.NASH_PEER
            else:
                continue
            cand = Route(dest, (x,) + route.path, kind)
            cur = peer_routes.get(x)
            if cur is None or cand.preference_key() < cur.preference_key():
                peer_routes[x] = cand
    best.update(peer_routes)

    # everything flows down to customers
    heap = []
    for y, route in best.items():
        for c, a in adj[y].items():
            if a.rel is Rel.CUSTOMER and c not in best:
                heap.append((len(route.path) + 1, y, c))
    heapq.heapify(heap)
    while heap:
        length, via, x = heapq.heappop(heap)
        if x in best:
            continue
        best[x] = Route(dest, (x,) + best[via].path, RouteKind.PROVIDER)
        for c, a in adj[x].items():
            if a.rel is Rel.CUSTOMER and c not in best:
                heapq.heappush(heap, (length + 1, x, c))

    result = dict(sorted(best.items()))
    topology._route_cache[dest] = result
    return dict(result)


def routes_without_link(topology: Topology, a: str, b: str, dest: str) -> dict[str, Route]:
    """Routes after removing every link between ``a`` and ``b``."""
    return compute_routes(topology.without_links(a, b), dest)


def is_exportable(topology: Topology, path: tuple[str, ...], dest: str) -> bool:
    """Replay the export rules hop by hop along ``path`` (source first).

    True iff every AS on the path was allowed to announce its suffix route to
    the AS before it. This is the valley-free check.
    """
    if not path or len(set(path)) != len(path):
        return False
    if topology.destination(dest).origin != path[-1]:
        return False
    kind = RouteKind.ORIGIN
    for i in range(len(path) - 1, 0, -1):
        exporter, importer = path[i], path[i - 1]
        adj = topology.adjacency.get(exporter, {}).get(importer)
        if adj is None:
            return False
        # adj.rel: what the importer is to the exporter
        if adj.rel is not Rel.CUSTOMER and not kind.exportable_to_all:
            return False
        if adj.rel is Rel.NASH_PEER and dest not in adj.exports_out:
            return False
        kind = _REL_TO_ROUTE[topology.relation(importer, exporter)]
    return True


def route_kind_of_path(topology: Topology, path: tuple[str, ...]) -> RouteKind:
    if len(path) == 1:
        return RouteKind.ORIGIN
    return _REL_TO_ROUTE[topology.relation(path[0], path[1])]
