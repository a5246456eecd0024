"""Small hand-built worlds shared by scenarios, the CLI and the tests."""

from __future__ import annotations

from fractions import Fraction as F

from .costmodel import TrafficDemand
from .dynamics import NetworkState
from .topology import AsNode, Destination, LinkKind, RelationshipLink, Role, Topology

CP = LinkKind.CUSTOMER_PROVIDER
SF = LinkKind.SF_PEER
NASH = LinkKind.NASH_PEER


def three_as_transit() -> NetworkState:
    """A and B buy transit from C and meet at exchange IX.

    B hauls 4 segments to reach C, so its outside option is expensive. With
    10 units from B to A's prefix the A-exports group has c_A = c_B = 2,
    c'_A = 4, c'_B = 10.
    """
    rate = F(1, 5)
    topo = Topology(
        [
            AsNode("A", Role.ACCESS, rate, 0, locations={"IX"}),
            AsNode("B", Role.CONTENT, rate, 0, locations={"IX"}, haul={"C-pop-B": 4}),
            AsNode("C", Role.TRANSIT, rate, F(1, 5)),
        ],
        [
            RelationshipLink("A", "C", CP, "C-pop-A"),
            RelationshipLink("B", "C", CP, "C-pop-B"),
        ],
        [Destination("dA", "A"), Destination("dB", "B")],
    )
    return NetworkState(topo, (TrafficDemand("B", "dA", 10),))


def common_provider(price=F(1, 2), rate=F(1, 10), volume=10) -> NetworkState:
    """A and B single-homed to C; direct link possible at IX, one hop each side."""
    topo = Topology(
        [
            AsNode("A", Role.ACCESS, rate, 0, locations={"IX"}),
            AsNode("B", Role.ACCESS, rate, 0, locations={"IX"}),
            AsNode("C", Role.TRANSIT, rate, price),
        ],
        [RelationshipLink("A", "C", CP, "C-pop-A"), RelationshipLink("B", "C", CP, "C-pop-B")],
        [Destination("dA", "A"), Destination("dB", "B")],
    )
    return NetworkState(topo, (TrafficDemand("B", "dA", volume),))


def oscillator(start_with_p2: bool = False) -> NetworkState:
    """Two pairs whose Nash-Peering links undo each other.

    P1 = (A, B), P2 = (B, D); 10 units flow from B to A's prefix dA. A buys
    transit from X (price 3) and D (price 10); B buys from X.

    * P1 gains only when B's fallback is the peer route through D, i.e. when
      the B-D link exists (surplus -30 without it, +10 with it).
    * P2 gains only when B's fallback is transit through X, i.e. when the
      A-B link is absent (surplus +20 without it; with it B keeps its
      shorter route via A, the B-D link carries nothing and the surplus is 0).

    Each transit link sits at its own location so that the only exchange
    points the pairs share are IX1 (A, B) and IX2 (B, D).
    """
    topo = Topology(
        [
            AsNode("A", Role.ACCESS, 1, 0, locations={"IX1"}, haul={"IX1": 10}),
            AsNode("B", Role.CONTENT, 1, 0, locations={"IX1", "IX2"}),
            AsNode("D", Role.TRANSIT, F(11, 2), 10, locations={"IX2"}),
            AsNode("X", Role.TRANSIT, 1, 3),
        ],
        [
            RelationshipLink("A", "X", CP, "LX-A"),
            RelationshipLink("B", "X", CP, "LX-B"),
            RelationshipLink("A", "D", CP, "LD"),
        ],
        [Destination("dA", "A")],
    )
    if start_with_p2:
        topo = topo.with_links([RelationshipLink("B", "D", NASH, "IX2", export_b=frozenset({"dA"}))])
    return NetworkState(topo, (TrafficDemand("B", "dA", 10),))


OSCILLATOR_PAIRS = (("A", "B"), ("B", "D"))
