"""Settlement mathematics for a single bilateral interconnection.

Role convention: party ``a`` exports routes to party ``b`` and ``b`` sends
the traffic volume through ``a``. A positive price means ``b`` pays ``a``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .money import DomainError, MoneyLike, to_money

DEFAULT_ZERO_TOLERANCE = Fraction(1, 10**9)


class Direction(str, enum.Enum):
    A_EXPORTS = "a-exports"
    B_EXPORTS = "b-exports"


class Relation(str, enum.Enum):
    NO_AGREEMENT = "no-agreement"
    SETTLEMENT_FREE = "settlement-free"
    PAID_PEERING_B_TO_A = "paid-peering-b-to-a"
    PAID_PEERING_A_TO_B = "paid-peering-a-to-b"


@dataclass(frozen=True)
class BargainProblem:
    joint_value: Fraction
    outside_a: Fraction
    outside_b: Fraction

    def __post_init__(self):
        for name in ("joint_value", "outside_a", "outside_b"):
            object.__setattr__(self, name, to_money(getattr(self, name), name))


class NashSplit(NamedTuple):
    payoff_a: Fraction
    payoff_b: Fraction
    surplus: Fraction
    agreed: bool


def nash_split(problem: BargainProblem) -> NashSplit:
    """Give each player its outside option plus half the surplus.

    With a non-positive surplus there is no deal and each player keeps its
    outside option.
    """
    delta = problem.joint_value - problem.outside_a - problem.outside_b
    if delta > 0:
        return NashSplit(problem.outside_a + delta / 2, problem.outside_b + delta / 2, delta, True)
    return NashSplit(problem.outside_a, problem.outside_b, delta, False)


@dataclass(frozen=True)
class InterconnectionParams:
    """Costs of one route group in one direction, direct vs. outside option.

    Every cost is net of revenue, so any of them may be negative: an AS that
    hands the traffic to its own customer earns transit revenue on it.
    """

    cost_direct_a: Fraction
    cost_direct_b: Fraction
    cost_outside_a: Fraction
    cost_outside_b: Fraction
    volume: Fraction = Fraction(0)
    group_id: str = ""
    direction: Direction = Direction.A_EXPORTS
    party_a: Optional[str] = None
    party_b: Optional[str] = None

    def __post_init__(self):
        for name in ("cost_direct_a", "cost_direct_b", "cost_outside_a", "cost_outside_b", "volume"):
            object.__setattr__(self, name, to_money(getattr(self, name), name))
        if self.volume < 0:
            raise DomainError(f"volume must be >= 0, got {self.volume}")
        object.__setattr__(self, "direction", Direction(self.direction))

    def swapped(self) -> "InterconnectionParams":
        """Same interconnection with the a/b roles exchanged."""
        other = Direction.B_EXPORTS if self.direction is Direction.A_EXPORTS else Direction.A_EXPORTS
        return InterconnectionParams(
            self.cost_direct_b, self.cost_direct_a, self.cost_outside_b, self.cost_outside_a,
            self.volume, self.group_id, other, self.party_b, self.party_a,
        )

    def scaled(self, factor: MoneyLike) -> "InterconnectionParams":
        k = to_money(factor, "factor")
        return InterconnectionParams(
            self.cost_direct_a * k, self.cost_direct_b * k,
            self.cost_outside_a * k, self.cost_outside_b * k,
            self.volume, self.group_id, self.direction, self.party_a, self.party_b,
        )

    def per_unit(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        if self.volume == 0:
            raise DomainError(f"group {self.group_id!r} has zero volume")
        v = self.volume
        return (self.cost_direct_a / v, self.cost_direct_b / v,
                self.cost_outside_a / v, self.cost_outside_b / v)

    def __add__(self, other: "InterconnectionParams") -> "InterconnectionParams":
        if not isinstance(other, InterconnectionParams):
            return NotImplemented
        return InterconnectionParams(
            self.cost_direct_a + other.cost_direct_a,
            self.cost_direct_b + other.cost_direct_b,
            self.cost_outside_a + other.cost_outside_a,
            self.cost_outside_b + other.cost_outside_b,
            self.volume + other.volume,
            self.group_id,
            self.direction,
            self.party_a,
            self.party_b,
        )


@dataclass(frozen=True)
class Settlement:
    surplus: Fraction
    price: Fraction
    payoff_a: Fraction
    payoff_b: Fraction
    outside_payoff_a: Fraction
    outside_payoff_b: Fraction
    agreed: bool
    relation: Relation
    group_id: str = ""
    party_a: Optional[str] = None
    party_b: Optional[str] = None

    @property
    def gain_a(self) -> Fraction:
        return self.payoff_a - self.outside_payoff_a

    @property
    def gain_b(self) -> Fraction:
        return self.payoff_b - self.outside_payoff_b


@dataclass(frozen=True)
class NetSettlement:
    price_b_to_a: Fraction
    price_a_to_b: Fraction
    net: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "net", self.price_b_to_a - self.price_a_to_b)


@dataclass(frozen=True)
class BundleComparison:
    per_group_settlements: tuple[Settlement, ...]
    bundled_settlement: Settlement
    per_group_realized_surplus: Fraction
    bundled_realized_surplus: Fraction

    @property
    def efficiency_loss(self) -> Fraction:
        return self.per_group_realized_surplus - self.bundled_realized_surplus


def surplus(params: InterconnectionParams) -> Fraction:
    return (params.cost_outside_a + params.cost_outside_b) - (params.cost_direct_a + params.cost_direct_b)


def nash_price(params: InterconnectionParams) -> Fraction:
    """Transfer that equalizes both parties' gains; positive means b pays a."""
    gain_b = params.cost_outside_b - params.cost_direct_b
    gain_a = params.cost_outside_a - params.cost_direct_a
    return (gain_b - gain_a) / 2


def settle(params: InterconnectionParams, zero_tolerance: MoneyLike = DEFAULT_ZERO_TOLERANCE) -> Settlement:
    delta = surplus(params)
    out_a = -params.cost_outside_a
    out_b = -params.cost_outside_b
    if delta > 0:
        r = nash_price(params)
        settlement = Settlement(
            surplus=delta, price=r,
            payoff_a=r - params.cost_direct_a, payoff_b=-r - params.cost_direct_b,
            outside_payoff_a=out_a, outside_payoff_b=out_b,
            agreed=True, relation=Relation.NO_AGREEMENT,
            group_id=params.group_id, party_a=params.party_a, party_b=params.party_b,
        )
    else:
        settlement = Settlement(
            surplus=delta, price=Fraction(0),
            payoff_a=out_a, payoff_b=out_b,
            outside_payoff_a=out_a, outside_payoff_b=out_b,
            agreed=False, relation=Relation.NO_AGREEMENT,
            group_id=params.group_id, party_a=params.party_a, party_b=params.party_b,
        )
    relation = classify(settlement, zero_tolerance)
    return Settlement(**{**settlement.__dict__, "relation": relation})


def classify(settlement: Settlement, zero_tolerance: MoneyLike = DEFAULT_ZERO_TOLERANCE) -> Relation:
    tol = to_money(zero_tolerance, "zero_tolerance")
    if tol < 0:
        raise DomainError(f"zero_tolerance must be >= 0, got {tol}")
    if settlement.surplus <= 0:
        return Relation.NO_AGREEMENT
    if abs(settlement.price) <= tol:
        return Relation.SETTLEMENT_FREE
    if settlement.price > 0:
        return Relation.PAID_PEERING_B_TO_A
    return Relation.PAID_PEERING_A_TO_B


SettlementOrMany = Union[Settlement, Iterable[Settlement]]


def _as_list(x: SettlementOrMany) -> list[Settlement]:
    return [x] if isinstance(x, Settlement) else list(x)


def net_settlement(direction_ab: SettlementOrMany, direction_ba: SettlementOrMany) -> NetSettlement:
    """Combine the two directions of a pair into one lump-sum payment.

    ``direction_ab`` holds the settlement(s) where A exports (A in role a);
    ``direction_ba`` those where B exports (B in role a). Each direction may
    be a single settlement or the settlements of all its route groups.
    Non-agreed settlements contribute nothing.
    """
    ab = _as_list(direction_ab)
    ba = _as_list(direction_ba)
    a_ids = {s.party_a for s in ab if s.party_a is not None} | {s.party_b for s in ba if s.party_b is not None}
    b_ids = {s.party_b for s in ab if s.party_b is not None} | {s.party_a for s in ba if s.party_a is not None}
    if len(a_ids) > 1 or len(b_ids) > 1 or (a_ids and a_ids == b_ids):
        raise DomainError(f"settlements do not describe one pair: {sorted(a_ids)} vs {sorted(b_ids)}")
    b_to_a = sum((s.price for s in ab if s.agreed), Fraction(0))
    a_to_b = sum((s.price for s in ba if s.agreed), Fraction(0))
    return NetSettlement(b_to_a, a_to_b)


def bundle(groups: Sequence[InterconnectionParams], group_id: str = "bundle") -> InterconnectionParams:
    """Merge groups by summing each cost term.

    Summing totals is the same as volume-weighting per-unit cost rates and
    multiplying by the total volume, without dividing by zero volumes.
    """
    if not groups:
        raise DomainError("cannot bundle an empty sequence of groups")
    directions = {g.direction for g in groups}
    if len(directions) > 1:
        raise DomainError("cannot bundle groups of different directions")
    total = groups[0]
    for g in groups[1:]:
        total = total + g
    return InterconnectionParams(
        total.cost_direct_a, total.cost_direct_b, total.cost_outside_a, total.cost_outside_b,
        total.volume, group_id, total.direction, total.party_a, total.party_b,
    )


def bundle_vs_pergroup(groups: Sequence[InterconnectionParams]) -> BundleComparison:
    merged = bundle(groups)
    if merged.volume <= 0:
        raise DomainError("total bundle volume must be positive")
    per_group = tuple(settle(g) for g in groups)
    bundled = settle(merged)
    return BundleComparison(
        per_group_settlements=per_group,
        bundled_settlement=bundled,
        per_group_realized_surplus=sum((s.surplus for s in per_group if s.agreed), Fraction(0)),
        bundled_realized_surplus=bundled.surplus if bundled.agreed else Fraction(0),
    )
