"""Nash-Peering: bargaining-based settlement of AS interconnections.

The subpackages build on each other: :mod:`~nashpeering.bargain` holds the
settlement mathematics, :mod:`~nashpeering.topology` the policy-routed AS
graph, :mod:`~nashpeering.costmodel` turns routes into interconnection
parameters, :mod:`~nashpeering.dynamics` evolves a whole network of pairwise
agreements, and :mod:`~nashpeering.game` and :mod:`~nashpeering.estimate`
cover the bargaining process and one-sided parameter estimation.
"""

from .bargain import (
    BargainProblem,
    BundleComparison,
    Direction,
    InterconnectionParams,
    NetSettlement,
    Relation,
    Settlement,
    bundle_vs_pergroup,
    classify,
    nash_price,
    nash_split,
    net_settlement,
    settle,
    surplus,
)
from .money import MONEY_UNIT, DomainError

__version__ = "0.1.0"

__all__ = [
    "BargainProblem",
    "BundleComparison",
    "Direction",
    "DomainError",
    "InterconnectionParams",
    "MONEY_UNIT",
    "NetSettlement",
    "Relation",
    "Settlement",
    "bundle_vs_pergroup",
    "classify",
    "nash_price",
    "nash_split",
    "net_settlement",
    "settle",
    "surplus",
]
