"""Alternating-offers bargaining with an exogenous risk of breakdown.

After every rejected offer the negotiation collapses with probability ``p``
and both players fall back to their outside options (share 0 of the
surplus). Otherwise the responder becomes the next proposer.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .money import DomainError


class Player(str, enum.Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> "Player":
        return Player.B if self is Player.A else Player.A


def _check(surplus: float, p: float) -> None:
    if not (isinstance(surplus, (int, float)) and math.isfinite(surplus)) or surplus <= 0:
        raise DomainError(f"surplus must be a positive finite number, got {surplus!r}")
    if not (0 <= p <= 1):
        raise DomainError(f"breakdown probability must lie in [0, 1], got {p!r}")


def spe_shares(surplus: float, p: float) -> tuple[float, float]:
    """Stationary subgame-perfect split (proposer, responder).

    The responder accepts anything worth at least its continuation value
    ``(1 - p) * x`` where ``x`` is the proposer share it would get next round,
    so ``x = surplus - (1 - p) * x``.
    """
    _check(surplus, p)
    proposer = surplus / (2 - p)
    return proposer, surplus - proposer


def backward_induction_oracle(surplus: float, p: float, horizon: int) -> tuple[float, float]:
    """First-round split of the game cut off after ``horizon`` rounds.

    In the last round the proposer makes an ultimatum; a rejection there ends
    the game with zero shares.
    """
    _check(surplus, p)
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    proposer = surplus  # round `horizon`
    for _ in range(horizon - 1):
        responder = (1 - p) * proposer
        proposer = surplus - responder
    return proposer, surplus - proposer


@dataclass(frozen=True)
class GameConfig:
    surplus: float
    breakdown_prob: float
    first_proposer: Player = Player.A
    horizon: int = 1000
    seed: int = 0
    # rounds in which the proposer greedily demands the whole surplus before
    # switching to the equilibrium offer; 0 means equilibrium play throughout
    greedy_rounds: int = 0

    def __post_init__(self):
        _check(self.surplus, self.breakdown_prob)
        if self.horizon < 1:
            raise DomainError("horizon must be >= 1")
        if self.greedy_rounds < 0:
            raise DomainError("greedy_rounds must be >= 0")
        object.__setattr__(self, "first_proposer", Player(self.first_proposer))


@dataclass(frozen=True)
class Move:
    round: int
    proposer: Player
    offer_to_responder: float
    response: str  # "accept", "reject" or "breakdown"


@dataclass(frozen=True)
class GameOutcome:
    agreed_round: Optional[int]  # None on breakdown or horizon exhaustion
    proposer: Optional[Player]
    proposer_share: float
    responder_share: float
    transcript: tuple[Move, ...] = field(default_factory=tuple)

    @property
    def agreed(self) -> bool:
        return self.agreed_round is not None


def simulate(config: GameConfig) -> GameOutcome:
    """Play the game; the seeded stream only decides breakdown events."""
    rng = random.Random(config.seed)
    proposer_eq, _ = spe_shares(config.surplus, config.breakdown_prob)
    # same expression as the acceptance threshold so indifference is exact
    responder_eq = (1 - config.breakdown_prob) * proposer_eq
    proposer = config.first_proposer
    moves: list[Move] = []
    for rnd in range(1, config.horizon + 1):
        last = rnd == config.horizon
        if rnd <= config.greedy_rounds:
            offer = 0.0
        else:
            offer = 0.0 if last else responder_eq
        # responder accepts at indifference: continuation is (1-p) * proposer share next round
        continuation = 0.0 if last else (1 - config.breakdown_prob) * proposer_eq
        if offer >= continuation:
            moves.append(Move(rnd, proposer, offer, "accept"))
            return GameOutcome(rnd, proposer, config.surplus - offer, offer, tuple(moves))
        if rng.random() < config.breakdown_prob:
            moves.append(Move(rnd, proposer, offer, "breakdown"))
            return GameOutcome(None, None, 0.0, 0.0, tuple(moves))
        moves.append(Move(rnd, proposer, offer, "reject"))
        proposer = proposer.other
    return GameOutcome(None, None, 0.0, 0.0, tuple(moves))


def convergence_table(surplus: float, ps, horizon: Optional[int] = None, seed: int = 0) -> list[dict]:
    """One row per breakdown probability: closed form, oracle, simulation."""
    rows = []
    for p in ps:
        prop, resp = spe_shares(surplus, p)
        row = {
            "p": p,
            "proposer": prop,
            "responder": resp,
            "distance_to_nash": max(abs(prop - surplus / 2), abs(resp - surplus / 2)),
            "bound": surplus * p,
        }
        if horizon is not None:
            o_prop, o_resp = backward_induction_oracle(surplus, p, horizon)
            row["oracle_proposer"] = o_prop
            row["oracle_responder"] = o_resp
            row["oracle_error"] = abs(o_prop - prop)
        out = simulate(GameConfig(surplus, p, seed=seed))
        row["simulated_round"] = out.agreed_round
        row["simulated_proposer"] = out.proposer_share
        rows.append(row)
    return rows
