"""Bilinear zero-sum games on cone slices: payoffs, duality gap, schedules, self-play.

The payoff is f(x, y) = <y, forward(x)> + <offset_x, x> + <offset_y, y> under
the canonical algebra pairings; x minimizes, y maximizes.  Self-play runs both
players' learners simultaneously and certifies the recorded duality gaps
against the scaled sum of regrets on the fly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .cones import ConeDescriptor, EjaElement, inner, norm, random_element, zero
from .learners import LearnerConfig, RegretLedger, learner_init, learner_step
from .simplex import SimplexPoint, log_rank, support_max

__all__ = [
    "BilinearZeroSumGame",
    "DualityGap",
    "SelfPlayTrace",
    "payoff_vectors",
    "payoff_value",
    "duality_gap",
    "saddle_point_schedule",
    "saddle_point_horizon",
    "sum_regret_schedule",
    "game_schedule",
    "self_play",
    "n_player_self_play",
    "matching_pennies_game",
]

_GAP_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class BilinearZeroSumGame:
    """Operator pair with affine offsets; adjoint consistency is checked on construction.

    lipschitz_x / lipschitz_y bound the trace-infinity norm of the respective
    players' payoff vectors over the strategy sets; lipschitz_estimated marks
    values obtained by numerical estimation rather than a closed form.
    """

    desc_x: ConeDescriptor
    desc_y: ConeDescriptor
    forward: Callable[[EjaElement], EjaElement]
    adjoint: Callable[[EjaElement], EjaElement]
    offset_x: EjaElement | None
    offset_y: EjaElement | None
    lipschitz_x: float
    lipschitz_y: float
    x_per_block: bool = False
    y_per_block: bool = False
    lipschitz_estimated: bool = False

    def __post_init__(self) -> None:
        if self.offset_x is None:
            object.__setattr__(self, "offset_x", zero(self.desc_x))
        if self.offset_y is None:
            object.__setattr__(self, "offset_y", zero(self.desc_y))
        if self.offset_x.descriptor != self.desc_x:
            raise ValueError("offset_x descriptor mismatch")
        if self.offset_y.descriptor != self.desc_y:
            raise ValueError("offset_y descriptor mismatch")
        if self.lipschitz_x < 0.0 or self.lipschitz_y < 0.0:
            raise ValueError("lipschitz constants must be nonnegative")
        rng = np.random.default_rng(123456789)
        for _ in range(8):
            u = random_element(self.desc_x, rng)
            v = random_element(self.desc_y, rng)
            u = (1.0 / max(norm(u), 1e-12)) * u
            v = (1.0 / max(norm(v), 1e-12)) * v
            image = self.forward(u)
            pullback = self.adjoint(v)
            if image.descriptor != self.desc_y:
                raise ValueError("forward map lands in the wrong cone")
            if pullback.descriptor != self.desc_x:
                raise ValueError("adjoint map lands in the wrong cone")
            drift = abs(inner(image, v) - inner(u, pullback))
            if drift > 1e-9:
                raise ValueError(f"adjoint consistency violated by {drift:.3e}")


def _check_strategy(point: SimplexPoint, desc: ConeDescriptor, per_block: bool, who: str) -> None:
    if point.element.descriptor != desc:
        raise ValueError(f"{who} strategy descriptor mismatch")
    if bool(point.per_block) != bool(per_block):
        raise ValueError(f"{who} strategy uses the wrong slice convention for this game")


def payoff_vectors(game: BilinearZeroSumGame, x: SimplexPoint, y: SimplexPoint) -> tuple[EjaElement, EjaElement]:
    """Gain vectors for both learners: the minimizer receives its negated gradient."""
    _check_strategy(x, game.desc_x, game.x_per_block, "x")
    _check_strategy(y, game.desc_y, game.y_per_block, "y")
    m_x = -(game.adjoint(y.element) + game.offset_x)
    m_y = game.forward(x.element) + game.offset_y
    return m_x, m_y


def payoff_value(game: BilinearZeroSumGame, x: SimplexPoint, y: SimplexPoint) -> float:
    """f(x, y) itself, for probing saddle inequalities."""
    return (
        inner(y.element, game.forward(x.element))
        + inner(game.offset_x, x.element)
        + inner(game.offset_y, y.element)
    )


class DualityGap(NamedTuple):
    gap: float
    primal_value: float  # max over y of f(x_avg, y)
    dual_value: float  # min over x of f(x, y_avg)


def duality_gap(game: BilinearZeroSumGame, x_avg: SimplexPoint, y_avg: SimplexPoint) -> DualityGap:
    """Saddle-point certificate: best responses evaluated through the support function."""
    _check_strategy(x_avg, game.desc_x, game.x_per_block, "x")
    _check_strategy(y_avg, game.desc_y, game.y_per_block, "y")
    primal = (
        support_max(game.forward(x_avg.element) + game.offset_y, game.y_per_block).value
        + inner(game.offset_x, x_avg.element)
    )
    dual = (
        -support_max(-(game.adjoint(y_avg.element) + game.offset_x), game.x_per_block).value
        + inner(game.offset_y, y_avg.element)
    )
    return DualityGap(primal - dual, primal, dual)


def saddle_point_horizon(
    lipschitz_x: float,
    lipschitz_y: float,
    rank_x: int,
    rank_y: int,
    eps: float,
    log_rank_x: float | None = None,
    log_rank_y: float | None = None,
) -> float:
    """Real-valued round count sufficient for an eps-accurate saddle point.

    log_rank_x / log_rank_y override ln(rank) when the strategy set is a
    product of slices whose entropy range is the sum of the per-block logs.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    coupling = math.sqrt(2.0 * (lipschitz_x**2 + lipschitz_y**2))
    if coupling == 0.0:
        raise ValueError("at least one lipschitz constant must be positive")
    range_x = math.log(rank_x) if log_rank_x is None else float(log_rank_x)
    range_y = math.log(rank_y) if log_rank_y is None else float(log_rank_y)
    return 2.0 * (range_x + range_y) * coupling / eps


def saddle_point_schedule(
    lipschitz_x: float,
    lipschitz_y: float,
    rank_x: int,
    rank_y: int,
    eps: float,
    log_rank_x: float | None = None,
    log_rank_y: float | None = None,
) -> tuple[float, int]:
    """Step size and integer horizon of the two-player min-max guarantee."""
    horizon = saddle_point_horizon(lipschitz_x, lipschitz_y, rank_x, rank_y, eps, log_rank_x, log_rank_y)
    eta = 1.0 / (2.0 * math.sqrt(2.0 * (lipschitz_x**2 + lipschitz_y**2)))
    return eta, int(math.ceil(horizon))


def game_schedule(game: BilinearZeroSumGame, eps: float) -> tuple[float, int]:
    """saddle_point_schedule resolved from a game's constants and slice conventions."""
    return saddle_point_schedule(
        game.lipschitz_x,
        game.lipschitz_y,
        game.desc_x.rank,
        game.desc_y.rank,
        eps,
        log_rank_x=log_rank(game.desc_x, game.x_per_block),
        log_rank_y=log_rank(game.desc_y, game.y_per_block),
    )


def sum_regret_schedule(lipschitz: Sequence[float], log_ranks: Sequence[float]) -> tuple[float, float]:
    """Shared step size and guaranteed cap on the sum of all players' regrets."""
    if len(lipschitz) != len(log_ranks) or not lipschitz:
        raise ValueError("need one lipschitz constant and one log-rank per player")
    players = len(lipschitz)
    scale = math.sqrt(players * sum(float(value) ** 2 for value in lipschitz))
    if scale == 0.0:
        raise ValueError("at least one lipschitz constant must be positive")
    eta = 1.0 / (2.0 * scale)
    bound = 2.0 * sum(float(value) for value in log_ranks) * scale
    return eta, bound


@dataclass
class SelfPlayTrace:
    """Recorded metrics of one self-play run, plus full ledgers for replay."""

    rounds: list[int] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)
    primal_values: list[float] = field(default_factory=list)
    dual_values: list[float] = field(default_factory=list)
    regrets_x: list[float] = field(default_factory=list)
    regrets_y: list[float] = field(default_factory=list)
    averages_x: list[SimplexPoint] = field(default_factory=list)
    averages_y: list[SimplexPoint] = field(default_factory=list)
    ledger_x: RegretLedger = field(default_factory=RegretLedger)
    ledger_y: RegretLedger = field(default_factory=RegretLedger)

    @property
    def average_x(self) -> SimplexPoint:
        return self.averages_x[-1]

    @property
    def average_y(self) -> SimplexPoint:
        return self.averages_y[-1]


def self_play(
    game: BilinearZeroSumGame,
    cfg_x: LearnerConfig,
    cfg_y: LearnerConfig,
    rounds: int,
    record_every: int = 1,
) -> SelfPlayTrace:
    """Run both learners simultaneously for the given number of rounds.

    At every recorded round the duality gap of the average iterates is
    computed and certified against (r_x + r_y) / t; a violation raises since
    the inequality is an algebraic identity of the recorded quantities.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    if cfg_x.descriptor != game.desc_x or cfg_y.descriptor != game.desc_y:
        raise ValueError("learner descriptors must match the game")
    if bool(cfg_x.per_block) != bool(game.x_per_block) or bool(cfg_y.per_block) != bool(game.y_per_block):
        raise ValueError("learner slice conventions must match the game")

    state_x = learner_init(cfg_x)
    state_y = learner_init(cfg_y)
    trace_out = SelfPlayTrace(
        ledger_x=RegretLedger(per_block=cfg_x.per_block),
        ledger_y=RegretLedger(per_block=cfg_y.per_block),
    )
    sum_x = zero(game.desc_x)
    sum_y = zero(game.desc_y)
    realized_x = 0.0
    realized_y = 0.0
    for t in range(1, rounds + 1):
        x = state_x.iterate
        y = state_y.iterate
        m_x, m_y = payoff_vectors(game, x, y)
        trace_out.ledger_x.record(m_x, x)
        trace_out.ledger_y.record(m_y, y)
        sum_x = sum_x + x.element
        sum_y = sum_y + y.element
        realized_x += inner(m_x, x.element)
        realized_y += inner(m_y, y.element)
        state_x = learner_step(state_x, m_x, cfg_x)
        state_y = learner_step(state_y, m_y, cfg_y)
        if t % record_every == 0 or t == rounds:
            avg_x = SimplexPoint((1.0 / t) * sum_x, per_block=cfg_x.per_block)
            avg_y = SimplexPoint((1.0 / t) * sum_y, per_block=cfg_y.per_block)
            certificate = duality_gap(game, avg_x, avg_y)
            regret_x = support_max(state_x.cumulative_payoff, cfg_x.per_block).value - realized_x
            regret_y = support_max(state_y.cumulative_payoff, cfg_y.per_block).value - realized_y
            if certificate.gap < -_GAP_SLACK:
                raise RuntimeError(f"weak duality violated at round {t}: gap {certificate.gap}")
            if certificate.gap > (regret_x + regret_y) / t + _GAP_SLACK:
                raise RuntimeError(
                    f"duality gap {certificate.gap} exceeds scaled regret sum "
                    f"{(regret_x + regret_y) / t} at round {t}"
                )
            trace_out.rounds.append(t)
            trace_out.gaps.append(certificate.gap)
            trace_out.primal_values.append(certificate.primal_value)
            trace_out.dual_values.append(certificate.dual_value)
            trace_out.regrets_x.append(regret_x)
            trace_out.regrets_y.append(regret_y)
            trace_out.averages_x.append(avg_x)
            trace_out.averages_y.append(avg_y)
    return trace_out


def n_player_self_play(
    payoff_oracle: Callable[[Sequence[SimplexPoint]], Sequence[EjaElement]],
    cfgs: Sequence[LearnerConfig],
    rounds: int,
) -> list[RegretLedger]:
    """Simultaneous multiplayer play; returns one ledger per player."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if not cfgs:
        raise ValueError("need at least one player")
    states = [learner_init(cfg) for cfg in cfgs]
    ledgers = [RegretLedger(per_block=cfg.per_block) for cfg in cfgs]
    for _ in range(rounds):
        joint = [state.iterate for state in states]
        payoffs = list(payoff_oracle(joint))
        if len(payoffs) != len(cfgs):
            raise ValueError("oracle must return one payoff vector per player")
        for index, (payoff, cfg) in enumerate(zip(payoffs, cfgs)):
            if payoff.descriptor != cfg.descriptor:
                raise ValueError(f"oracle payoff descriptor mismatch for player {index}")
        for index, payoff in enumerate(payoffs):
            ledgers[index].record(payoff, joint[index])
            states[index] = learner_step(states[index], payoff, cfgs[index])
    return ledgers


def matching_pennies_game() -> BilinearZeroSumGame:
    """Two-action zero-sum game with payoff matrix [[1,-1],[-1,1]]; value 0 at uniform play."""
    matrix = np.array([[1.0, -1.0], [-1.0, 1.0]])
    desc = ConeDescriptor.orthant(2)
    return BilinearZeroSumGame(
        desc_x=desc,
        desc_y=desc,
        forward=lambda x: EjaElement(desc, matrix @ x.data),
        adjoint=lambda y: EjaElement(desc, matrix.T @ y.data),
        offset_x=zero(desc),
        offset_y=zero(desc),
        lipschitz_x=1.0,
        lipschitz_y=1.0,
    )
