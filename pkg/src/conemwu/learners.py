"""Multiplicative-weights learners on cone slices, with optional one-step optimism.

Each learner maximizes the linear gain <m, x> of the payoff vectors it is fed;
a minimizing player negates its gradient before calling learner_step.  The
iterate is the exp-normalize of the step size times the cumulative payoff,
plus one extra copy of the latest payoff when optimistic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import ConeDescriptor, EjaElement, inner, zero
from .simplex import SimplexPoint, exp_normalize, support_max, uniform_point

__all__ = [
    "LearnerConfig",
    "LearnerState",
    "RegretLedger",
    "learner_init",
    "learner_step",
    "regret",
    "regret_series",
]


@dataclass(frozen=True)
class LearnerConfig:
    descriptor: ConeDescriptor
    step_size: float
    optimistic: bool = True
    per_block: bool = False

    def __post_init__(self) -> None:
        if not (self.step_size > 0.0 and np.isfinite(self.step_size)):
            raise ValueError(f"step size must be positive and finite, got {self.step_size}")


@dataclass(frozen=True, eq=False)
class LearnerState:
    """Immutable snapshot after t observed payoffs; iterate is the play for round t+1."""

    cumulative_payoff: EjaElement
    last_payoff: EjaElement
    iterate: SimplexPoint
    t: int


def learner_init(cfg: LearnerConfig) -> LearnerState:
    nothing = zero(cfg.descriptor)
    return LearnerState(nothing, nothing, uniform_point(cfg.descriptor, cfg.per_block), 0)


def learner_step(state: LearnerState, m: EjaElement, cfg: LearnerConfig) -> LearnerState:
    """Fold one payoff vector into the state and emit the next iterate."""
    if m.descriptor != cfg.descriptor:
        raise ValueError("payoff descriptor does not match the learner's cone")
    if not np.all(np.isfinite(m.to_flat())):
        raise ValueError("payoff vector has non-finite entries")
    cumulative = state.cumulative_payoff + m
    lead = cumulative + m if cfg.optimistic else cumulative
    iterate = exp_normalize(cfg.step_size * lead, per_block=cfg.per_block)
    return LearnerState(cumulative, m, iterate, state.t + 1)


@dataclass
class RegretLedger:
    """Payoff/iterate histories backing best-fixed-comparator regret."""

    payoffs: list[EjaElement] = field(default_factory=list)
    iterates: list[SimplexPoint] = field(default_factory=list)
    per_block: bool = False

    def record(self, m: EjaElement, x: SimplexPoint) -> None:
        self.payoffs.append(m)
        self.iterates.append(x)


def regret(ledger: RegretLedger) -> float:
    """max over fixed comparators of sum<m^t, x> minus the realized sum<m^t, x^t>."""
    series = regret_series(ledger)
    return float(series[-1])


def regret_series(ledger: RegretLedger) -> np.ndarray:
    """Regret after each prefix of the ledger, front to back."""
    if not ledger.payoffs:
        raise ValueError("ledger is empty")
    if len(ledger.payoffs) != len(ledger.iterates):
        raise ValueError("ledger histories have unequal lengths")
    out = np.empty(len(ledger.payoffs))
    cumulative = zero(ledger.payoffs[0].descriptor)
    realized = 0.0
    for index, (m, x) in enumerate(zip(ledger.payoffs, ledger.iterates)):
        cumulative = cumulative + m
        realized += inner(m, x.element)
        out[index] = support_max(cumulative, ledger.per_block).value - realized
    return out
