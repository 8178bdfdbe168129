"""Trace-one slice geometry: negative entropy, Bregman divergence, exp-normalize, support function.

Points may live on the slice of the whole cone (total trace one) or, with
per_block=True, on the product of per-factor slices (each top-level block has
trace one).  The latter is the strategy set used when a product cone models
independent simplices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .cones import (
    DEFAULT_POLICY,
    ConeDescriptor,
    EjaElement,
    NumericPolicy,
    identity,
    in_cone,
    inner,
    lowner_apply,
    random_element,
    spectral_decompose,
    trace,
    zero,
)

__all__ = [
    "SimplexPoint",
    "SupportMax",
    "uniform_point",
    "entropy",
    "bregman",
    "exp_normalize",
    "support_max",
    "random_interior_point",
    "log_rank",
]


def _top_blocks(element: EjaElement) -> tuple[EjaElement, ...]:
    if element.descriptor.kind == "product":
        return tuple(element.data)
    return (element,)


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """Cone point of unit trace; per_block=True requires unit trace per top-level block."""

    element: EjaElement
    per_block: bool = False

    def __post_init__(self) -> None:
        tol = DEFAULT_POLICY.structural_tol
        if not in_cone(self.element, tol):
            raise ValueError("point is outside the cone beyond tolerance")
        if self.per_block:
            for index, block in enumerate(_top_blocks(self.element)):
                if abs(trace(block) - 1.0) > tol:
                    raise ValueError(f"block {index} trace {trace(block)} is not 1 within {tol}")
        elif abs(trace(self.element) - 1.0) > tol:
            raise ValueError(f"trace {trace(self.element)} is not 1 within {tol}")


def uniform_point(desc: ConeDescriptor, per_block: bool = False) -> SimplexPoint:
    """Entropy minimizer e/rank; with per_block, each block gets its own e/rank."""
    if per_block and desc.kind == "product":
        parts = tuple((1.0 / comp.rank) * identity(comp) for comp in desc.components)
        return SimplexPoint(EjaElement(desc, parts), per_block=True)
    element = (1.0 / desc.rank) * identity(desc)
    return SimplexPoint(element, per_block=per_block)


def entropy(
    x: Union[SimplexPoint, EjaElement],
    boundary_tolerant: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> float:
    """Negative entropy sum(lambda_i ln lambda_i) of the spectrum.

    Zero eigenvalues are an error unless boundary_tolerant is set, in which
    case eigenvalues below 1e-300 contribute 0 (the 0 ln 0 convention).
    """
    element = x.element if isinstance(x, SimplexPoint) else x
    lam = spectral_decompose(element, policy).eigenvalues
    smallest = float(np.min(lam))
    if boundary_tolerant:
        if smallest < -policy.structural_tol:
            raise ValueError(f"negative eigenvalue {smallest} is outside the cone")
        mask = lam > 1e-300
        return float(np.sum(lam[mask] * np.log(lam[mask])))
    if smallest <= 0.0:
        raise ValueError(f"entropy needs a strictly positive spectrum; offending eigenvalue {smallest}")
    return float(np.sum(lam * np.log(lam)))


def bregman(
    x: Union[SimplexPoint, EjaElement],
    y: Union[SimplexPoint, EjaElement],
    policy: NumericPolicy = DEFAULT_POLICY,
) -> float:
    """Entropy Bregman divergence trace(x o ln x - x o ln y + y - x); nonnegative."""
    ex = x.element if isinstance(x, SimplexPoint) else x
    ey = y.element if isinstance(y, SimplexPoint) else y
    log_y = lowner_apply(ey, "ln", policy=policy)
    return entropy(ex, policy=policy) - inner(ex, log_y) + trace(ey) - trace(ex)


def _exp_normalize_block(block: EjaElement, policy: NumericPolicy) -> EjaElement:
    decomposition = spectral_decompose(block, policy)
    # Shifting by the top eigenvalue leaves the result unchanged and avoids overflow.
    shifted = decomposition.eigenvalues - float(np.max(decomposition.eigenvalues))
    weights = np.exp(shifted)
    weights = weights / float(np.sum(weights))
    out = zero(block.descriptor)
    for weight, q in zip(weights, decomposition.frame):
        out = out + float(weight) * q
    return out


def exp_normalize(
    w: EjaElement,
    per_block: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> SimplexPoint:
    """exp(w) scaled to unit trace; with per_block, normalized block by block."""
    if per_block and w.descriptor.kind == "product":
        parts = tuple(_exp_normalize_block(part, policy) for part in w.data)
        return SimplexPoint(EjaElement(w.descriptor, parts), per_block=True)
    return SimplexPoint(_exp_normalize_block(w, policy), per_block=per_block)


class SupportMax(NamedTuple):
    value: float
    argmax: SimplexPoint


def _support_block(block: EjaElement, policy: NumericPolicy) -> tuple[float, EjaElement]:
    decomposition = spectral_decompose(block, policy)
    best = int(np.argmax(decomposition.eigenvalues))  # first maximal entry wins ties
    q = decomposition.frame[best]
    return float(decomposition.eigenvalues[best]), (1.0 / trace(q)) * q


def support_max(
    c: EjaElement,
    per_block: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> SupportMax:
    """Largest eigenvalue and an attaining slice point.

    The value equals the maximum of <c, y> over the strategy set: the whole
    trace-one slice by default, the product of per-block slices otherwise
    (value then sums the per-block top eigenvalues).
    """
    if per_block and c.descriptor.kind == "product":
        values = []
        parts = []
        for part in c.data:
            value, argmax = _support_block(part, policy)
            values.append(value)
            parts.append(argmax)
        element = EjaElement(c.descriptor, tuple(parts))
        return SupportMax(float(sum(values)), SimplexPoint(element, per_block=True))
    value, argmax = _support_block(c, policy)
    return SupportMax(value, SimplexPoint(argmax, per_block=per_block))


def random_interior_point(
    desc: ConeDescriptor,
    rng: np.random.Generator,
    per_block: bool = False,
) -> SimplexPoint:
    """Strictly interior sample: exp-normalize of a Gaussian element."""
    return exp_normalize(random_element(desc, rng), per_block=per_block)


def log_rank(desc: ConeDescriptor, per_block: bool = False) -> float:
    """Entropy range of the strategy set: ln(rank), or the sum over blocks."""
    if per_block and desc.kind == "product":
        return float(sum(math.log(comp.rank) for comp in desc.components))
    return math.log(desc.rank)
