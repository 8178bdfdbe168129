"""Game builders for the three applications.

Metric learning: a simplex player weighs dissimilar pairs against a
spectraplex player choosing the metric, after whitening by the similar pairs.
Sum-of-norms location: minimizing sum_i ||A_i x - b_i|| over a Euclidean ball
becomes a min-max game between one second-order-cone slice (the location) and
a product of second-order-cone slices (one per residual).  The streaming
variant replays the same construction against a drifting target sequence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cones import ConeDescriptor, EjaElement, inner, zero
from .games import BilinearZeroSumGame
from .learners import LearnerConfig, RegretLedger, learner_init, learner_step
from .simplex import SimplexPoint, support_max

__all__ = [
    "MetricLearningInstance",
    "FermatWeberInstance",
    "FermatWeberEvaluator",
    "StreamParams",
    "OnlineTrace",
    "load_labeled_csv",
    "standardize_features",
    "sample_pairs",
    "inverse_sqrt_psd",
    "build_metric_learning_game",
    "sample_sum_of_norms_instance",
    "build_fermat_weber_game",
    "generate_stream",
    "online_self_play",
]


# --------------------------------------------------------------------------
# metric learning
# --------------------------------------------------------------------------


def load_labeled_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a labeled dataset: header row, numeric feature columns, final label column."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if len(rows) < 2:
        raise ValueError(f"{path}: need a header row and at least one data row")
    header = rows[0]
    if len(header) < 2:
        raise ValueError(f"{path}: need at least one feature column and one label column")
    features = []
    labels = []
    for line_number, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {line_number} has {len(row)} fields, expected {len(header)}")
        try:
            features.append([float(value) for value in row[:-1]])
        except ValueError as exc:
            raise ValueError(f"{path}: row {line_number} has a non-numeric feature: {exc}") from None
        labels.append(row[-1])
    return np.asarray(features, dtype=float), np.asarray(labels)


def standardize_features(points: np.ndarray) -> np.ndarray:
    """Column-wise zero mean, unit variance; constant columns are left centered."""
    centered = points - points.mean(axis=0)
    scale = centered.std(axis=0)
    scale[scale < 1e-12] = 1.0
    return centered / scale


def sample_pairs(
    labels: np.ndarray,
    n_similar: int,
    n_dissimilar: int,
    rng: np.random.Generator,
) -> tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]:
    """Uniform index pairs split by label agreement, sampled with replacement."""
    count = len(labels)
    if count < 2:
        raise ValueError("need at least two labeled points to form pairs")
    values, tallies = np.unique(labels, return_counts=True)
    if n_similar > 0 and not np.any(tallies >= 2):
        raise ValueError("no class has two members; cannot sample similar pairs")
    if n_dissimilar > 0 and len(values) < 2:
        raise ValueError("need at least two classes to sample dissimilar pairs")
    similar: list[tuple[int, int]] = []
    dissimilar: list[tuple[int, int]] = []
    while len(similar) < n_similar or len(dissimilar) < n_dissimilar:
        i = int(rng.integers(count))
        j = int(rng.integers(count))
        if i == j:
            continue
        if labels[i] == labels[j]:
            if len(similar) < n_similar:
                similar.append((i, j))
        elif len(dissimilar) < n_dissimilar:
            dissimilar.append((i, j))
    return tuple(similar), tuple(dissimilar)


@dataclass(frozen=True)
class MetricLearningInstance:
    """Labeled points with the sampled similar / dissimilar pair index sets."""

    points: np.ndarray
    labels: np.ndarray
    similar: tuple[tuple[int, int], ...]
    dissimilar: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2:
            raise ValueError("points must be a 2-d array (count x dim)")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", np.asarray(self.labels))
        if len(self.labels) != points.shape[0]:
            raise ValueError("one label per point required")
        for i, j in list(self.similar) + list(self.dissimilar):
            if not (0 <= i < points.shape[0] and 0 <= j < points.shape[0]):
                raise ValueError(f"pair index ({i},{j}) out of range")


def inverse_sqrt_psd(matrix: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """(matrix + ridge I)^(-1/2) for a symmetric positive definite argument."""
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("matrix must be square")
    if float(np.max(np.abs(mat - mat.T))) > 1e-9:
        raise ValueError("matrix must be symmetric")
    if ridge < 0.0:
        raise ValueError("ridge must be nonnegative")
    values, vectors = np.linalg.eigh((mat + mat.T) / 2.0)
    values = values + ridge
    if float(np.min(values)) <= 0.0:
        raise ValueError(f"eigenvalue {float(np.min(values))} not positive after ridge {ridge}")
    root = (vectors * values**-0.5) @ vectors.T
    root = (root + root.T) / 2.0
    ridged = mat + ridge * np.eye(mat.shape[0])
    residual = float(np.max(np.abs(root @ ridged @ root - np.eye(mat.shape[0]))))
    if residual > 1e-7:
        raise ValueError(f"inverse square root failed its product check: residual {residual:.3e}")
    return root


def _pair_outer(points: np.ndarray, pair: tuple[int, int]) -> np.ndarray:
    diff = points[pair[0]] - points[pair[1]]
    return np.outer(diff, diff)


def build_metric_learning_game(inst: MetricLearningInstance, ridge: float = 1e-8) -> BilinearZeroSumGame:
    """Simplex-versus-spectraplex game over whitened dissimilar-pair outer products."""
    if not inst.similar or not inst.dissimilar:
        raise ValueError("need at least one similar and one dissimilar pair")
    dim = inst.points.shape[1]
    similar_sum = np.zeros((dim, dim))
    for pair in inst.similar:
        similar_sum += _pair_outer(inst.points, pair)
    whitener = inverse_sqrt_psd(similar_sum, ridge)
    whitened = np.stack(
        [whitener @ _pair_outer(inst.points, pair) @ whitener for pair in inst.dissimilar]
    )
    whitened = (whitened + whitened.transpose(0, 2, 1)) / 2.0
    top = float(max(np.linalg.eigvalsh(block)[-1] for block in whitened))
    desc_x = ConeDescriptor.orthant(len(inst.dissimilar))
    desc_y = ConeDescriptor.sym(dim)
    return BilinearZeroSumGame(
        desc_x=desc_x,
        desc_y=desc_y,
        forward=lambda x: EjaElement(desc_y, np.tensordot(x.data, whitened, axes=1)),
        adjoint=lambda y: EjaElement(desc_x, np.tensordot(whitened, y.data, axes=([1, 2], [0, 1]))),
        offset_x=zero(desc_x),
        offset_y=zero(desc_y),
        lipschitz_x=top,
        lipschitz_y=top,
    )


# --------------------------------------------------------------------------
# sum-of-norms location
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FermatWeberInstance:
    """Residual maps A_i (m x d), targets b_i (length m), and the search radius."""

    maps: tuple[np.ndarray, ...]
    targets: tuple[np.ndarray, ...]
    radius: float

    def __post_init__(self) -> None:
        maps = tuple(np.asarray(a, dtype=float) for a in self.maps)
        targets = tuple(np.asarray(b, dtype=float) for b in self.targets)
        if not maps or len(maps) != len(targets):
            raise ValueError("need one target per residual map")
        shape = maps[0].shape
        if len(shape) != 2:
            raise ValueError("residual maps must be matrices")
        for a, b in zip(maps, targets):
            if a.shape != shape:
                raise ValueError("all residual maps must share one shape")
            if b.shape != (shape[0],):
                raise ValueError("target length must match the residual map rows")
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "targets", targets)

    @property
    def dim(self) -> int:
        return self.maps[0].shape[1]

    @property
    def target_dim(self) -> int:
        return self.maps[0].shape[0]


def sample_sum_of_norms_instance(
    dim: int,
    num_targets: int,
    radius: float,
    rng: np.random.Generator,
) -> FermatWeberInstance:
    """Identity residual maps; targets with Gaussian directions and norms uniform in [R/2, 3R/2]."""
    maps = tuple(np.eye(dim) for _ in range(num_targets))
    targets = []
    for _ in range(num_targets):
        direction = rng.standard_normal(dim)
        direction /= max(float(np.linalg.norm(direction)), 1e-12)
        targets.append(direction * rng.uniform(0.5 * radius, 1.5 * radius))
    return FermatWeberInstance(maps, tuple(targets), radius)


class FermatWeberEvaluator:
    """Maps slice points back to ball points and sums the residual norms."""

    def __init__(self, inst: FermatWeberInstance) -> None:
        self._inst = inst

    def point(self, x_avg: SimplexPoint) -> np.ndarray:
        """Ball point 2R * tail of the slice point (1/2, tail)."""
        return 2.0 * self._inst.radius * np.asarray(x_avg.element.data[1:])

    def __call__(self, x_avg: SimplexPoint) -> float:
        location = self.point(x_avg)
        return float(
            sum(np.linalg.norm(a @ location - b) for a, b in zip(self._inst.maps, self._inst.targets))
        )


def build_fermat_weber_game(inst: FermatWeberInstance) -> tuple[BilinearZeroSumGame, FermatWeberEvaluator]:
    """Second-order-cone min-max form of min ||A_i x - b_i|| summed over i, ||x|| <= R.

    The location player's slice point (1/2, u) encodes x = 2R u; the residual
    player's blocks live on per-block trace-one slices, so the game is built
    with y_per_block=True.  Payoff bounds come from operator norms: the
    residual player sees at most R sigma_max(A_i) + ||b_i|| per block, the
    location player at most R sum_i sigma_max(A_i) when all blocks align.
    """
    scale = 2.0 * inst.radius
    block_desc = ConeDescriptor.spin(inst.target_dim + 1)
    desc_x = ConeDescriptor.spin(inst.dim + 1)
    desc_y = ConeDescriptor.product(*([block_desc] * len(inst.maps)))

    def forward(x: EjaElement) -> EjaElement:
        tail = x.data[1:]
        blocks = tuple(
            EjaElement(block_desc, np.concatenate(([0.0], scale * (a @ tail)))) for a in inst.maps
        )
        return EjaElement(desc_y, blocks)

    def adjoint(y: EjaElement) -> EjaElement:
        pulled = np.zeros(inst.dim)
        for a, block in zip(inst.maps, y.data):
            pulled += scale * (a.T @ block.data[1:])
        return EjaElement(desc_x, np.concatenate(([0.0], pulled)))

    offset_blocks = tuple(
        EjaElement(block_desc, np.concatenate(([0.0], -b))) for b in inst.targets
    )
    operator_norms = [float(np.linalg.norm(a, 2)) for a in inst.maps]
    lipschitz_x = inst.radius * float(sum(operator_norms))
    lipschitz_y = inst.radius * max(operator_norms) + max(
        float(np.linalg.norm(b)) for b in inst.targets
    )
    game = BilinearZeroSumGame(
        desc_x=desc_x,
        desc_y=desc_y,
        forward=forward,
        adjoint=adjoint,
        offset_x=zero(desc_x),
        offset_y=EjaElement(desc_y, offset_blocks),
        lipschitz_x=lipschitz_x,
        lipschitz_y=lipschitz_y,
        y_per_block=True,
    )
    return game, FermatWeberEvaluator(inst)


# --------------------------------------------------------------------------
# streaming variant
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StreamParams:
    """Drifting-target stream: one fixed map, targets following a normalized AR(1) walk."""

    dim: int
    target_dim: int
    radius: float
    correlation: float
    innovation: float
    horizon: int
    seed: int

    def __post_init__(self) -> None:
        if self.dim < 1 or self.target_dim < 1:
            raise ValueError("dimensions must be >= 1")
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        if not 0.0 <= self.correlation < 1.0:
            raise ValueError("correlation must lie in [0, 1)")
        if self.innovation < 0.0:
            raise ValueError("innovation scale must be nonnegative")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


def _unit(vector: np.ndarray) -> np.ndarray:
    length = float(np.linalg.norm(vector))
    if length < 1e-12:
        out = np.zeros_like(vector)
        out[0] = 1.0
        return out
    return vector / length


def generate_stream(params: StreamParams) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic-by-seed stream of (map, target) rounds.

    The map is sampled once and rescaled to unit spectral norm; targets start
    from a normalized Gaussian and follow b <- corr * b + sqrt(1 - corr^2) * noise,
    renormalized to unit length every round.
    """
    rng = np.random.default_rng(params.seed)
    mapping = rng.standard_normal((params.target_dim, params.dim))
    spectral = float(np.linalg.norm(mapping, 2))
    if spectral < 1e-12:
        raise ValueError("sampled map is numerically zero")
    mapping = mapping / spectral
    mapping.setflags(write=False)
    target = _unit(rng.standard_normal(params.target_dim))
    out: list[tuple[np.ndarray, np.ndarray]] = []
    mix = math.sqrt(1.0 - params.correlation**2)
    for _ in range(params.horizon):
        out.append((mapping, target.copy()))
        noise = params.innovation * rng.standard_normal(params.target_dim)
        target = _unit(params.correlation * target + mix * noise)
    return out


@dataclass
class OnlineTrace:
    """Scaled regret sums of one streaming run at the recorded rounds."""

    rounds: list[int] = field(default_factory=list)
    scaled_regret_sums: list[float] = field(default_factory=list)
    regrets_x: list[float] = field(default_factory=list)
    regrets_y: list[float] = field(default_factory=list)
    ledger_x: RegretLedger = field(default_factory=RegretLedger)
    ledger_y: RegretLedger = field(default_factory=RegretLedger)


def online_self_play(
    params: StreamParams,
    cfg_x: LearnerConfig,
    cfg_y: LearnerConfig,
    record_every: int = 1,
    stream: Sequence[tuple[np.ndarray, np.ndarray]] | None = None,
) -> OnlineTrace:
    """Both learners face the per-round game <Ahat x - bhat, y> induced by the stream.

    The stream defaults to generate_stream(params); an explicit sequence of
    (map, target) rounds overrides it.
    """
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    desc_x = ConeDescriptor.spin(params.dim + 1)
    desc_y = ConeDescriptor.spin(params.target_dim + 1)
    if cfg_x.descriptor != desc_x or cfg_y.descriptor != desc_y:
        raise ValueError("learner descriptors must match the stream dimensions")
    rounds = generate_stream(params) if stream is None else list(stream)
    scale = 2.0 * params.radius
    state_x = learner_init(cfg_x)
    state_y = learner_init(cfg_y)
    trace_out = OnlineTrace(
        ledger_x=RegretLedger(per_block=cfg_x.per_block),
        ledger_y=RegretLedger(per_block=cfg_y.per_block),
    )
    realized_x = 0.0
    realized_y = 0.0
    total = len(rounds)
    for t, (mapping, target) in enumerate(rounds, start=1):
        x = state_x.iterate
        y = state_y.iterate
        m_y = EjaElement(desc_y, np.concatenate(([0.0], scale * (mapping @ x.element.data[1:]) - target)))
        m_x = EjaElement(desc_x, np.concatenate(([0.0], -scale * (mapping.T @ y.element.data[1:]))))
        trace_out.ledger_x.record(m_x, x)
        trace_out.ledger_y.record(m_y, y)
        realized_x += inner(m_x, x.element)
        realized_y += inner(m_y, y.element)
        state_x = learner_step(state_x, m_x, cfg_x)
        state_y = learner_step(state_y, m_y, cfg_y)
        if t % record_every == 0 or t == total:
            regret_x = support_max(state_x.cumulative_payoff, cfg_x.per_block).value - realized_x
            regret_y = support_max(state_y.cumulative_payoff, cfg_y.per_block).value - realized_y
            trace_out.rounds.append(t)
            trace_out.regrets_x.append(regret_x)
            trace_out.regrets_y.append(regret_y)
            trace_out.scaled_regret_sums.append((regret_x + regret_y) / t)
    return trace_out
