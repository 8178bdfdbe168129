"""Euclidean Jordan algebra arithmetic over orthant, spin, symmetric, and product cones.

The three leaf algebras and their Cartesian products share a single element
type whose payload layout follows the cone descriptor.  All operations are
pure functions; elements are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

__all__ = [
    "NumericPolicy",
    "DEFAULT_POLICY",
    "ConeDescriptor",
    "EjaElement",
    "SpectralDecomposition",
    "identity",
    "zero",
    "jordan_product",
    "trace",
    "inner",
    "norm",
    "spectral_decompose",
    "lowner_apply",
    "trace_p_norm",
    "in_cone",
    "diagonal_map",
    "random_element",
]


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerance knobs shared across the library.

    structural_tol guards algebraic identities (frames, traces, adjoints);
    degeneracy_tol decides when a spin tail is treated as exactly zero.
    """

    structural_tol: float = 1e-9
    degeneracy_tol: float = 1e-14


DEFAULT_POLICY = NumericPolicy()

# Symmetric blocks must equal their transpose this tightly before the
# constructor symmetrizes them; independent of NumericPolicy by design.
_SYM_INPUT_TOL = 1e-12


@dataclass(frozen=True)
class ConeDescriptor:
    """Names one symmetric cone: orthant(n), spin(n), sym(n), or a product.

    rank and ambient_dim are additive over products; nested products are
    allowed and contribute the same totals as their flattened form.
    """

    kind: str
    size: int = 0
    components: tuple["ConeDescriptor", ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "orthant":
            if self.size < 1:
                raise ValueError("orthant cone needs size >= 1")
        elif self.kind == "spin":
            if self.size < 2:
                raise ValueError("spin cone needs size >= 2")
        elif self.kind == "sym":
            if self.size < 1:
                raise ValueError("sym cone needs size >= 1")
        elif self.kind == "product":
            if not self.components:
                raise ValueError("product cone needs at least one component")
            if self.size != 0:
                raise ValueError("product cone carries no size of its own")
        else:
            raise ValueError(f"unknown cone kind {self.kind!r}")

    @staticmethod
    def orthant(n: int) -> "ConeDescriptor":
        return ConeDescriptor("orthant", int(n))

    @staticmethod
    def spin(n: int) -> "ConeDescriptor":
        return ConeDescriptor("spin", int(n))

    @staticmethod
    def sym(n: int) -> "ConeDescriptor":
        return ConeDescriptor("sym", int(n))

    @staticmethod
    def product(*components: "ConeDescriptor") -> "ConeDescriptor":
        return ConeDescriptor("product", 0, tuple(components))

    @property
    def rank(self) -> int:
        if self.kind == "orthant":
            return self.size
        if self.kind == "spin":
            return 2
        if self.kind == "sym":
            return self.size
        return sum(c.rank for c in self.components)

    @property
    def ambient_dim(self) -> int:
        """Number of independent real coordinates."""
        if self.kind == "sym":
            return self.size * (self.size + 1) // 2
        if self.kind == "product":
            return sum(c.ambient_dim for c in self.components)
        return self.size

    @property
    def flat_dim(self) -> int:
        """Length of the flattened storage layout (sym blocks store all n^2 entries)."""
        if self.kind == "sym":
            return self.size * self.size
        if self.kind == "product":
            return sum(c.flat_dim for c in self.components)
        return self.size

    @property
    def blocks(self) -> tuple["ConeDescriptor", ...]:
        """Top-level factors: the components of a product, else the cone itself."""
        return self.components if self.kind == "product" else (self,)


def _lock(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class EjaElement:
    """One algebra element.

    Payloads: orthant and spin store a length-n vector (spin order: scalar
    head first, tail after), sym stores the full symmetric n x n array, and
    products store one sub-element per component.
    """

    descriptor: ConeDescriptor
    data: Union[np.ndarray, tuple["EjaElement", ...]]

    def __post_init__(self) -> None:
        desc = self.descriptor
        if desc.kind == "product":
            parts = tuple(self.data)
            if len(parts) != len(desc.components):
                raise ValueError("product element has the wrong number of blocks")
            for part, comp in zip(parts, desc.components):
                if not isinstance(part, EjaElement) or part.descriptor != comp:
                    raise ValueError("product block does not match its component descriptor")
            object.__setattr__(self, "data", parts)
            return
        arr = np.asarray(self.data, dtype=float)
        if desc.kind == "sym":
            if arr.shape != (desc.size, desc.size):
                raise ValueError(f"sym block must be {desc.size}x{desc.size}, got {arr.shape}")
            skew = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
            if skew > _SYM_INPUT_TOL:
                raise ValueError(f"sym block asymmetry {skew:.3e} exceeds {_SYM_INPUT_TOL:.0e}")
            arr = (arr + arr.T) / 2.0
        elif arr.shape != (desc.size,):
            raise ValueError(f"{desc.kind} block must have shape ({desc.size},), got {arr.shape}")
        object.__setattr__(self, "data", _lock(arr))

    # -- constructors -------------------------------------------------------

    @staticmethod
    def orthant(values: Sequence[float]) -> "EjaElement":
        arr = np.asarray(values, dtype=float)
        return EjaElement(ConeDescriptor.orthant(arr.shape[0]), arr)

    @staticmethod
    def spin(head: float, tail: Sequence[float]) -> "EjaElement":
        tail_arr = np.asarray(tail, dtype=float)
        arr = np.concatenate(([float(head)], tail_arr))
        return EjaElement(ConeDescriptor.spin(arr.shape[0]), arr)

    @staticmethod
    def sym(matrix: Sequence[Sequence[float]]) -> "EjaElement":
        arr = np.asarray(matrix, dtype=float)
        return EjaElement(ConeDescriptor.sym(arr.shape[0]), arr)

    @staticmethod
    def of_blocks(blocks: Sequence["EjaElement"]) -> "EjaElement":
        parts = tuple(blocks)
        desc = ConeDescriptor.product(*(p.descriptor for p in parts))
        return EjaElement(desc, parts)

    @property
    def blocks(self) -> tuple["EjaElement", ...]:
        """Top-level factors: the sub-elements of a product, else the element itself."""
        return self.data if self.descriptor.kind == "product" else (self,)

    # -- flattened storage layout ------------------------------------------

    def to_flat(self) -> np.ndarray:
        """Concatenated coordinates; sym blocks contribute all n^2 entries row-major."""
        if self.descriptor.kind == "product":
            return np.concatenate([part.to_flat() for part in self.data])
        return np.asarray(self.data, dtype=float).reshape(-1).copy()

    @staticmethod
    def from_flat(desc: ConeDescriptor, flat: Sequence[float]) -> "EjaElement":
        vec = np.asarray(flat, dtype=float)
        if vec.shape != (desc.flat_dim,):
            raise ValueError(f"flat vector must have length {desc.flat_dim}, got {vec.shape}")
        if desc.kind == "product":
            parts = []
            offset = 0
            for comp in desc.components:
                width = comp.flat_dim
                parts.append(EjaElement.from_flat(comp, vec[offset : offset + width]))
                offset += width
            return EjaElement(desc, tuple(parts))
        if desc.kind == "sym":
            return EjaElement(desc, vec.reshape(desc.size, desc.size))
        return EjaElement(desc, vec)

    # -- linear arithmetic ---------------------------------------------------

    def _map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "EjaElement":
        if self.descriptor.kind == "product":
            return EjaElement(self.descriptor, tuple(part._map(fn) for part in self.data))
        return EjaElement(self.descriptor, fn(self.data))

    def _zip(self, other: "EjaElement", fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "EjaElement":
        _check_same_descriptor(self, other)
        if self.descriptor.kind == "product":
            parts = tuple(a._zip(b, fn) for a, b in zip(self.data, other.data))
            return EjaElement(self.descriptor, parts)
        return EjaElement(self.descriptor, fn(self.data, other.data))

    def __add__(self, other: "EjaElement") -> "EjaElement":
        return self._zip(other, np.add)

    def __sub__(self, other: "EjaElement") -> "EjaElement":
        return self._zip(other, np.subtract)

    def __neg__(self) -> "EjaElement":
        return self._map(np.negative)

    def __mul__(self, scalar: float) -> "EjaElement":
        s = float(scalar)
        return self._map(lambda a: a * s)

    __rmul__ = __mul__


def _check_same_descriptor(x: EjaElement, y: EjaElement) -> None:
    if x.descriptor != y.descriptor:
        raise ValueError(f"descriptor mismatch: {x.descriptor} vs {y.descriptor}")


def zero(desc: ConeDescriptor) -> EjaElement:
    if desc.kind == "product":
        return EjaElement(desc, tuple(zero(c) for c in desc.components))
    if desc.kind == "sym":
        return EjaElement(desc, np.zeros((desc.size, desc.size)))
    return EjaElement(desc, np.zeros(desc.size))


def identity(desc: ConeDescriptor) -> EjaElement:
    """Unit element: all-ones vector, (1, 0) spin pair, identity matrix, or blockwise."""
    if desc.kind == "product":
        return EjaElement(desc, tuple(identity(c) for c in desc.components))
    if desc.kind == "orthant":
        return EjaElement(desc, np.ones(desc.size))
    if desc.kind == "spin":
        arr = np.zeros(desc.size)
        arr[0] = 1.0
        return EjaElement(desc, arr)
    return EjaElement(desc, np.eye(desc.size))


def jordan_product(x: EjaElement, y: EjaElement) -> EjaElement:
    """Commutative bilinear product of the algebra; blockwise over products."""
    _check_same_descriptor(x, y)
    desc = x.descriptor
    if desc.kind == "product":
        parts = tuple(jordan_product(a, b) for a, b in zip(x.data, y.data))
        return EjaElement(desc, parts)
    if desc.kind == "orthant":
        return EjaElement(desc, x.data * y.data)
    if desc.kind == "spin":
        head = x.data[0] * y.data[0] + float(np.dot(x.data[1:], y.data[1:]))
        tail = x.data[0] * y.data[1:] + y.data[0] * x.data[1:]
        return EjaElement(desc, np.concatenate(([head], tail)))
    return EjaElement(desc, (x.data @ y.data + y.data @ x.data) / 2.0)


def trace(x: EjaElement) -> float:
    """Sum of eigenvalues; on spin blocks this is twice the scalar head."""
    desc = x.descriptor
    if desc.kind == "product":
        return float(sum(trace(part) for part in x.data))
    if desc.kind == "orthant":
        return float(np.sum(x.data))
    if desc.kind == "spin":
        return float(2.0 * x.data[0])
    return float(np.trace(x.data))


def inner(x: EjaElement, y: EjaElement) -> float:
    """Canonical pairing trace(x o y); on spin blocks twice the Euclidean dot."""
    _check_same_descriptor(x, y)
    desc = x.descriptor
    if desc.kind == "product":
        return float(sum(inner(a, b) for a, b in zip(x.data, y.data)))
    if desc.kind == "orthant":
        return float(np.dot(x.data, y.data))
    if desc.kind == "spin":
        return float(2.0 * np.dot(x.data, y.data))
    return float(np.sum(x.data * y.data))


def norm(x: EjaElement) -> float:
    return math.sqrt(max(inner(x, x), 0.0))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues with their Jordan frame of primitive idempotents."""

    eigenvalues: np.ndarray
    frame: tuple[EjaElement, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", _lock(self.eigenvalues))
        if len(self.eigenvalues) != len(self.frame):
            raise ValueError("eigenvalue count must match frame length")

    def reconstruct(self) -> EjaElement:
        out = zero(self.frame[0].descriptor)
        for lam, q in zip(self.eigenvalues, self.frame):
            out = out + float(lam) * q
        return out


def _embed_block(desc: ConeDescriptor, index: int, element: EjaElement) -> EjaElement:
    parts = [zero(c) for c in desc.components]
    parts[index] = element
    return EjaElement(desc, tuple(parts))


def spectral_decompose(x: EjaElement, policy: NumericPolicy = DEFAULT_POLICY) -> SpectralDecomposition:
    """Type-II spectral decomposition x = sum(lambda_i q_i).

    Deterministic ordering: orthant follows coordinate order, spin lists the
    large eigenvalue first, sym follows the ascending symmetric eigensolver,
    and products concatenate block decompositions with frames zero-embedded.
    """
    desc = x.descriptor
    if desc.kind == "orthant":
        frame = tuple(EjaElement(desc, row) for row in np.eye(desc.size))
        return SpectralDecomposition(x.data.copy(), frame)
    if desc.kind == "spin":
        head = float(x.data[0])
        tail = x.data[1:]
        tail_norm = float(np.linalg.norm(tail))
        if tail_norm < policy.degeneracy_tol:
            # Eigenvalues coincide; any unit direction gives a valid frame.
            direction = np.zeros(desc.size - 1)
            direction[0] = 1.0
        else:
            direction = tail / tail_norm
        q_plus = EjaElement(desc, np.concatenate(([0.5], 0.5 * direction)))
        q_minus = EjaElement(desc, np.concatenate(([0.5], -0.5 * direction)))
        values = np.array([head + tail_norm, head - tail_norm])
        return SpectralDecomposition(values, (q_plus, q_minus))
    if desc.kind == "sym":
        values, vectors = np.linalg.eigh(x.data)
        frame = tuple(EjaElement(desc, np.outer(vectors[:, i], vectors[:, i])) for i in range(desc.size))
        return SpectralDecomposition(values, frame)
    values_parts = []
    frame_parts: list[EjaElement] = []
    for index, part in enumerate(x.data):
        sub = spectral_decompose(part, policy)
        values_parts.append(sub.eigenvalues)
        frame_parts.extend(_embed_block(desc, index, q) for q in sub.frame)
    return SpectralDecomposition(np.concatenate(values_parts), tuple(frame_parts))


_SCALAR_FUNCTION_TAGS = ("exp", "ln", "abs", "pow")


def lowner_apply(
    x: EjaElement,
    fn: str,
    alpha: float | None = None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> EjaElement:
    """Apply a scalar function to the spectrum while keeping the frame.

    fn is one of "exp", "ln", "abs", "pow"; "pow" needs alpha and, for
    non-integer alpha, a strictly positive spectrum (so does "ln").
    """
    if fn not in _SCALAR_FUNCTION_TAGS:
        raise ValueError(f"unknown scalar function tag {fn!r}")
    decomposition = spectral_decompose(x, policy)
    lam = decomposition.eigenvalues
    if fn == "exp":
        values = np.exp(lam)
    elif fn == "abs":
        values = np.abs(lam)
    elif fn == "ln":
        if np.min(lam) <= 0.0:
            raise ValueError(f"ln needs a strictly positive spectrum; offending eigenvalue {np.min(lam)}")
        values = np.log(lam)
    else:
        if alpha is None:
            raise ValueError("pow needs an exponent alpha")
        exponent = float(alpha)
        if exponent != round(exponent) and np.min(lam) <= 0.0:
            raise ValueError(
                f"pow({exponent}) needs a strictly positive spectrum; offending eigenvalue {np.min(lam)}"
            )
        values = np.power(lam, exponent)
    out = zero(x.descriptor)
    for value, q in zip(values, decomposition.frame):
        out = out + float(value) * q
    return out


def trace_p_norm(x: EjaElement, p: float, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Spectral p-norm (sum |lambda_i|^p)^(1/p); p = inf gives max |lambda_i|."""
    lam = spectral_decompose(x, policy).eigenvalues
    if p == math.inf:
        return float(np.max(np.abs(lam)))
    p = float(p)
    if p < 1.0:
        raise ValueError(f"trace p-norm needs p >= 1, got {p}")
    return float(np.sum(np.abs(lam) ** p) ** (1.0 / p))


def in_cone(x: EjaElement, tol: float = 0.0, policy: NumericPolicy = DEFAULT_POLICY) -> bool:
    """Membership test: smallest eigenvalue >= -tol."""
    if tol < 0.0:
        raise ValueError("tolerance must be nonnegative")
    lam = spectral_decompose(x, policy).eigenvalues
    return bool(np.min(lam) >= -tol)


def _max_abs_coordinate(x: EjaElement) -> float:
    if x.descriptor.kind == "product":
        return max(_max_abs_coordinate(part) for part in x.data)
    return float(np.max(np.abs(x.data))) if np.asarray(x.data).size else 0.0


def _validate_frame(frame: Sequence[EjaElement], desc: ConeDescriptor, policy: NumericPolicy) -> None:
    tol = policy.structural_tol
    if not frame:
        raise ValueError("frame must be nonempty")
    total = zero(desc)
    for i, q in enumerate(frame):
        if q.descriptor != desc:
            raise ValueError("frame element descriptor mismatch")
        if _max_abs_coordinate(jordan_product(q, q) - q) > tol:
            raise ValueError(f"frame element {i} is not idempotent within {tol}")
        if abs(trace(q) - 1.0) > tol:
            raise ValueError(f"frame element {i} is not primitive (trace != 1 within {tol})")
        total = total + q
    for i in range(len(frame)):
        for j in range(i + 1, len(frame)):
            if _max_abs_coordinate(jordan_product(frame[i], frame[j])) > tol:
                raise ValueError(f"frame elements {i},{j} are not orthogonal within {tol}")
    if _max_abs_coordinate(total - identity(desc)) > tol:
        raise ValueError(f"frame does not sum to the identity within {tol}")


def diagonal_map(z: EjaElement, frame: Sequence[EjaElement], policy: NumericPolicy = DEFAULT_POLICY) -> EjaElement:
    """Project z onto the span of a Jordan frame: sum <z, q_i> q_i with unit-norm q_i.

    Primitive idempotents already have unit norm under the canonical pairing,
    so the explicit normalization is a robustness no-op; it is kept so the
    trace-preservation claim holds even for slightly perturbed frames.
    """
    _validate_frame(frame, z.descriptor, policy)
    out = zero(z.descriptor)
    for q in frame:
        scale = norm(q)
        if scale <= 0.0:
            raise ValueError("frame element has zero norm")
        unit = (1.0 / scale) * q
        out = out + inner(z, unit) * unit
    return out


def random_element(desc: ConeDescriptor, rng: np.random.Generator) -> EjaElement:
    """Gaussian element: i.i.d. standard normal coordinates per block."""
    if desc.kind == "product":
        return EjaElement(desc, tuple(random_element(c, rng) for c in desc.components))
    if desc.kind == "sym":
        raw = rng.standard_normal((desc.size, desc.size))
        return EjaElement(desc, (raw + raw.T) / 2.0)
    return EjaElement(desc, rng.standard_normal(desc.size))
