"""JSON interchange for bilinear games over flattened block coordinates.

Layout: orthant blocks contribute n coordinates, spin blocks n (scalar head
first), sym blocks all n^2 row-major entries, products concatenate.  The
forward operator is a dense matrix from x-coordinates to y-coordinates; the
adjoint is derived internally with the pairing weights (2 on spin
coordinates, 1 elsewhere), so files only ever carry the forward matrix.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .cones import ConeDescriptor, EjaElement, zero
from .games import BilinearZeroSumGame

__all__ = [
    "descriptor_to_json",
    "descriptor_from_json",
    "pairing_weights",
    "load_game",
]


def descriptor_to_json(desc: ConeDescriptor) -> dict[str, Any]:
    if desc.kind == "product":
        return {"kind": "product", "components": [descriptor_to_json(c) for c in desc.components]}
    return {"kind": desc.kind, "size": desc.size}


def descriptor_from_json(obj: Any) -> ConeDescriptor:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("cone descriptor must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "product":
        components = obj.get("components")
        if not isinstance(components, list) or not components:
            raise ValueError("product descriptor needs a nonempty 'components' list")
        return ConeDescriptor.product(*(descriptor_from_json(c) for c in components))
    if kind not in ("orthant", "spin", "sym"):
        raise ValueError(f"unknown cone kind {kind!r}")
    size = obj.get("size")
    if not isinstance(size, int):
        raise ValueError(f"{kind} descriptor needs an integer 'size'")
    return ConeDescriptor(kind, size)


def pairing_weights(desc: ConeDescriptor) -> np.ndarray:
    """Diagonal of the canonical pairing in flat coordinates."""
    if desc.kind == "product":
        return np.concatenate([pairing_weights(c) for c in desc.components])
    if desc.kind == "spin":
        return np.full(desc.size, 2.0)
    return np.ones(desc.flat_dim)


def _power_iteration_norm(matrix: np.ndarray, iterations: int = 200) -> float:
    """Largest singular value estimate with a deterministic start vector."""
    if matrix.size == 0:
        return 0.0
    vector = np.ones(matrix.shape[1]) / np.sqrt(matrix.shape[1])
    value = 0.0
    for _ in range(iterations):
        image = matrix.T @ (matrix @ vector)
        length = float(np.linalg.norm(image))
        if length < 1e-300:
            return 0.0
        vector = image / length
        value = length
    return float(np.sqrt(value))


def load_game(path: str) -> BilinearZeroSumGame:
    """Build a game from a JSON file; validation errors carry the offending field."""
    with open(path, encoding="utf-8") as handle:
        obj = json.load(handle)
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    for key in ("cone_x", "cone_y", "forward"):
        if key not in obj:
            raise ValueError(f"{path}: missing required field {key!r}")
    desc_x = descriptor_from_json(obj["cone_x"])
    desc_y = descriptor_from_json(obj["cone_y"])
    matrix = np.asarray(obj["forward"], dtype=float)
    if matrix.shape != (desc_y.flat_dim, desc_x.flat_dim):
        raise ValueError(
            f"{path}: forward matrix must be {desc_y.flat_dim} x {desc_x.flat_dim}, got {matrix.shape}"
        )
    offset_x = (
        EjaElement.from_flat(desc_x, np.asarray(obj["offset_x"], dtype=float))
        if "offset_x" in obj
        else zero(desc_x)
    )
    offset_y = (
        EjaElement.from_flat(desc_y, np.asarray(obj["offset_y"], dtype=float))
        if "offset_y" in obj
        else zero(desc_y)
    )
    weights_x = pairing_weights(desc_x)
    weights_y = pairing_weights(desc_y)
    adjoint_matrix = (matrix.T * weights_y[None, :]) / weights_x[:, None]

    def forward(x: EjaElement) -> EjaElement:
        try:
            return EjaElement.from_flat(desc_y, matrix @ x.to_flat())
        except ValueError as exc:
            raise ValueError(f"{path}: forward matrix does not respect sym block symmetry: {exc}") from None

    def adjoint(y: EjaElement) -> EjaElement:
        try:
            return EjaElement.from_flat(desc_x, adjoint_matrix @ y.to_flat())
        except ValueError as exc:
            raise ValueError(f"{path}: adjoint of the forward matrix breaks sym block symmetry: {exc}") from None

    lipschitz = obj.get("lipschitz")
    estimated = False
    if lipschitz is not None:
        if (
            not isinstance(lipschitz, list)
            or len(lipschitz) != 2
            or not all(isinstance(v, (int, float)) and v >= 0 for v in lipschitz)
        ):
            raise ValueError(f"{path}: 'lipschitz' must be a pair of nonnegative numbers")
        lipschitz_x, lipschitz_y = float(lipschitz[0]), float(lipschitz[1])
    else:
        # Coarse payoff bound: sqrt(2) sigma_max covers every slice point's flat
        # norm and the spin/sym spectral gaps; offsets add their own bound.
        operator = _power_iteration_norm(matrix)
        lipschitz_x = np.sqrt(2.0) * operator + float(np.max(np.abs(offset_x.to_flat()), initial=0.0)) * 2.0
        lipschitz_y = np.sqrt(2.0) * operator + float(np.max(np.abs(offset_y.to_flat()), initial=0.0)) * 2.0
        estimated = True
    return BilinearZeroSumGame(
        desc_x=desc_x,
        desc_y=desc_y,
        forward=forward,
        adjoint=adjoint,
        offset_x=offset_x,
        offset_y=offset_y,
        lipschitz_x=lipschitz_x,
        lipschitz_y=lipschitz_y,
        x_per_block=bool(obj.get("x_per_block", False)),
        y_per_block=bool(obj.get("y_per_block", False)),
        lipschitz_estimated=estimated,
    )
