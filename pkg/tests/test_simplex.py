import math

import numpy as np
import pytest

from conemwu.cones import (
    ConeDescriptor,
    EjaElement,
    diagonal_map,
    identity,
    inner,
    lowner_apply,
    random_element,
    spectral_decompose,
    trace_p_norm,
)
from conemwu.simplex import (
    SimplexPoint,
    bregman,
    entropy,
    exp_normalize,
    log_rank,
    random_interior_point,
    support_max,
    uniform_point,
)
from oracles import scalar_relative_entropy

RNG = np.random.default_rng(91)

SLICE_DESCRIPTORS = [
    ConeDescriptor.orthant(5),
    ConeDescriptor.spin(6),
    ConeDescriptor.sym(4),
    ConeDescriptor.product(
        ConeDescriptor.orthant(3), ConeDescriptor.spin(4), ConeDescriptor.sym(2)
    ),
]


# ---------------------------------------------------------------- validation


def test_simplex_point_accepts_valid_and_rejects_invalid():
    SimplexPoint(EjaElement.orthant(np.array([0.2, 0.8])))
    with pytest.raises(ValueError):
        SimplexPoint(EjaElement.orthant(np.array([0.2, 0.9])))  # trace 1.1
    with pytest.raises(ValueError):
        SimplexPoint(EjaElement.orthant(np.array([-0.2, 1.2])))  # outside cone


def test_per_block_slice_convention():
    desc = ConeDescriptor.product(ConeDescriptor.orthant(2), ConeDescriptor.orthant(2))
    blocks = EjaElement.of_blocks(
        [EjaElement.orthant(np.array([0.5, 0.5])), EjaElement.orthant(np.array([1.0, 0.0]))]
    )
    SimplexPoint(blocks, per_block=True)
    with pytest.raises(ValueError):
        SimplexPoint(blocks)  # global trace is 2, not 1
    half = EjaElement.of_blocks(
        [EjaElement.orthant(np.array([0.25, 0.25])), EjaElement.orthant(np.array([0.5, 0.0]))]
    )
    SimplexPoint(half)
    with pytest.raises(ValueError):
        SimplexPoint(half, per_block=True)


def test_uniform_point():
    assert np.allclose(uniform_point(ConeDescriptor.orthant(4)).element.data, 0.25)
    spin = uniform_point(ConeDescriptor.spin(3)).element
    assert np.allclose(spin.data, [0.5, 0.0, 0.0])
    sym = uniform_point(ConeDescriptor.sym(3)).element
    assert np.allclose(sym.data, np.eye(3) / 3.0)
    prod = ConeDescriptor.product(ConeDescriptor.orthant(2), ConeDescriptor.sym(2))
    global_uniform = uniform_point(prod)
    assert np.allclose(global_uniform.element.blocks[0].data, [0.25, 0.25])
    per_block_uniform = uniform_point(prod, per_block=True)
    assert np.allclose(per_block_uniform.element.blocks[0].data, [0.5, 0.5])
    assert np.allclose(per_block_uniform.element.blocks[1].data, np.eye(2) / 2.0)


# ---------------------------------------------------------------- entropy


def test_entropy_frozen_values():
    x = SimplexPoint(EjaElement.orthant(np.array([0.2, 0.3, 0.5])))
    assert entropy(x) == pytest.approx(-1.0296530140645737, abs=1e-14)
    s = SimplexPoint(EjaElement.spin(0.5, np.array([0.1, 0.2])))
    assert entropy(s) == pytest.approx(-0.5895144857350482, abs=1e-14)


def test_entropy_of_uniform_is_minus_log_rank():
    for desc in SLICE_DESCRIPTORS:
        u = uniform_point(desc)
        assert entropy(u) == pytest.approx(-math.log(desc.rank), abs=1e-12)


def test_entropy_boundary_behaviour():
    vertex = SimplexPoint(EjaElement.orthant(np.array([1.0, 0.0])))
    with pytest.raises(ValueError, match="0"):
        entropy(vertex)
    assert entropy(vertex, boundary_tolerant=True) == pytest.approx(0.0)


def test_entropy_unitary_invariance_on_sym():
    lam = np.array([0.6, 0.3, 0.1])
    q, _ = np.linalg.qr(RNG.normal(size=(3, 3)))
    rotated = SimplexPoint(EjaElement.sym(q @ np.diag(lam) @ q.T))
    assert entropy(rotated) == pytest.approx(float(np.sum(lam * np.log(lam))), abs=1e-10)


# ---------------------------------------------------------------- divergence


def test_bregman_frozen_value_matches_scalar_oracle():
    x = SimplexPoint(EjaElement.orthant(np.array([0.2, 0.3, 0.5])))
    y = SimplexPoint(EjaElement.orthant(np.array([0.5, 0.25, 0.25])))
    expected = scalar_relative_entropy([0.2, 0.3, 0.5], [0.5, 0.25, 0.25])
    assert expected == pytest.approx(0.21801191094332806, abs=1e-15)
    assert bregman(x, y) == pytest.approx(expected, abs=1e-12)


def test_bregman_identity_and_nonnegativity():
    for desc in SLICE_DESCRIPTORS:
        x = random_interior_point(desc, RNG)
        y = random_interior_point(desc, RNG)
        assert bregman(x, x) == pytest.approx(0.0, abs=1e-10)
        assert bregman(x, y) >= -1e-10


def test_bregman_matches_quantum_relative_entropy_on_sym():
    from scipy.linalg import logm

    for _ in range(20):
        x = random_interior_point(ConeDescriptor.sym(3), RNG)
        y = random_interior_point(ConeDescriptor.sym(3), RNG)
        a, b = x.element.data, y.element.data
        expected = float(np.trace(a @ logm(a)) - np.trace(a @ logm(b)))
        assert bregman(x, y) == pytest.approx(expected, abs=1e-8)


def test_bregman_strong_convexity():
    # relative entropy dominates half the squared trace-1 distance
    for desc in SLICE_DESCRIPTORS:
        for _ in range(50):
            x = random_interior_point(desc, RNG)
            y = random_interior_point(desc, RNG)
            gap = bregman(x, y) - 0.5 * trace_p_norm(x.element - y.element, 1) ** 2
            assert gap >= -1e-9


def test_bregman_data_processing():
    for desc in (ConeDescriptor.sym(3), ConeDescriptor.spin(5)):
        for _ in range(25):
            x = random_interior_point(desc, RNG)
            y = random_interior_point(desc, RNG)
            frame = spectral_decompose(x.element - y.element).frame
            pinched_x = SimplexPoint(diagonal_map(x.element, frame))
            pinched_y = SimplexPoint(diagonal_map(y.element, frame))
            assert bregman(pinched_x, pinched_y) <= bregman(x, y) + 1e-9


# ---------------------------------------------------------------- exp-normalize


def test_exp_normalize_is_softmax_on_orthant():
    point = exp_normalize(EjaElement.orthant(np.array([1.0, 0.0])))
    z = math.exp(1.0)
    assert np.allclose(point.element.data, [z / (z + 1.0), 1.0 / (z + 1.0)], atol=1e-15)


def test_exp_normalize_shift_invariance():
    for desc in SLICE_DESCRIPTORS:
        w = random_element(desc, RNG)
        shifted = w + 17.3 * identity(desc)
        a = exp_normalize(w).element.to_flat()
        b = exp_normalize(shifted).element.to_flat()
        assert np.allclose(a, b, atol=1e-10)


def test_exp_normalize_survives_large_payoffs():
    w = EjaElement.orthant(np.array([1e6, 1e6 - 3.0]))
    point = exp_normalize(w)
    z = math.exp(3.0)
    assert np.allclose(point.element.data, [z / (z + 1.0), 1.0 / (z + 1.0)], atol=1e-12)


def test_exp_normalize_covariant_under_rotation():
    lam = np.array([0.9, -0.4, 0.2])
    q, _ = np.linalg.qr(RNG.normal(size=(3, 3)))
    w = EjaElement.sym(q @ np.diag(lam) @ q.T)
    weights = np.exp(lam - lam.max())
    expected = q @ np.diag(weights / weights.sum()) @ q.T
    assert np.allclose(exp_normalize(w).element.data, expected, atol=1e-12)


def test_exp_normalize_per_block():
    desc = ConeDescriptor.product(ConeDescriptor.orthant(2), ConeDescriptor.orthant(2))
    w = EjaElement.of_blocks(
        [EjaElement.orthant(np.array([1.0, 0.0])), EjaElement.orthant(np.array([0.0, 0.0]))]
    )
    point = exp_normalize(w, per_block=True)
    z = math.exp(1.0)
    assert np.allclose(point.element.blocks[0].data, [z / (z + 1.0), 1.0 / (z + 1.0)])
    assert np.allclose(point.element.blocks[1].data, [0.5, 0.5])
    assert point.per_block


def test_exp_normalize_result_is_valid_point():
    for desc in SLICE_DESCRIPTORS:
        for _ in range(10):
            w = random_element(desc, RNG) * 4.0
            point = exp_normalize(w)
            assert point.element.descriptor == desc


# ---------------------------------------------------------------- support


def test_support_max_orthant_ties_take_first():
    c = EjaElement.orthant(np.array([2.0, 5.0, 5.0]))
    value, arg = support_max(c)
    assert value == pytest.approx(5.0)
    assert np.allclose(arg.element.data, [0.0, 1.0, 0.0])


def test_support_max_attains_value():
    for desc in SLICE_DESCRIPTORS:
        for _ in range(25):
            c = random_element(desc, RNG)
            value, arg = support_max(c)
            assert inner(c, arg.element) == pytest.approx(value, rel=1e-9, abs=1e-9)
            assert value == pytest.approx(
                float(spectral_decompose(c).eigenvalues.max()), rel=1e-9, abs=1e-9
            )


def test_support_max_dominates_feasible_points():
    for desc in SLICE_DESCRIPTORS:
        c = random_element(desc, RNG)
        value, _ = support_max(c)
        for _ in range(25):
            x = random_interior_point(desc, RNG)
            assert inner(c, x.element) <= value + 1e-9


def test_support_max_per_block_sums_blocks():
    desc = ConeDescriptor.product(ConeDescriptor.orthant(2), ConeDescriptor.spin(3))
    c = EjaElement.of_blocks(
        [EjaElement.orthant(np.array([1.0, -2.0])), EjaElement.spin(0.5, np.array([3.0, 4.0]))]
    )
    value, arg = support_max(c, per_block=True)
    # block maxima: 1 and 0.5 + 5
    assert value == pytest.approx(6.5)
    assert arg.per_block
    assert inner(c, arg.element) == pytest.approx(6.5)


# ---------------------------------------------------------------- helpers


def test_random_interior_point_is_strictly_inside():
    for desc in SLICE_DESCRIPTORS:
        for _ in range(10):
            x = random_interior_point(desc, RNG)
            eigs = spectral_decompose(x.element).eigenvalues
            assert eigs.min() > 0.0


def test_log_rank_values():
    assert log_rank(ConeDescriptor.orthant(8)) == pytest.approx(math.log(8))
    assert log_rank(ConeDescriptor.spin(9)) == pytest.approx(math.log(2))
    prod = ConeDescriptor.product(ConeDescriptor.orthant(4), ConeDescriptor.sym(3))
    assert log_rank(prod) == pytest.approx(math.log(7))
    assert log_rank(prod, per_block=True) == pytest.approx(math.log(4) + math.log(3))
