from __future__ import annotations

import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from pixel_eql.core import (
    affine,
    categorical,
    check_finite,
    clip01,
    entropy,
    gradients,
    log_prob,
    softmax,
    torch_generator,
    unit_frames,
)
from pixel_eql.core.gradcheck import finite_difference_grad, relative_error
from pixel_eql.errors import ContractError, DimensionError, NumericError

logit_vectors = st.lists(st.floats(-50.0, 50.0, allow_nan=False), min_size=1, max_size=8)


def test_affine_matches_matmul():
    W = torch.tensor([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], dtype=torch.float64)
    b = torch.tensor([0.5, -0.5, 0.0], dtype=torch.float64)
    x = torch.tensor([1.0, -1.0], dtype=torch.float64)
    assert torch.allclose(affine(W, b, x), W @ x + b)


def test_affine_batched():
    W = torch.randn(4, 3, dtype=torch.float64)
    b = torch.randn(4, dtype=torch.float64)
    x = torch.randn(5, 3, dtype=torch.float64)
    assert affine(W, b, x).shape == (5, 4)


@pytest.mark.parametrize(
    "w_shape,b_shape,x_shape",
    [((3, 2), (3,), (3,)), ((3, 2), (2,), (2,)), ((3,), (3,), (3,))],
)
def test_affine_rejects_nonconforming_shapes(w_shape, b_shape, x_shape):
    with pytest.raises(DimensionError):
        affine(torch.zeros(w_shape), torch.zeros(b_shape), torch.zeros(x_shape))


def test_softmax_is_stable_for_large_logits():
    probs = softmax(torch.tensor([1000.0, 1000.0, -1000.0], dtype=torch.float64))
    assert torch.allclose(probs, torch.tensor([0.5, 0.5, 0.0], dtype=torch.float64))


def test_softmax_of_empty_vector_raises():
    with pytest.raises(DimensionError):
        softmax(torch.zeros(0))


def test_categorical_rejects_distribution_not_summing_to_one():
    with pytest.raises(ContractError):
        categorical(torch.tensor([0.5, 0.4], dtype=torch.float64), torch_generator(0))


def test_categorical_rejects_negative_probability():
    with pytest.raises(ContractError):
        categorical(torch.tensor([1.2, -0.2], dtype=torch.float64), torch_generator(0))


def test_categorical_is_reproducible_with_same_generator_seed():
    probs = torch.tensor([0.2, 0.3, 0.5], dtype=torch.float64).expand(50, 3)
    a = categorical(probs, torch_generator(7, "x"))
    b = categorical(probs, torch_generator(7, "x"))
    assert torch.equal(a, b)


def test_categorical_never_draws_zero_probability_action():
    probs = torch.tensor([0.0, 1.0, 0.0], dtype=torch.float64).expand(100, 3)
    assert bool((categorical(probs, torch_generator(1)) == 1).all())


def test_log_prob_and_entropy():
    probs = torch.tensor([0.25, 0.25, 0.5], dtype=torch.float64)
    assert math.isclose(float(log_prob(probs, 2)), math.log(0.5))
    expected = -(0.25 * math.log(0.25) * 2 + 0.5 * math.log(0.5))
    assert math.isclose(float(entropy(probs)), expected)


def test_entropy_treats_zero_probability_as_zero_contribution():
    assert float(entropy(torch.tensor([1.0, 0.0], dtype=torch.float64))) == 0.0


def test_clip01_values():
    x = torch.tensor([-0.5, 0.0, 0.3, 1.0, 1.7], dtype=torch.float64)
    assert clip01(x).tolist() == [0.0, 0.0, 0.3, 1.0, 1.0]


def test_clip01_gradient_passes_only_strictly_inside():
    x = torch.tensor([-0.5, 0.0, 0.3, 1.0, 1.7], dtype=torch.float64, requires_grad=True)
    clip01(x).sum().backward()
    assert x.grad.tolist() == [0.0, 0.0, 1.0, 0.0, 0.0]


def test_gradients_returns_zeros_for_unused_parameters():
    a = torch.tensor(2.0, dtype=torch.float64, requires_grad=True)
    unused = torch.ones(3, dtype=torch.float64, requires_grad=True)
    grads = gradients(a**3, [a, unused])
    assert float(grads[0]) == pytest.approx(12.0)
    assert torch.equal(grads[1], torch.zeros(3, dtype=torch.float64))


def test_gradients_needs_scalar_output():
    a = torch.ones(2, requires_grad=True)
    with pytest.raises(DimensionError):
        gradients(a * 2, [a])


def test_check_finite():
    check_finite(torch.ones(2))
    with pytest.raises(NumericError):
        check_finite(torch.tensor([1.0, float("nan")]), "logits")


def test_softmax_of_ln2_and_zero():
    probs = softmax(torch.tensor([math.log(2.0), 0.0], dtype=torch.float64))
    assert probs.tolist() == pytest.approx([2 / 3, 1 / 3], abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(logit_vectors)
def test_softmax_sums_to_one(values):
    probs = softmax(torch.tensor(values, dtype=torch.float64))
    assert abs(float(probs.sum()) - 1.0) <= 1e-12
    assert bool((probs >= 0).all())


@settings(max_examples=100, deadline=None)
@given(logit_vectors, st.floats(-100.0, 100.0, allow_nan=False))
def test_softmax_ignores_a_constant_shift(values, shift):
    logits = torch.tensor(values, dtype=torch.float64)
    assert torch.allclose(softmax(logits + shift), softmax(logits), atol=1e-12, rtol=0.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=8, unique=True))
def test_softmax_keeps_the_argmax(values):
    logits = torch.tensor(values, dtype=torch.float64) / 10.0
    assert int(softmax(logits).argmax()) == int(logits.argmax())


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10.0, 10.0, allow_nan=False), min_size=1, max_size=8))
def test_clip01_is_idempotent(values):
    x = torch.tensor(values, dtype=torch.float64)
    once = clip01(x)
    assert torch.equal(clip01(once), once)


def test_affine_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(100):
        W = torch.tensor(rng.normal(size=(3, 4)), dtype=torch.float64)
        b = torch.tensor(rng.normal(size=3), dtype=torch.float64)
        c = torch.tensor(rng.normal(size=3), dtype=torch.float64)
        x = torch.tensor(rng.normal(size=4), dtype=torch.float64, requires_grad=True)

        def f(v):
            return (c * affine(W, b, v)).sum()

        (analytic,) = gradients(f(x), [x])
        numeric = finite_difference_grad(f, x, eps=1e-6)
        assert relative_error(analytic, numeric) < 1e-6


def test_affine_weight_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    for _ in range(100):
        W = torch.tensor(rng.normal(size=(2, 3)), dtype=torch.float64, requires_grad=True)
        b = torch.tensor(rng.normal(size=2), dtype=torch.float64)
        x = torch.tensor(rng.normal(size=3), dtype=torch.float64)
        c = torch.tensor(rng.normal(size=2), dtype=torch.float64)

        def f(w):
            return (c * affine(w, b, x)).sum()

        (analytic,) = gradients(f(W), [W])
        numeric = finite_difference_grad(f, W, eps=1e-6)
        assert relative_error(analytic, numeric) < 1e-6


def test_softmax_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    for _ in range(100):
        c = torch.tensor(rng.normal(size=5), dtype=torch.float64)
        z = torch.tensor(rng.normal(scale=2.0, size=5), dtype=torch.float64, requires_grad=True)

        def f(v):
            return (c * softmax(v)).sum()

        (analytic,) = gradients(f(z), [z])
        numeric = finite_difference_grad(f, z, eps=1e-6)
        assert relative_error(analytic, numeric) < 1e-6


def test_clip01_gradient_matches_finite_differences_inside():
    rng = np.random.default_rng(3)
    for _ in range(100):
        c = torch.tensor(rng.normal(size=4), dtype=torch.float64)
        x = torch.tensor(rng.uniform(0.05, 0.95, size=4), dtype=torch.float64, requires_grad=True)

        def f(v):
            return (c * clip01(v)).sum()

        (analytic,) = gradients(f(x), [x])
        numeric = finite_difference_grad(f, x, eps=1e-6)
        assert relative_error(analytic, numeric) < 1e-6


def test_unit_frames_maps_gray_levels_to_unit_interval():
    frames = np.array([[0, 51, 255]], dtype=np.uint8)
    out = unit_frames(frames, torch.float64)
    assert out.dtype == torch.float64
    assert out.tolist() == [[0.0, 0.2, 1.0]]


def test_unit_frames_rejects_float_input():
    with pytest.raises(ContractError):
        unit_frames(np.zeros((2, 2), dtype=np.float32))
