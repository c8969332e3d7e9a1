"""Dense tensor primitives, seeded random streams and the finite-difference oracle."""

from __future__ import annotations

from pixel_eql.core.gradcheck import finite_difference_grad, relative_error
from pixel_eql.core.rng import numpy_rng, seed_everything, torch_generator
from pixel_eql.core.tensor import (
    affine,
    categorical,
    check_finite,
    clip01,
    entropy,
    gradients,
    log_prob,
    softmax,
    unit_frames,
)

__all__ = [
    "affine",
    "softmax",
    "categorical",
    "log_prob",
    "entropy",
    "clip01",
    "check_finite",
    "unit_frames",
    "gradients",
    "finite_difference_grad",
    "relative_error",
    "numpy_rng",
    "torch_generator",
    "seed_everything",
]
