"""Seeded Glorot-uniform parameter initialization."""

import numpy as np

from .tensor import Tensor


def glorot_uniform(shape, fan_in, fan_out, rng):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def zeros(shape):
    return Tensor(np.zeros(shape), requires_grad=True)


def conv_kernel(f, c, k, rng):
    """3D conv kernel (f, c, k, k, k); fans counted over the receptive field."""
    vol = k**3
    return glorot_uniform((f, c, k, k, k), c * vol, f * vol, rng)
