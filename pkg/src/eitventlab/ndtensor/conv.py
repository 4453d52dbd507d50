"""Backend-dispatching conv primitives on plain ndarrays.

Zero padding is applied here so the backend kernels never deal with it.
The three primitives are mutually adjoint:

    fw : y[n,f,o] = sum_{c,t} x[n,c,o*s+t] k[f,c,t]
    gi : adjoint of fw in x   (== transposed-conv forward)
    gk : adjoint of fw in k
"""

import numpy as np

from . import backend


def _pad5(x, p):
    if p == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p), (p, p)))


def _crop5(x, p):
    if p == 0:
        return x
    return x[:, :, p:-p, p:-p, p:-p]


def conv_out_extent(extent, k, stride, padding):
    return (extent + 2 * padding - k) // stride + 1


def conv_transpose_out_extent(extent, k, stride, padding):
    return (extent - 1) * stride - 2 * padding + k


def conv3d_forward(x, k, stride, padding):
    xc = np.ascontiguousarray(_pad5(x, padding))
    return backend.kernels().conv3d_fw(xc, np.ascontiguousarray(k), stride)


def conv3d_grad_input(gy, k, stride, padding, x_spatial):
    padded = tuple(e + 2 * padding for e in x_spatial)
    gx = backend.kernels().conv3d_gi(
        np.ascontiguousarray(gy), np.ascontiguousarray(k), stride, padded
    )
    return _crop5(gx, padding)


def conv3d_grad_kernel(gy, x, stride, padding, k_spatial):
    xc = np.ascontiguousarray(_pad5(x, padding))
    return backend.kernels().conv3d_gk(
        xc, np.ascontiguousarray(gy), stride, tuple(k_spatial)
    )


def conv_transpose3d_forward(x, k, stride, padding):
    # scatter to the unpadded extent, then crop the padding border
    full = tuple((e - 1) * stride + kk for e, kk in zip(x.shape[2:], k.shape[2:]))
    y = backend.kernels().conv3d_gi(
        np.ascontiguousarray(x), np.ascontiguousarray(k), stride, full
    )
    return _crop5(y, padding)


def conv_transpose3d_grad_input(gy, k, stride, padding):
    gyp = np.ascontiguousarray(_pad5(gy, padding))
    return backend.kernels().conv3d_fw(gyp, np.ascontiguousarray(k), stride)


def conv_transpose3d_grad_kernel(gy, x, stride, padding, k_spatial):
    gyp = np.ascontiguousarray(_pad5(gy, padding))
    return backend.kernels().conv3d_gk(
        gyp, np.ascontiguousarray(x), stride, tuple(k_spatial)
    )
