"""Pure-numpy conv kernels (fallback backend).

All three kernels assume the caller has already applied zero padding, so
padding is always 0 here. Shapes:

    x  (N, C, D, H, W)    input
    k  (F, C, kd, kh, kw) kernel
    y  (N, F, OD, OH, OW) output, O = (in - k) // stride + 1
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv3d_fw(x, k, stride):
    win = sliding_window_view(x, k.shape[2:], axis=(2, 3, 4))
    if stride > 1:
        win = win[:, :, ::stride, ::stride, ::stride]
    return np.einsum("ncdhwijk,fcijk->nfdhw", win, k, optimize=True)


def conv3d_gi(gy, k, stride, in_spatial):
    """Adjoint of conv3d_fw w.r.t. x; also the transposed-conv forward."""
    n, f = gy.shape[:2]
    c = k.shape[1]
    gx = np.zeros((n, c, *in_spatial), dtype=np.float64)
    od, oh, ow = gy.shape[2:]
    for i in range(k.shape[2]):
        di = slice(i, i + (od - 1) * stride + 1, stride)
        for j in range(k.shape[3]):
            hj = slice(j, j + (oh - 1) * stride + 1, stride)
            for m in range(k.shape[4]):
                wm = slice(m, m + (ow - 1) * stride + 1, stride)
                gx[:, :, di, hj, wm] += np.einsum(
                    "nfdhw,fc->ncdhw", gy, k[:, :, i, j, m], optimize=True
                )
    return gx


def conv3d_gk(x, gy, stride, k_spatial):
    win = sliding_window_view(x, k_spatial, axis=(2, 3, 4))
    if stride > 1:
        win = win[:, :, ::stride, ::stride, ::stride]
    return np.einsum("ncdhwijk,nfdhw->fcijk", win, gy, optimize=True)
