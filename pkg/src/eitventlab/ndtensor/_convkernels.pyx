# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled conv kernels. Same contracts as _kernels_numpy (padding done by caller).

Accumulation order per output element is fixed, so results are deterministic.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv3d_fw(double[:, :, :, :, ::1] x, double[:, :, :, :, ::1] k, int stride):
    cdef Py_ssize_t N = x.shape[0], C = x.shape[1]
    cdef Py_ssize_t D = x.shape[2], H = x.shape[3], W = x.shape[4]
    cdef Py_ssize_t F = k.shape[0]
    cdef Py_ssize_t kd = k.shape[2], kh = k.shape[3], kw = k.shape[4]
    cdef Py_ssize_t od = (D - kd) // stride + 1
    cdef Py_ssize_t oh = (H - kh) // stride + 1
    cdef Py_ssize_t ow = (W - kw) // stride + 1
    out_arr = np.zeros((N, F, od, oh, ow), dtype=np.float64)
    cdef double[:, :, :, :, ::1] y = out_arr
    cdef Py_ssize_t n, f, c, i, j, m, a, b, g
    cdef double kv
    for n in range(N):
        for f in range(F):
            for c in range(C):
                for i in range(kd):
                    for j in range(kh):
                        for m in range(kw):
                            kv = k[f, c, i, j, m]
                            for a in range(od):
                                for b in range(oh):
                                    for g in range(ow):
                                        y[n, f, a, b, g] += kv * x[n, c, a * stride + i, b * stride + j, g * stride + m]
    return out_arr


def conv3d_gi(double[:, :, :, :, ::1] gy, double[:, :, :, :, ::1] k, int stride, in_spatial):
    cdef Py_ssize_t N = gy.shape[0], F = gy.shape[1]
    cdef Py_ssize_t od = gy.shape[2], oh = gy.shape[3], ow = gy.shape[4]
    cdef Py_ssize_t C = k.shape[1]
    cdef Py_ssize_t kd = k.shape[2], kh = k.shape[3], kw = k.shape[4]
    cdef Py_ssize_t D = in_spatial[0], H = in_spatial[1], W = in_spatial[2]
    out_arr = np.zeros((N, C, D, H, W), dtype=np.float64)
    cdef double[:, :, :, :, ::1] gx = out_arr
    cdef Py_ssize_t n, f, c, i, j, m, a, b, g
    cdef double kv
    for n in range(N):
        for c in range(C):
            for f in range(F):
                for i in range(kd):
                    for j in range(kh):
                        for m in range(kw):
                            kv = k[f, c, i, j, m]
                            for a in range(od):
                                for b in range(oh):
                                    for g in range(ow):
                                        gx[n, c, a * stride + i, b * stride + j, g * stride + m] += kv * gy[n, f, a, b, g]
    return out_arr


def conv3d_gk(double[:, :, :, :, ::1] x, double[:, :, :, :, ::1] gy, int stride, k_spatial):
    cdef Py_ssize_t N = x.shape[0], C = x.shape[1]
    cdef Py_ssize_t F = gy.shape[1]
    cdef Py_ssize_t od = gy.shape[2], oh = gy.shape[3], ow = gy.shape[4]
    cdef Py_ssize_t kd = k_spatial[0], kh = k_spatial[1], kw = k_spatial[2]
    out_arr = np.zeros((F, C, kd, kh, kw), dtype=np.float64)
    cdef double[:, :, :, :, ::1] gk = out_arr
    cdef Py_ssize_t n, f, c, i, j, m, a, b, g
    cdef double acc
    for f in range(F):
        for c in range(C):
            for i in range(kd):
                for j in range(kh):
                    for m in range(kw):
                        acc = 0.0
                        for n in range(N):
                            for a in range(od):
                                for b in range(oh):
                                    for g in range(ow):
                                        acc += gy[n, f, a, b, g] * x[n, c, a * stride + i, b * stride + j, g * stride + m]
                        gk[f, c, i, j, m] = acc
    return out_arr
