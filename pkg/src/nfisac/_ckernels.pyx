# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled belief kernels (same contract as ``_pykernels``)."""
import numpy as np
from libc.math cimport exp, ceil, log2, pow, isfinite


def gaussian_kernel(double sigma_bins):
    cdef Py_ssize_t half, i
    cdef double s = 0.0, x
    if sigma_bins <= 0.0:
        return np.ones(1)
    half = <Py_ssize_t>ceil(4.0 * sigma_bins)
    out = np.empty(2 * half + 1)
    cdef double[::1] k = out
    for i in range(2 * half + 1):
        x = (i - half) / sigma_bins
        k[i] = exp(-0.5 * x * x)
        s += k[i]
    for i in range(2 * half + 1):
        k[i] /= s
    return out


cdef inline Py_ssize_t _mirror(Py_ssize_t src, Py_ssize_t n) nogil:
    if src < 0:
        return -src - 1
    if src >= n:
        return 2 * n - src - 1
    return src


def predict_reflect(probs, kernel, double mixing=0.0):
    cdef const double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef const double[::1] k = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t half = (k.shape[0] - 1) // 2
    cdef Py_ssize_t j, m, lo, hi, width, base
    cdef double acc, scale, floor
    if half > n:
        raise ValueError("kernel longer than the grid")
    out = np.empty(n)
    cdef double[::1] o = out
    # interior bins never touch the boundary, so skip the mirror test there
    lo = half if half < n else n
    hi = n - half if n - half > lo else lo
    with nogil:
        # symmetric kernel, so forward indexing; a plain reduction the
        # compiler can vectorize
        width = 2 * half + 1
        for j in range(lo, hi):
            acc = 0.0
            base = j - half
            for m in range(width):
                acc = acc + k[m] * p[base + m]
            o[j] = acc
        for j in range(n):
            if lo <= j < hi:
                continue
            acc = 0.0
            for m in range(-half, half + 1):
                acc += k[m + half] * p[_mirror(j - m, n)]
            o[j] = acc
        # renormalize (rounding only) and blend in the uniform share
        acc = 0.0
        for j in range(n):
            acc = acc + o[j]
        scale = 1.0 - mixing
        floor = mixing / n
        if acc > 0.0:
            for j in range(n):
                o[j] = o[j] / acc * scale + floor
        else:
            for j in range(n):
                o[j] = floor
    return out


def posterior_update(pred, z, double k_eff):
    cdef const double[::1] p = np.ascontiguousarray(pred, dtype=np.float64)
    cdef const double[::1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], i
    cdef double total = 0.0, v
    out = np.empty(n)
    cdef double[::1] o = out
    if k_eff == 0.0:
        for i in range(n):
            o[i] = p[i]
            total += p[i]
    else:
        for i in range(n):
            v = p[i] * pow(zz[i], k_eff)
            o[i] = v
            total += v
    if not isfinite(total) or total <= 0.0:
        return np.array(p, copy=True), False
    for i in range(n):
        o[i] /= total
    return out, True


def entropy_bits(probs):
    cdef const double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double h = 0.0
    for i in range(p.shape[0]):
        if p[i] > 0.0:
            h -= p[i] * log2(p[i])
    return h
