# Compiled twins of the kernels in _purepy.py. Same functions, same
# semantics. C loops are used where they beat numpy (window smoothing,
# fused scalar passes); matmul-shaped work stays on BLAS, which plain
# loops cannot touch.

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log1p, sqrt

cnp.import_array()

BACKEND = "cython"

cdef double SQRT_2PI = sqrt(2.0 * 3.14159265358979323846)


cdef inline double _softplus(double z) nogil:
    if z > 0.0:
        return z + log1p(exp(-z))
    return log1p(exp(z))


cdef inline double _sigmoid_scalar(double z) nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def _check_window(int window):
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")


def window_mean(x, int window):
    _check_window(window)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xa.shape[0]
    cdef Py_ssize_t d = xa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, d), dtype=np.float64)
    cdef Py_ssize_t r = (window - 1) // 2
    cdef Py_ssize_t i, j, k, lo, hi
    cdef double acc, cnt
    for i in range(n):
        lo = i - r
        if lo < 0:
            lo = 0
        hi = i + r
        if hi > n - 1:
            hi = n - 1
        cnt = <double>(hi - lo + 1)
        for j in range(d):
            acc = 0.0
            for k in range(lo, hi + 1):
                acc += xa[k, j]
            out[i, j] = acc / cnt
    return out


def window_mean_backward(dh, int window):
    _check_window(window)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g = np.ascontiguousarray(dh, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    cdef Py_ssize_t d = g.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, d), dtype=np.float64)
    cdef Py_ssize_t r = (window - 1) // 2
    cdef Py_ssize_t i, j, k, lo, hi
    cdef double cnt
    for i in range(n):
        lo = i - r
        if lo < 0:
            lo = 0
        hi = i + r
        if hi > n - 1:
            hi = n - 1
        cnt = <double>(hi - lo + 1)
        for k in range(lo, hi + 1):
            for j in range(d):
                out[k, j] += g[i, j] / cnt
    return out


def column_softmax(z):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] za = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = za.shape[0]
    cdef Py_ssize_t m = za.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, m), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double mx, total
    if n == 0:
        return out
    for j in range(m):
        mx = za[0, j]
        for i in range(1, n):
            if za[i, j] > mx:
                mx = za[i, j]
        total = 0.0
        for i in range(n):
            out[i, j] = exp(za[i, j] - mx)
            total += out[i, j]
        for i in range(n):
            out[i, j] /= total
    return out


def add_rows(out, ids, rows):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] o = out
    cdef cnp.ndarray[cnp.intp_t, ndim=1] ia = np.ascontiguousarray(ids, dtype=np.intp)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ra = np.ascontiguousarray(rows, dtype=np.float64)
    cdef Py_ssize_t n = ia.shape[0]
    cdef Py_ssize_t d = ra.shape[1]
    cdef Py_ssize_t i, j, row
    for i in range(n):
        row = ia[i]
        for j in range(d):
            o[row, j] += ra[i, j]


def loss_and_grads(x, u, w, b, targets, int window):
    _check_window(window)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ua = np.ascontiguousarray(u, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] wa = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ba = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ta = np.ascontiguousarray(targets, dtype=np.float64)

    cdef Py_ssize_t n = xa.shape[0]
    cdef Py_ssize_t d = xa.shape[1]
    cdef Py_ssize_t m = ua.shape[1]
    if n == 0:
        raise ValueError("empty document")

    cdef cnp.ndarray[cnp.float64_t, ndim=2] h = window_mean(xa, window)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = column_softmax(np.dot(h, ua))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = np.dot(a.T, h)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] scores = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] db = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dw = np.empty((m, d), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dc = np.empty((m, d), dtype=np.float64)

    cdef Py_ssize_t i, j, k
    cdef double acc, loss, dlogit, col_dot

    # logits, scores, loss, and the label-side gradients in one pass
    loss = 0.0
    for j in range(m):
        acc = ba[j]
        for k in range(d):
            acc += wa[j, k] * c[j, k]
        scores[j] = _sigmoid_scalar(acc)
        loss += ta[j] * _softplus(-acc) + (1.0 - ta[j]) * _softplus(acc)
        dlogit = (scores[j] - ta[j]) / m
        db[j] = dlogit
        for k in range(d):
            dw[j, k] = dlogit * c[j, k]
            dc[j, k] = dlogit * wa[j, k]
    loss /= m

    # back through c = a^T h
    cdef cnp.ndarray[cnp.float64_t, ndim=2] da = np.dot(h, dc.T)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dh = np.dot(a, dc)

    # back through the column softmax, fused to skip the temporaries
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dz = np.empty((n, m), dtype=np.float64)
    for j in range(m):
        col_dot = 0.0
        for i in range(n):
            col_dot += a[i, j] * da[i, j]
        for i in range(n):
            dz[i, j] = a[i, j] * (da[i, j] - col_dot)

    # back through z = h u
    dh = dh + np.dot(dz, ua.T)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] du = np.dot(h.T, dz)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dx = window_mean_backward(dh, window)
    return loss, scores, dx, du, dw, db


def gaussian_kde_sum(samples, xs, double bandwidth):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sa = np.ascontiguousarray(samples, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ga = np.ascontiguousarray(xs, dtype=np.float64)
    cdef Py_ssize_t n = sa.shape[0]
    cdef Py_ssize_t g = ga.shape[0]
    if n == 0:
        raise ValueError("empty sample")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(g, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double zz, acc
    for j in range(g):
        acc = 0.0
        for i in range(n):
            zz = (ga[j] - sa[i]) / bandwidth
            acc += exp(-0.5 * zz * zz)
        out[j] = acc
    return out / (n * bandwidth * SQRT_2PI)
