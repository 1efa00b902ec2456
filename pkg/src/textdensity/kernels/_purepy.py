"""Pure numpy implementations of the hot numeric kernels.

Semantics here are the reference; the compiled backend in _core.pyx
implements the same functions with C loops where those win and BLAS
for the matmul-shaped steps. Keep the two in sync.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "numpy"

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _check_window(window: int) -> None:
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")


def _window_bounds(n: int, window: int):
    _check_window(window)
    r = (window - 1) // 2
    idx = np.arange(n)
    lo = np.maximum(idx - r, 0)
    hi = np.minimum(idx + r, n - 1)
    return lo, hi


def window_mean(x: np.ndarray, window: int) -> np.ndarray:
    """Row i of the result is the mean of x over rows [i-r, i+r] clipped
    to the array, r = (window-1)//2."""
    x = np.asarray(x, dtype=np.float64)
    _check_window(window)
    n = x.shape[0]
    # window 1 must be an exact identity, not a cumsum round trip
    if n == 0 or window == 1:
        return x.copy()
    lo, hi = _window_bounds(n, window)
    cs = np.cumsum(x, axis=0)
    upper = cs[hi]
    lower = np.where((lo > 0)[:, None], cs[np.maximum(lo - 1, 0)], 0.0)
    counts = (hi - lo + 1).astype(np.float64)
    return (upper - lower) / counts[:, None]


def window_mean_backward(dh: np.ndarray, window: int) -> np.ndarray:
    """Adjoint of window_mean: dx[k] = sum over i with k in window(i) of
    dh[i] / count(i)."""
    dh = np.asarray(dh, dtype=np.float64)
    _check_window(window)
    n = dh.shape[0]
    # window 1 must be an exact identity, not a cumsum round trip
    if n == 0 or window == 1:
        return dh.copy()
    lo, hi = _window_bounds(n, window)
    counts = (hi - lo + 1).astype(np.float64)
    g = dh / counts[:, None]
    # k is inside window(i) exactly when i is inside [k-r, k+r], so the
    # adjoint is a plain windowed sum of g.
    cs = np.cumsum(g, axis=0)
    upper = cs[hi]
    lower = np.where((lo > 0)[:, None], cs[np.maximum(lo - 1, 0)], 0.0)
    return upper - lower


def column_softmax(z: np.ndarray) -> np.ndarray:
    """Softmax over axis 0 (positions), independently per column."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[0] == 0:
        return z.copy()
    shifted = z - z.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def add_rows(out: np.ndarray, ids: np.ndarray, rows: np.ndarray) -> None:
    """out[ids[i]] += rows[i], accumulating over repeated ids."""
    np.add.at(out, np.asarray(ids, dtype=np.intp), rows)


def loss_and_grads(x, u, w, b, targets, window):
    """Forward and backward pass of the per-label attention classifier
    for one document.

    x: (n, d) per-position input vectors, u: (d, m) attention query,
    w: (m, d) label heads, b: (m,) biases, targets: (m,) 0/1.

    Returns (loss, scores, dx, du, dw, db) where loss is the mean
    per-label binary cross-entropy and the gradients are exact.
    """
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    n = x.shape[0]
    m = u.shape[1]
    if n == 0:
        raise ValueError("empty document")

    h = window_mean(x, window)
    z_att = h @ u  # (n, m)
    a = column_softmax(z_att)
    c = a.T @ h  # (m, d)
    logits = (w * c).sum(axis=1) + b
    scores = _sigmoid(logits)
    # Stable BCE via softplus: t*softplus(-z) + (1-t)*softplus(z).
    loss = float(
        np.mean(targets * np.logaddexp(0.0, -logits) + (1.0 - targets) * np.logaddexp(0.0, logits))
    )

    dlogits = (scores - targets) / m  # (m,)
    dw = dlogits[:, None] * c
    db = dlogits.copy()
    dc = dlogits[:, None] * w  # (m, d)
    da = h @ dc.T  # (n, m)
    dh = a @ dc  # (n, d)
    col_dot = (a * da).sum(axis=0, keepdims=True)
    dz_att = a * (da - col_dot)
    dh += dz_att @ u.T
    du = h.T @ dz_att
    dx = window_mean_backward(dh, window)
    return loss, scores, dx, du, dw, db


def gaussian_kde_sum(samples: np.ndarray, xs: np.ndarray, bandwidth: float) -> np.ndarray:
    """f(x) = (1/(n*h)) * sum_i phi((x - x_i)/h) with the standard normal
    kernel phi, evaluated at every grid point."""
    samples = np.asarray(samples, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    n = samples.shape[0]
    if n == 0:
        raise ValueError("empty sample")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    out = np.zeros_like(xs)
    # Chunk the sample axis so the intermediate never exceeds a few MB.
    step = max(1, int(2**20 / max(1, xs.shape[0])))
    for start in range(0, n, step):
        chunk = samples[start : start + step]
        zz = (xs[:, None] - chunk[None, :]) / bandwidth
        out += np.exp(-0.5 * zz * zz).sum(axis=1)
    return out / (n * bandwidth * _SQRT_2PI)
