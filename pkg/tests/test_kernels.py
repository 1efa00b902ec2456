"""Backend-parametrized kernel oracles: both implementations must agree
with hand math, with finite differences, and with each other."""

import math

import numpy as np
import pytest

from textdensity import kernels

BACKENDS = kernels.available_backends()
BACKEND_PAIR = pytest.mark.skipif(
    len(BACKENDS) < 2, reason="only one kernel backend built"
)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return kernels.get_backend(request.param)


def rand(rng, *shape):
    return rng.standard_normal(shape)


# --- window_mean -------------------------------------------------------------

def test_window_one_is_identity(backend):
    rng = np.random.default_rng(0)
    x = rand(rng, 7, 4)
    np.testing.assert_array_equal(backend.window_mean(x, 1), x)


def test_window_three_two_tokens_averages_both(backend):
    x = np.array([[1.0, 3.0], [5.0, 7.0]])
    expected = np.array([[3.0, 5.0], [3.0, 5.0]])
    np.testing.assert_allclose(backend.window_mean(x, 3), expected, atol=1e-15)


def test_window_mean_matches_direct_loop(backend):
    rng = np.random.default_rng(1)
    for window in (1, 3, 5, 9):
        n, d = int(rng.integers(1, 20)), 3
        x = rand(rng, n, d)
        expected = np.empty_like(x)
        for i in range(n):
            lo, hi = max(0, i - window // 2), min(n, i + window // 2 + 1)
            expected[i] = x[lo:hi].mean(axis=0)
        np.testing.assert_allclose(backend.window_mean(x, window), expected, atol=1e-12)


def test_window_mean_rejects_bad_windows(backend):
    with pytest.raises(ValueError):
        backend.window_mean(np.ones((2, 2)), 2)
    with pytest.raises(ValueError):
        backend.window_mean(np.ones((2, 2)), -1)


def test_window_mean_is_total_on_empty_input(backend):
    # empty documents are rejected upstream; the kernel itself stays total
    out = backend.window_mean(np.empty((0, 3)), 3)
    assert out.shape == (0, 3)


def test_window_mean_backward_is_adjoint(backend):
    # <window_mean(X), G> == <X, window_mean_backward(G)> for all X, G
    rng = np.random.default_rng(2)
    for window in (1, 3, 7):
        n, d = int(rng.integers(1, 15)), 4
        x, g = rand(rng, n, d), rand(rng, n, d)
        lhs = float(np.sum(backend.window_mean(x, window) * g))
        rhs = float(np.sum(x * backend.window_mean_backward(g, window)))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


# --- column_softmax ----------------------------------------------------------

def test_softmax_uniform_on_zeros(backend):
    a = backend.column_softmax(np.zeros((3, 2)))
    np.testing.assert_allclose(a, np.full((3, 2), 1 / 3), atol=1e-15)


def test_softmax_hand_column(backend):
    a = backend.column_softmax(np.array([[2.0], [0.0]]))
    e2 = math.exp(2.0)
    np.testing.assert_allclose(
        a[:, 0], [e2 / (e2 + 1), 1 / (e2 + 1)], atol=1e-12
    )
    assert a[0, 0] == pytest.approx(0.8807970779778823, abs=1e-12)


def test_softmax_columns_normalize_and_shift_invariance(backend):
    rng = np.random.default_rng(3)
    z = rand(rng, 11, 5) * 3
    a = backend.column_softmax(z)
    np.testing.assert_allclose(a.sum(axis=0), np.ones(5), atol=1e-6)
    assert np.all(a >= 0)
    shifted = backend.column_softmax(z + rng.standard_normal(5))
    np.testing.assert_allclose(shifted, a, atol=1e-9)


def test_softmax_stable_for_large_logits(backend):
    a = backend.column_softmax(np.array([[1000.0], [999.0]]))
    assert np.all(np.isfinite(a))
    np.testing.assert_allclose(a.sum(axis=0), [1.0], atol=1e-12)


# --- add_rows ------------------------------------------------------------------

def test_add_rows_accumulates_duplicate_indices(backend):
    rng = np.random.default_rng(4)
    out = np.zeros((6, 3))
    indices = np.array([0, 2, 2, 5, 0, 0], dtype=np.int64)
    rows = rand(rng, 6, 3)
    expected = out.copy()
    np.add.at(expected, indices, rows)
    backend.add_rows(out, indices, rows)
    np.testing.assert_allclose(out, expected, atol=1e-15)


# --- loss_and_grads --------------------------------------------------------------

def forward_loss(x, u, w, b, targets, window, backend):
    h = backend.window_mean(x, window)
    a = backend.column_softmax(h @ u)
    c = a.T @ h
    logits = np.sum(w * c, axis=1) + b
    return float(
        np.mean(
            targets * np.logaddexp(0.0, -logits)
            + (1.0 - targets) * np.logaddexp(0.0, logits)
        )
    )


def test_loss_matches_composed_forward(backend):
    rng = np.random.default_rng(5)
    n, d, m, window = 6, 4, 3, 3
    x, u, w = rand(rng, n, d), rand(rng, d, m), rand(rng, m, d)
    b = rand(rng, m)
    targets = rng.integers(0, 2, size=m).astype(np.float64)
    loss, *_ = backend.loss_and_grads(x, u, w, b, targets, window)
    assert loss == pytest.approx(forward_loss(x, u, w, b, targets, window, backend), rel=1e-12)


def test_gradients_match_central_finite_differences(backend):
    rng = np.random.default_rng(6)
    step = 1e-4
    for _ in range(12):
        n, d, m, window = 5, 4, 3, 3
        x, u, w = rand(rng, n, d), rand(rng, d, m), rand(rng, m, d)
        b = rand(rng, m)
        targets = rng.integers(0, 2, size=m).astype(np.float64)
        _, _, dx, du, dw, db = backend.loss_and_grads(x, u, w, b, targets, window)

        for array, grad in ((x, dx), (u, du), (w, dw), (b, db)):
            flat, gflat = array.ravel(), np.asarray(grad).ravel()
            picks = rng.choice(flat.size, size=min(6, flat.size), replace=False)
            for idx in picks:
                saved = flat[idx]
                flat[idx] = saved + step
                hi = forward_loss(x, u, w, b, targets, window, backend)
                flat[idx] = saved - step
                lo = forward_loss(x, u, w, b, targets, window, backend)
                flat[idx] = saved
                numeric = (hi - lo) / (2 * step)
                scale = max(abs(numeric), abs(gflat[idx]), 1e-8)
                assert abs(numeric - gflat[idx]) / scale < 1e-3


# --- gaussian_kde_sum ------------------------------------------------------------

def test_kde_sum_matches_direct_sum_oracle(backend):
    rng = np.random.default_rng(7)
    for n in (1, 2, 3, 5):
        samples = np.sort(rng.uniform(-2, 2, size=n))
        grid = np.linspace(-4, 4, 101)
        h = 0.7
        expected = np.zeros_like(grid)
        for x0 in samples:
            expected += np.exp(-0.5 * ((grid - x0) / h) ** 2)
        expected /= n * h * math.sqrt(2 * math.pi)
        np.testing.assert_allclose(
            backend.gaussian_kde_sum(samples, grid, h), expected, atol=1e-12
        )


def test_kde_sum_single_sample_peak(backend):
    grid = np.array([0.5])
    h = 0.25
    ys = backend.gaussian_kde_sum(np.array([0.5]), grid, h)
    assert ys[0] == pytest.approx(1.0 / (h * math.sqrt(2 * math.pi)), rel=1e-12)


def test_kde_sum_rejects_bad_bandwidth(backend):
    with pytest.raises(ValueError):
        backend.gaussian_kde_sum(np.array([0.0]), np.array([0.0]), 0.0)


# --- cross-backend agreement -------------------------------------------------------

@BACKEND_PAIR
def test_backends_agree_on_all_kernels():
    first, second = (kernels.get_backend(name) for name in BACKENDS[:2])
    rng = np.random.default_rng(8)
    n, d, m, window = 9, 5, 4, 3
    x, u, w = rand(rng, n, d), rand(rng, d, m), rand(rng, m, d)
    b = rand(rng, m)
    targets = rng.integers(0, 2, size=m).astype(np.float64)

    np.testing.assert_allclose(
        first.window_mean(x, window), second.window_mean(x, window), atol=1e-12
    )
    g = rand(rng, n, d)
    np.testing.assert_allclose(
        first.window_mean_backward(g, window),
        second.window_mean_backward(g, window),
        atol=1e-12,
    )
    z = rand(rng, n, m)
    np.testing.assert_allclose(
        first.column_softmax(z), second.column_softmax(z), atol=1e-12
    )
    out1, out2 = np.zeros((4, d)), np.zeros((4, d))
    idx = rng.integers(0, 4, size=n)
    first.add_rows(out1, idx, x)
    second.add_rows(out2, idx, x)
    np.testing.assert_allclose(out1, out2, atol=1e-12)

    res1 = first.loss_and_grads(x, u, w, b, targets, window)
    res2 = second.loss_and_grads(x, u, w, b, targets, window)
    assert res1[0] == pytest.approx(res2[0], rel=1e-12)
    for a1, a2 in zip(res1[1:], res2[1:]):
        np.testing.assert_allclose(a1, a2, atol=1e-12)

    samples = rng.uniform(-1, 1, size=20)
    grid = np.linspace(-2, 2, 64)
    np.testing.assert_allclose(
        first.gaussian_kde_sum(samples, grid, 0.3),
        second.gaussian_kde_sum(samples, grid, 0.3),
        atol=1e-12,
    )


# --- backend selection ---------------------------------------------------------

def test_active_backend_is_listed():
    assert kernels.BACKEND in ("numpy", "cython")
    assert kernels.BACKEND in BACKENDS
    assert "numpy" in BACKENDS


def test_get_backend_rejects_unknown_name():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_override_selects_pure_python(tmp_path):
    import subprocess
    import sys

    code = "import textdensity.kernels as k; print(k.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "TEXTDENSITY_BACKEND": "python"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
