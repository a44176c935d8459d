"""Linear algebra, eigenvalues, root finding and integration substrate.

Every routine is checked against numpy.linalg (or a closed-form solution)
as the independent route — the package itself never calls numpy.linalg.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from deceptive_nes import numerics

import oracles


# ── LU solves ────────────────────────────────────────────────────────────────

def test_solve_matches_numpy_on_random_systems():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        rhs = rng.normal(size=n)
        x = numerics.solve_linear(a, rhs)
        x_np = oracles.np_solve(a, rhs)
        err = float(np.max(np.abs(x - x_np)) / (1.0 + np.max(np.abs(x_np))))
        worst = max(worst, err)
    assert worst < 1e-12, f"worst solve deviation from numpy {worst:.2e}"


def test_solve_residuals_small_on_random_systems():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 13))
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        rhs = rng.normal(size=n)
        x = numerics.solve_linear(a, rhs)
        res = np.max(np.abs(a @ x - rhs)) / (1.0 + np.max(np.abs(rhs)))
        worst = max(worst, float(res))
    print(f"\n  worst relative residual over 50 systems: {worst:.2e}")
    assert worst <= 1e-10


def test_solve_needs_pivoting():
    # Zero in the (0, 0) position: fails without row exchanges.
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    x = numerics.solve_linear(a, np.array([2.0, 3.0]))
    assert np.allclose(x, [3.0, 2.0])


def test_singular_matrix_raises_with_column():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(numerics.SingularMatrixError) as exc:
        numerics.solve_linear(a, np.array([1.0, 1.0]))
    assert exc.value.column == 1, f"flagged column {exc.value.column}, not 1"


def test_solve_rejects_nonsquare():
    with pytest.raises(ValueError):
        numerics.solve_linear(np.ones((2, 3)), np.ones(2))


# ── eigenvalues ──────────────────────────────────────────────────────────────

def _sorted_complex(vals):
    return np.array(sorted(vals, key=lambda z: (round(z.real, 9), z.imag)))


def _compare_spectra(a, tol=1e-8):
    mine = _sorted_complex(numerics.eigenvalues(a))
    ref = _sorted_complex(oracles.np_eigvals(a))
    scale = 1.0 + float(np.max(np.abs(ref)))
    return float(np.max(np.abs(mine - ref))) / scale


def test_eigenvalues_match_numpy_random_real():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(60):
        n = int(rng.integers(1, 9))
        a = rng.normal(size=(n, n))
        worst = max(worst, _compare_spectra(a))
    print(f"\n  worst eigenvalue deviation: {worst:.2e}")
    assert worst < 1e-8


def test_eigenvalues_match_numpy_symmetric():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 10))
        a = rng.normal(size=(n, n))
        a = a + a.T
        assert _compare_spectra(a) < 1e-8


def test_eigenvalues_complex_pairs():
    # Rotation-like block: eigenvalues 1 ± 2i exactly.
    a = np.array([[1.0, -2.0], [2.0, 1.0]])
    vals = _sorted_complex(numerics.eigenvalues(a))
    assert np.allclose(vals, [1.0 - 2.0j, 1.0 + 2.0j], atol=1e-12)


def test_eigenvalues_defective_jordan_block():
    # Jordan block: repeated eigenvalue 2 with a single eigenvector.
    a = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])
    vals = numerics.eigenvalues(a)
    assert np.allclose(sorted(v.real for v in vals), [2.0, 2.0, 2.0],
                       atol=1e-5)
    assert max(abs(v.imag) for v in vals) < 1e-5


def test_spectral_abscissa_transpose_invariance():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n))
        gap = abs(numerics.spectral_abscissa(a)
                  - numerics.spectral_abscissa(a.T))
        worst = max(worst, gap / (1.0 + abs(numerics.spectral_abscissa(a))))
    print(f"\n  worst transpose abscissa gap: {worst:.2e}")
    assert worst < 1e-9


def test_spectral_abscissa_known():
    a = np.diag([-3.0, -1.0, -2.0])
    assert abs(numerics.spectral_abscissa(a) - (-1.0)) < 1e-13


# ── scalar root finding ──────────────────────────────────────────────────────

def test_bisection_finds_cos_root():
    root = numerics.find_root_scalar(math.cos, 0.0, 3.0)
    assert abs(root - math.pi / 2.0) < 1e-10


def test_bisection_rejects_unbracketed():
    with pytest.raises(ValueError):
        numerics.find_root_scalar(lambda x: 1.0 + x * x, -1.0, 1.0)


def test_bisection_accepts_endpoint_root():
    root = numerics.find_root_scalar(lambda x: x, 0.0, 1.0)
    assert root == 0.0


# ── finite differences and Newton ────────────────────────────────────────────

def test_fd_jacobian_orientation_is_transposed():
    # jac[j, k] = d f_k / d x_j: for f(x) = A x that is A transposed.
    a = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    jac = numerics.fd_jacobian(lambda x: a @ x, np.array([0.3, -0.7, 1.1]))
    assert jac.shape == (3, 2)
    assert np.max(np.abs(jac - a.T)) < 1e-7, (
        f"fd_jacobian deviates from A.T by {np.max(np.abs(jac - a.T)):.2e}"
    )


def test_fd_jacobian_on_nonlinear_map():
    def f(x):
        return np.array([x[0] ** 2 + x[1], math.sin(x[1])])

    x0 = np.array([1.2, 0.4])
    jac = numerics.fd_jacobian(f, x0)
    expected = np.array([[2.4, 0.0], [1.0, math.cos(0.4)]])
    assert np.max(np.abs(jac - expected)) < 1e-8


def test_newton_solves_nonlinear_system():
    def f(x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 4.0, x[0] - x[1]])

    x = numerics.newton_system(f, np.array([1.0, 0.5]))
    assert np.allclose(x, [math.sqrt(2.0), math.sqrt(2.0)], atol=1e-9)


def test_newton_reports_failure():
    # No root: f(x) = 1 + x² never vanishes.
    with pytest.raises(numerics.ConvergenceError):
        numerics.newton_system(lambda x: np.array([1.0 + x[0] ** 2]),
                               np.array([0.5]), max_iter=25)


# ── integration ──────────────────────────────────────────────────────────────

def test_rk4_is_fourth_order_on_decay():
    # Global error at t=1 on x' = -x must shrink ~16x per dt halving.
    def err(n_steps):
        dt = 1.0 / n_steps
        x = np.array([1.0])
        t = 0.0
        for _ in range(n_steps):
            x = numerics.rk4_step(lambda tt, xx: -xx, t, x, dt)
            t += dt
        return abs(x[0] - math.exp(-1.0))

    e1, e2, e3 = err(25), err(50), err(100)
    r1, r2 = e1 / e2, e2 / e3
    print(f"\n  RK4 error ratios per halving: {r1:.1f}, {r2:.1f}")
    assert r1 >= 14.0 and r2 >= 14.0, f"ratios {r1:.2f}, {r2:.2f} below 14"


def test_rk4_matches_harmonic_oscillator():
    def f(t, y):
        return np.array([y[1], -y[0]])

    times, states = numerics.integrate_fixed(f, 0.0, np.array([1.0, 0.0]),
                                             2.0 * math.pi / 1000, 1000)
    assert abs(states[-1][0] - 1.0) < 1e-9
    assert abs(states[-1][1]) < 1e-9


def test_integrate_fixed_recording():
    times, states = numerics.integrate_fixed(
        lambda t, y: -y, 0.0, np.array([1.0]), 0.01, 100, record_every=10)
    assert len(times) == 11, f"expected 11 records, got {len(times)}"
    assert times[0] == 0.0
    assert abs(times[-1] - 1.0) < 1e-12
    spacings = np.diff(times)
    assert np.allclose(spacings, 0.1, atol=1e-12)
    assert abs(states[-1][0] - math.exp(-1.0)) < 1e-8
