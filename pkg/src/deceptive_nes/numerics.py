"""Self-contained numerical kernels used throughout the package.

Everything here is implemented directly on top of numpy arrays (elementary
arithmetic and matrix products only -- no ``numpy.linalg`` calls), so the
package's linear solves, eigenvalue computations, root finding and ODE
stepping are fully inspectable.  The test-suite cross-checks these kernels
against independent references.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

_EPS = float(np.finfo(float).eps)


class SingularMatrixError(ValueError):
    """Raised when Gaussian elimination meets a pivot that is effectively zero.

    Attributes
    ----------
    column : int
        Elimination column at which the pivot collapsed.
    """

    def __init__(self, column: int, pivot: float):
        self.column = int(column)
        self.pivot = float(pivot)
        super().__init__(
            f"matrix is singular to working precision "
            f"(pivot {pivot:.3e} in column {column})"
        )


class ConvergenceError(RuntimeError):
    """Raised when an iterative routine exhausts its iteration budget."""


def _inf_norm(a: np.ndarray) -> float:
    if a.ndim == 1:
        return float(np.max(np.abs(a))) if a.size else 0.0
    return float(np.max(np.sum(np.abs(a), axis=1))) if a.size else 0.0


# ---------------------------------------------------------------------------
# linear systems
# ---------------------------------------------------------------------------

def lu_factor(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """LU factorization with partial pivoting, stored in a single matrix.

    Returns ``(lu, piv)`` where ``piv[k]`` is the row swapped into position
    ``k`` at step ``k``.  Raises :class:`SingularMatrixError` when the best
    available pivot is below ``1e-13 * ||a||_inf``.
    """
    lu = np.array(a, dtype=float, copy=True)
    n = lu.shape[0]
    if lu.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {lu.shape}")
    piv = np.arange(n)
    tiny = 1e-13 * max(_inf_norm(lu), _EPS)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        pivot = abs(lu[p, k])
        if pivot < tiny:
            raise SingularMatrixError(k, pivot)
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            piv[k] = p
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, piv


def lu_solve(lu: np.ndarray, piv: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve using a factorization produced by :func:`lu_factor`."""
    x = np.array(b, dtype=float, copy=True)
    n = lu.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            x[[k, p]] = x[[p, k]]
    for k in range(1, n):            # forward: L y = P b
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):   # backward: U x = y
        x[k] -= lu[k, k + 1:] @ x[k + 1:]
        x[k] /= lu[k, k]
    return x


def _solve_small(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Scalar elimination for tiny systems.

    Same pivoting, thresholds and refinement as the array route, written on
    plain floats: for the 2x2..4x4 solves that dominate the equilibrium
    searches, numpy's per-call overhead costs more than the arithmetic.
    """
    n = a.shape[0]
    orig = [[float(v) for v in row] for row in a]
    m = [row[:] for row in orig]
    tiny = 1e-13 * max(max(sum(abs(v) for v in row) for row in m), _EPS)
    piv = list(range(n))
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(m[r][k]))
        pivot = abs(m[p][k])
        if pivot < tiny:
            raise SingularMatrixError(k, pivot)
        if p != k:
            m[k], m[p] = m[p], m[k]
            piv[k] = p
        mk = m[k]
        inv = 1.0 / mk[k]
        for r in range(k + 1, n):
            mr = m[r]
            f = mr[k] * inv
            mr[k] = f
            for c in range(k + 1, n):
                mr[c] -= f * mk[c]

    def subst(rhs):
        x = list(rhs)
        for k in range(n):
            p = piv[k]
            if p != k:
                x[k], x[p] = x[p], x[k]
        for k in range(1, n):
            mk = m[k]
            s = x[k]
            for c in range(k):
                s -= mk[c] * x[c]
            x[k] = s
        for k in range(n - 1, -1, -1):
            mk = m[k]
            s = x[k]
            for c in range(k + 1, n):
                s -= mk[c] * x[c]
            x[k] = s / mk[k]
        return x

    rhs = [float(v) for v in b]
    x = subst(rhs)
    resid = [rv - sum(ar * xv for ar, xv in zip(row, x))
             for rv, row in zip(rhs, orig)]
    corr = subst(resid)
    return np.array([xv + cv for xv, cv in zip(x, corr)])


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` by pivoted elimination plus one refinement pass."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 2 and a.shape[0] == a.shape[1] and 0 < a.shape[0] <= 4:
        return _solve_small(a, np.asarray(b, dtype=float))
    lu, piv = lu_factor(a)
    x = lu_solve(lu, piv, b)
    # one pass of iterative refinement tightens the residual essentially to
    # the rounding floor for the well-scaled systems seen here
    r = np.asarray(b, dtype=float) - a @ x
    x = x + lu_solve(lu, piv, r)
    return x


# ---------------------------------------------------------------------------
# eigenvalues (Hessenberg reduction + shifted QR)
# ---------------------------------------------------------------------------

def _hessenberg(a: np.ndarray) -> np.ndarray:
    h = np.array(a, dtype=complex, copy=True)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        normx = float(np.sqrt(np.sum(np.abs(x) ** 2)))
        if normx <= _EPS * max(1.0, _inf_norm(np.abs(h))):
            h[k + 2:, k] = 0.0
            continue
        alpha = x[0]
        phase = alpha / abs(alpha) if alpha != 0 else 1.0
        v = x.copy()
        v[0] += phase * normx
        vnorm2 = float(np.sum(np.abs(v) ** 2))
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        # similarity transform by the reflector I - beta v v^H
        w = np.conj(v) @ h[k + 1:, k:]
        h[k + 1:, k:] -= beta * np.outer(v, w)
        w2 = h[:, k + 1:] @ v
        h[:, k + 1:] -= beta * np.outer(w2, np.conj(v))
        h[k + 2:, k] = 0.0
    return h


def _eig2x2(a, b, c, d) -> tuple[complex, complex]:
    t = 0.5 * (a + d)
    disc = np.sqrt(complex((0.5 * (a - d)) ** 2 + b * c))
    return t + disc, t - disc


def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    w1, w2 = _eig2x2(a, b, c, d)
    return w1 if abs(w1 - d) <= abs(w2 - d) else w2


def _qr_sweep(h: np.ndarray, lo: int, hi: int, mu: complex) -> None:
    """One explicit shifted QR step on the active window ``h[lo:hi+1]``."""
    for k in range(lo, hi + 1):
        h[k, k] -= mu
    rots: list[tuple[complex, complex]] = []
    for k in range(lo, hi):
        a, b = h[k, k], h[k + 1, k]
        r = float(np.hypot(abs(a), abs(b)))
        if r == 0.0:
            rots.append((1.0 + 0.0j, 0.0 + 0.0j))
            continue
        c, s = a / r, b / r
        rots.append((c, s))
        cols = slice(k, hi + 1)
        ra, rb = h[k, cols].copy(), h[k + 1, cols].copy()
        h[k, cols] = np.conj(c) * ra + np.conj(s) * rb
        h[k + 1, cols] = -s * ra + c * rb
    for idx, k in enumerate(range(lo, hi)):
        c, s = rots[idx]
        rows = slice(lo, k + 2)
        ca, cb = h[rows, k].copy(), h[rows, k + 1].copy()
        h[rows, k] = ca * c + cb * s
        h[rows, k + 1] = -ca * np.conj(s) + cb * np.conj(c)
    for k in range(lo, hi + 1):
        h[k, k] += mu


def eigenvalues(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a (real or complex) square matrix.

    Householder reduction to Hessenberg form followed by the shifted QR
    iteration with Wilkinson shifts, deflation and occasional exceptional
    shifts.  Suited to the small dense matrices this package produces.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n == 0:
        return np.empty(0, dtype=complex)
    if n == 1:
        return np.array([complex(a[0, 0])])
    h = _hessenberg(a)
    scale = max(1.0, _inf_norm(np.abs(h)))
    eig = np.empty(n, dtype=complex)
    hi = n - 1
    stuck = 0
    budget = 100 * n
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        # locate the unreduced block ending at hi
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if abs(h[lo, lo - 1]) <= _EPS * (s if s > 0 else scale):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            stuck = 0
            continue
        if lo == hi - 1:
            eig[hi], eig[hi - 1] = _eig2x2(
                h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi]
            )
            hi -= 2
            stuck = 0
            continue
        sweeps += 1
        stuck += 1
        if sweeps > budget:
            raise ConvergenceError(
                f"QR iteration did not converge within {budget} sweeps"
            )
        if stuck % 12 == 0:
            mu = h[hi, hi] + 1.5 * abs(h[hi, hi - 1])  # exceptional shift
        else:
            mu = _wilkinson_shift(h, hi)
        _qr_sweep(h, lo, hi, mu)
    return eig


def spectral_abscissa(a: np.ndarray) -> float:
    """Largest real part over the spectrum of ``a``."""
    return float(np.max(eigenvalues(a).real))


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def find_root_scalar(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol_rel: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Bisection root of ``f`` on a bracketing interval ``[lo, hi]``.

    Stops once the bracket width falls below ``xtol_rel * (1 + |root|)``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(
            f"interval [{lo}, {hi}] does not bracket a root "
            f"(f(lo)={flo:.3e}, f(hi)={fhi:.3e})"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if (hi - lo) <= xtol_rel * (1.0 + abs(mid)):
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    raise ConvergenceError(f"bisection did not converge in {max_iter} steps")


def fd_jacobian(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    *,
    rel_step: float = 1e-5,
) -> np.ndarray:
    """Central-difference sensitivity matrix with entries ``[j, k] = df_k/dx_j``.

    Note the orientation: row ``j`` holds the response of every output to a
    perturbation of input ``j`` (the transpose of the usual Jacobian layout).
    """
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(np.asarray(f(x), dtype=float))
    jac = np.empty((x.size, f0.size))
    for j in range(x.size):
        h = rel_step * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        fp = np.atleast_1d(np.asarray(f(xp), dtype=float))
        fm = np.atleast_1d(np.asarray(f(xm), dtype=float))
        jac[j] = (fp - fm) / (2.0 * h)
    return jac


def newton_system(
    f: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    *,
    tol: float = 1e-10,
    max_iter: int = 50,
    max_step: float | None = None,
) -> np.ndarray:
    """Damped Newton iteration for ``f(x) = 0`` with a finite-difference Jacobian.

    The step is halved (up to 20 times) whenever it fails to reduce
    ``||f||_inf``; raises :class:`ConvergenceError` if the residual never
    falls below ``tol``.  ``max_step`` clips each raw step to that sup-norm
    length, which keeps a near-singular Jacobian from catapulting the
    iterate out of the region of interest.
    """
    x = np.array(x0, dtype=float, copy=True)
    fx = np.atleast_1d(np.asarray(f(x), dtype=float))
    for _ in range(max_iter):
        err = _inf_norm(fx)
        if err <= tol:
            return x
        jac = fd_jacobian(f, x).T  # conventional orientation for the solve
        step = solve_linear(jac, -fx)
        if max_step is not None:
            length = _inf_norm(step)
            if length > max_step:
                step *= max_step / length
        lam = 1.0
        for _ in range(20):
            x_new = x + lam * step
            f_new = np.atleast_1d(np.asarray(f(x_new), dtype=float))
            if _inf_norm(f_new) < err or lam < 1e-6:
                break
            lam *= 0.5
        x, fx = x_new, f_new
    if _inf_norm(fx) <= tol:
        return x
    raise ConvergenceError(
        f"residual {_inf_norm(fx):.3e} after {max_iter} Newton iterations"
    )


# ---------------------------------------------------------------------------
# ODE stepping
# ---------------------------------------------------------------------------

def rk4_step(
    f: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    dt: float,
) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_fixed(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    dt: float,
    n_steps: int,
    *,
    record_every: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate with :func:`rk4_step` on a fixed grid, recording every
    ``record_every``-th state (the initial state is always recorded).

    Returns ``(times, states)`` with ``states[k]`` the state at ``times[k]``.
    """
    y = np.array(y0, dtype=float, copy=True)
    times = [t0]
    states = [y.copy()]
    t = t0
    for k in range(1, n_steps + 1):
        y = rk4_step(f, t, y, dt)
        t = t0 + k * dt
        if k % record_every == 0 or k == n_steps:
            times.append(t)
            states.append(y.copy())
    return np.asarray(times), np.asarray(states)
