"""Deception topology, perturbed pseudogradient, stability set and attainability.

A subset of players ("deceivers") each inject copies of selected other
players' ("victims") probing signals, scaled by a gain ``delta_k``.  On the
slow timescale this perturbs the game's pseudogradient: victim rows of the
pseudogradient matrix pick up delta-dependent terms while everything else is
untouched.  This module computes that perturbed pair ``(Qbar(d), Bbar(d))``,
the resulting quasi-equilibrium ``h(d) = -Qbar(d)^{-1} Bbar(d)``, membership
in the stability-preserving gain set, and roots of the deceivers'
cost-matching conditions (attainability).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import numerics
from .oligopoly import QuadraticGame

#: A matrix ``M`` counts as Hurwitz iff max Re lambda(M) < -HURWITZ_RTOL*(1+||M||_inf).
HURWITZ_RTOL = 1e-8

#: Cost-matching tolerance: a reference is met when
#: ``|J - J_ref| <= MATCH_RTOL * (1 + |J_ref|)``.
MATCH_RTOL = 1e-8


def is_hurwitz(m: np.ndarray) -> bool:
    """Deterministic Hurwitz test with a relative margin.

    Declares ``m`` Hurwitz iff its spectral abscissa is below
    ``-HURWITZ_RTOL * (1 + ||m||_inf)``, so marginal cases are rejected.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return True
    scale = float(np.max(np.sum(np.abs(m), axis=1)))
    return numerics.spectral_abscissa(m) < -HURWITZ_RTOL * (1.0 + scale)


@dataclass(frozen=True)
class DeceptionTopology:
    """Who deceives whom, and with what gains and target costs.

    ``deceivers`` is an ordered tuple of player indices; entry ``k`` of every
    other field belongs to deceiver ``deceivers[k]``.  ``victims[k]`` lists
    the players whose probing signal deceiver ``k`` re-injects.  ``eps`` is
    the shared slow-timescale gain of the delta adaptation, ``eps_rates`` the
    per-deceiver rates, and ``cost_refs`` the per-deceiver target costs.

    All player indices are 0-based.  An empty topology (no deceivers) is
    valid and reduces every computation to the unperturbed game.
    """

    deceivers: tuple[int, ...]
    victims: tuple[tuple[int, ...], ...]
    eps: float = 1.0
    eps_rates: tuple[float, ...] | None = None
    cost_refs: tuple[float, ...] | None = None

    def __post_init__(self):
        decs = tuple(int(i) for i in self.deceivers)
        vics = tuple(tuple(int(j) for j in v) for v in self.victims)
        object.__setattr__(self, "deceivers", decs)
        object.__setattr__(self, "victims", vics)
        if len(vics) != len(decs):
            raise ValueError(
                f"{len(decs)} deceivers but {len(vics)} victim sets"
            )
        if len(set(decs)) != len(decs):
            raise ValueError("deceiver indices must be distinct")
        for k, (i, v) in enumerate(zip(decs, vics)):
            if not v:
                raise ValueError(f"deceiver {i} has an empty victim set")
            if i in v:
                raise ValueError(f"deceiver {i} cannot target itself")
            if len(set(v)) != len(v):
                raise ValueError(f"duplicate victims for deceiver {i}")
        n = len(decs)
        rates = self.eps_rates if self.eps_rates is not None else (1.0,) * n
        refs = self.cost_refs if self.cost_refs is not None else (0.0,) * n
        rates = tuple(float(r) for r in rates)
        refs = tuple(float(r) for r in refs)
        object.__setattr__(self, "eps_rates", rates)
        object.__setattr__(self, "cost_refs", refs)
        object.__setattr__(self, "eps", float(self.eps))
        if len(rates) != n or len(refs) != n:
            raise ValueError("eps_rates and cost_refs must have one entry per deceiver")
        if self.eps <= 0.0 or any(r <= 0.0 for r in rates):
            raise ValueError("adaptation gains must be strictly positive")

    @property
    def n_deceivers(self) -> int:
        return len(self.deceivers)

    def validate_against(self, n_players: int) -> None:
        for i, v in zip(self.deceivers, self.victims):
            for j in (i, *v):
                if not 0 <= j < n_players:
                    raise ValueError(
                        f"player index {j} out of range for {n_players} players"
                    )

    def attacker_positions(self, n_players: int) -> tuple[tuple[int, ...], ...]:
        """For every player ``j``, the deceiver *positions* ``k`` with ``j`` a victim.

        Positions index into ``deceivers`` / ``delta``; use
        ``deceivers[k]`` to recover the attacking player.
        """
        self.validate_against(n_players)
        out: list[tuple[int, ...]] = []
        for j in range(n_players):
            out.append(tuple(
                k for k, v in enumerate(self.victims) if j in v
            ))
        return tuple(out)

    def attacker_players(self, n_players: int) -> tuple[tuple[int, ...], ...]:
        """For every player ``j``, the player indices currently deceiving ``j``."""
        return tuple(
            tuple(self.deceivers[k] for k in ks)
            for ks in self.attacker_positions(n_players)
        )


@dataclass(frozen=True)
class PerturbedPseudogradient:
    """The pair ``(Qbar(delta), Bbar(delta))`` together with the delta used."""

    qbar: np.ndarray
    bbar: np.ndarray
    delta: np.ndarray


def perturbed_pseudogradient(
    game: QuadraticGame,
    topology: DeceptionTopology,
    delta: Sequence[float],
) -> PerturbedPseudogradient:
    """Pseudogradient of the game as the victims experience it.

    Victim row ``j`` of the matrix gains ``delta_k`` times row ``z_k`` of
    that victim's own cost matrix, for every deceiver ``z_k`` targeting
    ``j``; the offset entry gains ``delta_k`` times the matching linear
    coefficient.  Rows of players nobody deceives are returned untouched.
    """
    d = np.asarray(delta, dtype=float)
    if d.shape != (topology.n_deceivers,):
        raise ValueError(
            f"expected {topology.n_deceivers} delta entries, got shape {d.shape}"
        )
    topology.validate_against(game.n_players)
    qbar = game.pseudogradient_matrix.copy()
    bbar = game.pseudogradient_offset.copy()
    for k, (z, vs) in enumerate(zip(topology.deceivers, topology.victims)):
        for j in vs:
            qbar[j, :] += d[k] * game.q[j, z, :]
            bbar[j] += d[k] * game.b[j, z]
    return PerturbedPseudogradient(qbar=qbar, bbar=bbar, delta=d)


def in_stability_set(
    pert: PerturbedPseudogradient, gains: Sequence[float]
) -> bool:
    """Whether ``-diag(gains) @ Qbar(delta)`` is Hurwitz (delta keeps the
    equilibrium-seeking loop stable)."""
    k = np.asarray(gains, dtype=float)
    if k.shape != (pert.qbar.shape[0],):
        raise ValueError("need one positive gain per player")
    if np.any(k <= 0.0):
        raise ValueError("gains must be strictly positive")
    return is_hurwitz(-k[:, None] * pert.qbar)


def deceptive_equilibrium(
    game: QuadraticGame,
    topology: DeceptionTopology,
    delta: Sequence[float],
) -> np.ndarray:
    """Quasi-equilibrium ``h(delta)``: prices where every perceived own-price
    gradient vanishes.

    Requires only invertibility of ``Qbar(delta)``; a singular matrix raises
    :class:`~deceptive_nes.numerics.SingularMatrixError` (which is distinct
    from falling outside the stability set).
    """
    pert = perturbed_pseudogradient(game, topology, delta)
    return numerics.solve_linear(pert.qbar, -pert.bbar)


def _condition_estimate(a: np.ndarray) -> float:
    try:
        lu, piv = numerics.lu_factor(a)
    except numerics.SingularMatrixError:
        return np.inf
    n = a.shape[0]
    inv_norm = 0.0
    eye = np.eye(n)
    for j in range(n):
        col = numerics.lu_solve(lu, piv, eye[:, j])
        inv_norm = max(inv_norm, float(np.sum(np.abs(col))))
    return float(np.max(np.sum(np.abs(a), axis=1))) * inv_norm


def cost_gaps(
    game: QuadraticGame,
    topology: DeceptionTopology,
    delta: Sequence[float],
    cost_refs: Sequence[float] | None = None,
) -> np.ndarray:
    """Per-deceiver gap ``J_{z_k}(h(delta)) - ref_k`` at the quasi-equilibrium."""
    refs = np.asarray(
        topology.cost_refs if cost_refs is None else cost_refs, dtype=float
    )
    x = deceptive_equilibrium(game, topology, delta)
    costs = game.costs(x)
    return np.array([
        costs[z] for z in topology.deceivers
    ]) - refs


def matching_field(
    game: QuadraticGame,
    topology: DeceptionTopology,
    delta: Sequence[float],
    cost_refs: Sequence[float] | None = None,
) -> np.ndarray:
    """The slow vector field whose roots are candidate deceptive operating
    points: componentwise ``eps_rate_k * (J_{z_k}(h(delta)) - ref_k)``."""
    rates = np.asarray(topology.eps_rates, dtype=float)
    return rates * cost_gaps(game, topology, delta, cost_refs)


def lambda_matrix(
    game: QuadraticGame,
    topology: DeceptionTopology,
    delta: Sequence[float],
    cost_refs: Sequence[float] | None = None,
) -> np.ndarray:
    """Sensitivity of the matching field: entry ``[j, k]`` is the central
    finite-difference derivative of component ``k`` along ``delta_j``.

    Warns when ``Qbar(delta)`` is badly conditioned (near the edge of
    invertibility) since the differences are then unreliable.
    """
    n = topology.n_deceivers
    if n == 0:
        return np.zeros((0, 0))
    d = np.asarray(delta, dtype=float)
    pert = perturbed_pseudogradient(game, topology, d)
    cond = _condition_estimate(pert.qbar)
    if not cond < 1e12:
        warnings.warn(
            f"perturbed pseudogradient has condition estimate {cond:.2e}; "
            "sensitivity entries may be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    return numerics.fd_jacobian(
        lambda dd: matching_field(game, topology, dd, cost_refs), d,
        rel_step=1e-5,
    )


@dataclass(frozen=True)
class AttainabilitySearch:
    """Search-region / solver controls for :func:`solve_attainability`."""

    delta_max: float = 10.0
    grid_points: int = 400
    max_newton_iter: int = 200


@dataclass(frozen=True)
class AttainabilityResult:
    """Outcome of the attainability search.

    ``attainable`` is true only when all three conditions hold at
    ``delta_star``: the deceivers' costs match their references within
    tolerance, the sensitivity matrix is Hurwitz, and the delta lies in the
    stability set.  When no qualifying root is found, ``delta_star`` holds
    the closest approach and ``message`` says what failed.
    """

    delta_star: np.ndarray
    u_star: np.ndarray
    lambda_mat: np.ndarray
    attainable: bool
    in_stability: bool
    residual: float
    message: str = ""


def _single_deceiver_field(
    game: QuadraticGame,
    z: int,
    victims: Sequence[int],
    rate: float,
    ref: float,
) -> Callable[[float], float]:
    """The lone deceiver's matching field as a plain scalar function.

    The grid scan in :func:`solve_attainability` calls this hundreds of
    times, so the linear algebra is hoisted out of the evaluation.  With a
    single victim the perturbation of the pseudogradient is rank one, and
    Sherman-Morrison turns the deceived equilibrium into a rational function
    of the gain: each call is then a handful of scalar operations on
    precomputed coefficients.  Several victims (or a singular unperturbed
    matrix) fall back to one small solve per call.
    """
    q0 = game.pseudogradient_matrix
    b0 = game.pseudogradient_offset
    z_row = q0[z]
    z_diag = game.q[z, z, z]
    z_b = game.b[z]
    z_c = float(game.c[z])

    if len(victims) == 1:
        j = victims[0]
        unit = np.zeros(game.n_players)
        unit[j] = 1.0
        try:
            w0 = numerics.solve_linear(q0, b0)
            col = numerics.solve_linear(q0, unit)
        except numerics.SingularMatrixError:
            pass
        else:
            v = game.q[j, z, :]
            beta = float(game.b[j, z])
            mu = float(v @ col)
            nu = float(v @ w0)
            # h(g) = p + s(g) * col  with  s(g) = -g (beta - (nu + g mu beta)
            # / (1 + g mu)); the denominator vanishes exactly where the
            # perturbed matrix goes singular.
            p = -w0
            pz, cz = float(p[z]), float(col[z])
            r0, r1 = float(z_row @ p), float(z_row @ col)
            bp, bc = float(z_b @ p), float(z_b @ col)

            def xi_rational(g: float) -> float:
                den = 1.0 + g * mu
                if den == 0.0:
                    return math.nan
                s = -g * (beta - (nu + g * mu * beta) / den)
                hz = pz + s * cz
                cost = hz * (r0 + s * r1 - 0.5 * z_diag * hz) + bp + s * bc + z_c
                return rate * (cost - ref)

            return xi_rational

    dq = np.zeros_like(q0)
    db = np.zeros_like(b0)
    for j in victims:
        dq[j, :] = game.q[j, z, :]
        db[j] = game.b[j, z]

    def xi_solve(g: float) -> float:
        h = numerics.solve_linear(q0 + g * dq, -(b0 + g * db))
        cost = h[z] * (z_row @ h - 0.5 * z_diag * h[z]) + z_b @ h + z_c
        return rate * (cost - ref)

    return xi_solve


def solve_attainability(
    game: QuadraticGame,
    topology: DeceptionTopology,
    cost_refs: Sequence[float] | None = None,
    gains: Sequence[float] | None = None,
    search: AttainabilitySearch | None = None,
) -> AttainabilityResult:
    """Find deceiver gains at which every deceiver's cost hits its reference.

    For a single deceiver the matching field is scanned on a uniform grid
    over ``[-delta_max, delta_max]`` and each sign change is refined by
    bisection; among qualifying roots the one with smallest ``|delta|`` is
    returned.  For several deceivers a damped Newton iteration starts from
    ``delta = 0``.  A failed search returns ``attainable=False`` together
    with the closest approach rather than an arbitrary root.
    """
    search = search or AttainabilitySearch()
    refs = np.asarray(
        topology.cost_refs if cost_refs is None else cost_refs, dtype=float
    )
    n = topology.n_deceivers
    if refs.shape != (n,):
        raise ValueError(f"expected {n} cost references, got shape {refs.shape}")
    k_gains = np.ones(game.n_players) if gains is None else np.asarray(gains, float)

    def assess(delta: np.ndarray, message: str = "") -> AttainabilityResult:
        u = deceptive_equilibrium(game, topology, delta)
        lam = lambda_matrix(game, topology, delta, refs)
        gaps = cost_gaps(game, topology, delta, refs)
        residual = float(np.max(np.abs(gaps))) if n else 0.0
        matched = bool(np.all(np.abs(gaps) <= MATCH_RTOL * (1.0 + np.abs(refs)))) \
            if n else True
        stable_lam = is_hurwitz(lam)
        in_delta = in_stability_set(
            perturbed_pseudogradient(game, topology, delta), k_gains
        )
        ok = matched and stable_lam and in_delta
        if not message and not ok:
            causes = []
            if not matched:
                causes.append("cost mismatch")
            if not stable_lam:
                causes.append("sensitivity matrix not Hurwitz")
            if not in_delta:
                causes.append("outside stability set")
            message = "; ".join(causes)
        return AttainabilityResult(
            delta_star=np.asarray(delta, dtype=float),
            u_star=u,
            lambda_mat=lam,
            attainable=ok,
            in_stability=in_delta,
            residual=residual,
            message=message,
        )

    if n == 0:
        return assess(np.zeros(0), message="no deceivers")

    def field_at(delta: np.ndarray) -> np.ndarray:
        return matching_field(game, topology, delta, refs)

    if n == 1:
        xi = _single_deceiver_field(
            game, topology.deceivers[0], topology.victims[0],
            float(topology.eps_rates[0]), float(refs[0]),
        )
        grid = np.linspace(-search.delta_max, search.delta_max, search.grid_points)
        vals = np.empty_like(grid)
        for idx, g in enumerate(grid):
            try:
                vals[idx] = xi(float(g))
            except numerics.SingularMatrixError:
                vals[idx] = np.nan
        roots: list[float] = []
        for idx in range(len(grid) - 1):
            a, b = vals[idx], vals[idx + 1]
            if np.isnan(a) or np.isnan(b):
                continue
            if a == 0.0:
                roots.append(float(grid[idx]))
            elif a * b < 0.0:
                roots.append(numerics.find_root_scalar(
                    xi, float(grid[idx]), float(grid[idx + 1]),
                ))
        if vals[-1] == 0.0:
            roots.append(float(grid[-1]))
        if not roots:
            finite = np.where(np.isfinite(vals))[0]
            best = finite[np.argmin(np.abs(vals[finite]))] if finite.size else 0
            return assess(
                np.array([grid[best]]),
                message="no sign change of the matching field in the search region",
            )
        candidates = sorted(set(roots), key=abs)
        results = [assess(np.array([r])) for r in candidates]
        for res in results:
            if res.attainable:
                return res
        return results[0]

    # several deceivers: damped Newton from the undeceived point
    try:
        tol = MATCH_RTOL * (1.0 + float(np.max(np.abs(refs)))) \
            * float(np.min(topology.eps_rates))
        root = numerics.newton_system(
            field_at, np.zeros(n), tol=tol, max_iter=search.max_newton_iter,
            max_step=search.delta_max,
        )
    except (numerics.ConvergenceError, numerics.SingularMatrixError) as exc:
        return assess(np.zeros(n), message=f"search failed: {exc}")
    return assess(root)
