"""Coulomb-corrected imaginary-time method.

The electron leaves the saddle point (t_s, x_s) with the Coulomb-corrected
velocity and follows Newton's equation in the laser and Coulomb fields along
a complex-time contour. Shooting on (t_s, t_e, transverse start velocity)
enforces a real coordinate and vanishing longitudinal velocity at the exit.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .barrier import ExitConditions, exit_numeric
from .errors import CoreCollision, DegenerateField, NonConvergence, StepFailure
from .fields import AtomSpec, LaserSpec, apot, efield, efield_dot
from .sfa import ridge_momentum

log = logging.getLogger(__name__)

R_MIN = 0.1


@dataclass(frozen=True)
class CoulombSaddle:
    t_s: complex
    x_s: complex
    v_s: complex
    v_perp: complex = 0j
    kappa_eff: complex = 0j


@dataclass
class CoulombExit:
    x_exit: float
    p_perp_exit: float
    t_exit: float
    t_s: complex
    contour: list
    y_exit: float = 0.0
    v_perp_start: complex = 0j
    residual: float = 0.0
    start: CoulombSaddle | None = field(default=None, repr=False)


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # columns x, y, vx, vy, work
    contour: list

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def coulomb_start(t_s: complex, laser: LaserSpec, atom: AtomSpec, v_perp: complex = 0j) -> CoulombSaddle:
    """Starting coordinate and longitudinal velocity at the saddle time.

    F = -E_x(t_s) is the field along the tunneling direction. With a transverse
    start velocity the binding momentum is replaced by sqrt(kappa^2 + v_perp^2)
    so that the total energy at the start stays exactly -Ip.
    """
    Z = atom.z
    F = -complex(efield(t_s, laser)[0])
    if abs(F) < 1e-12:
        raise DegenerateField(f"|E_x(t_s)| = {abs(F):.2e}")
    k = cmath.sqrt(atom.kappa**2 + complex(v_perp) ** 2)
    if Z == 0:
        return CoulombSaddle(t_s, 0j, 1j * k, complex(v_perp), k)
    x_s = cmath.exp(-1j * math.pi / 3) * (Z**2 / (2.0 * k * k * F)) ** (1.0 / 3.0)
    root = cmath.sqrt(x_s * x_s)
    if root.real < 0:
        root = -root
    v_s = 1j * (k * k * root - Z) / (k * x_s)
    return CoulombSaddle(t_s, x_s, v_s, complex(v_perp), k)


def default_contour(t_s: complex, t_e: float) -> list:
    return [complex(t_s), complex(t_s.real, 0.0), complex(t_e, 0.0)]


def _rhs_factory(laser: LaserSpec, Z: float, transverse: str = "full"):
    E0, w, eps = laser.E0, laser.omega, laser.epsilon
    linear = transverse == "perturbative"

    def rhs(t, s):
        x, y, vx, vy, _ = s
        wt = w * t
        c, sn = cmath.cos(wt), cmath.sin(wt)
        ex, ey = -E0 * c, -E0 * eps * sn
        if Z:
            # perturbative transverse motion: Coulomb distance to first order in y
            rho = cmath.sqrt(x * x) if linear else cmath.sqrt(x * x + y * y)
            f = Z / (rho * rho * rho)
        else:
            f = 0.0
        edx, edy = E0 * w * sn, -E0 * eps * w * c
        return (vx, vy, -ex - f * x, -ey - f * y, x * edx + y * edy)

    return rhs


def propagate_complex(state0, contour, laser: LaserSpec, atom: AtomSpec, rtol: float = 1e-10,
                      atol: float = 1e-12, r_min: float = R_MIN, dense: int = 0,
                      transverse: str = "full") -> TrajectoryRecord:
    """Integrate Newton's equation along straight segments of a complex-time contour.

    ``state0`` is (x, y, vx, vy[, work]); the fifth component accumulates
    int r . dE/dt dt for energy bookkeeping.
    """
    rhs = _rhs_factory(laser, atom.z, transverse)
    s = np.zeros(5, dtype=complex)
    s[: len(state0)] = state0
    times = [complex(contour[0])]
    states = [s.copy()]

    for a, b in zip(contour[:-1], contour[1:]):
        a, b = complex(a), complex(b)
        d = b - a
        if d == 0:
            continue

        def f(u, y, a=a, d=d):
            return np.array(rhs(a + d * u, y)) * d

        def core(u, y):
            return abs(cmath.sqrt(y[0] * y[0] + y[1] * y[1])) - r_min

        core.terminal = True
        t_eval = np.linspace(0.0, 1.0, dense + 2)[1:] if dense else None
        sol = solve_ivp(f, (0.0, 1.0), s, method="DOP853", rtol=rtol, atol=atol,
                        events=core if atom.z else None,
                        t_eval=t_eval)
        if sol.status == 1:
            raise CoreCollision(f"trajectory reached r < {r_min:.3g} a.u.")
        if not sol.success:
            raise StepFailure(sol.message)
        s = sol.y[:, -1]
        for u, col in zip(sol.t, sol.y.T):
            times.append(a + d * u)
            states.append(col.copy())
        if t_eval is None:
            times[-1], states[-1] = b, s.copy()
    return TrajectoryRecord(np.array(times), np.array(states), list(contour))


def integrate_under_barrier(start: CoulombSaddle, t_e_trial: float, laser: LaserSpec,
                            atom: AtomSpec, contour=None, rtol: float = 1e-10,
                            r_min: float = R_MIN, dense: int = 0,
                            transverse: str = "full") -> TrajectoryRecord:
    """Trajectory from the saddle point to t_e_trial, y(t_s) = 0, dy/dt(t_s) = start.v_perp.

    ``transverse="perturbative"`` evaluates the Coulomb distance as sqrt(x^2),
    which decouples the longitudinal motion from y.
    """
    if contour is None:
        contour = default_contour(start.t_s, t_e_trial)
    # the start itself lies at |x_s| ~ Z^(2/3); keep the guard below it
    guard = min(r_min, 0.5 * abs(start.x_s)) if atom.z else r_min
    state0 = (start.x_s, 0j, start.v_s, start.v_perp)
    return propagate_complex(state0, contour, laser, atom, rtol=rtol, r_min=guard, dense=dense,
                             transverse=transverse)


def energy(state, t, laser: LaserSpec, atom: AtomSpec) -> complex:
    x, y, vx, vy = state[:4]
    ex, ey = efield(t, laser)
    pot = -atom.z / cmath.sqrt(x * x + y * y) if atom.z else 0.0
    return 0.5 * (vx * vx + vy * vy) + pot + x * ex + y * ey


def damped_newton(fun, u0, tol: float, max_iter: int = 40, rel_step: float = 1e-7, scale=None,
                  max_step: float = 50.0):
    """Multivariate Newton with forward-difference Jacobian and step halving.

    Steps are capped at ``max_step * scale`` per component; a trial point whose
    integration fails counts as an infinite residual.
    """
    u = np.array(u0, dtype=float)
    r, aux = fun(u)
    norm = np.linalg.norm(r)
    scale = np.ones_like(u) if scale is None else np.asarray(scale, dtype=float)
    for it in range(max_iter):
        if norm < tol:
            return u, r, aux, it
        J = np.empty((len(r), len(u)))
        for j in range(len(u)):
            h = rel_step * max(abs(u[j]), scale[j])
            du = u.copy()
            du[j] += h
            J[:, j] = (fun(du)[0] - r) / h
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        ratio = np.max(np.abs(step) / (max_step * scale))
        if ratio > 1:
            step /= ratio
        lam = 1.0
        while True:
            try:
                r_new, aux_new = fun(u + lam * step)
                n_new = np.linalg.norm(r_new)
            except (CoreCollision, StepFailure, DegenerateField, ValueError, OverflowError):
                n_new = np.inf
            if not np.isfinite(n_new):
                n_new = np.inf
            if n_new < norm or lam < 1e-4:
                break
            lam *= 0.5
        if not np.isfinite(n_new) or n_new >= norm:
            raise NonConvergence(f"line search stalled at residual {norm:.2e}")
        u, r, aux, norm = u + lam * step, r_new, aux_new, n_new
    if norm < tol:
        return u, r, aux, max_iter
    raise NonConvergence(f"exit residual {norm:.2e} after {max_iter} iterations")


def _zero_order(laser, atom, seed: ExitConditions):
    """Saddle time and real transverse start velocity of the zero-range solution."""
    p = ridge_momentum(seed.p_perp_exit, laser)
    t_s = complex(seed.t_s)
    q0 = float((p[1] + apot(t_s, laser)[1]).real)
    return t_s, q0


Z_LADDER = (1e-6, 1e-3, 0.01, 0.03, 0.1, 0.2, 0.35, 0.5, 0.7, 0.85, 1.0)

_SOLVER_ERRORS = (NonConvergence, CoreCollision, StepFailure, DegenerateField)


def _solve_longitudinal(laser, atom, u0, q0, tol, rtol):
    def fun(u):
        start = coulomb_start(complex(u[0], u[1]), laser, atom, q0)
        rec = integrate_under_barrier(start, float(u[2]), laser, atom, rtol=rtol,
                                      transverse="perturbative")
        x, _, vx, _, _ = rec.final
        return np.array([x.imag, vx.real, vx.imag]), (start, rec)

    tscale = 1e-2 / laser.omega
    return damped_newton(fun, u0, tol, scale=[tscale] * 3)


def _solve_transverse(laser, atom, start, t_e, q_guess, tol, rtol):
    def fun(v):
        st = replace(start, v_perp=complex(v[0], v[1]))
        rec = integrate_under_barrier(st, t_e, laser, atom, rtol=rtol, transverse="perturbative")
        _, y, _, vy, _ = rec.final
        return np.array([y.imag, vy.imag]), (st, rec)

    return damped_newton(fun, [q_guess.real, q_guess.imag], tol, scale=[1e-2 * atom.kappa] * 2)


def solve_exit(laser: LaserSpec, atom: AtomSpec, seed: ExitConditions | None = None,
               tol: float = 1e-10, rtol: float = 1e-10, continuation: bool = True,
               guess: np.ndarray | None = None) -> CoulombExit:
    """Coulomb-corrected tunnel exit by two-point shooting.

    Longitudinal: unknowns (Re t_s, Im t_s, t_e), conditions Im x(t_e) = 0 and
    dx/dt(t_e) = 0. The binding momentum at the start includes the zero-order
    (laser-only) transverse start velocity of the zero-range ``seed``.
    Transverse, on the fixed longitudinal path: unknown complex dy/dt(t_s),
    conditions Im y(t_e) = 0 and Im dy/dt(t_e) = 0.
    ``guess`` optionally overrides the longitudinal starting vector. If the
    direct solve fails the charge is ramped up along ``Z_LADDER``.
    """
    if seed is None:
        seed = exit_numeric(laser, atom)
    t_s0, q0 = _zero_order(laser, atom, seed)
    u0 = np.array([t_s0.real, t_s0.imag, seed.t_exit]) if guess is None else np.asarray(guess, float)
    try:
        u, r_long, (start, rec), _ = _solve_longitudinal(laser, atom, u0, q0, tol, rtol)
    except _SOLVER_ERRORS:
        if not continuation or atom.z == 0:
            raise
        log.debug("direct exit solve failed; ramping the charge")
        u = u0
        for frac in Z_LADDER:
            sub = AtomSpec(atom.ip, atom.z * frac)
            u, r_long, (start, rec), _ = _solve_longitudinal(laser, sub, u, q0, tol, rtol)
    t_e = float(u[2])
    v, r_tr, (start, rec), _ = _solve_transverse(laser, atom, start, t_e, complex(q0), tol, rtol)
    x, y, vx, vy, _ = rec.final
    return CoulombExit(
        x_exit=float(x.real),
        p_perp_exit=float(vy.real),
        t_exit=t_e,
        t_s=start.t_s,
        contour=rec.contour,
        y_exit=float(y.real),
        v_perp_start=start.v_perp,
        residual=float(np.hypot(np.linalg.norm(r_long), np.linalg.norm(r_tr))),
        start=start,
    )


def exit_scan(gamma_grid, laser: LaserSpec, atom: AtomSpec, warm_start: bool = True):
    """Coulomb exits along a Keldysh-parameter grid (E0 varied at fixed omega).

    Each point is seeded by its own zero-range exit; with ``warm_start`` the
    longitudinal guess comes from the previous converged point. Failed points
    appear in the result list as the exception instance.
    """
    out = []
    prev = None
    for g in gamma_grid:
        lg = laser.with_gamma(g, atom)
        try:
            seed = exit_numeric(lg, atom)
            ex = solve_exit(lg, atom, seed=seed, guess=prev if warm_start else None)
            prev = np.array([ex.t_s.real, ex.t_s.imag, ex.t_exit])
            out.append(ex)
        except _SOLVER_ERRORS as err:
            out.append(err)
            prev = None
    return out
