"""Under-the-barrier picture for a zero-range potential.

The electron starts at the core at the complex saddle time and moves with
velocity p + A(t) until the field peak t_e = 0, where it appears at the tunnel
exit. Exponent forms for the coordinate-dependent energy level live here too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError
from .fields import AtomSpec, LaserSpec, apot, derive
from .sfa import SaddleSolution, _complex_quad, rate_exponent, ridge_momentum, solve_saddle


@dataclass
class BarrierTrajectory:
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    x_exit: float
    y_exit: complex
    energy_level: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ExitConditions:
    x_exit: float
    p_perp_exit: float
    t_exit: float
    delta_x: float
    valid: bool = True
    t_s: complex | None = None
    rate_exponent: float | None = None


def _velocity(t, p, laser):
    ax, ay = apot(t, laser)
    return p[0] + ax, p[1] + ay


def under_barrier_traj(sol: SaddleSolution, laser: LaserSpec, n_samples: int = 41) -> BarrierTrajectory:
    """Electron path x(t) = int_{t_s}^t (p_x + A_x) along t_s -> Re t_s -> t_e."""
    p = sol.p
    corner = complex(sol.t_s.real, 0.0)
    n1 = max(2, (2 * n_samples) // 3)
    leg1 = sol.t_s + (corner - sol.t_s) * np.linspace(0.0, 1.0, n1)
    leg2 = corner + (sol.t_e - corner) * np.linspace(0.0, 1.0, max(2, n_samples - n1 + 1))[1:]
    times = np.concatenate([leg1, leg2]) if sol.t_e != corner.real else leg1
    x = np.zeros(len(times), dtype=complex)
    y = np.zeros(len(times), dtype=complex)
    fx = lambda t: _velocity(t, p, laser)[0]
    fy = lambda t: _velocity(t, p, laser)[1]
    for k in range(1, len(times)):
        a, b = complex(times[k - 1]), complex(times[k])
        x[k] = x[k - 1] + _complex_quad(fx, a, b, 1e-12)
        y[k] = y[k - 1] + _complex_quad(fy, a, b, 1e-12)
    vx = _velocity(times, p, laser)[0]
    level = (vx * vx / 2).real - x.real * laser.E0
    return BarrierTrajectory(times=times, x=x, y=y, x_exit=float(x[-1].real), y_exit=complex(y[-1]),
                             energy_level=np.column_stack([x.real, level]))


def energy_level(x, laser: LaserSpec, atom: AtomSpec):
    """Closed-form energy level along the barrier for linear polarization."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("energy level is defined for x >= 0")
    d = derive(laser, atom)
    g, kappa = d.gamma, atom.kappa
    inner = math.sqrt(g * g + 1.0) - g * kappa * x / (2.0 * d.n_photon)
    return kappa**2 * (1.0 - inner**2) / (2.0 * g * g) - x * laser.E0


def exit_linear_closed_form(laser: LaserSpec, atom: AtomSpec) -> float:
    """Exit where the longitudinal kinetic energy vanishes (linear polarization)."""
    g = derive(laser, atom).gamma
    return atom.kappa**2 / (g * g * laser.E0) * (math.sqrt(1.0 + g * g) - 1.0)


def exit_shift(laser: LaserSpec, atom: AtomSpec) -> ExitConditions:
    """Perturbative nonadiabatic exit shift and transverse exit momentum."""
    d = derive(laser, atom)
    eps = laser.epsilon
    dx = (1.0 - 4.0 * eps**2 / 9.0) * d.gamma**2 / 4.0 * d.x_exit_qs
    return ExitConditions(
        x_exit=d.x_exit_qs - dx,
        p_perp_exit=eps * d.gamma * atom.kappa / 6.0,
        t_exit=0.0,
        delta_x=dx,
        valid=d.gamma <= 1.0,
    )


def _peak_solution(p_perp: float, laser, atom) -> SaddleSolution:
    return solve_saddle(ridge_momentum(p_perp, laser), laser, atom, t_e=0.0)


def exit_numeric(laser: LaserSpec, atom: AtomSpec, p_scan=None, xtol: float = 1e-4) -> ExitConditions:
    """Exit of the most probable zero-range trajectory released at the field peak.

    The transverse momentum maximizing the rate is bracketed on ``p_scan``,
    refined by golden-section search to ``xtol * kappa`` and then polished on
    the stationarity condition Im y(t_e) = 0 (the p_perp-derivative of Im S).
    """
    d = derive(laser, atom)
    kappa = atom.kappa
    if laser.epsilon == 0.0:
        p_best = 0.0
    else:
        if p_scan is None:
            guess = laser.epsilon * d.gamma * kappa / 6.0
            p_scan = np.linspace(0.0, 3.0 * guess + 0.05 * kappa, 25)
        p_scan = np.asarray(p_scan, dtype=float)
        R = lambda q: rate_exponent(_peak_solution(q, laser, atom))
        vals = [R(q) for q in p_scan]
        i = int(np.clip(np.argmin(vals), 1, len(p_scan) - 2))
        res = optimize.minimize_scalar(R, bracket=(p_scan[i - 1], p_scan[i], p_scan[i + 1]),
                                       method="golden", tol=xtol * kappa / max(abs(p_scan[i]), kappa))
        p_best = float(res.x)
        stationary = lambda q: under_barrier_traj(_peak_solution(q, laser, atom), laser, 5).y_exit.imag
        lo, hi = p_best - 4 * xtol * kappa, p_best + 4 * xtol * kappa
        if stationary(lo) * stationary(hi) < 0:
            p_best = optimize.brentq(stationary, lo, hi, xtol=1e-14, rtol=1e-13)
    sol = _peak_solution(p_best, laser, atom)
    traj = under_barrier_traj(sol, laser)
    return ExitConditions(
        x_exit=traj.x_exit,
        p_perp_exit=p_best,
        t_exit=0.0,
        delta_x=d.x_exit_qs - traj.x_exit,
        valid=True,
        t_s=sol.t_s,
        rate_exponent=rate_exponent(sol),
    )


def tunneling_integral(laser: LaserSpec, atom: AtomSpec) -> float:
    """2 int_0^{x_e} |p_x(x)| dx under the linear-polarization energy level."""
    if laser.epsilon != 0.0:
        raise DomainError("closed-form energy level requires linear polarization")
    x_e = exit_linear_closed_form(laser, atom)

    def momentum(x):
        kinetic = energy_level(x, laser, atom) + x * laser.E0
        return math.sqrt(max(-2.0 * kinetic, 0.0))

    val, _ = integrate.quad(momentum, 0.0, x_e, epsabs=0.0, epsrel=1e-12, limit=200)
    return 2.0 * val


def rate_modified(laser: LaserSpec, atom: AtomSpec) -> float:
    """Tunneling exponent with the leading (1 + gamma^2/5) nonadiabatic factor."""
    g = derive(laser, atom).gamma
    return (1.0 + g * g / 5.0) * tunneling_integral(laser, atom)


def rate_factorized(laser: LaserSpec, atom: AtomSpec) -> tuple[float, float]:
    """Photons absorbed under the barrier n* and the static exponent at the raised level.

    n* = (x_qs - x_e) E0 / w with x_e from the perturbative exit shift; the
    exponent is that of static tunneling from energy -Ip + n* w.
    """
    ex = exit_shift(laser, atom)
    d_energy = ex.delta_x * laser.E0
    n_star = d_energy / laser.omega
    level = atom.ip - n_star * laser.omega
    if level <= 0:
        raise DomainError("raised energy level above the barrier top (n* w >= Ip)")
    x_turn = level / laser.E0
    val, _ = integrate.quad(lambda x: math.sqrt(max(2.0 * (level - x * laser.E0), 0.0)),
                            0.0, x_turn, epsabs=0.0, epsrel=1e-12)
    return n_star, 2.0 * val
