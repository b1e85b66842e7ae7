"""Short-range SFA: complex saddle times, contour action and the rate exponent."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NonConvergence, QuadratureFailure
from .fields import AtomSpec, LaserSpec, apot, derive, efield


@dataclass(frozen=True)
class SaddleSolution:
    t_s: complex
    t_e: float
    p: tuple[float, float]
    im_action: float

    @property
    def rate_exponent(self) -> float:
        return -2.0 * self.im_action


def kinetic_energy(t, p, laser: LaserSpec):
    """Complex kinetic energy (p + A(t))^2 / 2 of the laser-dressed electron."""
    ax, ay = apot(t, laser)
    vx = p[0] + ax
    vy = p[1] + ay
    return 0.5 * (vx * vx + vy * vy)


def kinetic_antiderivative(t, p, laser: LaserSpec):
    """Closed-form antiderivative of kinetic_energy in t."""
    w, a, eps = laser.omega, laser.a0, laser.epsilon
    px, py = p
    wt = w * np.asarray(t)
    return 0.5 * (
        (px * px + py * py) * t
        - 2.0 * px * a * np.cos(wt) / w
        - 2.0 * py * eps * a * np.sin(wt) / w
        + a * a * ((1.0 + eps * eps) * t / 2.0 - (1.0 - eps * eps) * np.sin(2.0 * wt) / (4.0 * w))
    )


def saddle_expansion(p_perp_e: float, laser: LaserSpec, atom: AtomSpec) -> complex:
    """Saddle time from the third-order Keldysh-parameter expansion (exit at t = 0)."""
    kappa = atom.kappa
    gamma = derive(laser, atom).gamma
    eps = laser.epsilon
    q = p_perp_e / kappa
    root = math.sqrt(1.0 + q * q)
    tau = (
        gamma * root
        - gamma**2 * eps * q / 2.0 * root
        + gamma**3 / 24.0 * root * (-4.0 + 3.0 * eps**2 + 4.0 * (-1.0 + 3.0 * eps**2) * q * q)
    )
    # -i w t_s = tau
    return 1j * tau / laser.omega


def _saddle_residual(t, p, laser, kappa):
    ax, ay = apot(t, laser)
    vx = p[0] + ax
    vy = p[1] + ay
    ex, ey = efield(t, laser)
    f = vx * vx + vy * vy + kappa * kappa
    df = -2.0 * (vx * ex + vy * ey)
    return complex(f), complex(df)


def saddle_numeric(p, laser: LaserSpec, atom: AtomSpec, seed: complex | None = None,
                   max_iter: int = 100, tol: float = 1e-13) -> complex:
    """Solve (p + A(t_s))^2 / 2 = -Ip by damped complex Newton iteration.

    The default seed maps p to an exit transverse momentum p_perp = p_y + A_y(0)
    and uses the expansion. Returns the root with Im t_s > 0.
    """
    kappa = atom.kappa
    if seed is None:
        p_perp = p[1] + float(apot(0.0, laser)[1])
        seed = saddle_expansion(p_perp, laser, atom)
        # the expansion degrades for gamma > 1; keep the leading-order root if it is closer
        gamma = derive(laser, atom).gamma
        alt = 1j * math.asinh(gamma * math.sqrt(1.0 + (p_perp / kappa) ** 2)) / laser.omega
        if abs(_saddle_residual(alt, p, laser, kappa)[0]) < abs(_saddle_residual(seed, p, laser, kappa)[0]):
            seed = alt
    t = complex(seed)
    f, df = _saddle_residual(t, p, laser, kappa)
    scale = kappa * kappa
    for _ in range(max_iter):
        if abs(f) < tol * scale:
            break
        if df == 0:
            raise NonConvergence("vanishing derivative in saddle iteration")
        step = f / df
        lam = 1.0
        while True:
            t_new = t - lam * step
            f_new, df_new = _saddle_residual(t_new, p, laser, kappa)
            if abs(f_new) < abs(f) or lam < 1e-6:
                break
            lam *= 0.5
        t, f, df = t_new, f_new, df_new
    else:
        if abs(f) >= tol * scale:
            raise NonConvergence(f"saddle residual {abs(f):.3e} after {max_iter} iterations")
    if t.imag < 0:
        # real p: roots come in conjugate pairs
        t = t.conjugate()
    if t.imag <= 0:
        raise NonConvergence("saddle root on the real axis")
    return t


def _complex_quad(func, a: complex, b: complex, rtol: float) -> complex:
    """Integrate func along the straight segment a -> b."""
    d = b - a
    if d == 0:
        return 0j

    def g(s):
        return func(a + d * s) * d

    with warnings.catch_warnings():
        # the error estimate is checked below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(g, 0.0, 1.0, complex_func=True, epsrel=rtol, epsabs=0.0, limit=200)
    if not np.isfinite(val) or abs(err) > max(1e3 * rtol * abs(val), 1e-14):
        raise QuadratureFailure(f"segment integral error estimate {abs(err):.2e}")
    return val


def action(t_s: complex, t_e: float, p, laser: LaserSpec, atom: AtomSpec,
           rtol: float = 1e-10, contour: list[complex] | None = None) -> complex:
    """S = int_{t_s}^{t_e} (p + A)^2/2 dt - Ip t_s along a piecewise-linear contour.

    The default contour drops vertically from t_s to Re t_s, then follows the
    real axis to t_e. |exp(-i S)|^2 = exp(2 Im S).
    """
    if contour is None:
        contour = [t_s, complex(t_s.real, 0.0), complex(t_e, 0.0)]
    func = lambda t: kinetic_energy(t, p, laser)
    total = 0j
    for a, b in zip(contour[:-1], contour[1:]):
        total += _complex_quad(func, complex(a), complex(b), rtol)
    return total - atom.ip * t_s


def solve_saddle(p, laser: LaserSpec, atom: AtomSpec, seed: complex | None = None,
                 t_e: float | None = None) -> SaddleSolution:
    t_s = saddle_numeric(p, laser, atom, seed=seed)
    if t_e is None:
        t_e = t_s.real
    S = action(t_s, t_e, p, laser, atom)
    return SaddleSolution(t_s=t_s, t_e=float(t_e), p=(float(p[0]), float(p[1])), im_action=S.imag)


def rate_exponent(sol: SaddleSolution) -> float:
    """R with Gamma ~ exp(-R); R = -2 Im S."""
    return -2.0 * sol.im_action


def ridge_momentum(p_perp_e: float, laser: LaserSpec) -> tuple[float, float]:
    """Asymptotic momentum for exit at the field peak with transverse exit momentum p_perp_e."""
    return (0.0, p_perp_e - float(apot(0.0, laser)[1]))


def dominant_saddle(p, laser: LaserSpec, atom: AtomSpec, n_seeds: int = 16) -> SaddleSolution:
    """Smallest-exponent saddle in one laser cycle, found from a ring of seeds."""
    d = derive(laser, atom)
    tau0 = math.asinh(d.gamma)
    best = None
    roots: list[complex] = []
    T = laser.period
    for k in range(n_seeds):
        seed = complex(-T / 2 + T * (k + 0.5) / n_seeds, tau0 / laser.omega)
        try:
            t_s = saddle_numeric(p, laser, atom, seed=seed)
        except NonConvergence:
            continue
        # fold into one cycle
        t_s = complex((t_s.real + T / 2) % T - T / 2, t_s.imag)
        if any(abs(t_s - r) < 1e-8 * T for r in roots):
            continue
        roots.append(t_s)
        sol = solve_saddle(p, laser, atom, seed=t_s)
        if best is None or sol.rate_exponent < best.rate_exponent:
            best = sol
    if best is None:
        raise NonConvergence(f"no saddle found for p={p}")
    return best


def sfa_window(t, t_lo: float, t_hi: float):
    """Flat-top analytic taper used by the direct-integration amplitude."""
    c = 0.5 * (t_lo + t_hi)
    sigma = 0.35 * (t_hi - t_lo)
    return np.exp(-(((t - c) / sigma) ** 8))


def sfa_oracle(p, laser: LaserSpec, atom: AtomSpec, t_grid: np.ndarray) -> complex:
    """Direct real-time integration of the SFA amplitude with unit matrix element.

    The integrand exp(i F(t') + i Ip t'), F the antiderivative of the kinetic
    energy, is tapered smoothly to zero at the grid ends so that truncation
    does not swamp the exponentially small tunneling contribution.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.ptp(t_grid) < laser.period * (1 - 1e-12):
        raise ValueError("time grid must span at least one laser cycle")
    phase = kinetic_antiderivative(t_grid, p, laser) + atom.ip * t_grid
    integrand = sfa_window(t_grid, t_grid[0], t_grid[-1]) * np.exp(1j * phase)
    return complex(integrate.trapezoid(integrand, t_grid))
