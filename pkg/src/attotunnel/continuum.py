"""Classical continuum motion after the tunnel exit and the attoclock observable."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .barrier import ExitConditions, exit_numeric
from .coulomb import CoulombExit, solve_exit
from .errors import AttotunnelError, BoundOrbit, CoreCollision, StepFailure
from .fields import AtomSpec, LaserSpec, apot, as_to_au, derive, efield

MODELS = ("na-coulomb", "na-zero", "qs-coulomb", "qs-zero")

WIGNER_ANCHOR_E0 = 0.1
WIGNER_ANCHOR_AS = 10.0


@dataclass(frozen=True)
class LaunchState:
    position: tuple[float, float]
    velocity: tuple[float, float]
    t_start: float
    model: str

    @property
    def coulomb(self) -> bool:
        return self.model.endswith("coulomb")


@dataclass(frozen=True)
class EndState:
    t: float
    position: np.ndarray
    velocity: np.ndarray


@dataclass(frozen=True)
class Toggles:
    """Switches for the individual nonadiabatic launch corrections."""

    nonadiabatic_exit: bool = True
    nonadiabatic_pperp: bool = True
    nonadiabatic_delay: bool = True
    wigner: bool = False


@dataclass(frozen=True)
class AttoclockPoint:
    p_inf: tuple[float, float]
    angle: float
    offset_angle: float
    gamma: float
    model: str
    status: str = "ok"


@dataclass(frozen=True)
class Envelope:
    """Flat for ``n_cycles`` periods from t = 0, then a cos^2 ramp of the vector potential.

    Ramping A rather than E guarantees A -> 0 at switch-off, so a free
    electron keeps exactly its drift momentum.
    """

    laser: LaserSpec
    n_cycles: float = 4
    ramp_cycles: float = 2
    rotation: float = 0.0

    @property
    def t_flat(self) -> float:
        return self.n_cycles * self.laser.period

    @property
    def t_off(self) -> float:
        return (self.n_cycles + self.ramp_cycles) * self.laser.period

    def _g(self, t):
        if t <= self.t_flat:
            return 1.0, 0.0
        if t >= self.t_off:
            return 0.0, 0.0
        width = self.t_off - self.t_flat
        phi = 0.5 * math.pi * (t - self.t_flat) / width
        return math.cos(phi) ** 2, -math.sin(2 * phi) * 0.5 * math.pi / width

    def _rotate(self, v):
        if not self.rotation:
            return v
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])

    def vector_potential(self, t):
        g, _ = self._g(t)
        return self._rotate(apot(t, self.laser) * g)

    def field(self, t):
        g, dg = self._g(t)
        return self._rotate(efield(t, self.laser) * g - apot(t, self.laser) * dg)


def _rotate(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def _integrate_real(state0, t0, t1, force, r_min, Z, rtol, max_step=np.inf):
    def rhs(t, s):
        fx, fy = force(t, s)
        return (s[2], s[3], fx, fy)

    events = None
    if Z:
        def core(t, s):
            return math.hypot(s[0], s[1]) - r_min
        core.terminal = True
        events = core
    sol = solve_ivp(rhs, (t0, t1), state0, method="DOP853", rtol=rtol, atol=rtol * 1e-2,
                    events=events, max_step=max_step)
    if sol.status == 1:
        raise CoreCollision(f"recollision inside r_min = {r_min} a.u. at t = {sol.t[-1]:.3f}")
    if not sol.success:
        raise StepFailure(sol.message)
    return sol.y[:, -1]


def propagate(launch: LaunchState, laser: LaserSpec, atom: AtomSpec, n_cycles: float = 4,
              ramp_cycles: float = 2, rtol: float = 1e-10, r_min: float = 0.1,
              rotation: float = 0.0) -> EndState:
    """Integrate r'' = -E_env(t) - Z r / r^3 from launch until the field is off.

    Zero-range models are propagated without the Coulomb term. ``rotation``
    rotates the laser polarization plane (used for frame-consistency checks;
    the launch state must be rotated by the caller).
    """
    env = Envelope(laser, n_cycles, ramp_cycles, rotation)
    Z = atom.z if launch.coulomb else 0.0

    def force(t, s):
        ex, ey = env.field(t)
        fx, fy = -ex, -ey
        if Z:
            r3 = math.hypot(s[0], s[1]) ** 3
            fx -= Z * s[0] / r3
            fy -= Z * s[1] / r3
        return fx, fy

    state0 = np.array([*launch.position, *launch.velocity], dtype=float)
    # resolve the laser period inside the flat part
    s = _integrate_real(state0, launch.t_start, env.t_off, force, r_min, Z, rtol,
                        max_step=laser.period / 20)
    return EndState(env.t_off, s[:2].copy(), s[2:].copy())


def kepler_invariants(position, velocity, Z: float):
    x, y = position
    vx, vy = velocity
    r = math.hypot(x, y)
    energy = 0.5 * (vx * vx + vy * vy) - (Z / r if Z else 0.0)
    L = x * vy - y * vx
    # Runge-Lenz vector v x L - Z r_hat
    ax = vy * L - (Z * x / r if Z else 0.0)
    ay = -vx * L - (Z * y / r if Z else 0.0)
    return energy, L, np.array([ax, ay])


def kepler_asymptote(position, velocity, Z: float) -> np.ndarray:
    """Detector momentum of an unbound Coulomb orbit from its conserved quantities."""
    energy, L, a = kepler_invariants(position, velocity, Z)
    if Z == 0:
        return np.array(velocity, dtype=float)
    if energy <= 0:
        raise BoundOrbit(f"post-pulse energy {energy:.3e} <= 0")
    k = math.sqrt(2.0 * energy)
    cross = np.array([-L * a[1], L * a[0]])  # L z_hat x a
    return k * (k * cross - Z * a) / (Z * Z + k * k * L * L)


def emission_angle(p_inf, laser: LaserSpec | None = None, reference_deg: float = 90.0):
    """Emission angle atan2(p_y, p_x) and offset from the reference direction, in degrees.

    The reference is the streaking direction -A(0) of the quasi-static
    zero-range electron (+y for this field); positive offsets are
    counter-clockwise, the sense in which the ion pulls the electron.
    """
    angle = math.degrees(math.atan2(p_inf[1], p_inf[0]))
    offset = angle - reference_deg
    offset = (offset + 180.0) % 360.0 - 180.0
    if offset == -180.0:
        offset = 180.0
    return angle, offset


def wigner_estimate(E0: float, atom: AtomSpec, exponent: float = 2.0 / 3.0) -> float:
    """Order-of-magnitude (negative) Wigner delay in a.u., tau ~ -(E_a/E0)^exponent.

    The prefactor is calibrated to -10 as at E0 = 0.1 a.u.; E_a = kappa^3.
    """
    e_a = atom.kappa**3
    c = as_to_au(WIGNER_ANCHOR_AS) / (e_a / WIGNER_ANCHOR_E0) ** exponent
    return -c * (e_a / E0) ** exponent


def launch_for_model(model: str, laser: LaserSpec, atom: AtomSpec,
                     zero_exit: ExitConditions | None = None,
                     coulomb_exit: CoulombExit | None = None,
                     toggles: Toggles = Toggles()) -> LaunchState:
    """Starting conditions of the continuum motion for one model variant.

    Quasi-static models start at rest at kappa^2/(2 E0) at the field peak.
    Nonadiabatic models take the exit coordinate, transverse momentum and exit
    time of the corresponding under-the-barrier solution, each switchable.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    d = derive(laser, atom)
    qs = LaunchState((d.x_exit_qs, 0.0), (0.0, 0.0), 0.0, model)
    if model.startswith("qs"):
        return qs
    if model == "na-zero":
        ex = zero_exit if zero_exit is not None else exit_numeric(laser, atom)
        x, y, p, t = ex.x_exit, 0.0, ex.p_perp_exit, ex.t_exit
    else:
        ex = coulomb_exit if coulomb_exit is not None else solve_exit(laser, atom, seed=zero_exit)
        x, y, p, t = ex.x_exit, ex.y_exit, ex.p_perp_exit, ex.t_exit
        if toggles.wigner:
            t += wigner_estimate(laser.E0, atom)
    if not toggles.nonadiabatic_exit:
        x, y = d.x_exit_qs, 0.0
    if not toggles.nonadiabatic_pperp:
        p = 0.0
    if not toggles.nonadiabatic_delay:
        t = 0.0
    return LaunchState((x, y), (0.0, p), t, model)


def final_momentum(launch: LaunchState, laser: LaserSpec, atom: AtomSpec, n_cycles: float = 4,
                   ramp_cycles: float = 2, rtol: float = 1e-10) -> np.ndarray:
    """Detector momentum; zero-range models use the exact free-electron drift v0 - A(t0)."""
    if not launch.coulomb or atom.z == 0:
        env = Envelope(laser, n_cycles, ramp_cycles)
        return np.asarray(launch.velocity, dtype=float) - env.vector_potential(launch.t_start)
    end = propagate(launch, laser, atom, n_cycles=n_cycles, ramp_cycles=ramp_cycles, rtol=rtol)
    return kepler_asymptote(end.position, end.velocity, atom.z)


def attoclock_point(launch: LaunchState, laser: LaserSpec, atom: AtomSpec, n_cycles: float = 4) -> AttoclockPoint:
    p = final_momentum(launch, laser, atom, n_cycles=n_cycles)
    angle, offset = emission_angle(p, laser)
    return AttoclockPoint((float(p[0]), float(p[1])), angle, offset, derive(laser, atom).gamma, launch.model)


def status_of(err: Exception) -> str:
    if isinstance(err, CoreCollision):
        return "core-collision"
    if isinstance(err, BoundOrbit):
        return "bound-orbit"
    return "no-convergence"


def upstream_exits(laser: LaserSpec, atom: AtomSpec, models):
    """Zero-range and Coulomb exits needed by ``models``; failures keyed by model."""
    zero = coul = None
    errors: dict[str, Exception] = {}
    na = [m for m in models if m.startswith("na")]
    if not na:
        return zero, coul, errors
    try:
        zero = exit_numeric(laser, atom)
    except AttotunnelError as err:
        return None, None, {m: err for m in na}
    if "na-coulomb" in models:
        try:
            coul = solve_exit(laser, atom, seed=zero)
        except AttotunnelError as err:
            errors["na-coulomb"] = err
    return zero, coul, errors


def attoclock_curve(gamma_grid, laser: LaserSpec, atom: AtomSpec, models=MODELS,
                    toggles: Toggles = Toggles(), n_cycles: float = 4) -> list[AttoclockPoint]:
    """Offset angles over a Keldysh-parameter grid (E0 varied at fixed omega).

    Failed points are kept with a non-"ok" status and NaN observables.
    """
    out = []
    for g in gamma_grid:
        lg = laser.with_gamma(g, atom)
        zero, coul, errors = upstream_exits(lg, atom, models)
        for m in sorted(models):
            try:
                if m in errors:
                    raise errors[m]
                launch = launch_for_model(m, lg, atom, zero, coul, toggles)
                out.append(attoclock_point(launch, lg, atom, n_cycles))
            except AttotunnelError as err:
                out.append(AttoclockPoint((math.nan, math.nan), math.nan, math.nan, g, m, status_of(err)))
    return out
