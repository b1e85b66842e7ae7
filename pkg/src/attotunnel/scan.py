"""Parameter sweeps producing the tabular datasets written by the CLI."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .continuum import MODELS, Toggles, attoclock_point, launch_for_model, status_of, upstream_exits
from .errors import AttotunnelError, ConfigError
from .fields import AtomSpec, LaserSpec, au_to_as, derive, omega_from_wavelength
from .sfa import dominant_saddle

COLUMNS = (
    "gamma", "e0_au", "model", "x_exit_au", "p_perp_exit_au", "t_exit_as", "re_ts_as", "im_ts_as",
    "p_inf_x_au", "p_inf_y_au", "angle_deg", "offset_deg", "status",
)
DIST_COLUMNS = ("p_x_au", "p_y_au", "rate_exponent", "ridge_p_y_au")


@dataclass
class ScanConfig:
    ip: float = 0.9036
    z: float = 1.0
    wavelength_nm: float | None = 735.0
    omega: float | None = None
    ellipticity: float = 0.87
    gamma_range: tuple[float, float, int] | None = (0.8, 3.0, 23)
    e0_range: tuple[float, float, int] | None = None
    models: tuple[str, ...] = MODELS
    n_cycles: float = 4
    toggles: Toggles = field(default_factory=Toggles)
    output_path: str | None = None
    format: str = "csv"
    jobs: int = 1

    def validate(self) -> None:
        if not self.ip > 0:
            raise ConfigError("atom-ip: ionization potential must be > 0")
        if not self.z >= 0:
            raise ConfigError("atom-z: charge must be >= 0")
        if self.omega is None and (self.wavelength_nm is None or not self.wavelength_nm > 0):
            raise ConfigError("wavelength-nm: must be > 0")
        if self.omega is not None and not self.omega > 0:
            raise ConfigError("omega: must be > 0")
        if not 0 <= self.ellipticity <= 1:
            raise ConfigError("ellipticity: must lie in [0, 1]")
        if (self.gamma_range is None) == (self.e0_range is None):
            raise ConfigError("gamma-range/e0-range: exactly one must be given")
        lo, hi, steps = self.gamma_range or self.e0_range
        name = "gamma-range" if self.gamma_range else "e0-range"
        if steps < 2:
            raise ConfigError(f"{name}: steps must be >= 2")
        if not 0 < lo <= hi:
            raise ConfigError(f"{name}: need 0 < lo <= hi")
        bad = [m for m in self.models if m not in MODELS]
        if bad or not self.models:
            raise ConfigError(f"models: unknown model(s) {','.join(bad) or '(none)'}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format: must be csv or json")
        if not self.n_cycles > 0:
            raise ConfigError("n-cycles: must be > 0")
        if self.jobs < 1:
            raise ConfigError("jobs: must be >= 1")

    @property
    def atom(self) -> AtomSpec:
        return AtomSpec(self.ip, self.z)

    @property
    def laser_omega(self) -> float:
        return self.omega if self.omega is not None else omega_from_wavelength(self.wavelength_nm)

    def lasers(self) -> list[LaserSpec]:
        """One laser per grid point, ordered by increasing gamma."""
        w = self.laser_omega
        if self.gamma_range is not None:
            lo, hi, n = self.gamma_range
            return [LaserSpec(self.atom.kappa * w / g, w, self.ellipticity)
                    for g in np.linspace(lo, hi, int(n))]
        lo, hi, n = self.e0_range
        # decreasing field = increasing gamma
        return [LaserSpec(e0, w, self.ellipticity) for e0 in np.linspace(lo, hi, int(n))[::-1]]


def _empty_row(gamma, e0, model, status):
    row = dict.fromkeys(COLUMNS)
    row.update(gamma=gamma, e0_au=e0, model=model, status=status)
    return row


def point_rows(laser: LaserSpec, atom: AtomSpec, models, toggles: Toggles, n_cycles: float,
               details: dict | None = None) -> list[dict]:
    """All model rows for one grid point, sorted by model name."""
    gamma = derive(laser, atom).gamma
    zero, coul, errors = upstream_exits(laser, atom, models)
    if details is not None:
        details.update(zero=zero, coulomb=coul, errors=errors)
    rows = []
    for m in sorted(models):
        try:
            if m in errors:
                raise errors[m]
            launch = launch_for_model(m, laser, atom, zero, coul, toggles)
            pt = attoclock_point(launch, laser, atom, n_cycles)
        except AttotunnelError as err:
            rows.append(_empty_row(gamma, laser.E0, m, status_of(err)))
            continue
        if m == "na-coulomb":
            t_s = coul.t_s
        elif m == "na-zero":
            t_s = zero.t_s
        else:
            # adiabatic limit of the saddle time: i times the Keldysh time
            t_s = 1j * derive(laser, atom).tau_k
        if details is not None:
            details.setdefault("launches", {})[m] = launch
            details.setdefault("points", {})[m] = pt
        rows.append({
            "gamma": gamma,
            "e0_au": laser.E0,
            "model": m,
            "x_exit_au": launch.position[0],
            "p_perp_exit_au": launch.velocity[1],
            "t_exit_as": au_to_as(launch.t_start),
            "re_ts_as": au_to_as(t_s.real),
            "im_ts_as": au_to_as(t_s.imag),
            "p_inf_x_au": pt.p_inf[0],
            "p_inf_y_au": pt.p_inf[1],
            "angle_deg": pt.angle,
            "offset_deg": pt.offset_angle,
            "status": "ok",
        })
    return rows


def _point_task(args):
    laser, atom, models, toggles, n_cycles = args
    return point_rows(laser, atom, models, toggles, n_cycles)


def run_scan_rows(config: ScanConfig) -> list[dict]:
    config.validate()
    tasks = [(lz, config.atom, tuple(config.models), config.toggles, config.n_cycles)
             for lz in config.lasers()]
    if config.jobs == 1:
        chunks = [_point_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            # map preserves submission order
            chunks = list(pool.map(_point_task, tasks))
    return [row for chunk in chunks for row in chunk]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    v = float(v)
    if not math.isfinite(v):
        return ""
    return format(v, ".17g")


def format_rows(rows: list[dict], fmt: str, columns=COLUMNS) -> str:
    if fmt == "json":
        clean = [{k: (None if (v is None or (isinstance(v, float) and not math.isfinite(v))) else v)
                  for k, v in ((c, r[c]) for c in columns)} for r in rows]
        return json.dumps(clean, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def ridge_location(py: np.ndarray, R: np.ndarray) -> float:
    """Sub-cell minimum of R(p_y) by parabolic interpolation around the grid minimum."""
    i = int(np.nanargmin(R))
    if i == 0 or i == len(py) - 1:
        return float(py[i])
    y0, y1, y2 = R[i - 1], R[i], R[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom <= 0:
        return float(py[i])
    h = py[i + 1] - py[i]
    return float(py[i] + 0.5 * h * (y0 - y2) / denom)


def ridge_refined(p_x: float, laser: LaserSpec, atom: AtomSpec, bracket) -> float:
    """Local minimum of the rate exponent along p_y at fixed p_x."""
    f = lambda py: dominant_saddle((p_x, py), laser, atom).rate_exponent
    return float(optimize.minimize_scalar(f, bracket=bracket, tol=1e-10).x)


def distribution_rows(laser: LaserSpec, atom: AtomSpec, px_grid, py_grid) -> list[dict]:
    """Rate exponent R(p) of the dominant zero-range saddle over a momentum grid."""
    px_grid = np.asarray(px_grid, float)
    py_grid = np.asarray(py_grid, float)
    rows = []
    for px in px_grid:
        R = np.full(len(py_grid), np.nan)
        for j, py in enumerate(py_grid):
            try:
                R[j] = dominant_saddle((px, py), laser, atom).rate_exponent
            except AttotunnelError:
                pass
        ridge = ridge_location(py_grid, R) if np.isfinite(R).any() else math.nan
        for py, r in zip(py_grid, R):
            rows.append({"p_x_au": px, "p_y_au": py, "rate_exponent": r, "ridge_p_y_au": ridge})
    return rows
