"""Command-line entry point: ``attotunnel scan|point|distribution``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .continuum import MODELS, Toggles
from .errors import ConfigError
from .fields import AtomSpec, LaserSpec, au_to_as, derive
from .scan import DIST_COLUMNS, ScanConfig, distribution_rows, format_rows, point_rows, run_scan_rows

# config-file keys and how to parse them; flag names are the same with a leading "--"
_KEYS = {
    "atom-ip": float,
    "atom-z": float,
    "wavelength-nm": float,
    "omega": float,
    "ellipticity": float,
    "gamma-range": "range",
    "e0-range": "range",
    "gamma": float,
    "e0": float,
    "models": "models",
    "n-cycles": float,
    "toggle-wigner": "bool",
    "no-nonadiabatic-exit": "bool",
    "no-nonadiabatic-pperp": "bool",
    "no-nonadiabatic-delay": "bool",
    "format": str,
    "out": str,
    "jobs": int,
    "px-range": "range",
    "py-range": "range",
}


def parse_range(text: str, name: str = "range") -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name}: expected lo:hi:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{name}: expected lo:hi:steps, got {text!r}") from None
    if steps < 2:
        raise ConfigError(f"{name}: steps must be >= 2")
    if hi < lo:
        raise ConfigError(f"{name}: hi < lo")
    return lo, hi, steps


def _parse_value(key: str, raw: str, where: str):
    kind = _KEYS[key]
    label = f"{key} ({where})" if where else key
    if kind == "range":
        return parse_range(raw, label)
    if kind == "models":
        return tuple(m.strip() for m in raw.split(",") if m.strip())
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{label}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{label}: cannot parse {raw!r}") from None


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file. Blank lines and ``#`` comments are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise ConfigError(f"config: cannot read {path}: {err.strerror}") from None
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in _KEYS:
            raise ConfigError(f"{key} (config line {n}): unknown key")
        out[key] = _parse_value(key, raw, f"config line {n}")
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--atom-ip", type=str, help="ionization potential, a.u. (default 0.9036, helium)")
    p.add_argument("--atom-z", type=str, help="residual ion charge (default 1)")
    p.add_argument("--wavelength-nm", type=str, help="default 735")
    p.add_argument("--omega", type=str, help="angular frequency in a.u., overrides the wavelength")
    p.add_argument("--ellipticity", type=str, help="default 0.87")
    p.add_argument("--n-cycles", type=str, help="flat-top cycles of the propagation pulse (default 4)")
    p.add_argument("--toggle-wigner", action="store_const", const="true")
    p.add_argument("--no-nonadiabatic-exit", action="store_const", const="true")
    p.add_argument("--no-nonadiabatic-pperp", action="store_const", const="true")
    p.add_argument("--no-nonadiabatic-delay", action="store_const", const="true")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="attotunnel", description="Nonadiabatic tunneling and attoclock sweeps")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("scan", help="sweep gamma or E0 over all models")
    _add_common(sp)
    sp.add_argument("--gamma-range", help="lo:hi:steps")
    sp.add_argument("--e0-range", help="lo:hi:steps, a.u.")
    sp.add_argument("--models", help="comma list from " + ",".join(MODELS))
    sp.add_argument("--jobs", type=str, help="worker processes (default 1)")

    pp = sub.add_parser("point", help="report all intermediate quantities at one point")
    _add_common(pp)
    pp.add_argument("--gamma")
    pp.add_argument("--e0")
    pp.add_argument("--models")

    dp = sub.add_parser("distribution", help="rate exponent over a momentum grid")
    _add_common(dp)
    dp.add_argument("--gamma")
    dp.add_argument("--e0")
    dp.add_argument("--px-range", help="lo:hi:steps (default -1.5:1.5:31)")
    dp.add_argument("--py-range", help="lo:hi:steps (default 0.5:3:51)")
    return ap


def merged_settings(args: argparse.Namespace) -> dict:
    settings = read_config(args.config) if args.config else {}
    for key in _KEYS:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            settings[key] = _parse_value(key, val, "")
    return settings


def config_from_settings(s: dict) -> ScanConfig:
    toggles = Toggles(
        nonadiabatic_exit=not s.get("no-nonadiabatic-exit", False),
        nonadiabatic_pperp=not s.get("no-nonadiabatic-pperp", False),
        nonadiabatic_delay=not s.get("no-nonadiabatic-delay", False),
        wigner=s.get("toggle-wigner", False),
    )
    gr, er = s.get("gamma-range"), s.get("e0-range")
    if gr is None and er is None:
        gr = (0.8, 3.0, 23)
    cfg = ScanConfig(
        ip=s.get("atom-ip", 0.9036),
        z=s.get("atom-z", 1.0),
        wavelength_nm=s.get("wavelength-nm", 735.0),
        omega=s.get("omega"),
        ellipticity=s.get("ellipticity", 0.87),
        gamma_range=gr,
        e0_range=er,
        models=s.get("models", MODELS),
        n_cycles=s.get("n-cycles", 4),
        toggles=toggles,
        output_path=s.get("out"),
        format=s.get("format", "csv"),
        jobs=s.get("jobs", 1),
    )
    cfg.validate()
    return cfg


def _single_laser(s: dict, cfg: ScanConfig) -> LaserSpec:
    if ("gamma" in s) == ("e0" in s):
        raise ConfigError("gamma/e0: exactly one must be given")
    w = cfg.laser_omega
    if "gamma" in s:
        if not s["gamma"] > 0:
            raise ConfigError("gamma: must be > 0")
        return LaserSpec(cfg.atom.kappa * w / s["gamma"], w, cfg.ellipticity)
    if not s["e0"] > 0:
        raise ConfigError("e0: must be > 0")
    return LaserSpec(s["e0"], w, cfg.ellipticity)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_scan(s: dict) -> int:
    cfg = config_from_settings(s)
    _emit(format_rows(run_scan_rows(cfg), cfg.format), cfg.output_path)
    return 0


def _pair(label, v_au, unit="a.u."):
    return f"  {label:<22} {v_au:>14.6f} {unit}"


def _time(label, t_au):
    return f"  {label:<22} {t_au:>14.6f} a.u.  {au_to_as(t_au):>12.4f} as"


def point_report(laser: LaserSpec, atom: AtomSpec, models, toggles: Toggles, n_cycles: float) -> str:
    d = derive(laser, atom)
    details = {}
    rows = point_rows(laser, atom, models, toggles, n_cycles, details)
    out = ["laser / atom",
           _pair("E0", laser.E0), _pair("omega", laser.omega), _pair("epsilon", laser.epsilon, ""),
           _pair("Ip", atom.ip), _pair("Z", atom.z, ""), _pair("kappa", atom.kappa),
           "derived",
           _pair("gamma", d.gamma, ""), _pair("Up", d.up), _pair("Ip/omega", d.n_photon, ""),
           _pair("x_exit (quasi-static)", d.x_exit_qs), _time("Keldysh time", d.tau_k)]
    zero, coul = details.get("zero"), details.get("coulomb")
    if zero is not None:
        out += ["zero-range exit",
                _time("Re t_s", zero.t_s.real), _time("Im t_s", zero.t_s.imag),
                _pair("x_exit", zero.x_exit), _pair("p_perp_exit", zero.p_perp_exit),
                _pair("rate exponent", zero.rate_exponent, "")]
    if coul is not None:
        out += ["coulomb exit",
                _time("Re t_s", coul.t_s.real), _time("Im t_s", coul.t_s.imag),
                _time("t_exit", coul.t_exit),
                _pair("x_exit", coul.x_exit), _pair("y_exit", coul.y_exit),
                _pair("p_perp_exit", coul.p_perp_exit), f"  {'residual':<22} {coul.residual:>14.3e}"]
    for name, err in details.get("errors", {}).items():
        out.append(f"  {name}: {type(err).__name__}: {err}")
    launches = details.get("launches", {})
    for row in rows:
        m = row["model"]
        out.append(f"model {m}  [{row['status']}]")
        if row["status"] != "ok":
            continue
        ln = launches[m]
        out += [_pair("launch x", ln.position[0]), _pair("launch y", ln.position[1]),
                _pair("launch v_x", ln.velocity[0]), _pair("launch v_y", ln.velocity[1]),
                _time("launch time", ln.t_start),
                _pair("p_inf_x", row["p_inf_x_au"]), _pair("p_inf_y", row["p_inf_y_au"]),
                _pair("angle_deg", row["angle_deg"], "deg"),
                _pair("offset_deg", row["offset_deg"], "deg")]
    return "\n".join(out) + "\n"


def run_point(s: dict) -> int:
    s = dict(s)
    s.setdefault("gamma-range", (1.0, 1.0, 2))  # placeholder, validated then unused
    s.pop("e0-range", None)
    cfg = config_from_settings(s)
    laser = _single_laser(s, cfg)
    text = point_report(laser, cfg.atom, cfg.models, cfg.toggles, cfg.n_cycles)
    _emit(text, cfg.output_path)
    return 0


def run_distribution(s: dict) -> int:
    s = dict(s)
    s.setdefault("gamma-range", (1.0, 1.0, 2))
    s.pop("e0-range", None)
    cfg = config_from_settings(s)
    laser = _single_laser(s, cfg)
    px = np.linspace(*s.get("px-range", (-1.5, 1.5, 31)))
    py = np.linspace(*s.get("py-range", (0.5, 3.0, 51)))
    rows = distribution_rows(laser, cfg.atom, px, py)
    _emit(format_rows(rows, cfg.format, DIST_COLUMNS), cfg.output_path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = merged_settings(args)
        runner = {"scan": run_scan, "point": run_point, "distribution": run_distribution}[args.command]
        return runner(settings)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
