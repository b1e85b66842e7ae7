"""Atomic-unit conventions, the elliptically polarized field and derived parameters.

The field is E(t) = -E0 (cos wt, eps sin wt) with vector potential
A(t) = (E0/w) (sin wt, -eps cos wt), so that E = -dA/dt. Both accept complex t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AU_TIME_AS = 24.188843265857  # attoseconds per atomic unit of time
BOHR_NM = 0.0529177210903
C_AU = 137.035999084


def as_to_au(t_as: float) -> float:
    return t_as / AU_TIME_AS


def au_to_as(t_au: float) -> float:
    return t_au * AU_TIME_AS


def omega_from_wavelength(wavelength_nm: float) -> float:
    """Angular frequency in a.u. for a vacuum wavelength in nm."""
    return 2.0 * math.pi * C_AU / (wavelength_nm / BOHR_NM)


@dataclass(frozen=True)
class LaserSpec:
    E0: float
    omega: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.E0 > 0:
            raise ValueError(f"E0 must be > 0, got {self.E0}")
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def a0(self) -> float:
        """Vector-potential amplitude E0/omega."""
        return self.E0 / self.omega

    def with_gamma(self, gamma: float, atom: "AtomSpec") -> "LaserSpec":
        """Same omega and ellipticity, E0 chosen to realize the Keldysh parameter."""
        return LaserSpec(atom.kappa * self.omega / gamma, self.omega, self.epsilon)

    def with_e0(self, E0: float) -> "LaserSpec":
        return LaserSpec(E0, self.omega, self.epsilon)


@dataclass(frozen=True)
class AtomSpec:
    ip: float
    z: float = 1.0

    def __post_init__(self):
        if not self.ip > 0:
            raise ValueError(f"ip must be > 0, got {self.ip}")
        if not self.z >= 0:
            raise ValueError(f"z must be >= 0, got {self.z}")

    @property
    def kappa(self) -> float:
        return math.sqrt(2.0 * self.ip)


HELIUM = AtomSpec(ip=0.9036, z=1.0)


@dataclass(frozen=True)
class DerivedParams:
    gamma: float
    up: float
    n_photon: float
    x_exit_qs: float
    tau_k: float
    e_atomic: float


def efield(t, laser: LaserSpec) -> np.ndarray:
    """Electric field vector at (possibly complex) time t."""
    wt = laser.omega * np.asarray(t)
    return -laser.E0 * np.array([np.cos(wt), laser.epsilon * np.sin(wt)])


def apot(t, laser: LaserSpec) -> np.ndarray:
    """Vector potential at (possibly complex) time t."""
    wt = laser.omega * np.asarray(t)
    return laser.a0 * np.array([np.sin(wt), -laser.epsilon * np.cos(wt)])


def efield_dot(t, laser: LaserSpec) -> np.ndarray:
    wt = laser.omega * np.asarray(t)
    return laser.E0 * laser.omega * np.array([np.sin(wt), -laser.epsilon * np.cos(wt)])


def derive(laser: LaserSpec, atom: AtomSpec) -> DerivedParams:
    kappa = atom.kappa
    gamma = kappa * laser.omega / laser.E0
    return DerivedParams(
        gamma=gamma,
        up=laser.E0**2 / (2.0 * laser.omega**2),
        n_photon=atom.ip / laser.omega,
        x_exit_qs=kappa**2 / (2.0 * laser.E0),
        tau_k=kappa / laser.E0,
        e_atomic=kappa**3,
    )
