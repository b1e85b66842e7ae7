"""Nonadiabatic tunnel ionization in elliptically polarized fields: saddle points, exits, attoclock offsets."""
from .errors import (AttotunnelError, BoundOrbit, ConfigError, CoreCollision, DegenerateField,
                     DomainError, NonConvergence, QuadratureFailure, StepFailure)
from .fields import HELIUM, AtomSpec, DerivedParams, LaserSpec, apot, derive, efield

__version__ = "0.1.0"
