import cmath
import math

import numpy as np
import pytest

from attotunnel.barrier import exit_numeric
from attotunnel.coulomb import (coulomb_start, default_contour, energy, exit_scan, integrate_under_barrier,
                                propagate_complex, solve_exit)
from attotunnel.errors import CoreCollision, DegenerateField, NonConvergence
from attotunnel.fields import HELIUM, AtomSpec, LaserSpec, apot, efield, omega_from_wavelength

W735 = omega_from_wavelength(735.0)


def he(gamma):
    return LaserSpec(1.0, W735, 0.87).with_gamma(gamma, HELIUM)


@pytest.fixture(scope="module")
def he_exit():
    lz = LaserSpec(0.1, W735, 0.87)
    return lz, solve_exit(lz, HELIUM)


def test_start_point_example():
    st = coulomb_start(0j, LaserSpec(0.1, W735, 0.87), HELIUM)
    assert abs(st.x_s) == pytest.approx((1 / (2 * HELIUM.kappa**2 * 0.1)) ** (1 / 3), rel=1e-12)
    assert abs(st.x_s) == pytest.approx(1.40, abs=0.01)
    assert cmath.phase(st.x_s) == pytest.approx(-math.pi / 3)


@pytest.mark.parametrize("t_s", [0.5j, -1.5 + 14j, 3 + 20j])
def test_start_satisfies_defining_cubic(t_s):
    lz = LaserSpec(0.1, W735, 0.87)
    st = coulomb_start(t_s, lz, HELIUM, v_perp=0.1)
    F = -efield(t_s, lz)[0]
    # force balance along the tunnelling direction with the effective binding momentum
    assert abs(st.x_s * F + HELIUM.z**2 / (2 * st.kappa_eff**2 * st.x_s**2)) < 1e-12
    # total energy including the laser potential is exactly -Ip at the start
    e = 0.5 * (st.v_s**2 + st.v_perp**2) - HELIUM.z / cmath.sqrt(st.x_s**2) + st.x_s * efield(t_s, lz)[0]
    assert abs(e + HELIUM.ip) < 1e-12


def test_zero_charge_collapses_to_core():
    st = coulomb_start(0.3j, LaserSpec(0.1, W735, 0.87), AtomSpec(0.9036, 0.0))
    assert st.x_s == 0
    assert st.v_s == pytest.approx(1j * HELIUM.kappa)
    small = coulomb_start(0.3j, LaserSpec(0.1, W735, 0.87), AtomSpec(0.9036, 1e-9))
    assert abs(small.x_s) < 1e-5


def test_degenerate_field():
    lz = LaserSpec(0.1, W735, 0.87)
    with pytest.raises(DegenerateField):
        coulomb_start(math.pi / (2 * W735), lz, HELIUM)


def test_zero_charge_matches_closed_form():
    lz = LaserSpec(0.1, W735, 0.87)
    atom = AtomSpec(HELIUM.ip, 0.0)
    t_s = 0.2 + 14j
    st = coulomb_start(t_s, lz, atom, 0.15)
    rec = integrate_under_barrier(st, 2.0, lz, atom, dense=20)
    E0, w = lz.E0, lz.omega
    a_s = apot(t_s, lz)
    prim = lambda t: np.array([-E0 / w**2 * np.cos(w * t), -lz.epsilon * E0 / w**2 * np.sin(w * t)])
    v0 = np.array([st.v_s, st.v_perp])
    worst = 0.0
    for t, s in zip(rec.times, rec.states):
        exact = v0 * (t - t_s) + prim(t) - prim(t_s) - a_s * (t - t_s)
        worst = max(worst, abs(s[0] - exact[0]), abs(s[1] - exact[1]))
    assert worst < 1e-8


def test_energy_bookkeeping_along_contour():
    lz = LaserSpec(0.1, W735, 0.87)
    st = coulomb_start(-1.5 + 14.5j, lz, HELIUM, 0.1)
    rec = integrate_under_barrier(st, 0.5, lz, HELIUM, dense=30)
    e0 = energy(rec.states[0], rec.times[0], lz, HELIUM)
    for t, s in zip(rec.times, rec.states):
        assert abs(energy(s, t, lz, HELIUM) - e0 - s[4]) < 1e-7


def test_contour_reversal_recovers_start():
    lz = LaserSpec(0.1, W735, 0.87)
    st = coulomb_start(-1.5 + 14.5j, lz, HELIUM, 0.1)
    fwd = integrate_under_barrier(st, 0.5, lz, HELIUM, rtol=1e-12)
    back = propagate_complex(fwd.final[:4], fwd.contour[::-1], lz, HELIUM, rtol=1e-12, atol=1e-14, r_min=0.05)
    start = np.array([st.x_s, 0, st.v_s, st.v_perp])
    assert np.max(np.abs(back.final[:4] - start)) < 1e-7


def test_core_collision_is_reported():
    lz = LaserSpec(0.1, W735, 0.0)
    with pytest.raises(CoreCollision):
        # released at rest next to the ion, the electron falls in
        propagate_complex((0.5 + 0j, 0j, 0j, 0j), [0.0, 5.0 + 0j], lz, HELIUM, r_min=0.1)


def test_exit_conditions(he_exit):
    lz, ex = he_exit
    assert ex.residual < 1e-8
    assert ex.start.v_perp == ex.v_perp_start
    rec = integrate_under_barrier(ex.start, ex.t_exit, lz, HELIUM, transverse="perturbative")
    x, y, vx, vy, _ = rec.final
    assert abs(x.imag) < 1e-6 and abs(vx) < 1e-6
    assert abs(y.imag) < 1e-6 and abs(vy.imag) < 1e-6
    assert ex.x_exit > 0
    assert ex.contour == default_contour(ex.t_s, ex.t_exit)


def test_tolerance_convergence(he_exit):
    lz, ex = he_exit
    tight = solve_exit(lz, HELIUM, rtol=5e-11)
    assert abs(tight.x_exit / ex.x_exit - 1) < 1e-6


@pytest.mark.parametrize("g", [0.8, 1.3, 1.8, 2.4, 3.0])
def test_root_stable_under_seed_perturbation(g):
    lz = he(g)
    ex = solve_exit(lz, HELIUM)
    guess = np.array([ex.t_s.real, ex.t_s.imag, ex.t_exit]) * 1.01
    again = solve_exit(lz, HELIUM, guess=guess)
    assert again.x_exit == pytest.approx(ex.x_exit, rel=1e-8)
    assert again.t_exit == pytest.approx(ex.t_exit, rel=1e-6, abs=1e-9)


def test_scan_records_failures_and_continues():
    hydrogen = AtomSpec(0.5, 1.0)
    out = exit_scan([1.0], LaserSpec(1.0, W735, 0.87), hydrogen)
    assert isinstance(out[0], NonConvergence)
    ok = exit_scan([1.0, 1.5], he(1.0), HELIUM)
    assert all(not isinstance(e, Exception) for e in ok)
    assert ok[1].x_exit > ok[0].x_exit


def test_delay_is_positive_and_shrinks_with_weaker_field():
    # at fixed gamma the delay decreases with E0 (Coulomb pull weaker relative to the gradient of x_s)
    t = [solve_exit(LaserSpec(e0, e0 * 0.5 / HELIUM.kappa, 0.87), HELIUM).t_exit for e0 in (0.1, 0.05)]
    assert all(v > 0 for v in t)
    assert t[1] < t[0]


def test_zero_range_limit_of_exit_time():
    weak = AtomSpec(HELIUM.ip, 1e-6)
    lz = he(1.0)
    ex = solve_exit(lz, weak, seed=exit_numeric(lz, weak))
    assert abs(ex.t_exit) < 1e-6
