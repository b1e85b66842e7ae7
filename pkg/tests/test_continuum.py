import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from attotunnel.continuum import (Envelope, LaunchState, Toggles, attoclock_curve, emission_angle,
                                  final_momentum, kepler_asymptote, kepler_invariants, launch_for_model,
                                  propagate, wigner_estimate)
from attotunnel.errors import BoundOrbit, CoreCollision
from attotunnel.fields import HELIUM, AtomSpec, LaserSpec, apot, as_to_au, derive, omega_from_wavelength

W735 = omega_from_wavelength(735.0)


def he(gamma):
    return LaserSpec(1.0, W735, 0.87).with_gamma(gamma, HELIUM)


def kepler_rhs(Z):
    def f(t, s):
        r3 = math.hypot(s[0], s[1]) ** 3
        return (s[2], s[3], -Z * s[0] / r3, -Z * s[1] / r3)
    return f


def test_envelope_switches_vector_potential_off():
    env = Envelope(he(1.0), 4, 2)
    assert np.allclose(env.vector_potential(env.t_off + 1.0), 0.0)
    assert np.allclose(env.vector_potential(0.3), apot(0.3, he(1.0)))
    # field is minus the derivative of the enveloped potential inside the ramp
    t, h = env.t_flat + 0.37 * (env.t_off - env.t_flat), 1e-5
    fd = -(env.vector_potential(t + h) - env.vector_potential(t - h)) / (2 * h)
    assert np.allclose(fd, env.field(t), atol=1e-9)


@pytest.mark.parametrize("model,vy", [("qs-zero", 0.0), ("na-zero", 0.17)])
def test_free_electron_drift(model, vy):
    lz = he(1.0)
    d = derive(lz, HELIUM)
    launch = LaunchState((d.x_exit_qs, 0.0), (0.0, vy), 0.0, model)
    end = propagate(launch, lz, HELIUM)
    expect = np.array([0.0, lz.epsilon * lz.a0 + vy])
    assert np.max(np.abs(end.velocity - expect)) < 1e-9
    assert np.max(np.abs(final_momentum(launch, lz, HELIUM) - expect)) < 1e-14


def test_kepler_constants_conserved_after_switch_off():
    lz = he(1.0)
    d = derive(lz, HELIUM)
    end = propagate(LaunchState((d.x_exit_qs, 0.0), (0.0, 0.0), 0.0, "qs-coulomb"), lz, HELIUM)
    e0, L0, a0 = kepler_invariants(end.position, end.velocity, 1.0)
    T = lz.period
    sol = solve_ivp(kepler_rhs(1.0), (0, 5 * T), np.r_[end.position, end.velocity], method="DOP853",
                    rtol=1e-13, atol=1e-13, dense_output=True)
    for k in range(1, 6):
        s = sol.sol(k * T)
        e, L, a = kepler_invariants(s[:2], s[2:], 1.0)
        assert abs(e / e0 - 1) < 1e-9 and abs(L / L0 - 1) < 1e-9
        assert np.linalg.norm(a - a0) / np.linalg.norm(a0) < 1e-9


def test_kepler_asymptote_against_long_integration():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 20:
        r = rng.uniform(5, 60)
        phi = rng.uniform(0, 2 * math.pi)
        v = rng.uniform(0.3, 1.5)
        psi = rng.uniform(0, 2 * math.pi)
        pos = r * np.array([math.cos(phi), math.sin(phi)])
        vel = v * np.array([math.cos(psi), math.sin(psi)])
        if 0.5 * v * v - 1 / r <= 0.05:
            continue
        p = kepler_asymptote(pos, vel, 1.0)
        assert np.linalg.norm(p) == pytest.approx(math.sqrt(v * v - 2 / r), rel=1e-12)
        sol = solve_ivp(kepler_rhs(1.0), (0, 3e7), np.r_[pos, vel], method="DOP853", rtol=1e-12, atol=1e-10)
        vf = sol.y[2:, -1]
        assert np.linalg.norm(vf) / np.linalg.norm(p) - 1 == pytest.approx(0, abs=1e-6)
        ang = math.atan2(vf[1], vf[0]) - math.atan2(p[1], p[0])
        assert abs((ang + math.pi) % (2 * math.pi) - math.pi) < 1e-6
        checked += 1


def test_kepler_zero_charge_and_bound_orbit():
    assert np.array_equal(kepler_asymptote((3.0, 1.0), (0.2, -0.1), 0.0), [0.2, -0.1])
    with pytest.raises(BoundOrbit):
        kepler_asymptote((3.0, 0.0), (0.0, 0.3), 1.0)


def test_emission_angle_wrapping():
    assert emission_angle((0.0, 1.0)) == (90.0, 0.0)
    a, off = emission_angle((-1.0, 1.0))
    assert a == pytest.approx(135.0) and off == pytest.approx(45.0)
    _, off = emission_angle((0.0, -1.0))
    assert off == 180.0
    _, off = emission_angle((1.0, -1.0))
    assert off == pytest.approx(-135.0)


def test_offset_invariant_under_frame_rotation():
    lz = he(1.5)
    d = derive(lz, HELIUM)
    theta = 0.7
    c, s = math.cos(theta), math.sin(theta)
    x0 = d.x_exit_qs
    base = propagate(LaunchState((x0, 0.0), (0.0, 0.1), 0.0, "qs-coulomb"), lz, HELIUM)
    rot = propagate(LaunchState((c * x0, s * x0), (-s * 0.1, c * 0.1), 0.0, "qs-coulomb"), lz, HELIUM,
                    rotation=theta)
    p0 = kepler_asymptote(base.position, base.velocity, 1.0)
    p1 = kepler_asymptote(rot.position, rot.velocity, 1.0)
    _, off0 = emission_angle(p0)
    _, off1 = emission_angle(p1, reference_deg=90.0 + math.degrees(theta))
    assert off1 == pytest.approx(off0, abs=1e-7)


def test_core_collision_reported():
    lz = LaserSpec(0.01, W735, 0.0)
    with pytest.raises(CoreCollision):
        propagate(LaunchState((0.5, 0.0), (0.0, 0.0), 0.0, "qs-coulomb"), lz, HELIUM)


def test_wigner_estimate():
    assert wigner_estimate(0.1, HELIUM) == pytest.approx(as_to_au(-10.0))
    assert wigner_estimate(0.1, HELIUM) == pytest.approx(-0.413, abs=1e-3)
    assert all(wigner_estimate(e, HELIUM) < 0 for e in (0.01, 0.05, 0.2, 1.0))


def test_launch_models_and_toggles():
    lz = he(2.0)
    d = derive(lz, HELIUM)
    qs = launch_for_model("qs-coulomb", lz, HELIUM)
    assert qs.position == (d.x_exit_qs, 0.0) and qs.velocity == (0.0, 0.0) and qs.t_start == 0.0
    na = launch_for_model("na-coulomb", lz, HELIUM)
    assert na.position[0] < d.x_exit_qs and na.velocity[1] > 0 and na.t_start > 0
    w = launch_for_model("na-coulomb", lz, HELIUM, toggles=Toggles(wigner=True))
    assert w.t_start == pytest.approx(na.t_start + wigner_estimate(lz.E0, HELIUM))
    no_delay = launch_for_model("na-coulomb", lz, HELIUM, toggles=Toggles(nonadiabatic_delay=False))
    assert no_delay.t_start == 0.0 and no_delay.position == na.position
    with pytest.raises(ValueError):
        launch_for_model("qs-bogus", lz, HELIUM)


def test_coulomb_offsets_positive_and_nonadiabatic_larger_at_gamma2():
    pts = {p.model: p for p in attoclock_curve([2.0], he(1.0), HELIUM)}
    assert pts["qs-zero"].offset_angle == 0.0
    assert pts["qs-coulomb"].offset_angle > 0
    assert pts["na-coulomb"].offset_angle > pts["qs-coulomb"].offset_angle
    assert all(p.status == "ok" for p in pts.values())


def test_zero_charge_atom_has_no_offset():
    atom = AtomSpec(HELIUM.ip, 0.0)
    lz = LaserSpec(1.0, W735, 0.87).with_gamma(1.0, atom)
    pts = attoclock_curve([1.0], lz, atom, models=("qs-coulomb", "qs-zero"))
    assert all(abs(p.offset_angle) < 1e-12 for p in pts)
