import math

import numpy as np
import pytest

from aerosym.aero import air_state, equivalent_actuation, sphere
from aerosym.dynamics import (Circle, ConstantVelocity, ConstantWind, PolynomialRamp,
                              SinusoidalWind, VehicleParams, VehicleState, acceleration,
                              propagate, step)
from aerosym.errors import NonFiniteState
from aerosym.so3 import E3, exp_so3

from conftest import G, random_rotation

STILL = ConstantWind()
HOLD = ConstantVelocity()


def at_rest(R=None, v=(0.0, 0.0, 0.0)):
    return VehicleState(np.zeros(3), np.array(v, dtype=float), np.eye(3) if R is None else R)


def test_params_validation(elliptic):
    with pytest.raises(ValueError):
        VehicleParams(0.0, G, elliptic)
    with pytest.raises(ValueError):
        VehicleParams(1.0, G, elliptic, thrust_limits=(5.0, 1.0))


def test_state_rejects_bad_rotation():
    with pytest.raises(ValueError):
        VehicleState(np.zeros(3), np.zeros(3), np.eye(3) * 2)


def test_hover_and_free_fall(drone):
    np.testing.assert_array_equal(acceleration(drone, at_rest(), STILL, 0.0, drone.m * G),
                                  np.zeros(3))
    np.testing.assert_array_equal(acceleration(drone, at_rest(), STILL, 0.0, 0.0), G * E3)


def test_equivalent_form(drone, rng):
    # m g e3 + F_a - T R e3 == m g e3 + F_p - T_p R e3, checked through acceleration()
    m, aero = drone.m, drone.aero
    for _ in range(500):
        R = random_rotation(rng)
        xdot = rng.normal(size=3) * 10
        vw = rng.normal(size=3) * 3
        T = rng.uniform(-5, 30)
        acc = acceleration(drone, at_rest(R, xdot), ConstantWind(vw), 0.0, T)
        xa = xdot - vw
        s = air_state(R.T @ xa)
        eq = equivalent_actuation(aero, xa, s.alpha, T, s.speed)
        ref = G * E3 + (eq.F_p - eq.T_p * R[:, 2]) / m
        np.testing.assert_allclose(acc, ref, rtol=1e-9, atol=1e-9 * np.linalg.norm(ref))


def test_bias_adds_force(drone):
    b = np.array([0.1, -0.2, 0.3])
    a0 = acceleration(drone, at_rest(), STILL, 0.0, 1.0)
    a1 = acceleration(drone, at_rest(), STILL, 0.0, 1.0, bias=b)
    np.testing.assert_allclose(a1 - a0, b / drone.m, atol=1e-15)


def test_zero_rate_keeps_attitude_bitwise(drone, rng):
    R = random_rotation(rng)
    s = VehicleState(np.zeros(3), np.array([1.0, 2.0, 0.0]), R)
    out = step(drone, s, STILL, HOLD, 0.0, 1e-3, (3.0, np.zeros(3)))
    assert np.array_equal(out.R, R)


def test_attitude_exact_exponential(drone, rng):
    R = random_rotation(rng)
    w = np.array([0.4, -1.0, 2.0])
    out = step(drone, at_rest(R), STILL, HOLD, 0.0, 0.01, (0.0, w))
    np.testing.assert_allclose(out.R, R @ exp_so3(w * 0.01), atol=1e-15)


def test_ballistic_vacuum():
    params = VehicleParams(1.0, G, sphere(0.0, 0.0))
    x0, v0 = np.array([1.0, -2.0, 3.0]), np.array([4.0, 0.5, -10.0])
    s = VehicleState(x0, v0, np.eye(3))
    dt, n = 0.01, 300
    for k in range(n):
        s = step(params, s, STILL, HOLD, k * dt, dt, (0.0, np.zeros(3)))
    t = n * dt
    np.testing.assert_allclose(s.x, x0 + v0 * t + 0.5 * G * t * t * E3, rtol=0, atol=1e-12 * 1e3)
    np.testing.assert_allclose(s.xdot, v0 + G * t * E3, atol=1e-12 * 100)


def test_terminal_velocity():
    params = VehicleParams(1.0, G, sphere(0.1, 1.0))
    dt = 1e-3
    n = int(20.0 / dt)
    s = propagate(params, at_rest(), STILL, HOLD, 0.0, dt, np.zeros(n), np.zeros((n, 3)))
    assert s.xdot[2] == pytest.approx(math.sqrt(98.1), rel=1e-3)
    assert abs(s.xdot[0]) + abs(s.xdot[1]) == 0.0


def test_drag_dissipates_energy(drone, rng):
    dt = 1e-3
    s = VehicleState(np.zeros(3), rng.normal(size=3) * 10, random_rotation(rng))
    w = rng.normal(size=3)
    # remove gravity so drag is the only force
    params = VehicleParams(drone.m, 1e-300, drone.aero)
    e_prev = 0.5 * s.xdot @ s.xdot
    for k in range(2000):
        s = step(params, s, STILL, HOLD, k * dt, dt, (0.0, w))
        e = 0.5 * s.xdot @ s.xdot
        assert e <= e_prev + 1e-9 * dt
        e_prev = e


def test_integral_state_tracks_velocity_error(drone):
    ref = ConstantVelocity(np.array([1.0, 0.0, 0.0]))
    s = VehicleState(np.zeros(3), np.array([3.0, 0.0, 0.0]), np.eye(3))
    params = VehicleParams(drone.m, 1e-300, sphere(0.0, 0.0))
    out = step(params, s, STILL, ref, 0.0, 0.01, (0.0, np.zeros(3)))
    np.testing.assert_allclose(out.I_v, [0.02, 0.0, 0.0], atol=1e-15)


def test_step_rejects_bad_dt(drone):
    with pytest.raises(ValueError):
        step(drone, at_rest(), STILL, HOLD, 0.0, 0.2, (0.0, np.zeros(3)))
    with pytest.raises(ValueError):
        step(drone, at_rest(), STILL, HOLD, 0.0, 0.0, (0.0, np.zeros(3)))


def test_nonfinite_state_raises(drone):
    with pytest.raises(NonFiniteState):
        step(drone, at_rest(), STILL, HOLD, 0.0, 1e-3, (1e308, np.zeros(3)))


def test_propagate_matches_step(drone, rng):
    dt, n = 2e-3, 200
    T = rng.uniform(0, 15, n)
    W = rng.normal(size=(n, 3))
    wind = SinusoidalWind([1.0, 0.0, 0.0], [0.5, 0.2, 0.1], 0.3, 0.2)
    s0 = VehicleState(np.zeros(3), np.array([1.0, 2.0, -1.0]), random_rotation(rng))
    s = s0
    for k in range(n):
        s = step(drone, s, wind, HOLD, k * dt, dt, (T[k], W[k]))
    p = propagate(drone, s0, wind, HOLD, 0.0, dt, T, W)
    assert np.array_equal(s.packed(), p.packed())


def _fd_check(signal, t, h):
    v0, d0, dd0 = signal(t)
    vp, dp, _ = signal(t + h)
    vm, dm, _ = signal(t - h)
    return (np.abs((vp - vm) / (2 * h) - d0).max(), np.abs((dp - dm) / (2 * h) - dd0).max())


@pytest.mark.parametrize("signal", [
    SinusoidalWind([1.0, 0.0, -0.5], [0.8, 0.3, 0.2], 0.7, 0.4),
    PolynomialRamp([0.0, 0.0, 0.0], [2.0, -1.0, 0.5], t0=0.5, duration=2.0),
    Circle(radius=3.0, rate=0.8, phase=0.1, vz=-0.2),
    ConstantVelocity([1.0, 2.0, 3.0]),
    ConstantWind([1.0, 0.0, 0.0]),
])
@pytest.mark.parametrize("t", [0.3, 1.4, 2.2])
def test_signal_derivatives_second_order(signal, t):
    e1 = _fd_check(signal, t, 1e-2)
    e2 = _fd_check(signal, t, 5e-3)
    for a, b in zip(e1, e2):
        assert b <= a / 3.5 + 1e-9


def test_ramp_endpoints():
    ramp = PolynomialRamp([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], t0=1.0, duration=2.0)
    v, a, j = ramp(0.5)
    np.testing.assert_array_equal(v, np.zeros(3))
    v, a, j = ramp(3.5)
    np.testing.assert_array_equal(v, [2.0, 0.0, 0.0])
    np.testing.assert_array_equal(a, np.zeros(3))
    np.testing.assert_allclose(ramp(2.0)[0], [1.0, 0.0, 0.0])
