"""Translational dynamics, attitude kinematics, wind and reference signals.

The plant is

    xddot = g e3 + R F_a(R^T (xdot - v_w)) / m - (T / m) R e3
    Rdot  = R S(omega)

with thrust ``T`` and body rates ``omega`` as inputs. ``step`` advances
``(x, xdot, I_v)`` with classical RK4 under a zero-order hold on the inputs,
and the attitude exactly as ``R exp(S(omega) dt)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .aero import AeroModel
from .errors import DomainError, NonFiniteState
from .so3 import as_vec3, check_rotation

_ZERO3 = np.zeros(3)


@dataclass(frozen=True, eq=False)
class VehicleParams:
    """Mass (kg), gravity (m/s^2, along +e3) and aerodynamic model.

    ``thrust_limits`` is an optional (T_min, T_max) clamp applied by the
    controller; the default leaves thrust unbounded (and possibly negative).
    """

    m: float
    g: float
    aero: AeroModel
    thrust_limits: tuple = (-math.inf, math.inf)

    def __post_init__(self):
        if not (self.m > 0.0 and math.isfinite(self.m)):
            raise ValueError("mass must be positive")
        if not (self.g > 0.0 and math.isfinite(self.g)):
            raise ValueError("gravity must be positive")
        lo, hi = self.thrust_limits
        if not lo < hi:
            raise ValueError("thrust_limits must satisfy T_min < T_max")

    def packed(self):
        cd0 = self.aero.cd0 if self.aero.has_equivalency else math.nan
        lo, hi = self.thrust_limits
        return np.array([self.m, self.g, cd0, lo, hi])


@dataclass(frozen=True, eq=False)
class VehicleState:
    x: np.ndarray
    xdot: np.ndarray
    R: np.ndarray
    I_v: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "x", as_vec3(self.x, "position"))
        object.__setattr__(self, "xdot", as_vec3(self.xdot, "velocity"))
        object.__setattr__(self, "I_v", as_vec3(self.I_v, "velocity-error integral"))
        object.__setattr__(self, "R", check_rotation(self.R, tol=1e-6))

    def packed(self):
        return np.concatenate([self.x, self.xdot, self.R.reshape(9), self.I_v])

    @classmethod
    def unpack(cls, arr):
        arr = np.asarray(arr, dtype=float)
        return cls(arr[0:3].copy(), arr[3:6].copy(), arr[6:15].reshape(3, 3).copy(),
                   arr[15:18].copy())

    def with_attitude(self, R):
        return replace(self, R=R)


# ------------------------------------------------------------------------ wind


@dataclass(frozen=True, eq=False)
class ConstantWind:
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def packed(self):
        p = np.zeros(8)
        p[0:3] = as_vec3(self.velocity, "wind velocity")
        return 0, p

    def __call__(self, t):
        """(v_w, dv_w/dt, d2v_w/dt2) at time t."""
        return K.wind_eval(*self.packed(), float(t))


@dataclass(frozen=True, eq=False)
class SinusoidalWind:
    """``mean + amplitude * sin(2 pi f t + phase)`` per component."""

    mean: np.ndarray
    amplitude: np.ndarray
    frequency: float
    phase: float = 0.0

    def packed(self):
        p = np.zeros(8)
        p[0:3] = as_vec3(self.mean, "wind mean")
        p[3:6] = as_vec3(self.amplitude, "wind amplitude")
        p[6] = self.frequency
        p[7] = self.phase
        return 1, p

    def __call__(self, t):
        return K.wind_eval(*self.packed(), float(t))


# ------------------------------------------------------------------ references


@dataclass(frozen=True, eq=False)
class ConstantVelocity:
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def packed(self):
        p = np.zeros(8)
        p[0:3] = as_vec3(self.velocity, "reference velocity")
        return 0, p

    def __call__(self, t):
        """Reference velocity, acceleration and jerk at time t."""
        return K.traj_eval(*self.packed(), float(t))


@dataclass(frozen=True, eq=False)
class PolynomialRamp:
    """Velocity moving from ``start`` to ``end`` over ``[t0, t0 + duration]``.

    The blend is the quintic smoothstep, so acceleration and jerk are
    continuous and vanish at both ends of the ramp.
    """

    start: np.ndarray
    end: np.ndarray
    t0: float = 0.0
    duration: float = 1.0

    def packed(self):
        if not self.duration > 0.0:
            raise ValueError("ramp duration must be positive")
        p = np.zeros(8)
        p[0:3] = as_vec3(self.start, "ramp start velocity")
        p[3:6] = as_vec3(self.end, "ramp end velocity")
        p[6] = self.t0
        p[7] = self.duration
        return 1, p

    def __call__(self, t):
        return K.traj_eval(*self.packed(), float(t))


@dataclass(frozen=True, eq=False)
class Circle:
    """Horizontal circle of ``radius`` (m) at angular ``rate`` (rad/s), plus a
    constant vertical velocity ``vz``."""

    radius: float
    rate: float
    phase: float = 0.0
    vz: float = 0.0

    def packed(self):
        p = np.zeros(8)
        p[0:4] = (self.radius, self.rate, self.phase, self.vz)
        return 2, p

    def __call__(self, t):
        return K.traj_eval(*self.packed(), float(t))


# -------------------------------------------------------------------- dynamics


def acceleration(params, state, wind, t, T, bias=None):
    """Inertial acceleration of the centre of mass (m/s^2).

    ``bias`` is an optional unmodelled inertial force (N) added to the plant.
    """
    vw, _, _ = wind(t)
    b = _ZERO3 if bias is None else as_vec3(bias, "bias")
    acc, status = K.acceleration(*params.aero.packed(), params.packed(), state.R, state.xdot, vw,
                                 float(T), b)
    if status == K.ERR_DOMAIN:
        raise DomainError("angle of attack outside the aerodynamic model domain")
    return acc


def step(params, state, wind, trajectory, t, dt, control_output, bias=None):
    """Advance the state by ``dt`` holding ``control_output = (T, omega)``."""
    if not 0.0 < dt <= 0.1:
        raise ValueError("dt must lie in (0, 0.1] s")
    T, omega = control_output
    b = _ZERO3 if bias is None else as_vec3(bias, "bias")
    out, status = K.step(*params.aero.packed(), params.packed(), *wind.packed(),
                         *trajectory.packed(), state.packed(), float(t), float(dt), float(T),
                         as_vec3(omega, "omega"), b)
    if status == K.ERR_NONFINITE:
        raise NonFiniteState(f"state left the finite range at t={t + dt}")
    if status == K.ERR_DOMAIN:
        raise DomainError("angle of attack outside the aerodynamic model domain")
    return VehicleState.unpack(out)


def propagate(params, state, wind, trajectory, t0, dt, thrusts, omegas, bias=None):
    """Apply a whole open-loop input sequence; same arithmetic as repeated :func:`step`."""
    thrusts = np.ascontiguousarray(thrusts, dtype=float)
    omegas = np.ascontiguousarray(np.asarray(omegas, dtype=float).reshape(-1, 3))
    if thrusts.shape[0] != omegas.shape[0]:
        raise ValueError("thrust and omega sequences differ in length")
    b = _ZERO3 if bias is None else as_vec3(bias, "bias")
    out, status, k = K.propagate_open_loop(*params.aero.packed(), params.packed(), *wind.packed(),
                                           *trajectory.packed(), state.packed(), float(t0),
                                           float(dt), thrusts, omegas, b)
    if status == K.ERR_NONFINITE:
        raise NonFiniteState(f"state left the finite range at step {k}")
    if status == K.ERR_DOMAIN:
        raise DomainError("angle of attack outside the aerodynamic model domain")
    return VehicleState(out[0:3], out[3:6], out[6:15].reshape(3, 3), out[15:18])
