"""Velocity controller built on the equivalent (spherical) drag model.

The controller aligns the thrust axis ``k`` with

    f_p = m g e3 - k_a C_D0 |xdot_a| xdot_a - m xddot_r  [+ h(|I_v|^2) I_v]

which does not depend on the attitude, and regulates the thrust intensity with
the true aerodynamic force in ``f_a``. Per cycle the thrust is computed first,
then the plant acceleration under that thrust, then ``fdot_p``, then the body
rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import DomainError, FpDegenerate, NotEquivalent, ThrustConeSingularity

YAW_ZERO = 0
YAW_HEADING = 1


@dataclass(frozen=True)
class ControllerGains:
    """Positive gains k1, k2, k3, integral bound ``eta`` (N) and yaw policy.

    ``yaw_policy`` is ``"zero"`` (omega_3 = 0) or ``"heading"`` which returns
    ``-k_yaw * wrap(heading - heading_ref)``.
    """

    k1: float
    k2: float
    k3: float
    eta: float = 1.0
    integral_enabled: bool = False
    yaw_policy: str = "zero"
    k_yaw: float = 0.0
    heading_ref: float = 0.0

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "eta"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite")
        if self.yaw_policy not in ("zero", "heading"):
            raise ValueError(f"unknown yaw policy {self.yaw_policy!r}")

    @classmethod
    def default(cls, m, g, **kw):
        """Desk-scale defaults: k1 = k2 = 0.5/(m g), k3 = 2 (non-normative)."""
        base = dict(k1=0.5 / (m * g), k2=0.5 / (m * g), k3=2.0)
        base.update(kw)
        return cls(**base)

    def packed(self):
        code = YAW_HEADING if self.yaw_policy == "heading" else YAW_ZERO
        return np.array([self.k1, self.k2, self.k3, self.eta, float(self.integral_enabled),
                         float(code), self.k_yaw, self.heading_ref])


@dataclass(frozen=True, eq=False)
class ControlOutput:
    T: float
    omega: np.ndarray

    def __iter__(self):
        return iter((self.T, self.omega))


@dataclass(frozen=True)
class LyapunovSample:
    V: float
    Vdot_predicted: float
    theta_tilde: float
    f_p_norm: float


def h_saturation(s, eta):
    """``h(s) = eta / sqrt(1 + s)`` and ``dh/ds``.

    ``h(|I|^2) I`` is then bounded by ``eta`` in norm, with slope in ``(0, eta]``.
    """
    if s < 0.0:
        raise ValueError("h is defined on s >= 0")
    return K.h_sat(float(s), float(eta))


def yaw_policy(state, gains):
    return K.yaw_rate(gains.packed(), state.R)


def _args(gains, params, wind, trajectory):
    if not params.aero.has_equivalency:
        raise NotEquivalent("velocity control needs an aerodynamic model with constant C_D0")
    return (*params.aero.packed(), params.packed(), gains.packed(), *wind.packed(),
            *trajectory.packed())


def _raise(status):
    if status == K.ERR_FP_DEGENERATE:
        raise FpDegenerate("|f_p| is below the guard value 1e-6 m g")
    if status == K.ERR_CONE:
        raise ThrustConeSingularity("thrust axis is opposite to f_p")
    if status == K.ERR_DOMAIN:
        raise DomainError("angle of attack outside the aerodynamic model domain")


def compute_fp_fa(params, state, wind, trajectory, t, gains=None):
    """``(f_a, f_p, fdot_p)`` in inertial coordinates.

    ``gains`` selects the integral variant and supplies the thrust used for
    ``fdot_p``; without it the integral term is off and the default gains are
    used.
    """
    if gains is None:
        gains = ControllerGains.default(params.m, params.g)
    T, omega, f_p, f_a, fdot, status = K.control(*_args(gains, params, wind, trajectory),
                                                 state.packed(), float(t))
    if status in (K.ERR_FP_DEGENERATE, K.ERR_DOMAIN):
        _raise(status)
    return f_a, f_p, fdot


def velocity_control(gains, params, state, wind, trajectory, t):
    """Thrust intensity and body angular velocity for the current state."""
    T, omega, _, _, _, status = K.control(*_args(gains, params, wind, trajectory),
                                          state.packed(), float(t))
    _raise(status)
    return ControlOutput(T=float(T), omega=omega)


def lyapunov_sample(gains, params, state, trajectory, wind, t):
    """Lyapunov value and its predicted rate.

    ``V = |vtilde|^2 / 2 + (1 - cos theta) / (k2 m)`` and, along closed-loop
    trajectories without integral action,
    ``Vdot = -(k1 |f_p| vtilde_3^2 + (k3/k2) tan^2(theta/2)) / m``.
    The integral term is not part of ``V``.
    """
    _, f_p, _ = compute_fp_fa(params, state, wind, trajectory, t, gains)
    vr, _, _ = trajectory(t)
    V, Vdot, th, nfp, _ = K.lyapunov(params.packed(), gains.packed(), state.packed(), f_p, vr)
    return LyapunovSample(V=V, Vdot_predicted=Vdot, theta_tilde=th, f_p_norm=nfp)


def lyapunov_value(vtilde_norm, theta_tilde, k2, m):
    """V from logged |vtilde| and theta (used to audit run logs)."""
    return 0.5 * vtilde_norm * vtilde_norm + (1.0 - np.cos(theta_tilde)) / (k2 * m)
