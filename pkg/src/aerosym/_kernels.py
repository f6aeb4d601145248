"""Compiled numerical core shared by the public modules.

Vectors are float 3-tuples and rotations row-major 9-tuples inside the hot
path, so numba keeps them off the heap. Public entry points take and return
numpy arrays; the wrappers in ``aero``, ``dynamics`` and ``control`` pack
their dataclasses into the layouts below and turn status codes into
exceptions.

Packed layouts
--------------
aero:   fam (int), ka, prm[4], tab_a, tab_cd, tab_cl, tab_los
        sin2 -> prm = (c0, c1, 0, 0); tan -> prm = (cb0, cb1, alpha_max, 0)
veh:    (m, g, cd0, t_min, t_max)
wind:   wcode, wprm[8] = (mean3, amp3, freq_hz, phase_rad)
traj:   rcode, rprm[8]
        0 constant velocity: (v3, ...)
        1 polynomial ramp:   (v0_3, v1_3, t0, duration)
        2 circle:            (radius, rate, phase, vz, ...)
gains:  (k1, k2, k3, eta, integral, yaw_code, k_yaw, heading_ref)
state:  x[0:3], xdot[3:6], R[6:15] row-major, I_v[15:18]
"""

import math

import numpy as np
from numba import njit

FAM_SIN2 = 0
FAM_TAN = 1
FAM_TAB = 2

OK = 0
ERR_DOMAIN = 1
ERR_FP_DEGENERATE = 2
ERR_CONE = 3
ERR_NONFINITE = 4

SMALL_ANGLE = 1e-8
AXIS_SIN = 1e-9
ZERO_SPEED = 1e-12
CONE_EPS = 1e-9
FP_DELTA_REL = 1e-6

# t, x(3), v(3), R(9), alpha, beta, T, w(3), |vtilde|, theta_tilde, V, |f_p|
N_LOG_COLS = 26

jit = njit(cache=True)

ZERO = (0.0, 0.0, 0.0)

# ------------------------------------------------------------- tuple algebra


@jit
def add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


@jit
def sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


@jit
def scale(s, a):
    return (s * a[0], s * a[1], s * a[2])


@jit
def axpy(s, a, b):
    return (s * a[0] + b[0], s * a[1] + b[1], s * a[2] + b[2])


@jit
def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@jit
def norm(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


@jit
def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


@jit
def mv(R, x):
    return (R[0] * x[0] + R[1] * x[1] + R[2] * x[2],
            R[3] * x[0] + R[4] * x[1] + R[5] * x[2],
            R[6] * x[0] + R[7] * x[1] + R[8] * x[2])


@jit
def mtv(R, x):
    return (R[0] * x[0] + R[3] * x[1] + R[6] * x[2],
            R[1] * x[0] + R[4] * x[1] + R[7] * x[2],
            R[2] * x[0] + R[5] * x[1] + R[8] * x[2])


@jit
def mm(A, B):
    return (A[0] * B[0] + A[1] * B[3] + A[2] * B[6],
            A[0] * B[1] + A[1] * B[4] + A[2] * B[7],
            A[0] * B[2] + A[1] * B[5] + A[2] * B[8],
            A[3] * B[0] + A[4] * B[3] + A[5] * B[6],
            A[3] * B[1] + A[4] * B[4] + A[5] * B[7],
            A[3] * B[2] + A[4] * B[5] + A[5] * B[8],
            A[6] * B[0] + A[7] * B[3] + A[8] * B[6],
            A[6] * B[1] + A[7] * B[4] + A[8] * B[7],
            A[6] * B[2] + A[7] * B[5] + A[8] * B[8])


@jit
def expm(w):
    """Rodrigues formula; second-order series below |w| = 1e-8."""
    th2 = dot(w, w)
    th = math.sqrt(th2)
    if th < SMALL_ANGLE:
        a = 1.0 - th2 / 6.0
        b = 0.5 - th2 / 24.0
    else:
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
    x, y, z = w
    # I + a S + b S^2 with S^2 = w w^T - |w|^2 I
    return (1.0 + b * (x * x - th2), b * x * y - a * z, b * x * z + a * y,
            b * x * y + a * z, 1.0 + b * (y * y - th2), b * y * z - a * x,
            b * x * z - a * y, b * y * z + a * x, 1.0 + b * (z * z - th2))


@jit
def v3(arr, i):
    return (arr[i], arr[i + 1], arr[i + 2])


@jit
def r9(arr, i):
    return (arr[i], arr[i + 1], arr[i + 2], arr[i + 3], arr[i + 4], arr[i + 5], arr[i + 6],
            arr[i + 7], arr[i + 8])


# ---------------------------------------------------------------- aerodynamics


@jit
def coefficients(fam, prm, tab_a, tab_cd, tab_cl, tab_los, alpha):
    """Return (C_D, C_L, lift_over_sine, status). lift_over_sine is NaN if unknown."""
    if fam == FAM_SIN2:
        c0 = prm[0]
        c1 = prm[1]
        s = math.sin(alpha)
        return c0 + 2.0 * c1 * s * s, c1 * math.sin(2.0 * alpha), 2.0 * c1 * math.cos(alpha), OK
    if fam == FAM_TAN:
        if alpha < 0.0 or alpha >= prm[2]:
            return math.nan, math.nan, math.nan, ERR_DOMAIN
        return prm[0], prm[1] * math.tan(alpha), prm[1] / math.cos(alpha), OK
    n = tab_a.shape[0]
    if alpha < tab_a[0] - 1e-12 or alpha > tab_a[n - 1] + 1e-12:
        return math.nan, math.nan, math.nan, ERR_DOMAIN
    a = min(max(alpha, tab_a[0]), tab_a[n - 1])
    return np.interp(a, tab_a, tab_cd), np.interp(a, tab_a, tab_cl), \
        np.interp(a, tab_a, tab_los), OK


@jit
def angles(va):
    """(speed, alpha, beta). alpha/beta are NaN at zero airspeed."""
    s = norm(va)
    if s < ZERO_SPEED:
        return s, math.nan, math.nan
    c = min(1.0, max(-1.0, -va[2] / s))
    alpha = math.acos(c)
    if math.sin(alpha) < AXIS_SIN:
        beta = 0.0
    else:
        beta = math.atan2(va[1], va[0])
        if beta == -math.pi:
            beta = math.pi
    return s, alpha, beta


@jit
def force_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, va):
    """Body-frame (F_L, F_D, status)."""
    s, alpha, beta = angles(va)
    if s < ZERO_SPEED:
        return ZERO, ZERO, OK
    cd, cl, los, st = coefficients(fam, prm, tab_a, tab_cd, tab_cl, tab_los, alpha)
    if st != OK:
        return ZERO, ZERO, st
    F_D = scale(-ka * s * cd, va)
    if math.sin(alpha) < AXIS_SIN and not math.isnan(los):
        # C_L r x v_a = -L (cos(a) v_a + |v_a| e3), regular on the axis
        F_L = scale(-ka * s * los * math.cos(alpha), va)
        F_L = (F_L[0], F_L[1], F_L[2] - ka * s * los * s)
    else:
        r = (-math.sin(beta), math.cos(beta), 0.0)
        F_L = scale(ka * s * cl, cross(r, va))
    return F_L, F_D, OK


@jit
def aero_force(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, va):
    F_L, F_D, st = force_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, v3(va, 0))
    return np.array(F_L), np.array(F_D), st


# ------------------------------------------------------------ wind / reference


@jit
def wind_t(wcode, wprm, t):
    """Wind velocity and its first two derivatives (inertial)."""
    if wcode == 0:
        return v3(wprm, 0), ZERO, ZERO
    om = 2.0 * math.pi * wprm[6]
    ph = om * t + wprm[7]
    sn = math.sin(ph)
    cs = math.cos(ph)
    amp = v3(wprm, 3)
    return axpy(sn, amp, v3(wprm, 0)), scale(om * cs, amp), scale(-om * om * sn, amp)


@jit
def _smoothstep5(tau):
    if tau <= 0.0:
        return 0.0, 0.0, 0.0
    if tau >= 1.0:
        return 1.0, 0.0, 0.0
    t2 = tau * tau
    s = t2 * tau * (10.0 - 15.0 * tau + 6.0 * t2)
    ds = 30.0 * t2 * (1.0 - tau) * (1.0 - tau)
    dds = 60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau)
    return s, ds, dds


@jit
def traj_t(rcode, rprm, t):
    """Reference velocity, acceleration and jerk (inertial)."""
    if rcode == 0:
        return v3(rprm, 0), ZERO, ZERO
    if rcode == 1:
        dur = rprm[7]
        s, ds, dds = _smoothstep5((t - rprm[6]) / dur)
        v0 = v3(rprm, 0)
        dv = sub(v3(rprm, 3), v0)
        return axpy(s, dv, v0), scale(ds / dur, dv), scale(dds / (dur * dur), dv)
    rad = rprm[0]
    om = rprm[1]
    ph = om * t + rprm[2]
    sn = math.sin(ph)
    cs = math.cos(ph)
    return ((-rad * om * sn, rad * om * cs, rprm[3]),
            (-rad * om * om * cs, -rad * om * om * sn, 0.0),
            (rad * om * om * om * sn, -rad * om * om * om * cs, 0.0))


@jit
def wind_eval(wcode, wprm, t):
    a, b, c = wind_t(wcode, wprm, t)
    return np.array(a), np.array(b), np.array(c)


@jit
def traj_eval(rcode, rprm, t):
    a, b, c = traj_t(rcode, rprm, t)
    return np.array(a), np.array(b), np.array(c)


# -------------------------------------------------------------------- dynamics


@jit
def accel_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, R, xdot, vw, T, bias):
    F_L, F_D, st = force_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, mtv(R, sub(xdot, vw)))
    Fa = mv(R, add(F_L, F_D))
    im = 1.0 / veh[0]
    return ((Fa[0] - T * R[2] + bias[0]) * im,
            (Fa[1] - T * R[5] + bias[1]) * im,
            (Fa[2] - T * R[8] + bias[2]) * im + veh[1]), st


@jit
def acceleration(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, R, xdot, vw, T, bias):
    a, st = accel_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, r9(R.ravel(), 0),
                    v3(xdot, 0), v3(vw, 0), T, v3(bias, 0))
    return np.array(a), st


@jit
def step_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, wcode, wprm, rcode, rprm,
           x, v, R0, I, t, dt, T, omega, bias):
    """One RK4 step of (x, xdot, I_v); attitude follows R0 exp(S(omega) tau) exactly."""
    if omega[0] == 0.0 and omega[1] == 0.0 and omega[2] == 0.0:
        Rh = R0
        R1 = R0
    else:
        Rh = mm(R0, expm(scale(0.5 * dt, omega)))
        R1 = mm(R0, expm(scale(dt, omega)))
    h2 = 0.5 * dt
    w0, _, _ = wind_t(wcode, wprm, t)
    wh, _, _ = wind_t(wcode, wprm, t + h2)
    w1, _, _ = wind_t(wcode, wprm, t + dt)
    r0, _, _ = traj_t(rcode, rprm, t)
    rh, _, _ = traj_t(rcode, rprm, t + h2)
    r1, _, _ = traj_t(rcode, rprm, t + dt)
    a1, s1 = accel_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, R0, v, w0, T, bias)
    v2 = axpy(h2, a1, v)
    a2, s2 = accel_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, Rh, v2, wh, T, bias)
    v3_ = axpy(h2, a2, v)
    a3, s3 = accel_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, Rh, v3_, wh, T, bias)
    v4 = axpy(dt, a3, v)
    a4, s4 = accel_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, R1, v4, w1, T, bias)
    w = dt / 6.0
    xn = (x[0] + w * (v[0] + 2.0 * v2[0] + 2.0 * v3_[0] + v4[0]),
          x[1] + w * (v[1] + 2.0 * v2[1] + 2.0 * v3_[1] + v4[1]),
          x[2] + w * (v[2] + 2.0 * v2[2] + 2.0 * v3_[2] + v4[2]))
    vn = (v[0] + w * (a1[0] + 2.0 * a2[0] + 2.0 * a3[0] + a4[0]),
          v[1] + w * (a1[1] + 2.0 * a2[1] + 2.0 * a3[1] + a4[1]),
          v[2] + w * (a1[2] + 2.0 * a2[2] + 2.0 * a3[2] + a4[2]))
    # I_v' = xdot - xdot_r evaluated at the RK4 stage velocities
    In = (I[0] + w * ((v[0] - r0[0]) + 2.0 * (v2[0] - rh[0]) + 2.0 * (v3_[0] - rh[0])
                      + (v4[0] - r1[0])),
          I[1] + w * ((v[1] - r0[1]) + 2.0 * (v2[1] - rh[1]) + 2.0 * (v3_[1] - rh[1])
                      + (v4[1] - r1[1])),
          I[2] + w * ((v[2] - r0[2]) + 2.0 * (v2[2] - rh[2]) + 2.0 * (v3_[2] - rh[2])
                      + (v4[2] - r1[2])))
    st = max(max(s1, s2), max(s3, s4))
    fin = True
    for q in (xn, vn, In):
        for i in range(3):
            if not math.isfinite(q[i]):
                fin = False
    for i in range(9):
        if not math.isfinite(R1[i]):
            fin = False
    if not fin:
        st = ERR_NONFINITE
    return xn, vn, R1, In, st


@jit
def _store(out, x, v, R, I):
    for i in range(3):
        out[i] = x[i]
        out[3 + i] = v[i]
        out[15 + i] = I[i]
    for i in range(9):
        out[6 + i] = R[i]


@jit
def step(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, wcode, wprm, rcode, rprm,
         state, t, dt, T, omega, bias):
    xn, vn, Rn, In, st = step_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, wcode, wprm,
                                rcode, rprm, v3(state, 0), v3(state, 3), r9(state, 6),
                                v3(state, 15), t, dt, T, v3(omega, 0), v3(bias, 0))
    out = np.empty(18)
    _store(out, xn, vn, Rn, In)
    return out, st


@jit
def propagate_open_loop(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, wcode, wprm, rcode,
                        rprm, state0, t0, dt, thrusts, omegas, bias):
    """Apply a precomputed input sequence; returns (final state, status, steps done)."""
    x = v3(state0, 0)
    v = v3(state0, 3)
    R = r9(state0, 6)
    I = v3(state0, 15)
    b = v3(bias, 0)
    out = np.empty(18)
    for k in range(thrusts.shape[0]):
        t = t0 + k * dt
        x, v, R, I, st = step_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, wcode, wprm,
                                rcode, rprm, x, v, R, I, t, dt, thrusts[k], v3(omegas[k], 0), b)
        if st != OK:
            _store(out, x, v, R, I)
            return out, st, k
    _store(out, x, v, R, I)
    return out, OK, thrusts.shape[0]


# --------------------------------------------------------------------- control


@jit
def h_sat(s, eta):
    """h(s) = eta / sqrt(1 + s) and its derivative in s."""
    q = 1.0 + s
    return eta / math.sqrt(q), -0.5 * eta / (q * math.sqrt(q))


@jit
def yaw_t(gains, R):
    if gains[5] == 0.0 or gains[6] == 0.0:
        return 0.0
    err = math.atan2(R[3], R[0]) - gains[7]
    err = math.atan2(math.sin(err), math.cos(err))
    return -gains[6] * err


@jit
def yaw_rate(gains, R):
    return yaw_t(gains, r9(R.ravel(), 0))


@jit
def control_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, gains, wcode, wprm, rcode, rprm,
              v, R, I, t):
    """Thrust and body rates. Returns (T, omega, f_p, f_a, fdot_p, status)."""
    m = veh[0]
    g = veh[1]
    cd0 = veh[2]
    k1 = gains[0]
    k2 = gains[1]
    k3 = gains[2]
    vw, dvw, _ = wind_t(wcode, wprm, t)
    vr, ar, jr = traj_t(rcode, rprm, t)
    xa = sub(v, vw)
    sp = norm(xa)
    F_L, F_D, st = force_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, mtv(R, xa))
    Fa = mv(R, add(F_L, F_D))
    base = scale(-m, ar)
    hI = ZERO
    h = 0.0
    dh = 0.0
    integral = gains[4] != 0.0
    if integral:
        h, dh = h_sat(dot(I, I), gains[3])
        hI = scale(h, I)
        base = add(base, hI)
    base = (base[0], base[1], base[2] + m * g)
    f_p = axpy(-ka * cd0 * sp, xa, base)
    f_a = add(Fa, base)
    if st != OK:
        return math.nan, ZERO, f_p, f_a, ZERO, st
    nfp = norm(f_p)
    if not nfp > FP_DELTA_REL * m * g:
        return math.nan, ZERO, f_p, f_a, ZERO, ERR_FP_DEGENERATE
    fa_b = mtv(R, f_a)
    fp_b = mtv(R, f_p)
    ve = sub(v, vr)
    vt = mtv(R, ve)
    # thrust first: it does not depend on fdot_p
    T = fa_b[2] + k1 * nfp * vt[2]
    T = min(max(T, veh[3]), veh[4])
    acc, st = accel_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, R, v, vw, T, ZERO)
    if st != OK:
        return T, ZERO, f_p, f_a, ZERO, st
    xa_dd = sub(acc, dvw)
    if sp < 1e-9:
        fdot = scale(-ka * cd0 * sp, xa_dd)
    else:
        fdot = scale(-ka * cd0, axpy(dot(xa, xa_dd) / sp, xa, scale(sp, xa_dd)))
    fdot = axpy(-m, jr, fdot)
    if integral:
        fdot = add(fdot, axpy(2.0 * dh * dot(I, ve), I, scale(h, ve)))
    den = nfp + fp_b[2]
    if den <= CONE_EPS * nfp:
        return T, ZERO, f_p, f_a, fdot, ERR_CONE
    den2 = den * den
    # feed-forward keeps the body-frame direction of f_p fixed: f_p x R^T fdot_p / |f_p|^2
    ff = cross(fp_b, mtv(R, fdot))
    n2 = nfp * nfp
    om = (-k2 * nfp * vt[1] - k3 * nfp * fp_b[1] / den2 + ff[0] / n2,
          k2 * nfp * vt[0] + k3 * nfp * fp_b[0] / den2 + ff[1] / n2,
          yaw_t(gains, R))
    return T, om, f_p, f_a, fdot, OK


@jit
def control(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, gains, wcode, wprm, rcode, rprm,
            state, t):
    T, om, f_p, f_a, fdot, st = control_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh,
                                          gains, wcode, wprm, rcode, rprm, v3(state, 3),
                                          r9(state, 6), v3(state, 15), t)
    return T, np.array(om), np.array(f_p), np.array(f_a), np.array(fdot), st


@jit
def lyap_t(veh, gains, v, R, f_p, vr):
    """(V, Vdot_predicted, theta_tilde, |f_p|, |vtilde|)."""
    m = veh[0]
    k1 = gains[0]
    k2 = gains[1]
    k3 = gains[2]
    vt = mtv(R, sub(v, vr))
    nfp = norm(f_p)
    c = min(1.0, max(-1.0, mtv(R, f_p)[2] / nfp))
    th = math.acos(c)
    nv2 = dot(vt, vt)
    V = 0.5 * nv2 + (1.0 - math.cos(th)) / (k2 * m)
    tn = math.tan(0.5 * th)
    Vdot = -(k1 * nfp * vt[2] * vt[2] + (k3 / k2) * tn * tn) / m
    return V, Vdot, th, nfp, math.sqrt(nv2)


@jit
def lyapunov(veh, gains, state, f_p, vr):
    return lyap_t(veh, gains, v3(state, 3), r9(state, 6), v3(f_p, 0), v3(vr, 0))


@jit
def run_closed_loop(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, gains, wcode, wprm, rcode,
                    rprm, state0, dt, n_steps, bias, max_rot):
    """Closed-loop simulation on the grid t_k = k dt.

    Returns (log, n_rows, status, final_state). With max_rot > 0 a step whose
    commanded rotation |omega| dt exceeds max_rot is split into sub-steps, each
    with a freshly evaluated control; the logged row holds the grid-time control.
    """
    log = np.full((n_steps + 1, N_LOG_COLS), math.nan)
    x = v3(state0, 0)
    v = v3(state0, 3)
    R = r9(state0, 6)
    I = v3(state0, 15)
    b = v3(bias, 0)
    final = np.empty(18)
    for k in range(n_steps + 1):
        t = k * dt
        T, om, f_p, f_a, fdot, st = control_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh,
                                              gains, wcode, wprm, rcode, rprm, v, R, I, t)
        vw, _, _ = wind_t(wcode, wprm, t)
        vr, _, _ = traj_t(rcode, rprm, t)
        _, alpha, beta = angles(mtv(R, sub(v, vw)))
        row = log[k]
        row[0] = t
        for i in range(3):
            row[1 + i] = x[i]
            row[4 + i] = v[i]
            row[19 + i] = om[i]
        for i in range(9):
            row[7 + i] = R[i]
        row[16] = alpha
        row[17] = beta
        row[18] = T
        row[25] = norm(f_p)
        if st == ERR_FP_DEGENERATE or st == ERR_DOMAIN:
            row[22] = norm(mtv(R, sub(v, vr)))
            _store(final, x, v, R, I)
            return log, k + 1, st, final
        V, Vdot, th, nfp, nvt = lyap_t(veh, gains, v, R, f_p, vr)
        row[22] = nvt
        row[23] = th
        row[24] = V
        if st != OK or k == n_steps:
            _store(final, x, v, R, I)
            return log, k + 1, st, final
        if max_rot > 0.0 and norm(om) * dt > max_rot:
            tau = 0.0
            T_s = T
            om_s = om
            while True:
                h = dt - tau
                last = True
                wn = norm(om_s)
                if wn * h > max_rot:
                    h = max_rot / wn
                    last = False
                x, v, R, I, st = step_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, wcode,
                                        wprm, rcode, rprm, x, v, R, I, t + tau, h, T_s, om_s, b)
                if st != OK:
                    _store(final, x, v, R, I)
                    return log, k + 1, st, final
                tau += h
                if last:
                    break
                T_s, om_s, _, _, _, st = control_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los,
                                                   veh, gains, wcode, wprm, rcode, rprm, v, R, I,
                                                   t + tau)
                if st != OK:
                    _store(final, x, v, R, I)
                    return log, k + 1, st, final
        else:
            x, v, R, I, st = step_t(fam, ka, prm, tab_a, tab_cd, tab_cl, tab_los, veh, wcode, wprm,
                                    rcode, rprm, x, v, R, I, t, dt, T, om, b)
            if st != OK:
                _store(final, x, v, R, I)
                return log, k + 1, st, final
    _store(final, x, v, R, I)
    return log, n_steps + 1, OK, final
