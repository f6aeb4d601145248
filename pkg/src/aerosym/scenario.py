"""Scenario files, closed-loop runs, batch execution and run logs.

A scenario is a JSON object whose field names carry their units::

    {
      "name": "hover",
      "vehicle": {"mass_kg": 1.0, "gravity_mps2": 9.81},
      "aero": {"family": "sin2", "k_a": 0.05, "params": {"c0": 0.43, "c1": 0.462}},
      "wind": {"type": "constant", "velocity_mps": [0, 0, 0]},
      "trajectory": {"type": "constant_velocity", "velocity_mps": [0, 0, 0]},
      "gains": {"k1": 0.1, "k2": 0.05, "k3": 2.0, "eta_N": 1.0, "integral": false},
      "initial_state": {"position_m": [0, 0, 0], "velocity_mps": [0, 0, 0],
                        "rotvec_deg": [0, 0, 0]},
      "dt_s": 0.001,
      "duration_s": 5.0
    }

``aero`` may instead be ``{"card": "path/to/card.json"}`` (resolved relative to
the scenario file).
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .aero import from_card, load_card
from .control import ControllerGains
from .dynamics import (Circle, ConstantVelocity, ConstantWind, PolynomialRamp, SinusoidalWind,
                       VehicleParams, VehicleState)
from .errors import AerosymError, ConfigError
from .so3 import exp_so3

log = logging.getLogger(__name__)

CSV_COLUMNS = ("t_s", "x1", "x2", "x3", "v1", "v2", "v3",
               "r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33",
               "alpha_rad", "beta_rad", "T_N", "w1", "w2", "w3",
               "vtilde_norm", "theta_tilde_rad", "V", "fp_norm")

SETTLE_THRESHOLD = 1e-3
V_INCREASE_TOL = 1e-6

STATUS_OK = "ok"
_STATUS = {K.OK: STATUS_OK, K.ERR_FP_DEGENERATE: "fp_degenerate",
           K.ERR_CONE: "thrust_cone_singularity", K.ERR_NONFINITE: "numerical_divergence",
           K.ERR_DOMAIN: "aero_domain_error"}


@dataclass(frozen=True, eq=False)
class Scenario:
    vehicle: VehicleParams
    wind: object
    trajectory: object
    gains: ControllerGains
    initial_state: VehicleState
    dt: float
    duration: float
    bias: np.ndarray = field(default_factory=lambda: np.zeros(3))
    seed: int = 0
    name: str = "scenario"
    max_rotation_per_step: float | None = None

    def __post_init__(self):
        if not 0.0 < self.dt <= 0.1:
            raise ConfigError("dt_s must lie in (0, 0.1]")
        if not self.duration > 0.0:
            raise ConfigError("duration_s must be positive")
        if not self.vehicle.aero.has_equivalency:
            raise ConfigError("aerodynamic model has no constant C_D0; the controller needs one")
        if self.max_rotation_per_step is not None and not self.max_rotation_per_step > 0.0:
            raise ConfigError("max_rotation_per_step_rad must be positive")

    @property
    def n_steps(self):
        return int(math.floor(self.duration / self.dt + 1e-9))

    def with_initial_state(self, state, name=None):
        return Scenario(self.vehicle, self.wind, self.trajectory, self.gains, state, self.dt,
                        self.duration, self.bias, self.seed, name or self.name,
                        self.max_rotation_per_step)


@dataclass(eq=False)
class RunLog:
    name: str
    status: str
    records: np.ndarray
    summary: dict
    message: str = ""

    @property
    def ok(self):
        return self.status == STATUS_OK

    def column(self, name):
        return self.records[:, CSV_COLUMNS.index(name)]

    def csv_text(self):
        lines = [",".join(CSV_COLUMNS)]
        for row in self.records:
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, out_dir, csv=True):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {}
        if csv:
            paths["csv"] = out / f"{self.name}.csv"
            paths["csv"].write_text(self.csv_text())
            paths["plot"] = out / f"{self.name}.gp"
            paths["plot"].write_text(gnuplot_script(paths["csv"].name))
        paths["summary"] = out / f"{self.name}.summary.json"
        doc = {"name": self.name, "status": self.status, "message": self.message,
               "summary": self.summary}
        paths["summary"].write_text(json.dumps(doc, indent=2) + "\n")
        return paths


# --------------------------------------------------------------------- parsing


def _vec(d, key, default=None):
    v = d.get(key, default)
    if v is None:
        raise ConfigError(f"missing field {key!r}")
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key!r} must be a list of 3 numbers") from exc
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{key!r} must be a list of 3 finite numbers")
    return arr


def _num(d, key, default=None):
    v = d.get(key, default)
    if v is None:
        raise ConfigError(f"missing field {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key!r} must be a finite number")
    return float(v)


def _wind(d):
    kind = d.get("type", "constant")
    if kind == "constant":
        return ConstantWind(_vec(d, "velocity_mps", [0, 0, 0]))
    if kind == "sinusoidal":
        return SinusoidalWind(_vec(d, "mean_mps", [0, 0, 0]), _vec(d, "amplitude_mps"),
                              _num(d, "frequency_hz"), math.radians(_num(d, "phase_deg", 0.0)))
    raise ConfigError(f"unknown wind type {kind!r}")


def _trajectory(d):
    kind = d.get("type", "constant_velocity")
    if kind == "constant_velocity":
        return ConstantVelocity(_vec(d, "velocity_mps", [0, 0, 0]))
    if kind == "polynomial_ramp":
        dur = _num(d, "ramp_duration_s")
        if dur <= 0.0:
            raise ConfigError("ramp_duration_s must be positive")
        return PolynomialRamp(_vec(d, "start_velocity_mps"), _vec(d, "end_velocity_mps"),
                              _num(d, "start_time_s", 0.0), dur)
    if kind == "circle":
        return Circle(_num(d, "radius_m"), math.radians(_num(d, "rate_degps")),
                      math.radians(_num(d, "phase_deg", 0.0)), _num(d, "vertical_velocity_mps", 0.0))
    raise ConfigError(f"unknown trajectory type {kind!r}")


def _attitude(d):
    if "rotation_matrix" in d:
        R = np.asarray(d["rotation_matrix"], dtype=float)
        if R.shape != (3, 3):
            raise ConfigError("rotation_matrix must be 3x3")
        return R
    return exp_so3(np.radians(_vec(d, "rotvec_deg", [0, 0, 0])))


def scenario_from_dict(doc, base_dir=None):
    """Validate a scenario mapping and build a :class:`Scenario`."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object")
    try:
        veh = doc.get("vehicle", {})
        m = _num(veh, "mass_kg")
        g = _num(veh, "gravity_mps2", 9.81)
        aero_doc = doc.get("aero")
        if aero_doc is None:
            raise ConfigError("missing field 'aero'")
        if "card" in aero_doc:
            path = Path(aero_doc["card"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            aero = load_card(path)
        else:
            aero = from_card(aero_doc)
        limits = veh.get("thrust_limits_N")
        limits = (-math.inf, math.inf) if limits is None else tuple(float(x) for x in limits)
        vehicle = VehicleParams(m, g, aero, limits)

        gd = doc.get("gains", {})
        default = ControllerGains.default(m, g)
        yaw = gd.get("yaw", {})
        gains = ControllerGains(
            k1=_num(gd, "k1", default.k1), k2=_num(gd, "k2", default.k2),
            k3=_num(gd, "k3", default.k3), eta=_num(gd, "eta_N", 0.2 * m * g),
            integral_enabled=bool(gd.get("integral", False)),
            yaw_policy=yaw.get("policy", "zero"), k_yaw=_num(yaw, "k_yaw_per_s", 0.0),
            heading_ref=math.radians(_num(yaw, "heading_deg", 0.0)))

        ic = doc.get("initial_state", {})
        state = VehicleState(_vec(ic, "position_m", [0, 0, 0]), _vec(ic, "velocity_mps", [0, 0, 0]),
                             _attitude(ic), _vec(ic, "integral_m", [0, 0, 0]))
        max_rot = doc.get("max_rotation_per_step_rad")
        return Scenario(
            vehicle=vehicle, wind=_wind(doc.get("wind", {})),
            trajectory=_trajectory(doc.get("trajectory", {})), gains=gains, initial_state=state,
            dt=_num(doc, "dt_s", 1e-3), duration=_num(doc, "duration_s"),
            bias=_vec(doc, "bias_N", [0, 0, 0]), seed=int(doc.get("seed", 0)),
            name=str(doc.get("name", "scenario")),
            max_rotation_per_step=None if max_rot is None else float(max_rot))
    except ConfigError:
        raise
    except (AerosymError, ValueError, TypeError, AttributeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    doc.setdefault("name", path.stem)
    return scenario_from_dict(doc, base_dir=path.parent)


# --------------------------------------------------------------------- running


def summarize(records, k2, m, dt):
    """Metrics over a run log (see module docs for definitions)."""
    vt = records[:, CSV_COLUMNS.index("vtilde_norm")]
    th = records[:, CSV_COLUMNS.index("theta_tilde_rad")]
    V = records[:, CSV_COLUMNS.index("V")]
    t = records[:, 0]
    above = np.nonzero(~(vt < SETTLE_THRESHOLD))[0]
    if above.size == 0:
        settle_idx = 0
    elif above[-1] + 1 < len(vt):
        settle_idx = int(above[-1] + 1)
    else:
        settle_idx = None
    dV = np.diff(V)
    summary = {
        "settling_time_s": None if settle_idx is None else float(t[settle_idx]),
        "rms_error_after_settling": (None if settle_idx is None
                                     else float(np.sqrt(np.mean(vt[settle_idx:] ** 2)))),
        "max_theta_tilde_rad": float(np.nanmax(th)) if np.any(np.isfinite(th)) else None,
        "v_monotonicity_violations": int(np.sum(dV > V_INCREASE_TOL)),
        "max_v_increase": float(np.nanmax(dV)) if dV.size and np.any(np.isfinite(dV)) else 0.0,
        "final_vtilde_norm": float(vt[-1]),
        "final_theta_tilde_rad": float(th[-1]),
        "n_records": int(len(records)),
        "k2": k2, "mass_kg": m, "dt_s": dt,
    }
    return summary


def run_scenario(scenario):
    """Simulate one scenario on the grid ``t_k = k dt``.

    Controller failures (``FpDegenerate``, ``ThrustConeSingularity``) and
    non-finite states end the run early with a flagged status.
    """
    sc = scenario
    v = sc.vehicle
    max_rot = 0.0 if sc.max_rotation_per_step is None else sc.max_rotation_per_step
    records, n, status, _ = K.run_closed_loop(
        *v.aero.packed(), v.packed(), sc.gains.packed(), *sc.wind.packed(),
        *sc.trajectory.packed(), sc.initial_state.packed(), float(sc.dt), sc.n_steps,
        np.asarray(sc.bias, dtype=float), float(max_rot))
    records = records[:n]
    name = _STATUS[status]
    msg = "" if status == K.OK else f"{name} at t={records[-1, 0]:.6g} s"
    if status != K.OK:
        log.warning("scenario %s stopped: %s", sc.name, msg)
    return RunLog(sc.name, name, records, summarize(records, sc.gains.k2, v.m, sc.dt), msg)


def _run_one(item):
    try:
        if isinstance(item, Scenario):
            sc = item
        elif isinstance(item, (str, Path)):
            sc = load_scenario(item)
        else:
            sc = scenario_from_dict(item)
    except ConfigError as exc:
        name = item.get("name", "scenario") if isinstance(item, dict) else str(item)
        return RunLog(str(name), "config_error", np.empty((0, len(CSV_COLUMNS))), {}, str(exc))
    return run_scenario(sc)


def run_batch(scenarios, parallelism=1):
    """Run independent scenarios; results come back in input order.

    Items may be :class:`Scenario` objects, scenario mappings or paths.
    Invalid items yield a ``config_error`` log instead of aborting the batch.
    """
    if int(parallelism) < 1:
        raise ValueError("parallelism must be a positive integer")
    items = list(scenarios)
    if parallelism == 1 or len(items) <= 1:
        return [_run_one(it) for it in items]
    with ProcessPoolExecutor(max_workers=int(parallelism)) as pool:
        return list(pool.map(_run_one, items))


# ---------------------------------------------------------------------- sweeps


def _align(u):
    """A rotation whose third column is the unit vector ``u``."""
    e3 = np.array([0.0, 0.0, 1.0])
    axis = np.cross(e3, u)
    s = np.linalg.norm(axis)
    c = float(np.clip(u[2], -1.0, 1.0))
    if s < 1e-12:
        return np.eye(3) if c > 0 else exp_so3([math.pi, 0.0, 0.0])
    return exp_so3(axis / s * math.atan2(s, c))


def sample_initial_states(scenario, n, theta_max, vtilde_max=5.0, seed=0):
    """Random initial states with ``|vtilde(0)| <= vtilde_max`` and attitude
    error ``theta(0) <= theta_max`` (rad) relative to ``f_p(0)``."""
    rng = np.random.default_rng(seed)
    v = scenario.vehicle
    vw, _, _ = scenario.wind(0.0)
    vr, ar, _ = scenario.trajectory(0.0)
    cd0 = v.aero.cd0
    states = []
    for _ in range(n):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        vel = vr + d * vtilde_max * rng.uniform()
        xa = vel - vw
        f_p = v.m * v.g * np.array([0.0, 0.0, 1.0]) - v.aero.k_a * cd0 * np.linalg.norm(xa) * xa \
            - v.m * ar
        u = f_p / np.linalg.norm(f_p)
        theta = theta_max * rng.uniform()
        perp = np.cross(u, rng.normal(size=3))
        perp /= np.linalg.norm(perp)
        k = math.cos(theta) * u + math.sin(theta) * perp
        R = _align(k) @ exp_so3([0.0, 0.0, rng.uniform(-math.pi, math.pi)])
        states.append(VehicleState(scenario.initial_state.x, vel, R))
    return states


def converged(runlog, v_tol=1e-3, theta_tol=0.01):
    s = runlog.summary
    return (runlog.ok and s["final_vtilde_norm"] < v_tol
            and s["final_theta_tilde_rad"] < theta_tol)


def sweep(scenario, n, theta_max, seed=0, vtilde_max=5.0, parallelism=1):
    """Monte-Carlo attraction study; returns (fraction converged, logs)."""
    states = sample_initial_states(scenario, n, theta_max, vtilde_max, seed)
    runs = [scenario.with_initial_state(s, f"{scenario.name}_ic{i:04d}")
            for i, s in enumerate(states)]
    logs = run_batch(runs, parallelism)
    return sum(converged(r) for r in logs) / n, logs


def gnuplot_script(csv_name):
    return f"""# gnuplot script for {csv_name}
set datafile separator ','
set key autotitle columnhead
set multiplot layout 2,2
set xlabel 't [s]'
plot '{csv_name}' using 't_s':'vtilde_norm' with lines
plot '{csv_name}' using 't_s':'theta_tilde_rad' with lines
plot '{csv_name}' using 't_s':'V' with lines
plot '{csv_name}' using 't_s':'T_N' with lines
unset multiplot
"""
