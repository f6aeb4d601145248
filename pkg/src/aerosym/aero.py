"""Lift/drag coefficient families for rotationally symmetric bodies.

Three families are supported:

* :class:`SymmetricSin2` -- ``C_D = c0 + 2 c1 sin^2(a)``, ``C_L = c1 sin(2a)``
  (bisymmetric bodies: spheres, ellipsoids, missile-like shapes).
* :class:`TanFamily` -- ``C_D = cb0``, ``C_L = cb1 tan(a)`` below a pre-stall
  bound (annular wings).
* :class:`Tabulated` -- linear interpolation in a table of measured values.

For every family ``C_D(a) + C_L(a) cot(a)`` is either a constant ``C_D0`` or the
model is flagged as not equivalent.  When the constant exists the aerodynamic
force can be traded for an orientation-independent drag
``F_p = -k_a C_D0 |v_a| v_a`` plus a thrust correction
``T_p = T + k_a |v_a|^2 C_L(a)/sin(a)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import ConfigError, DomainError, NotEquivalent, ZeroAirspeed
from .so3 import E3, as_vec3

_EQUIV_TOL = 1e-9


@dataclass(frozen=True)
class SymmetricSin2:
    c0: float
    c1: float

    name = "sin2"

    def cd(self, alpha):
        return self.c0 + 2.0 * self.c1 * np.sin(alpha) ** 2

    def cl(self, alpha):
        return self.c1 * np.sin(2.0 * alpha)

    def lift_over_sine(self, alpha):
        return 2.0 * self.c1 * np.cos(alpha)

    def cd0(self):
        return self.c0 + 2.0 * self.c1

    def validate(self):
        if not (math.isfinite(self.c0) and math.isfinite(self.c1)):
            raise ValueError("sin2 coefficients must be finite")
        # min of C_D over alpha is c0 (c1 >= 0) or c0 + 2 c1 (c1 < 0)
        if min(self.c0, self.c0 + 2.0 * self.c1) < 0.0:
            raise ValueError("sin2 coefficients give a negative drag coefficient")

    def _pack(self):
        return K.FAM_SIN2, np.array([self.c0, self.c1, 0.0, 0.0])

    def params(self):
        return {"c0": self.c0, "c1": self.c1}


@dataclass(frozen=True)
class TanFamily:
    """Pre-stall model; valid for ``0 <= alpha < alpha_max < pi/2``."""

    c0bar: float
    c1bar: float
    alpha_max: float = math.pi / 2

    name = "tan"

    def _check(self, alpha):
        a = np.asarray(alpha, dtype=float)
        if np.any(a < 0.0) or np.any(a >= self.alpha_max):
            raise DomainError(f"angle of attack outside [0, {self.alpha_max}) for the tan family")
        return a

    def cd(self, alpha):
        a = self._check(alpha)
        return self.c0bar + 0.0 * a

    def cl(self, alpha):
        return self.c1bar * np.tan(self._check(alpha))

    def lift_over_sine(self, alpha):
        return self.c1bar / np.cos(self._check(alpha))

    def cd0(self):
        return self.c0bar + self.c1bar

    def validate(self):
        if not 0.0 < self.alpha_max <= math.pi / 2:
            raise ValueError("alpha_max must lie in (0, pi/2]")
        if self.c0bar < 0.0:
            raise ValueError("tan-family drag coefficient must be non-negative")

    def _pack(self):
        return K.FAM_TAN, np.array([self.c0bar, self.c1bar, self.alpha_max, 0.0])

    def params(self):
        return {"c0bar": self.c0bar, "c1bar": self.c1bar,
                "alpha_max_deg": math.degrees(self.alpha_max)}


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Coefficients sampled on an increasing angle-of-attack grid (rad).

    ``lift_over_sine`` must be given explicitly unless the lift column is
    identically zero; it is never obtained by dividing ``cl`` by ``sin``.
    Queries outside the grid raise :class:`DomainError`.
    """

    alpha: np.ndarray
    cd_table: np.ndarray
    cl_table: np.ndarray
    los_table: np.ndarray | None = None

    name = "tabulated"

    def __post_init__(self):
        for attr in ("alpha", "cd_table", "cl_table"):
            object.__setattr__(self, attr, np.asarray(getattr(self, attr), dtype=float))
        if self.los_table is not None:
            object.__setattr__(self, "los_table", np.asarray(self.los_table, dtype=float))
        elif np.all(self.cl_table == 0.0):
            object.__setattr__(self, "los_table", np.zeros_like(self.cl_table))

    def _interp(self, table, alpha):
        a = np.asarray(alpha, dtype=float)
        if np.any(a < self.alpha[0] - 1e-12) or np.any(a > self.alpha[-1] + 1e-12):
            raise DomainError("angle of attack outside the tabulated range")
        return np.interp(a, self.alpha, table)

    def cd(self, alpha):
        return self._interp(self.cd_table, alpha)

    def cl(self, alpha):
        return self._interp(self.cl_table, alpha)

    def lift_over_sine(self, alpha):
        if self.los_table is None:
            raise NotEquivalent("tabulated model has no lift_over_sine column")
        return self._interp(self.los_table, alpha)

    def cd0(self):
        if self.los_table is None:
            raise NotEquivalent("tabulated model has no lift_over_sine column")
        grid = self.alpha[np.sin(self.alpha) > 1e-6]
        if grid.size == 0:
            raise NotEquivalent("tabulated grid has no point off the symmetry axis")
        defect, cd0 = equivalency_defect(self, grid)
        if defect >= _EQUIV_TOL:
            raise NotEquivalent(f"C_D + C_L cot(alpha) varies by {defect:.3e} over the table")
        return cd0

    def validate(self):
        n = self.alpha.size
        if n < 2 or self.cd_table.shape != (n,) or self.cl_table.shape != (n,):
            raise ValueError("tabulated model needs matching columns with at least 2 rows")
        if self.los_table is not None and self.los_table.shape != (n,):
            raise ValueError("lift_over_sine column length mismatch")
        if np.any(np.diff(self.alpha) <= 0.0):
            raise ValueError("tabulated alpha grid must be strictly increasing")
        if self.alpha[0] < 0.0 or self.alpha[-1] > math.pi:
            raise ValueError("tabulated alpha grid must lie in [0, pi]")
        if np.any(self.cd_table < 0.0):
            raise ValueError("tabulated drag coefficients must be non-negative")

    def _pack(self):
        return K.FAM_TAB, np.zeros(4)

    def _tables(self):
        los = self.los_table if self.los_table is not None else np.full_like(self.alpha, np.nan)
        return self.alpha, self.cd_table, self.cl_table, los

    def params(self):
        out = {"alpha_deg": np.degrees(self.alpha).tolist(), "cd": self.cd_table.tolist(),
               "cl": self.cl_table.tolist()}
        if self.los_table is not None:
            out["lift_over_sine"] = self.los_table.tolist()
        return out


_EMPTY = np.zeros(1)


@dataclass(frozen=True, eq=False)
class AeroModel:
    """Coefficient family plus ``k_a = rho * Sigma / 2`` (kg/m).

    ``source`` records the Reynolds and Mach numbers of the data the
    coefficients came from; it is metadata only.
    """

    k_a: float
    family: SymmetricSin2 | TanFamily | Tabulated
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.k_a) and self.k_a >= 0.0):
            raise ValueError("k_a must be finite and non-negative")
        self.family.validate()

    def cd(self, alpha):
        return self.family.cd(alpha)

    def cl(self, alpha):
        return self.family.cl(alpha)

    def lift_over_sine(self, alpha):
        return self.family.lift_over_sine(alpha)

    @property
    def cd0(self):
        """Equivalent drag coefficient; raises NotEquivalent if it does not exist."""
        return float(self.family.cd0())

    @property
    def has_equivalency(self):
        try:
            self.family.cd0()
        except NotEquivalent:
            return False
        return True

    def packed(self):
        """Arguments expected by the compiled kernels (fam, ka, prm, 4 tables)."""
        fam, prm = self.family._pack()
        if isinstance(self.family, Tabulated):
            tabs = self.family._tables()
        else:
            tabs = (_EMPTY, _EMPTY, _EMPTY, _EMPTY)
        return (fam, float(self.k_a), prm) + tuple(tabs)


def sphere(k_a, cd):
    """Pure-drag body: zero lift and constant drag coefficient."""
    return AeroModel(k_a, SymmetricSin2(cd, 0.0))


@dataclass(frozen=True)
class AirState:
    v_a: np.ndarray
    alpha: float
    beta: float
    speed: float

    def reconstruct(self):
        """Airspeed rebuilt from (speed, alpha, beta)."""
        s, a, b = self.speed, self.alpha, self.beta
        return np.array([s * math.sin(a) * math.cos(b), s * math.sin(a) * math.sin(b),
                         -s * math.cos(a)])


@dataclass(frozen=True)
class AeroForces:
    F_L: np.ndarray
    F_D: np.ndarray

    @property
    def F_a(self):
        return self.F_L + self.F_D


@dataclass(frozen=True)
class EquivalentActuation:
    F_p: np.ndarray
    T_p: float
    C_D0: float


def angles_from_airspeed(v_a):
    """Angle of attack in [0, pi] and sideslip azimuth in (-pi, pi].

    On the symmetry axis (sin(alpha) < 1e-9) beta is undefined and returned as 0.
    """
    v_a = as_vec3(v_a, "airspeed")
    speed, alpha, beta = K.angles(v_a)
    if speed < K.ZERO_SPEED:
        raise ZeroAirspeed("angles are undefined at zero airspeed")
    return alpha, beta


def air_state(v_a):
    v_a = as_vec3(v_a, "airspeed")
    alpha, beta = angles_from_airspeed(v_a)
    return AirState(v_a=v_a, alpha=alpha, beta=beta, speed=float(np.linalg.norm(v_a)))


def aero_force(model, v_a):
    """Body-frame lift and drag for body-frame airspeed ``v_a``.

    Drag is ``-k_a |v_a| C_D v_a`` and lift ``k_a |v_a| C_L r(beta) x v_a`` with
    ``r(beta) = (-sin beta, cos beta, 0)``. Both are exactly zero at zero airspeed.
    """
    v_a = as_vec3(v_a, "airspeed")
    F_L, F_D, status = K.aero_force(*model.packed(), v_a)
    if status == K.ERR_DOMAIN:
        raise DomainError("angle of attack outside the model domain")
    return AeroForces(F_L=F_L, F_D=F_D)


def combined_force(model, v_a):
    """Aerodynamic force from the singularity-free form.

    ``F_a = -k_a |v_a| [(C_D + L cos a) v_a + L |v_a| e3]`` with ``L = C_L / sin a``.
    """
    v_a = as_vec3(v_a, "airspeed")
    s = float(np.linalg.norm(v_a))
    if s < K.ZERO_SPEED:
        return np.zeros(3)
    alpha, _ = angles_from_airspeed(v_a)
    L = float(model.lift_over_sine(alpha))
    cd = float(model.cd(alpha))
    return -model.k_a * s * ((cd + L * math.cos(alpha)) * v_a + L * s * E3)


def equivalency_defect(model, alpha_grid):
    """Spread of ``C_D + C_L cot(alpha)`` over a grid.

    Returns ``(defect, C_D0)`` where ``C_D0`` is the median of the sampled
    values and ``defect`` the largest deviation from it. A zero defect means
    the model is exactly equivalent to a sphere.
    """
    family = getattr(model, "family", model)
    a = np.asarray(alpha_grid, dtype=float)
    if a.size == 0:
        raise ValueError("empty angle grid")
    if np.any(np.abs(np.sin(a)) < 1e-6):
        raise ValueError("angle grid must avoid sin(alpha) = 0")
    vals = family.cd(a) + family.cl(a) / np.tan(a)
    cd0 = float(np.median(vals))
    return float(np.max(np.abs(vals - cd0))), cd0


def equivalent_actuation(model, v_a_inertial, alpha, T, speed):
    """Equivalent drag ``F_p`` (inertial) and thrust ``T_p`` for an equivalent model."""
    cd0 = model.cd0
    v = as_vec3(v_a_inertial, "airspeed")
    F_p = -model.k_a * cd0 * float(np.linalg.norm(v)) * v
    if speed == 0.0:
        return EquivalentActuation(F_p=F_p, T_p=float(T), C_D0=cd0)
    L = float(model.lift_over_sine(alpha))
    return EquivalentActuation(F_p=F_p, T_p=float(T) + model.k_a * speed * speed * L, C_D0=cd0)


# ------------------------------------------------------------------ model cards


def to_card(model, residuals=None):
    fam = model.family
    card = {"family": fam.name, "k_a": model.k_a, "params": fam.params(),
            "cd0": model.cd0 if model.has_equivalency else None,
            "source": {"re": model.source.get("re"), "mach": model.source.get("mach")}}
    card["residuals"] = dict(residuals) if residuals else {}
    return card


def from_card(card):
    """Build an :class:`AeroModel` from a model-card mapping."""
    try:
        family = card["family"]
        k_a = float(card.get("k_a", 1.0))
        p = card["params"]
        if family == "sin2":
            fam = SymmetricSin2(float(p["c0"]), float(p["c1"]))
        elif family == "tan":
            amax = math.radians(float(p["alpha_max_deg"])) if "alpha_max_deg" in p else math.pi / 2
            fam = TanFamily(float(p["c0bar"]), float(p["c1bar"]), amax)
        elif family == "tabulated":
            los = p.get("lift_over_sine")
            fam = Tabulated(np.radians(p["alpha_deg"]), p["cd"], p["cl"], los)
        else:
            raise ConfigError(f"unknown aero family {family!r}")
        src = card.get("source") or {}
        return AeroModel(k_a, fam, {"re": src.get("re"), "mach": src.get("mach")})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model card: {exc}") from exc


def load_card(path):
    path = Path(path)
    try:
        card = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model card {path}: {exc}") from exc
    return from_card(card)


def save_card(model, path, residuals=None):
    Path(path).write_text(json.dumps(to_card(model, residuals), indent=2) + "\n")
