"""Least-squares identification of coefficient families from sampled data.

Samples are rows ``(alpha_rad, C_D, C_L)``. On disk they live in CSV files with
header ``alpha_deg,cd,cl`` (angles in degrees, as read off published plots).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, SingularFit

_COND_MAX = 1e12


@dataclass(frozen=True)
class FitResult:
    c0: float
    c1: float
    cd_rms: float
    cl_rms: float

    @property
    def residuals(self):
        return {"cd_rms": self.cd_rms, "cl_rms": self.cl_rms}


def _unpack(samples, weights):
    s = np.asarray(samples, dtype=float)
    if s.ndim != 2 or s.shape[1] != 3:
        raise ValueError("samples must be rows of (alpha, C_D, C_L)")
    if not np.all(np.isfinite(s)):
        raise ValueError("samples must be finite")
    w = np.ones(len(s)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(s),) or np.any(w <= 0.0):
        raise ValueError("weights must be positive, one per sample")
    return s[:, 0], s[:, 1], s[:, 2], w


def _rms(r, w):
    return float(np.sqrt(np.sum(w * r * r) / np.sum(w)))


def fit_sin2_family(samples, weights=None):
    """Fit ``C_D = c0 + 2 c1 sin^2 a`` and ``C_L = c1 sin 2a`` jointly.

    Both residual blocks share ``c1``; the 2x2 weighted normal equations are
    solved directly.
    """
    a, cd, cl, w = _unpack(samples, weights)
    if np.unique(a).size < 2:
        raise SingularFit("need samples at two or more distinct angles")
    s2 = 2.0 * np.sin(a) ** 2
    sn = np.sin(2.0 * a)
    # stacked design: [1, 2 sin^2 a] for drag rows, [0, sin 2a] for lift rows
    N = np.array([[np.sum(w), np.sum(w * s2)],
                  [np.sum(w * s2), np.sum(w * (s2 * s2 + sn * sn))]])
    b = np.array([np.sum(w * cd), np.sum(w * (s2 * cd + sn * cl))])
    if not np.linalg.cond(N) < _COND_MAX:
        raise SingularFit(f"normal matrix is ill-conditioned (cond={np.linalg.cond(N):.3e})")
    c0, c1 = np.linalg.solve(N, b)
    return FitResult(float(c0), float(c1), _rms(cd - c0 - c1 * s2, w), _rms(cl - c1 * sn, w))


def fit_tan_family(samples, alpha_max, weights=None):
    """Fit ``C_D = c0bar`` and ``C_L = c1bar tan a`` on pre-stall data."""
    if not 0.0 < alpha_max < math.pi / 2:
        raise ValueError("alpha_max must lie in (0, pi/2)")
    a, cd, cl, w = _unpack(samples, weights)
    if np.any(a >= alpha_max) or np.any(a < 0.0):
        raise DomainError(f"all sample angles must lie in [0, {alpha_max})")
    tn = np.tan(a)
    den = np.sum(w * tn * tn)
    if den == 0.0:
        raise SingularFit("lift slope is unidentifiable: every sample is at alpha = 0")
    c0 = np.sum(w * cd) / np.sum(w)
    c1 = np.sum(w * tn * cl) / den
    return FitResult(float(c0), float(c1), _rms(cd - c0, w), _rms(cl - c1 * tn, w))


def read_samples_csv(path):
    """Load ``alpha_deg,cd,cl`` rows; returns an (n, 3) array with alpha in radians."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != [
                    "alpha_deg", "cd", "cl"]:
                raise ConfigError(f"{path}: header must be alpha_deg,cd,cl")
            rows = [(math.radians(float(r["alpha_deg"])), float(r["cd"]), float(r["cl"]))
                    for r in reader]
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read samples from {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"{path}: no samples")
    return np.array(rows)


def write_samples_csv(path, samples):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha_deg", "cd", "cl"])
        for a, cd, cl in np.asarray(samples, dtype=float):
            w.writerow([repr(math.degrees(a)), repr(float(cd)), repr(float(cl))])


def synthesize(family, alpha):
    """Exact samples of a coefficient family on the given angles."""
    a = np.asarray(alpha, dtype=float)
    return np.column_stack([a, family.cd(a) + 0.0 * a, family.cl(a)])
