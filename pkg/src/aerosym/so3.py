"""3D vector and rotation helpers.

Attitude is a 3x3 rotation matrix whose columns are the body axes (i, j, k)
expressed in the inertial frame, so ``R @ x_body`` gives inertial coordinates.
The inertial third axis points down (gravity is ``+g e3``).
"""

import numpy as np

from . import _kernels as K

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def as_vec3(x, name="vector"):
    """Coerce to a finite float64 array of shape (3,)."""
    v = np.asarray(x, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite, got {v}")
    return v


def skew(x):
    """Matrix S(x) such that S(x) @ y == cross(x, y)."""
    x1, x2, x3 = as_vec3(x)
    return np.array([[0.0, -x3, x2], [x3, 0.0, -x1], [-x2, x1, 0.0]])


def rotate(R, x):
    """Inertial coordinates of the body vector ``x``."""
    return np.asarray(R, dtype=float) @ as_vec3(x)


def exp_so3(w):
    """Rotation matrix exp(S(w)) via Rodrigues' formula.

    Below |w| = 1e-8 the sin/cos ratios are replaced by their second-order
    series to avoid 0/0.
    """
    return np.array(K.expm(tuple(as_vec3(w, "rotation vector")))).reshape(3, 3)


def rotation_error(R):
    """(||R^T R - I||_F, |det R - 1|)."""
    R = np.asarray(R, dtype=float)
    return float(np.linalg.norm(R.T @ R - np.eye(3))), float(abs(np.linalg.det(R) - 1.0))


def check_rotation(R, tol=1e-9):
    """Return R as an array, raising ValueError if it is not in SO(3)."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise ValueError("rotation must be a finite 3x3 matrix")
    orth, det = rotation_error(R)
    if orth > tol or det > tol:
        raise ValueError(f"matrix is not a rotation (orthogonality {orth:.2e}, det error {det:.2e})")
    return R


def heading(R):
    """Yaw of the body i axis in the inertial horizontal plane (rad)."""
    R = np.asarray(R, dtype=float)
    return float(np.arctan2(R[1, 0], R[0, 0]))
