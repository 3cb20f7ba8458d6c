"""Reference frames (task parameters): validation, transforms and sampling.

A frame is a rigid transform ``y = A x + b`` with ``A`` in SO(p), p in {2, 3}.
Orientations are parameterised by a single planar angle for p = 2 and by
intrinsic Z-Y-X Euler angles (yaw, pitch, roll) for p = 3, i.e.
``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, FrameValidityError, NumericError

ROTATION_TOL = 1e-9

TIME_BASED = "time"
TRAJECTORY_BASED = "trajectory"
MODES = (TIME_BASED, TRAJECTORY_BASED)


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def check_rotation(rotation, tol=ROTATION_TOL):
    """Raise FrameValidityError unless ``rotation`` is a proper 2x2/3x3 rotation."""
    R = np.asarray(rotation, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] not in (2, 3):
        raise FrameValidityError(f"rotation must be 2x2 or 3x3, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise FrameValidityError("rotation has non-finite entries")
    err = np.max(np.abs(R.T @ R - np.eye(R.shape[0])))
    if err > tol:
        raise FrameValidityError(f"rotation not orthonormal (max |R^T R - I| = {err:.3g})")
    det = np.linalg.det(R)
    if abs(det - 1.0) > tol:
        raise FrameValidityError(f"rotation determinant is {det:.12g}, expected +1")


@dataclass(frozen=True, eq=False)
class Frame:
    """One task parameter: orientation ``rotation`` and origin ``translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = _readonly(self.rotation)
        b = _readonly(self.translation).reshape(-1)
        check_rotation(R)
        if b.shape != (R.shape[0],):
            raise DimensionError(f"translation has length {b.size}, rotation is {R.shape}")
        if not np.all(np.isfinite(b)):
            raise FrameValidityError("translation has non-finite entries")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", b)

    @property
    def dim(self) -> int:
        return self.rotation.shape[0]

    @classmethod
    def identity(cls, p: int) -> "Frame":
        return cls(np.eye(p), np.zeros(p))

    @classmethod
    def from_euler(cls, angles, translation) -> "Frame":
        return cls(euler_to_rotation(angles), translation)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return (np.array_equal(self.rotation, other.rotation)
                and np.array_equal(self.translation, other.translation))

    def __hash__(self):
        return hash((self.rotation.tobytes(), self.translation.tobytes()))

    def __repr__(self):
        return f"Frame(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


@dataclass(frozen=True, eq=False)
class FrameLimits:
    """Closed sampling box for one frame: Euler angles (rad) and translation."""

    euler_min: np.ndarray
    euler_max: np.ndarray
    trans_min: np.ndarray
    trans_max: np.ndarray

    def __post_init__(self):
        for name in ("euler_min", "euler_max", "trans_min", "trans_max"):
            object.__setattr__(self, name, _readonly(getattr(self, name)).reshape(-1))
        p = self.trans_min.size
        if p not in (2, 3):
            raise DimensionError(f"translation limits must have length 2 or 3, got {p}")
        n_ang = 1 if p == 2 else 3
        if self.trans_max.size != p or self.euler_min.size != n_ang or self.euler_max.size != n_ang:
            raise DimensionError("inconsistent limit lengths")
        if np.any(self.euler_min > self.euler_max) or np.any(self.trans_min > self.trans_max):
            raise ValueError("limit minimum exceeds maximum")

    @property
    def dim(self) -> int:
        return self.trans_min.size

    def contains(self, frame: Frame, tol=1e-12) -> bool:
        ang = rotation_to_euler(frame.rotation)
        b = frame.translation
        return bool(np.all(ang >= self.euler_min - tol) and np.all(ang <= self.euler_max + tol)
                    and np.all(b >= self.trans_min - tol) and np.all(b <= self.trans_max + tol))


@dataclass(frozen=True, eq=False)
class AugmentedFrame:
    """Frame lifted to the joint (input, output) space of a mixture model."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(self.matrix))
        object.__setattr__(self, "offset", _readonly(self.offset).reshape(-1))


def _rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_rotation(angles) -> np.ndarray:
    """Rotation matrix from one planar angle (p=2) or (yaw, pitch, roll) (p=3)."""
    a = np.atleast_1d(np.asarray(angles, dtype=float))
    if a.ndim != 1 or a.size not in (1, 3):
        raise DimensionError(f"expected 1 (planar) or 3 (yaw, pitch, roll) angles, got {a.size}")
    if a.size == 1:
        c, s = np.cos(a[0]), np.sin(a[0])
        return np.array([[c, -s], [s, c]])
    return _rot_z(a[0]) @ _rot_y(a[1]) @ _rot_x(a[2])


def rotation_to_euler(rotation) -> np.ndarray:
    """Inverse of :func:`euler_to_rotation`; pitch is returned in [-pi/2, pi/2]."""
    R = np.asarray(rotation, dtype=float)
    if R.shape == (2, 2):
        return np.array([np.arctan2(R[1, 0], R[0, 0])])
    if R.shape != (3, 3):
        raise DimensionError(f"expected 2x2 or 3x3 rotation, got {R.shape}")
    pitch = np.arcsin(np.clip(-R[2, 0], -1.0, 1.0))
    if abs(R[2, 0]) < 1.0 - 1e-12:
        yaw = np.arctan2(R[1, 0], R[0, 0])
        roll = np.arctan2(R[2, 1], R[2, 2])
    else:
        # gimbal lock: only yaw - roll (or yaw + roll) is observable
        yaw = np.arctan2(-R[0, 1], R[1, 1])
        roll = 0.0
    return np.array([yaw, pitch, roll])


def _check_point(frame, x, name):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (frame.dim,):
        raise DimensionError(f"{name} has trailing dimension {x.shape[-1:]}, frame has p={frame.dim}")
    return x


def to_global(frame: Frame, x) -> np.ndarray:
    """Map local point(s) ``x`` (shape (p,) or (T, p)) to world coordinates."""
    x = _check_point(frame, x, "x")
    return x @ frame.rotation.T + frame.translation


def to_local(frame: Frame, y) -> np.ndarray:
    """Map world point(s) ``y`` into the frame, using R^T (y - b)."""
    y = _check_point(frame, y, "y")
    return (y - frame.translation) @ frame.rotation


def augment_frame(frame: Frame, mode: str) -> AugmentedFrame:
    """Lift ``frame`` to the joint space of a time-based or trajectory-based model.

    Time-based data is ``[t, x]``: the time channel is left untouched.
    Trajectory-based data is ``[x, dx]``: positions are rotated and shifted,
    displacements only rotated.
    """
    R, b = frame.rotation, frame.translation
    p = frame.dim
    if mode == TIME_BASED:
        A = np.eye(p + 1)
        A[1:, 1:] = R
        off = np.concatenate([[0.0], b])
    elif mode == TRAJECTORY_BASED:
        A = np.zeros((2 * p, 2 * p))
        A[:p, :p] = R
        A[p:, p:] = R
        off = np.concatenate([b, np.zeros(p)])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return AugmentedFrame(A, off)


def transform_gaussian(frame: AugmentedFrame, mean, cov):
    """Express a local Gaussian in world coordinates: (A mu + b, A S A^T)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    D = frame.matrix.shape[0]
    if mean.shape != (D,) or cov.shape != (D, D):
        raise DimensionError(f"expected mean ({D},) and cov ({D},{D}), got {mean.shape}, {cov.shape}")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericError("covariance is not positive-definite") from exc
    A = frame.matrix
    out = A @ cov @ A.T
    return A @ mean + frame.offset, 0.5 * (out + out.T)


def sample_frame(limits: FrameLimits, rng: np.random.Generator) -> Frame:
    """Draw a frame with angles and translation uniform inside ``limits``."""
    ang = rng.uniform(limits.euler_min, limits.euler_max)
    b = rng.uniform(limits.trans_min, limits.trans_max)
    return Frame(euler_to_rotation(ang), b)


def limits_from_situations(situations: Sequence[Sequence[Frame]], expansion: float = 0.25) -> list:
    """Per-frame-index sampling limits spanning the observed frames.

    Bounds are the observed min/max of every Euler angle and translation
    component, each widened on both sides by ``expansion * range`` (or by
    ``expansion`` itself when the range is zero).
    """
    situations = [list(getattr(s, "frames", s)) for s in situations]
    if not situations:
        raise ValueError("need at least one situation")
    n_frames = len(situations[0])
    if any(len(s) != n_frames for s in situations):
        raise ValueError("situations have different frame counts")
    if expansion < 0:
        raise ValueError("expansion must be non-negative")

    limits = []
    for n in range(n_frames):
        ang = np.array([rotation_to_euler(s[n].rotation) for s in situations])
        tr = np.array([s[n].translation for s in situations])
        lo_a, hi_a = _widen(ang, expansion)
        lo_t, hi_t = _widen(tr, expansion)
        limits.append(FrameLimits(lo_a, hi_a, lo_t, hi_t))
    return limits


def _widen(values, expansion):
    lo, hi = values.min(axis=0), values.max(axis=0)
    span = hi - lo
    pad = expansion * np.where(span > 0, span, 1.0)
    return lo - pad, hi + pad
