"""Task-parameterized GMM: per-frame projection, joint EM, fusion, reproduction.

Two data layouts are supported:

* time-based: input is time ``t`` (1 column), output is position (p columns);
* trajectory-based: input is position, output is the per-sample displacement
  ``x[t+1] - x[t]`` (last row repeated).  Reproduction integrates the
  regressed displacement with a unit step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionError, NumericError
from .frames import (MODES, TIME_BASED, TRAJECTORY_BASED, Frame, augment_frame,
                     transform_gaussian)
from .gmm import INIT_KMEANS, INIT_TIME, EmConfig, Gmm, em_views, gmr, gmr_batch

DISPLACEMENT_TOL = 1e-9


@dataclass(frozen=True)
class Situation:
    """An ordered set of frames; index n identifies the frame across demos."""

    frames: tuple

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise ValueError("a situation needs at least one frame")
        if not all(isinstance(f, Frame) for f in frames):
            raise TypeError("situation entries must be Frame instances")
        if len({f.dim for f in frames}) != 1:
            raise DimensionError("all frames of a situation must share p")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def dim(self) -> int:
        return self.frames[0].dim

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, n):
        return self.frames[n]


def displacements(positions) -> np.ndarray:
    """Per-sample forward differences with the last row repeated."""
    x = np.asarray(positions, dtype=float)
    d = np.empty_like(x)
    d[:-1] = x[1:] - x[:-1]
    d[-1] = d[-2]
    return d


@dataclass(frozen=True, eq=False)
class Demonstration:
    inputs: np.ndarray
    outputs: np.ndarray
    situation: Situation
    mode: str = TIME_BASED

    def __post_init__(self):
        X = np.array(self.inputs, dtype=float)
        Y = np.array(self.outputs, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim == 1:
            Y = Y[:, None]
        if not isinstance(self.situation, Situation):
            object.__setattr__(self, "situation", Situation(tuple(self.situation)))
        p = self.situation.dim
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if X.shape[0] != Y.shape[0] or X.shape[0] < 2:
            raise DimensionError(f"need >= 2 matching rows, got inputs {X.shape}, outputs {Y.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("demonstration contains non-finite values")
        if self.mode == TIME_BASED:
            if X.shape[1] != 1 or Y.shape[1] != p:
                raise DimensionError(f"time-based demo needs 1 input and {p} outputs, got {X.shape[1]}, {Y.shape[1]}")
        else:
            if X.shape[1] != p or Y.shape[1] != p:
                raise DimensionError(f"trajectory-based demo needs {p} inputs and outputs")
            if np.max(np.abs(displacements(X) - Y)) > DISPLACEMENT_TOL:
                raise ValueError("outputs must equal the forward differences of the inputs")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", Y)

    @classmethod
    def from_positions(cls, positions, situation) -> "Demonstration":
        """Trajectory-based demonstration from a T x p position array."""
        x = np.asarray(positions, dtype=float)
        return cls(x, displacements(x), situation, TRAJECTORY_BASED)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def positions(self) -> np.ndarray:
        return self.outputs if self.mode == TIME_BASED else self.inputs

    @property
    def data(self) -> np.ndarray:
        return np.hstack([self.inputs, self.outputs])


@dataclass(frozen=True, eq=False)
class TpGmm:
    """``means[n, k]`` / ``covs[n, k]``: component k seen from frame n."""

    mode: str
    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    input_dim: int

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        mu = np.array(self.means, dtype=float)
        S = np.array(self.covs, dtype=float)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if mu.ndim != 3 or mu.shape[1] != w.size or S.shape != mu.shape + (mu.shape[2],):
            raise DimensionError(f"inconsistent shapes: weights {w.shape}, means {mu.shape}, covs {S.shape}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must lie on the simplex")
        if not 0 < self.input_dim < mu.shape[2]:
            raise DimensionError("input_dim out of range")
        for name, a in (("weights", w), ("means", mu), ("covs", S)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_frames(self) -> int:
        return self.means.shape[0]

    @property
    def n_components(self) -> int:
        return self.means.shape[1]

    @property
    def dim(self) -> int:
        return self.means.shape[2]

    @property
    def p(self) -> int:
        return self.dim - self.input_dim if self.mode == TIME_BASED else self.input_dim


def project_demo(demo: Demonstration) -> list:
    """The demonstration seen from each of its frames (list of T x D arrays)."""
    data = demo.data
    out = []
    for frame in demo.situation:
        af = augment_frame(frame, demo.mode)
        # block-orthogonal: A^-1 = A^T
        out.append((data - af.offset) @ af.matrix)
    return out


def _check_demos(demos):
    if not demos:
        raise ValueError("need at least one demonstration")
    first = demos[0]
    for d in demos[1:]:
        if d.mode != first.mode:
            raise ValueError("demonstrations mix time-based and trajectory-based data")
        if d.situation.n_frames != first.situation.n_frames:
            raise ValueError("demonstrations have inconsistent frame counts")
        if d.situation.dim != first.situation.dim or d.data.shape[1] != first.data.shape[1]:
            raise DimensionError("demonstrations have inconsistent dimensions")


def default_init(mode: str) -> str:
    return INIT_TIME if mode == TIME_BASED else INIT_KMEANS


def fit(demos: Sequence[Demonstration], K: int, cfg: EmConfig = EmConfig(), return_history=False):
    """Joint EM over the frame-projected demonstrations."""
    demos = list(demos)
    _check_demos(demos)
    projected = [project_demo(d) for d in demos]
    n_frames = demos[0].situation.n_frames
    views = [np.vstack([p[n] for p in projected]) for n in range(n_frames)]
    w, mu, S, hist = em_views(views, K, cfg, default_init(demos[0].mode))
    model = TpGmm(demos[0].mode, w, mu, S, demos[0].inputs.shape[1])
    return (model, hist) if return_history else model


def instantiate(model: TpGmm, sit: Situation) -> Gmm:
    """Fuse the per-frame components in the world frame of ``sit``.

    Each component is mapped through its frame and the N Gaussians are
    combined as a product: precisions add, means are precision-weighted.
    """
    if sit.n_frames != model.n_frames:
        raise DimensionError(f"situation has {sit.n_frames} frames, model has {model.n_frames}")
    if sit.dim != model.p:
        raise DimensionError(f"situation has p={sit.dim}, model has p={model.p}")
    K, D = model.n_components, model.dim
    aug = [augment_frame(f, model.mode) for f in sit]
    means = np.empty((K, D))
    covs = np.empty((K, D, D))
    eye = np.eye(D)
    for k in range(K):
        prec = np.zeros((D, D))
        info = np.zeros(D)
        for n, af in enumerate(aug):
            m, S = transform_gaussian(af, model.means[n, k], model.covs[n, k])
            c = cho_factor(S, lower=True)
            prec += cho_solve(c, eye)
            info += cho_solve(c, m)
        prec = 0.5 * (prec + prec.T)
        try:
            c = cho_factor(prec, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"summed precision of component {k} is singular") from exc
        cov = cho_solve(c, eye)
        covs[k] = 0.5 * (cov + cov.T)
        means[k] = cho_solve(c, info)
    return Gmm(model.weights, means, covs, model.input_dim)


def reproduce_time_based(model: TpGmm, sit: Situation, times) -> np.ndarray:
    """Regressed position at every time of ``times`` (T x p)."""
    if model.mode != TIME_BASED:
        raise ValueError("model is not time-based")
    t = np.asarray(times, dtype=float).reshape(-1, 1)
    means, _, _, _ = gmr_batch(instantiate(model, sit), t)
    return means


def reproduce_trajectory_based(model: TpGmm, sit: Situation, start, steps: int) -> np.ndarray:
    """Integrate the regressed displacement field from ``start`` for ``steps`` steps."""
    if model.mode != TRAJECTORY_BASED:
        raise ValueError("model is not trajectory-based")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    gmm = instantiate(model, sit)
    x = np.asarray(start, dtype=float).reshape(-1)
    if x.size != model.input_dim:
        raise DimensionError(f"start has length {x.size}, expected {model.input_dim}")
    traj = np.empty((steps + 1, x.size))
    traj[0] = x
    for t in range(steps):
        traj[t + 1] = traj[t] + gmr(gmm, traj[t]).mean
    return traj


def reproduce_demo(model: TpGmm, demo: Demonstration) -> np.ndarray:
    """Reproduction on ``demo``'s situation, comparable sample-by-sample with ``demo.positions``."""
    if model.mode == TIME_BASED:
        return reproduce_time_based(model, demo.situation, demo.inputs[:, 0])
    return reproduce_trajectory_based(model, demo.situation, demo.inputs[0], demo.n_samples - 1)
