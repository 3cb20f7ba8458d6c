"""Gaussian mixtures: density, regularised EM and Gaussian mixture regression.

The EM routine works on one or several synchronised "views" of the same
samples (the per-frame data of a task-parameterized model); a plain GMM is the
single-view case.  Every covariance gets ``cov_floor * I`` added in the
M-step.  That update is the exact maximiser of the penalised objective

    F = mean_t log sum_k pi_k prod_n N(x_t^n | mu_k^n, S_k^n) exp(-eps/2 tr(S_k^n)^-1)

so the responsibilities are computed with the same penalty and F never
decreases from one iteration to the next.  ``history`` reports F.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .errors import DimensionError, NumericError

LOG_2PI = np.log(2.0 * np.pi)
INIT_TIME = "time"
INIT_KMEANS = "kmeans"


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise DimensionError(f"cov {cov.shape} does not match mean length {mean.size}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True, eq=False)
class Gmm:
    """Mixture whose first ``input_dim`` dimensions are the regression input."""

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    input_dim: int

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        mu = np.array(self.means, dtype=float)
        S = np.array(self.covs, dtype=float)
        K = w.size
        if mu.ndim != 2 or mu.shape[0] != K or S.shape != (K, mu.shape[1], mu.shape[1]):
            raise DimensionError(f"inconsistent shapes: weights {w.shape}, means {mu.shape}, covs {S.shape}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must lie on the simplex (sum={w.sum()!r})")
        if not 0 < self.input_dim < mu.shape[1]:
            raise DimensionError(f"input_dim must be in (0, {mu.shape[1]}), got {self.input_dim}")
        for name, a in (("weights", w), ("means", mu), ("covs", S)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_components(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def components(self) -> list:
        return [GaussianComponent(m, S) for m, S in zip(self.means, self.covs)]


@dataclass(frozen=True)
class EmConfig:
    """EM settings.  ``init`` is ``"time"``, ``"kmeans"`` or ``None`` (caller's default)."""

    max_iters: int = 200
    tol: float = 1e-6
    cov_floor: float = 1e-6
    init: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0 or not self.cov_floor > 0:
            raise ValueError("tol and cov_floor must be positive")
        if self.init not in (None, INIT_TIME, INIT_KMEANS):
            raise ValueError(f"unknown init {self.init!r}")


def _cholesky(cov):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericError("covariance is not positive-definite") from exc


def _log_gauss(X, mean, cov):
    """Row-wise log N(X | mean, cov) and tr(cov^-1)."""
    L = _cholesky(cov)
    z = solve_triangular(L, (X - mean).T, lower=True, check_finite=False)
    log_det = 2.0 * np.sum(np.log(np.diag(L)))
    Linv = solve_triangular(L, np.eye(L.shape[0]), lower=True, check_finite=False)
    logp = -0.5 * (np.sum(z * z, axis=0) + log_det + mean.size * LOG_2PI)
    return logp, np.sum(Linv * Linv)


def log_density(comp: GaussianComponent, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != comp.dim:
        raise DimensionError(f"x has length {x.size}, component has D={comp.dim}")
    return float(_log_gauss(x[None, :], comp.mean, comp.cov)[0][0])


# -- initialisation ---------------------------------------------------------

def _stats(X, idx, floor):
    D = X.shape[1]
    pts = X[idx]
    mean = pts.mean(axis=0)
    if len(idx) > 1:
        diff = pts - mean
        cov = diff.T @ diff / len(idx)
    else:
        cov = np.zeros((D, D))
    return mean, cov + floor * np.eye(D)


def _init_params(views, K, init, floor, seed):
    T = views[0].shape[0]
    if init == INIT_TIME:
        order = np.argsort(views[0][:, 0], kind="stable")
        groups = np.array_split(order, K)
    else:
        Z = np.hstack(views)
        rng = np.random.default_rng(seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, labels = kmeans2(Z, K, minit="++", seed=rng, missing="warn")
        groups = [np.flatnonzero(labels == k) for k in range(K)]
    counts = np.array([max(len(g), 1) for g in groups], dtype=float)
    weights = counts / counts.sum()
    N, D = len(views), views[0].shape[1]
    means = np.empty((N, K, D))
    covs = np.empty((N, K, D, D))
    everything = np.arange(T)
    for n, X in enumerate(views):
        for k, g in enumerate(groups):
            means[n, k], covs[n, k] = _stats(X, g if len(g) else everything, floor)
    return weights, means, covs


# -- EM core ----------------------------------------------------------------

def _batched_cholesky(covs):
    try:
        return np.linalg.cholesky(covs)
    except np.linalg.LinAlgError as exc:
        raise NumericError("covariance is not positive-definite") from exc


def _e_step(Xs, weights, means, covs, floor):
    """Responsibilities and penalised objective; ``Xs`` is (N, T, D)."""
    L = _batched_cholesky(covs)                                   # N K D D
    Linv = np.linalg.inv(L)
    diff = Xs[:, None, :, :] - means[:, :, None, :]               # N K T D
    z = diff @ np.swapaxes(Linv, 2, 3)                            # N K T D
    maha = np.sum(z * z, axis=3)                                  # N K T
    log_det = 2.0 * np.sum(np.log(np.diagonal(L, axis1=2, axis2=3)), axis=2)
    tr_inv = np.sum(Linv * Linv, axis=(2, 3))                     # N K
    D = Xs.shape[2]
    per_frame = -0.5 * (maha + (log_det + D * LOG_2PI + floor * tr_inv)[:, :, None])
    with np.errstate(divide="ignore"):
        logp = np.log(weights)[:, None] + per_frame.sum(axis=0)   # K T
    top = logp.max(axis=0)
    shifted = np.exp(logp - top)
    total = shifted.sum(axis=0)
    lse = top + np.log(total)
    resp = (shifted / total).T                                    # T K
    return resp, float(np.mean(lse))


def _m_step(Xs, resp, means, covs, floor):
    T = resp.shape[0]
    Nk = resp.sum(axis=0)
    live = Nk > 1e-12 * T
    safe = np.where(live, Nk, 1.0)
    new_means = (resp.T[None] @ Xs) / safe[None, :, None]
    diff = Xs[:, None, :, :] - new_means[:, :, None, :]           # N K T D
    S = np.swapaxes(diff * resp.T[None, :, :, None], 2, 3) @ diff
    S = S / safe[None, :, None, None]
    S = 0.5 * (S + np.swapaxes(S, 2, 3)) + floor * np.eye(Xs.shape[2])
    # starved components keep their previous parameters
    new_means = np.where(live[None, :, None], new_means, means)
    S = np.where(live[None, :, None, None], S, covs)
    weights = Nk / T
    return weights / weights.sum(), new_means, S


def em_views(views, K, cfg: EmConfig, default_init=INIT_TIME):
    """Joint EM over synchronised views.

    Returns ``(weights, means[N,K,D], covs[N,K,D,D], history)``; the returned
    parameters are the ones whose objective is ``history[-1]``.
    """
    views = [np.asarray(v, dtype=float) for v in views]
    T = views[0].shape[0]
    if any(v.shape != views[0].shape for v in views):
        raise DimensionError("all views must share the same shape")
    if K < 1 or T < K:
        raise ValueError(f"need at least K={K} samples, got {T}")
    init = cfg.init or default_init
    floor = cfg.cov_floor

    weights, means, covs = _init_params(views, K, init, floor, cfg.seed)
    Xs = np.stack(views)
    resp, F = _e_step(Xs, weights, means, covs, floor)
    history = [F]
    for _ in range(cfg.max_iters):
        weights, means, covs = _m_step(Xs, resp, means, covs, floor)
        resp, F = _e_step(Xs, weights, means, covs, floor)
        history.append(F)
        if abs(history[-1] - history[-2]) < cfg.tol:
            break
    return weights, means, covs, history


def em_fit(data, K: int, cfg: EmConfig = EmConfig(), input_dim: int = 1, return_history: bool = False):
    """Fit a ``K``-component GMM to ``data`` (T x D).

    Initialisation defaults to time-binning on column 0.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise DimensionError(f"data must be T x D with D >= 2, got {data.shape}")
    if data.shape[0] < K:
        raise ValueError(f"need at least K={K} samples, got {data.shape[0]}")
    w, mu, S, hist = em_views([data], K, cfg)
    gmm = Gmm(w, mu[0], S[0], input_dim)
    return (gmm, hist) if return_history else gmm


def mixture_log_likelihood(gmm: Gmm, data) -> float:
    """Mean log-likelihood of ``data`` under ``gmm`` (no penalty)."""
    data = np.asarray(data, dtype=float)
    with np.errstate(divide="ignore"):
        logp = np.log(gmm.weights)[None, :] + np.column_stack(
            [_log_gauss(data, m, S)[0] for m, S in zip(gmm.means, gmm.covs)])
    return float(np.mean(logsumexp(logp, axis=1)))


# -- regression -------------------------------------------------------------

class GmrResult(NamedTuple):
    mean: np.ndarray
    cov: np.ndarray
    responsibilities: np.ndarray
    fallback: bool


class _Conditioner:
    """Per-mixture quantities reused by every regression query."""

    def __init__(self, gmm: Gmm):
        d = gmm.input_dim
        S_ii = gmm.covs[:, :d, :d]
        S_oi = gmm.covs[:, d:, :d]
        L = _batched_cholesky(S_ii)
        self.Linv = np.linalg.inv(L)                                  # K d d
        P = np.swapaxes(self.Linv, 1, 2) @ self.Linv                  # S_ii^-1
        self.gain = S_oi @ P                                          # K o d
        C = gmm.covs[:, d:, d:] - self.gain @ np.swapaxes(S_oi, 1, 2)
        self.cond_covs = 0.5 * (C + np.swapaxes(C, 1, 2))
        with np.errstate(divide="ignore"):
            self.log_norm = np.log(gmm.weights) - 0.5 * (
                2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1) + d * LOG_2PI)
        self.mu_in = gmm.means[:, :d]
        self.mu_out = gmm.means[:, d:]


def _conditioner(gmm: Gmm) -> _Conditioner:
    c = gmm.__dict__.get("_conditioner")
    if c is None:
        c = _Conditioner(gmm)
        gmm.__dict__["_conditioner"] = c
    return c


def gmr_batch(gmm: Gmm, X):
    """Condition ``gmm`` on every row of ``X``.

    Returns ``(means, covs, responsibilities, fallback)`` with shapes
    (T, d_out), (T, d_out, d_out), (T, K), (T,).  Responsibilities are
    normalised in log space; if every one of them underflows for a row, that
    row is conditioned on the component nearest in Mahalanobis distance and
    flagged in ``fallback``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != gmm.input_dim:
        raise DimensionError(f"input has dimension {X.shape[1]}, model expects {gmm.input_dim}")
    c = _conditioner(gmm)
    K = gmm.n_components

    diff = X[None, :, :] - c.mu_in[:, None, :]                        # K T d
    z = diff @ np.swapaxes(c.Linv, 1, 2)
    with np.errstate(over="ignore"):
        maha = np.sum(z * z, axis=2).T                                # T K
    logp = c.log_norm[None, :] - 0.5 * maha
    top = logp.max(axis=1)
    fallback = ~np.isfinite(top)
    with np.errstate(invalid="ignore"):
        shifted = np.exp(logp - top[:, None])
        h = shifted / shifted.sum(axis=1, keepdims=True)
    if np.any(fallback):
        h[fallback] = np.eye(K)[np.argmin(maha[fallback], axis=1)]

    cond_means = c.mu_out[:, None, :] + diff @ np.swapaxes(c.gain, 1, 2)   # K T o
    means = np.einsum("tk,kto->to", h, cond_means)
    dev = cond_means - means[None, :, :]
    # law of total variance
    covs = np.einsum("tk,kop->top", h, c.cond_covs) + np.einsum("tk,kto,ktp->top", h, dev, dev)
    covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))
    return means, covs, h, fallback


def gmr(gmm: Gmm, x) -> GmrResult:
    """Conditional mean and covariance of the outputs given input ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (gmm.input_dim,):
        raise DimensionError(f"input has shape {x.shape}, model expects ({gmm.input_dim},)")
    m, C, h, fb = gmr_batch(gmm, x[None, :])
    return GmrResult(m[0], C[0], h[0], bool(fb[0]))
