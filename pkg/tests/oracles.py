"""Independent reference implementations used as test oracles.

Each one recomputes a quantity from its textbook definition without sharing
code with the package.
"""

import itertools
from functools import lru_cache

import numpy as np
from scipy.spatial.transform import Rotation
from scipy.special import logsumexp
from scipy.stats import multivariate_normal


def euler_oracle(angles):
    """Intrinsic z-y'-x'' rotation via scipy (uppercase axes = intrinsic)."""
    a = np.atleast_1d(angles)
    if a.size == 1:
        return Rotation.from_euler("z", a[0]).as_matrix()[:2, :2]
    return Rotation.from_euler("ZYX", a).as_matrix()


def random_rotation(p, rng):
    if p == 2:
        return euler_oracle([rng.uniform(-np.pi, np.pi)])
    return Rotation.random(random_state=rng).as_matrix()


# -- DTW --------------------------------------------------------------------

@lru_cache(maxsize=None)
def warping_paths(n, m):
    """Every monotone path from (0, 0) to (n-1, m-1) with unit steps."""
    out = []

    def walk(i, j, path):
        if (i, j) == (n - 1, m - 1):
            out.append(tuple(path))
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            a, b = i + di, j + dj
            if a < n and b < m:
                path.append((a, b, di + dj))
                walk(a, b, path)
                path.pop()

    walk(0, 0, [])
    return tuple(out)


@lru_cache(maxsize=None)
def path_weights(n, m):
    """(n_paths, n*m) matrix of per-cell weights: origin 2, step weight 1 or 2."""
    paths = warping_paths(n, m)
    W = np.zeros((len(paths), n * m))
    for r, path in enumerate(paths):
        W[r, 0] = 2.0
        for i, j, w in path:
            W[r, i * m + j] += w
    return W


def dtw_bruteforce(y, xi):
    """Minimum over all warping paths, normalised by len(y) + len(xi)."""
    y = np.asarray(y, dtype=float).reshape(len(y), -1)
    xi = np.asarray(xi, dtype=float).reshape(len(xi), -1)
    n, m = len(y), len(xi)
    d = np.linalg.norm(y[:, None, :] - xi[None, :, :], axis=2)
    best = np.inf
    for path in warping_paths(n, m):
        total = 2.0 * d[0, 0] + sum(w * d[i, j] for i, j, w in path)
        best = min(best, total)
    return best / (n + m)


def dtw_bruteforce_all(A, B):
    """Brute-force distances for every row pair of scalar sequences A (a, n), B (b, m)."""
    n, m = A.shape[1], B.shape[1]
    W = path_weights(n, m)
    out = np.empty((len(A), len(B)))
    for r, a in enumerate(A):
        d = np.abs(a[None, :, None] - B[:, None, :]).reshape(len(B), n * m)
        out[r] = (d @ W.T).min(axis=1) / (n + m)
    return out


# -- Gaussians --------------------------------------------------------------

def naive_fusion(model_means, model_covs, frames, mode):
    """Product of per-frame Gaussians, one component at a time, with explicit inverses."""
    N, K, D = model_means.shape
    means, covs = np.empty((K, D)), np.empty((K, D, D))
    for k in range(K):
        prec = np.zeros((D, D))
        info = np.zeros(D)
        for n, (R, b) in enumerate(frames):
            p = len(b)
            if mode == "time":
                A = np.block([[np.ones((1, 1)), np.zeros((1, p))], [np.zeros((p, 1)), R]])
                off = np.r_[0.0, b]
            else:
                A = np.block([[R, np.zeros((p, p))], [np.zeros((p, p)), R]])
                off = np.r_[b, np.zeros(p)]
            mu = A @ model_means[n, k] + off
            P = np.linalg.inv(A @ model_covs[n, k] @ A.T)
            prec += P
            info += P @ mu
        covs[k] = np.linalg.inv(prec)
        means[k] = covs[k] @ info
    return means, covs


def conditional_gaussian(mean, cov, x, d):
    """Closed-form conditional of a single Gaussian on its first d dims."""
    Sii, Soi = cov[:d, :d], cov[d:, :d]
    g = Soi @ np.linalg.inv(Sii)
    return mean[d:] + g @ (x - mean[:d]), cov[d:, d:] - g @ Soi.T


def gmr_oracle(weights, means, covs, x, d):
    """Mixture conditional mean and covariance, component by component."""
    x = np.atleast_1d(x)
    logh = np.array([np.log(w) + multivariate_normal(m[:d], S[:d, :d]).logpdf(x)
                     for w, m, S in zip(weights, means, covs)])
    h = np.exp(logh - logsumexp(logh))
    parts = [conditional_gaussian(m, S, x, d) for m, S in zip(means, covs)]
    mean = sum(hk * mk for hk, (mk, _) in zip(h, parts))
    cov = sum(hk * (Sk + np.outer(mk - mean, mk - mean)) for hk, (mk, Sk) in zip(h, parts))
    return mean, cov


def penalised_objective(views, weights, means, covs, eps):
    """mean_t log sum_k pi_k prod_n N(x^n_t) exp(-eps/2 tr inv(S^n_k))."""
    T = views[0].shape[0]
    K = len(weights)
    L = np.zeros((T, K))
    for k in range(K):
        L[:, k] = np.log(weights[k])
        for n, X in enumerate(views):
            S = covs[n][k]
            L[:, k] += multivariate_normal(means[n][k], S).logpdf(X).reshape(T)
            L[:, k] -= 0.5 * eps * np.trace(np.linalg.inv(S))
    return float(np.mean(logsumexp(L, axis=1)))


def all_sequences(length, values=(0.0, 1.0, 2.0)):
    return np.array(list(itertools.product(values, repeat=length)))
