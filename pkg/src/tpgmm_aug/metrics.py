"""Reproduction costs: per-demo RMSE (time-based) and normalised DTW (trajectory-based)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

RMS = "rms"
DTW = "dtw"

# Symmetric step pattern: horizontal and vertical steps weigh 1, diagonal
# steps 2, origin cell 2; normalisation by len(y) + len(x).  Every path then
# carries total weight len(y) + len(x).
DTW_STEP_PATTERN = "symmetric2"


@dataclass(frozen=True)
class CostReport:
    per_demo: tuple
    mean: float
    mode: str

    @classmethod
    def from_costs(cls, costs, mode):
        costs = tuple(float(c) for c in costs)
        if not costs:
            raise ValueError("empty cost list")
        if not all(math.isfinite(c) and c >= 0 for c in costs):
            raise ValueError("costs must be finite and non-negative")
        return cls(costs, math.fsum(costs) / len(costs), mode)

    def to_text(self, sep=",") -> str:
        lines = [f"demo{sep}cost"]
        lines += [f"{i}{sep}{c!r}" for i, c in enumerate(self.per_demo)]
        lines.append(f"mean{sep}{self.mean!r}")
        return "\n".join(lines) + "\n"


def _as_2d(a):
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def rms_cost(repros, demos) -> CostReport:
    """Root-mean-square reproduction error of each (repro, demo) pair."""
    repros, demos = list(repros), list(demos)
    if len(repros) != len(demos):
        raise ValueError(f"{len(repros)} reproductions for {len(demos)} demonstrations")
    costs = []
    for y, xi in zip(repros, demos):
        y, xi = _as_2d(y), _as_2d(xi)
        if y.shape != xi.shape:
            raise ValueError(f"shape mismatch {y.shape} vs {xi.shape}")
        costs.append(math.sqrt(np.mean(np.sum((y - xi) ** 2, axis=1))))
    return CostReport.from_costs(costs, RMS)


def dtw_distance(y, xi) -> float:
    """Normalised DTW distance with Euclidean local cost and no window."""
    y, xi = _as_2d(y), _as_2d(xi)
    n, m = y.shape[0], xi.shape[0]
    if n == 0 or m == 0:
        raise ValueError("DTW needs non-empty sequences")
    if y.shape[1] != xi.shape[1]:
        raise ValueError(f"dimension mismatch {y.shape[1]} vs {xi.shape[1]}")
    if y.shape[1] == 1:
        d = np.abs(np.subtract.outer(y[:, 0], xi[:, 0])).tolist()
    else:
        d = cdist(y, xi).tolist()

    # first row: origin weighs 2, then horizontal steps only
    prev = [0.0] * m
    acc = 2.0 * d[0][0]
    prev[0] = acc
    for j in range(1, m):
        acc += d[0][j]
        prev[j] = acc
    for i in range(1, n):
        di = d[i]
        cur = [0.0] * m
        left = prev[0] + di[0]
        cur[0] = left
        for j in range(1, m):
            c = di[j]
            # vertical, diagonal (weight 2) and horizontal predecessors
            best = prev[j]
            diag = prev[j - 1] + c
            if diag < best:
                best = diag
            if left < best:
                best = left
            left = best + c
            cur[j] = left
        prev = cur
    return prev[m - 1] / (n + m)


def dtw_cost(repros, demos) -> CostReport:
    repros, demos = list(repros), list(demos)
    if len(repros) != len(demos):
        raise ValueError(f"{len(repros)} reproductions for {len(demos)} demonstrations")
    return CostReport.from_costs([dtw_distance(y, xi) for y, xi in zip(repros, demos)], DTW)


def cost(kind, repros, demos) -> CostReport:
    if kind == RMS:
        return rms_cost(repros, demos)
    if kind == DTW:
        return dtw_cost(repros, demos)
    raise ValueError(f"unknown cost {kind!r}")
