"""
Trajectory-based TP-GMM in 3D with two experts
==============================================

Positions are the regression input and per-sample displacements the output,
so a reproduction is obtained by integrating the regressed displacement
from a start point.  With only two expert demonstrations and 4 Gaussians,
repeated runs of the augmentation loop show how the DTW cost falls as
synthetic demonstrations are accepted.
"""

import sys

import numpy as np

from tpgmm_aug.experiments import trajectory_trend

seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5

# %%
# Each run: rf generator, at most 7 demonstrations, at most 100 iterations.
res = trajectory_trend(seeds=seeds)

print("synthetic demos   runs   mean DTW cost   rejected so far")
for j, (m, c, r) in enumerate(zip(res.means, res.counts, res.discarded)):
    print(f"2 + {j}            {c:4d}   {m:13.4f}   {r:8.1f}")

# %%
# Per-run accepted-cost sequences.
for i, curve in enumerate(res.curves):
    print(i, np.round(curve, 4))
