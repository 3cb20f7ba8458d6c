"""
Learning a 2D reaching skill with a time-based TP-GMM
=====================================================

Three demonstrations of a start-to-goal motion, each in its own situation,
are encoded in a TP-GMM with two frames.  The model then generalizes to a
goal it has never seen.
"""

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from tpgmm_aug import (EmConfig, Frame, Situation, euler_to_rotation, fit, generate_2d_task,
                       rms_cost, reproduce_demo, reproduce_time_based)

# %%
# Expert data: the start frame sits at the origin, the goal frame moves and
# turns from one situation to the next.
data = generate_2d_task(n_situations=3, samples_per_demo=100, seed=7)
for i, d in enumerate(data.demos):
    goal = d.situation[1]
    print(f"demo {i}: goal at {np.round(goal.translation, 2)}")

# %%
# Train with 8 Gaussians.  Time-based models are initialised by splitting
# the time axis into equal bins, so the fit is deterministic.
model = fit(data.demos, 8, EmConfig())
repros = [reproduce_demo(model, d) for d in data.demos]
print("training RMSE per demo:", np.round(rms_cost(repros, [d.outputs for d in data.demos]).per_demo, 4))

# %%
# A new situation: goal rotated by 40 degrees and moved up.
new = Situation((Frame.identity(2), Frame(euler_to_rotation([np.deg2rad(40)]), [2.2, 0.8])))
times = data.demos[0].inputs[:, 0]
path = reproduce_time_based(model, new, times)

fig, ax = plt.subplots(figsize=(5, 4))
for d in data.demos:
    ax.plot(*d.outputs.T, color="tab:blue", lw=1)
ax.plot(*path.T, color="tab:red", lw=2, label="new situation")
ax.set_aspect("equal")
ax.legend()
fig.savefig("time_based_2d.svg")
print("saved time_based_2d.svg")
