"""
Improving a TP-GMM with synthetic demonstrations
================================================

Starting from three expert demonstrations, each generator (noise, rf,
rf+noise) proposes synthetic demonstrations.  A candidate is kept only if
retraining with it lowers the reproduction cost on the experts.
"""

import numpy as np

from tpgmm_aug import AugmentConfig, generate_2d_task, run_algorithm1, selection_cost

data = generate_2d_task(n_situations=6, samples_per_demo=100, seed=7)
train, val = list(data.demos[:3]), list(data.demos[3:])

# %%
# One run per method.  ``validation`` is only scored here, not used for
# selection.
for method in ("noise", "rf", "rf_noise"):
    cfg = AugmentConfig(method=method, max_demos=8, max_iters=50, n_components=8, seed=1)
    model, dataset, log = run_algorithm1(train, val, cfg)
    val_cost = selection_cost(model, val).mean
    print(f"{method:9s} train {log.initial_cost:.4f} -> {log.final_cost:.4f}  "
          f"demos {len(dataset)}  rejected {log.discarded_count:2d}  validation {val_cost:.4f}")

# %%
# The accepted costs of a run always decrease strictly.
print("accepted costs of the last run:", np.round(log.accepted_costs, 4))
