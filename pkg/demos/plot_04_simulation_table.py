"""
Training and validation cost table
==================================

Twenty seeded runs of every generator under both selection rules on the 2D
task, summarised as costs and percentages of the initial model.  The same
table, plus trajectories and an SVG plot, is written by
``tpgmm-aug simulate --runs 20 --seed 7 --out DIR``.
"""

import sys

from tpgmm_aug.experiments import cost_table, format_cost_table, plot_reproductions, simulate

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 20

res = simulate(runs=runs, seed=7, selections=("original", "generalization"))
print(format_cost_table(cost_table(res)))

# %%
# Best model of each method next to the initial one.
plot_reproductions(res, "simulation.svg")
print("saved simulation.svg")
