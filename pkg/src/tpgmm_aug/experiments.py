"""Batch experiments on the scripted tasks.

``simulate`` reproduces the 2D protocol: a time-based model is trained on a
few expert demonstrations, improved by every (method, selection) pair over
many seeded runs, and scored on the training and the validation experts.
``trajectory_trend`` tracks the selection cost of trajectory-based runs as
synthetic demonstrations are accepted.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .augment import (GENERALIZATION, METHODS, ORIGINAL, RF, SELECTIONS, AugmentConfig,
                      run_algorithm1, selection_cost)
from .dataset import generate_2d_task, generate_3d_task
from .gmm import EmConfig
from .tpgmm import fit, reproduce_demo

log = logging.getLogger(__name__)


def run_seed(base_seed: int, index: int) -> int:
    """Independent seed for run ``index`` of a batch started from ``base_seed``."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


@dataclass
class RunResult:
    method: str
    selection: str
    run: int
    seed: int
    train_cost: float
    val_cost: float
    n_demos: int
    iterations: int
    runlog: object = field(repr=False, default=None)
    model: object = field(repr=False, default=None)


@dataclass
class SimulationResult:
    train: list
    validation: list
    initial_model: object
    initial_train_cost: float
    initial_val_cost: float
    runs: list

    def select(self, method, selection):
        return [r for r in self.runs if r.method == method and r.selection == selection]

    def best(self, method, selection):
        """The run with the largest reduction of its own selection cost."""
        rows = self.select(method, selection)
        key = (lambda r: r.train_cost) if selection == ORIGINAL else (lambda r: r.val_cost)
        return min(rows, key=lambda r: (key(r), r.run)) if rows else None


def _one_run(args):
    train, val, cfg, run = args
    model, dataset, runlog = run_algorithm1(train, val, cfg)
    return RunResult(cfg.method, cfg.selection, run, cfg.seed,
                     selection_cost(model, train).mean, selection_cost(model, val).mean,
                     len(dataset), len(runlog.iterations), runlog, model)


def simulate(runs=20, methods=METHODS, selections=(ORIGINAL,), seed=7, n_train=3, n_val=3,
             samples=100, n_components=8, max_demos=8, max_iters=50, snr_db=30.0, jobs=1):
    """Run the 2D augmentation protocol ``runs`` times per (method, selection)."""
    data = generate_2d_task(n_train + n_val, samples, seed)
    train, val = list(data.demos[:n_train]), list(data.demos[n_train:])
    init = fit(train, n_components, EmConfig(seed=seed))
    tasks = []
    for method in methods:
        for selection in selections:
            for r in range(runs):
                cfg = AugmentConfig(method=method, max_demos=max_demos, max_iters=max_iters,
                                    snr_db=snr_db, selection=selection,
                                    n_components=n_components, seed=run_seed(seed, r),
                                    init_seed=seed)
                tasks.append((train, val, cfg, r))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one_run, tasks))
    else:
        results = [_one_run(t) for t in tasks]
    return SimulationResult(train, val, init, selection_cost(init, train).mean,
                            selection_cost(init, val).mean, results)


TABLE_COLUMNS = ("method", "selection", "statistic", "training_cost", "training_pct",
                 "validation_cost", "validation_pct", "runs")


def cost_table(res: SimulationResult) -> list:
    """Rows of the training/validation cost table, percentages vs. the initial model."""
    def pct(v, ref):
        return 100.0 * v / ref

    rows = [("initial", "-", "-", res.initial_train_cost, 100.0, res.initial_val_cost, 100.0, 1)]
    for method in METHODS:
        for selection in SELECTIONS:
            sel = res.select(method, selection)
            if not sel:
                continue
            best = res.best(method, selection)
            rows.append((method, selection, "best", best.train_cost,
                         pct(best.train_cost, res.initial_train_cost), best.val_cost,
                         pct(best.val_cost, res.initial_val_cost), len(sel)))
            tr = float(np.median([r.train_cost for r in sel]))
            va = float(np.median([r.val_cost for r in sel]))
            rows.append((method, selection, "median", tr, pct(tr, res.initial_train_cost),
                         va, pct(va, res.initial_val_cost), len(sel)))
    return rows


def format_cost_table(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        w.writerow([r[0], r[1], r[2], f"{r[3]:.6f}", f"{r[4]:.1f}", f"{r[5]:.6f}", f"{r[6]:.1f}", r[7]])
    return buf.getvalue()


def format_runs(res: SimulationResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("method", "selection", "run", "seed", "training_cost", "validation_cost",
                "n_demos", "iterations", "discarded"))
    for r in res.runs:
        w.writerow((r.method, r.selection, r.run, r.seed, f"{r.train_cost:.6f}",
                    f"{r.val_cost:.6f}", r.n_demos, r.iterations, r.runlog.discarded_count))
    return buf.getvalue()


def _showcase(res: SimulationResult):
    yield "initial", "-", res.initial_model
    for method in METHODS:
        for selection in SELECTIONS:
            best = res.best(method, selection)
            if best is not None:
                yield method, selection, best.model


def format_trajectories(res: SimulationResult) -> str:
    """Long-format CSV of expert and reproduced trajectories."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("source", "method", "selection", "split", "demo", "t", "x", "y"))
    splits = (("training", res.train), ("validation", res.validation))
    for split, demos in splits:
        for i, d in enumerate(demos):
            for t, (x, y) in zip(d.inputs[:, 0], d.outputs):
                w.writerow(("expert", "-", "-", split, i, f"{t:.6f}", f"{x:.6f}", f"{y:.6f}"))
    for method, selection, model in _showcase(res):
        for split, demos in splits:
            for i, d in enumerate(demos):
                rep = reproduce_demo(model, d)
                for t, (x, y) in zip(d.inputs[:, 0], rep):
                    w.writerow(("model", method, selection, split, i, f"{t:.6f}", f"{x:.6f}", f"{y:.6f}"))
    return buf.getvalue()


def plot_reproductions(res: SimulationResult, path) -> None:
    """Static SVG: one panel per showcased model, experts dashed, reproductions solid."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = list(_showcase(res))
    with matplotlib.rc_context({"svg.hashsalt": "tpgmm-aug", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3.2), squeeze=False)
        for ax, (method, selection, model) in zip(axes[0], panels):
            for d in res.train:
                ax.plot(*d.outputs.T, color="tab:blue", lw=1)
                ax.plot(*reproduce_demo(model, d).T, color="tab:red", lw=1)
            for d in res.validation:
                ax.plot(*d.outputs.T, color="tab:blue", lw=1, ls="--")
                ax.plot(*reproduce_demo(model, d).T, color="tab:orange", lw=1)
            ax.set_title(method if method == "initial" else f"{method} / {selection}", fontsize=8)
            ax.set_aspect("equal")
            ax.tick_params(labelsize=6)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


@dataclass
class TrendResult:
    curves: list            # accepted-cost sequence per seed
    means: list             # mean cost after j accepted demos, over runs that got there
    counts: list            # number of runs reaching j accepted demos
    discarded: list         # mean rejected candidates before the j-th acceptance


def trajectory_trend(seeds=20, method=RF, n_experts=2, samples=100, data_seed=6,
                     n_components=4, max_demos=7, max_iters=100, snr_db=30.0, base_seed=0):
    """Selection cost of trajectory-based runs versus accepted synthetic demos.

    All runs improve the same initial model (EM seeded with ``base_seed``) and
    differ only in their synthetic candidates and retraining seeds.
    """
    experts = list(generate_3d_task(n_experts, samples, data_seed).demos)
    curves, rejects = [], []
    for r in range(seeds):
        cfg = AugmentConfig(method=method, max_demos=max_demos, max_iters=max_iters,
                            snr_db=snr_db, n_components=n_components,
                            seed=run_seed(base_seed, r), init_seed=base_seed)
        _, _, rl = run_algorithm1(experts, None, cfg)
        curves.append(rl.accepted_costs)
        # iterations spent before each acceptance
        it_at = [rec.iter for rec in rl.iterations if rec.accepted]
        rejects.append([it - j for j, it in enumerate(it_at)])
    depth = max_demos - n_experts + 1
    means, counts, discarded = [], [], []
    for j in range(depth):
        vals = [c[j] for c in curves if len(c) > j]
        counts.append(len(vals))
        means.append(float(np.mean(vals)) if vals else float("nan"))
        rej = [rj[j - 1] for rj in rejects if j > 0 and len(rj) >= j]
        discarded.append(float(np.mean(rej)) if rej else 0.0)
    return TrendResult(curves, means, counts, discarded)
