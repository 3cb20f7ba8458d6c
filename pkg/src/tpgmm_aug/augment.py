"""Improving a TP-GMM with synthetic demonstrations.

Starting from a model trained on the expert demonstrations, each iteration
proposes one synthetic demonstration, retrains on the enlarged dataset and
keeps the candidate only if the reproduction cost on the expert set (or an
optional validation set) strictly decreases.  The run stops once the dataset
holds ``max_demos`` demonstrations or after ``max_iters`` iterations.

Candidates come from one of three generators:

``noise``     an expert demo with white noise added to its positions;
``rf``        the current model's reproduction in a situation whose frames are
              drawn uniformly inside per-frame limits;
``rf_noise``  ``rf`` followed by ``noise``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import metrics
from .errors import NumericError
from .frames import TIME_BASED, limits_from_situations, sample_frame, to_global, to_local
from .gmm import EmConfig
from .tpgmm import (Demonstration, Situation, TpGmm, fit, reproduce_demo,
                    reproduce_time_based, reproduce_trajectory_based)

log = logging.getLogger(__name__)

NOISE = "noise"
RF = "rf"
RF_NOISE = "rf_noise"
METHODS = (NOISE, RF, RF_NOISE)

ORIGINAL = "original"
GENERALIZATION = "generalization"
SELECTIONS = (ORIGINAL, GENERALIZATION)


@dataclass(frozen=True)
class AugmentConfig:
    method: str = RF
    max_demos: int = 8
    max_iters: int = 50
    snr_db: float = 30.0
    selection: str = ORIGINAL
    n_components: int = 8
    seed: int = 0
    init_seed: Optional[int] = None  # seed of the initial fit; ``seed`` if None
    limits: Optional[tuple] = None   # per-frame FrameLimits; derived from the experts if None
    expansion: float = 0.25
    em: EmConfig = field(default_factory=EmConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.selection not in SELECTIONS:
            raise ValueError(f"unknown selection {self.selection!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    method: str
    accepted: bool
    cost_before: float
    cost_after: float
    n_demos: int


@dataclass(frozen=True)
class RunLog:
    iterations: tuple
    initial_cost: float
    final_cost: float
    discarded_count: int
    method: str
    selection: str
    cost_kind: str
    dtw_step_pattern: str = metrics.DTW_STEP_PATTERN

    @property
    def accepted_costs(self) -> list:
        """Selection cost after 0, 1, 2, ... accepted synthetic demonstrations."""
        return [self.initial_cost] + [r.cost_after for r in self.iterations if r.accepted]


def inject_noise(traj, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add white Gaussian noise at ``snr_db`` per column.

    The signal power of a column is its mean square about the column mean.
    """
    x = np.asarray(traj, dtype=float)
    x2 = x[:, None] if x.ndim == 1 else x
    power = np.mean((x2 - x2.mean(axis=0)) ** 2, axis=0)
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    noisy = x2 + rng.standard_normal(x2.shape) * sigma
    return noisy.reshape(x.shape)


def _with_noise(demo: Demonstration, snr_db, rng) -> Demonstration:
    if demo.mode == TIME_BASED:
        return Demonstration(demo.inputs, inject_noise(demo.outputs, snr_db, rng), demo.situation)
    # trajectory data: perturb positions, keep displacements consistent
    return Demonstration.from_positions(inject_noise(demo.inputs, snr_db, rng), demo.situation)


def _random_situation(limits, rng) -> Situation:
    return Situation(tuple(sample_frame(lim, rng) for lim in limits))


def _reproduce_in(model: TpGmm, template: Demonstration, sit: Situation) -> Demonstration:
    if model.mode == TIME_BASED:
        times = template.inputs[:, 0]
        return Demonstration(times, reproduce_time_based(model, sit, times), sit)
    # the template's start point, carried along with the first frame
    start = to_global(sit[0], to_local(template.situation[0], template.inputs[0]))
    traj = reproduce_trajectory_based(model, sit, start, template.n_samples - 1)
    return Demonstration.from_positions(traj, sit)


def synthesize(method: str, demos: Sequence[Demonstration], model: TpGmm, limits,
               rng: np.random.Generator, snr_db: float = 30.0) -> Demonstration:
    """One synthetic demonstration; ``demos`` are the expert demonstrations."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    template = demos[int(rng.integers(len(demos)))]
    if method == NOISE:
        return _with_noise(template, snr_db, rng)
    if limits is None or len(limits) != template.situation.n_frames:
        raise ValueError("rf methods need one FrameLimits per frame")
    cand = _reproduce_in(model, template, _random_situation(limits, rng))
    if method == RF_NOISE:
        cand = _with_noise(cand, snr_db, rng)
    return cand


def selection_cost(model: TpGmm, demos: Sequence[Demonstration]) -> metrics.CostReport:
    """RMSE for time-based models, normalised DTW for trajectory-based ones."""
    repros = [reproduce_demo(model, d) for d in demos]
    targets = [d.positions for d in demos]
    if model.mode == TIME_BASED:
        return metrics.rms_cost(repros, targets)
    return metrics.dtw_cost(repros, targets)


def _fit_seed(seed, it):
    return int(np.random.SeedSequence([seed, 1, it]).generate_state(1)[0])


def run_algorithm1(init_demos: Sequence[Demonstration], validation_demos=None,
                   cfg: AugmentConfig = AugmentConfig()):
    """Returns ``(model, dataset, runlog)``.

    The first fit uses ``cfg.em`` seeded with ``cfg.init_seed`` (default
    ``cfg.seed``), so several runs can share one initial model; every retrain
    gets a fresh seed derived from ``cfg.seed`` and the iteration index.
    """
    experts = list(init_demos)
    mu = len(experts)
    if mu < 2:
        raise ValueError("need at least two expert demonstrations")
    if cfg.max_demos <= mu:
        raise ValueError(f"max_demos ({cfg.max_demos}) must exceed the expert count ({mu})")
    if cfg.selection == GENERALIZATION:
        if not validation_demos:
            raise ValueError("generalization selection requires validation demonstrations")
        scored = list(validation_demos)
    else:
        scored = experts

    limits = cfg.limits
    if limits is None and cfg.method != NOISE:
        limits = limits_from_situations([d.situation for d in experts], cfg.expansion)

    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    init_seed = cfg.seed if cfg.init_seed is None else cfg.init_seed
    model = fit(experts, cfg.n_components, replace(cfg.em, seed=init_seed))
    cost = selection_cost(model, scored).mean
    initial_cost = cost
    log.info("initial cost %.6g with %d demos", cost, mu)

    dataset = list(experts)
    records = []
    it = 0
    # stop as soon as either bound is reached
    while len(dataset) < cfg.max_demos and it < cfg.max_iters:
        cand = synthesize(cfg.method, experts, model, limits, rng, cfg.snr_db)
        trial = dataset + [cand]
        try:
            new_model = fit(trial, cfg.n_components, replace(cfg.em, seed=_fit_seed(cfg.seed, it)))
            new_cost = selection_cost(new_model, scored).mean
        except (NumericError, ValueError) as exc:
            # a degenerate candidate counts as a rejection
            log.warning("iter %d: candidate discarded (%s)", it, exc)
            new_model, new_cost = None, math.inf
        accepted = new_cost < cost
        if accepted:
            dataset, model = trial, new_model
        records.append(IterationRecord(it, cfg.method, accepted, cost, new_cost, len(dataset)))
        log.debug("iter %d: %.6g -> %.6g %s", it, cost, new_cost, "accept" if accepted else "reject")
        if accepted:
            cost = new_cost
        it += 1

    runlog = RunLog(tuple(records), initial_cost, cost,
                    sum(not r.accepted for r in records), cfg.method, cfg.selection,
                    metrics.RMS if model.mode == TIME_BASED else metrics.DTW)
    return model, dataset, runlog
