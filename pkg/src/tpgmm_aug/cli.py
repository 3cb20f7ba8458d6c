"""Command-line front end.

Exit codes: 0 success, 2 bad arguments, 3 unreadable or invalid data,
4 numeric failure.  Any nonzero exit prints one line to stderr.
Log verbosity comes from ``TPGMM_AUG_LOG`` (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset, experiments, metrics
from .augment import METHODS, RF_NOISE, SELECTIONS, AugmentConfig, run_algorithm1
from .errors import DimensionError, FormatError, FrameValidityError, NumericError
from .frames import MODES, TIME_BASED
from .gmm import EmConfig
from .tpgmm import Situation, TpGmm, fit, reproduce_demo, reproduce_time_based, reproduce_trajectory_based

LOG_ENV = "TPGMM_AUG_LOG"

OK, USAGE, DATA, NUMERIC = 0, 2, 3, 4

log = logging.getLogger("tpgmm_aug")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _method(text):
    # accept the hyphenated spelling on the command line
    name = text.replace("-", "_")
    if name not in METHODS:
        raise argparse.ArgumentTypeError(f"invalid method {text!r}")
    return name


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _floats(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text):
    """``a:b:n`` for n evenly spaced times, or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}")
        try:
            return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    return _floats(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tpgmm-aug", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="fit a TP-GMM to a dataset")
    t.add_argument("--data", required=True)
    t.add_argument("--components", type=_positive, required=True)
    t.add_argument("--mode", choices=MODES, help="must match the dataset's mode")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)

    a = sub.add_parser("augment", help="improve a model with synthetic demonstrations")
    a.add_argument("--data", required=True)
    a.add_argument("--validation")
    a.add_argument("--method", type=_method, default="rf", help="noise | rf | rf-noise")
    a.add_argument("--max-demos", type=_positive, default=8)
    a.add_argument("--max-iters", type=_positive, default=50)
    a.add_argument("--snr-db", type=float, default=30.0)
    a.add_argument("--selection", choices=SELECTIONS, default="original")
    a.add_argument("--components", type=_positive, default=8)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    a.add_argument("--log", help="run log (line-delimited JSON)")
    a.add_argument("--dataset-out", help="also save the final dataset")

    r = sub.add_parser("reproduce", help="generate a trajectory in a new situation")
    r.add_argument("--model", required=True)
    r.add_argument("--situation", required=True)
    g = r.add_mutually_exclusive_group()
    g.add_argument("--times", type=_grid, help="start:stop:count or t1,t2,...")
    g.add_argument("--start", type=_floats, help="start position x1,x2,...")
    r.add_argument("--steps", type=_positive)
    r.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="reproduction cost of a model on a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--cost", choices=(metrics.RMS, metrics.DTW))

    s = sub.add_parser("simulate", help="batch of seeded 2D augmentation experiments")
    s.add_argument("--runs", type=_positive, default=20)
    s.add_argument("--method", type=_method, action="append",
                   help="repeatable; default: all methods")
    s.add_argument("--selection", choices=SELECTIONS, action="append",
                   help="repeatable; default: both")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--components", type=_positive, default=8)
    s.add_argument("--max-demos", type=_positive, default=8)
    s.add_argument("--max-iters", type=_positive, default=50)
    s.add_argument("--snr-db", type=float, default=30.0)
    s.add_argument("--samples", type=_positive, default=100)
    s.add_argument("--jobs", type=_positive, default=1)
    s.add_argument("--out", required=True)

    d = sub.add_parser("gen2d", help="write the scripted 2D dataset")
    d.add_argument("--situations", type=_positive, required=True)
    d.add_argument("--samples", type=_positive, required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    return p


def _load_demos(path):
    return dataset.load(path, expect=dataset.DatasetFile).demos


def _train(args):
    data = dataset.load(args.data, expect=dataset.DatasetFile)
    if args.mode is not None and args.mode != data.mode:
        raise UsageError(f"--mode {args.mode} but {args.data} holds {data.mode} data")
    model = fit(data.demos, args.components, EmConfig(seed=args.seed))
    dataset.save(model, args.out)
    log.info("trained %d components on %d demos", args.components, len(data.demos))


def _augment(args):
    demos = _load_demos(args.data)
    val = _load_demos(args.validation) if args.validation else None
    cfg = AugmentConfig(method=args.method, max_demos=args.max_demos, max_iters=args.max_iters,
                        snr_db=args.snr_db, selection=args.selection,
                        n_components=args.components, seed=args.seed)
    model, final, runlog = run_algorithm1(demos, val, cfg)
    dataset.save(model, args.out)
    if args.log:
        dataset.save(runlog, args.log)
    if args.dataset_out:
        dataset.save(dataset.DatasetFile.from_demos(final), args.dataset_out)
    log.info("cost %.6g -> %.6g, %d demos", runlog.initial_cost, runlog.final_cost, len(final))


def _reproduce(args):
    model = dataset.load(args.model, expect=TpGmm)
    frames = dataset.load(args.situation)
    sit = frames if isinstance(frames, Situation) else Situation(tuple(frames))
    if model.mode == TIME_BASED:
        if args.times is None:
            raise UsageError("time-based models need --times")
        traj = reproduce_time_based(model, sit, args.times)
        cols = ["t"] + [f"x{i + 1}" for i in range(model.p)]
        table = np.column_stack([args.times, traj])
    else:
        if args.start is None or args.steps is None:
            raise UsageError("trajectory-based models need --start and --steps")
        table = reproduce_trajectory_based(model, sit, args.start, args.steps)
        cols = [f"x{i + 1}" for i in range(model.p)]
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in table:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _eval(args):
    model = dataset.load(args.model, expect=TpGmm)
    demos = _load_demos(args.data)
    kind = args.cost or (metrics.RMS if model.mode == TIME_BASED else metrics.DTW)
    report = metrics.cost(kind, [reproduce_demo(model, d) for d in demos],
                          [d.positions for d in demos])
    sys.stdout.write(report.to_text())


def _simulate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    methods = tuple(dict.fromkeys(args.method)) if args.method else METHODS
    selections = tuple(dict.fromkeys(args.selection)) if args.selection else SELECTIONS
    res = experiments.simulate(runs=args.runs, methods=methods, selections=selections,
                               seed=args.seed, samples=args.samples,
                               n_components=args.components, max_demos=args.max_demos,
                               max_iters=args.max_iters, snr_db=args.snr_db, jobs=args.jobs)
    table = experiments.format_cost_table(experiments.cost_table(res))
    (out / "cost_table.csv").write_text(table, encoding="utf-8")
    (out / "runs.csv").write_text(experiments.format_runs(res), encoding="utf-8")
    (out / "trajectories.csv").write_text(experiments.format_trajectories(res), encoding="utf-8")
    experiments.plot_reproductions(res, out / "reproductions.svg")
    sys.stdout.write(table)


def _gen2d(args):
    dataset.save(dataset.generate_2d_task(args.situations, args.samples, args.seed), args.out)


COMMANDS = {"train": _train, "augment": _augment, "reproduce": _reproduce, "eval": _eval,
            "simulate": _simulate, "gen2d": _gen2d}


def _configure_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(code, msg):
    sys.stderr.write("tpgmm-aug: " + " ".join(str(msg).split()) + "\n")
    return code


def run_command(argv=None) -> int:
    _configure_logging()
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(USAGE, exc)
    except (FormatError, FrameValidityError, DimensionError, OSError) as exc:
        return _fail(DATA, exc)
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail(NUMERIC, exc)
    except ValueError as exc:
        # inconsistent option values caught by the library (e.g. max-demos too small)
        return _fail(USAGE, exc)
    return OK


def main():
    sys.exit(run_command())
