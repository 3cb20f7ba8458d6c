"""Persistence of datasets, models, situations and run logs; scripted demo tasks.

Container format
----------------
Every artifact is UTF-8 JSON carrying ``"format": "tpgmm-aug"``, an integer
``"version"`` (currently 1) and a ``"kind"``:

``dataset``    ``mode`` ("time" | "trajectory"), ``p``, ``n_frames`` and
               ``demos``: a list of ``{"frames": [...], "inputs": [[...]],
               "outputs": [[...]]}``.  ``inputs``/``outputs`` are row-major
               T x d arrays (time in seconds or positions; positions or
               per-sample displacements).
``situation``  ``frames`` only.
``model``      ``mode``, ``input_dim``, ``weights`` (K), ``means`` (N x K x D),
               ``covs`` (N x K x D x D).

A frame is ``{"rotation": [p*p numbers, row-major], "translation": [p numbers]}``.
Rotations are validated on load (orthonormal, det +1, tolerance 1e-9).

Run logs are line-delimited JSON: a header object (``kind`` "runlog",
``method``, ``selection``, ``cost_kind``, ``dtw_step_pattern``,
``initial_cost``, ``final_cost``, ``discarded_count``, ``n_iterations``)
followed by one object per iteration with ``iter``, ``method``,
``accepted``, ``cost_before``, ``cost_after``, ``n_demos``.

Floats are written with ``repr`` precision, so load(save(x)) is bit-exact.
Files are written to a temporary sibling and renamed into place.

Generated tasks
---------------
``generate_2d_task``: start frame fixed at the origin; goal origin uniform in
the 2 x 2 box centred on (2.5, 0), goal orientation uniform in +-60 deg.
Each path leaves the start along its local +y and enters the goal along the
goal's local -y (a U-shaped box open towards +y), following a cubic Hermite
curve with a minimum-jerk time law and a small seeded bump that vanishes
with its slope at both ends.

``generate_3d_task``: trajectory-based, two frames (start, goal), each with
a varied origin and yaw/pitch/roll; the path leaves the start along local +x,
passes a via point fixed in the start frame and arrives at the goal
travelling along the goal's local +x.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .augment import IterationRecord, RunLog
from .errors import DimensionError, FrameValidityError, ParseError, VersionError
from .frames import MODES, TIME_BASED, TRAJECTORY_BASED, Frame, euler_to_rotation, to_global
from .tpgmm import Demonstration, Situation, TpGmm

FORMAT = "tpgmm-aug"
VERSION = 1


@dataclass(frozen=True)
class DatasetFile:
    mode: str
    p: int
    n_frames: int
    demos: tuple
    version: int = VERSION

    def __post_init__(self):
        demos = tuple(self.demos)
        for d in demos:
            if d.mode != self.mode or d.situation.dim != self.p or d.situation.n_frames != self.n_frames:
                raise ValueError("all demonstrations must share mode, p and frame count")
        object.__setattr__(self, "demos", demos)

    @classmethod
    def from_demos(cls, demos):
        demos = tuple(demos)
        if not demos:
            raise ValueError("empty dataset")
        d0 = demos[0]
        return cls(d0.mode, d0.situation.dim, d0.situation.n_frames, demos)

    def __len__(self):
        return len(self.demos)

    def __eq__(self, other):
        if not isinstance(other, DatasetFile):
            return NotImplemented
        return (self.mode == other.mode and self.p == other.p and self.n_frames == other.n_frames
                and len(self.demos) == len(other.demos)
                and all(demos_equal(a, b) for a, b in zip(self.demos, other.demos)))


def demos_equal(a: Demonstration, b: Demonstration) -> bool:
    return (a.mode == b.mode and a.situation == b.situation
            and np.array_equal(a.inputs, b.inputs) and np.array_equal(a.outputs, b.outputs))


def models_equal(a: TpGmm, b: TpGmm) -> bool:
    return (a.mode == b.mode and a.input_dim == b.input_dim
            and np.array_equal(a.weights, b.weights) and np.array_equal(a.means, b.means)
            and np.array_equal(a.covs, b.covs))


# -- encoding ---------------------------------------------------------------

def _frame_obj(f: Frame):
    return {"rotation": f.rotation.ravel().tolist(), "translation": f.translation.tolist()}


def _header(kind):
    return {"format": FORMAT, "version": VERSION, "kind": kind}


def _demo_obj(d: Demonstration):
    return {"frames": [_frame_obj(f) for f in d.situation],
            "inputs": d.inputs.tolist(), "outputs": d.outputs.tolist()}


def encode(obj) -> str:
    if isinstance(obj, DatasetFile):
        doc = _header("dataset")
        doc.update(mode=obj.mode, p=obj.p, n_frames=obj.n_frames,
                   demos=[_demo_obj(d) for d in obj.demos])
    elif isinstance(obj, TpGmm):
        doc = _header("model")
        doc.update(mode=obj.mode, input_dim=obj.input_dim, weights=obj.weights.tolist(),
                   means=obj.means.tolist(), covs=obj.covs.tolist())
    elif isinstance(obj, Situation):
        doc = _header("situation")
        doc["frames"] = [_frame_obj(f) for f in obj]
    elif isinstance(obj, RunLog):
        return _encode_runlog(obj)
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")
    return json.dumps(doc) + "\n"


def _encode_runlog(rl: RunLog) -> str:
    head = _header("runlog")
    head.update(method=rl.method, selection=rl.selection, cost_kind=rl.cost_kind,
                dtw_step_pattern=rl.dtw_step_pattern, initial_cost=rl.initial_cost,
                final_cost=rl.final_cost, discarded_count=rl.discarded_count,
                n_iterations=len(rl.iterations))
    lines = [json.dumps(head)]
    for r in rl.iterations:
        lines.append(json.dumps({"iter": r.iter, "method": r.method, "accepted": r.accepted,
                                 "cost_before": r.cost_before, "cost_after": r.cost_after,
                                 "n_demos": r.n_demos}))
    return "\n".join(lines) + "\n"


def save(obj, path) -> None:
    """Write ``obj`` atomically (temporary file + rename)."""
    text = encode(obj)
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- decoding ---------------------------------------------------------------

def _get(doc, key, where):
    if not isinstance(doc, dict):
        raise ParseError(where, "expected an object")
    if key not in doc:
        raise ParseError(f"{where}.{key}" if where else key, "missing")
    return doc[key]


def _array(value, field, ndim=None, shape=None):
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(field, f"not a numeric array ({exc})") from None
    if a.dtype == object or (ndim is not None and a.ndim != ndim):
        raise ParseError(field, f"expected a {ndim}-d numeric array")
    if shape is not None and a.shape != shape:
        raise ParseError(field, f"expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParseError(field, "contains non-finite values")
    return a


def _int(value, field):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(field, "expected an integer")
    return value


def _mode(value, field):
    if value not in MODES:
        raise ParseError(field, f"unknown mode {value!r}")
    return value


def _check_header(doc, where=""):
    if not isinstance(doc, dict):
        raise ParseError("document", "expected a JSON object")
    fmt = _get(doc, "format", where)
    if fmt != FORMAT:
        raise ParseError("format", f"expected {FORMAT!r}, got {fmt!r}")
    version = _get(doc, "version", where)
    if isinstance(version, bool) or not isinstance(version, int) or version != VERSION:
        raise VersionError(f"unsupported format version {version!r} (supported: {VERSION})")
    return _get(doc, "kind", where)


def _frame(obj, where, p=None):
    rot = _array(_get(obj, "rotation", where), f"{where}.rotation", ndim=1)
    if rot.size not in (4, 9):
        raise ParseError(f"{where}.rotation", f"expected 4 or 9 numbers, got {rot.size}")
    q = 2 if rot.size == 4 else 3
    if p is not None and q != p:
        raise ParseError(f"{where}.rotation", f"expected a {p}x{p} rotation")
    b = _array(_get(obj, "translation", where), f"{where}.translation", ndim=1, shape=(q,))
    try:
        return Frame(rot.reshape(q, q), b)
    except FrameValidityError as exc:
        raise FrameValidityError(f"{where}: {exc}") from None


def _frames(value, where, p=None, n=None):
    if not isinstance(value, list) or not value:
        raise ParseError(where, "expected a non-empty list of frames")
    if n is not None and len(value) != n:
        raise ParseError(where, f"expected {n} frames, got {len(value)}")
    return Situation(tuple(_frame(f, f"{where}[{i}]", p) for i, f in enumerate(value)))


def _decode_dataset(doc):
    mode = _mode(_get(doc, "mode", ""), "mode")
    p = _int(_get(doc, "p", ""), "p")
    if p not in (2, 3):
        raise ParseError("p", f"expected 2 or 3, got {p}")
    n_frames = _int(_get(doc, "n_frames", ""), "n_frames")
    raw = _get(doc, "demos", "")
    if not isinstance(raw, list) or not raw:
        raise ParseError("demos", "expected a non-empty list")
    demos = []
    for i, d in enumerate(raw):
        where = f"demos[{i}]"
        sit = _frames(_get(d, "frames", where), f"{where}.frames", p, n_frames)
        X = _array(_get(d, "inputs", where), f"{where}.inputs", ndim=2)
        Y = _array(_get(d, "outputs", where), f"{where}.outputs", ndim=2)
        try:
            demos.append(Demonstration(X, Y, sit, mode))
        except (ValueError, DimensionError) as exc:
            raise ParseError(where, str(exc)) from None
    return DatasetFile(mode, p, n_frames, tuple(demos))


def _decode_model(doc):
    mode = _mode(_get(doc, "mode", ""), "mode")
    input_dim = _int(_get(doc, "input_dim", ""), "input_dim")
    w = _array(_get(doc, "weights", ""), "weights", ndim=1)
    mu = _array(_get(doc, "means", ""), "means", ndim=3)
    S = _array(_get(doc, "covs", ""), "covs", ndim=4)
    try:
        return TpGmm(mode, w, mu, S, input_dim)
    except (ValueError, DimensionError) as exc:
        raise ParseError("model", str(exc)) from None


def _decode_runlog(head, lines):
    def num(v, field):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(field, "expected a number")
        return float(v)

    n = _int(_get(head, "n_iterations", ""), "n_iterations")
    if len(lines) != n:
        raise ParseError("n_iterations", f"header says {n}, file has {len(lines)} records")
    records = []
    for i, line in enumerate(lines):
        where = f"iterations[{i}]"
        try:
            r = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(where, f"invalid JSON ({exc.msg})") from None
        accepted = _get(r, "accepted", where)
        if not isinstance(accepted, bool):
            raise ParseError(f"{where}.accepted", "expected a boolean")
        records.append(IterationRecord(
            _int(_get(r, "iter", where), f"{where}.iter"), str(_get(r, "method", where)), accepted,
            num(_get(r, "cost_before", where), f"{where}.cost_before"),
            num(_get(r, "cost_after", where), f"{where}.cost_after"),
            _int(_get(r, "n_demos", where), f"{where}.n_demos")))
    return RunLog(tuple(records), num(_get(head, "initial_cost", ""), "initial_cost"),
                  num(_get(head, "final_cost", ""), "final_cost"),
                  _int(_get(head, "discarded_count", ""), "discarded_count"),
                  str(_get(head, "method", "")), str(_get(head, "selection", "")),
                  str(_get(head, "cost_kind", "")), str(_get(head, "dtw_step_pattern", "")))


def decode(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("document", "empty file")
    try:
        first = json.loads(lines[0])
    except json.JSONDecodeError:
        first = None
    if isinstance(first, dict) and first.get("kind") == "runlog":
        _check_header(first)
        return _decode_runlog(first, lines[1:])
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("document", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    kind = _check_header(doc)
    if kind == "dataset":
        return _decode_dataset(doc)
    if kind == "model":
        return _decode_model(doc)
    if kind == "situation":
        return _frames(_get(doc, "frames", ""), "frames")
    raise ParseError("kind", f"unknown kind {kind!r}")


def load(path, expect=None):
    """Read any artifact; ``expect`` optionally pins the returned type."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    obj = decode(text)
    if expect is not None and not isinstance(obj, expect):
        raise ParseError("kind", f"expected {expect.__name__}, file holds {type(obj).__name__}")
    return obj


# -- scripted tasks ---------------------------------------------------------

GOAL_BOX_CENTER = np.array([2.5, 0.0])
GOAL_BOX_HALF = 1.0
GOAL_MAX_ANGLE = np.pi / 3
TANGENT_2D = 3.0
JITTER_2D = 0.05
DURATION_2D = 1.0


def _hermite(s, p0, m0, p1, m1):
    s = s[:, None]
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1


def _bump(s, amp):
    # zero value and slope at s = 0 and s = 1
    return (16.0 * s**2 * (1 - s) ** 2)[:, None] * amp


def _min_jerk(tau):
    return 10 * tau**3 - 15 * tau**4 + 6 * tau**5


def generate_2d_task(n_situations: int, samples_per_demo: int, seed: int) -> DatasetFile:
    """Time-based 2D start-to-goal task with two frames (start, goal)."""
    if n_situations < 2 or samples_per_demo < 20:
        raise ValueError("need n_situations >= 2 and samples_per_demo >= 20")
    rng = np.random.default_rng(seed)
    times = np.linspace(0.0, DURATION_2D, samples_per_demo)
    s = _min_jerk(times / DURATION_2D)
    start = Frame.identity(2)
    demos = []
    for _ in range(n_situations):
        angle = rng.uniform(-GOAL_MAX_ANGLE, GOAL_MAX_ANGLE)
        origin = GOAL_BOX_CENTER + rng.uniform(-GOAL_BOX_HALF, GOAL_BOX_HALF, size=2)
        goal = Frame(euler_to_rotation([angle]), origin)
        amp = rng.normal(0.0, JITTER_2D, size=(2, 2))
        m0 = TANGENT_2D * start.rotation[:, 1]
        m1 = -TANGENT_2D * goal.rotation[:, 1]
        x = _hermite(s, start.translation, m0, goal.translation, m1)
        x += _bump(s, amp[0]) + _bump(s, amp[1] * (2 * s[:, None] - 1))
        x[0], x[-1] = start.translation, goal.translation
        demos.append(Demonstration(times, x, Situation((start, goal)), TIME_BASED))
    return DatasetFile(TIME_BASED, 2, 2, tuple(demos))


START_3D_CENTER = np.zeros(3)
START_3D_HALF = np.array([0.3, 0.3, 0.2])
GOAL_3D_CENTER = np.array([2.0, 1.0, 0.6])
GOAL_3D_HALF = np.array([0.3, 0.3, 0.2])
ANGLES_3D_HALF = np.array([np.pi / 4, np.pi / 12, np.pi / 12])
VIA_3D_LOCAL = np.array([1.0, 0.0, 0.4])
TANGENT_3D = 1.5
JITTER_3D = 0.05


def generate_3d_task(n_situations: int, samples_per_demo: int, seed: int) -> DatasetFile:
    """Trajectory-based 3D task with two frames (start, goal).

    The path runs along the start frame's local +x to a via point fixed in
    that frame (``VIA_3D_LOCAL``), then on to the goal, arriving along the
    goal's local +x; half the samples cover each leg.
    """
    if n_situations < 2 or samples_per_demo < 20:
        raise ValueError("need n_situations >= 2 and samples_per_demo >= 20")
    rng = np.random.default_rng(seed)
    T = samples_per_demo
    half = T // 2
    s1 = np.linspace(0.0, 1.0, half + 1)
    s2 = np.linspace(0.0, 1.0, T - half)
    demos = []
    for _ in range(n_situations):
        frames = []
        for center, box in ((START_3D_CENTER, START_3D_HALF), (GOAL_3D_CENTER, GOAL_3D_HALF)):
            ang = rng.uniform(-ANGLES_3D_HALF, ANGLES_3D_HALF)
            frames.append(Frame(euler_to_rotation(ang), center + rng.uniform(-box, box)))
        start, goal = frames
        via = to_global(start, VIA_3D_LOCAL)
        m_start = TANGENT_3D * start.rotation[:, 0]
        m_via = 0.5 * (goal.translation - via + m_start)
        first = _hermite(s1, start.translation, m_start, via, m_via)
        second = _hermite(s2, via, m_via, goal.translation, TANGENT_3D * goal.rotation[:, 0])
        x = np.vstack([first[:-1], second])
        x += _bump(np.linspace(0.0, 1.0, T), rng.normal(0.0, JITTER_3D, size=3))
        demos.append(Demonstration.from_positions(x, Situation(tuple(frames))))
    return DatasetFile(TRAJECTORY_BASED, 3, 2, tuple(demos))
