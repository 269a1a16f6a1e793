"""Experiment orchestration: replicated trials, per-cell statistics, sweeps and reports.

A *cell* is one :class:`ExperimentConfig` (target, optimizer, layer count,
mode, shots, step size) replicated ``trials`` times. Each trial draws its own
random start from a seed stream derived from ``(base_seed, trial_index)``, so
results do not depend on execution order or on the number of workers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .ansatz import PARAMS_PER_LAYER, AnsatzConfig
from .objective import DEFAULT_SHOTS, Objective, ObjectiveConfig
from .optimizers import GRADIENT_BASED, OptimizerSpec, minimize
from .targets import TargetSpec

__all__ = [
    "ExperimentConfig",
    "TrialResult",
    "CellFailed",
    "TrialAborted",
    "AGGREGATE_COLUMNS",
    "TRACE_COLUMNS",
    "initial_params",
    "run_trial",
    "run_cell",
    "aggregate",
    "expand_grid",
    "run_sweep",
    "emit_report",
    "read_aggregate",
    "read_trials",
    "write_aggregate",
    "step_shot_grid",
]

log = logging.getLogger(__name__)

DEFAULT_FD_STEP = {"ideal": 0.03, "sampled": 0.08}

AGGREGATE_COLUMNS = [
    "cell_id", "target", "optimizer", "layers", "mode", "shots", "fd_step", "trials",
    "infidelity_mean", "infidelity_std", "objective_mean", "objective_std",
    "nfev_mean", "nfev_std", "total_evals_mean", "nonconverged_pct",
]
TRACE_COLUMNS = ["iteration", "objective", "true_infidelity"]


class TrialAborted(RuntimeError):
    """An optimizer run failed; carries the trial that raised."""

    def __init__(self, message, cfg=None, trial_index=None):
        super().__init__(message)
        self.cfg = cfg
        self.trial_index = trial_index


class CellFailed(RuntimeError):
    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark cell.

    Random starts draw displacement parts from ``disp_range`` and angles from
    ``angle_range``. A trial counts as converged when its ideal re-evaluated
    infidelity is at most ``convergence_threshold``. ``x0`` pins the start
    (all trials) and is meant for tests.
    """

    target: TargetSpec
    optimizer: OptimizerSpec
    layers: int = 1
    mode: str = "ideal"
    shots: int = DEFAULT_SHOTS
    trials: int = 30
    base_seed: int = 0
    disp_range: tuple = (-1.0, 1.0)
    angle_range: tuple = (0.0, 2 * math.pi)
    convergence_threshold: float = 0.1
    clamp_floor: float = 0.5
    initial_qubit: int = 0
    record_trace: bool = False
    x0: tuple | None = None

    def __post_init__(self):
        if isinstance(self.target, (str, dict)):
            object.__setattr__(self, "target", TargetSpec.from_dict(self.target))
        if isinstance(self.optimizer, str):
            object.__setattr__(self, "optimizer", OptimizerSpec(self.optimizer))
        elif isinstance(self.optimizer, dict):
            object.__setattr__(self, "optimizer", OptimizerSpec(**self.optimizer))
        if self.mode not in ("ideal", "sampled"):
            raise ValueError(f"mode must be 'ideal' or 'sampled', got {self.mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if not 0.0 < self.convergence_threshold < 1.0:
            raise ValueError("convergence_threshold must lie in (0, 1)")
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode needs shots >= 1")
        object.__setattr__(self, "disp_range", tuple(map(float, self.disp_range)))
        object.__setattr__(self, "angle_range", tuple(map(float, self.angle_range)))
        if self.x0 is not None:
            x0 = tuple(float(v) for v in self.x0)
            if len(x0) != PARAMS_PER_LAYER * self.layers:
                raise ValueError("x0 has the wrong length for the layer count")
            object.__setattr__(self, "x0", x0)

    @property
    def fd_step(self) -> float | None:
        if self.optimizer.kind not in GRADIENT_BASED:
            return None
        if self.optimizer.fd_step is not None:
            return self.optimizer.fd_step
        return DEFAULT_FD_STEP[self.mode]

    @property
    def effective_shots(self) -> int:
        return self.shots if self.mode == "sampled" else 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["target"] = self.target.to_dict()
        d["optimizer"] = self.optimizer.to_dict()
        d["disp_range"] = list(self.disp_range)
        d["angle_range"] = list(self.angle_range)
        d["x0"] = list(self.x0) if self.x0 is not None else None
        return d

    @classmethod
    def from_dict(cls, d) -> "ExperimentConfig":
        d = dict(d)
        d["target"] = TargetSpec.from_dict(d["target"])
        opt = d["optimizer"]
        d["optimizer"] = OptimizerSpec(**opt) if isinstance(opt, dict) else OptimizerSpec(opt)
        if d.get("x0") is not None:
            d["x0"] = tuple(d["x0"])
        return cls(**d)

    @property
    def cell_id(self) -> str:
        """Stable digest of everything that determines the cell's results."""
        d = self.to_dict()
        d["shots"] = self.effective_shots
        d["fd_step"] = self.fd_step
        d.pop("record_trace")
        blob = json.dumps(d, sort_keys=True, default=str)
        return hashlib.sha1(blob.encode()).hexdigest()[:16]

    def objective_config(self) -> ObjectiveConfig:
        ansatz = AnsatzConfig(self.layers, self.target.cutoff, initial_qubit=self.initial_qubit)
        return ObjectiveConfig(
            ansatz=ansatz,
            target=self.target.resolve(),
            mode=self.mode,
            shots=self.shots,
            clamp_floor=self.clamp_floor,
        )


@dataclass
class TrialResult:
    cell_id: str
    trial_index: int
    seed: int
    final_params: list
    final_objective: float
    final_true_infidelity: float
    nfev: int
    grad_probe_evals: int
    total_evals: int
    iterations: int
    termination_reason: str
    converged: bool
    wall_time: float
    trace: list | None = None
    optimizer_meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "TrialResult":
        return cls(**d)


def trial_seed(base_seed: int, trial_index: int) -> int:
    """64-bit seed of the child stream ``(base_seed, trial_index)``."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(trial_index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def initial_params(cfg: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    lo_d, hi_d = cfg.disp_range
    lo_a, hi_a = cfg.angle_range
    rows = [np.concatenate([rng.uniform(lo_d, hi_d, 2), rng.uniform(lo_a, hi_a, 3)])
            for _ in range(cfg.layers)]
    return np.concatenate(rows)


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialResult:
    """Run one replicate; fully determined by ``(cfg, trial_index)``."""
    seed = trial_seed(cfg.base_seed, trial_index)
    init_ss, sample_ss, opt_ss = np.random.SeedSequence(seed).spawn(3)
    x0 = np.array(cfg.x0) if cfg.x0 is not None else initial_params(cfg, np.random.default_rng(init_ss))
    obj = Objective(cfg.objective_config(), rng=np.random.default_rng(sample_ss))
    spec = cfg.optimizer
    if spec.kind in GRADIENT_BASED:
        spec = replace(spec, fd_step=cfg.fd_step)

    trace = [] if cfg.record_trace else None

    def callback(iteration, x, fx):
        trace.append([iteration, float(fx), obj.true_infidelity(x)])

    start = time.perf_counter()
    try:
        res = minimize(obj, x0, spec, rng=np.random.default_rng(opt_ss),
                       callback=callback if trace is not None else None)
    except Exception as exc:
        raise TrialAborted(
            f"trial {trial_index} of cell {cfg.cell_id} ({cfg.optimizer.kind}, {cfg.layers} layers) "
            f"aborted: {exc}", cfg, trial_index,
        ) from exc
    wall = time.perf_counter() - start
    if res.total_evals != len(obj.log):
        raise AssertionError("evaluation accounting mismatch")
    true_inf = obj.true_infidelity(res.best_params)
    return TrialResult(
        cell_id=cfg.cell_id,
        trial_index=trial_index,
        seed=seed,
        final_params=[float(v) for v in res.best_params],
        final_objective=float(res.best_objective),
        final_true_infidelity=float(true_inf),
        nfev=int(res.nfev),
        grad_probe_evals=int(res.grad_probe_evals),
        total_evals=int(res.total_evals),
        iterations=int(res.iterations),
        termination_reason=res.termination_reason.value,
        converged=bool(true_inf <= cfg.convergence_threshold),
        wall_time=wall,
        trace=trace,
        optimizer_meta=_jsonable(res.spec),
    )


def _jsonable(obj):
    return json.loads(json.dumps(obj, default=lambda o: o.item() if hasattr(o, "item") else str(o)))


def _run_job(job):
    cfg, idx = job
    return run_trial(cfg, idx)


def _sample_std(values) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def aggregate(cfg: ExperimentConfig, trials) -> dict:
    """Statistics over the given trials, folded in ``trial_index`` order."""
    trials = sorted(trials, key=lambda t: t.trial_index)
    inf = [t.final_true_infidelity for t in trials]
    objv = [t.final_objective for t in trials]
    nfev = [t.nfev for t in trials]
    total = [t.total_evals for t in trials]
    nonconv = sum(v > cfg.convergence_threshold for v in inf)
    return {
        "cell_id": cfg.cell_id,
        "target": cfg.target.label,
        "optimizer": cfg.optimizer.kind,
        "layers": cfg.layers,
        "mode": cfg.mode,
        "shots": cfg.effective_shots,
        "fd_step": cfg.fd_step,
        "trials": len(trials),
        "infidelity_mean": float(np.mean(inf)),
        "infidelity_std": _sample_std(inf),
        "objective_mean": float(np.mean(objv)),
        "objective_std": _sample_std(objv),
        "nfev_mean": float(np.mean(nfev)),
        "nfev_std": _sample_std(nfev),
        "total_evals_mean": float(np.mean(total)),
        "nonconverged_pct": 100.0 * nonconv / len(trials),
    }


def run_cell(cfg: ExperimentConfig, parallelism: int = 1, executor=None, done=()):
    """Run every trial of a cell and aggregate.

    ``done`` holds trials already available (e.g. from an archive); only the
    missing indices are run. Returns ``(row, trials)``. A trial failure
    raises :class:`CellFailed` whose ``partial`` lists the finished trials.
    """
    have = {t.trial_index: t for t in done if t.cell_id == cfg.cell_id}
    todo = [(cfg, i) for i in range(cfg.trials) if i not in have]
    finished = list(have.values())
    failure = None
    own_pool = None
    if executor is None and parallelism > 1 and len(todo) > 1:
        executor = own_pool = ProcessPoolExecutor(max_workers=parallelism)
    try:
        if executor is None:
            for job in todo:
                try:
                    finished.append(_run_job(job))
                except TrialAborted as exc:
                    # keep going so the archive holds every trial that can finish
                    failure = failure or exc
        else:
            futures = [executor.submit(_run_job, job) for job in todo]
            for fut in futures:
                try:
                    finished.append(fut.result())
                except TrialAborted as exc:
                    failure = failure or exc
    finally:
        if own_pool is not None:
            own_pool.shutdown()
    finished.sort(key=lambda t: t.trial_index)
    if failure is not None:
        raise CellFailed(str(failure), finished) from failure
    return aggregate(cfg, finished), finished


# ---------------------------------------------------------------- persistence


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_aggregate(rows, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in AGGREGATE_COLUMNS])
    _atomic_write(Path(path), buf.getvalue())


def read_aggregate(path) -> list[dict]:
    ints = {"layers", "shots", "trials"}
    strs = {"cell_id", "target", "optimizer", "mode"}
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for k, v in rec.items():
                if k in strs:
                    row[k] = v
                elif k in ints:
                    row[k] = int(v)
                else:
                    row[k] = float(v) if v != "" else None
            rows.append(row)
    return rows


def append_trials(trials, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as fh:
        for t in trials:
            fh.write(t.to_json() + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def read_trials(path) -> list[TrialResult]:
    """Load a JSON-lines archive; a truncated final line (interrupted write) is ignored."""
    out = []
    path = Path(path)
    if not path.exists():
        return out
    lines = path.read_text().splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            out.append(TrialResult.from_dict(json.loads(line)))
        except (json.JSONDecodeError, TypeError):
            if i == len(lines) - 1:
                log.warning("ignoring truncated trailing record in %s", path)
                continue
            raise
    return out


# ---------------------------------------------------------------- sweeps


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def expand_grid(grid: dict) -> list[ExperimentConfig]:
    """Cartesian product of a sweep description.

    Recognized keys: ``targets``, ``optimizers``, ``layers``, ``modes``,
    ``shots``, ``fd_steps`` (lists or scalars) plus scalar settings
    ``trials``, ``base_seed``, ``cutoff``, ``threshold``, ``record_trace``,
    ``clamp_floor``, ``disp_range``, ``angle_range``, ``initial_qubit``.
    Shots only vary sampled cells and step sizes only gradient optimizers;
    duplicate cells are dropped.
    """
    targets = _as_list(grid.get("targets", grid.get("target", "local_gaussian")))
    optimizers = _as_list(grid.get("optimizers", grid.get("optimizer", "powell")))
    layers = _as_list(grid.get("layers", 1))
    modes = _as_list(grid.get("modes", grid.get("mode", "ideal")))
    shots = _as_list(grid.get("shots", DEFAULT_SHOTS))
    fd_steps = _as_list(grid.get("fd_steps", grid.get("fd_step", None)))
    common = {
        "trials": int(grid.get("trials", 30)),
        "base_seed": int(grid.get("base_seed", grid.get("seed", 0))),
        "convergence_threshold": float(grid.get("threshold", 0.1)),
        "record_trace": bool(grid.get("record_trace", False)),
        "clamp_floor": float(grid.get("clamp_floor", 0.5)),
        "initial_qubit": int(grid.get("initial_qubit", 0)),
    }
    if "disp_range" in grid:
        common["disp_range"] = tuple(grid["disp_range"])
    if "angle_range" in grid:
        common["angle_range"] = tuple(grid["angle_range"])
    cutoff = grid.get("cutoff")

    configs, seen = [], set()
    for tgt, opt, nl, mode, sh, h in itertools.product(targets, optimizers, layers, modes, shots, fd_steps):
        tspec = TargetSpec.from_dict(tgt)
        if cutoff is not None and not (isinstance(tgt, dict) and "cutoff" in tgt):
            tspec = replace(tspec, cutoff=int(cutoff))
        ospec = OptimizerSpec(opt) if isinstance(opt, str) else OptimizerSpec(**opt)
        if h is not None and ospec.kind in GRADIENT_BASED and ospec.fd_step is None:
            ospec = replace(ospec, fd_step=float(h))
        cfg = ExperimentConfig(target=tspec, optimizer=ospec, layers=int(nl), mode=mode,
                               shots=int(sh), **common)
        if cfg.cell_id in seen:
            continue
        seen.add(cfg.cell_id)
        configs.append(cfg)
    return configs


def step_shot_grid(trials=200, base_seed=0, layers=1, target="local_gaussian") -> list[ExperimentConfig]:
    """L-BFGS sampled cells over shots 1024..8192 (step 1024) x step sizes {0.03, 0.05, 0.08}."""
    return expand_grid({
        "targets": [target], "optimizers": ["lbfgs"], "layers": [layers], "modes": ["sampled"],
        "shots": list(range(1024, 8193, 1024)), "fd_steps": [0.03, 0.05, 0.08],
        "trials": trials, "base_seed": base_seed,
    })


def run_sweep(configs, out_dir, parallelism: int = 1, resume: bool = False, on_cell=None):
    """Run every cell, writing ``aggregate.csv`` and ``trials.jsonl`` under ``out_dir``.

    With ``resume`` the existing archive is reused and only missing trials
    are run; otherwise an existing archive is replaced. The aggregate is
    rewritten atomically after each cell. Returns ``(rows, trials)``.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("empty sweep grid")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    archive = out_dir / "trials.jsonl"
    agg_path = out_dir / "aggregate.csv"
    if resume:
        existing = read_trials(archive)
        # rewrite so a truncated tail does not linger
        _atomic_write(archive, "".join(t.to_json() + "\n" for t in existing))
    else:
        existing = []
        if archive.exists():
            archive.unlink()
    by_cell: dict[str, list] = {}
    for t in existing:
        by_cell.setdefault(t.cell_id, []).append(t)

    rows, all_trials = [], []
    executor = ProcessPoolExecutor(max_workers=parallelism) if parallelism > 1 else None
    try:
        for cfg in configs:
            done = {t.trial_index: t for t in by_cell.get(cfg.cell_id, []) if t.trial_index < cfg.trials}
            n_before = len(done)
            try:
                row, trials = run_cell(cfg, parallelism, executor, done=done.values())
            except CellFailed as exc:
                append_trials([t for t in exc.partial if t.trial_index not in done], archive)
                write_aggregate(rows, agg_path)
                raise
            fresh = [t for t in trials if t.trial_index not in done]
            append_trials(fresh, archive)
            rows.append(row)
            all_trials.extend(trials)
            write_aggregate(rows, agg_path)
            log.info("cell %s done (%d new trials, %d reused)", cfg.cell_id, len(fresh), n_before)
            if on_cell is not None:
                on_cell(cfg, row)
    finally:
        if executor is not None:
            executor.shutdown()
    return rows, all_trials


# ---------------------------------------------------------------- reports

_TABLE_COLUMNS = [
    ("layers", "layers"), ("optimizer", "method"), ("shots", "shots"), ("fd_step", "step"),
    ("infidelity_mean", "infidelity_mean"), ("infidelity_std", "infidelity_std"),
    ("nfev_mean", "nfev_mean"), ("nfev_std", "nfev_std"),
    ("objective_mean", "visible_objective_mean"), ("nonconverged_pct", "non_converged(%)"),
    ("total_evals_mean", "total_evals_mean"),
]


def _cell_text(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def markdown_table(rows) -> str:
    head = [h for _, h in _TABLE_COLUMNS]
    body = [[_cell_text(r.get(k)) for k, _ in _TABLE_COLUMNS] for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(head)]
    fmt = lambda cells: "| " + " | ".join(c.rjust(w) for c, w in zip(cells, widths)) + " |"
    lines = [fmt(head), "|" + "|".join("-" * (w + 1) + ":" for w in widths) + "|"]
    lines += [fmt(b) for b in body]
    return "\n".join(lines) + "\n"


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in text).strip("_")


def mean_trace(trials) -> list[list]:
    """Average per-iteration traces across trials, carrying each trace's last value forward."""
    traces = [t.trace for t in trials if t.trace]
    if not traces:
        return []
    length = max(len(tr) for tr in traces)
    arr = np.empty((len(traces), length, 2))
    for i, tr in enumerate(traces):
        a = np.asarray(tr, dtype=float)[:, 1:]
        arr[i, : len(a)] = a
        arr[i, len(a):] = a[-1]
    m = arr.mean(axis=0)
    return [[k + 1, float(m[k, 0]), float(m[k, 1])] for k in range(length)]


def write_trace_csv(trace, path) -> None:
    lines = [",".join(TRACE_COLUMNS)]
    lines += [f"{int(it)},{obj!r},{inf!r}" for it, obj, inf in trace]
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def emit_report(rows, trials, out_dir) -> list[Path]:
    """Write ``tables/<target>__<mode>.md`` and ``traces/<cell_id>.csv`` under ``out_dir``.

    ``infidelity_*`` columns are ideal re-evaluations of the final
    parameters; ``visible_objective_mean`` is the optimizer's own final value
    (the noisy figure in sampled mode).
    """
    rows = list(rows)
    if not rows:
        raise ValueError("nothing to report: the table is empty")
    out_dir = Path(out_dir)
    written = []
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r["target"], r["mode"]), []).append(r)
    for (target, mode), grp in groups.items():
        grp = sorted(grp, key=lambda r: (r["optimizer"], r["layers"], r["shots"], r["fd_step"] or 0.0))
        title = f"# {target}, {mode} simulation\n\n"
        path = out_dir / "tables" / f"{_slug(target)}__{mode}.md"
        _atomic_write(path, title + markdown_table(grp))
        written.append(path)
    by_cell: dict[str, list] = {}
    for t in trials:
        by_cell.setdefault(t.cell_id, []).append(t)
    for r in rows:
        trace = mean_trace(by_cell.get(r["cell_id"], []))
        if trace:
            path = out_dir / "traces" / f"{r['cell_id']}.csv"
            write_trace_csv(trace, path)
            written.append(path)
    return written
