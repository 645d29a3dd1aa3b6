"""Seeded Monte Carlo experiments.

Every trial draws its randomness from ``RngStream(master_seed,
(experiment_id, trial_index, ...))`` so results do not depend on how trials
are distributed over worker processes.  Rows are always reduced in trial
order.

Within a trial all methods share the same scenario and training data
(paired design).  Sketch matrices come from the substream
``(..., OMEGA, method_code, r)``.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .gsc import assemble_full_filter, clairvoyant_filter, mn_filter, reduced_weights
from .linalg import ConvergenceError, RankDeficientError, top_left_singular_vectors
from .metrics import LossSample, snr_loss
from .reducers import (
    METHOD_CODES,
    Method,
    Psi,
    ReducerSpec,
    clairvoyant_psi,
    make_column_select_sketch,
    make_gaussian_sketch,
    sketch_psi,
)
from .scenario import (
    DATA,
    OMEGA,
    CovarianceModel,
    RngStream,
    ScenarioSpec,
    SoIBasis,
    make_covariance_model,
    sample_training,
    split_channels,
)

log = logging.getLogger(__name__)

EXPERIMENT_IDS = {
    "single": 0,
    "omega-study": 1,
    "distribution": 2,
    "sweep-r": 3,
    "sweep-k": 4,
}

METHOD_ORDER = {m: i for i, m in enumerate(Method)}

# failures that skip a trial instead of aborting the batch
TRIAL_ERRORS = (RankDeficientError, ConvergenceError)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    methods: tuple = ()
    trials: int = 2000
    inner_realizations: int = 100
    redraw_scenario_per_trial: bool = True
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.inner_realizations < 1:
            raise ValueError("inner_realizations must be >= 1")
        if not self.methods:
            raise ValueError("at least one method is required")
        object.__setattr__(self, "methods", tuple(
            m if isinstance(m, ReducerSpec) else ReducerSpec(*m) for m in self.methods))


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    method: str
    n: int
    j: int
    k: int
    r: int
    theta_deg: float
    sweep_value: int
    trial_index: int
    loss: float
    loss_db: float
    seed: int


@dataclass(frozen=True)
class Aggregate:
    experiment: str
    method: str
    sweep_value: int
    mean_loss: float
    mean_loss_db: float
    stderr_loss: float
    count: int


@dataclass
class ExperimentResult:
    experiment: str
    rows: list
    aggregates: list
    skipped: dict
    max_distortion: float = 0.0
    elapsed: float = 0.0

    def mean(self, method, sweep_value=None):
        for a in self.aggregates:
            if a.method == str(method) and (sweep_value is None or a.sweep_value == sweep_value):
                return a
        raise KeyError((method, sweep_value))

    def losses(self, method, sweep_value=None, db=False):
        """Per-trial losses for one (method, sweep value), in trial order."""
        attr = "loss_db" if db else "loss"
        return np.array([getattr(r, attr) for r in self.rows
                         if r.method == str(method) and (sweep_value is None or r.sweep_value == sweep_value)])


def aggregate_rows(experiment, rows) -> list:
    groups: dict = {}
    for row in rows:
        groups.setdefault((row.method, row.sweep_value), []).append(row)
    out = []
    for (method, sweep_value), members in groups.items():
        loss = np.array([m.loss for m in members])
        loss_db = np.array([m.loss_db for m in members])
        n = loss.size
        stderr = float(np.std(loss, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        out.append(Aggregate(experiment, method, sweep_value, float(np.mean(loss)),
                             float(np.mean(loss_db)), stderr, n))
    return out


def _sort_rows(rows):
    return sorted(rows, key=lambda r: (METHOD_ORDER[Method(r.method)], r.sweep_value, r.trial_index))


class _PCBasis:
    """Leading left singular vectors of one Z, computed once and sliced per R."""

    def __init__(self, z, r_max):
        self.z = z
        try:
            self.u = top_left_singular_vectors(z, r_max)
        except RankDeficientError:
            self.u = None

    def psi(self, r):
        if self.u is None:
            u = top_left_singular_vectors(self.z, r)
        else:
            u = self.u[:, :r]
        return Psi(psi=u, spec=ReducerSpec(Method.PC, r))


def _filter_for(spec: ReducerSpec, model, soi, z, d, rng: RngStream, pc: Optional[_PCBasis]):
    method = spec.method
    if method is Method.MN:
        return mn_filter(soi, z, d)
    if method is Method.CLAIRVOYANT:
        return clairvoyant_filter(model, soi, clairvoyant_psi(model, soi))
    k = z.shape[1]
    if method is Method.PC:
        psi = pc.psi(spec.r) if pc is not None else _PCBasis(z, spec.r).psi(spec.r)
    else:
        sub = rng.child(OMEGA, METHOD_CODES[method], spec.r)
        if method is Method.GAUSSIAN:
            sketch = make_gaussian_sketch(k, spec.r, sub)
        else:
            sketch = make_column_select_sketch(k, spec.r, sub)
        psi = sketch_psi(z, sketch, spec)
    return assemble_full_filter(soi, psi, reduced_weights(z, psi, d))


def _evaluate(spec, model, soi, z, d, rng, pc=None):
    """(loss, loss_db, |w^T v - 1|) for one method on one data set."""
    f = _filter_for(spec, model, soi, z, d, rng, pc)
    loss, loss_db = snr_loss(f, soi.v, model)
    return loss, loss_db, abs(float(f.w @ soi.v) - 1.0)


def run_trial(model: CovarianceModel, soi: SoIBasis, spec: ReducerSpec, k: int,
              rng: RngStream, trial_index: int = 1) -> LossSample:
    """One Monte Carlo trial for a fixed scenario realization.

    Draws K training samples from ``rng.child(DATA)`` and the sketch (if
    any) from ``rng.child(OMEGA, ...)``.
    """
    data = split_channels(soi, sample_training(model, k, rng.child(DATA)))
    loss, loss_db, _ = _evaluate(spec, model, soi, data.z, data.d, rng)
    r = spec.r if spec.r is not None else (k if spec.method is Method.MN else model.lam.size)
    return LossSample(loss=loss, loss_db=loss_db, method=spec, trial_index=trial_index, r=r, k=k)


@dataclass(frozen=True)
class _Plan:
    experiment: str
    config: ExperimentConfig
    sweep: str  # "none", "r" or "k"
    sweep_values: tuple = ()
    control: bool = True


def _scenario_for(config: ExperimentConfig, exp_id: int, index: int):
    if config.redraw_scenario_per_trial:
        return make_covariance_model(config.scenario, RngStream(config.master_seed, (exp_id, index)))
    return make_covariance_model(config.scenario, RngStream(config.master_seed, (exp_id,)))


def _mc_trial(plan: _Plan, t: int):
    """Rows, skip counts and max distortion for Monte Carlo trial ``t``."""
    cfg = plan.config
    spec = cfg.scenario
    exp_id = EXPERIMENT_IDS[plan.experiment]
    base = RngStream(cfg.master_seed, (exp_id, t))
    model, soi = _scenario_for(cfg, exp_id, t)
    rows, skipped, worst = [], {}, 0.0

    def emit(mspec, k, r, sweep_value, z, d, pc):
        nonlocal worst
        try:
            loss, loss_db, dist = _evaluate(mspec, model, soi, z, d, base, pc)
        except TRIAL_ERRORS as exc:
            log.debug("trial %d %s skipped: %s", t, mspec.method, exc)
            skipped[str(mspec.method)] = skipped.get(str(mspec.method), 0) + 1
            return
        worst = max(worst, dist)
        rows.append(ResultRow(plan.experiment, str(mspec.method), spec.n, spec.j, k, r,
                              spec.theta_deg, sweep_value, t, loss, loss_db, cfg.master_seed))

    swept = [m for m in cfg.methods if m.method is not Method.CLAIRVOYANT]
    if plan.sweep == "k":
        k_max = max(plan.sweep_values)
        x_full = sample_training(model, k_max, base.child(DATA))
        for k in plan.sweep_values:
            data = split_channels(soi, x_full[:, :k])
            r_pc = max((m.r for m in swept if m.method is Method.PC), default=0)
            pc = _PCBasis(data.z, r_pc) if r_pc else None
            for m in swept:
                r = k if m.method is Method.MN else m.r
                emit(m, k, r, k, data.z, data.d, pc)
    else:
        k = spec.k
        data = split_channels(soi, sample_training(model, k, base.child(DATA)))
        if plan.sweep == "r":
            r_values = plan.sweep_values
        else:
            r_values = (None,)
        plain = _plain_sweep(cfg, k)
        pc_r = [rv if rv is not None else m.r for m in swept if m.method is Method.PC for rv in r_values]
        pc = _PCBasis(data.z, max(pc_r)) if pc_r else None
        for m in swept:
            if m.method is Method.MN:
                emit(m, k, k, 0 if plan.sweep == "r" else plain, data.z, data.d, pc)
                continue
            for rv in r_values:
                mspec = m if rv is None else replace(m, r=rv)
                emit(mspec, k, mspec.r, plain if rv is None else rv, data.z, data.d, pc)
    if plan.control or any(m.method is Method.CLAIRVOYANT for m in cfg.methods):
        emit(ReducerSpec(Method.CLAIRVOYANT, spec.j), spec.k, spec.j,
             0 if plan.sweep != "none" else _plain_sweep(cfg, spec.k), None, None, None)
    return rows, skipped, worst


def _plain_sweep(cfg: ExperimentConfig, k):
    """Sweep value for unswept runs: the configured R (K if only MN is run)."""
    rs = [m.r for m in cfg.methods if m.r is not None and m.method is not Method.CLAIRVOYANT]
    return rs[0] if rs else k


def _omega_trial(plan: _Plan, i: int):
    """Per-Omega mean loss for Omega index ``i`` (1-based)."""
    cfg = plan.config
    spec = cfg.scenario
    exp_id = EXPERIMENT_IDS[plan.experiment]
    gauss, select = cfg.methods
    mspec = gauss if i <= cfg.trials else select
    model, soi = _scenario_for(cfg, exp_id, i)
    base = RngStream(cfg.master_seed, (exp_id, i))
    sub = base.child(OMEGA)
    if mspec.method is Method.GAUSSIAN:
        sketch = make_gaussian_sketch(spec.k, mspec.r, sub)
    else:
        sketch = make_column_select_sketch(spec.k, mspec.r, sub)
    losses, skipped, worst = [], {}, 0.0
    for j in range(1, cfg.inner_realizations + 1):
        data = split_channels(soi, sample_training(model, spec.k, base.child(DATA, j)))
        try:
            psi = sketch_psi(data.z, sketch, mspec)
            f = assemble_full_filter(soi, psi, reduced_weights(data.z, psi, data.d))
        except TRIAL_ERRORS:
            skipped[str(mspec.method)] = skipped.get(str(mspec.method), 0) + 1
            continue
        worst = max(worst, abs(float(f.w @ soi.v) - 1.0))
        losses.append(snr_loss(f, soi.v, model)[0])
    rows = []
    if losses:
        mean = float(np.mean(losses))
        rows.append(ResultRow(plan.experiment, str(mspec.method), spec.n, spec.j, spec.k, mspec.r,
                              spec.theta_deg, mspec.r, i, mean, 10.0 * np.log10(mean),
                              cfg.master_seed))
    return rows, skipped, worst


def _run_block(args):
    plan, indices = args
    fn = _omega_trial if plan.experiment == "omega-study" else _mc_trial
    return [fn(plan, t) for t in indices]


def _execute(plan: _Plan, n_units: int) -> ExperimentResult:
    start = time.perf_counter()
    indices = list(range(1, n_units + 1))
    workers = max(1, int(plan.config.workers))
    if workers == 1:
        outputs = _run_block((plan, indices))
    else:
        size = max(1, -(-len(indices) // (4 * workers)))
        blocks = [(plan, indices[i:i + size]) for i in range(0, len(indices), size)]
        outputs = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_run_block, blocks):
                outputs.extend(out)
    rows, skipped, worst = [], {}, 0.0
    for r, s, w in outputs:
        rows.extend(r)
        worst = max(worst, w)
        for key, val in s.items():
            skipped[key] = skipped.get(key, 0) + val
    rows = _sort_rows(rows)
    return ExperimentResult(plan.experiment, rows, aggregate_rows(plan.experiment, rows), skipped,
                            max_distortion=worst, elapsed=time.perf_counter() - start)


def single(config: ExperimentConfig) -> ExperimentResult:
    """Plain Monte Carlo over ``config.trials`` trials, methods as given (no control row)."""
    return _execute(_Plan("single", config, "none", control=False), config.trials)


def omega_study(config: ExperimentConfig) -> ExperimentResult:
    """Average loss for each of ``2 * trials`` fixed sketch matrices.

    The first ``trials`` matrices are Gaussian, the next ``trials`` select
    columns.  One scenario (Sigma, v) is shared unless
    ``redraw_scenario_per_trial`` is set; each Omega is averaged over
    ``inner_realizations`` fresh training sets.
    """
    kinds = [m.method for m in config.methods]
    if kinds != [Method.GAUSSIAN, Method.SELECT]:
        raise ValueError("omega_study needs methods [gaussian, select]")
    return _execute(_Plan("omega-study", config, "none", control=False), 2 * config.trials)


def loss_distribution(config: ExperimentConfig) -> ExperimentResult:
    """Per-trial losses of every method, with a clairvoyant control row."""
    return _execute(_Plan("distribution", config, "none"), config.trials)


def sweep_r(config: ExperimentConfig, r_values: Sequence[int]) -> ExperimentResult:
    """Mean loss versus R.  MN and the control are R-independent (sweep_value 0)."""
    k = config.scenario.k
    r_values = tuple(int(r) for r in r_values)
    if not r_values or min(r_values) < 1 or max(r_values) > k:
        raise ValueError(f"r_values must lie in [1, K={k}]")
    return _execute(_Plan("sweep-r", config, "r", r_values), config.trials)


def sweep_k(config: ExperimentConfig, k_values: Sequence[int]) -> ExperimentResult:
    """Mean loss versus K at fixed R.

    Training sets are nested: the K-sample set is the first K columns of
    one draw of max(k_values) columns.
    """
    spec = config.scenario
    k_values = tuple(int(k) for k in k_values)
    rs = [m.r for m in config.methods if m.r is not None and m.method is not Method.CLAIRVOYANT]
    low = max([spec.j] + rs)
    if not k_values or min(k_values) < low or max(k_values) > spec.n - 1:
        raise ValueError(f"k_values must lie in [{low}, {spec.n - 1}]")
    return _execute(_Plan("sweep-k", config, "k", k_values), config.trials)
