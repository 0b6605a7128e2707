"""
runner.py - Mode orchestration for sweeps

Every mode is broken into cells; a cell is a list of independent tasks (one
per run) plus a finalize step that turns the ordered task results into the
cell's stored payload. Tasks run inline or on a process pool; outputs are
always assembled from the store in cell order.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ..core.analysis import (
    EnsembleSeries,
    ensemble_average,
    extract_egr,
    linear_trend,
    steady_state_value,
    tanh_fit,
)
from ..core.decoupling import (
    MAX_RECORD_BITS,
    DecouplingSetup,
    ScanRow,
    fit_decay_slopes,
    multi_round_error,
    scan_cell,
)
from ..core.errors import ExtractionError, FeasibilityError
from ..core.seeding import derive_seed, make_generator
from ..core.syk_model import build_hamiltonian, sample_couplings, save_couplings
from ..core.trajectory import (
    MAX_RATE_STEP,
    InitialState,
    Observable,
    TrajectoryConfig,
    run_trajectory,
)
from .config import SweepGrid
from .store import CellResult, ResultStore

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ("t", "mean", "std_batch")

# dynamics observable name -> (observable, initial state)
_DYNAMICS = {
    "entanglement": (Observable.HALF_CHAIN_ENTROPY, InitialState.ALL_UP),
    "purification": (Observable.PURITY, InitialState.MAXIMALLY_MIXED),
}


@dataclass(frozen=True)
class TrajectoryTask:
    """One run: draw a realization, diagonalize it, simulate one trajectory"""

    cell_key: str
    run_index: int
    n_majoranas: int
    j_strength: float
    coupling_seed: int
    config: TrajectoryConfig
    observable: Observable
    keep_events: bool = False

    def run(self):
        couplings = sample_couplings(self.n_majoranas, self.j_strength, self.coupling_seed)
        record = run_trajectory(build_hamiltonian(couplings), self.config, (self.observable,))
        if not self.keep_events:
            record = replace(record, events=())
        return record


@dataclass(frozen=True)
class DecouplingTask:
    """Haar average of one (n, gamma, p) decoupling cell"""

    cell_key: str
    run_index: int
    setup: DecouplingSetup
    seed: int
    rounds: int = 1

    def run(self):
        mean, stderr = scan_cell(self.setup, self.seed)
        result = {"mean_eps": mean, "stderr_eps": stderr}
        if self.rounds > 1:
            rng = make_generator(derive_seed(self.seed, "rounds", self.rounds))
            errors = [multi_round_error(self.setup, self.rounds, rng)
                      for _ in range(self.setup.n_haar_samples)]
            result["k_round_eps"] = float(np.mean(errors))
        return result


@dataclass
class CellPlan:
    key: str
    kind: str
    tasks: list
    finalize: Callable


def _run_task(task):
    return task.cell_key, task.run_index, task.run()


def _execute(tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            yield _run_task(task)
        return
    failure = None
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_task, task) for task in tasks]
        try:
            for future in as_completed(futures):
                if future.cancelled():
                    continue
                error = future.exception()
                if error is None:
                    yield future.result()
                elif failure is None:
                    # drop queued tasks, keep what is already running
                    failure = error
                    logger.error("task failed, cancelling queued tasks: %s", error)
                    for other in futures:
                        other.cancel()
        finally:
            for other in futures:
                other.cancel()
    if failure is not None:
        raise failure


def complete_cells(store, plans, workers=1):
    """
    Run every unfinished cell and store its payload

    Args:
        store (ResultStore): Loaded result store
        plans (list): CellPlans in output order
        workers (int): Worker processes (1 runs inline)

    Returns:
        list: Payloads in plan order
    """
    pending = [plan for plan in plans if not store.has(plan.key)]
    if len(pending) < len(plans):
        logger.info("%d of %d cells already finished", len(plans) - len(pending), len(plans))
    by_key = {plan.key: plan for plan in pending}
    buckets = {plan.key: {} for plan in pending}
    tasks = [task for plan in pending for task in plan.tasks]

    for key, run_index, value in _execute(tasks, workers):
        bucket = buckets[key]
        bucket[run_index] = value
        plan = by_key[key]
        if len(bucket) == len(plan.tasks):
            ordered = [bucket[i] for i in sorted(bucket)]
            store.put(CellResult(key, plan.kind, plan.finalize(ordered)))
            del buckets[key]
            logger.info("cell %s finished", key)
    return [store.get(plan.key).payload for plan in plans]


def _trajectory_tasks(cfg, key, labels, n, j, runs, observable, initial, gamma_m, p_m,
                      t_max, record_interval, dt=None, coupling_labels=None, keep_events=False):
    tasks = []
    for run in range(runs):
        seed = derive_seed(cfg.seed, *labels, run, "trajectory")
        coupling_seed = derive_seed(cfg.seed, *(coupling_labels or labels), run, "couplings")
        traj = TrajectoryConfig(
            t_max=t_max, gamma_m=gamma_m, p_m=p_m, dt=dt or cfg.dt,
            record_interval=record_interval, initial=initial, seed=seed,
        )
        tasks.append(TrajectoryTask(key, run, n, j, coupling_seed, traj, observable, keep_events))
    return tasks


def _series_finalize(n_batches, observable):
    def finalize(records):
        return ensemble_average(records, n_batches, observable.series_key).to_dict()
    return finalize


def _cell_dt(cfg, gamma_m, label):
    if gamma_m * cfg.dt <= MAX_RATE_STEP:
        return cfg.dt
    dt = MAX_RATE_STEP / gamma_m
    logger.warning("%s: Gamma_m=%.4g needs dt=%.4g instead of %.4g", label, gamma_m, dt, cfg.dt)
    return dt


def _series_rows(payload):
    series = EnsembleSeries.from_dict(payload)
    return zip(series.t, series.mean, series.std_batch)


def calibrate(cfg, store, workers=1):
    """
    Gamma_egr for the configured (N, J), from an unmonitored calibration pass

    Uses --gamma-egr when given. The pass is stored as a cell so an
    interrupted sweep does not repeat it.
    """
    if cfg.gamma_egr is not None:
        logger.info("using Gamma_egr = %.6g from the configuration", cfg.gamma_egr)
        return cfg.gamma_egr
    n, j = cfg.n_majoranas[0], cfg.j[0]
    labels = ("calibration", n, j)
    tasks = _trajectory_tasks(
        cfg, f"calibration/N{n}/J{j:g}", labels, n, j, cfg.calibration_runs,
        Observable.HALF_CHAIN_ENTROPY, InitialState.ALL_UP, 0.0, 0.0,
        cfg.calibration_t_max, cfg.calibration_record_interval,
    )

    def finalize(records):
        series = ensemble_average(records, 1)
        egr = extract_egr(series.t, series.mean)
        return {"gamma_egr": egr.gamma_egr, "s_inf": egr.s_inf,
                "t_quarter": egr.t_quarter, "t_three_quarter": egr.t_three_quarter}

    payload, = complete_cells(store, [CellPlan(tasks[0].cell_key, "calibration", tasks, finalize)],
                              workers)
    logger.info("calibrated Gamma_egr = %.6g (N=%d, J=%g, s_inf=%.4g)",
                payload["gamma_egr"], n, j, payload["s_inf"])
    return payload["gamma_egr"]


def _run_growth(cfg, store, workers, with_rates):
    mode = "egr" if with_rates else "growth"
    observable = Observable.HALF_CHAIN_ENTROPY
    combos = [(n, j) for n in cfg.n_majoranas for j in cfg.j]
    plans = []
    for n, j in combos:
        key = f"{mode}/N{n}/J{j:g}"
        tasks = _trajectory_tasks(cfg, key, (mode, n, j), n, j, cfg.runs, observable,
                                  InitialState.ALL_UP, 0.0, 0.0, cfg.t_max, cfg.record_interval)
        finalize = _series_finalize(cfg.batches, observable)
        if with_rates:
            finalize = _with_egr(finalize, key)
        plans.append(CellPlan(key, mode, tasks, finalize))

    payloads = complete_cells(store, plans, workers)
    paths = [
        store.write_csv(f"growth_N{n}_J{j:g}.csv", SERIES_COLUMNS, _series_rows(payload),
                        {"n_majoranas": n, "j": j})
        for (n, j), payload in zip(combos, payloads)
    ]
    if with_rates:
        rows = [(n, j, p["gamma_egr"], p["s_inf"], p["t_quarter"], p["t_three_quarter"])
                for (n, j), p in zip(combos, payloads)]
        paths.append(store.write_csv(
            "egr.csv",
            ("n_majoranas", "j", "gamma_egr", "s_inf", "t_quarter", "t_three_quarter"),
            rows,
        ))
    return paths


def _with_egr(finalize, key):
    def finalize_with_egr(records):
        payload = finalize(records)
        try:
            egr = extract_egr(payload["t"], payload["mean"])
            payload.update(gamma_egr=egr.gamma_egr, s_inf=egr.s_inf,
                           t_quarter=egr.t_quarter, t_three_quarter=egr.t_three_quarter)
        except ExtractionError as e:
            logger.warning("%s: %s", key, e)
            payload.update(gamma_egr=None, s_inf=None, t_quarter=None, t_three_quarter=None)
        return payload
    return finalize_with_egr


def _grid_plans(cfg, grid, egr, label, observable, initial, finalize_for):
    n, j = cfg.n_majoranas[0], cfg.j[0]
    plans = []
    for i, jj, ratio, p_m in grid.cells():
        key = f"{label}/{i}/{jj}"
        gamma_m = ratio * egr
        tasks = _trajectory_tasks(
            cfg, key, (label, i, jj), n, j, grid.runs_per_cell, observable, initial,
            gamma_m, p_m, cfg.t_max, cfg.record_interval, dt=_cell_dt(cfg, gamma_m, key),
        )
        plans.append(CellPlan(key, label, tasks, finalize_for(gamma_m)))
    return plans


def _run_dynamics(cfg, store, workers):
    egr = calibrate(cfg, store, workers)
    names = list(_DYNAMICS) if cfg.observable == "both" else [cfg.observable]
    grids, plans = {}, []
    for name in names:
        observable, initial = _DYNAMICS[name]
        grids[name] = SweepGrid(cfg.gamma_ratio, cfg.p_m, cfg.runs, name)
        plans.extend(_grid_plans(
            cfg, grids[name], egr, f"dynamics-{name}", observable, initial,
            lambda gamma_m, o=observable: _series_finalize(cfg.batches, o),
        ))
    payloads = iter(complete_cells(store, plans, workers))

    paths = []
    for name in names:
        for i, jj, ratio, p_m in grids[name].cells():
            paths.append(store.write_csv(
                f"dynamics_{name}_g{i}_p{jj}.csv", SERIES_COLUMNS, _series_rows(next(payloads)),
                {"gamma_egr": egr, "gamma_ratio": ratio, "p_m": p_m, "gamma_m": ratio * egr},
            ))
    return paths


def _run_phase(cfg, store, workers, name):
    egr = calibrate(cfg, store, workers)
    observable, initial = _DYNAMICS[name]
    grid = SweepGrid(cfg.gamma_ratio, cfg.p_m, cfg.runs, name)

    def finalize_for(gamma_m):
        def finalize(records):
            series = ensemble_average(records, cfg.batches, observable.series_key)
            return {
                "gamma_m": gamma_m,
                "steady_value": steady_state_value(series.t, series.mean, cfg.t_inf),
                "stderr": steady_state_value(series.t, series.stderr, cfg.t_inf),
            }
        return finalize

    plans = _grid_plans(cfg, grid, egr, f"phase-{name}", observable, initial, finalize_for)
    payloads = complete_cells(store, plans, workers)
    rows = [(ratio, p_m, p["steady_value"], p["stderr"])
            for (_, _, ratio, p_m), p in zip(grid.cells(), payloads)]
    return [store.write_csv(
        f"phase_{name}.csv", ("gamma_ratio", "p_m", "steady_value", "stderr"), rows,
        {"gamma_egr": egr, "t_inf": cfg.t_inf},
    )]


def _run_rate_fit(cfg, store, workers):
    egr = calibrate(cfg, store, workers)
    observable, initial = _DYNAMICS["purification"]
    grid = SweepGrid(cfg.gamma_ratio, cfg.p_m, cfg.runs, "purification")
    dim = 2 ** (cfg.n_majoranas[0] // 2)

    def finalize_for(gamma_m):
        def finalize(records):
            series = ensemble_average(records, cfg.batches, observable.series_key)
            fit = tanh_fit(series.t, series.mean, dim, gamma_m=gamma_m)
            payload = fit.to_dict()
            payload["gamma_m"] = gamma_m
            return payload
        return finalize

    plans = _grid_plans(cfg, grid, egr, "rate-fit", observable, initial, finalize_for)
    payloads = complete_cells(store, plans, workers)
    cells = list(zip(grid.cells(), payloads))
    rows = [(ratio, p_m, p["lambda"], p["r_squared"]) for (_, _, ratio, p_m), p in cells]
    paths = [store.write_csv(
        "rate_fit.csv", ("gamma_ratio", "p_m", "lambda", "r_squared"), rows,
        {"gamma_egr": egr},
    )]

    trends = []
    for jj, p_m in enumerate(grid.p_m_axis):
        points = [(p["gamma_m"], p["lambda"]) for (_, k, _, _), p in cells if k == jj]
        if len(points) < 2:
            continue
        trend = linear_trend(*zip(*points))
        trends.append({"p_m": p_m, "slope": trend.slope, "intercept": trend.intercept,
                       "r_squared": trend.r_squared})
    paths.append(store.write_json("rate_trend.json", {"trends": trends}, {"gamma_egr": egr}))
    return paths


def _run_trace(cfg, store, workers):
    egr = calibrate(cfg, store, workers)
    n, j = cfg.n_majoranas[0], cfg.j[0]
    gamma_m, p_m = cfg.gamma_ratio[0] * egr, cfg.p_m[0]
    dt = _cell_dt(cfg, gamma_m, "trace")
    starts = (
        (InitialState.ALL_UP, Observable.HALF_CHAIN_ENTROPY),
        (InitialState.MAXIMALLY_MIXED, Observable.PURITY),
    )
    plans = []
    for run in range(cfg.runs):
        for initial, observable in starts:
            key = f"trace/{initial.value}/{run}"
            task, = _trajectory_tasks(
                cfg, key, ("trace", initial.value, run), n, j, 1, observable, initial,
                gamma_m, p_m, cfg.t_max, cfg.record_interval, dt=dt,
                coupling_labels=("trace", run), keep_events=True,
            )
            plans.append(CellPlan(key, "trace", [task], lambda records: records[0].to_dict()))
    payloads = iter(complete_cells(store, plans, workers))

    paths = []
    extra = {"gamma_egr": egr, "gamma_m": gamma_m}
    for run in range(cfg.runs):
        # both starts of a run share one realization
        coupling_seed = plans[2 * run].tasks[0].coupling_seed
        couplings_path = os.path.join(store.out_dir, f"couplings_{run}.json")
        save_couplings(sample_couplings(n, j, coupling_seed), couplings_path)
        paths.append(couplings_path)
        for initial, _ in starts:
            paths.append(store.write_json(
                f"trace_{initial.value}_{run}.json", {"record": next(payloads)}, extra,
            ))
    return paths


def _run_decoupling(cfg, store, workers):
    setups = []
    for gamma in cfg.gamma_frac:
        for p_meas in cfg.p_meas:
            for n in cfg.n_system:
                setup = DecouplingSetup(n, gamma, p_meas, cfg.haar_samples)
                if setup.n_measured * cfg.rounds > MAX_RECORD_BITS:
                    raise FeasibilityError(
                        f"n={n}, p={p_meas}: {setup.n_measured * cfg.rounds} recorded bits "
                        f"over {cfg.rounds} rounds exceeds {MAX_RECORD_BITS}"
                    )
                setups.append(setup)

    plans = []
    for setup in setups:
        key = f"decoupling/n{setup.n_system}/g{setup.gamma:g}/p{setup.p_meas:g}"
        seed = derive_seed(cfg.seed, "decoupling", setup.n_system, setup.gamma, setup.p_meas)
        task = DecouplingTask(key, 0, setup, seed, cfg.rounds)
        plans.append(CellPlan(key, "decoupling", [task], lambda results: results[0]))
    payloads = complete_cells(store, plans, workers)

    rows = fit_decay_slopes([
        ScanRow(s.n_system, s.gamma, s.p_meas, p["mean_eps"], p["stderr_eps"])
        for s, p in zip(setups, payloads)
    ])
    columns = ["n_system", "gamma", "p_meas", "mean_eps", "stderr_eps", "slope"]
    table = [[r.n_system, r.gamma, r.p_meas, r.mean_eps, r.stderr_eps,
              r.slope if r.slope_defined else None] for r in rows]
    if cfg.rounds > 1:
        columns.append("k_round_eps")
        for line, payload in zip(table, payloads):
            line.append(payload["k_round_eps"])
    return [store.write_csv("decoupling.csv", columns, table, {"rounds": cfg.rounds})]


_MODES = {
    "growth": lambda cfg, store, workers: _run_growth(cfg, store, workers, False),
    "egr": lambda cfg, store, workers: _run_growth(cfg, store, workers, True),
    "dynamics": _run_dynamics,
    "phase-entanglement": lambda cfg, store, workers: _run_phase(cfg, store, workers, "entanglement"),
    "phase-purification": lambda cfg, store, workers: _run_phase(cfg, store, workers, "purification"),
    "rate-fit": _run_rate_fit,
    "trace": _run_trace,
    "decoupling": _run_decoupling,
}


def run_mode(cfg):
    """
    Execute the configured mode and write its outputs

    Args:
        cfg (SweepConfig): Resolved configuration

    Returns:
        list: Paths of the written output files
    """
    store = ResultStore(cfg.out, cfg.run_document(), cfg.seed).load()
    logger.info("mode %s started (seed %d, %d workers)", cfg.mode, cfg.seed, cfg.workers)
    paths = _MODES[cfg.mode](cfg, store, cfg.workers)
    logger.info("mode %s finished: %d output files in %s", cfg.mode, len(paths), cfg.out)
    return paths
