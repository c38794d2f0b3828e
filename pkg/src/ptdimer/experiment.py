"""Run a configured experiment and write its time series as CSV."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from .config import ExperimentConfig
from .errors import SimulationError
from .exact import BlockDensityMatrix, evolve_exact
from .meanfield import gpe_evolve
from .observables import MomentSeries
from .trajectories import TrajectoryConfig, run_ensemble, sample_grid

log = logging.getLogger(__name__)

COLUMNS = ("t", "n1", "n2", "n_total", "re_m12", "im_m12", "purity", "contrast", "imbalance")
COMPARED = ("n1", "n2", "n_total", "purity", "contrast", "imbalance")
# exact blocks scale like n_max^3; compare mode only runs the exact solver this far
COMPARE_EXACT_MAX_N0 = 20


class OutputError(SimulationError, OSError):
    category = "io"


def series_columns(series: MomentSeries) -> dict[str, np.ndarray]:
    cols = {
        "t": series.t,
        "n1": series.m11,
        "n2": series.m22,
        "n_total": series.n_total,
        "re_m12": series.m12.real,
        "im_m12": series.m12.imag,
        "purity": series.purity(),
        "contrast": series.contrast(),
        "imbalance": series.imbalance(),
    }
    if series.stderr_n_total is not None:
        cols["stderr_n_total"] = series.stderr_n_total
    return cols


def write_csv(path, series: MomentSeries, with_stderr: bool = False) -> Path:
    """17 significant digits round-trip every float64 exactly."""
    path = Path(path)
    cols = series_columns(series)
    names = list(COLUMNS) + (["stderr_n_total"] if with_stderr else [])
    table = np.column_stack([cols[name] for name in names])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, table, fmt="%.17g", delimiter=",", header=",".join(names), comments="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def run_trajectories(config: ExperimentConfig, workers: Optional[int] = None) -> MomentSeries:
    tconf = TrajectoryConfig(
        params=config.params, initial=config.many_body_initial, t_final=config.t_final,
        sample_interval=config.sample_interval, rk_step=config.rk_step,
        master_seed=config.master_seed, n_trajectories=config.n_trajectories,
    )
    return run_ensemble(tconf, workers=workers)


def run_exact(config: ExperimentConfig) -> MomentSeries:
    rho0 = BlockDensityMatrix.from_state(config.many_body_initial, config.n_max)
    result = evolve_exact(rho0, config.t_final, config.params, rk_step=config.rk_step,
                          sample_interval=config.sample_interval)
    return result.moments


def run_meanfield(config: ExperimentConfig) -> MomentSeries:
    """Mean-field moments scaled to ``N0`` particles."""
    times = sample_grid(config.t_final, config.sample_interval)
    _, c = gpe_evolve(config.meanfield_initial, config.t_final, config.params,
                      step=config.rk_step, times=times)
    N0 = config.N0
    return MomentSeries(times, N0 * np.abs(c[:, 0]) ** 2, N0 * np.abs(c[:, 1]) ** 2,
                        N0 * np.conj(c[:, 0]) * c[:, 1])


def _stem_path(out: Path, solver: str) -> Path:
    return out.with_name(f"{out.stem}_{solver}{out.suffix or '.csv'}")


def max_deviations(a: MomentSeries, b: MomentSeries) -> dict[str, float]:
    ca, cb = series_columns(a), series_columns(b)
    return {q: float(np.max(np.abs(ca[q] - cb[q]))) for q in COMPARED}


def write_summary(path, deviations: dict[str, dict[str, float]], skipped=()) -> Path:
    path = Path(path)
    lines = ["pair,quantity,max_abs_deviation"]
    for pair, devs in deviations.items():
        lines += [f"{pair},{q},{v:.17g}" for q, v in devs.items()]
    lines += [f"{s},skipped,nan" for s in skipped]
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None,
                   plot: bool = False) -> list[Path]:
    """Execute ``config`` and return the paths written."""
    out = Path(config.output_path)
    written: list[Path] = []
    results: dict[str, MomentSeries] = {}
    if config.mode == "trajectories":
        results["trajectories"] = run_trajectories(config, workers)
        written.append(write_csv(out, results["trajectories"], with_stderr=True))
    elif config.mode == "exact":
        results["exact"] = run_exact(config)
        written.append(write_csv(out, results["exact"]))
    elif config.mode == "meanfield":
        results["meanfield"] = run_meanfield(config)
        written.append(write_csv(out, results["meanfield"]))
    else:
        skipped = []
        results["trajectories"] = run_trajectories(config, workers)
        if config.N0 <= COMPARE_EXACT_MAX_N0 or config.n_max is not None:
            results["exact"] = run_exact(config)
        else:
            log.warning("N0 = %d: exact solver skipped in compare mode", config.N0)
            skipped.append("exact")
        results["meanfield"] = run_meanfield(config)
        for name, series in results.items():
            written.append(write_csv(_stem_path(out, name), series,
                                     with_stderr=name == "trajectories"))
        names = list(results)
        deviations = {
            f"{a}-{b}": max_deviations(results[a], results[b])
            for i, a in enumerate(names) for b in names[i + 1:]
        }
        written.append(write_summary(_stem_path(out, "summary"), deviations, skipped))
    if plot:
        from .plotting import plot_experiment

        written.append(plot_experiment(out.with_suffix(".png"), results, config))
    return written
