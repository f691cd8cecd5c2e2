"""
Simulation module for equical.
Monte Carlo oracle for the analytic engines: patient-level group sequential survival trials
analysed with the log-rank test, binomial two-proportion trials, and sampled quantiles of the
joint equipoise model.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from equical.config import get_config
from equical.equipoise import JointEquipoiseModel, QuantileEstimate, sample_odds
from equical.exceptions import ConfigurationError, DomainError
from equical.gs_design import AccrualModel, GroupSequentialDesign
from equical.numerics import RngStream
from equical.prop_design import TwoProportionDesign, pooled_z_rejects
from equical.reference import SIMULATION_HEADER

logger = logging.getLogger(__name__)

MIN_REPLICATES = 10_000
MIN_QUANTILE_SAMPLES = 1_000_000
CHUNK_REPLICATES = 1_000
CHUNK_SAMPLES = 100_000


@dataclass(frozen=True)
class SimulationReport:
    """
    Monte Carlo estimates with their standard errors.

    Probability estimates carry the binomial standard error sqrt(p(1-p)/replicates).
    """

    replicates: int
    estimates: Dict[str, float] = field(default_factory=dict)
    standard_errors: Dict[str, float] = field(default_factory=dict)
    seed: int = 0

    def to_frame(self) -> pd.DataFrame:
        """One row per estimate with columns name, estimate, se, replicates, seed."""
        rows = [
            (name, value, self.standard_errors[name], self.replicates, self.seed)
            for name, value in self.estimates.items()
        ]
        return pd.DataFrame(rows, columns=SIMULATION_HEADER)


def _probability_report(counts: Dict[str, int], replicates: int, seed: int) -> SimulationReport:
    estimates, errors = {}, {}
    for name, count in counts.items():
        p = count / replicates
        estimates[name] = p
        errors[name] = math.sqrt(p * (1.0 - p) / replicates)
    return SimulationReport(replicates, estimates, errors, seed)


def _chunks(total: int, size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def _run_chunks(worker, tasks: Sequence[tuple]) -> List[np.ndarray]:
    """Run chunk tasks inline or over a process pool capped by EQUICAL_THREADS."""
    threads = min(get_config()["simulation"]["threads"], len(tasks))
    if threads <= 1:
        return [worker(*task) for task in tasks]
    logger.debug(f"Running {len(tasks)} chunks on {threads} worker processes")
    with ProcessPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(worker, *zip(*tasks)))


def _check_replicates(replicates: int) -> None:
    if replicates < MIN_REPLICATES:
        raise DomainError(f"at least {MIN_REPLICATES} replicates are required, got {replicates}")


def _resolve_seed(seed: Optional[int]) -> int:
    return get_config()["simulation"]["seed"] if seed is None else int(seed)


def _log_rank_z(entry: np.ndarray, time: np.ndarray, is_ctrl: np.ndarray, cutoff: np.ndarray) -> np.ndarray:
    """
    Standardized log-rank statistics at calendar cutoffs, one per row; positive values
    favour the treatment arm.
    """
    entered = entry <= cutoff[:, None]
    follow = np.where(entered, np.minimum(time, cutoff[:, None] - entry), -np.inf)
    event = entered & (entry + time <= cutoff[:, None])

    # descending follow-up: cumulative counts are the risk sets
    order = np.argsort(-follow, axis=1, kind="stable")
    at_risk = np.cumsum(np.take_along_axis(entered, order, axis=1), axis=1)
    ctrl_sorted = np.take_along_axis(is_ctrl & entered, order, axis=1).astype(float)
    ctrl_at_risk = np.cumsum(ctrl_sorted, axis=1)
    event_sorted = np.take_along_axis(event, order, axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        share = np.where(at_risk > 0, ctrl_at_risk / np.maximum(at_risk, 1), 0.0)
    u = np.sum(event_sorted * (ctrl_sorted - share), axis=1)
    v = np.sum(event_sorted * share * (1.0 - share), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(v > 0, u / np.sqrt(np.where(v > 0, v, 1.0)), 0.0)


def _gs_chunk(design: GroupSequentialDesign, true_hr: float, accrual_months: float,
              seed: int, start: int, stop: int) -> np.ndarray:
    n = design.n_total
    hazard = math.log(2.0) / design.soc_median_months
    is_ctrl = (np.arange(n) % 2) == 0
    scale = np.where(is_ctrl, 1.0 / hazard, 1.0 / (hazard * true_hr))

    entry = np.empty((stop - start, n))
    time = np.empty((stop - start, n))
    for row, index in enumerate(range(start, stop)):
        rng = RngStream(seed, index).generator()
        entry[row] = rng.uniform(0.0, accrual_months, n)
        time[row] = rng.exponential(scale)

    calendar = entry + time
    counts = np.zeros(len(design.analyses), dtype=np.int64)
    alive = np.ones(stop - start, dtype=bool)
    for k, (analysis, trigger) in enumerate(zip(design.analyses, design.information_events)):
        cutoff = np.partition(calendar, trigger - 1, axis=1)[:, trigger - 1]
        z = _log_rank_z(entry, time, is_ctrl, cutoff)
        rejected = alive & (z >= analysis.z_boundary)
        counts[k] = int(rejected.sum())
        alive &= ~rejected
    logger.debug(f"GS chunk {start}-{stop}: {counts.tolist()} rejections")
    return counts


def simulate_gs_tte(design: GroupSequentialDesign, true_hr: float, acc: Optional[AccrualModel] = None,
                    replicates: int = 100_000, seed: Optional[int] = None) -> SimulationReport:
    """
    Simulate the group sequential trial and count first rejections per analysis.

    Participants enter uniformly over the accrual period with 1:1 allocation and have
    exponential times to event (control median from the design, treatment hazard scaled by
    true_hr). Analysis k happens at the calendar time of the pooled event given by
    `design.information_events`, so its information fraction matches the boundary.

    Args:
        design (GroupSequentialDesign): Design with boundaries and event counts
        true_hr (float): True hazard ratio, treatment over control
        acc (Optional[AccrualModel]): Accrual model; defaults to EQUICAL_ACCRUAL_MONTHS
        replicates (int): Number of simulated trials
        seed (Optional[int]): Stream seed; defaults to EQUICAL_SEED

    Returns:
        SimulationReport: 'reject_k' per analysis (1-based) and 'reject_any'

    Raises:
        ConfigurationError: If the final event count exceeds n_total
    """
    _check_replicates(replicates)
    if not true_hr > 0:
        raise DomainError(f"true hazard ratio must be positive, got {true_hr}")
    if design.events[-1] > design.n_total:
        raise ConfigurationError(f"design needs {design.events[-1]} events from {design.n_total} participants")
    seed = _resolve_seed(seed)
    accrual = acc.accrual_months if acc is not None else get_config()["simulation"]["accrual_months"]

    tasks = [(design, true_hr, accrual, seed, start, stop) for start, stop in _chunks(replicates, CHUNK_REPLICATES)]
    counts = np.sum(_run_chunks(_gs_chunk, tasks), axis=0)

    named = {f"reject_{k + 1}": int(c) for k, c in enumerate(counts)}
    named["reject_any"] = int(counts.sum())
    logger.info(f"Simulated {replicates} group sequential trials at HR {true_hr}: "
                f"{named['reject_any'] / replicates:.4f} rejected")
    return _probability_report(named, replicates, seed)


def _two_prop_chunk(design: TwoProportionDesign, p_soc: float, p_inv: float,
                    seed: int, start: int, stop: int) -> np.ndarray:
    n = design.n_per_arm
    draws = np.empty((stop - start, 2), dtype=np.int64)
    for row, index in enumerate(range(start, stop)):
        rng = RngStream(seed, index).generator()
        draws[row] = rng.binomial(n, p_soc), rng.binomial(n, p_inv)
    rejects = pooled_z_rejects(draws[:, 0], draws[:, 1], n, design.alpha_one_sided)
    return np.array([int(rejects.sum())])


def simulate_two_prop(design: TwoProportionDesign, true_p_soc: float, true_p_inv: float,
                      replicates: int = 100_000, seed: Optional[int] = None) -> SimulationReport:
    """
    Simulate binomial two-arm trials and count rejections of the pooled one-sided z-test.

    Args:
        design (TwoProportionDesign): Design giving n per arm and alpha
        true_p_soc (float): True standard-of-care rate in [0, 1]
        true_p_inv (float): True investigational rate in [0, 1]
        replicates (int): Number of simulated trials
        seed (Optional[int]): Stream seed; defaults to EQUICAL_SEED

    Returns:
        SimulationReport: A single 'reject' estimate
    """
    _check_replicates(replicates)
    if not (0.0 <= true_p_soc <= 1.0 and 0.0 <= true_p_inv <= 1.0):
        raise DomainError(f"true rates must lie in [0, 1], got {true_p_soc}, {true_p_inv}")
    seed = _resolve_seed(seed)
    tasks = [(design, true_p_soc, true_p_inv, seed, start, stop)
             for start, stop in _chunks(replicates, CHUNK_REPLICATES)]
    rejected = int(np.sum(_run_chunks(_two_prop_chunk, tasks)))
    return _probability_report({"reject": rejected}, replicates, seed)


def _product_chunk(j: JointEquipoiseModel, seed: int, index: int, size: int) -> np.ndarray:
    rng = RngStream(seed, index).generator()
    return sample_odds(j.phase2, size, rng) * sample_odds(j.phase3, size, rng)


def mc_product_quantile(j: JointEquipoiseModel, p: float, samples: int = MIN_QUANTILE_SAMPLES,
                        seed: Optional[int] = None) -> QuantileEstimate:
    """
    Empirical p-quantile of the product odds R2 * R3 with an order-statistic standard error.

    Args:
        j (JointEquipoiseModel): Joint model
        p (float): Percentile in (0, 1)
        samples (int): Number of product draws
        seed (Optional[int]): Stream seed; defaults to EQUICAL_SEED

    Returns:
        QuantileEstimate: Quantile and standard error
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"mc_product_quantile requires 0 < p < 1, got {p}")
    if samples < MIN_QUANTILE_SAMPLES:
        raise DomainError(f"at least {MIN_QUANTILE_SAMPLES} samples are required, got {samples}")
    seed = _resolve_seed(seed)
    tasks = [(j, seed, index, stop - start)
             for index, (start, stop) in enumerate(_chunks(samples, CHUNK_SAMPLES))]
    draws = np.sort(np.concatenate(_run_chunks(_product_chunk, tasks)))

    value = float(np.quantile(draws, p))
    spread = math.sqrt(samples * p * (1.0 - p))
    lo = max(0, int(math.floor(samples * p - spread)))
    hi = min(samples - 1, int(math.ceil(samples * p + spread)))
    se = 0.5 * float(draws[hi] - draws[lo])
    logger.info(f"Monte Carlo {p:.3g} quantile of {j.label}: {value:.4g} (se {se:.3g})")
    return QuantileEstimate(value, se, "monte-carlo")
