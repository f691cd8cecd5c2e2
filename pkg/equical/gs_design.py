"""
Group sequential design module for equical.
Time-to-event designs with efficacy boundaries from Lan-DeMets alpha spending: boundary
computation, first-crossing probabilities, event and sample-size search, hazard-ratio
critical values and per-analysis likelihood ratios.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from equical.config import LR_CONVENTIONS, get_config
from equical.exceptions import ConvergenceError, DegenerateError, DomainError
from equical.numerics import find_root, normal_cdf, normal_quantile

logger = logging.getLogger(__name__)

SpendingFunction = Callable[[float, float], float]

MAX_GRID_NODES = 4096
MAX_EVENTS = 1e9
_GRID_WIDTH_SD = 8.0
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GSAnalysis:
    """One analysis of a group sequential design."""

    info_fraction: float
    events: int
    z_boundary: float

    def __post_init__(self):
        if not 0.0 < self.info_fraction <= 1.0:
            raise DomainError(f"information fraction must lie in (0, 1], got {self.info_fraction}")
        if self.events <= 0:
            raise DomainError(f"event count must be positive, got {self.events}")

    @property
    def hr_critical(self) -> float:
        """Largest observed hazard ratio declared significant at this analysis."""
        return hr_critical_value(self.z_boundary, self.events)


@dataclass(frozen=True)
class AccrualModel:
    """Uniform entry over accrual_months; analysis at followup_months calendar time."""

    accrual_months: float
    followup_months: float

    def __post_init__(self):
        if not (self.accrual_months > 0 and self.followup_months > 0):
            raise DomainError("accrual and follow-up durations must be positive")


@dataclass(frozen=True)
class GroupSequentialDesign:
    """
    Group sequential time-to-event design.

    The FWER is split evenly over `sides` tails; efficacy boundaries control the upper tail
    at fwer / sides. `drift` is the mean of the final standardized log-rank statistic under
    the design hypothesis.
    """

    analyses: Tuple[GSAnalysis, ...]
    fwer: float
    hr_alt: float
    soc_median_months: float
    n_total: int
    drift: float
    sides: int = 2
    target_power: Optional[float] = None
    grid_nodes: int = 256
    grid_tol: float = 1e-7

    def __post_init__(self):
        if not self.analyses:
            raise DomainError("a design needs at least one analysis")
        fractions = self.info_fractions
        if any(b <= a for a, b in zip(fractions, fractions[1:])):
            raise DomainError(f"information fractions must increase strictly, got {fractions}")
        if abs(fractions[-1] - 1.0) > 1e-12:
            raise DomainError(f"the last information fraction must be 1, got {fractions[-1]}")
        events = self.events
        if any(b <= a for a, b in zip(events, events[1:])):
            raise DomainError(f"event counts must increase strictly, got {events}")
        if not 0.0 < self.fwer < 1.0:
            raise DomainError(f"fwer must lie in (0, 1), got {self.fwer}")
        if self.sides not in (1, 2):
            raise DomainError(f"sides must be 1 or 2, got {self.sides}")
        if not 0.0 < self.hr_alt < 1.0:
            raise DomainError(f"design hazard ratio must lie in (0, 1), got {self.hr_alt}")
        if self.n_total <= 0:
            raise DomainError(f"n_total must be positive, got {self.n_total}")

    @property
    def alpha_one_sided(self) -> float:
        return self.fwer / self.sides

    @property
    def info_fractions(self) -> List[float]:
        return [a.info_fraction for a in self.analyses]

    @property
    def events(self) -> List[int]:
        return [a.events for a in self.analyses]

    @property
    def information_events(self) -> List[int]:
        """
        Pooled event counts at which each analysis is triggered.

        Interim analyses fire at round(t_k * D_K) events so that the observed information
        matches the fraction the boundaries were spent at; the final analysis fires at D_K.
        `events` keeps the planned counts used for the hazard ratio critical values.
        """
        final = self.events[-1]
        counts = [max(1, int(round(t * final))) for t in self.info_fractions[:-1]]
        return counts + [final]

    @property
    def z_boundaries(self) -> List[float]:
        return [a.z_boundary for a in self.analyses]

    @property
    def hr_criticals(self) -> List[float]:
        return [a.hr_critical for a in self.analyses]


class LikelihoodRatios(NamedTuple):
    """Per-analysis positive likelihood ratios and the overall negative likelihood ratio."""

    positive: Tuple[float, ...]
    negative: float
    power: float
    convention: str


def obf_spending(t: float, alpha_one_sided: float) -> float:
    """
    O'Brien-Fleming-type Lan-DeMets spending function.

    Args:
        t (float): Information fraction in (0, 1]
        alpha_one_sided (float): Total one-sided alpha

    Returns:
        float: Cumulative alpha spent at t
    """
    if not t > 0:
        raise DomainError(f"spending requires t > 0, got {t}")
    t = min(t, 1.0)
    return 2.0 * normal_cdf(-normal_quantile(1.0 - alpha_one_sided / 2.0) / math.sqrt(t))


def pocock_spending(t: float, alpha_one_sided: float) -> float:
    """Pocock-type Lan-DeMets spending function alpha * ln(1 + (e - 1) t)."""
    if not t > 0:
        raise DomainError(f"spending requires t > 0, got {t}")
    return alpha_one_sided * math.log1p((math.e - 1.0) * min(t, 1.0))


def hr_critical_value(z: float, events: int) -> float:
    """
    Hazard ratio critical value exp(-2 z / sqrt(events)).

    Raises:
        DomainError: If events <= 0
    """
    if events <= 0:
        raise DomainError(f"event count must be positive, got {events}")
    return math.exp(-2.0 * z / math.sqrt(events))


def event_drift(hr: float, events: float) -> float:
    """Mean of the standardized log-rank statistic, ln(1/hr) * sqrt(events/4)."""
    if not hr > 0:
        raise DomainError(f"hazard ratio must be positive, got {hr}")
    return math.log(1.0 / hr) * math.sqrt(events / 4.0)


def _check_fractions(info_fractions: Sequence[float]) -> List[float]:
    fractions = [float(t) for t in info_fractions]
    if not fractions:
        raise DomainError("at least one information fraction is required")
    if fractions[0] <= 0 or any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise DomainError(f"information fractions must be positive and increasing, got {fractions}")
    if abs(fractions[-1] - 1.0) > 1e-12:
        raise DomainError(f"the last information fraction must be 1, got {fractions[-1]}")
    return fractions


def _legendre_grid(lo: float, hi: float, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _crossing_probs(z_bounds: Sequence[float], fractions: Sequence[float], drift: float,
                    nodes: int) -> np.ndarray:
    """
    First-crossing probabilities of the upper boundaries by recursive integration of the
    continuation sub-density of the score process S(t) ~ N(drift * t, t).
    """
    points = np.zeros(1)
    mass = np.ones(1)
    t_prev = 0.0
    probs = []
    last = len(fractions) - 1
    for k, (c, t) in enumerate(zip(z_bounds, fractions)):
        dt = t - t_prev
        sd = math.sqrt(dt)
        shift = drift * dt
        b = c * math.sqrt(t)
        probs.append(float(np.sum(mass * special.ndtr((points + shift - b) / sd))))
        if k == last:
            break

        mean, spread = drift * t, _GRID_WIDTH_SD * math.sqrt(t)
        lo, hi = mean - spread, min(b, mean + spread)
        if hi <= lo:
            points, mass = np.zeros(0), np.zeros(0)
        else:
            x, w = _legendre_grid(lo, hi, nodes)
            u = (x[:, None] - points[None, :] - shift) / sd
            density = (np.exp(-0.5 * u * u) * mass[None, :]).sum(axis=1) * _INV_SQRT_2PI / sd
            points, mass = x, w * density
        t_prev = t
    return np.array(probs)


def _refined_crossing_probs(z_bounds: Sequence[float], fractions: Sequence[float], drift: float,
                            nodes: int, tol: float) -> np.ndarray:
    previous = _crossing_probs(z_bounds, fractions, drift, nodes)
    if len(fractions) == 1:
        return previous
    n = nodes
    while n < MAX_GRID_NODES:
        n *= 2
        current = _crossing_probs(z_bounds, fractions, drift, n)
        change = float(np.max(np.abs(current - previous)))
        logger.debug(f"grid refinement to {n} nodes changed probabilities by {change:.2e}")
        if change < tol:
            return current
        previous = current
    raise ConvergenceError(f"grid did not converge to {tol:g} with {MAX_GRID_NODES} nodes",
                           estimate=float(previous.sum()))


def boundaries(info_fractions: Sequence[float], alpha_one_sided: float,
               spending: SpendingFunction = obf_spending, nodes: int = 256) -> List[float]:
    """
    Efficacy z-boundaries whose first-crossing probabilities under zero drift equal the
    increments of the spending function.

    Args:
        info_fractions (Sequence[float]): Increasing information fractions ending at 1
        alpha_one_sided (float): Total one-sided alpha
        spending (SpendingFunction): Cumulative spending function of (t, alpha)
        nodes (int): Gauss-Legendre nodes per stage

    Returns:
        List[float]: Boundary per analysis (inf where nothing is spent)
    """
    if not 0.0 < alpha_one_sided < 0.5:
        raise DomainError(f"one-sided alpha must lie in (0, 0.5), got {alpha_one_sided}")
    fractions = _check_fractions(info_fractions)
    cumulative = [spending(t, alpha_one_sided) for t in fractions]
    increments = np.diff([0.0] + cumulative)

    bounds: List[float] = []
    for k, increment in enumerate(increments):
        if increment <= 0:
            bounds.append(math.inf)
            continue
        if k == 0:
            bounds.append(-normal_quantile(increment))
            continue

        def excess(c: float) -> float:
            return _crossing_probs(bounds + [c], fractions[:k + 1], 0.0, nodes)[-1] - increment

        bounds.append(find_root(excess, -10.0, 40.0, tol=1e-10))

    logger.debug(f"boundaries for fractions {fractions} at alpha {alpha_one_sided}: {bounds}")
    return bounds


def first_crossing_probs(design: GroupSequentialDesign, drift: float) -> List[float]:
    """
    Probability of first rejection at each analysis given the drift.

    Args:
        design (GroupSequentialDesign): Design with boundaries
        drift (float): Mean of the final standardized statistic

    Returns:
        List[float]: One probability per analysis
    """
    probs = _refined_crossing_probs(design.z_boundaries, design.info_fractions, drift,
                                    design.grid_nodes, design.grid_tol)
    return [float(p) for p in probs]


def cumulative_power(design: GroupSequentialDesign, drift: float) -> float:
    """Probability of rejecting at any analysis given the drift."""
    return float(sum(first_crossing_probs(design, drift)))


def _drift_for_power(z_bounds: Sequence[float], fractions: Sequence[float], power: float,
                     nodes: int) -> float:
    # fixed-design closed form seeds the bracket
    seed = z_bounds[-1] + normal_quantile(power) if math.isfinite(z_bounds[-1]) else 10.0

    def shortfall(theta: float) -> float:
        return float(_crossing_probs(z_bounds, fractions, theta, nodes).sum()) - power

    return find_root(shortfall, 0.0, max(seed, 0.0) + 10.0, tol=1e-10)


def required_events(hr_alt: float, alpha_one_sided: float, power: float,
                    info_fractions: Sequence[float] = (1.0,),
                    spending: SpendingFunction = obf_spending) -> int:
    """
    Smallest total event count whose cumulative power reaches the target.

    Args:
        hr_alt (float): Design hazard ratio in (0, 1)
        alpha_one_sided (float): One-sided alpha
        power (float): Target cumulative power
        info_fractions (Sequence[float]): Design shape; (1.0,) is a fixed design
        spending (SpendingFunction): Spending function for the boundaries

    Returns:
        int: Events at the final analysis

    Raises:
        DomainError: If hr_alt is outside (0, 1), power is outside (alpha, 1), or the effect
            is too small for a finite design
    """
    if not 0.0 < hr_alt < 1.0:
        raise DomainError(f"design hazard ratio must lie in (0, 1), got {hr_alt}")
    if not alpha_one_sided < power < 1.0:
        raise DomainError(f"power must lie in (alpha, 1), got {power}")
    fractions = _check_fractions(info_fractions)
    nodes = get_config()["grid"]["nodes"]
    z_bounds = boundaries(fractions, alpha_one_sided, spending, nodes)
    theta = _drift_for_power(z_bounds, fractions, power, nodes)
    exact = 4.0 * theta ** 2 / math.log(hr_alt) ** 2
    if exact > MAX_EVENTS:
        raise DomainError(f"hazard ratio {hr_alt} needs {exact:.3g} events; the effect is too small")
    return int(math.ceil(exact - 1e-9))


def required_sample_size(hr_alt: float, alpha_one_sided: float, power: float,
                         info_fractions: Sequence[float], event_fraction: float,
                         spending: SpendingFunction = obf_spending) -> int:
    """Participants needed so that event_fraction of them supply the required events."""
    if not 0.0 < event_fraction <= 1.0:
        raise DomainError(f"event fraction must lie in (0, 1], got {event_fraction}")
    events = required_events(hr_alt, alpha_one_sided, power, info_fractions, spending)
    return int(math.ceil(events / event_fraction - 1e-9))


def build_design(info_fractions: Sequence[float], fwer: float, hr_alt: float, *,
                 n_total: Optional[int] = None,
                 events: Optional[Sequence[int]] = None,
                 event_fractions: Optional[Sequence[float]] = None,
                 target_power: Optional[float] = None,
                 soc_median_months: float = 10.0,
                 sides: int = 2,
                 spending: SpendingFunction = obf_spending) -> GroupSequentialDesign:
    """
    Construct a group sequential design.

    Events come from `events` when given, else from `event_fractions` of `n_total`, else
    from the event search for `target_power` (with n_total derived from the final event
    fraction when it is not supplied). With a power target the design drift is the drift
    attaining that power; otherwise it follows from the final event count.

    Args:
        info_fractions (Sequence[float]): Increasing information fractions ending at 1
        fwer (float): Family-wise error rate over all tails
        hr_alt (float): Design hazard ratio
        n_total (Optional[int]): Participants
        events (Optional[Sequence[int]]): Events per analysis
        event_fractions (Optional[Sequence[float]]): Share of participants with an event per analysis
        target_power (Optional[float]): Cumulative power at the design hypothesis
        soc_median_months (float): Median time to event in the control arm
        sides (int): Number of tails sharing the FWER
        spending (SpendingFunction): Spending function

    Returns:
        GroupSequentialDesign: The design
    """
    grid = get_config()["grid"]
    fractions = _check_fractions(info_fractions)
    if not 0.0 < fwer < 1.0:
        raise DomainError(f"fwer must lie in (0, 1), got {fwer}")
    if sides not in (1, 2):
        raise DomainError(f"sides must be 1 or 2, got {sides}")
    alpha = fwer / sides
    z_bounds = boundaries(fractions, alpha, spending, grid["nodes"])

    if events is not None:
        counts = [int(d) for d in events]
    elif event_fractions is not None and n_total is not None:
        counts = [int(round(f * n_total)) for f in event_fractions]
    elif target_power is not None:
        final = required_events(hr_alt, alpha, target_power, fractions, spending)
        counts = [max(1, int(math.ceil(t * final - 1e-9))) for t in fractions]
        if n_total is None:
            if event_fractions is None:
                raise DomainError("n_total or event_fractions is needed to size the design")
            n_total = int(math.ceil(final / event_fractions[-1] - 1e-9))
    else:
        raise DomainError("supply events, event_fractions with n_total, or a target power")
    if len(counts) != len(fractions):
        raise DomainError(f"{len(counts)} event counts for {len(fractions)} analyses")
    if n_total is None:
        raise DomainError("n_total is required when events are given explicitly")

    if target_power is not None:
        if not alpha < target_power < 1.0:
            raise DomainError(f"target power must lie in (alpha, 1), got {target_power}")
        drift = _drift_for_power(z_bounds, fractions, target_power, grid["nodes"])
    else:
        drift = event_drift(hr_alt, counts[-1])

    analyses = tuple(GSAnalysis(t, d, c) for t, d, c in zip(fractions, counts, z_bounds))
    design = GroupSequentialDesign(
        analyses=analyses,
        fwer=fwer,
        hr_alt=hr_alt,
        soc_median_months=soc_median_months,
        n_total=int(n_total),
        drift=drift,
        sides=sides,
        target_power=target_power,
        grid_nodes=grid["nodes"],
        grid_tol=grid["tol"],
    )
    logger.info(f"Built design: N={design.n_total}, events={counts}, "
                f"z={[round(c, 4) for c in z_bounds]}, drift={drift:.4f}")
    return design


def analysis_likelihood_ratios(design: GroupSequentialDesign,
                               convention: str = "conditional") -> LikelihoodRatios:
    """
    Positive likelihood ratio of each analysis and the negative likelihood ratio of the trial.

    Null rejection probabilities count every tail sharing the FWER. Conventions:
    'conditional' divides each first-crossing probability by the probability of reaching the
    analysis; 'incremental' uses the first-crossing probabilities as they are; 'marginal'
    compares the per-analysis rejection probabilities ignoring earlier looks.

    Args:
        design (GroupSequentialDesign): Design evaluated at its drift
        convention (str): One of 'conditional', 'incremental', 'marginal'

    Returns:
        LikelihoodRatios: Positive ratios per analysis, negative ratio, cumulative power

    Raises:
        DegenerateError: If cumulative power is 1 or an analysis spends no alpha
    """
    if convention not in LR_CONVENTIONS:
        raise DomainError(f"unknown likelihood ratio convention {convention!r}")
    h1 = first_crossing_probs(design, design.drift)
    h0 = [design.sides * p for p in first_crossing_probs(design, 0.0)]
    power = sum(h1)
    if power >= 1.0:
        raise DegenerateError("cumulative power is 1: a negative outcome carries infinite evidence")
    if any(p <= 0 for p in h0):
        raise DegenerateError("an analysis with no null rejection probability has no likelihood ratio")

    positive = []
    reach1 = reach0 = 1.0
    for k, (p1, p0) in enumerate(zip(h1, h0)):
        if convention == "conditional":
            positive.append((p1 / reach1) / (p0 / reach0))
        elif convention == "incremental":
            positive.append(p1 / p0)
        else:
            a = design.analyses[k]
            mean = design.drift * math.sqrt(a.info_fraction)
            positive.append(normal_cdf(mean - a.z_boundary)
                            / (design.sides * normal_cdf(-a.z_boundary)))
        reach1 -= p1
        reach0 -= p0

    negative = (1.0 - sum(h0)) / (1.0 - power)
    return LikelihoodRatios(tuple(positive), negative, power, convention)


def expected_event_fraction(acc: AccrualModel, median_months: float, analysis_time: float) -> float:
    """
    Expected share of participants with an event by calendar time `analysis_time` under
    uniform accrual and exponential times to event.

    Args:
        acc (AccrualModel): Accrual model
        median_months (float): Median time to event
        analysis_time (float): Calendar time of the analysis

    Returns:
        float: Fraction in [0, 1]
    """
    if not median_months > 0:
        raise DomainError(f"median must be positive, got {median_months}")
    if analysis_time < 0:
        raise DomainError(f"analysis time must be nonnegative, got {analysis_time}")
    if math.isinf(analysis_time):
        return 1.0
    rate = math.log(2.0) / median_months
    a, t = acc.accrual_months, analysis_time
    if t >= a:
        return 1.0 - math.exp(-rate * t) * math.expm1(rate * a) / (rate * a)
    return (t + math.expm1(-rate * t) / rate) / a
