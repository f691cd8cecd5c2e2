"""
Calibration module for equical.
Inverse design problems: the power or false positive rate an outcome needs for its post-study
odds to clear a percentile of an equipoise model, and the smallest development plan whose
double-positive and double-negative outcomes both clear a joint threshold.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from equical.equipoise import EquipoiseModel, JointEquipoiseModel, odds_quantile, product_quantile
from equical.exceptions import DomainError
from equical.odds import CdpOddsReport

logger = logging.getLogger(__name__)

DIRECTIONS = ("+", "-")


@dataclass(frozen=True)
class CalibrationTarget:
    """Equipoise model, percentile and outcome sign a design is calibrated against."""

    model: Union[EquipoiseModel, JointEquipoiseModel]
    percentile: float
    direction: str = "+"

    def __post_init__(self):
        if not 0.0 < self.percentile < 1.0:
            raise DomainError(f"percentile must lie in (0, 1), got {self.percentile}")
        if self.direction not in DIRECTIONS:
            raise DomainError(f"direction must be '+' or '-', got {self.direction!r}")

    @property
    def threshold(self) -> float:
        """Odds at the target percentile of the model."""
        if isinstance(self.model, JointEquipoiseModel):
            return product_quantile(self.model, self.percentile).value
        return odds_quantile(self.model, self.percentile)


@dataclass(frozen=True)
class CalibrationResult:
    """
    Outcome of a calibration. When infeasible, `value` is None and `limiting_value` is the
    bound on the other operating characteristic that would make the target reachable.
    """

    feasible: bool
    value: Optional[float]
    limiting_value: Optional[float]
    threshold: float


@dataclass(frozen=True)
class CdpCandidate:
    name: str
    n_total: int
    report: CdpOddsReport


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _check_prior(prior_odds: float) -> None:
    if not prior_odds > 0:
        raise DomainError(f"prior odds must be positive, got {prior_odds}")


def _check_cap(power_cap: float) -> None:
    if not 0.0 < power_cap <= 1.0:
        raise DomainError(f"power cap must lie in (0, 1], got {power_cap}")


def max_alpha(target: CalibrationTarget, power_cap: float = 1.0, prior_odds: float = 1.0) -> float:
    """
    Largest false positive rate whose positive outcome still clears the target at the capped
    power: power_cap * prior_odds / threshold.
    """
    _check_cap(power_cap)
    _check_prior(prior_odds)
    return power_cap * prior_odds / target.threshold


def max_alpha_negative(target: CalibrationTarget, power_cap: float = 1.0,
                       prior_odds: float = 1.0) -> float:
    """
    Largest false positive rate whose negative outcome still clears the target at the capped
    power; 0 when no rate works.
    """
    _check_cap(power_cap)
    _check_prior(prior_odds)
    return max(0.0, 1.0 - target.threshold * prior_odds * (1.0 - power_cap))


def required_power(alpha: float, target: CalibrationTarget, prior_odds: float = 1.0) -> CalibrationResult:
    """
    Power at which a positive outcome's post-study odds equal the target threshold.

    Args:
        alpha (float): False positive rate
        target (CalibrationTarget): Model and percentile
        prior_odds (float): Pre-study odds the outcome updates

    Returns:
        CalibrationResult: Required power, or infeasible with the largest workable alpha
    """
    _check_alpha(alpha)
    _check_prior(prior_odds)
    threshold = target.threshold
    power = alpha * threshold / prior_odds
    if power > 1.0:
        limit = max_alpha(target, 1.0, prior_odds)
        logger.warning(f"Power {power:.4g} needed at alpha {alpha}; infeasible, "
                       f"alpha must not exceed {limit:.4g}")
        return CalibrationResult(False, None, limit, threshold)
    return CalibrationResult(True, power, None, threshold)


def required_negative_power(alpha: float, target: CalibrationTarget, prior_odds: float = 1.0,
                            power_cap: float = 1.0) -> CalibrationResult:
    """
    Power at which a negative outcome's odds favouring H0, (1-alpha)/((1-power) prior),
    equal the target threshold.

    Args:
        alpha (float): False positive rate
        target (CalibrationTarget): Model and percentile
        prior_odds (float): Pre-study odds P(H1)/P(H0)
        power_cap (float): Largest attainable power

    Returns:
        CalibrationResult: Required power (0 when the target is already met at any power), or
            infeasible with the largest workable alpha at the capped power
    """
    _check_alpha(alpha)
    _check_prior(prior_odds)
    _check_cap(power_cap)
    threshold = target.threshold
    power = max(0.0, 1.0 - (1.0 - alpha) / (threshold * prior_odds))
    if power >= power_cap:
        limit = max_alpha_negative(target, power_cap, prior_odds)
        logger.warning(f"Power {power:.4g} needed for a negative outcome at alpha {alpha} "
                       f"exceeds the cap {power_cap}; alpha must not exceed {limit:.4g}")
        return CalibrationResult(False, None, limit, threshold)
    return CalibrationResult(True, power, None, threshold)


def calibrate(alpha: float, target: CalibrationTarget, prior_odds: float = 1.0) -> CalibrationResult:
    """Required power for the target's outcome direction."""
    if target.direction == "+":
        return required_power(alpha, target, prior_odds)
    return required_negative_power(alpha, target, prior_odds)


def cdp_search(candidates: Sequence[CdpCandidate], joint_target: float) -> Optional[CdpCandidate]:
    """
    Smallest development plan whose final double-positive odds and double-negative odds both
    reach the joint threshold.

    Ties on n_total go to the larger double-negative odds, then to the earlier candidate.

    Args:
        candidates (Sequence[CdpCandidate]): Plans with their odds reports
        joint_target (float): Product-odds threshold

    Returns:
        Optional[CdpCandidate]: The selected plan, or None when none qualifies
    """
    qualifying = [
        (c.n_total, -c.report.r01_nn.value, index, c)
        for index, c in enumerate(candidates)
        if c.report.r10_pp_final.value >= joint_target and c.report.r01_nn.value >= joint_target
    ]
    if not qualifying:
        logger.info(f"No development plan reaches the joint threshold {joint_target:.4g}")
        return None
    best = min(qualifying, key=lambda item: item[:3])[3]
    logger.info(f"Smallest qualifying plan at threshold {joint_target:.4g}: {best.name} (N={best.n_total})")
    return best
