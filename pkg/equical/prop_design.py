"""
Two-proportion design module for equical.
Sample size, power and critical difference of the one-sided normal-approximation z-test
comparing a binary endpoint between an investigational arm and standard of care.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from equical.exceptions import DomainError
from equical.numerics import normal_cdf, normal_quantile

logger = logging.getLogger(__name__)


class VarianceConvention(str, Enum):
    POOLED_NULL = "pooled-null"
    UNPOOLED_ALTERNATIVE = "unpooled-alternative"


@dataclass(frozen=True)
class TwoProportionDesign:
    """
    Superiority design for p_inv > p_soc with a one-sided test at alpha_one_sided.

    `critical_difference` is the observed difference in proportions at which the test
    rejects, under the design's variance convention.
    """

    p_soc: float
    p_inv: float
    alpha_one_sided: float
    power: float
    n_per_arm: int
    critical_difference: float
    variance_convention: VarianceConvention = VarianceConvention.POOLED_NULL
    continuity_correction: bool = False

    def __post_init__(self):
        _check_rates(self.p_soc, self.p_inv)
        _check_alpha(self.alpha_one_sided)
        if self.n_per_arm < 2:
            raise DomainError(f"n_per_arm must be at least 2, got {self.n_per_arm}")

    @property
    def n_total(self) -> int:
        return 2 * self.n_per_arm

    @property
    def achieved_power(self) -> float:
        return power_two_props(self.p_soc, self.p_inv, self.alpha_one_sided, self.n_per_arm)


def _check_rates(p_soc: float, p_inv: float) -> None:
    if not (0.0 < p_soc < 1.0 and 0.0 < p_inv < 1.0):
        raise DomainError(f"proportions must lie in (0, 1), got p_soc={p_soc}, p_inv={p_inv}")
    if not p_inv > p_soc:
        raise DomainError(f"superiority design needs p_inv > p_soc, got p_soc={p_soc}, p_inv={p_inv}")


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 0.5:
        raise DomainError(f"one-sided alpha must lie in (0, 0.5), got {alpha}")


def sample_size_two_props(p_soc: float, p_inv: float, alpha_one_sided: float, power: float,
                          continuity_correction: bool = False) -> int:
    """
    Participants per arm for the one-sided two-proportion z-test.

    Args:
        p_soc (float): Response rate under standard of care
        p_inv (float): Response rate under the investigational treatment
        alpha_one_sided (float): One-sided false positive rate
        power (float): Target power
        continuity_correction (bool): Apply the Fleiss continuity correction

    Returns:
        int: n per arm (ceiling of the normal-approximation solution)

    Raises:
        DomainError: If p_soc >= p_inv or a probability is out of range
    """
    _check_rates(p_soc, p_inv)
    _check_alpha(alpha_one_sided)
    if not alpha_one_sided < power < 1.0:
        raise DomainError(f"power must lie in (alpha, 1), got {power}")

    delta = p_inv - p_soc
    p_bar = 0.5 * (p_soc + p_inv)
    null_sd = math.sqrt(2.0 * p_bar * (1.0 - p_bar))
    alt_sd = math.sqrt(p_inv * (1.0 - p_inv) + p_soc * (1.0 - p_soc))
    n = ((normal_quantile(1.0 - alpha_one_sided) * null_sd + normal_quantile(power) * alt_sd)
         / delta) ** 2
    if continuity_correction:
        n = 0.25 * n * (1.0 + math.sqrt(1.0 + 4.0 / (n * delta))) ** 2
    logger.debug(f"two-proportion sample size {n:.3f} per arm before rounding")
    return int(math.ceil(n - 1e-9))


def power_two_props(p_soc: float, p_inv: float, alpha_one_sided: float, n_per_arm: int) -> float:
    """
    Normal-approximation power of the one-sided test; equals alpha when p_soc == p_inv.
    """
    if n_per_arm < 2:
        raise DomainError(f"n_per_arm must be at least 2, got {n_per_arm}")
    _check_alpha(alpha_one_sided)
    if not (0.0 < p_soc < 1.0 and 0.0 < p_inv < 1.0):
        raise DomainError(f"proportions must lie in (0, 1), got p_soc={p_soc}, p_inv={p_inv}")

    delta = p_inv - p_soc
    p_bar = 0.5 * (p_soc + p_inv)
    null_sd = math.sqrt(2.0 * p_bar * (1.0 - p_bar))
    alt_sd = math.sqrt(p_inv * (1.0 - p_inv) + p_soc * (1.0 - p_soc))
    z = normal_quantile(1.0 - alpha_one_sided)
    return normal_cdf((delta * math.sqrt(n_per_arm) - z * null_sd) / alt_sd)


def critical_difference(p_soc: float, p_inv: float, alpha_one_sided: float, n_per_arm: int,
                        variance_convention: VarianceConvention = VarianceConvention.POOLED_NULL) -> float:
    """
    Smallest observed difference in proportions declared significant.

    Args:
        p_soc (float): Response rate under standard of care
        p_inv (float): Response rate under the investigational treatment
        alpha_one_sided (float): One-sided false positive rate
        n_per_arm (int): Participants per arm
        variance_convention (VarianceConvention): Pooled rate under the null, or unpooled
            variance under the alternative

    Returns:
        float: z_{1-alpha} times the standard error of the difference
    """
    if n_per_arm < 2:
        raise DomainError(f"n_per_arm must be at least 2, got {n_per_arm}")
    if not 0.0 < alpha_one_sided < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha_one_sided}")
    convention = VarianceConvention(variance_convention)
    if convention is VarianceConvention.POOLED_NULL:
        p_bar = 0.5 * (p_soc + p_inv)
        variance = 2.0 * p_bar * (1.0 - p_bar)
    else:
        variance = p_inv * (1.0 - p_inv) + p_soc * (1.0 - p_soc)
    return normal_quantile(1.0 - alpha_one_sided) * math.sqrt(variance / n_per_arm)


def design_two_props(p_soc: float, p_inv: float, alpha_one_sided: float, power: float,
                     variance_convention: VarianceConvention = VarianceConvention.POOLED_NULL,
                     continuity_correction: bool = False) -> TwoProportionDesign:
    """Size a two-proportion design and attach its critical difference."""
    n = sample_size_two_props(p_soc, p_inv, alpha_one_sided, power, continuity_correction)
    design = TwoProportionDesign(
        p_soc=p_soc,
        p_inv=p_inv,
        alpha_one_sided=alpha_one_sided,
        power=power,
        n_per_arm=n,
        critical_difference=critical_difference(p_soc, p_inv, alpha_one_sided, n, variance_convention),
        variance_convention=VarianceConvention(variance_convention),
        continuity_correction=continuity_correction,
    )
    logger.info(f"Two-proportion design {p_soc} vs {p_inv}: n={n}/arm, "
                f"critical difference {design.critical_difference:.4f}")
    return design


def pooled_z_rejects(x_soc: np.ndarray, x_inv: np.ndarray, n_per_arm: int,
                     alpha_one_sided: float) -> np.ndarray:
    """
    Decision of the one-sided pooled z-test for arrays of responder counts.

    A zero pooled variance (all or no responders) never rejects.
    """
    z_crit = normal_quantile(1.0 - alpha_one_sided)
    x_soc = np.asarray(x_soc, dtype=float)
    x_inv = np.asarray(x_inv, dtype=float)
    pooled = (x_soc + x_inv) / (2.0 * n_per_arm)
    se = np.sqrt(2.0 * pooled * (1.0 - pooled) / n_per_arm)
    diff = (x_inv - x_soc) / n_per_arm
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), 0.0)
    return (se > 0) & (z >= z_crit)


def exact_rejection_probability(design: TwoProportionDesign, p_soc: float, p_inv: float) -> float:
    """
    Rejection probability of the pooled one-sided z-test by enumeration of both binomials.

    Args:
        design (TwoProportionDesign): Design giving n per arm and alpha
        p_soc (float): True standard-of-care rate in [0, 1]
        p_inv (float): True investigational rate in [0, 1]

    Returns:
        float: P(reject)
    """
    if not (0.0 <= p_soc <= 1.0 and 0.0 <= p_inv <= 1.0):
        raise DomainError(f"true rates must lie in [0, 1], got p_soc={p_soc}, p_inv={p_inv}")
    n = design.n_per_arm
    counts = np.arange(n + 1)
    pmf_soc = stats.binom.pmf(counts, n, p_soc)
    pmf_inv = stats.binom.pmf(counts, n, p_inv)
    rejects = pooled_z_rejects(counts[:, None], counts[None, :], n, design.alpha_one_sided)
    return float(np.sum(np.outer(pmf_soc, pmf_inv) * rejects))
