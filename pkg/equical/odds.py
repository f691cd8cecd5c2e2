"""
Odds calculus module for equical.
Post-study odds of the design hypotheses for a single trial outcome and for the four outcomes
of a phase 2 + phase 3 clinical development plan (CDP).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, NamedTuple, Sequence, Tuple

from equical.equipoise import BP11, JointEquipoiseModel, odds_cdf, product_cdf
from equical.exceptions import DegenerateError, DomainError
from equical.reference import TABLE1_DESIGNS

logger = logging.getLogger(__name__)


class Hypothesis(str, Enum):
    H1 = "H1"
    H0 = "H0"


class Outcome(str, Enum):
    POSITIVE = "+"
    NEGATIVE = "-"
    POS_POS = "(+2,+3)"
    POS_NEG = "(+2,-3)"
    NEG_POS = "(-2,+3)"
    NEG_NEG = "(-2,-3)"


@dataclass(frozen=True)
class OperatingCharacteristics:
    """
    False positive rate p(+|H0) and power p(+|H1) of one trial outcome.
    """

    alpha: float
    power: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.power <= 1.0:
            raise DomainError(f"power must lie in (0, 1], got {self.power}")

    @property
    def informative(self) -> bool:
        """False when power <= alpha, where the likelihood ratios invert."""
        return self.power > self.alpha

    @property
    def positive_lr(self) -> float:
        """p(+|H1) / p(+|H0)."""
        return self.power / self.alpha

    @property
    def negative_lr(self) -> float:
        """p(-|H0) / p(-|H1)."""
        if self.power >= 1.0:
            raise DegenerateError("power = 1: a negative outcome carries infinite evidence for H0")
        return (1.0 - self.alpha) / (1.0 - self.power)


@dataclass(frozen=True)
class PostStudyOdds:
    """Post-study odds in favour of one hypothesis after an observed outcome."""

    value: float
    favors: Hypothesis
    outcome: Outcome

    def __post_init__(self):
        if not self.value > 0:
            raise DomainError(f"post-study odds must be positive, got {self.value}")


@dataclass(frozen=True)
class CdpOddsReport:
    """
    The four post-study odds of a two-study CDP.

    Odds involving a positive phase 3 outcome carry one value per phase 3 analysis
    (interim analyses first, final analysis last).
    """

    r10_pp: Tuple[PostStudyOdds, ...]
    r01_pn: PostStudyOdds
    r10_np: Tuple[PostStudyOdds, ...]
    r01_nn: PostStudyOdds
    phase2: OperatingCharacteristics
    phase3_pos_lr: Tuple[float, ...]
    phase3_neg_lr: float
    prior_odds_joint: float = 1.0

    @property
    def r10_pp_final(self) -> PostStudyOdds:
        return self.r10_pp[-1]

    @property
    def r10_np_final(self) -> PostStudyOdds:
        return self.r10_np[-1]


class Table1Row(NamedTuple):
    alpha: float
    power: float
    odds: float
    percentile: float


def _check_prior(prior_odds: float) -> None:
    if not prior_odds > 0:
        raise DomainError(f"prior odds must be positive, got {prior_odds}")


def post_odds_positive(oc: OperatingCharacteristics, prior_odds: float = 1.0) -> PostStudyOdds:
    """
    Post-study odds in favour of H1 after a positive outcome: prior * power / alpha.

    Args:
        oc (OperatingCharacteristics): Operating characteristics of the outcome
        prior_odds (float): Pre-study odds P(H1)/P(H0); 1 under perfect equipoise

    Returns:
        PostStudyOdds: Odds favouring H1
    """
    _check_prior(prior_odds)
    if not oc.informative:
        logger.warning(f"power {oc.power} <= alpha {oc.alpha}: outcome is anti-informative")
    return PostStudyOdds(prior_odds * oc.positive_lr, Hypothesis.H1, Outcome.POSITIVE)


def post_odds_negative(oc: OperatingCharacteristics, prior_odds: float = 1.0) -> PostStudyOdds:
    """
    Post-study odds in favour of H0 after a negative outcome: (1/prior) * (1-alpha)/(1-power).

    Raises:
        DegenerateError: If power = 1
    """
    _check_prior(prior_odds)
    if not oc.informative:
        logger.warning(f"power {oc.power} <= alpha {oc.alpha}: outcome is anti-informative")
    return PostStudyOdds(oc.negative_lr / prior_odds, Hypothesis.H0, Outcome.NEGATIVE)


def cdp_odds(phase2: OperatingCharacteristics, phase3_pos_lr: Sequence[float],
             phase3_neg_lr: float, prior_odds_joint: float = 1.0) -> CdpOddsReport:
    """
    Post-study odds of the four CDP outcomes.

    Stages are independent given the hypotheses, so each value is the prior odds of the
    joint hypotheses times the phase 2 and phase 3 likelihood ratios. The odds of the
    joint null are taken against the joint alternative (H1,2, H1,3) for every outcome.

    Args:
        phase2 (OperatingCharacteristics): Phase 2 alpha and power
        phase3_pos_lr (Sequence[float]): Phase 3 positive likelihood ratio per analysis
        phase3_neg_lr (float): Phase 3 negative likelihood ratio p(-|H0)/p(-|H1)
        prior_odds_joint (float): P(H1,2, H1,3) / P(H0,2, H0,3)

    Returns:
        CdpOddsReport: The four post-study odds

    Raises:
        DegenerateError: If phase 2 power is 1
        DomainError: On nonpositive likelihood ratios or prior odds
    """
    _check_prior(prior_odds_joint)
    pos_lrs = tuple(float(lr) for lr in phase3_pos_lr)
    if not pos_lrs or any(not lr > 0 for lr in pos_lrs):
        raise DomainError(f"phase 3 positive likelihood ratios must be positive, got {pos_lrs}")
    if not phase3_neg_lr > 0:
        raise DomainError(f"phase 3 negative likelihood ratio must be positive, got {phase3_neg_lr}")
    if phase2.power >= 1.0:
        raise DegenerateError("phase 2 power = 1 leaves p(-2|H1,2) = 0 in a denominator")

    prior = prior_odds_joint
    ph2_pos = phase2.power / phase2.alpha
    ph2_neg = (1.0 - phase2.alpha) / (1.0 - phase2.power)

    r10_pp = tuple(PostStudyOdds(prior * ph2_pos * lr, Hypothesis.H1, Outcome.POS_POS) for lr in pos_lrs)
    r10_np = tuple(PostStudyOdds(prior / ph2_neg * lr, Hypothesis.H1, Outcome.NEG_POS) for lr in pos_lrs)
    r01_pn = PostStudyOdds(phase3_neg_lr / (prior * ph2_pos), Hypothesis.H0, Outcome.POS_NEG)
    r01_nn = PostStudyOdds(ph2_neg * phase3_neg_lr / prior, Hypothesis.H0, Outcome.NEG_NEG)

    return CdpOddsReport(
        r10_pp=r10_pp,
        r01_pn=r01_pn,
        r10_np=r10_np,
        r01_nn=r01_nn,
        phase2=phase2,
        phase3_pos_lr=pos_lrs,
        phase3_neg_lr=float(phase3_neg_lr),
        prior_odds_joint=prior,
    )


def outcome_percentiles(report: CdpOddsReport, joint: JointEquipoiseModel) -> Dict[Outcome, float]:
    """
    Joint equipoise percentile of each CDP outcome's odds (final phase 3 analysis).

    Args:
        report (CdpOddsReport): CDP odds
        joint (JointEquipoiseModel): Joint equipoise model

    Returns:
        Dict[Outcome, float]: Percentile per outcome
    """
    values = {
        Outcome.POS_POS: report.r10_pp_final.value,
        Outcome.POS_NEG: report.r01_pn.value,
        Outcome.NEG_POS: report.r10_np_final.value,
        Outcome.NEG_NEG: report.r01_nn.value,
    }
    return {outcome: product_cdf(joint, value) for outcome, value in values.items()}


def table1() -> List[Table1Row]:
    """
    Post-study odds after a positive outcome for the reference designs, with the BP(1,1)
    equipoise percentile of each.

    Returns:
        List[Table1Row]: One row per (alpha, power) design
    """
    rows = []
    for alpha, power in TABLE1_DESIGNS:
        odds = post_odds_positive(OperatingCharacteristics(alpha, power)).value
        rows.append(Table1Row(alpha, power, odds, odds_cdf(BP11, odds)))
    return rows
