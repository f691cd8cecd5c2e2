"""
Tables module for equical.
Assembles the published tables and the equipoise CDF figure data as DataFrames, shared by the
reproduce command and the tests.
"""

import logging
from typing import Callable, Dict, List, Optional

import pandas as pd

from equical import reference as ref
from equical.calibration import CdpCandidate
from equical.config import get_config
from equical.equipoise import BP11_JOINT, figure1_curve, named_model, product_quantile
from equical.gs_design import GroupSequentialDesign, analysis_likelihood_ratios, build_design
from equical.odds import OperatingCharacteristics, cdp_odds, table1 as table1_rows
from equical.prop_design import VarianceConvention, critical_difference, sample_size_two_props

logger = logging.getLogger(__name__)


def _convention(convention: Optional[str]) -> str:
    return convention or get_config()["odds"]["lr_convention"]


def phase3_design(power: float, n_total: int, fwer: float = ref.PHASE3_FWER) -> GroupSequentialDesign:
    """Confirmatory design with events pinned to the published fractions of n_total."""
    return build_design(
        ref.PHASE3_INFO_FRACTIONS,
        fwer,
        ref.PHASE3_HR_ALT,
        n_total=n_total,
        event_fractions=ref.PHASE3_EVENT_FRACTIONS,
        target_power=power,
        soc_median_months=ref.PHASE3_SOC_MEDIAN_MONTHS,
    )


def table1() -> pd.DataFrame:
    return pd.DataFrame([tuple(row) for row in table1_rows()], columns=ref.TABLE1_HEADER)


def table2(convention: Optional[str] = None) -> pd.DataFrame:
    """Operating characteristics and likelihood ratios of the confirmatory designs."""
    convention = _convention(convention)
    base_n = ref.TABLE2_DESIGNS[0][1]
    rows = []
    for power, n_total in ref.TABLE2_DESIGNS:
        design = phase3_design(power, n_total)
        lrs = analysis_likelihood_ratios(design, convention)
        ia, fa = design.analyses
        rows.append((power, n_total, 100.0 * n_total / base_n, ia.hr_critical, fa.hr_critical,
                     lrs.positive[0], lrs.positive[-1], lrs.negative))
    logger.info(f"Reproduced confirmatory design table with the {convention} convention")
    return pd.DataFrame(rows, columns=ref.TABLE2_HEADER)


def table3() -> pd.DataFrame:
    rows = [(p, product_quantile(BP11_JOINT, p).value) for p in ref.TABLE3_PERCENTILES]
    return pd.DataFrame(rows, columns=ref.TABLE3_HEADER)


def _cdp_plans(convention: str) -> List[Dict[str, object]]:
    plans = []
    for name, alpha2, power2, fwer3, power3, n3 in ref.TABLE4_DESIGNS:
        n2 = 2 * sample_size_two_props(ref.PHASE2_P_SOC, ref.PHASE2_P_INV, alpha2, power2)
        cv = critical_difference(ref.PHASE2_P_SOC, ref.PHASE2_P_INV, alpha2, n2 // 2,
                                 VarianceConvention.POOLED_NULL)
        design = phase3_design(power3, n3, fwer3)
        lrs = analysis_likelihood_ratios(design, convention)
        report = cdp_odds(OperatingCharacteristics(alpha2, power2), lrs.positive, lrs.negative)
        plans.append({
            "candidate": CdpCandidate(name, n2 + n3, report),
            "row": (
                name, n2 + n3, n2, n3, alpha2, fwer3, power2, power3, cv,
                design.analyses[0].hr_critical, design.analyses[-1].hr_critical,
                report.r10_pp[0].value, report.r10_pp_final.value, report.r01_pn.value,
                report.r10_np[0].value, report.r10_np_final.value, report.r01_nn.value,
            ),
        })
    return plans


def table4_candidates(convention: Optional[str] = None) -> List[CdpCandidate]:
    """The published development plans as search candidates."""
    return [plan["candidate"] for plan in _cdp_plans(_convention(convention))]


def table4(convention: Optional[str] = None) -> pd.DataFrame:
    """Post-study odds of the four outcomes of each published development plan."""
    rows = [plan["row"] for plan in _cdp_plans(_convention(convention))]
    return pd.DataFrame(rows, columns=ref.TABLE4_HEADER)


def figure1() -> pd.DataFrame:
    """CDF of each published equipoise model on the odds grid."""
    frame = pd.DataFrame({"odds": ref.FIGURE1_GRID})
    for name in ref.FIGURE1_MODELS:
        frame[f"cdf_{name}"] = [cdf for _, cdf in figure1_curve(named_model(name), ref.FIGURE1_GRID)]
    return frame[ref.FIGURE1_HEADER]


TARGETS: Dict[str, Callable[[], pd.DataFrame]] = {
    "table1": table1,
    "table2": table2,
    "table3": table3,
    "table4": table4,
    "figure1": figure1,
}


def write_table(target: str, path: str) -> pd.DataFrame:
    """
    Write one reproduced table as CSV.

    Args:
        target (str): One of TARGETS
        path (str): Output path

    Returns:
        pd.DataFrame: The written frame

    Raises:
        KeyError: If the target is unknown
        OSError: If the path cannot be written
    """
    frame = TARGETS[target]()
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {target} ({len(frame)} rows) to {path}")
    return frame
