"""
Equipoise models module for equical.
Represents pre-study clinical equipoise as Beta-Prime distributions over the pre-study odds
R = P(H1)/P(H0), and the product of two independent odds for development-plan calibration.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from equical.exceptions import DomainError
from equical.numerics import find_root, integrate, regularized_incomplete_beta

logger = logging.getLogger(__name__)

# log-odds search window for quantiles, widened geometrically when needed
_LOG_ODDS_BRACKET = (math.log(1e-12), math.log(1e12))
_LOG_ODDS_LIMIT = 700.0
_SERIES_RADIUS = 1e-4


@dataclass(frozen=True)
class EquipoiseModel:
    """
    Beta-Prime(a, b) distribution of pre-study odds; equivalently P(H1) ~ Beta(a, b)
    with P(H0) = 1 - P(H1).
    """

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Beta-Prime shapes must be positive, got a={self.a}, b={self.b}")

    @property
    def label(self) -> str:
        return f"BP({self.a:g},{self.b:g})"

    @property
    def is_uniform(self) -> bool:
        return self.a == 1 and self.b == 1


@dataclass(frozen=True)
class JointEquipoiseModel:
    """Independent phase 2 and phase 3 equipoise models; the joint odds are R2 * R3."""

    phase2: EquipoiseModel
    phase3: EquipoiseModel

    @property
    def label(self) -> str:
        return f"{self.phase2.label}x{self.phase3.label}"

    @property
    def is_uniform(self) -> bool:
        return self.phase2.is_uniform and self.phase3.is_uniform


class QuantileEstimate(NamedTuple):
    """Quantile value with its standard error (zero for closed-form quantiles)."""

    value: float
    standard_error: float
    method: str


BP11 = EquipoiseModel(1.0, 1.0)
BP0505 = EquipoiseModel(0.5, 0.5)
BP12 = EquipoiseModel(1.0, 2.0)
BP11_JOINT = JointEquipoiseModel(BP11, BP11)

MODELS = {
    "bp11": BP11,
    "bp0505": BP0505,
    "bp12": BP12,
}


def named_model(name: str) -> EquipoiseModel:
    """
    Look up one of the published equipoise models.

    Args:
        name (str): One of 'bp11', 'bp0505', 'bp12'

    Returns:
        EquipoiseModel: The model

    Raises:
        DomainError: If the name is unknown
    """
    # accepts 'bp0505' as well as 'BP(0.5,0.5)'
    key = "".join(ch for ch in name.lower() if ch not in "()., ")
    if key not in MODELS:
        raise DomainError(f"unknown equipoise model {name!r}; expected one of {sorted(MODELS)}")
    return MODELS[key]


def odds_pdf(m: EquipoiseModel, r: float) -> float:
    """
    Beta-Prime density r^(a-1) (1+r)^-(a+b) / B(a, b).

    Raises:
        DomainError: If r <= 0
    """
    if not r > 0:
        raise DomainError(f"odds density requires r > 0, got {r}")
    log_density = (m.a - 1.0) * math.log(r) - (m.a + m.b) * math.log1p(r) - special.betaln(m.a, m.b)
    return math.exp(log_density)


def odds_cdf(m: EquipoiseModel, r: float) -> float:
    """
    Cumulative proportion of the expert population with pre-study odds at most r.

    Args:
        m (EquipoiseModel): Equipoise model
        r (float): Odds, r >= 0 (may be +inf)

    Returns:
        float: I_{r/(1+r)}(a, b)
    """
    if r < 0 or math.isnan(r):
        raise DomainError(f"odds_cdf requires r >= 0, got {r}")
    if r == 0:
        return 0.0
    if math.isinf(r):
        return 1.0
    if r <= 1.0:
        return regularized_incomplete_beta(m.a, m.b, r / (1.0 + r))
    # upper tail through the reflection keeps precision for large odds
    return 1.0 - regularized_incomplete_beta(m.b, m.a, 1.0 / (1.0 + r))


def _log_odds_root(cdf, p: float) -> float:
    lo, hi = _LOG_ODDS_BRACKET
    while cdf(math.exp(lo)) > p and lo > -_LOG_ODDS_LIMIT:
        lo = max(2.0 * lo, -_LOG_ODDS_LIMIT)
    while cdf(math.exp(hi)) < p and hi < _LOG_ODDS_LIMIT:
        hi = min(2.0 * hi, _LOG_ODDS_LIMIT)
    y = find_root(lambda u: cdf(math.exp(u)) - p, lo, hi, tol=1e-13)
    return math.exp(y)


def odds_quantile(m: EquipoiseModel, p: float) -> float:
    """
    Odds threshold at percentile p of the equipoise model.

    Args:
        m (EquipoiseModel): Equipoise model
        p (float): Percentile in (0, 1)

    Returns:
        float: r with odds_cdf(m, r) = p

    Raises:
        DomainError: If p is not in (0, 1)
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"odds_quantile requires 0 < p < 1, got {p}")
    return _log_odds_root(lambda r: odds_cdf(m, r), p)


def odds_mean(m: EquipoiseModel) -> float:
    """Mean pre-study odds a/(b-1); infinite when b <= 1."""
    if m.b <= 1.0:
        return math.inf
    return m.a / (m.b - 1.0)


def _uniform_product_cdf(c: float) -> float:
    h = c - 1.0
    if abs(h) < _SERIES_RADIUS:
        # second-order expansion around the removable singularity at c = 1
        return 0.5 + h / 6.0 - h * h / 12.0
    return c * (h - math.log(c)) / (h * h)


def _product_cdf_quadrature(j: JointEquipoiseModel, c: float) -> float:
    # P(R2 * R3 <= c) = E[F3(c / R2)], integrated over u = log R2
    log_c = math.log(c)

    def integrand(u: float) -> float:
        # quad maps the infinite range onto u values whose odds leave the float range
        if abs(u) > _LOG_ODDS_LIMIT:
            return 0.0
        r = math.exp(u)
        log_ratio = log_c - u
        if log_ratio > _LOG_ODDS_LIMIT:
            tail = 1.0
        elif log_ratio < -_LOG_ODDS_LIMIT:
            tail = 0.0
        else:
            tail = odds_cdf(j.phase3, math.exp(log_ratio))
        return odds_pdf(j.phase2, r) * r * tail

    split = 0.5 * log_c
    return (integrate(integrand, -math.inf, split, tol=1e-10)
            + integrate(integrand, split, math.inf, tol=1e-10))


def product_cdf(j: JointEquipoiseModel, c: float) -> float:
    """
    Joint equipoise CDF of the product odds R2 * R3.

    The independence BP(1,1) model uses the closed form c((c-1) - ln c)/(c-1)^2; other
    pairs are composed numerically.

    Args:
        j (JointEquipoiseModel): Joint model
        c (float): Product-odds threshold, c > 0

    Returns:
        float: P(R2 * R3 <= c)

    Raises:
        DomainError: If c <= 0
    """
    if not c > 0:
        raise DomainError(f"product_cdf requires c > 0, got {c}")
    if math.isinf(c):
        return 1.0
    if j.is_uniform:
        return _uniform_product_cdf(c)
    return _product_cdf_quadrature(j, c)


def product_quantile(j: JointEquipoiseModel, p: float, samples: int = 1_000_000,
                     seed: Optional[int] = None) -> QuantileEstimate:
    """
    Joint odds threshold at percentile p.

    Args:
        j (JointEquipoiseModel): Joint model
        p (float): Percentile in (0, 1)
        samples (int): Monte Carlo sample size for models without a closed form
        seed (Optional[int]): Seed for the Monte Carlo fallback

    Returns:
        QuantileEstimate: Threshold with standard error (0 for the closed form)
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"product_quantile requires 0 < p < 1, got {p}")
    if j.is_uniform:
        return QuantileEstimate(_log_odds_root(_uniform_product_cdf, p), 0.0, "closed-form")

    from equical.simulation import mc_product_quantile

    logger.warning(f"No closed form for {j.label}; estimating the {p:.3g} quantile by Monte Carlo")
    return mc_product_quantile(j, p, samples=samples, seed=seed)


def equipoise_percentile(model: Union[EquipoiseModel, JointEquipoiseModel], odds: float) -> float:
    """Percentile of observed post-study odds under a single or joint equipoise model."""
    if isinstance(model, JointEquipoiseModel):
        return product_cdf(model, odds)
    return odds_cdf(model, odds)


def sample_odds(m: EquipoiseModel, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    Inverse-CDF draws of Beta-Prime odds.

    Args:
        m (EquipoiseModel): Equipoise model
        size (int): Number of draws
        rng (np.random.Generator): Source of uniforms

    Returns:
        np.ndarray: Odds draws
    """
    u = rng.random(size)
    # X / (1 - X) with both factors from their own quantile functions
    return special.betaincinv(m.a, m.b, u) / special.betaincinv(m.b, m.a, 1.0 - u)


def figure1_curve(m: EquipoiseModel, grid: Sequence[float]) -> List[Tuple[float, float]]:
    """
    CDF of an equipoise model on a grid of odds.

    Args:
        m (EquipoiseModel): Equipoise model
        grid (Sequence[float]): Strictly increasing positive odds

    Returns:
        List[Tuple[float, float]]: Pairs (odds, cdf)
    """
    values = [float(r) for r in grid]
    if any(r <= 0 for r in values):
        raise DomainError("figure grid must contain positive odds")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError("figure grid must be strictly increasing")
    return [(r, odds_cdf(m, r)) for r in values]
