"""
Numerics module for equical.
Scalar special functions, root finding, quadrature and reproducible random-number streams
shared by every other module.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from equical.exceptions import ConvergenceError, DomainError, NoSignChangeError

logger = logging.getLogger(__name__)

MAX_ROOT_ITERATIONS = 200
_UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class RngStream:
    """
    Reproducible random stream identified by (seed, stream_index).

    Streams come from the counter-based Philox generator keyed through a SeedSequence
    spawn key, so equal pairs give identical sequences and distinct indices give
    independent streams whatever the scheduling of replicates.
    """

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_index"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= int(value) <= _UINT64_MAX:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value!r}")

    def generator(self) -> np.random.Generator:
        """
        Build a fresh generator positioned at the start of this stream.

        Returns:
            np.random.Generator: Generator over a Philox bit generator
        """
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(seq))


def normal_cdf(x: float) -> float:
    """Standard normal CDF; saturates to 0/1 in the tails."""
    return float(special.ndtr(x))


def normal_quantile(p: float) -> float:
    """
    Standard normal quantile.

    Args:
        p (float): Probability in (0, 1)

    Returns:
        float: x with normal_cdf(x) = p

    Raises:
        DomainError: If p is not in (0, 1)
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal_quantile requires 0 < p < 1, got {p}")
    return float(special.ndtri(p))


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """
    Regularized incomplete beta function I_x(a, b).

    Args:
        a (float): Positive shape
        b (float): Positive shape
        x (float): Point in [0, 1]

    Returns:
        float: I_x(a, b)

    Raises:
        DomainError: On nonpositive shapes or x outside [0, 1]
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"incomplete beta requires positive shapes, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete beta requires 0 <= x <= 1, got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    return float(special.betainc(a, b, x))


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """
    Find a root of f in [lo, hi] by Brent's method.

    Args:
        f (Callable[[float], float]): Continuous function
        lo (float): Lower end of the bracket
        hi (float): Upper end of the bracket
        tol (float): Absolute bracket-width tolerance

    Returns:
        float: Root location

    Raises:
        DomainError: If tol is not positive
        NoSignChangeError: If f(lo) and f(hi) share a sign
        ConvergenceError: If the iteration cap is reached
    """
    if not tol > 0:
        raise DomainError(f"find_root requires tol > 0, got {tol}")
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if math.isnan(f_lo) or math.isnan(f_hi) or f_lo * f_hi > 0:
        raise NoSignChangeError(f"no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")

    root, result = brentq(f, lo, hi, xtol=tol, maxiter=MAX_ROOT_ITERATIONS,
                          full_output=True, disp=False)
    if not result.converged:
        raise ConvergenceError(
            f"find_root did not converge after {result.iterations} iterations",
            estimate=float(root),
            bracket=(float(lo), float(hi)),
        )
    logger.debug(f"find_root converged to {root!r} in {result.iterations} iterations")
    return float(root)


def integrate(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8) -> float:
    """
    Adaptive quadrature of f over [lo, hi]; infinite limits are mapped internally.

    Args:
        f (Callable[[float], float]): Piecewise smooth integrand
        lo (float): Lower limit (may be -inf)
        hi (float): Upper limit (may be +inf)
        tol (float): Relative error target

    Returns:
        float: Integral estimate

    Raises:
        ConvergenceError: If the error estimate misses the target; carries the partial estimate
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        result = quad(f, lo, hi, epsabs=1e-14, epsrel=tol, limit=200, full_output=1)

    value, abserr = float(result[0]), float(result[1])
    if len(result) == 4 and abserr > tol * abs(value) + 1e-12:
        raise ConvergenceError(f"integrate did not converge on [{lo}, {hi}]: {result[3]}",
                               estimate=value)
    return value
