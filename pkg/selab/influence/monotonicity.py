"""
Monte Carlo check that the degree-only influence transform is monotone.

With ``x`` uniform on ``[1, b/2]`` the transform ``x' = -(x/b) log2(c x / b)``
has derivative ``(1/b) log2(b / (e c x))``, which is decreasing in ``x`` and
non-negative on the whole interval whenever ``0 < c <= 2/e``. The density of
``x'`` is then bounded by ``b / (1 - log2(e c))``; the bound is infinite at
``c = 2/e`` where the derivative reaches zero at ``x = b/2``.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict

import numpy as np

from selab.core.exceptions import InfluenceError, MonotonicRegimeError
from selab.core.logger_manager import get_logger, log_execution_time

logger = get_logger(__name__)

MIN_SAMPLES = 1000
HISTOGRAM_BINS = 50
ORDER_TOLERANCE = 1e-12
REGIME_SLACK = 1e-12


@dataclass(frozen=True)
class MonotonicityReport:
    monotonic: bool
    violations: int
    pdf_bound_violations: int
    bound_value: float
    derivative_low: float
    derivative_high: float
    expected_low: float
    expected_high: float
    derivative_decreasing: bool

    def derivative_error(self) -> float:
        return max(abs(self.derivative_low - self.expected_low), abs(self.derivative_high - self.expected_high))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def transform(x: np.ndarray, b: float, c: float) -> np.ndarray:
    return -(x / b) * np.log2(c * x / b)


def transform_derivative(x: np.ndarray, b: float, c: float) -> np.ndarray:
    return np.log2(b / (math.e * c * x)) / b


def density_bound(b: float, c: float) -> float:
    denominator = 1.0 - math.log2(math.e * c)
    if denominator <= REGIME_SLACK:
        return math.inf
    return b / denominator


def _central_difference(x: float, b: float, c: float, h: float) -> float:
    hi = transform(np.array([x + h]), b, c)[0]
    lo = transform(np.array([x - h]), b, c)[0]
    return float((hi - lo) / (2.0 * h))


@log_execution_time()
def verify_influence_monotonicity(
    b: float, c: float, samples: int = 100_000, seed: int = 0, step: float = 1e-5
) -> MonotonicityReport:
    """Sample ``x``, transform it, and test order, density and derivative bounds."""
    if b < 2.0 or not 0.0 < c <= 2.0 / math.e + REGIME_SLACK:
        raise MonotonicRegimeError(b, c)
    if samples < MIN_SAMPLES:
        raise InfluenceError(f"at least {MIN_SAMPLES} samples are required, got {samples}")

    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(1.0, b / 2.0, size=samples))
    xp = transform(x, b, c)
    violations = int(np.count_nonzero(np.diff(xp) < -ORDER_TOLERANCE))

    bound = density_bound(b, c)
    pdf_violations = 0
    if math.isfinite(bound) and np.ptp(xp) > 0.0:
        counts, edges = np.histogram(xp, bins=HISTOGRAM_BINS)
        widths = np.diff(edges)
        density = counts / (samples * widths)
        sigma = np.sqrt(counts) / (samples * widths)
        pdf_violations = int(np.count_nonzero(density > bound + 3.0 * sigma))

    slopes = transform_derivative(x, b, c)
    report = MonotonicityReport(
        monotonic=violations == 0,
        violations=violations,
        pdf_bound_violations=pdf_violations,
        bound_value=bound,
        derivative_low=_central_difference(b / 2.0, b, c, step),
        derivative_high=_central_difference(1.0, b, c, step),
        expected_low=math.log2(2.0 / (math.e * c)) / b,
        expected_high=math.log2(b / (math.e * c)) / b,
        derivative_decreasing=bool(np.all(np.diff(slopes) <= ORDER_TOLERANCE)),
    )
    logger.info(
        f"Monotonicity check b={b}, c={c:.4f}: {violations} order violations, "
        f"{pdf_violations} density violations"
    )
    return report
