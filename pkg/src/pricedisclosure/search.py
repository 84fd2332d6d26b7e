"""Sequential-search decision model over an estimated price density.

Given the best price found so far (q) and the number of genuinely new
prices one more query would surface (N), the searcher weighs the query fee
against the expected saving from the minimum of N fresh draws. The
critical cost is that expected saving; the searcher stops once the fee
reaches it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .data import PriceList
from .density import Density
from .errors import NumericalError, ValidationError
from .quadrature import adaptive_simpson

# Two integral forms of the expected saving must agree this closely.
AGREEMENT_TOL_ABS = 1e-6
AGREEMENT_TOL_REL = 1e-4


class Decision(enum.Enum):
    TERMINATE = "terminate"
    CONTINUE_SEARCH = "continue_search"


@dataclass(frozen=True)
class CriticalCost:
    """Expected saving from one more query; the indifference query fee."""

    value: float
    q: float
    n_new: int
    integration_error_estimate: float

    def __post_init__(self):
        if not self.value >= 0.0:
            raise NumericalError(f"critical cost must be nonnegative, got {self.value}")
        if self.value > self.q * (1.0 + 1e-9) + 1e-12:
            raise NumericalError(
                f"critical cost {self.value} exceeds best price {self.q}"
            )


@dataclass(frozen=True)
class SearcherState:
    best_price_q: float
    observed_prices: PriceList
    query_cost: float
    expected_new_count: int

    def __post_init__(self):
        if abs(self.best_price_q - self.observed_prices.min_price) > 1e-9:
            raise ValidationError(
                f"best_price_q {self.best_price_q} is not the minimum of the "
                f"observed prices ({self.observed_prices.min_price})"
            )
        if self.query_cost < 0:
            raise ValidationError(f"query cost must be nonnegative, got {self.query_cost}")
        if self.expected_new_count < 1:
            raise ValidationError(
                f"expected_new_count must be at least 1, got {self.expected_new_count}"
            )

    @classmethod
    def from_prices(cls, prices: PriceList, query_cost: float, expected_new_count: int):
        return cls(prices.min_price, prices, query_cost, expected_new_count)


def _check_n(n_new: int) -> int:
    n = int(n_new)
    if n < 1:
        raise ValidationError(f"number of new draws must be at least 1, got {n_new}")
    return n


def min_order_pdf(density: Density, n_new: int, y):
    """Density of the minimum of ``n_new`` i.i.d. draws at ``y``."""
    n = _check_n(n_new)
    y_arr = np.asarray(y, dtype=float)
    pdf = np.asarray(density.pdf(y_arr), dtype=float)
    sf = 1.0 - np.asarray(density.cdf(y_arr), dtype=float)
    out = n * pdf * sf ** (n - 1)
    return out if y_arr.ndim else float(out)


def min_order_cdf(density: Density, n_new: int, y):
    """Probability that the minimum of ``n_new`` i.i.d. draws is <= ``y``."""
    n = _check_n(n_new)
    y_arr = np.asarray(y, dtype=float)
    sf = 1.0 - np.asarray(density.cdf(y_arr), dtype=float)
    out = 1.0 - sf**n
    return out if y_arr.ndim else float(out)


def critical_cost(density: Density, q: float, n_new: int) -> CriticalCost:
    """Expected saving from one more query given best price ``q``.

    Computes the expectation integral of (q - y) against the minimum-order
    density and its integration-by-parts twin (the integrated minimum-order
    cdf), checks they agree within max(1e-6, 1e-4 * value), and returns the
    twin, whose integrand is smoother.
    """
    n = _check_n(n_new)
    q = float(q)
    if not math.isfinite(q):
        raise ValidationError(f"q must be finite, got {q}")
    low = density.support_low
    if q < low:
        raise ValidationError(f"q={q} lies below the support lower bound {low}")
    if q <= low:
        return CriticalCost(0.0, q, n, 0.0)

    def integrated_cdf_form(y: np.ndarray) -> np.ndarray:
        sf = 1.0 - np.asarray(density.cdf(y), dtype=float)
        return 1.0 - sf**n

    def expectation_form(y: np.ndarray) -> np.ndarray:
        f = np.asarray(density.pdf(y), dtype=float)
        sf = 1.0 - np.asarray(density.cdf(y), dtype=float)
        return (q - y) * n * f * sf ** (n - 1)

    # The expectation integrand can be a narrow bump just below q that a
    # coarse probe would miss entirely; force eight refinement levels.
    dual, err_dual = adaptive_simpson(integrated_cdf_form, low, q, min_depth=8)
    direct, err_direct = adaptive_simpson(expectation_form, low, q, min_depth=8)
    gap = abs(dual - direct)
    if gap > max(AGREEMENT_TOL_ABS, AGREEMENT_TOL_REL * abs(dual)):
        raise NumericalError(
            f"integral forms disagree: {dual} vs {direct} (gap {gap})",
            error_estimate=gap,
        )
    value = min(max(dual, 0.0), q)
    return CriticalCost(value, q, n, err_dual + err_direct)


def decide(state: SearcherState, cost: CriticalCost) -> Decision:
    """Stop searching iff the query fee is at least the expected saving."""
    if state.query_cost >= cost.value:
        return Decision.TERMINATE
    return Decision.CONTINUE_SEARCH


def expected_new_prices(avg_listings: float, overlap_rate: float) -> int:
    """New prices another query yields: listings discounted by overlap."""
    if avg_listings <= 0:
        raise ValidationError(f"avg_listings must be positive, got {avg_listings}")
    if not 0.0 <= overlap_rate < 1.0:
        raise ValidationError(f"overlap_rate must be in [0, 1), got {overlap_rate}")
    return max(1, math.floor(avg_listings * (1.0 - overlap_rate) + 0.5))


def improvement_upper_bound(k: int, j: int) -> float:
    """Largest possible gain from widening a size-k disclosure by j prices."""
    if k < 1 or j < 1:
        raise ValidationError(f"need k >= 1 and j >= 1, got k={k}, j={j}")
    return j / (k * (k + j))


def subset_count(n: int, rho: int) -> int:
    """Number of disclosable subsets: contain the minimum, size at least rho."""
    if not 1 <= rho <= n:
        raise ValidationError(f"need 1 <= rho <= n, got rho={rho}, n={n}")
    return sum(math.comb(n - 1, k - 1) for k in range(rho, n + 1))


def interval_subset_count(n: int, rho: int) -> int:
    """Candidates the interval strategy evaluates; triangular in n - rho."""
    if not 1 <= rho <= n:
        raise ValidationError(f"need 1 <= rho <= n, got rho={rho}, n={n}")
    m = n - rho + 1
    return m * (m + 1) // 2


def minimal_subset_count(n: int, rho: int) -> int:
    """Candidates the prefix-only strategy evaluates, full set included."""
    if not 1 <= rho <= n:
        raise ValidationError(f"need 1 <= rho <= n, got rho={rho}, n={n}")
    return n - rho + 1
