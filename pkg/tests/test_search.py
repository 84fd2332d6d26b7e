"""Searcher decision model: order statistics, critical cost, counts."""

import numpy as np
import pytest

from pricedisclosure.data import PriceEntry, PriceList
from pricedisclosure.density import UniformDensity, fit_kde
from pricedisclosure.errors import NumericalError, ValidationError
from pricedisclosure.search import (
    CriticalCost,
    Decision,
    SearcherState,
    critical_cost,
    decide,
    expected_new_prices,
    improvement_upper_bound,
    interval_subset_count,
    min_order_cdf,
    min_order_pdf,
    minimal_subset_count,
    subset_count,
)

UNIT = UniformDensity(0.0, 1.0)


def uniform_closed_form(q: float, n: int) -> float:
    return q - (1.0 - (1.0 - q) ** (n + 1)) / (n + 1)


def test_min_order_pdf_examples():
    assert min_order_pdf(UNIT, 1, 0.3) == pytest.approx(UNIT.pdf(0.3))
    assert min_order_pdf(UNIT, 2, 0.5) == pytest.approx(1.0)
    assert min_order_pdf(UNIT, 5, 1.0) == 0.0  # cdf there is 1
    with pytest.raises(ValidationError):
        min_order_pdf(UNIT, 0, 0.5)


def test_min_order_cdf_examples():
    assert min_order_cdf(UNIT, 1, 0.3) == pytest.approx(0.3)
    assert min_order_cdf(UNIT, 18, 0.9) == pytest.approx(1.0 - 0.1**18)
    assert min_order_cdf(UNIT, 7, 0.0) == 0.0
    with pytest.raises(ValidationError):
        min_order_cdf(UNIT, 0, 0.5)


def test_min_order_cdf_dominance_in_n():
    y = np.linspace(0.05, 0.95, 19)
    for n1, n2 in [(1, 2), (3, 9), (10, 30)]:
        lo = np.array([min_order_cdf(UNIT, n1, v) for v in y])
        hi = np.array([min_order_cdf(UNIT, n2, v) for v in y])
        assert np.all(hi >= lo)


def test_min_order_pdf_is_cdf_derivative():
    d = fit_kde([10.0, 12.0, 15.0, 18.0, 22.0])
    h = 1e-5
    for y in (11.0, 14.0, 17.0):
        for n in (1, 4, 9):
            numeric = (min_order_cdf(d, n, y + h) - min_order_cdf(d, n, y - h)) / (2 * h)
            analytic = min_order_pdf(d, n, y)
            assert numeric == pytest.approx(analytic, rel=1e-4)


def test_critical_cost_uniform_examples():
    assert critical_cost(UNIT, 0.5, 1).value == pytest.approx(0.125, abs=1e-8)
    assert critical_cost(UNIT, 0.5, 3).value == pytest.approx(0.265625, abs=1e-8)
    assert critical_cost(UNIT, 0.0, 4).value == 0.0


def test_critical_cost_uniform_closed_form_sweep():
    rng = np.random.default_rng(21)
    for _ in range(60):
        q = float(rng.uniform(0.05, 0.95))
        n = int(rng.integers(1, 30))
        got = critical_cost(UNIT, q, n)
        assert got.value == pytest.approx(uniform_closed_form(q, n), abs=1e-6)
        assert got.q == q and got.n_new == n
        assert got.integration_error_estimate >= 0.0


def test_critical_cost_validation():
    with pytest.raises(ValidationError):
        critical_cost(UNIT, 0.5, 0)
    with pytest.raises(ValidationError):
        critical_cost(UNIT, -0.1, 3)


def test_critical_cost_fields_validated():
    # A negative or above-q value is a numerical failure, not caller error.
    with pytest.raises(NumericalError):
        CriticalCost(value=-0.1, q=1.0, n_new=2, integration_error_estimate=0.0)
    with pytest.raises(NumericalError):
        CriticalCost(value=2.0, q=1.0, n_new=2, integration_error_estimate=0.0)


def _state(cents, cost):
    prices = PriceList("x", tuple(PriceEntry("s", c) for c in cents))
    return SearcherState.from_prices(prices, query_cost=cost, expected_new_count=5)


def test_decide_rule_with_boundary():
    cc = CriticalCost(value=4.0, q=5.0, n_new=5, integration_error_estimate=0.0)
    assert decide(_state([500, 700], 5.0), cc) is Decision.TERMINATE
    assert decide(_state([500, 700], 3.0), cc) is Decision.CONTINUE_SEARCH
    assert decide(_state([500, 700], 4.0), cc) is Decision.TERMINATE


def test_searcher_state_minimum_consistency():
    prices = PriceList("x", (PriceEntry("s", 500), PriceEntry("s", 700)))
    with pytest.raises(ValidationError):
        SearcherState(
            best_price_q=7.0, observed_prices=prices, query_cost=1.0, expected_new_count=3
        )


def test_expected_new_prices():
    assert expected_new_prices(20.6, 0.12) == 18
    assert expected_new_prices(10, 0.0) == 10
    assert expected_new_prices(26.6, 0.12) == 23
    assert expected_new_prices(0.4, 0.5) == 1  # floor at one price
    with pytest.raises(ValidationError):
        expected_new_prices(10, 1.0)


def test_improvement_upper_bound():
    assert improvement_upper_bound(4, 1) == 0.05
    assert improvement_upper_bound(1, 1) == 0.5
    assert improvement_upper_bound(2, 3) == pytest.approx(0.3)
    with pytest.raises(ValidationError):
        improvement_upper_bound(0, 1)


def test_subset_count_pinned_values():
    assert subset_count(20, 10) == 354_522
    assert subset_count(25, 10) == 15_505_590
    assert subset_count(30, 10) == 530_396_371
    assert subset_count(12, 5) == 1816


def test_subset_count_identity_and_validation():
    for n in (1, 5, 16, 31):
        assert subset_count(n, 1) == 2 ** (n - 1)
    with pytest.raises(ValidationError):
        subset_count(5, 6)
    with pytest.raises(ValidationError):
        subset_count(5, 0)


def test_interval_subset_count():
    assert interval_subset_count(30, 10) == 231
    assert interval_subset_count(7, 7) == 1
    assert interval_subset_count(5, 3) == 6


def test_minimal_subset_count():
    assert minimal_subset_count(30, 10) == 21
    assert minimal_subset_count(11, 10) == 2
    assert minimal_subset_count(6, 6) == 1


def test_critical_cost_monotone_in_q_and_n():
    d = fit_kde([3.0, 4.0, 5.5, 7.0, 9.0])
    costs_q = [critical_cost(d, q, 6).value for q in (3.0, 4.5, 6.0, 8.0)]
    assert all(a <= b + 1e-9 for a, b in zip(costs_q, costs_q[1:]))
    costs_n = [critical_cost(d, 6.0, n).value for n in (1, 2, 5, 12, 25)]
    assert all(a <= b + 1e-9 for a, b in zip(costs_n, costs_n[1:]))
