"""Market simulation: disclosure strategies facing a sequential searcher.

The market has a true price density. The disclosing agent starts from n
prices laid out with equal probability mass between neighbors, picks a
subset by one of the strategies, and the searcher judges further querying
by the critical cost of what it has seen. At queue position k >= 2 the
searcher has already collected k-1 competitor listings drawn from the true
density, so the critical cost is computed on the pooled set.

Every trial's randomness derives from (base_seed, trial, role), making
whole experiments reproducible and worker-count-invariant.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import PriceEntry, PriceList
from .density import Density, equal_mass_prices, quantile_array
from .disclosure import (
    DisclosureConstraints,
    METHODS,
    _evaluate_cents,
    brute_force_disclose,
    interval_disclose,
    minimal_disclose,
    monte_carlo_disclose,
)
from .errors import ValidationError
from .search import expected_new_prices, interval_subset_count, minimal_subset_count

# Stream roles for per-trial seed derivation.
_ROLE_MC_SELECT = 0
_ROLE_CSA_DRAWS = 1

DETERMINISTIC_METHODS = ("brute_force", "interval", "minimal", "full")


@dataclass(frozen=True)
class MarketConfig:
    true_density: Density
    csa_listing_mean: float
    overlap_rate: float = 0.12
    rho: int = 10
    initial_set_size_n: int = 30
    estimator: str = "kde"
    trials: int | None = None  # default: 1000 at position 1, 100 deeper
    base_seed: int = 0
    stated_minimum: float | None = None
    csa_draw_count: int | None = None  # override for the per-query yield N
    product_id: str = "market"

    def __post_init__(self):
        if not 0.0 <= self.overlap_rate < 1.0:
            raise ValidationError(f"overlap_rate must be in [0, 1), got {self.overlap_rate}")
        if self.csa_listing_mean <= 0:
            raise ValidationError(f"csa_listing_mean must be positive, got {self.csa_listing_mean}")
        if not 1 <= self.rho <= self.initial_set_size_n:
            raise ValidationError(
                f"need 1 <= rho <= initial_set_size_n, got rho={self.rho}, "
                f"n={self.initial_set_size_n}"
            )
        if self.base_seed < 0:
            raise ValidationError(f"base_seed must be nonnegative, got {self.base_seed}")
        if self.trials is not None and self.trials < 1:
            raise ValidationError(f"trials must be positive, got {self.trials}")

    def resolved_draw_count(self) -> int:
        if self.csa_draw_count is not None:
            if self.csa_draw_count < 1:
                raise ValidationError(f"csa_draw_count must be positive, got {self.csa_draw_count}")
            return self.csa_draw_count
        return expected_new_prices(self.csa_listing_mean, self.overlap_rate)

    def resolved_trials(self, position_k: int) -> int:
        if self.trials is not None:
            return self.trials
        return 1000 if position_k == 1 else 100


@dataclass(frozen=True)
class SimulationReport:
    method: str
    curve: tuple[tuple[int, float, float], ...]  # (budget, mean_cost, std_error)
    full_set_cost: float
    position_k: int
    trials: int
    base_seed: int
    trial_costs: tuple[tuple[float, ...], ...]  # per curve point, by trial


def _derive_seed(base_seed: int, *path: int) -> int:
    state = np.random.SeedSequence([base_seed, *path]).generate_state(2, np.uint64)
    return int(state[0]) | (int(state[1]) << 64)


def _trial_rng(base_seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=_derive_seed(base_seed, *path)))


def generate_initial_prices(cfg: MarketConfig) -> PriceList:
    """The disclosing agent's n prices: equal mass between neighbors,
    anchored at the stated minimum (or the density's sample minimum)."""
    floats = equal_mass_prices(
        cfg.true_density, cfg.initial_set_size_n, q0=cfg.stated_minimum
    )
    entries = tuple(
        PriceEntry("generated", max(1, int(np.floor(p * 100.0 + 0.5)))) for p in floats
    )
    return PriceList(cfg.product_id, entries)


def draw_csa_listing(cfg: MarketConfig, rng: np.random.Generator) -> PriceList:
    """One competitor's listing: N i.i.d. inverse-cdf draws from the true
    density, N being the overlap-discounted expected yield."""
    n_draw = cfg.resolved_draw_count()
    levels = rng.random(n_draw)
    prices = quantile_array(cfg.true_density, levels)
    entries = tuple(
        PriceEntry("csa-draw", max(1, int(np.floor(p * 100.0 + 0.5)))) for p in prices
    )
    return PriceList(cfg.product_id, entries)


def _pooled_cost(
    subset: PriceList, extra_cents: tuple[int, ...], n_new: int, estimator: str
) -> float:
    cents = tuple(sorted(tuple(e.cents for e in subset.entries) + extra_cents))
    return _evaluate_cents(cents, n_new, estimator).value


def _csa_draw_cents(cfg: MarketConfig, trial: int, position_k: int) -> tuple[int, ...]:
    cents: list[int] = []
    for j in range(position_k - 1):
        rng = _trial_rng(cfg.base_seed, trial, _ROLE_CSA_DRAWS, j)
        cents.extend(e.cents for e in draw_csa_listing(cfg, rng).entries)
    return tuple(cents)


def _trial_worker(args) -> tuple[int, dict]:
    (cfg, trial, position_k, mc_budgets, subsets, n_new) = args
    extra = _csa_draw_cents(cfg, trial, position_k)
    out: dict = {}
    for method, subset in subsets.items():
        out[method] = _pooled_cost(subset, extra, n_new, cfg.estimator)
    if mc_budgets:
        seed = _derive_seed(cfg.base_seed, trial, _ROLE_MC_SELECT)
        initial = subsets["full"]
        constraints = DisclosureConstraints(rho=cfg.rho)
        per_budget = []
        for budget in mc_budgets:
            res = monte_carlo_disclose(initial, constraints, n_new, budget, seed, cfg.estimator)
            per_budget.append(_pooled_cost(res.subset, extra, n_new, cfg.estimator))
        out["monte_carlo"] = tuple(per_budget)
    return trial, out


def simulate_kth_position(
    cfg: MarketConfig,
    position_k: int,
    methods,
    budgets=(),
    workers: int = 1,
) -> list[SimulationReport]:
    """Run the disclosure-vs-search experiment at queue position k.

    Deterministic strategies are evaluated once per trial on the pooled
    set; the randomized strategy is rerun per (trial, budget). At k = 1
    there is nothing to pool and no trial randomness for deterministic
    strategies, so those collapse to a single trial.
    """
    if position_k < 1:
        raise ValidationError(f"position must be at least 1, got {position_k}")
    methods = tuple(dict.fromkeys(methods))
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"unknown method {m!r}; choose from {METHODS}")
    budgets = tuple(int(b) for b in budgets)
    if "monte_carlo" in methods and not budgets:
        raise ValidationError("monte_carlo simulation needs at least one budget")

    initial = generate_initial_prices(cfg)
    n = len(initial)
    n_new = cfg.resolved_draw_count()
    constraints = DisclosureConstraints(rho=cfg.rho)
    trials = cfg.resolved_trials(position_k)

    # Disclosed sets for the deterministic strategies, computed once.
    subsets: dict[str, PriceList] = {"full": initial}
    natural_counts: dict[str, int] = {"full": 1}
    if "interval" in methods:
        res = interval_disclose(initial, constraints, n_new, cfg.estimator)
        subsets["interval"] = res.subset
        natural_counts["interval"] = res.subsets_evaluated
    if "minimal" in methods:
        res = minimal_disclose(initial, constraints, n_new, cfg.estimator)
        subsets["minimal"] = res.subset
        natural_counts["minimal"] = res.subsets_evaluated
    if "brute_force" in methods:
        res = brute_force_disclose(initial, constraints, n_new, cfg.estimator, workers)
        subsets["brute_force"] = res.subset
        natural_counts["brute_force"] = res.subsets_evaluated

    mc_budgets = budgets if "monte_carlo" in methods else ()

    # Per-trial costs. At k = 1 deterministic pooled costs are constant, so
    # only the randomized strategy needs the full trial loop.
    det_trials = 1 if position_k == 1 else trials
    mc_trials = trials if "monte_carlo" in methods else 0
    needed = max(det_trials, mc_trials)

    tasks = [
        (cfg, t, position_k, mc_budgets if t < mc_trials else (), subsets, n_new)
        for t in range(needed)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_trial_worker, tasks, chunksize=8))
    else:
        results = dict(map(_trial_worker, tasks))

    def det_costs(method: str) -> tuple[float, ...]:
        return tuple(results[t][method] for t in range(det_trials))

    full_costs = det_costs("full")
    full_set_cost = float(np.mean(full_costs))

    reports: list[SimulationReport] = []
    for method in methods:
        if method == "monte_carlo":
            curve = []
            per_point = []
            for bi, budget in enumerate(budgets):
                costs = tuple(results[t]["monte_carlo"][bi] for t in range(mc_trials))
                mean = float(np.mean(costs))
                se = (
                    float(np.std(costs, ddof=1) / np.sqrt(len(costs)))
                    if len(costs) > 1
                    else 0.0
                )
                curve.append((budget, mean, se))
                per_point.append(costs)
            reports.append(
                SimulationReport(
                    method="monte_carlo",
                    curve=tuple(curve),
                    full_set_cost=full_set_cost,
                    position_k=position_k,
                    trials=mc_trials,
                    base_seed=cfg.base_seed,
                    trial_costs=tuple(per_point),
                )
            )
        else:
            costs = det_costs(method)
            mean = float(np.mean(costs))
            se = float(np.std(costs, ddof=1) / np.sqrt(len(costs))) if len(costs) > 1 else 0.0
            reports.append(
                SimulationReport(
                    method=method,
                    curve=((natural_counts[method], mean, se),),
                    full_set_cost=full_set_cost,
                    position_k=position_k,
                    trials=det_trials,
                    base_seed=cfg.base_seed,
                    trial_costs=(costs,),
                )
            )
    return reports


def simulate_first_position(cfg: MarketConfig, methods, budgets=(), workers: int = 1):
    """Position-1 experiment; exactly simulate_kth_position at k = 1."""
    return simulate_kth_position(cfg, 1, methods, budgets, workers)


@dataclass(frozen=True)
class SizeEffectRow:
    initial_set_size_n: int
    mean_cost: float
    trial_costs: tuple[float, ...]


def size_effect_experiment(
    cfg: MarketConfig,
    sizes,
    method: str,
    budget: int,
    workers: int = 1,
) -> tuple[SizeEffectRow, ...]:
    """First-position mean cost as the initial list size varies; trial
    seeds depend only on (base_seed, trial), so rows pair up by trial."""
    rows = []
    for size in sizes:
        if size < cfg.rho:
            raise ValidationError(f"size {size} is below rho {cfg.rho}")
        sized = dataclasses.replace(cfg, initial_set_size_n=int(size))
        reports = simulate_kth_position(sized, 1, (method,), (budget,), workers)
        report = reports[0]
        _, mean, _ = report.curve[-1]
        rows.append(SizeEffectRow(int(size), mean, report.trial_costs[-1]))
    return tuple(rows)
