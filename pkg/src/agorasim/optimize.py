"""Design search over property rewrites and grid search over price/quantity.

Both searches are discrete and deterministic: exhaustive when the candidate
space is small enough, beam search with a declared width otherwise, and
tie-breaks that make reruns reproducible. Results carry enough of the scan
to let reports show how revenue bends away from linear scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import fmean
from typing import Sequence

from .bundling import BundlingModel, bundled_total
from .errors import DomainMismatch, SearchBudgetExceeded
from .functors import evaluate
from .market import Agent
from .properties import PropertyMorphism, PropertySet

EXHAUSTIVE_LIMIT = 10_000


@dataclass(frozen=True)
class DesignProblem:
    """Search for rewrites of a base design that maximize audience value net of cost."""

    base: PropertySet
    catalog: tuple[PropertyMorphism, ...]
    costs: dict[str, float]
    audience: tuple[Agent, ...]
    max_steps: int
    beam_width: int = 32
    exhaustive_limit: int = EXHAUSTIVE_LIMIT
    eval_budget: int | None = None

    def __post_init__(self):
        missing = [m.name for m in self.catalog if m.name not in self.costs]
        if missing:
            raise ValueError(f"costs missing for morphisms: {missing}")
        bad = {name: c for name, c in self.costs.items() if c < 0.0}
        if bad:
            raise ValueError(f"morphism costs must be >= 0: {bad}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")


@dataclass(frozen=True)
class DesignResult:
    design: PropertySet
    objective: float
    applied: tuple[str, ...]
    evaluated: int
    exhaustive: bool


def _audience_mean(problem: DesignProblem, cache: dict, candidate: PropertySet) -> float:
    if candidate in cache:
        return cache[candidate]
    if problem.audience:
        value = fmean(evaluate(agent.functor, candidate).total() for agent in problem.audience)
    else:
        value = 0.0
    cache[candidate] = value
    return value


def optimize_design(problem: DesignProblem) -> DesignResult:
    """Best rewrite sequence of length <= max_steps, by audience mean minus cost.

    Enumerates every applicable sequence while the candidate count stays
    within ``exhaustive_limit``; past that it restarts as a beam search of
    the declared width. Ties break on the lexicographically smallest name
    sequence, so reruns are stable. The base design raising DomainMismatch
    for any audience member propagates; rewrites that leave an audience
    functor's domain are skipped. If ``eval_budget`` is set and exhausted,
    SearchBudgetExceeded carries the best result found so far.
    """
    cache: dict[PropertySet, float] = {}
    sorted_catalog = sorted(problem.catalog, key=lambda m: m.name)
    base_objective = _audience_mean(problem, cache, problem.base)  # DomainMismatch propagates

    best: tuple[float, tuple[str, ...], PropertySet] = (base_objective, (), problem.base)
    evaluated = 1

    def consider(objective: float, names: tuple[str, ...], candidate: PropertySet):
        nonlocal best
        if objective > best[0] or (objective == best[0] and names < best[1]):
            best = (objective, names, candidate)

    def result(exhaustive: bool) -> DesignResult:
        return DesignResult(design=best[2], objective=best[0], applied=best[1],
                            evaluated=evaluated, exhaustive=exhaustive)

    def expand(frontier, exhaustive: bool):
        nonlocal evaluated
        children = []
        for names, candidate, cost in frontier:
            for morphism in sorted_catalog:
                if not morphism.applicable(candidate):
                    continue
                child = morphism.effect(candidate)
                child_names = names + (morphism.name,)
                child_cost = cost + problem.costs[morphism.name]
                if problem.eval_budget is not None and evaluated >= problem.eval_budget:
                    raise SearchBudgetExceeded(result(exhaustive), evaluated)
                try:
                    mean_value = _audience_mean(problem, cache, child)
                except DomainMismatch:
                    continue
                evaluated += 1
                objective = mean_value - child_cost
                consider(objective, child_names, child)
                children.append((child_names, child, child_cost))
        return children

    # Exhaustive pass, abandoned for beam search if the space outgrows the limit.
    frontier = [((), problem.base, 0.0)]
    exhausted_ok = True
    for _ in range(problem.max_steps):
        frontier = expand(frontier, exhaustive=True)
        if not frontier:
            break
        if evaluated > problem.exhaustive_limit:
            exhausted_ok = False
            break
    if exhausted_ok:
        return result(exhaustive=True)

    cache.clear()
    evaluated = 1
    best = (base_objective, (), problem.base)
    frontier = [((), problem.base, 0.0)]
    for _ in range(problem.max_steps):
        children = expand(frontier, exhaustive=False)
        if not children:
            break
        scored = sorted(
            children,
            key=lambda item: (-(cache[item[1]] - item[2]), item[0]),
        )
        frontier = scored[:problem.beam_width]
    return result(exhaustive=False)


@dataclass(frozen=True)
class PriceProblem:
    """Grid search over offer price and bundle quantity against unit demand."""

    product: PropertySet
    audience: tuple[Agent, ...]
    bundling: BundlingModel
    quantity_grid: tuple[int, ...]
    price_grid: tuple[float, ...]

    def __post_init__(self):
        if not self.quantity_grid or not self.price_grid:
            raise ValueError("grids must be nonempty")
        if any(q < 1 for q in self.quantity_grid):
            raise ValueError("quantities must be >= 1")
        if any(p <= 0.0 for p in self.price_grid):
            raise ValueError("prices must be positive")
        if list(self.quantity_grid) != sorted(set(self.quantity_grid)):
            raise ValueError("quantity grid must be strictly increasing")
        if list(self.price_grid) != sorted(set(self.price_grid)):
            raise ValueError("price grid must be strictly increasing")


@dataclass(frozen=True)
class GridPoint:
    price: float
    quantity: int
    units_sold: int
    revenue: float


@dataclass(frozen=True)
class PriceResult:
    price: float
    quantity: int
    revenue: float
    scan: tuple[GridPoint, ...] = field(repr=False, default=())

    def revenue_at(self, price: float, quantity: int) -> float:
        for point in self.scan:
            if point.price == price and point.quantity == quantity:
                return point.revenue
        raise KeyError((price, quantity))

    def doubling_ratios(self) -> list[tuple[float, int, float | None]]:
        """(price, q, revenue(2q)/revenue(q)) wherever both quantities are on the grid.

        Linear scaling would make every ratio exactly 2; bundling overhead and
        fading marginal value bend it away. Ratio is None when revenue(q) is 0.
        """
        quantities = {p.quantity for p in self.scan}
        out = []
        for point in sorted(self.scan, key=lambda p: (p.price, p.quantity)):
            if 2 * point.quantity not in quantities:
                continue
            doubled = self.revenue_at(point.price, 2 * point.quantity)
            ratio = doubled / point.revenue if point.revenue != 0.0 else None
            out.append((point.price, point.quantity, ratio))
        return out


def reservation_per_unit(agent: Agent, product: PropertySet, model: BundlingModel, quantity: int) -> float:
    """What one unit is worth to the agent when buying ``quantity`` as a bundle."""
    valuation = evaluate(agent.functor, product)
    return bundled_total(model, quantity, valuation) / quantity


def optimize_price(problem: PriceProblem) -> PriceResult:
    """Revenue-maximizing (price, quantity) over the declared grids.

    Each audience member buys the whole ``q``-unit bundle when their
    per-unit reservation under the bundling model meets the price. Ties
    break toward the lower price, then the lower quantity; an empty
    audience yields zero revenue at the lowest grid point.
    """
    unit_reservations = {
        (agent.id, q): reservation_per_unit(agent, problem.product, problem.bundling, q)
        for agent in problem.audience
        for q in problem.quantity_grid
    }
    scan = []
    best: GridPoint | None = None
    for price in problem.price_grid:
        for quantity in problem.quantity_grid:
            buyers = sum(
                1 for agent in problem.audience
                if unit_reservations[(agent.id, quantity)] >= price
            )
            units = buyers * quantity
            point = GridPoint(price=price, quantity=quantity,
                              units_sold=units, revenue=price * units)
            scan.append(point)
            if best is None or point.revenue > best.revenue:
                best = point
    assert best is not None
    return PriceResult(price=best.price, quantity=best.quantity,
                       revenue=best.revenue, scan=tuple(scan))
