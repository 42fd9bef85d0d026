"""Quantity-dependent scaling of valuations.

Real bundles are not linear: packing n units into one bundle costs a fixed
overhead (kappa) and shifts the marginal value of each extra unit (gamma).
``bundle_value`` computes the value of one bundling event; ``check_scalar_laws``
measures how far a model strays from plain scalar multiplication, where
nesting bundles inside bundles would not matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import NonPositiveCount
from .reports import LawReport, Witness, capped_verdict
from .valuations import ValuationSet

SCALAR_TOL = 1e-9


@dataclass(frozen=True)
class BundlingModel:
    """Two-parameter bundle valuation: ``unit_total * n**gamma + kappa``.

    gamma < 1 models fading appetite for extra copies, kappa > 0 the fixed
    cost of one more packaging/shipping/inspection event. gamma = 1 with
    kappa = 0 recovers exact linear scaling. ``per_property`` applies the
    action to each weight separately instead of the aggregate total.
    """

    gamma: float = 1.0
    kappa: float = 0.0
    per_property: bool = False

    def __post_init__(self):
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not (self.kappa >= 0.0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")

    @property
    def is_linear(self) -> bool:
        return self.gamma == 1.0 and self.kappa == 0.0


def bundle_value(model: BundlingModel, n: int, unit_total: float) -> float:
    """Value of one bundling event of ``n`` units worth ``unit_total`` each."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise NonPositiveCount(f"bundle size must be an integer >= 1, got {n!r}")
    if not math.isfinite(unit_total):
        raise ValueError(f"unit_total must be finite, got {unit_total!r}")
    return unit_total * n ** model.gamma + model.kappa


def bundled_total(model: BundlingModel, n: int, valuation: ValuationSet) -> float:
    """Total value of bundling ``n`` copies of a valued object.

    Aggregate models act once on the valuation total; per-property models act
    on every weight, paying the overhead per property.
    """
    if model.per_property:
        return sum(bundle_value(model, n, w) for w in valuation.weights.values())
    return bundle_value(model, n, valuation.total())


def check_scalar_laws(
    model: BundlingModel,
    samples: Sequence[tuple[int, int, float]],
    tol: float = SCALAR_TOL,
) -> LawReport:
    """Compare nested against flat bundling over (alpha, beta, unit_total) samples.

    L1 (associativity of scaling): bundling beta units and then bundling
    alpha of the results should equal one flat bundling of alpha*beta units.
    Any kappa > 0 breaks this; pure power laws (kappa = 0) keep it.
    L2 (unit): a bundle of one unit should be worth exactly the unit; kappa > 0
    breaks that too. Failures are findings with magnitudes, never errors.
    An empty sample list passes vacuously.
    """
    report = LawReport(subject="bundling")
    note = "vacuous: no samples" if not samples else ""

    checks = 0
    witnesses: list[Witness] = []
    for alpha, beta, unit_total in samples:
        checks += 1
        nested = bundle_value(model, alpha, bundle_value(model, beta, unit_total))
        flat = bundle_value(model, alpha * beta, unit_total)
        gap = abs(nested - flat)
        if gap > tol:
            witnesses.append(Witness(
                law="L1", inputs=(str(alpha), str(beta), f"{unit_total:g}"),
                measured=(nested, flat), magnitude=gap,
                detail="nested bundling differs from flat bundling",
            ))
    report.add(capped_verdict("L1", checks, witnesses, note=note))

    checks = 0
    witnesses = []
    for unit_total in sorted({w for _, _, w in samples}):
        checks += 1
        one = bundle_value(model, 1, unit_total)
        gap = abs(one - unit_total)
        if gap > tol:
            witnesses.append(Witness(
                law="L2", inputs=(f"{unit_total:g}",), measured=(one, unit_total),
                magnitude=gap, detail="a bundle of one is not worth one unit",
            ))
    report.add(capped_verdict("L2", checks, witnesses, note=note))
    return report
