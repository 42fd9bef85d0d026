"""Valuation sets and the value-difference metric.

A valuation set holds an agent's per-property money-like weights for one
object. The perceived value difference between two valuations is a distance;
this module supplies a built-in weighted absolute-difference metric that is
provably a metric, accepts user-declared distance tables that merely *claim*
to be metrics, checks the four metric axioms over samples, and searches for
the exchange cycles that a broken triangle inequality would let an agent
pump value out of.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import InsufficientSamples, MissingDistance, NonFiniteWeight
from .properties import PropertySet, PropertyValue
from .reports import LawReport, Witness, capped_verdict

#: Slack allowed on triangle-inequality checks, to absorb float summation
#: noise; far below any economically meaningful difference.
TRIANGLE_TOL = 1e-9


class ValuationSet:
    """Per-property weights an agent assigns to one object.

    ``subject`` is the property set being valued; ``agent_id``/``object_id``
    record provenance. Identity is the valuation content: aligned weights
    (missing keys count as 0), the subject, and the object id. The agent id
    is provenance only and never affects equality.
    """

    __slots__ = ("weights", "subject", "agent_id", "object_id", "_canon")

    def __init__(
        self,
        weights: Mapping[str, float],
        subject: PropertySet | None = None,
        agent_id: str | None = None,
        object_id: str | None = None,
    ):
        clean: dict[str, float] = {}
        for key, raw in weights.items():
            w = float(raw)
            if not math.isfinite(w):
                raise NonFiniteWeight(f"weight for {key!r} is {raw!r}")
            clean[key] = w
        object.__setattr__(self, "weights", clean)
        object.__setattr__(self, "subject", subject)
        object.__setattr__(self, "agent_id", agent_id)
        object.__setattr__(self, "object_id", object_id)
        canon = tuple(sorted((k, w) for k, w in clean.items() if w != 0.0))
        object.__setattr__(self, "_canon", canon)

    def __setattr__(self, *_):
        raise AttributeError("ValuationSet is immutable")

    def total(self) -> float:
        return sum(self.weights.values())

    def scaled(self, factor: float) -> "ValuationSet":
        return ValuationSet(
            {k: w * factor for k, w in self.weights.items()},
            subject=self.subject, agent_id=self.agent_id, object_id=self.object_id,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ValuationSet):
            return NotImplemented
        return (self._canon == other._canon
                and self.subject == other.subject
                and self.object_id == other.object_id)

    def __hash__(self) -> int:
        return hash((self._canon, self.subject, self.object_id))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={w:g}" for k, w in sorted(self.weights.items()))
        tag = f" @{self.object_id}" if self.object_id else ""
        return f"Valuation({body}){tag}"


def max_weight_gap(x: ValuationSet, y: ValuationSet) -> float:
    """Largest per-key absolute weight difference, aligned on the key union."""
    keys = set(x.weights) | set(y.weights)
    return max((abs(x.weights.get(k, 0.0) - y.weights.get(k, 0.0)) for k in keys), default=0.0)


@dataclass(frozen=True, eq=False)
class WeightedL1Metric:
    """Sum of per-property importance-weighted absolute weight differences.

    Keys missing from one side count as weight 0 (no opinion, no value).
    When the two valuations concern *different* objects but the raw sum falls
    below ``epsilon``, the distance is floored at ``epsilon``: nonidentical
    objects always differ by at least an infinitesimal perceived value. The
    floor only applies when both subjects are known.
    """

    importance: Mapping[str, float] = field(default_factory=dict)
    default_importance: float = 1.0
    epsilon: float = 1e-9

    def __post_init__(self):
        if not (self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.default_importance < 0.0:
            raise ValueError("default importance must be >= 0")
        for key, lam in self.importance.items():
            if lam < 0.0 or not math.isfinite(lam):
                raise ValueError(f"importance for {key!r} must be finite and >= 0, got {lam}")
        if self.default_importance == 0.0 and not any(l > 0.0 for l in self.importance.values()):
            raise ValueError("at least one importance weight must be positive")

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedL1Metric):
            return NotImplemented
        return (dict(self.importance) == dict(other.importance)
                and self.default_importance == other.default_importance
                and self.epsilon == other.epsilon)

    def distance(self, x: ValuationSet, y: ValuationSet) -> float:
        for v in (x, y):
            for key, w in v.weights.items():
                if not math.isfinite(w):
                    raise NonFiniteWeight(f"weight for {key!r} is {w!r}")
        lam = self.importance
        default = self.default_importance
        total = 0.0
        for key in sorted(set(x.weights) | set(y.weights)):
            total += lam.get(key, default) * abs(x.weights.get(key, 0.0) - y.weights.get(key, 0.0))
        if (total < self.epsilon
                and x.subject is not None and y.subject is not None
                and x.subject != y.subject):
            return self.epsilon
        return total


@dataclass(frozen=True, eq=False)
class TableMetric:
    """A user-declared distance table over named points.

    Only *claims* to be a metric; run :func:`check_metric_axioms` to find out.
    Points are identified by their ``object_id``. Missing diagonal entries
    default to 0; any other missing pair raises MissingDistance.
    """

    entries: Mapping[tuple[str, str], float]

    def __post_init__(self):
        for pair, d in self.entries.items():
            if not math.isfinite(d):
                raise ValueError(f"distance for {pair} must be finite, got {d!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, TableMetric):
            return NotImplemented
        return dict(self.entries) == dict(other.entries)

    def point_ids(self) -> list[str]:
        return sorted({name for pair in self.entries for name in pair})

    def distance(self, x: ValuationSet, y: ValuationSet) -> float:
        if x.object_id is None or y.object_id is None:
            raise MissingDistance("table metrics need points labelled with an object_id")
        key = (x.object_id, y.object_id)
        if key in self.entries:
            return float(self.entries[key])
        if key[0] == key[1]:
            return 0.0
        raise MissingDistance(f"no distance entry for {key}")


ValueMetric = WeightedL1Metric | TableMetric


def distance(metric: ValueMetric, x: ValuationSet, y: ValuationSet) -> float:
    """Perceived value difference between two valuations under ``metric``."""
    return metric.distance(x, y)


def labelled_point(object_id: str) -> ValuationSet:
    """A bare named point for driving table metrics."""
    return ValuationSet({}, object_id=object_id)


def _distance_matrix(metric: ValueMetric, samples: Sequence[ValuationSet]) -> list[list[float]]:
    n = len(samples)
    return [[metric.distance(samples[i], samples[j]) for j in range(n)] for i in range(n)]


def check_metric_axioms(
    metric: ValueMetric,
    samples: Sequence[ValuationSet],
    tol: float = TRIANGLE_TOL,
) -> LawReport:
    """Check the four metric axioms exhaustively over ``samples``.

    M1: d(x, x) = 0 for every sample (exact).
    M2: d(x, y) > 0 for every pair of distinct samples (exact).
    M3: d(x, y) = d(y, x) for every pair (exact).
    M4: d(x, z) <= d(x, y) + d(y, z) + ``tol`` for every ordered triple.

    Enumeration is exhaustive (O(n^3) triples), intended for desk-scale
    sample sets; check large populations in batches and merge the reports.
    Needs at least 3 samples, else raises InsufficientSamples.
    """
    if len(samples) < 3:
        raise InsufficientSamples(f"metric axiom check needs >= 3 samples, got {len(samples)}")
    n = len(samples)
    d = _distance_matrix(metric, samples)
    names = [s.object_id or f"#{i}" for i, s in enumerate(samples)]
    report = LawReport(subject="metric")

    checks = 0
    witnesses: list[Witness] = []
    for i in range(n):
        checks += 1
        if d[i][i] != 0.0:
            witnesses.append(Witness(
                law="M1", inputs=(names[i],), measured=(d[i][i],),
                magnitude=abs(d[i][i]), detail="d(x, x) must be 0",
            ))
    report.add(capped_verdict("M1", checks, witnesses))

    checks = skips = 0
    witnesses = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if samples[i] == samples[j]:
                skips += 1
                continue
            checks += 1
            if d[i][j] <= 0.0:
                witnesses.append(Witness(
                    law="M2", inputs=(names[i], names[j]), measured=(d[i][j],),
                    magnitude=max(0.0, -d[i][j]), detail="distinct points need d > 0",
                ))
    report.add(capped_verdict("M2", checks, witnesses, skipped=skips))

    checks = 0
    witnesses = []
    for i in range(n):
        for j in range(i + 1, n):
            checks += 1
            gap = abs(d[i][j] - d[j][i])
            if gap != 0.0:
                witnesses.append(Witness(
                    law="M3", inputs=(names[i], names[j]), measured=(d[i][j], d[j][i]),
                    magnitude=gap, detail="distance must be symmetric",
                ))
    report.add(capped_verdict("M3", checks, witnesses))

    checks = 0
    witnesses = []
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            for k in range(n):
                if k == i or k == j:
                    continue
                checks += 1
                excess = d[i][k] - d[i][j] - d[j][k]
                if excess > tol:
                    witnesses.append(Witness(
                        law="M4", inputs=(names[i], names[j], names[k]),
                        measured=(d[i][k], d[i][j], d[j][k]),
                        magnitude=excess,
                        detail="detour through the middle point is shorter",
                    ))
    report.add(capped_verdict("M4", checks, witnesses))
    return report


@dataclass(frozen=True)
class ArbitrageFinding:
    """A value-pumping exchange cycle extracted from a broken triangle.

    Exchanging x for z, z for y, then (by symmetry) y back for x nets
    ``value`` per round trip: d(x,y) exceeds d(x,z) + d(z,y) by that much.
    """

    x: str
    z: str
    y: str
    value: float
    d_xy: float
    d_xz: float
    d_zy: float

    @property
    def cycle(self) -> tuple[str, str, str, str]:
        return (self.x, self.z, self.y, self.x)

    def render(self) -> str:
        path = " -> ".join(self.cycle)
        return (f"cycle {path}: extracts {self.value:.9f} per round trip "
                f"[d(x,y)={self.d_xy:.9f}, d(x,z)={self.d_xz:.9f}, d(z,y)={self.d_zy:.9f}]")


def detect_arbitrage(
    metric: ValueMetric,
    points: Sequence[ValuationSet],
    tol: float = TRIANGLE_TOL,
) -> list[ArbitrageFinding]:
    """Enumerate ordered triples (x, z, y) and report every broken triangle.

    Empty result means no arbitrage: this is empty exactly when
    :func:`check_metric_axioms` reports an M4 pass on the same points and
    tolerance. Fewer than 3 points trivially yields no findings.
    """
    n = len(points)
    if n < 3:
        return []
    d = _distance_matrix(metric, points)
    names = [p.object_id or f"#{i}" for i, p in enumerate(points)]
    findings = []
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            for k in range(n):
                if k == i or k == j:
                    continue
                gain = d[i][k] - d[i][j] - d[j][k]
                if gain > tol:
                    findings.append(ArbitrageFinding(
                        x=names[i], z=names[j], y=names[k],
                        value=gain, d_xy=d[i][k], d_xz=d[i][j], d_zy=d[j][k],
                    ))
    return findings


def random_valuations(
    rng,
    count: int,
    keys: Iterable[str] = ("a", "b", "c"),
    span: float = 10.0,
) -> list[ValuationSet]:
    """Seeded valuation samples with distinct synthetic subjects, for checks."""
    keys = tuple(keys)
    out = []
    for i in range(count):
        weights = {k: rng.uniform(-span, span) for k in keys}
        subject = PropertySet({"sample": PropertyValue.number(float(i))})
        out.append(ValuationSet(weights, subject=subject, object_id=f"p{i}"))
    return out
