"""Value functions: structure-preserving maps from property sets to valuations.

A ValueFunctor turns an object (property set) into the valuation an agent
assigns to it, and lifts property rewrites to valuation updates. Lifting
defaults to re-evaluating the rewritten object, which preserves identity and
composition by construction; custom lifts are accepted and checked, not
trusted. The module also builds preference rankings from distance to an
ideal-point valuation and aggregates valuations by agent segment.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DomainMismatch, InsufficientSamples, MissingAttribute
from .properties import PropertyMorphism, PropertySet, PropertyValue, apply_morphism, compose, identity
from .reports import LawReport, LawVerdict, Witness
from .valuations import ValuationSet, ValueMetric, distance, max_weight_gap

#: Allowed weight discrepancy when comparing two evaluation paths.
FUNCTOR_TOL = 1e-9

MorphismAction = Callable[["ValueFunctor", PropertyMorphism, ValuationSet], ValuationSet]


class AgentAttributeSet(PropertySet):
    """Attributes describing an agent (segment labels and the like)."""


@dataclass(frozen=True)
class ValueFunctor:
    """Maps property sets to valuations and property rewrites to valuation updates.

    ``object_map`` returns per-property weights; names it omits default to
    weight 0 so the valuation's key set always equals the object's property
    names. ``morphism_action`` of None means the induced lift: rewrite the
    subject, then re-evaluate. ``domain`` of None accepts every object.
    """

    name: str
    object_map: Callable[[PropertySet], Mapping[str, float]]
    morphism_action: MorphismAction | None = None
    domain: Callable[[PropertySet], bool] | None = None

    def __repr__(self) -> str:
        return f"ValueFunctor({self.name!r})"


def evaluate(functor: ValueFunctor, p: PropertySet) -> ValuationSet:
    """The valuation ``functor`` assigns to ``p``; deterministic per input."""
    if functor.domain is not None and not functor.domain(p):
        raise DomainMismatch(functor.name, f"{p!r} is outside the declared domain")
    raw = functor.object_map(p)
    names = p.names()
    extra = set(raw) - set(names)
    if extra:
        raise ValueError(f"functor {functor.name} valued unknown properties: {sorted(extra)}")
    weights = {name: float(raw.get(name, 0.0)) for name in names}
    return ValuationSet(weights, subject=p, agent_id=functor.name)


def lift(functor: ValueFunctor, f: PropertyMorphism, v: ValuationSet) -> ValuationSet:
    """Apply the functor's image of morphism ``f`` to valuation ``v``."""
    if functor.morphism_action is not None:
        return functor.morphism_action(functor, f, v)
    return induced_lift(functor, f, v)


def induced_lift(functor: ValueFunctor, f: PropertyMorphism, v: ValuationSet) -> ValuationSet:
    """Rewrite the valuation's subject and re-evaluate. Lawful by construction."""
    if v.subject is None:
        raise DomainMismatch(functor.name, "cannot lift a valuation with no subject")
    return evaluate(functor, apply_morphism(f, v.subject))


def check_functor_laws(
    functor: ValueFunctor,
    catalog: Sequence[PropertyMorphism],
    samples: Sequence[PropertySet],
    tol: float = FUNCTOR_TOL,
) -> LawReport:
    """Verify identity preservation (F3) and composition preservation (F4).

    F3: lifting the identity morphism must fix every evaluated sample.
    F4: for composable pairs, lifting the composite must equal composing the
    lifts, within ``tol`` on every weight. Pairs whose guards reject a sample
    are skipped. Empty samples raise InsufficientSamples; an empty catalog
    passes vacuously with a warning note.
    """
    if not samples:
        raise InsufficientSamples("functor law check needs at least one sample")
    report = LawReport(subject=f"functor {functor.name}")
    note = "vacuous: empty catalog" if not catalog else ""
    ident = identity()

    def in_domain(p: PropertySet) -> bool:
        return functor.domain is None or functor.domain(p)

    checks = skips = 0
    witnesses: list[Witness] = []
    for p in samples:
        if not in_domain(p):
            skips += 1
            continue
        checks += 1
        v = evaluate(functor, p)
        lifted = lift(functor, ident, v)
        gap = max_weight_gap(v, lifted)
        if gap > tol and not witnesses:
            witnesses.append(Witness(
                law="F3", inputs=(repr(p),), measured=(gap,), magnitude=gap,
                detail="identity morphism must lift to the identity",
            ))
    report.add(LawVerdict("F3", passed=not witnesses, checks=checks, skipped=skips,
                          witnesses=witnesses, note=note))

    checks = skips = 0
    witnesses = []
    for f in catalog:
        for g in catalog:
            composite = compose(f, g)
            for p in samples:
                if not in_domain(p) or not f.applicable(p):
                    skips += 1
                    continue
                mid = apply_morphism(f, p)
                if not g.applicable(mid) or not in_domain(mid) or not in_domain(apply_morphism(g, mid)):
                    skips += 1
                    continue
                checks += 1
                v = evaluate(functor, p)
                one_hop = lift(functor, composite, v)
                two_hops = lift(functor, g, lift(functor, f, v))
                gap = max_weight_gap(one_hop, two_hops)
                if gap > tol and not witnesses:
                    witnesses.append(Witness(
                        law="F4", inputs=(f.name, g.name, repr(p)), measured=(gap,),
                        magnitude=gap,
                        detail="image of the composite differs from composed images",
                    ))
    report.add(LawVerdict("F4", passed=not witnesses, checks=checks, skipped=skips,
                          witnesses=witnesses, note=note))
    return report


@dataclass(frozen=True)
class PreferenceRelation:
    """Objects ordered by distance to a reference valuation, closest first.

    The strict part (smaller distance) is transitive and irreflexive by
    construction; equal distances are ties, listed in stable object-id order.
    """

    entries: tuple[tuple[str, float], ...]

    def order(self) -> tuple[str, ...]:
        return tuple(object_id for object_id, _ in self.entries)

    def distance_of(self, object_id: str) -> float:
        for oid, dist in self.entries:
            if oid == object_id:
                return dist
        raise KeyError(object_id)

    def prefers(self, a: str, b: str) -> bool:
        """Strict preference: a sits strictly closer to the reference than b."""
        return self.distance_of(a) < self.distance_of(b)

    def indifferent(self, a: str, b: str) -> bool:
        return self.distance_of(a) == self.distance_of(b)


def _named_objects(objects) -> list[tuple[str, PropertySet]]:
    if isinstance(objects, Mapping):
        return sorted(objects.items())
    return [(str(i), p) for i, p in enumerate(objects)]


def rank_preferences(
    functor: ValueFunctor,
    metric: ValueMetric,
    reference: ValuationSet,
    objects: Mapping[str, PropertySet] | Sequence[PropertySet],
) -> PreferenceRelation:
    """Rank objects by how close their valuation sits to ``reference``.

    Accepts a name->object mapping (ties break by name) or a plain sequence
    (ties break by position).
    """
    named = _named_objects(objects)
    scored = [(oid, distance(metric, evaluate(functor, p), reference)) for oid, p in named]
    scored.sort(key=lambda item: item[1])  # stable: ties keep id order
    return PreferenceRelation(entries=tuple(scored))


@dataclass(frozen=True)
class SegmentRow:
    segment: str
    object_id: str
    mean: float
    spread: float
    agents: int


@dataclass(frozen=True)
class SegmentReport:
    """Per-segment, per-object valuation totals: mean, spread, head count."""

    group_by: str
    rows: tuple[SegmentRow, ...]

    def segments(self) -> tuple[str, ...]:
        seen = dict.fromkeys(row.segment for row in self.rows)
        return tuple(seen)

    def render(self) -> list[str]:
        lines = [f"segments by {self.group_by!r}:"]
        for row in self.rows:
            lines.append(
                f"  {row.segment} / {row.object_id}: mean {row.mean:.9f}, "
                f"spread {row.spread:.9f}, agents {row.agents}"
            )
        return lines


def segment_analysis(
    agents: Sequence[tuple[AgentAttributeSet, ValueFunctor]],
    objects: Mapping[str, PropertySet] | Sequence[PropertySet],
    group_by: str,
) -> SegmentReport:
    """Group agents by one attribute and aggregate their valuation totals.

    Spread is the population standard deviation (0 for single-agent
    segments). Raises MissingAttribute naming the first agent that lacks the
    grouping attribute; an empty agent list yields an empty report.
    """
    for index, (attributes, functor) in enumerate(agents):
        if group_by not in attributes:
            raise MissingAttribute(
                f"agent #{index} ({functor.name}) lacks attribute {group_by!r}"
            )
    named = _named_objects(objects)
    totals: dict[tuple[str, str], list[float]] = {}
    for attributes, functor in agents:
        segment = str(attributes[group_by])
        for object_id, p in named:
            totals.setdefault((segment, object_id), []).append(evaluate(functor, p).total())
    rows = []
    for (segment, object_id) in sorted(totals):
        values = totals[(segment, object_id)]
        spread = statistics.pstdev(values) if len(values) > 1 else 0.0
        rows.append(SegmentRow(
            segment=segment, object_id=object_id,
            mean=statistics.fmean(values), spread=spread, agents=len(values),
        ))
    return SegmentReport(group_by=group_by, rows=tuple(rows))


def prospect_shape(
    reference: float = 0.0,
    gain_power: float = 0.88,
    loss_power: float = 0.88,
    loss_scale: float = 2.25,
    scale: float = 1.0,
) -> Callable[[float], float]:
    """A reference-dependent per-property value curve.

    Concave above the reference point, convex below it, and steeper below:
    losses of a given size weigh more than equal gains. Returned as a plain
    float->float function for use in custom object maps or weight rules.
    """
    if not (0.0 < gain_power <= 1.0 and 0.0 < loss_power <= 1.0):
        raise ValueError("powers must lie in (0, 1]")
    if loss_scale < 1.0:
        raise ValueError("loss_scale must be >= 1 (losses loom larger)")

    def value(x: float) -> float:
        if x >= reference:
            return scale * (x - reference) ** gain_power
        return -scale * loss_scale * (reference - x) ** loss_power

    return value


# --- declarative weight rules (scenario files compile to these) ---


@dataclass(frozen=True)
class PerUnitRule:
    """weight = per_unit * numeric value."""

    per_unit: float

    def applies_to(self, value: PropertyValue) -> bool:
        return value.is_number

    def weight(self, value: PropertyValue) -> float:
        return self.per_unit * value.as_number()


@dataclass(frozen=True, eq=False)
class LabelRule:
    """weight looked up by label; unknown labels use the default if declared."""

    labels: Mapping[str, float]
    default: float | None = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelRule):
            return NotImplemented
        return dict(self.labels) == dict(other.labels) and self.default == other.default

    def applies_to(self, value: PropertyValue) -> bool:
        if not value.is_label:
            return False
        return str(value) in self.labels or self.default is not None

    def weight(self, value: PropertyValue) -> float:
        label = str(value)
        if label in self.labels:
            return self.labels[label]
        if self.default is None:
            raise KeyError(label)
        return self.default


@dataclass(frozen=True)
class FlagRule:
    if_true: float = 0.0
    if_false: float = 0.0

    def applies_to(self, value: PropertyValue) -> bool:
        return value.is_flag

    def weight(self, value: PropertyValue) -> float:
        return self.if_true if value.value else self.if_false


@dataclass(frozen=True)
class ConstantRule:
    """The same weight whenever the property is present, whatever its value."""

    constant: float

    def applies_to(self, value: PropertyValue) -> bool:
        return True

    def weight(self, value: PropertyValue) -> float:
        return self.constant


@dataclass(frozen=True)
class ProspectRule:
    """Reference-dependent weight for a numeric property."""

    reference: float
    gain_power: float = 0.88
    loss_power: float = 0.88
    loss_scale: float = 2.25
    scale: float = 1.0

    def applies_to(self, value: PropertyValue) -> bool:
        return value.is_number

    def weight(self, value: PropertyValue) -> float:
        shape = prospect_shape(self.reference, self.gain_power, self.loss_power,
                               self.loss_scale, self.scale)
        return shape(value.as_number())


WeightRule = PerUnitRule | LabelRule | FlagRule | ConstantRule | ProspectRule


def rules_functor(
    name: str,
    rules: Mapping[str, WeightRule],
    only_declared: bool = False,
) -> ValueFunctor:
    """Compile per-property weight rules into a ValueFunctor.

    Properties without a rule get weight 0 (the agent has no opinion), unless
    ``only_declared`` is set, in which case they put the object outside the
    functor's domain. A rule that cannot digest its property's value kind
    (e.g. a per-unit rule facing a color label) always excludes the object.
    """

    def in_domain(p: PropertySet) -> bool:
        for prop, value in p.items():
            rule = rules.get(prop)
            if rule is None:
                if only_declared:
                    return False
                continue
            if not rule.applies_to(value):
                return False
        return True

    def object_map(p: PropertySet) -> dict[str, float]:
        weights = {}
        for prop, value in p.items():
            rule = rules.get(prop)
            weights[prop] = rule.weight(value) if rule is not None else 0.0
        return weights

    return ValueFunctor(name=name, object_map=object_map, domain=in_domain)


def discounting_functor(base: ValueFunctor, factor: float = 0.95) -> ValueFunctor:
    """A deliberately unlawful functor: each non-identity lift also scales weights.

    Lifting a composite applies the discount once; composing two lifts applies
    it twice, so composition is not preserved. Useful for exercising the
    checker's F4 failure path.
    """

    def action(functor: ValueFunctor, f: PropertyMorphism, v: ValuationSet) -> ValuationSet:
        if f.name == "id":
            return induced_lift(functor, f, v)
        if v.subject is None:
            raise DomainMismatch(functor.name, "cannot lift a valuation with no subject")
        new_subject = apply_morphism(f, v.subject)
        # carries the incoming weights instead of re-evaluating: the discount
        # compounds per lift, so one composite hop != two sequential hops
        weights = {name: factor * v.weights.get(name, 0.0) for name in new_subject.names()}
        return ValuationSet(weights, subject=new_subject, agent_id=v.agent_id,
                            object_id=v.object_id)

    return ValueFunctor(
        name=f"{base.name}~discounted",
        object_map=base.object_map,
        morphism_action=action,
        domain=base.domain,
    )
