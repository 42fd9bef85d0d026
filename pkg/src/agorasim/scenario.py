"""Scenario files: declarative YAML describing a whole model.

A scenario names every object, morphism, metric, functor, bundling model,
agent and optimization problem, so a run is reproducible from one file plus
a seed. Loading validates everything and reports *all* problems at once;
a loaded scenario serializes back to YAML that reloads equal.

Sections (all optional except where used by a command):

    seed: 42
    objects:
      car1: {color: red, price: {value: 100.0, unit: eur}, owner: alice}
    morphisms:
      repaint_blue:
        requires: {color: {exists: true}}
        set: {color: blue}
    metrics:
      m1: {kind: weighted_l1, importance: {price: 1.0}, epsilon: 1.0e-09}
      t1: {kind: table, points: [x, y, z], symmetric: true,
           distances: {"x,y": 1.0, "x,z": 2.0, "y,z": 2.5}}
    functors:
      V1:
        weights:
          price: {per_unit: -0.5}
          color: {labels: {red: 2.0, blue: 5.0}, default: 0.0}
          owner: {labels: {alice: 10.0}, default: 0.0}
    bundling:
      b1: {gamma: 0.9, kappa: 1.0}
    agents:
      alice: {attributes: {segment: pro}, functor: V1, metric: m1}
    market: {rounds: 10, split: 0.5, strict: false, ownership_property: owner}
    problems:
      design:
        d1: {base: car1, catalog: [repaint_blue], costs: {repaint_blue: 2.0},
             audience: [alice], max_steps: 2}
      price:
        p1: {product: car1, audience: [alice], bundling: b1,
             quantities: [1, 2, 4], prices: [1.0, 2.0, 4.0]}

Property values: strings are labels, numbers are dimensionless numerics,
booleans are flags, and {value: 3.0, unit: years} tags a numeric with a unit.
Agent holdings normally come from each object's ownership property; an
explicit ``holdings`` list must agree with it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import yaml

from .bundling import BundlingModel
from .errors import ParseError, ValidationError
from .functors import (
    AgentAttributeSet,
    ConstantRule,
    FlagRule,
    LabelRule,
    PerUnitRule,
    ProspectRule,
    ValueFunctor,
    WeightRule,
    evaluate,
    rules_functor,
)
from .market import Agent, EventLog, MarketState, run_rounds
from .optimize import DesignProblem, PriceProblem
from .properties import PropertyMorphism, PropertySet, PropertyValue, rewrite
from .valuations import (
    TableMetric,
    ValuationSet,
    ValueMetric,
    WeightedL1Metric,
    labelled_point,
)


@dataclass(frozen=True)
class Condition:
    """One guard clause over a single property."""

    exists: bool = True
    equals: PropertyValue | None = None
    minimum: PropertyValue | None = None
    maximum: PropertyValue | None = None


@dataclass(frozen=True, eq=False)
class MorphismDecl:
    requires: dict[str, Condition] = field(default_factory=dict)
    set_values: dict[str, PropertyValue] = field(default_factory=dict)
    add_values: dict[str, PropertyValue] = field(default_factory=dict)
    drop: tuple[str, ...] = ()

    def __eq__(self, other):
        if not isinstance(other, MorphismDecl):
            return NotImplemented
        return (self.requires == other.requires and self.set_values == other.set_values
                and self.add_values == other.add_values and self.drop == other.drop)

    def compile(self, name: str) -> PropertyMorphism:
        conditions = dict(self.requires)

        def pattern(p: PropertySet) -> bool:
            for prop, cond in conditions.items():
                present = prop in p
                if not cond.exists:
                    if present:
                        return False
                    continue
                if not present:
                    return False
                value = p[prop]
                if cond.equals is not None and value != cond.equals:
                    return False
                if cond.minimum is not None and value < cond.minimum:
                    return False
                if cond.maximum is not None and cond.maximum < value:
                    return False
            return True

        return rewrite(name, requires=pattern, set_values=self.set_values,
                       add_values=self.add_values, drop=self.drop)


@dataclass(frozen=True, eq=False)
class FunctorDecl:
    rules: dict[str, WeightRule] = field(default_factory=dict)
    only_declared: bool = False

    def __eq__(self, other):
        if not isinstance(other, FunctorDecl):
            return NotImplemented
        return self.rules == other.rules and self.only_declared == other.only_declared

    def compile(self, name: str) -> ValueFunctor:
        return rules_functor(name, self.rules, only_declared=self.only_declared)


@dataclass(frozen=True)
class AgentDecl:
    attributes: AgentAttributeSet = field(default_factory=AgentAttributeSet)
    functor: str = ""
    metric: str = ""
    holdings: tuple[str, ...] = ()


@dataclass(frozen=True)
class MarketConfig:
    rounds: int = 10
    split: float = 0.5
    strict: bool = False
    ownership_property: str = "owner"


@dataclass(frozen=True, eq=False)
class DesignProblemDecl:
    base: str
    catalog: tuple[str, ...] = ()
    costs: dict[str, float] = field(default_factory=dict)
    audience: tuple[str, ...] = ()
    max_steps: int = 1
    beam_width: int = 32

    def __eq__(self, other):
        if not isinstance(other, DesignProblemDecl):
            return NotImplemented
        return all(getattr(self, f.name) == getattr(other, f.name) for f in dc_fields(self))


@dataclass(frozen=True)
class PriceProblemDecl:
    product: str
    audience: tuple[str, ...] = ()
    bundling: str = ""
    quantities: tuple[int, ...] = ()
    prices: tuple[float, ...] = ()


@dataclass
class Scenario:
    """A fully validated model description; pure data, compiled on demand."""

    seed: int = 0
    objects: dict[str, PropertySet] = field(default_factory=dict)
    morphisms: dict[str, MorphismDecl] = field(default_factory=dict)
    metrics: dict[str, ValueMetric] = field(default_factory=dict)
    functors: dict[str, FunctorDecl] = field(default_factory=dict)
    bundling: dict[str, BundlingModel] = field(default_factory=dict)
    agents: dict[str, AgentDecl] = field(default_factory=dict)
    market: MarketConfig = field(default_factory=MarketConfig)
    design_problems: dict[str, DesignProblemDecl] = field(default_factory=dict)
    price_problems: dict[str, PriceProblemDecl] = field(default_factory=dict)
    segment_attribute: str = "segment"

    # --- compilation to runtime objects ---

    def catalog(self) -> list[PropertyMorphism]:
        return [self.morphisms[name].compile(name) for name in sorted(self.morphisms)]

    def build_functor(self, name: str) -> ValueFunctor:
        return self.functors[name].compile(name)

    def build_agent(self, name: str) -> Agent:
        decl = self.agents[name]
        return Agent(
            id=name,
            functor=self.build_functor(decl.functor),
            metric=self.metrics[decl.metric],
            attributes=decl.attributes,
            holdings=set(decl.holdings),
        )

    def build_state(self) -> MarketState:
        return MarketState(
            objects=dict(self.objects),
            agents={name: self.build_agent(name) for name in sorted(self.agents)},
            ownership_property=self.market.ownership_property,
        )

    def build_design_problem(self, name: str) -> DesignProblem:
        decl = self.design_problems[name]
        return DesignProblem(
            base=self.objects[decl.base],
            catalog=tuple(self.morphisms[m].compile(m) for m in decl.catalog),
            costs=dict(decl.costs),
            audience=tuple(self.build_agent(a) for a in decl.audience),
            max_steps=decl.max_steps,
            beam_width=decl.beam_width,
        )

    def build_price_problem(self, name: str) -> PriceProblem:
        decl = self.price_problems[name]
        return PriceProblem(
            product=self.objects[decl.product],
            audience=tuple(self.build_agent(a) for a in decl.audience),
            bundling=self.bundling[decl.bundling],
            quantity_grid=decl.quantities,
            price_grid=decl.prices,
        )

    def metric_sample_points(self, name: str) -> list[ValuationSet]:
        """Check samples for one metric: table points, or agent-by-object valuations."""
        metric = self.metrics[name]
        if isinstance(metric, TableMetric):
            return [labelled_point(p) for p in metric.point_ids()]
        samples = []
        for agent_name in sorted(self.agents):
            functor = self.build_functor(self.agents[agent_name].functor)
            for object_name in sorted(self.objects):
                v = evaluate(functor, self.objects[object_name])
                samples.append(ValuationSet(
                    v.weights, subject=v.subject,
                    agent_id=agent_name, object_id=object_name,
                ))
        return samples

    def bundling_samples(self) -> list[tuple[int, int, float]]:
        """Deterministic default grid for scalar-law checks."""
        return [(a, b, w) for a in (1, 2, 3, 4) for b in (1, 2, 3, 4) for w in (1.0, 2.5)]


def run_market(scenario: Scenario, seed: int | None = None) -> EventLog:
    """Simulate the scenario's market; same scenario and seed, same log."""
    state = scenario.build_state()
    cfg = scenario.market
    return run_rounds(
        state,
        rounds=cfg.rounds,
        seed=scenario.seed if seed is None else seed,
        split=cfg.split,
        strict=cfg.strict,
    )


# --- parsing ---


def _parse_yaml(text: str):
    duplicates: list[str] = []

    class _Loader(yaml.SafeLoader):
        pass

    def construct_mapping(loader, node):
        mapping = {}
        for key_node, value_node in node.value:
            key = loader.construct_object(key_node, deep=True)
            try:
                if key in mapping:
                    duplicates.append(
                        f"duplicate key {key!r} (line {key_node.start_mark.line + 1})")
                mapping[key] = loader.construct_object(value_node, deep=True)
            except TypeError:
                duplicates.append(
                    f"unusable mapping key {key!r} (line {key_node.start_mark.line + 1})")
        return mapping

    _Loader.add_constructor("tag:yaml.org,2002:map", construct_mapping)
    try:
        data = yaml.load(text, _Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ParseError(str(getattr(exc, "problem", exc)),
                             line=mark.line + 1, column=mark.column + 1) from exc
        raise ParseError(str(exc)) from exc
    return data, duplicates


class _Builder:
    """Accumulates every validation problem instead of stopping at the first."""

    def __init__(self):
        self.errors: list[str] = []

    def err(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def expect_map(self, path: str, raw) -> dict:
        if raw is None:
            return {}
        if not isinstance(raw, dict):
            self.err(path, f"expected a mapping, got {type(raw).__name__}")
            return {}
        return raw

    def check_keys(self, path: str, raw: dict, allowed: set[str]) -> None:
        for key in raw:
            if key not in allowed:
                self.err(path, f"unknown key {key!r} (allowed: {sorted(allowed)})")

    def property_value(self, path: str, raw) -> PropertyValue | None:
        try:
            return parse_property_value(raw)
        except (ValueError, TypeError) as exc:
            self.err(path, str(exc))
            return None

    def number(self, path: str, raw, default: float) -> float:
        if raw is None:
            return default
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            self.err(path, f"expected a number, got {raw!r}")
            return default
        return float(raw)

    def integer(self, path: str, raw, default: int) -> int:
        if raw is None:
            return default
        if isinstance(raw, bool) or not isinstance(raw, int):
            self.err(path, f"expected an integer, got {raw!r}")
            return default
        return raw

    def string(self, path: str, raw, default: str = "") -> str:
        if raw is None:
            return default
        if not isinstance(raw, str):
            self.err(path, f"expected a string, got {raw!r}")
            return default
        return raw

    def boolean(self, path: str, raw, default: bool) -> bool:
        if raw is None:
            return default
        if not isinstance(raw, bool):
            self.err(path, f"expected a boolean, got {raw!r}")
            return default
        return raw

    def names(self, path: str, raw) -> tuple[str, ...]:
        if raw is None:
            return ()
        if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
            self.err(path, f"expected a list of names, got {raw!r}")
            return ()
        return tuple(raw)


def parse_property_value(raw) -> PropertyValue:
    """Scenario-file encoding of a property value (see module docstring)."""
    if isinstance(raw, bool):
        return PropertyValue.flag(raw)
    if isinstance(raw, (int, float)):
        return PropertyValue.number(float(raw))
    if isinstance(raw, str):
        return PropertyValue.label(raw)
    if isinstance(raw, dict):
        extra = set(raw) - {"value", "unit"}
        if extra or "value" not in raw:
            raise ValueError(f"tagged numbers need value and unit, got {raw!r}")
        value = raw["value"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"tagged value must be numeric, got {value!r}")
        return PropertyValue.number(float(value), str(raw.get("unit", "")))
    raise ValueError(f"cannot read property value {raw!r}")


def plain_property_value(value: PropertyValue):
    if value.is_flag:
        return bool(value.value)
    if value.is_label:
        return str(value.value)
    if value.unit:
        return {"value": float(value.value), "unit": value.unit}
    return float(value.value)


def _parse_property_set(b: _Builder, path: str, raw, cls=PropertySet):
    raw = b.expect_map(path, raw)
    pairs = []
    for name, value_raw in raw.items():
        value = b.property_value(f"{path}.{name}", value_raw)
        if value is not None:
            pairs.append((str(name), value))
    try:
        return cls(pairs)
    except ValueError as exc:
        b.err(path, str(exc))
        return cls()


def _parse_condition(b: _Builder, path: str, raw) -> Condition:
    raw = b.expect_map(path, raw)
    b.check_keys(path, raw, {"exists", "equals", "min", "max"})
    equals = minimum = maximum = None
    if "equals" in raw:
        equals = b.property_value(f"{path}.equals", raw["equals"])
    if "min" in raw:
        minimum = b.property_value(f"{path}.min", raw["min"])
    if "max" in raw:
        maximum = b.property_value(f"{path}.max", raw["max"])
    return Condition(
        exists=b.boolean(f"{path}.exists", raw.get("exists"), True),
        equals=equals, minimum=minimum, maximum=maximum,
    )


def _parse_morphism(b: _Builder, path: str, raw) -> MorphismDecl:
    raw = b.expect_map(path, raw)
    b.check_keys(path, raw, {"requires", "set", "add", "drop"})
    requires = {
        str(prop): _parse_condition(b, f"{path}.requires.{prop}", cond)
        for prop, cond in b.expect_map(f"{path}.requires", raw.get("requires")).items()
    }
    set_values = {}
    for prop, v in b.expect_map(f"{path}.set", raw.get("set")).items():
        value = b.property_value(f"{path}.set.{prop}", v)
        if value is not None:
            set_values[str(prop)] = value
    add_values = {}
    for prop, v in b.expect_map(f"{path}.add", raw.get("add")).items():
        value = b.property_value(f"{path}.add.{prop}", v)
        if value is not None:
            if not value.is_number:
                b.err(f"{path}.add.{prop}", "increments must be numeric")
            else:
                add_values[str(prop)] = value
    return MorphismDecl(
        requires=requires, set_values=set_values, add_values=add_values,
        drop=b.names(f"{path}.drop", raw.get("drop")),
    )


def _parse_weight_rule(b: _Builder, path: str, raw) -> WeightRule | None:
    raw = b.expect_map(path, raw)
    kinds = {"per_unit", "labels", "if_true", "if_false", "constant", "prospect"}
    b.check_keys(path, raw, kinds | {"default"})
    if "per_unit" in raw:
        b.check_keys(path, raw, {"per_unit"})
        return PerUnitRule(per_unit=b.number(f"{path}.per_unit", raw["per_unit"], 0.0))
    if "labels" in raw:
        b.check_keys(path, raw, {"labels", "default"})
        labels_raw = b.expect_map(f"{path}.labels", raw["labels"])
        labels = {str(k): b.number(f"{path}.labels.{k}", v, 0.0) for k, v in labels_raw.items()}
        default = None
        if "default" in raw:
            default = b.number(f"{path}.default", raw["default"], 0.0)
        return LabelRule(labels=labels, default=default)
    if "if_true" in raw or "if_false" in raw:
        b.check_keys(path, raw, {"if_true", "if_false"})
        return FlagRule(
            if_true=b.number(f"{path}.if_true", raw.get("if_true"), 0.0),
            if_false=b.number(f"{path}.if_false", raw.get("if_false"), 0.0),
        )
    if "constant" in raw:
        b.check_keys(path, raw, {"constant"})
        return ConstantRule(constant=b.number(f"{path}.constant", raw["constant"], 0.0))
    if "prospect" in raw:
        b.check_keys(path, raw, {"prospect"})
        sub = b.expect_map(f"{path}.prospect", raw["prospect"])
        b.check_keys(f"{path}.prospect", sub,
                     {"reference", "gain_power", "loss_power", "loss_scale", "scale"})
        try:
            return ProspectRule(
                reference=b.number(f"{path}.prospect.reference", sub.get("reference"), 0.0),
                gain_power=b.number(f"{path}.prospect.gain_power", sub.get("gain_power"), 0.88),
                loss_power=b.number(f"{path}.prospect.loss_power", sub.get("loss_power"), 0.88),
                loss_scale=b.number(f"{path}.prospect.loss_scale", sub.get("loss_scale"), 2.25),
                scale=b.number(f"{path}.prospect.scale", sub.get("scale"), 1.0),
            )
        except ValueError as exc:
            b.err(f"{path}.prospect", str(exc))
            return None
    b.err(path, f"weight rule needs one of {sorted(kinds)}")
    return None


def _parse_functor(b: _Builder, path: str, raw) -> FunctorDecl:
    raw = b.expect_map(path, raw)
    b.check_keys(path, raw, {"weights", "only_declared"})
    rules = {}
    for prop, rule_raw in b.expect_map(f"{path}.weights", raw.get("weights")).items():
        rule = _parse_weight_rule(b, f"{path}.weights.{prop}", rule_raw)
        if rule is not None:
            rules[str(prop)] = rule
    return FunctorDecl(
        rules=rules,
        only_declared=b.boolean(f"{path}.only_declared", raw.get("only_declared"), False),
    )


def _parse_metric(b: _Builder, path: str, raw) -> ValueMetric | None:
    raw = b.expect_map(path, raw)
    kind = b.string(f"{path}.kind", raw.get("kind"), "weighted_l1")
    if kind == "weighted_l1":
        b.check_keys(path, raw, {"kind", "importance", "default_importance", "epsilon"})
        importance_raw = b.expect_map(f"{path}.importance", raw.get("importance"))
        importance = {
            str(k): b.number(f"{path}.importance.{k}", v, 1.0)
            for k, v in importance_raw.items()
        }
        try:
            return WeightedL1Metric(
                importance=importance,
                default_importance=b.number(f"{path}.default_importance",
                                            raw.get("default_importance"), 1.0),
                epsilon=b.number(f"{path}.epsilon", raw.get("epsilon"), 1e-9),
            )
        except ValueError as exc:
            b.err(path, str(exc))
            return None
    if kind == "table":
        b.check_keys(path, raw, {"kind", "points", "distances", "symmetric"})
        points = b.names(f"{path}.points", raw.get("points"))
        if len(points) < 2:
            b.err(f"{path}.points", "a distance table needs at least 2 points")
        symmetric = b.boolean(f"{path}.symmetric", raw.get("symmetric"), False)
        entries: dict[tuple[str, str], float] = {}
        for key, v in b.expect_map(f"{path}.distances", raw.get("distances")).items():
            parts = [part.strip() for part in str(key).split(",")]
            if len(parts) != 2 or not all(parts):
                b.err(f"{path}.distances", f"key {key!r} must look like 'a,b'")
                continue
            pair = (parts[0], parts[1])
            for name in pair:
                if name not in points:
                    b.err(f"{path}.distances", f"{name!r} is not a declared point")
            entries[pair] = b.number(f"{path}.distances.{key}", v, 0.0)
        if symmetric:
            for (a, z), d in list(entries.items()):
                entries.setdefault((z, a), d)
        for a in points:
            for z in points:
                if a != z and (a, z) not in entries:
                    b.err(f"{path}.distances", f"missing entry for '{a},{z}'")
        try:
            return TableMetric(entries=entries)
        except ValueError as exc:
            b.err(path, str(exc))
            return None
    b.err(path, f"unknown metric kind {kind!r}")
    return None


def _parse_bundling(b: _Builder, path: str, raw) -> BundlingModel | None:
    raw = b.expect_map(path, raw)
    b.check_keys(path, raw, {"gamma", "kappa", "per_property"})
    try:
        return BundlingModel(
            gamma=b.number(f"{path}.gamma", raw.get("gamma"), 1.0),
            kappa=b.number(f"{path}.kappa", raw.get("kappa"), 0.0),
            per_property=b.boolean(f"{path}.per_property", raw.get("per_property"), False),
        )
    except ValueError as exc:
        b.err(path, str(exc))
        return None


def _parse_agent(b: _Builder, path: str, raw) -> AgentDecl:
    raw = b.expect_map(path, raw)
    b.check_keys(path, raw, {"attributes", "functor", "metric", "holdings"})
    return AgentDecl(
        attributes=_parse_property_set(b, f"{path}.attributes", raw.get("attributes"),
                                       cls=AgentAttributeSet),
        functor=b.string(f"{path}.functor", raw.get("functor")),
        metric=b.string(f"{path}.metric", raw.get("metric")),
        holdings=b.names(f"{path}.holdings", raw.get("holdings")),
    )


def _parse_scenario(data, duplicates: list[str]) -> Scenario:
    b = _Builder()
    b.errors.extend(duplicates)
    data = b.expect_map("scenario", data)
    b.check_keys("scenario", data, {
        "seed", "objects", "morphisms", "metrics", "functors", "bundling",
        "agents", "market", "problems", "segment_attribute",
    })

    scenario = Scenario(seed=b.integer("seed", data.get("seed"), 0))
    scenario.segment_attribute = b.string("segment_attribute",
                                          data.get("segment_attribute"), "segment")

    for name, raw in b.expect_map("objects", data.get("objects")).items():
        scenario.objects[str(name)] = _parse_property_set(b, f"objects.{name}", raw)
    for name, raw in b.expect_map("morphisms", data.get("morphisms")).items():
        scenario.morphisms[str(name)] = _parse_morphism(b, f"morphisms.{name}", raw)
    for name, raw in b.expect_map("metrics", data.get("metrics")).items():
        metric = _parse_metric(b, f"metrics.{name}", raw)
        if metric is not None:
            scenario.metrics[str(name)] = metric
    for name, raw in b.expect_map("functors", data.get("functors")).items():
        scenario.functors[str(name)] = _parse_functor(b, f"functors.{name}", raw)
    for name, raw in b.expect_map("bundling", data.get("bundling")).items():
        model = _parse_bundling(b, f"bundling.{name}", raw)
        if model is not None:
            scenario.bundling[str(name)] = model
    for name, raw in b.expect_map("agents", data.get("agents")).items():
        scenario.agents[str(name)] = _parse_agent(b, f"agents.{name}", raw)

    market_raw = b.expect_map("market", data.get("market"))
    b.check_keys("market", market_raw, {"rounds", "split", "strict", "ownership_property"})
    scenario.market = MarketConfig(
        rounds=b.integer("market.rounds", market_raw.get("rounds"), 10),
        split=b.number("market.split", market_raw.get("split"), 0.5),
        strict=b.boolean("market.strict", market_raw.get("strict"), False),
        ownership_property=b.string("market.ownership_property",
                                    market_raw.get("ownership_property"), "owner"),
    )

    problems = b.expect_map("problems", data.get("problems"))
    b.check_keys("problems", problems, {"design", "price"})
    for name, raw in b.expect_map("problems.design", problems.get("design")).items():
        path = f"problems.design.{name}"
        raw = b.expect_map(path, raw)
        b.check_keys(path, raw, {"base", "catalog", "costs", "audience",
                                 "max_steps", "beam_width"})
        costs_raw = b.expect_map(f"{path}.costs", raw.get("costs"))
        scenario.design_problems[str(name)] = DesignProblemDecl(
            base=b.string(f"{path}.base", raw.get("base")),
            catalog=b.names(f"{path}.catalog", raw.get("catalog")),
            costs={str(k): b.number(f"{path}.costs.{k}", v, 0.0)
                   for k, v in costs_raw.items()},
            audience=b.names(f"{path}.audience", raw.get("audience")),
            max_steps=b.integer(f"{path}.max_steps", raw.get("max_steps"), 1),
            beam_width=b.integer(f"{path}.beam_width", raw.get("beam_width"), 32),
        )
    for name, raw in b.expect_map("problems.price", problems.get("price")).items():
        path = f"problems.price.{name}"
        raw = b.expect_map(path, raw)
        b.check_keys(path, raw, {"product", "audience", "bundling", "quantities", "prices"})
        quantities_raw = raw.get("quantities") or []
        prices_raw = raw.get("prices") or []
        if not isinstance(quantities_raw, list):
            b.err(f"{path}.quantities", "expected a list of integers")
            quantities_raw = []
        if not isinstance(prices_raw, list):
            b.err(f"{path}.prices", "expected a list of numbers")
            prices_raw = []
        scenario.price_problems[str(name)] = PriceProblemDecl(
            product=b.string(f"{path}.product", raw.get("product")),
            audience=b.names(f"{path}.audience", raw.get("audience")),
            bundling=b.string(f"{path}.bundling", raw.get("bundling")),
            quantities=tuple(b.integer(f"{path}.quantities[{i}]", q, 1)
                             for i, q in enumerate(quantities_raw)),
            prices=tuple(b.number(f"{path}.prices[{i}]", p, 1.0)
                         for i, p in enumerate(prices_raw)),
        )

    _cross_validate(b, scenario)
    if b.errors:
        raise ValidationError(b.errors)
    return scenario


def _cross_validate(b: _Builder, s: Scenario) -> None:
    for name, decl in sorted(s.agents.items()):
        if decl.functor not in s.functors:
            b.err(f"agents.{name}", f"unknown functor {decl.functor!r}")
        if decl.metric not in s.metrics:
            b.err(f"agents.{name}", f"unknown metric {decl.metric!r}")
        for held in decl.holdings:
            if held not in s.objects:
                b.err(f"agents.{name}", f"holds unknown object {held!r}")

    if not (0.0 <= s.market.split <= 1.0):
        b.err("market.split", f"must lie in [0, 1], got {s.market.split}")
    if s.market.rounds < 0:
        b.err("market.rounds", "must be >= 0")

    # Ownership: the owner property is authoritative; explicit holdings must agree.
    derived: dict[str, set[str]] = {name: set() for name in s.agents}
    for object_name, obj in sorted(s.objects.items()):
        value = obj.get(s.market.ownership_property)
        if value is not None and value.is_label and str(value) in derived:
            derived[str(value)].add(object_name)
    claimed: dict[str, str] = {}
    for agent_name, decl in sorted(s.agents.items()):
        for held in decl.holdings:
            if held in claimed:
                b.err(f"agents.{agent_name}",
                      f"object {held!r} already held by {claimed[held]!r}")
            claimed[held] = agent_name
    for agent_name, decl in sorted(s.agents.items()):
        explicit = set(decl.holdings)
        if decl.holdings and explicit != derived[agent_name]:
            b.err(f"agents.{agent_name}",
                  f"holdings {sorted(explicit)} disagree with ownership properties "
                  f"{sorted(derived[agent_name])}")
        if not decl.holdings and derived[agent_name]:
            s.agents[agent_name] = AgentDecl(
                attributes=decl.attributes, functor=decl.functor, metric=decl.metric,
                holdings=tuple(sorted(derived[agent_name])),
            )

    for name, decl in sorted(s.design_problems.items()):
        path = f"problems.design.{name}"
        if decl.base not in s.objects:
            b.err(path, f"unknown base object {decl.base!r}")
        for m in decl.catalog:
            if m not in s.morphisms:
                b.err(path, f"unknown morphism {m!r}")
            elif m not in decl.costs:
                b.err(path, f"no cost declared for morphism {m!r}")
        for cost_name, cost in sorted(decl.costs.items()):
            if cost_name not in decl.catalog:
                b.err(path, f"cost for {cost_name!r} which is not in the catalog")
            if cost < 0.0:
                b.err(path, f"cost for {cost_name!r} must be >= 0")
        for a in decl.audience:
            if a not in s.agents:
                b.err(path, f"unknown audience agent {a!r}")
        if decl.max_steps < 0:
            b.err(path, "max_steps must be >= 0")
        if decl.beam_width < 1:
            b.err(path, "beam_width must be >= 1")

    for name, decl in sorted(s.price_problems.items()):
        path = f"problems.price.{name}"
        if decl.product not in s.objects:
            b.err(path, f"unknown product {decl.product!r}")
        for a in decl.audience:
            if a not in s.agents:
                b.err(path, f"unknown audience agent {a!r}")
        if decl.bundling not in s.bundling:
            b.err(path, f"unknown bundling model {decl.bundling!r}")
        if not decl.quantities or list(decl.quantities) != sorted(set(decl.quantities)):
            b.err(path, "quantities must be nonempty and strictly increasing")
        elif any(q < 1 for q in decl.quantities):
            b.err(path, "quantities must be >= 1")
        if not decl.prices or list(decl.prices) != sorted(set(decl.prices)):
            b.err(path, "prices must be nonempty and strictly increasing")
        elif any(p <= 0.0 for p in decl.prices):
            b.err(path, "prices must be positive")


def loads_scenario(text: str) -> Scenario:
    """Parse and fully validate scenario YAML from a string."""
    data, duplicates = _parse_yaml(text)
    return _parse_scenario(data, duplicates)


def load_scenario(path: str | Path) -> Scenario:
    """Parse and fully validate a scenario file."""
    return loads_scenario(Path(path).read_text(encoding="utf-8"))


# --- serialization ---


def _plain_condition(cond: Condition) -> dict:
    out: dict = {}
    if not cond.exists:
        out["exists"] = False
    if cond.equals is not None:
        out["equals"] = plain_property_value(cond.equals)
    if cond.minimum is not None:
        out["min"] = plain_property_value(cond.minimum)
    if cond.maximum is not None:
        out["max"] = plain_property_value(cond.maximum)
    return out or {"exists": True}


def _plain_rule(rule: WeightRule) -> dict:
    if isinstance(rule, PerUnitRule):
        return {"per_unit": rule.per_unit}
    if isinstance(rule, LabelRule):
        out = {"labels": dict(rule.labels)}
        if rule.default is not None:
            out["default"] = rule.default
        return out
    if isinstance(rule, FlagRule):
        return {"if_true": rule.if_true, "if_false": rule.if_false}
    if isinstance(rule, ConstantRule):
        return {"constant": rule.constant}
    if isinstance(rule, ProspectRule):
        return {"prospect": {
            "reference": rule.reference, "gain_power": rule.gain_power,
            "loss_power": rule.loss_power, "loss_scale": rule.loss_scale,
            "scale": rule.scale,
        }}
    raise TypeError(f"unknown rule type: {rule!r}")


def _plain_metric(metric: ValueMetric) -> dict:
    if isinstance(metric, WeightedL1Metric):
        return {
            "kind": "weighted_l1",
            "importance": dict(metric.importance),
            "default_importance": metric.default_importance,
            "epsilon": metric.epsilon,
        }
    return {
        "kind": "table",
        "points": metric.point_ids(),
        "distances": {f"{a},{z}": d for (a, z), d in sorted(metric.entries.items())},
    }


def scenario_to_plain(s: Scenario) -> dict:
    """Scenario as plain YAML-ready data, sections in canonical order."""
    plain: dict = {"seed": s.seed}
    if s.objects:
        plain["objects"] = {
            name: {prop: plain_property_value(v) for prop, v in ps.items()}
            for name, ps in s.objects.items()
        }
    if s.morphisms:
        plain["morphisms"] = {}
        for name, decl in s.morphisms.items():
            entry: dict = {}
            if decl.requires:
                entry["requires"] = {p: _plain_condition(c) for p, c in decl.requires.items()}
            if decl.set_values:
                entry["set"] = {p: plain_property_value(v) for p, v in decl.set_values.items()}
            if decl.add_values:
                entry["add"] = {p: plain_property_value(v) for p, v in decl.add_values.items()}
            if decl.drop:
                entry["drop"] = list(decl.drop)
            plain["morphisms"][name] = entry
    if s.metrics:
        plain["metrics"] = {name: _plain_metric(m) for name, m in s.metrics.items()}
    if s.functors:
        plain["functors"] = {
            name: {
                "weights": {prop: _plain_rule(rule) for prop, rule in decl.rules.items()},
                **({"only_declared": True} if decl.only_declared else {}),
            }
            for name, decl in s.functors.items()
        }
    if s.bundling:
        plain["bundling"] = {
            name: {"gamma": m.gamma, "kappa": m.kappa,
                   **({"per_property": True} if m.per_property else {})}
            for name, m in s.bundling.items()
        }
    if s.agents:
        plain["agents"] = {}
        for name, decl in s.agents.items():
            entry = {
                "attributes": {p: plain_property_value(v) for p, v in decl.attributes.items()},
                "functor": decl.functor,
                "metric": decl.metric,
            }
            if decl.holdings:
                entry["holdings"] = list(decl.holdings)
            plain["agents"][name] = entry
    plain["market"] = {
        "rounds": s.market.rounds, "split": s.market.split, "strict": s.market.strict,
        "ownership_property": s.market.ownership_property,
    }
    problems: dict = {}
    if s.design_problems:
        problems["design"] = {
            name: {
                "base": d.base, "catalog": list(d.catalog), "costs": dict(d.costs),
                "audience": list(d.audience), "max_steps": d.max_steps,
                "beam_width": d.beam_width,
            }
            for name, d in s.design_problems.items()
        }
    if s.price_problems:
        problems["price"] = {
            name: {
                "product": d.product, "audience": list(d.audience), "bundling": d.bundling,
                "quantities": list(d.quantities), "prices": list(d.prices),
            }
            for name, d in s.price_problems.items()
        }
    if problems:
        plain["problems"] = problems
    if s.segment_attribute != "segment":
        plain["segment_attribute"] = s.segment_attribute
    return plain


def dump_scenario(s: Scenario) -> str:
    """Serialize to YAML that loads back to an equal Scenario."""
    return yaml.safe_dump(scenario_to_plain(s), sort_keys=False, default_flow_style=False)
