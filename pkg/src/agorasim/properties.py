"""Property sets and the rewrites that transform them.

An object is nothing but its set of named properties: two objects with equal
name->value maps are the same object for every purpose in this package.
Transformations between property sets are deterministic guarded rewrites
(morphisms); they compose, there is an identity, and ``check_morphism_laws``
verifies composition/identity/closure over sampled inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import DomainMismatch, UnitMismatch
from .reports import LawReport, LawVerdict, Witness

_LABEL = "label"
_NUMBER = "number"
_FLAG = "flag"


@dataclass(frozen=True)
class PropertyValue:
    """A single property value: a discrete label, a tagged number, or a flag.

    Numbers always carry a unit tag ("" means dimensionless). Values of
    different kinds or units are simply unequal; *ordering* them raises
    UnitMismatch instead, so range guards can never silently compare
    eur against years.
    """

    kind: str
    value: object
    unit: str = ""

    @staticmethod
    def label(name: str) -> "PropertyValue":
        return PropertyValue(_LABEL, str(name))

    @staticmethod
    def number(x: float, unit: str = "") -> "PropertyValue":
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"property numbers must be finite, got {x!r}")
        return PropertyValue(_NUMBER, x, unit)

    @staticmethod
    def flag(b: bool) -> "PropertyValue":
        return PropertyValue(_FLAG, bool(b))

    @property
    def is_number(self) -> bool:
        return self.kind == _NUMBER

    @property
    def is_label(self) -> bool:
        return self.kind == _LABEL

    @property
    def is_flag(self) -> bool:
        return self.kind == _FLAG

    def as_number(self) -> float:
        if not self.is_number:
            raise UnitMismatch(f"{self} is not numeric")
        return self.value  # type: ignore[return-value]

    def _check_comparable(self, other: "PropertyValue") -> None:
        if not (self.is_number and other.is_number):
            raise UnitMismatch(f"cannot order {self} against {other}")
        if self.unit != other.unit:
            raise UnitMismatch(
                f"cannot compare {self.unit or 'dimensionless'} against {other.unit or 'dimensionless'}"
            )

    def __lt__(self, other: "PropertyValue") -> bool:
        self._check_comparable(other)
        return self.value < other.value  # type: ignore[operator]

    def __le__(self, other: "PropertyValue") -> bool:
        self._check_comparable(other)
        return self.value <= other.value  # type: ignore[operator]

    def shifted(self, delta: "PropertyValue") -> "PropertyValue":
        """Numeric increment; the delta's unit must match."""
        self._check_comparable(delta)
        return PropertyValue.number(self.value + delta.value, self.unit)  # type: ignore[operator]

    def __str__(self) -> str:
        if self.is_label:
            return str(self.value)
        if self.is_flag:
            return "true" if self.value else "false"
        text = f"{self.value:g}"
        return f"{text} {self.unit}" if self.unit else text


class PropertySet:
    """An immutable ordered map of property name -> PropertyValue.

    Declaration order is preserved for display and serialization, but
    equality and hashing are order-insensitive: identical name->value maps
    are the same object.
    """

    __slots__ = ("_items", "_map")

    def __init__(self, properties: Mapping[str, PropertyValue] | Iterable[tuple[str, PropertyValue]] = ()):
        items = tuple(properties.items()) if isinstance(properties, Mapping) else tuple(properties)
        seen: dict[str, PropertyValue] = {}
        for name, value in items:
            if name in seen:
                raise ValueError(f"duplicate property name: {name!r}")
            if not isinstance(value, PropertyValue):
                raise TypeError(f"property {name!r} is not a PropertyValue: {value!r}")
            seen[name] = value
        object.__setattr__(self, "_items", items)
        object.__setattr__(self, "_map", seen)

    def __setattr__(self, *_):
        raise AttributeError("PropertySet is immutable")

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self._items)

    def items(self) -> tuple[tuple[str, PropertyValue], ...]:
        return self._items

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def __getitem__(self, name: str) -> PropertyValue:
        return self._map[name]

    def get(self, name: str, default: PropertyValue | None = None) -> PropertyValue | None:
        return self._map.get(name, default)

    def __len__(self) -> int:
        return len(self._items)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PropertySet):
            return NotImplemented
        return self._map == other._map

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{name}={value}" for name, value in self._items)
        return f"{{{body}}}"

    def with_value(self, name: str, value: PropertyValue) -> "PropertySet":
        """A copy with one property set (appended if new, rewritten in place if present)."""
        if name in self._map:
            return PropertySet((n, value if n == name else v) for n, v in self._items)
        return PropertySet(self._items + ((name, value),))

    def without(self, name: str) -> "PropertySet":
        return PropertySet((n, v) for n, v in self._items if n != name)


@dataclass(frozen=True)
class PropertyMorphism:
    """A named deterministic rewrite guarded by a domain predicate."""

    name: str
    pattern: Callable[[PropertySet], bool]
    effect: Callable[[PropertySet], PropertySet]

    def applicable(self, p: PropertySet) -> bool:
        return bool(self.pattern(p))

    def __repr__(self) -> str:
        return f"PropertyMorphism({self.name!r})"


def identity() -> PropertyMorphism:
    """The identity morphism: matches everything, rewrites nothing."""
    return PropertyMorphism("id", lambda p: True, lambda p: p)


def apply_morphism(f: PropertyMorphism, p: PropertySet) -> PropertySet:
    """Apply ``f`` to ``p``; raises DomainMismatch when the guard rejects ``p``."""
    if not f.applicable(p):
        raise DomainMismatch(f.name, f"pattern does not match {p!r}")
    result = f.effect(p)
    if not isinstance(result, PropertySet):
        raise TypeError(f"morphism {f.name} produced {type(result).__name__}, not a PropertySet")
    return result


def compose(f: PropertyMorphism, g: PropertyMorphism) -> PropertyMorphism:
    """The morphism applying ``f`` first, then ``g``.

    Domain checks stay lazy: at application time a DomainMismatch names
    whichever factor actually failed.
    """

    def effect(p: PropertySet) -> PropertySet:
        return apply_morphism(g, f.effect(p))

    return PropertyMorphism(f"({f.name} >> {g.name})", f.pattern, effect)


def rewrite(
    name: str,
    *,
    requires: Callable[[PropertySet], bool] | None = None,
    set_values: Mapping[str, PropertyValue] | None = None,
    add_values: Mapping[str, PropertyValue] | None = None,
    drop: Iterable[str] = (),
) -> PropertyMorphism:
    """Build a plain rewrite morphism from declarative parts.

    ``set_values`` assigns properties, ``add_values`` increments numeric ones
    (unit-checked), ``drop`` removes properties. The guard requires every
    touched property to exist (except ones being set), plus any extra
    ``requires`` predicate.
    """
    sets = dict(set_values or {})
    adds = dict(add_values or {})
    drops = tuple(drop)

    def pattern(p: PropertySet) -> bool:
        for touched in (*adds, *drops):
            if touched not in p:
                return False
        if requires is not None and not requires(p):
            return False
        return True

    def effect(p: PropertySet) -> PropertySet:
        out = p
        for prop, value in sets.items():
            out = out.with_value(prop, value)
        for prop, delta in adds.items():
            out = out.with_value(prop, out[prop].shifted(delta))
        for prop in drops:
            out = out.without(prop)
        return out

    return PropertyMorphism(name, pattern, effect)


def check_morphism_laws(
    catalog: list[PropertyMorphism],
    samples: list[PropertySet],
) -> LawReport:
    """Check composition (H1), identity (H2) and closure (H3) over samples.

    Combinations where a guard rejects an input are skipped, not failed:
    the laws quantify over applicable domains only. An empty catalog passes
    vacuously. PropertySet equality is discrete, so all three laws are
    checked exactly, with a minimal witness per failure.
    """
    report = LawReport(subject="morphisms")
    ident = identity()

    def try_apply(f: PropertyMorphism, p: PropertySet) -> PropertySet | None:
        try:
            return apply_morphism(f, p)
        except DomainMismatch:
            return None

    # H1: both association orders of any composable triple agree.
    checks = skips = 0
    witnesses: list[Witness] = []
    for f in catalog:
        for g in catalog:
            for h in catalog:
                left = compose(compose(f, g), h)
                right = compose(f, compose(g, h))
                for p in samples:
                    a = try_apply(left, p)
                    b = try_apply(right, p)
                    if a is None or b is None:
                        skips += 1
                        continue
                    checks += 1
                    if a != b and not witnesses:
                        witnesses.append(Witness(
                            law="H1",
                            inputs=(f.name, g.name, h.name, repr(p)),
                            measured=(),
                            magnitude=1.0,
                            detail=f"{a!r} != {b!r}",
                        ))
    note = "vacuous: empty catalog" if not catalog else ""
    report.add(LawVerdict("H1", passed=not witnesses, checks=checks, skipped=skips,
                          witnesses=witnesses, note=note))

    # H2: composing with the identity changes nothing.
    checks = skips = 0
    witnesses = []
    for f in catalog:
        pre, post = compose(ident, f), compose(f, ident)
        for p in samples:
            base = try_apply(f, p)
            if base is None:
                skips += 1
                continue
            checks += 1
            a, b = try_apply(pre, p), try_apply(post, p)
            if (a != base or b != base) and not witnesses:
                witnesses.append(Witness(
                    law="H2",
                    inputs=(f.name, repr(p)),
                    measured=(),
                    magnitude=1.0,
                    detail=f"id-composites gave {a!r} / {b!r}, expected {base!r}",
                ))
    report.add(LawVerdict("H2", passed=not witnesses, checks=checks, skipped=skips,
                          witnesses=witnesses, note=note))

    # H3: a composite behaves exactly as sequential application.
    checks = skips = 0
    witnesses = []
    for f in catalog:
        for g in catalog:
            composite = compose(f, g)
            for p in samples:
                mid = try_apply(f, p)
                if mid is None:
                    skips += 1
                    continue
                expected = try_apply(g, mid)
                if expected is None:
                    skips += 1
                    continue
                checks += 1
                actual = try_apply(composite, p)
                if actual != expected and not witnesses:
                    witnesses.append(Witness(
                        law="H3",
                        inputs=(f.name, g.name, repr(p)),
                        measured=(),
                        magnitude=1.0,
                        detail=f"composite gave {actual!r}, sequential gave {expected!r}",
                    ))
    report.add(LawVerdict("H3", passed=not witnesses, checks=checks, skipped=skips,
                          witnesses=witnesses, note=note))
    return report
