"""Shared builders for the test suite."""

from __future__ import annotations

import pytest
from hypothesis import strategies as st

from agorasim import (
    Agent,
    LabelRule,
    PerUnitRule,
    PropertySet,
    PropertyValue,
    WeightedL1Metric,
    rules_functor,
)

LABELS = ("red", "blue", "green", "matte")
UNITS = ("", "eur", "kg")


def ps(**props) -> PropertySet:
    """PropertySet from python literals: str -> label, number -> number, bool -> flag."""
    out = []
    for name, raw in props.items():
        if isinstance(raw, bool):
            out.append((name, PropertyValue.flag(raw)))
        elif isinstance(raw, (int, float)):
            out.append((name, PropertyValue.number(float(raw))))
        elif isinstance(raw, tuple):
            out.append((name, PropertyValue.number(float(raw[0]), raw[1])))
        else:
            out.append((name, PropertyValue.label(str(raw))))
    return PropertySet(out)


def owner_agent(agent_id: str, own_worth: float, other_worth: float = 0.0,
                metric: WeightedL1Metric | None = None) -> Agent:
    """An agent whose functor only cares who owns the object."""
    functor = rules_functor(f"V_{agent_id}", {
        "owner": LabelRule({agent_id: own_worth}, default=other_worth),
    })
    return Agent(id=agent_id, functor=functor, metric=metric or WeightedL1Metric())


property_values = st.one_of(
    st.sampled_from(LABELS).map(PropertyValue.label),
    st.tuples(
        st.floats(min_value=-100, max_value=100, allow_nan=False),
        st.sampled_from(UNITS),
    ).map(lambda t: PropertyValue.number(*t)),
    st.booleans().map(PropertyValue.flag),
)

property_sets = st.dictionaries(
    st.sampled_from(("color", "age", "size", "owner", "fragile")),
    property_values,
    max_size=5,
).map(PropertySet)


@pytest.fixture
def linear_functor():
    return rules_functor("linear", {
        "age": PerUnitRule(2.0),
        "size": PerUnitRule(-0.5),
        "color": LabelRule({"red": 2.0, "blue": 5.0}, default=1.0),
    })
