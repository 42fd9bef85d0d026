import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agorasim import (
    DomainMismatch,
    PropertyMorphism,
    PropertySet,
    PropertyValue,
    UnitMismatch,
    apply_morphism,
    check_morphism_laws,
    compose,
    identity,
    rewrite,
)

from conftest import property_sets, ps


def repaint_blue():
    return rewrite("repaint_blue", requires=lambda p: "color" in p,
                   set_values={"color": PropertyValue.label("blue")})


def age_one_year():
    return rewrite("age_one_year", add_values={"age": PropertyValue.number(1)})


class TestPropertyValue:
    def test_kinds(self):
        assert PropertyValue.label("red").is_label
        assert PropertyValue.number(3, "kg").is_number
        assert PropertyValue.flag(True).is_flag

    def test_rejects_non_finite_numbers(self):
        with pytest.raises(ValueError):
            PropertyValue.number(float("nan"))
        with pytest.raises(ValueError):
            PropertyValue.number(float("inf"), "eur")

    def test_different_units_are_unequal_not_an_error(self):
        assert PropertyValue.number(3, "kg") != PropertyValue.number(3, "lb")
        assert PropertyValue.number(3) != PropertyValue.label("3")

    def test_ordering_across_units_raises(self):
        with pytest.raises(UnitMismatch):
            PropertyValue.number(3, "kg") < PropertyValue.number(4, "lb")
        with pytest.raises(UnitMismatch):
            PropertyValue.label("a") < PropertyValue.label("b")

    def test_shifted_checks_units(self):
        assert PropertyValue.number(2, "y").shifted(PropertyValue.number(1, "y")) \
            == PropertyValue.number(3, "y")
        with pytest.raises(UnitMismatch):
            PropertyValue.number(2, "y").shifted(PropertyValue.number(1))


class TestPropertySet:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            PropertySet([("a", PropertyValue.number(1)), ("a", PropertyValue.number(2))])

    def test_equality_ignores_declaration_order(self):
        a = PropertySet([("x", PropertyValue.number(1)), ("y", PropertyValue.label("red"))])
        b = PropertySet([("y", PropertyValue.label("red")), ("x", PropertyValue.number(1))])
        assert a == b
        assert hash(a) == hash(b)

    def test_with_value_and_without(self):
        base = ps(color="red", age=2)
        updated = base.with_value("color", PropertyValue.label("blue"))
        assert updated == ps(color="blue", age=2)
        assert base == ps(color="red", age=2), "input unchanged"
        assert base.without("age") == ps(color="red")

    @given(property_sets)
    def test_equality_reflexive(self, p):
        assert p == PropertySet(dict(p.items()))

    @given(property_sets, property_sets)
    def test_equality_symmetric(self, a, b):
        assert (a == b) == (b == a)

    @given(property_sets, property_sets, property_sets)
    def test_equality_transitive(self, a, b, c):
        if a == b and b == c:
            assert a == c


class TestApplyAndCompose:
    def test_identity_fixes_everything(self):
        p = ps(color="red")
        assert apply_morphism(identity(), p) == p

    def test_single_property_rewrite(self):
        result = apply_morphism(repaint_blue(), ps(color="red", age=2))
        assert result == ps(color="blue", age=2)

    def test_pattern_mismatch_raises(self):
        with pytest.raises(DomainMismatch):
            apply_morphism(repaint_blue(), ps(size=10))

    def test_compose_applies_first_then_second(self):
        # by hand: repaint turns color blue, then aging bumps age to 3
        composed = compose(repaint_blue(), age_one_year())
        assert apply_morphism(composed, ps(color="red", age=2)) == ps(color="blue", age=3)

    @given(property_sets)
    def test_identity_is_neutral(self, p):
        f = repaint_blue()
        lhs = compose(identity(), f)
        rhs = compose(f, identity())
        if f.applicable(p):
            expected = apply_morphism(f, p)
            assert apply_morphism(lhs, p) == expected
            assert apply_morphism(rhs, p) == expected

    @given(property_sets)
    def test_composition_associative_on_samples(self, p):
        f, g, h = repaint_blue(), age_one_year(), rewrite(
            "tag_fragile", set_values={"fragile": PropertyValue.flag(True)})
        left = compose(compose(f, g), h)
        right = compose(f, compose(g, h))
        try:
            a = apply_morphism(left, p)
        except DomainMismatch:
            with pytest.raises(DomainMismatch):
                apply_morphism(right, p)
            return
        assert a == apply_morphism(right, p)

    def test_compose_names_failing_factor(self):
        f, g = repaint_blue(), age_one_year()
        with pytest.raises(DomainMismatch) as exc:
            apply_morphism(compose(f, g), ps(color="red"))  # no age property
        assert exc.value.who == "age_one_year"
        with pytest.raises(DomainMismatch) as exc:
            apply_morphism(compose(f, g), ps(age=1))  # no color property
        assert exc.value.who == "repaint_blue"

    @given(property_sets)
    def test_purity_same_output_twice(self, p):
        f = age_one_year()
        if f.applicable(p):
            assert apply_morphism(f, p) == apply_morphism(f, p)


class TestMorphismLaws:
    def samples(self):
        return [ps(color="red", age=2), ps(color="green", age=0, size=4), ps(size=9)]

    def test_well_formed_catalog_passes(self):
        catalog = [repaint_blue(), age_one_year(), identity(),
                   rewrite("shrink", add_values={"size": PropertyValue.number(-1)})]
        report = check_morphism_laws(catalog, self.samples())
        assert report.passed()
        assert report.verdict("H1").checks > 0

    def test_nondeterministic_morphism_reported(self):
        counter = {"n": 0}

        def stamp(p: PropertySet) -> PropertySet:
            counter["n"] += 1
            return p.with_value("stamp", PropertyValue.number(counter["n"]))

        leaky = PropertyMorphism("leaky_stamp", lambda p: True, stamp)
        report = check_morphism_laws([leaky, age_one_year()], self.samples())
        verdict = report.verdict("H1")
        assert not verdict.passed
        assert verdict.witnesses and "leaky_stamp" in verdict.witnesses[0].inputs

    def test_empty_catalog_vacuous_pass(self):
        report = check_morphism_laws([], self.samples())
        assert report.passed()
        assert report.verdict("H1").checks == 0
        assert "vacuous" in report.verdict("H1").note
