import pytest

from fractions import Fraction

from services.nilpotent_groups import GroupElement, PMorphism, dynkin_bch_terms, law_violations
from utils.exceptions import CompositionError, ConfigurationError


def unit(groups, depth, label, coeff=1):
    coords = [0] * groups.cc.dim(depth)
    coords[groups.cc.labels[depth].index(label)] = coeff
    return groups.element(depth, coords)


def test_dynkin_terms_start_with_the_linear_part():
    terms = dict((word, coeff) for coeff, word in dynkin_bch_terms(2))
    assert terms[(0,)] == 1 and terms[(1,)] == 1
    assert terms[(0, 1)] == Fraction(1, 4)
    assert terms[(1, 0)] == Fraction(-1, 4)


def test_bch_at_class_two(groups):
    g = groups(2, 2)
    x, y = unit(g, 0, "Z1"), unit(g, 0, "Z2")
    expected = g.element(0, [0, 0, 0])
    coords = list(expected.coords)
    coords[g.cc.labels[0].index("Z1")] = 1
    coords[g.cc.labels[0].index("Z2")] = 1
    coords[g.cc.labels[0].index("[Z1,Z2]")] = Fraction(1, 2)
    assert g.mul(x, y) == g.element(0, coords)


def test_inverse_and_identity(groups, rng):
    g = groups(2, 3)
    for depth in (0, 1):
        x = g.random_element(depth, rng)
        assert g.mul(x, g.inv(x)).is_identity()
        assert g.mul(x, g.identity(depth)) == x


def test_commutator_is_the_bracket_at_class_two(groups):
    g = groups(2, 2)
    commutator = g.commutator(unit(g, 0, "Z1"), unit(g, 0, "Z2"))
    assert commutator == unit(g, 0, "[Z1,Z2]")


def test_bch_matches_the_tensor_algebra(groups, rng):
    g = groups(2, 3)
    for _ in range(5):
        x, y = g.random_element(0, rng), g.random_element(0, rng)
        assert g.tensor_product_residual(x, y) == 0


def test_boundary_of_exp_z12(groups):
    g = groups(2, 2)
    assert g.boundary(unit(g, 1, "Z12")) == unit(g, 0, "[Z1,Z2]")
    with pytest.raises(ConfigurationError):
        g.boundary(unit(g, 0, "Z1"))


def test_action(groups, rng):
    g = groups(2, 2)
    x = g.random_element(1, rng)
    assert g.act(g.identity(0), x) == x
    moved = g.act(unit(g, 0, "Z1"), unit(g, 0, "Z2"))
    coords = [0] * 3
    coords[g.cc.labels[0].index("Z2")] = 1
    coords[g.cc.labels[0].index("[Z1,Z2]")] = 1
    assert moved == g.element(0, coords)
    with pytest.raises(ConfigurationError):
        g.act(x, x)


def test_elements_check_dimensions(groups):
    g = groups(2, 2)
    with pytest.raises(ConfigurationError):
        g.element(0, [1, 2])
    with pytest.raises(ConfigurationError):
        g.mul(g.identity(0), g.identity(1))


def test_group_element_serialization():
    element = GroupElement(1, (Fraction(1, 2), Fraction(0), Fraction(-3)))
    payload = element.to_dict()
    assert payload == {"degree": -1, "coords": ["1/2", "0", "-3"]}
    assert GroupElement.from_dict(payload) == element
    with pytest.raises(ConfigurationError):
        GroupElement.from_dict({"coords": []})


def test_source_and_target(groups, rng):
    g = groups(2, 2)
    h, u = g.random_element(1, rng), g.random_element(0, rng)
    cell = g.morphism([h, u])
    assert g.source(cell) == PMorphism((u,))
    assert g.target(cell) == PMorphism((g.mul(g.boundary(h), u),))
    assert g.target(PMorphism((u,))) == PMorphism(())
    with pytest.raises(ConfigurationError):
        g.morphism([u, h])


def test_horizontal_composition_twists_by_the_action(groups, rng):
    g = groups(2, 2)
    x, y = g.random_morphism(2, rng), g.random_morphism(2, rng)
    (h, u), (k, v) = x.components, y.components
    composed = g.compose(x, y, 0)
    assert composed.components == (g.mul(h, g.act(u, k)), g.mul(u, v))


def test_vertical_composition_needs_matching_faces(groups, rng):
    g = groups(2, 2)
    y = g.random_morphism(2, rng)
    x = g.with_source(2, 1, g.target_at(y, 1), rng)
    composed = g.compose(x, y, 1)
    assert composed.components[1] == y.components[1]
    unrelated = g.random_morphism(2, rng)
    with pytest.raises(CompositionError):
        g.compose(unrelated, y, 1)
    with pytest.raises(CompositionError):
        g.compose(x, y, 2)
    with pytest.raises(CompositionError):
        g.compose(x, g.random_morphism(1, rng), 0)


def test_laws_hold_on_random_samples(groups, rng):
    assert law_violations(groups(2, 3), rng, 12) == []


@pytest.mark.slow
def test_laws_hold_in_three_dimensions(groups, rng):
    assert law_violations(groups(3, 4), rng, 100) == []
