import pytest

from fractions import Fraction

from services.tensor_core import GeneratorId, Tensor
from services.free_dg_lie import (
    FreeDGLie,
    LieExpr,
    curvature,
    differential_vector,
    parse_lie_label,
    universal_connection,
    witt_dimension,
)
from services.forms_currents import ConstantForm
from utils.exceptions import ConfigurationError

Z1, Z2, Z3 = (GeneratorId.of(i) for i in (1, 2, 3))
Z12, Z13, Z23 = GeneratorId.of(1, 2), GeneratorId.of(1, 3), GeneratorId.of(2, 3)
Z123 = GeneratorId.of(1, 2, 3)


def words(n, L, *pairs):
    return Tensor(n, L, {w: Fraction(c) for w, c in pairs})


def test_differential_of_z12_is_the_bracket():
    algebra = FreeDGLie.get(2, 2)
    expected = words(2, 2, ((Z1, Z2), 1), ((Z2, Z1), -1))
    assert algebra.differential(algebra.letter(1, 2)) == expected


def test_differential_of_z123():
    algebra = FreeDGLie.get(3, 2)
    expected = words(
        3,
        2,
        ((Z1, Z23), 1),
        ((Z23, Z1), -1),
        ((Z2, Z13), -1),
        ((Z13, Z2), 1),
        ((Z3, Z12), 1),
        ((Z12, Z3), -1),
    )
    assert algebra.differential(algebra.letter(1, 2, 3)) == expected


def test_lie_and_tensor_differentials_agree_on_generators():
    algebra = FreeDGLie.get(4, 2)
    for generator in (Z12, Z123, GeneratorId.of(1, 2, 3, 4)):
        lie = algebra.realize_sum(algebra.differential_on_generator(generator))
        assert lie == algebra.differential(Tensor.letter(generator, 4, 2))


def test_degree_zero_letters_are_closed():
    algebra = FreeDGLie.get(2, 3)
    assert algebra.differential(algebra.letter(1)).is_zero()
    assert algebra.differential(words(2, 3, ((Z1, Z2), 1))).is_zero()


def test_differential_is_a_derivation_on_products():
    algebra = FreeDGLie.get(3, 3)
    product = words(3, 3, ((Z12, Z3), 1))
    expected = words(3, 3, ((Z1, Z2, Z3), 1), ((Z2, Z1, Z3), -1))
    assert algebra.differential(product) == expected


def test_differential_matches_bracket_rule_on_monomials():
    algebra = FreeDGLie.get(3, 3)
    expr = LieExpr.bracket(LieExpr.leaf(Z1), LieExpr.leaf(Z123))
    assert algebra.realize_sum(algebra.differential_expr(expr)) == algebra.differential(
        algebra.realize(expr)
    )


def test_differential_squares_to_zero():
    for n in (3, 4):
        top = GeneratorId(tuple(range(1, n + 1)))
        vector = {(top,): Fraction(1)}
        assert differential_vector(n, differential_vector(n, vector)) == {}
    mixed = {(Z1, Z123): Fraction(1), (Z123, Z2): Fraction(-2)}
    assert differential_vector(3, differential_vector(3, mixed)) == {}


@pytest.mark.parametrize(
    "n, i, letters, expected",
    [(2, 0, 3, 2), (3, 0, 2, 3), (3, -1, 1, 3), (2, -1, 2, 2), (3, -2, 1, 1)],
)
def test_bigraded_dimensions(n, i, letters, expected):
    assert FreeDGLie.get(n, 4).bigraded_dimension(i, letters) == expected


def test_degree_zero_slices_have_witt_dimension():
    algebra = FreeDGLie.get(2, 5)
    for letters in range(1, 6):
        assert algebra.bigraded_dimension(0, letters) == witt_dimension(2, letters)


def test_witt_dimension():
    assert [witt_dimension(2, k) for k in range(1, 6)] == [2, 1, 2, 3, 6]
    assert witt_dimension(3, 2) == 3


def test_cohomology_is_concentrated_in_single_letters():
    algebra = FreeDGLie.get(3, 3)
    assert algebra.cohomology_dimension(0, 1) == 3
    assert algebra.cohomology_dimension(0, 2) == 0
    assert algebra.cohomology_dimension(-1, 2) == 0
    assert algebra.cohomology_dimension(-1, 1) == 0


def test_slices_outside_range_raise():
    algebra = FreeDGLie.get(2, 3)
    with pytest.raises(ConfigurationError):
        algebra.bigraded_dimension(1, 2)
    with pytest.raises(ConfigurationError):
        algebra.bigraded_dimension(0, 4)


def test_lie_element_detection():
    algebra = FreeDGLie.get(2, 3)
    bracket = algebra.realize(LieExpr.right_normed([Z1, Z2]))
    assert algebra.is_lie_element(bracket)
    assert not algebra.is_lie_element(words(2, 3, ((Z1, Z2), 1)))


def test_universal_connection_components():
    form = universal_connection(3)
    assert len(form.terms) == 7
    assert form.component((1,)) == Tensor.letter(Z1, 3, 2)
    assert form.component((1, 2)) == Tensor.letter(Z12, 3, 2)
    assert form.component((1, 2, 3)) == Tensor.letter(Z123, 3, 2, -1)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_universal_connection_is_flat(n):
    assert curvature(universal_connection(n, 2)).is_zero()


def test_degree_one_part_alone_is_not_flat():
    form = ConstantForm(2, {(1,): Tensor.letter(Z1, 2, 2), (2,): Tensor.letter(Z2, 2, 2)})
    expected = words(2, 2, ((Z1, Z2), -1), ((Z2, Z1), 1))
    assert curvature(form).component((1, 2)) == expected


def test_lie_labels_round_trip():
    expr = LieExpr.right_normed([Z1, Z2, Z12])
    assert str(expr) == "[Z1,[Z2,Z12]]"
    assert parse_lie_label(str(expr)) == expr
    wide = parse_lie_label("[Z3,Z_{1,10}]")
    assert wide.right.generator == GeneratorId.of(1, 10)


def test_malformed_labels_raise():
    for text in ("[Z1,Z2", "Z", "[Z1;Z2]", "Z1]"):
        with pytest.raises(ConfigurationError):
            parse_lie_label(text)
