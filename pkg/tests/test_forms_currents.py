import pytest
import itertools

from fractions import Fraction

from services.tensor_core import GeneratorId
from services.free_dg_lie import LieExpr
from services.forms_currents import (
    Current,
    PolyForm,
    boundary,
    closed_forms_dimension,
    de_rham_d,
    exponents,
    gamma_closed_dimension,
    gamma_dimension,
    gamma_slice,
    index_sets,
    pairing,
    rho,
    rho0,
    rho_minus_m,
    schur_dimension,
)
from utils.exceptions import ConfigurationError

Z1, Z2, Z3 = (GeneratorId.of(i) for i in (1, 2, 3))
Z12, Z34 = GeneratorId.of(1, 2), GeneratorId.of(3, 4)


def leaf(generator):
    return LieExpr.leaf(generator)


def test_de_rham_d_of_a_monomial():
    form = PolyForm.monomial(2, (1, 1), (1,))
    assert de_rham_d(form) == PolyForm.monomial(2, (1, 0), (1, 2), -1)


def test_de_rham_d_squares_to_zero():
    for alpha in exponents(3, 3):
        for index_set in index_sets(3, 1):
            form = PolyForm.monomial(3, alpha, index_set)
            assert de_rham_d(de_rham_d(form)).is_zero()


def test_boundary_squares_to_zero():
    for current in gamma_slice(3, 1, 3) + gamma_slice(2, 2, 3):
        assert boundary(boundary(current)).is_zero()


def test_boundary_of_a_point_current_is_zero():
    current = Current.delta(2, (1, 0), ())
    assert boundary(current).is_zero()


def test_boundary_is_adjoint_to_de_rham_d():
    n = 3
    for p in (0, 1, 2):
        for q in (1, 2):
            forms = [PolyForm.monomial(n, a, i) for a in exponents(n, q) for i in index_sets(n, p)]
            currents = gamma_slice(p + 1, q - 1, n)
            for form, current in itertools.product(forms, currents):
                assert pairing(boundary(current), form) == pairing(current, de_rham_d(form))


def test_pairing_counts_factorials():
    current = Current.delta(2, (2, 0), (2,))
    form = PolyForm.monomial(2, (2, 0), (2,), Fraction(1, 2))
    assert pairing(current, form) == 1


def test_pairing_needs_matching_degrees():
    with pytest.raises(ConfigurationError):
        pairing(Current.delta(2, (0, 0), (1,)), PolyForm.monomial(2, (0, 0), (1, 2)))


def test_rho0_evaluates_derivatives_at_the_origin():
    expr = LieExpr.right_normed([Z1, Z1, Z2])
    current = rho0(expr)
    assert current == Current.delta(2, (1, 0), (1, 2))
    assert pairing(current, PolyForm.monomial(2, (1, 0), (1, 2))) == 1


def test_rho0_is_antisymmetric_in_the_innermost_pair():
    assert rho0(LieExpr.right_normed([Z2, Z1])) == Current.delta(2, (0, 0), (1, 2), -1)
    assert rho0(LieExpr.right_normed([Z1, Z1])).is_zero()


def test_rho_minus_m_shifts_by_the_outer_letters():
    current = rho_minus_m(LieExpr.bracket(leaf(Z3), leaf(Z12)))
    assert current == Current.delta(3, (0, 0, 1), (1, 2))
    assert pairing(current, PolyForm.monomial(3, (0, 0, 1), (1, 2))) == 1
    flipped = rho_minus_m(LieExpr.bracket(leaf(Z12), leaf(Z3)))
    assert flipped == current.scale(-1)


def test_rho_minus_m_vanishes_on_two_higher_generators():
    current = rho_minus_m(LieExpr.bracket(leaf(Z12), leaf(Z34)))
    assert current.is_zero()
    assert current.p == 3


def test_rho_rejects_wrong_degrees():
    with pytest.raises(ConfigurationError):
        rho0(leaf(Z12))
    with pytest.raises(ConfigurationError):
        rho_minus_m(LieExpr.right_normed([Z1, Z2]))
    with pytest.raises(ConfigurationError):
        rho0(LieExpr.right_normed([Z1, Z3]), n=2)


def test_rho_is_linear():
    a = LieExpr.right_normed([Z1, Z2])
    b = LieExpr.right_normed([Z2, Z1])
    assert rho(a, 2) == rho0(a)
    assert rho(b, 2) == rho0(a).scale(-1)


def test_gamma_dimensions():
    assert gamma_dimension(2, 0, 3) == 3
    assert gamma_dimension(2, 2, 3) == 18
    assert gamma_dimension(4, 0, 3) == 0
    assert len(gamma_slice(2, 2, 3)) == 18


def test_closed_currents_match_hook_content():
    assert gamma_closed_dimension(1, 2, 2) == 2 == schur_dimension((2, 1), 2)
    for n in (2, 3):
        for q in (1, 2, 3):
            assert gamma_closed_dimension(1, q, n) == schur_dimension((q, 1), n)


def test_top_degree_currents_have_no_cycles_beyond_constants():
    assert gamma_closed_dimension(2, 0, 2) == 0
    assert gamma_closed_dimension(0, 2, 2) == 3


def test_schur_dimension():
    assert schur_dimension((1,), 4) == 4
    assert schur_dimension((1, 1), 4) == 6
    assert schur_dimension((2,), 3) == 6
    assert schur_dimension((1, 1, 1), 2) == 0
    with pytest.raises(ConfigurationError):
        schur_dimension((1, 2), 3)


def test_closed_polynomial_forms():
    assert closed_forms_dimension(1, 0, 2) == 2
    assert closed_forms_dimension(1, 1, 2) == 3
    assert closed_forms_dimension(2, 0, 2) == 1
    assert closed_forms_dimension(3, 0, 2) == 0
    with pytest.raises(ConfigurationError):
        closed_forms_dimension(0, 1, 2)
