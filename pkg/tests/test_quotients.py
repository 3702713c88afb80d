import copy
import pytest

from fractions import Fraction

from services import quotients
from services.quotients import NilpotentCrossedComplex, extract_structure_constants
from services.tensor_core import GeneratorId
from utils.exceptions import AxiomViolation, ConfigurationError

Z1, Z2 = GeneratorId.of(1), GeneratorId.of(2)
Z12 = GeneratorId.of(1, 2)


def test_semiabelianization_kills_brackets_of_negative_elements():
    # [Z_a, Z123] survive, the six [Z_ij, Z_kl] do not
    assert quotients.semiabelian_dimension(3, -2, 2) == 3
    assert quotients.semiabelian_dimension(2, -2, 2) == 0


def test_semiabelianization_leaves_degree_zero_alone():
    assert quotients.semiabelian_dimension(2, 0, 3) == 2
    with pytest.raises(ConfigurationError):
        quotients.semiabelianization_slice(2, 1, 2)


def test_degree_minus_one_quotient_by_d_of_brackets():
    assert quotients.semiabelian_dimension(3, -1, 1) == 3
    assert quotients.semiabelian_dimension(2, -1, 2) == 2


def test_abelianization_in_degree_zero():
    assert quotients.abelian_dimension(2, 0, 1) == 0
    assert quotients.abelian_dimension(3, 0, 1) == 0
    assert quotients.abelian_dimension(2, 0, 3) == 2
    assert quotients.abelian_dimension(2, 0, 4) == 3


@pytest.mark.parametrize("q", [0, 1, 2])
def test_abelianization_in_degree_minus_one_is_symmetric(q):
    assert quotients.abelian_dimension(2, -1, 1 + q) == q + 1


def test_abelianization_rejects_positive_degrees():
    with pytest.raises(ConfigurationError):
        quotients.abelianization_slice(2, 1, 2)


def test_quotient_representatives():
    piece = quotients.semiabelianization_slice(3, -2, 2)
    z12, z13 = GeneratorId.of(1, 2), GeneratorId.of(1, 3)
    bracket = {(z12, z13): Fraction(1), (z13, z12): Fraction(1)}
    assert piece.is_zero(bracket)
    assert piece.representative(bracket) == {}


def test_crossed_module_quotient_cohomology():
    quotient = quotients.crossed_module_quotient(2, 3)
    assert quotient.h0 == {1: 2, 2: 0, 3: 0}
    assert set(quotient.h_minus_1.values()) == {0}
    assert quotient.center_violations() == []


def test_lower_central_series_slices():
    assert quotients.lower_central_series_slice(2, 2, 0, 1).dimension == 2
    assert quotients.lower_central_series_slice(2, 2, 0, 2).dimension == 0
    assert quotients.lower_central_series_slice(2, 3, 0, 2).dimension == 1
    assert quotients.lower_central_series_slice(2, 3, 0, 3).dimension == 0
    with pytest.raises(ConfigurationError):
        quotients.lower_central_series_slice(2, 0, 0, 1)


def test_cohomology_table_rows():
    rows = quotients.cohomology_table(2, 3)
    by_slice = {(row["i"], row["letters"]): row for row in rows}
    assert by_slice[(0, 1)]["H"] == 2
    assert by_slice[(0, 2)]["dim"] == 1
    assert by_slice[(0, 2)]["H"] == 0
    assert by_slice[(-1, 1)]["ker_d"] == 0
    assert all(row["dim"] > 0 for row in rows)


def test_outer_letters_commute_modulo_semiabelian_relations():
    assert quotients.symmetry_violations(3, 3) == []


def test_structure_constants_for_two_dimensions():
    cc = extract_structure_constants(2, 2)
    assert cc.dims == [3, 3]
    assert set(cc.labels[0]) == {"Z1", "Z2", "[Z1,Z2]"}
    assert set(cc.labels[1]) == {"Z12", "[Z1,Z12]", "[Z2,Z12]"}
    z12 = cc.labels[1].index("Z12")
    bracket = cc.labels[0].index("[Z1,Z2]")
    assert cc.differential_coords(1, {z12: Fraction(1)}) == {bracket: 1}


def test_structure_constant_brackets():
    cc = extract_structure_constants(2, 2)
    z1, z2 = cc.labels[0].index("Z1"), cc.labels[0].index("Z2")
    bracket = cc.labels[0].index("[Z1,Z2]")
    assert cc.bracket_coords(0, {z1: Fraction(1)}, {z2: Fraction(1)}) == {bracket: 1}
    assert cc.bracket_coords(0, {z2: Fraction(1)}, {z1: Fraction(1)}) == {bracket: -1}
    # weight 3 exceeds the class
    assert cc.bracket_coords(0, {z1: Fraction(1)}, {bracket: Fraction(1)}) == {}


def test_export_round_trip():
    cc = extract_structure_constants(2, 3)
    payload = cc.to_dict()
    again = NilpotentCrossedComplex.from_dict(payload)
    assert again.to_dict() == payload
    assert again.dims == cc.dims


def test_import_rejects_broken_axioms():
    payload = copy.deepcopy(extract_structure_constants(2, 2).to_dict())
    payload["bracket"].append({"i": 0, "a": 0, "b": 0, "terms": [{"c": 2, "coeff": "1"}]})
    with pytest.raises(AxiomViolation):
        NilpotentCrossedComplex.from_dict(payload)
    NilpotentCrossedComplex.from_dict(payload, validate=False)


def test_import_rejects_malformed_payloads():
    with pytest.raises(ConfigurationError):
        NilpotentCrossedComplex.from_dict({"n": 2, "class": 2})


@pytest.mark.slow
def test_three_dimensional_complex_validates():
    cc = extract_structure_constants(3, 3)
    assert cc.depth == 3
    assert "Z123" in cc.labels[2]
    cc.validate()
