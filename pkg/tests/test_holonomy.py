import pytest
import numpy as np

from math import pi
from fractions import Fraction

from services import tensor_core
from services.tensor_core import GeneratorId, Tensor
from services.holonomy import (
    log_signature,
    max_coefficient_gap,
    segment_exp,
    signature_pl,
    signature_quadrature,
    signature_sampled,
)
from services.branes import (
    PLPath,
    SampledBrane,
    bump_surface,
    coordinate_cube,
    coordinate_square,
    lattice_path,
    path_concat,
    path_reverse,
    quarter_circle,
    random_pl_path,
    sample_brane,
    sample_path,
    sample_surface,
    split_s,
    sweep,
)
from utils.exceptions import ConfigurationError, GlobeConditionError

Z1, Z2 = GeneratorId.of(1), GeneratorId.of(2)

STAIRS = PLPath(2, [(0, 0), (1, 0), (1, 1), (0, 2)])

# composition identities are exact up to roundoff
ROUNDOFF = 1e-10


def bump(n, grid):
    return sample_surface(bump_surface(n), grid, grid)


###############
# Signatures  #
###############


def test_constant_path_has_trivial_signature():
    path = PLPath(2, [(0, 0), (0, 0)])
    assert signature_pl(path, 3) == Tensor.one(2, 3)


def test_segment_exponential_coefficients():
    segment = segment_exp((1, 2), 2, 3)
    assert segment.coefficient((Z1, Z2, Z2)) == Fraction(2, 3)
    assert segment.coefficient((Z2, Z1)) == 1


def test_path_followed_by_its_reverse_cancels():
    there_and_back = path_concat(STAIRS, path_reverse(STAIRS))
    assert signature_pl(there_and_back, 4) == Tensor.one(2, 4)


def test_concatenation_multiplies_signatures():
    tail = PLPath(2, [(0, 2), (3, 1), (2, -1)])
    joined = path_concat(STAIRS, tail)
    assert signature_pl(joined, 3) == signature_pl(STAIRS, 3) * signature_pl(tail, 3)
    with pytest.raises(ConfigurationError):
        path_concat(tail, STAIRS)


def test_signatures_are_group_like():
    ok, residual = tensor_core.is_group_like(signature_pl(STAIRS, 4))
    assert ok and residual == 0


def test_quadrature_agrees_with_exact_signature(np_rng):
    path = random_pl_path(np_rng, 2, 5)
    exact = signature_pl(path, 4)
    assert max_coefficient_gap(exact, signature_quadrature(path, 4, steps=500)) <= 1e-10


def test_levy_area_of_a_quarter_circle():
    logarithm = log_signature(signature_sampled(sample_path(quarter_circle, 2000), 2))
    assert abs(float(logarithm.coefficient((Z1, Z2))) - (pi / 2 - 1) / 2) <= 1e-6


def test_signature_needs_positive_truncation():
    with pytest.raises(ConfigurationError):
        signature_pl(STAIRS, 0)
    with pytest.raises(ConfigurationError):
        signature_sampled(PLPath(2, [(0, 0)]), 2)


def test_path_payload_validation():
    assert PLPath.from_dict({"n": 2, "points": [[0, 0], [1, 1]]}).increments() == [(1.0, 1.0)]
    with pytest.raises(ConfigurationError):
        PLPath.from_dict({"n": 2, "points": [[0, 0, 0]]})


############################
# Degree-0 log coordinates #
############################


def test_path_log_matches_exact_logarithm(engines):
    engine = engines(2, 3)
    exact = engine.exact_log_coordinates(log_signature(signature_pl(STAIRS, 3)))
    floats = np.array([float(c) for c in exact.coords])
    assert np.allclose(engine.path_log(STAIRS.array), floats, atol=1e-12)


def test_path_signature_returns_tensor_and_log_coordinates(engines):
    engine = engines(2, 2)
    corner = PLPath(2, [(0, 0), (1, 0), (1, 1)])
    signature, coords = engine.path_signature(corner)
    assert signature == signature_pl(corner, 2)
    labels = engine.cc.labels[0]
    assert coords.depth == 0
    assert coords.coords[labels.index("Z1")] == 1
    assert coords.coords[labels.index("Z2")] == 1
    assert coords.coords[labels.index("[Z1,Z2]")] == Fraction(1, 2)
    with pytest.raises(ConfigurationError):
        engine.path_signature(PLPath(3, [(0, 0, 0), (1, 0, 0)]))


################
# 2-holonomy   #
################


def test_degenerate_surface_has_trivial_holonomy(engines):
    path = lattice_path([1, 2], 2)
    surface = sample_surface(sweep([path, path]), 8, 8)
    result = engines(2, 2).holonomy2(surface)
    assert not np.any(result.value)


def test_coordinate_square_has_unit_holonomy(engines):
    engine = engines(2, 2)
    square = sample_surface(coordinate_square(2), 8, 8)
    result = engine.holonomy2(square)
    assert abs(result.coefficient("Z12") - 1.0) <= 1e-12
    assert result.diagnostics["boundaryResidual"] <= 1e-12
    gauss = engine.holonomy2(square, scheme="gauss")
    assert abs(gauss.coefficient("Z12") - 1.0) <= 1e-12
    with pytest.raises(ConfigurationError):
        engine.holonomy2(square, scheme="trapezoid")
    with pytest.raises(ConfigurationError):
        result.coefficient("Z123")


def test_vertical_composition(engines):
    first, second = split_s(bump(3, 24), 12)
    residuals = engines(3, 3).vertical_check(first, second)
    assert max(residuals.values()) <= ROUNDOFF


def test_reversed_surface_inverts_holonomy(engines):
    assert engines(3, 3).reversal_check(bump(3, 24)) <= ROUNDOFF


def test_whiskering(engines, np_rng):
    surface = bump(3, 24)
    after = random_pl_path(np_rng, 3, 4, start=surface.grid[0, -1])
    before = random_pl_path(np_rng, 3, 4, end=surface.grid[0, 0])
    residuals = engines(3, 3).whisker_checks(surface, after, before)
    for key in ("after", "before", "after_ncat", "before_ncat"):
        assert residuals[key] <= ROUNDOFF, key


def test_thin_homotopies(engines):
    residuals = engines(2, 3).thin_homotopy_suite(coordinate_square(2), 16, 16)
    assert residuals["fold_s"] <= ROUNDOFF
    assert residuals["fold_t"] <= ROUNDOFF
    assert residuals["reparametrization"] <= 1e-2


def test_thin_homotopies_need_fold_compatible_grids(engines):
    with pytest.raises(ConfigurationError):
        engines(2, 3).thin_homotopy_suite(coordinate_square(2), 12, 16)


def test_boundary_residual_converges_at_second_order(engines):
    study = engines(3, 3).convergence_study(bump_surface(3), (24, 48, 96))
    assert len(study["orders"]) == 2
    assert min(study["orders"]) >= 1.8


def test_transgressed_form_vanishes_on_degenerate_surfaces(engines):
    path = lattice_path([2, 1], 2)
    surface = sample_surface(sweep([path, path]), 4, 8)
    value = engines(2, 2).transgressed_form_value(surface, 2)
    assert not np.any(value)
    with pytest.raises(ConfigurationError):
        engines(2, 2).transgressed_form_value(surface, 5)


################
# p-holonomy   #
################


def test_coordinate_cube_has_unit_three_holonomy(engines):
    cube = sample_brane(coordinate_cube(3), (6, 6, 6))
    result = engines(3, 3).holonomy_p(cube)
    assert abs(result.coefficient("Z123") - 1.0) <= 1e-10


@pytest.mark.slow
def test_three_holonomy_boundary_identity(engines):
    cube = sample_brane(coordinate_cube(3), (39, 39, 39))
    result = engines(3, 3).holonomy_p(cube)
    assert result.diagnostics["boundaryResidual"] <= 1e-4


def test_p_holonomy_of_a_brane_above_r_n_is_trivial(engines):
    flat = sample_brane(lambda r, s, t: np.zeros(np.shape(r) + (2,)), (2, 2, 2))
    result = engines(2, 2).holonomy_p(flat)
    assert result.degree == -2
    assert result.labels == [] and result.value.size == 0
    assert result.diagnostics["boundaryResidual"] == 0.0
    assert result.to_dict()["value"] == []


def test_p_holonomy_rejects_surfaces(engines):
    with pytest.raises(ConfigurationError):
        engines(2, 2).holonomy_p(sample_surface(coordinate_square(2), 4, 4))


def test_globe_conditions_are_enforced(np_rng):
    with pytest.raises(GlobeConditionError):
        SampledBrane(np_rng.normal(size=(3, 3, 2)))
    relaxed = SampledBrane(np_rng.normal(size=(3, 3, 2)), globe_tol=None)
    assert relaxed.globe_defect > 0


def test_brane_payload_round_trip():
    cube = sample_brane(coordinate_cube(3), (3, 3, 3))
    again = SampledBrane.from_dict(cube.to_dict())
    assert again.p == 3
    assert np.array_equal(again.grid, cube.grid)
