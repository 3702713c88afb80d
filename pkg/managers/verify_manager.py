import random
import logging
import numpy as np

from tqdm import tqdm
from math import pi
from fractions import Fraction
from typing import Callable, List, Tuple

from config import MyConfig, RunConfig
from services import tensor_core
from services import quotients
from services import forms_currents
from services.tensor_core import all_generators
from services.free_dg_lie import (
    FreeDGLie,
    curvature,
    differential_vector,
    universal_connection,
    witt_dimension,
)
from services.nilpotent_groups import CrossedComplexGroups, law_violations
from services.holonomy import (
    HolonomyEngine,
    log_signature,
    max_coefficient_gap,
    signature_pl,
    signature_quadrature,
    signature_sampled,
)
from services.branes import (
    bump_surface,
    coordinate_cube,
    coordinate_square,
    quarter_circle,
    random_pl_path,
    sample_brane,
    sample_path,
    sample_surface,
    smoothstep,
    split_s,
)
from utils.exceptions import AlgebraError, ConfigurationError

logger = logging.getLogger(__name__)

CheckResult = Tuple[bool, object, object]

# exact oracles for the signature checks
QUADRATURE_TOL = 1e-10
LEVY_TOL = 1e-6
REPARAMETRIZATION_TOL = 1e-6
PATH_SAMPLES = 2000
CUBE_INTERVALS = 40
CONVERGENCE_ORDER = 1.8


def _first(failures: List[str]) -> CheckResult:
    return not failures, failures[:5] if failures else 0, 0


class VerifyManager:
    def __init__(self, config: MyConfig):
        """Initialize the VerifyManager.

        Args:
            config: Application configuration object
        """
        self.config = config

    def verify(self, overrides: dict) -> tuple:
        """Run the exact algebraic suite and, with ``numeric``, the holonomy suite.

        Args:
            overrides: RunConfig fields given on the command line (None means default)

        Returns:
            tuple: (result dict, exit code)
                  On success: {"success": True, "data": report}, 0
                  On failed checks: {"success": False, "data": report}, 1
                  On bad config: {"success": False, "error": str}, 2
        """
        try:
            run = RunConfig.build(**overrides)
        except ConfigurationError as e:
            logger.error(f"Error validating verify config: {str(e)}")
            return {"success": False, "error": str(e)}, 2

        checks = [("algebra", name, check) for name, check in self._algebraic_checks(run)]
        if run.numeric:
            checks += [("numeric", name, check) for name, check in self._numeric_checks(run)]

        results = []
        for suite, name, check in tqdm(checks, desc="verify", disable=not run.show_progress):
            results.append(self._run_check(suite, name, check))

        failures = sum(1 for result in results if not result["passed"])
        report = {"config": run.model_dump(), "checks": results, "failures": failures}
        logger.info(f"Verification finished: {len(results)} checks, {failures} failures")
        if failures:
            return {"success": False, "data": report}, 1
        return {"success": True, "data": report}, 0

    def _run_check(self, suite: str, name: str, check: Callable[[], CheckResult]) -> dict:
        try:
            passed, value, tolerance = check()
        except (AlgebraError, ArithmeticError) as e:
            logger.error(f"Error running check {name}: {str(e)}")
            passed, value, tolerance = False, str(e), None
        if not passed:
            logger.warning(f"Check {suite}/{name} failed: {value}")
        return {
            "suite": suite,
            "name": name,
            "passed": bool(passed),
            "value": value,
            "tolerance": tolerance,
        }

    ##########################
    # Exact algebraic suite  #
    ##########################

    def _algebraic_checks(self, run: RunConfig) -> List[Tuple[str, Callable[[], CheckResult]]]:
        n, L = run.n, run.max_letters
        checks = [
            ("d_squared", lambda: self._check_d_squared(n, L)),
            ("flatness", lambda: self._check_flatness(n)),
            ("cohomology", lambda: self._check_cohomology(n, L)),
        ]
        if n >= 2:
            checks += [
                ("reutenauer", lambda: self._check_reutenauer(n, L)),
                ("abelianization_gamma", lambda: self._check_abelianization(n, L)),
                ("semiabelian_kernel_gamma", lambda: self._check_semiabelian_kernel(n, L)),
                ("crossed_module_cohomology", lambda: self._check_crossed_module(n, L)),
                ("cartesian_square", lambda: self._check_cartesian(n, L)),
                ("semiabelian_symmetry", lambda: self._check_symmetry(n, L)),
            ]
        checks.append(("crossed_complex_laws", lambda: self._check_laws(run)))
        return checks

    def _check_d_squared(self, n: int, max_letters: int) -> CheckResult:
        failures, checked = [], 0
        for generator in all_generators(n):
            vector = {(generator,): Fraction(1)}
            if differential_vector(n, differential_vector(n, vector)):
                failures.append(f"d²{generator.label()}")
            checked += 1
        for letters in range(2, max_letters + 1):
            algebra = FreeDGLie.get(n, letters)
            for i in algebra.degrees_with_letters(letters):
                subspace = algebra.bigraded_subspace(i, letters)
                for expr, vector in zip(subspace.expressions, subspace.vectors):
                    if differential_vector(n, differential_vector(n, vector)):
                        failures.append(f"d²{expr}")
                    checked += 1
        logger.info(f"d² checked on {checked} monomials")
        if failures:
            return _first(failures)
        return True, checked, 0

    def _check_flatness(self, n: int) -> CheckResult:
        residual = curvature(universal_connection(n, 2))
        return residual.is_zero(), "F_A = 0" if residual.is_zero() else repr(residual), 0

    def _check_cohomology(self, n: int, max_letters: int) -> CheckResult:
        failures = []
        for letters in range(1, max_letters + 1):
            algebra = FreeDGLie.get(n, letters)
            for i in algebra.degrees_with_letters(letters):
                expected = n if (i, letters) == (0, 1) else 0
                found = algebra.cohomology_dimension(i, letters)
                if found != expected:
                    failures.append(f"H^{i} at {letters} letters is {found}, expected {expected}")
        return _first(failures)

    def _check_reutenauer(self, n: int, max_letters: int) -> CheckResult:
        failures = []
        for letters in range(2, max_letters + 1):
            found = quotients.abelian_dimension(n, 0, letters)
            schur = forms_currents.schur_dimension((letters - 1, 1), n)
            closed = forms_currents.gamma_closed_dimension(1, letters - 1, n)
            if not found == schur == closed:
                failures.append(f"ℓ={letters}: ab {found}, Schur {schur}, Γ₁^cl {closed}")
        return _first(failures)

    def _check_abelianization(self, n: int, max_letters: int) -> CheckResult:
        failures = []
        for letters in range(1, max_letters + 1):
            for i in range(1, min(letters * (n - 1), n) + 1):
                found = quotients.abelian_dimension(n, -i, letters)
                expected = forms_currents.gamma_dimension(i + 1, letters - 1, n)
                if found != expected:
                    failures.append(f"ab^{-i} at {letters} letters: {found} vs Γ {expected}")
        return _first(failures)

    def _check_semiabelian_kernel(self, n: int, max_letters: int) -> CheckResult:
        failures = []
        for letters in range(1, max_letters + 1):
            for m in range(1, min(letters * (n - 1), n - 1) + 1):
                found = quotients.semiabelian_kernel_dimension(n, -m, letters)
                expected = forms_currents.gamma_closed_dimension(m + 1, letters - 1, n)
                if found != expected:
                    failures.append(
                        f"ker d on sab^{-m} at {letters} letters: {found} vs {expected}"
                    )
        return _first(failures)

    def _check_crossed_module(self, n: int, max_letters: int) -> CheckResult:
        quotient = quotients.crossed_module_quotient(n, max_letters)
        failures = []
        for letters, found in quotient.h_minus_1.items():
            expected = forms_currents.gamma_closed_dimension(2, letters - 1, n)
            if found != expected:
                failures.append(f"H^-1 at {letters} letters: {found} vs Γ₂^cl {expected}")
        for letters, found in quotient.h0.items():
            expected = n if letters == 1 else 0
            if found != expected:
                failures.append(f"H^0 at {letters} letters: {found} vs {expected}")
        failures.extend(f"ker d not central at {pair}" for pair in quotient.center_violations())
        return _first(failures)

    def _check_cartesian(self, n: int, max_letters: int) -> CheckResult:
        failures = []
        for letters in range(1, max_letters + 1):
            found = quotients.semiabelian_dimension(n, -1, letters)
            expected = forms_currents.gamma_closed_dimension(2, letters - 1, n) + witt_dimension(
                n, letters + 1
            )
            if found != expected:
                failures.append(f"sab^-1 at {letters} letters: {found} vs {expected}")
            for m in range(2, min(letters * (n - 1), n - 1) + 1):
                sab = quotients.semiabelian_dimension(n, -m, letters)
                ab = quotients.abelian_dimension(n, -m, letters)
                if sab != ab:
                    failures.append(f"sab^{-m} ≠ ab^{-m} at {letters} letters: {sab} vs {ab}")
        return _first(failures)

    def _check_symmetry(self, n: int, max_letters: int) -> CheckResult:
        failures = []
        for letters in range(3, max_letters + 1):
            failures.extend(quotients.symmetry_violations(n, letters))
        return _first(failures)

    def _check_laws(self, run: RunConfig) -> CheckResult:
        groups = CrossedComplexGroups.build(run.n, run.degree)
        failures = law_violations(groups, random.Random(run.seed), run.samples)
        if failures:
            return _first(failures)
        return True, {"samples": run.samples, "dims": groups.cc.dims}, 0

    ###################
    # Numeric suite   #
    ###################

    def _numeric_checks(self, run: RunConfig) -> List[Tuple[str, Callable[[], CheckResult]]]:
        checks = [
            ("signature_quadrature", lambda: self._check_quadrature(run)),
            ("signature_group_like", lambda: self._check_group_like(run)),
        ]
        if run.n < 2:
            return checks
        engine = HolonomyEngine.build(run.n, run.degree)
        grid = run.grid
        checks += [
            ("levy_area", lambda: self._check_levy_area(run)),
            ("signature_reparametrization", lambda: self._check_reparametrization(run)),
            ("hol2_boundary", lambda: self._check_boundary(engine, run)),
            ("hol2_convergence", lambda: self._check_convergence(engine, run)),
            ("hol2_vertical", lambda: self._check_vertical(engine, run)),
            ("hol2_whiskers", lambda: self._check_whiskers(engine, run)),
            ("hol2_reversal", lambda: self._check_reversal(engine, run)),
            ("hol2_thin_homotopy", lambda: self._check_thin(engine, run, grid)),
        ]
        if run.n >= 3 and run.degree >= 3:
            checks.append(("hol3_cube", lambda: self._check_cube(engine, run)))
        return checks

    def _path_rng(self, run: RunConfig) -> np.random.Generator:
        return np.random.default_rng(run.seed)

    def _embedded_quarter_circle(self, n: int):
        def path(t):
            planar = quarter_circle(t)
            out = np.zeros(planar.shape[:-1] + (n,))
            out[..., :2] = planar
            return out

        return path

    def _check_quadrature(self, run: RunConfig) -> CheckResult:
        path = random_pl_path(self._path_rng(run), run.n, 5)
        exact = signature_pl(path, run.degree)
        gap = max_coefficient_gap(exact, signature_quadrature(path, run.degree))
        return gap <= QUADRATURE_TOL, gap, QUADRATURE_TOL

    def _check_group_like(self, run: RunConfig) -> CheckResult:
        path = random_pl_path(self._path_rng(run), run.n, 5)
        exact, residual = tensor_core.is_group_like(signature_pl(path, run.degree))
        return exact, float(residual), 0

    def _check_levy_area(self, run: RunConfig) -> CheckResult:
        path = sample_path(self._embedded_quarter_circle(run.n), PATH_SAMPLES)
        logarithm = log_signature(signature_sampled(path, max(run.degree, 2)))
        z1, z2 = all_generators(run.n)[:2]
        gap = abs(float(logarithm.coefficient((z1, z2))) - (pi / 2 - 1) / 2)
        return gap <= LEVY_TOL, gap, LEVY_TOL

    def _check_reparametrization(self, run: RunConfig) -> CheckResult:
        curve = self._embedded_quarter_circle(run.n)
        plain = signature_sampled(sample_path(curve, PATH_SAMPLES), run.degree)
        slowed = signature_sampled(sample_path(curve, PATH_SAMPLES, phi=smoothstep), run.degree)
        gap = max_coefficient_gap(plain, slowed)
        _, residual = tensor_core.is_group_like(slowed, run.signature_tol)
        passed = gap <= REPARAMETRIZATION_TOL and residual <= run.signature_tol
        return passed, {"gap": gap, "groupLikeResidual": float(residual)}, REPARAMETRIZATION_TOL

    def _bump(self, run: RunConfig, grid: int = None):
        grid = grid or run.grid
        return sample_surface(bump_surface(run.n), grid, grid, globe_tol=run.globe_tol)

    def _check_boundary(self, engine: HolonomyEngine, run: RunConfig) -> CheckResult:
        residual = engine.holonomy2(self._bump(run)).diagnostics["boundaryResidual"]
        return residual <= run.tol, residual, run.tol

    def _check_convergence(self, engine: HolonomyEngine, run: RunConfig) -> CheckResult:
        grids = (max(run.grid // 4, 2), max(run.grid // 2, 4), run.grid)
        study = engine.convergence_study(bump_surface(run.n), grids)
        resolved = study["residuals"][-1] <= 1e-12
        return resolved or min(study["orders"]) >= CONVERGENCE_ORDER, study, CONVERGENCE_ORDER

    def _check_vertical(self, engine: HolonomyEngine, run: RunConfig) -> CheckResult:
        first, second = split_s(self._bump(run), run.grid // 2)
        residuals = engine.vertical_check(first, second)
        return max(residuals.values()) <= run.tol, residuals, run.tol

    def _check_whiskers(self, engine: HolonomyEngine, run: RunConfig) -> CheckResult:
        surface = self._bump(run)
        rng = self._path_rng(run)
        after = random_pl_path(rng, run.n, 4, start=surface.grid[0, -1])
        before = random_pl_path(rng, run.n, 4, end=surface.grid[0, 0])
        residuals = engine.whisker_checks(surface, after, before)
        return max(residuals.values()) <= run.tol, residuals, run.tol

    def _check_reversal(self, engine: HolonomyEngine, run: RunConfig) -> CheckResult:
        residual = engine.reversal_check(self._bump(run))
        return residual <= run.tol, residual, run.tol

    def _check_thin(self, engine: HolonomyEngine, run: RunConfig, grid: int) -> CheckResult:
        # fold grids revisit the coarse rows only on multiples of 8
        grid = max(8, grid - grid % 8)
        residuals = engine.thin_homotopy_suite(coordinate_square(run.n), grid, grid)
        return max(residuals.values()) <= run.tol, residuals, run.tol

    def _check_cube(self, engine: HolonomyEngine, run: RunConfig) -> CheckResult:
        # the cube is multilinear only on grids whose sizes are multiples of 3
        intervals = CUBE_INTERVALS - CUBE_INTERVALS % 3
        shape = (intervals,) * 3
        cube = sample_brane(coordinate_cube(run.n), shape, globe_tol=run.globe_tol)
        result = engine.holonomy_p(cube)
        gap = abs(result.coefficient("Z123") - 1.0)
        residual = result.diagnostics["boundaryResidual"]
        passed = gap <= run.p_tol and residual <= run.p_tol
        tolerance = {"tolerance": run.p_tol, "grid": list(shape), "requestedGrid": [CUBE_INTERVALS] * 3}
        return passed, {"Z123": result.coefficient("Z123"), "boundaryResidual": residual}, tolerance
