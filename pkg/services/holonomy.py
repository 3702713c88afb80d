"""Chen signatures and higher holonomy of the universal connection on ℝⁿ.

Signatures of PL paths are exact products of segment exponentials in the truncated
tensor algebra; sampled paths use dense float levels. Holonomy runs in double
precision over the structure constants of 𝔤•_{n,d}, which are converted once.

Conventions:
  * CONCATENATION_ORDER: the earliest segment is the leftmost factor, so
    S(γ′ then γ) = S(γ′)·S(γ).
  * 2-holonomy: B(s) = ∫₀¹ β(S(γ_{s,≤t}))(A²(∂_sΣ, ∂_tΣ)) dt and ∂_s h = B·h, so that
    ∂M(Σ) = S(∂₁Σ)·S(∂₀Σ)⁻¹.
  * p-holonomy: the transported integrand is Σ_{|I|=p} Z_I·minor_I(∂_{b₁}, …, ∂_{b_{p−1}}, ∂_t).
"""

import itertools
import logging
import numpy as np

from fractions import Fraction
from math import factorial, sqrt
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from services import tensor_core
from services.tensor_core import GeneratorId, Tensor, word_key
from services.free_dg_lie import FreeDGLie, parse_lie_label
from services.linalg_service import EchelonBasis
from services.nilpotent_groups import DenseCrossedComplex, GroupElement
from services.quotients import NilpotentCrossedComplex, extract_structure_constants
from services.branes import (
    PLPath,
    SampledBrane,
    SurfaceFunction,
    fold_insert,
    reparametrize,
    reverse_s,
    sample_surface,
    stack_vertical,
    whisker_path_after,
    whisker_path_before,
)
from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

CONCATENATION_ORDER = "chronological"

# two-point Gauss–Legendre on [0, 1] and the matching fourth-order Magnus correction
GAUSS_OFFSET = sqrt(3) / 6
GAUSS_NODES = (0.5 - GAUSS_OFFSET, 0.5 + GAUSS_OFFSET)
MAGNUS_FACTOR = sqrt(3) / 12

SCHEMES = ("midpoint", "gauss")


##############
# SIGNATURES #
##############


def _check_truncation(d: int):
    if d < 1:
        raise ConfigurationError(f"Truncation degree must be >= 1, got {d}")


def segment_exp(delta: Sequence, n: int, d: int) -> Tensor:
    """exp(Σᵢ Δᵢ Zᵢ), exact in the coordinates given."""
    terms = {(GeneratorId((i + 1,)),): Fraction(v) for i, v in enumerate(delta) if v}
    return tensor_core.exp(Tensor(n, d, terms, check=False))


def signature_pl(path: PLPath, d: int) -> Tensor:
    """Exact signature of a piecewise-linear path, earliest segment leftmost."""
    _check_truncation(d)
    result = Tensor.one(path.n, d)
    for delta in path.increments():
        if any(delta):
            result = result * segment_exp(delta, path.n, d)
    return result


def _segment_levels(delta: np.ndarray, d: int) -> List[np.ndarray]:
    levels = [np.ones(())]
    for k in range(1, d + 1):
        levels.append(np.multiply.outer(levels[-1], delta) / k)
    return levels


def chen_product(a: List[np.ndarray], b: List[np.ndarray]) -> List[np.ndarray]:
    """Truncated tensor product of two level lists of equal depth."""
    depth = len(a) - 1
    return [
        sum(np.multiply.outer(a[j], b[k - j]) for j in range(k + 1)) for k in range(depth + 1)
    ]


def signature_levels(points: np.ndarray, d: int) -> List[np.ndarray]:
    points = np.asarray(points, dtype=float)
    n = points.shape[1]
    result = [np.ones(())] + [np.zeros((n,) * k) for k in range(1, d + 1)]
    for delta in np.diff(points, axis=0):
        result = chen_product(result, _segment_levels(delta, d))
    return result


def signature_sampled(path: PLPath, d: int) -> Tensor:
    """Float signature of the PL interpolant of the samples."""
    _check_truncation(d)
    if len(path) < 2:
        raise ConfigurationError("A sampled path needs at least two samples")
    return tensor_core.from_levels(signature_levels(path.array, d), path.n)


def _times_increment(levels: List[np.ndarray], a: np.ndarray) -> List[np.ndarray]:
    return [np.zeros(())] + [np.multiply.outer(levels[k - 1], a) for k in range(1, len(levels))]


def _combine(base: List[np.ndarray], pairs: Sequence[Tuple[float, List[np.ndarray]]]):
    result = [level.copy() for level in base]
    for factor, levels in pairs:
        for k, level in enumerate(levels):
            result[k] = result[k] + factor * level
    return result


def signature_quadrature(path: PLPath, d: int, steps: int = 10_000) -> Tensor:
    """RK4 solution of S' = S·(Σ ẋᵢ Zᵢ), spread evenly over the segments."""
    _check_truncation(d)
    points = path.array
    increments = np.diff(points, axis=0)
    n = path.n
    levels = [np.ones(())] + [np.zeros((n,) * k) for k in range(1, d + 1)]
    if len(increments) == 0:
        return tensor_core.from_levels(levels, n)
    per_segment = max(1, steps // len(increments))
    h = 1.0 / per_segment
    for a in increments:
        for _ in range(per_segment):
            k1 = _times_increment(levels, a)
            k2 = _times_increment(_combine(levels, [(h / 2, k1)]), a)
            k3 = _times_increment(_combine(levels, [(h / 2, k2)]), a)
            k4 = _times_increment(_combine(levels, [(h, k3)]), a)
            levels = _combine(levels, [(h / 6, k1), (h / 3, k2), (h / 3, k3), (h / 6, k4)])
    return tensor_core.from_levels(levels, n)


def log_signature(signature: Tensor) -> Tensor:
    return tensor_core.log(signature)


def max_coefficient_gap(a: Tensor, b: Tensor) -> float:
    words = set(a.terms) | set(b.terms)
    return max((abs(float(a.coefficient(w)) - float(b.coefficient(w))) for w in words), default=0.0)


############
# RESULTS  #
############


@dataclass
class HolonomyResult:
    """exp(value) ∈ G^{degree}, with value in the basis ``labels`` of 𝔤^{degree}."""

    degree: int
    nilpotency_class: int
    labels: List[str]
    value: np.ndarray
    source: Optional[np.ndarray] = None
    target: Optional[np.ndarray] = None
    boundary_tensors: Dict[str, dict] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def coefficient(self, label: str) -> float:
        if label not in self.labels:
            raise ConfigurationError(f"{label} is not a basis element of degree {self.degree}")
        return float(self.value[self.labels.index(label)])

    def to_dict(self) -> dict:
        payload = {
            "degree": self.degree,
            "class": self.nilpotency_class,
            "labels": list(self.labels),
            "value": [float(x) for x in self.value],
            "diagnostics": self.diagnostics,
        }
        if self.source is not None:
            payload["source"] = [float(x) for x in self.source]
            payload["target"] = [float(x) for x in self.target]
        if self.boundary_tensors:
            payload["boundaryTensors"] = self.boundary_tensors
        return payload


def _max_gap(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


##########
# ENGINE #
##########


class HolonomyEngine:
    """Float holonomy numerics over the structure constants of 𝔤•_{n,d}."""

    def __init__(self, complex_: NilpotentCrossedComplex):
        self.cc = complex_
        self.dense = DenseCrossedComplex(complex_)
        self.n = complex_.n
        self.order = complex_.nilpotency_class
        self._stacks: Dict[int, np.ndarray] = {}
        self._columns: Optional[List[Tensor]] = None
        self._letters = np.zeros((self.n, self.cc.dim(0)))
        for i in range(self.n):
            self._letters[i, self.generator_index(0, (i + 1,))] = 1.0

    @classmethod
    def build(cls, n: int, nilpotency_class: int) -> "HolonomyEngine":
        return cls(extract_structure_constants(n, nilpotency_class))

    def __repr__(self) -> str:
        return f"<HolonomyEngine n={self.n} d={self.order} dims={self.cc.dims}>"

    def generator_index(self, depth: int, index_set: Sequence[int]) -> int:
        label = GeneratorId(tuple(index_set)).label()
        if depth >= self.cc.depth or label not in self.cc.labels[depth]:
            raise ConfigurationError(f"{label} is not a basis element of degree {-depth}")
        return self.cc.labels[depth].index(label)

    def _require_depth(self, depth: int):
        if depth >= self.cc.depth or self.cc.dim(depth) == 0:
            raise ConfigurationError(
                f"G^{-depth} is trivial for n={self.n}, d={self.order}; no {depth + 1}-holonomy"
            )

    # Degree-0 coordinates

    def path_log(self, points: np.ndarray) -> np.ndarray:
        """log S(γ) in the degree-0 basis, by BCH over the segments."""
        result = np.zeros(self.cc.dim(0))
        for delta in np.diff(np.asarray(points, dtype=float), axis=0):
            if np.any(delta):
                result = self.dense.bch(0, result, delta @ self._letters)
        return result

    def _basis_columns(self) -> List[Tensor]:
        if self._columns is None:
            algebra = FreeDGLie.get(self.n, self.order)
            self._columns = [algebra.realize(parse_lie_label(label)) for label in self.cc.labels[0]]
        return self._columns

    def log_coordinates(self, log_tensor: Tensor) -> np.ndarray:
        """Least-squares coordinates of a (float) Lie element in the degree-0 basis."""
        columns = self._basis_columns()
        words = sorted({w for column in columns for w in column.terms}, key=word_key)
        matrix = np.array([[float(column.coefficient(w)) for column in columns] for w in words])
        vector = np.array([float(log_tensor.coefficient(w)) for w in words])
        coords, *_ = np.linalg.lstsq(matrix, vector, rcond=None)
        return coords

    def exact_log_coordinates(self, log_tensor: Tensor) -> GroupElement:
        echelon = EchelonBasis(sort_key=word_key)
        for k, column in enumerate(self._basis_columns()):
            echelon.add(dict(column.terms), k)
        coords = echelon.coordinates(dict(log_tensor.terms))
        dense = [Fraction(0)] * self.cc.dim(0)
        for k, value in coords.items():
            dense[echelon.labels[k]] = Fraction(value)
        return GroupElement(0, tuple(dense))

    def path_signature(self, path: PLPath) -> Tuple[Tensor, GroupElement]:
        """S(γ) at the engine's class, as a group-like tensor and as exact log coordinates in G⁰."""
        if path.n != self.n:
            raise ConfigurationError(f"Path lives in R^{path.n}, engine in R^{self.n}")
        signature = signature_pl(path, self.order)
        return signature, self.exact_log_coordinates(log_signature(signature))

    # Transport kernel

    def _transport_stack(self, depth: int) -> np.ndarray:
        """ad(Z_1), …, ad(Z_n) on 𝔤^{−depth}, laid out so that x @ stack gives all images."""
        if depth not in self._stacks:
            letters = [self.generator_index(0, (i + 1,)) for i in range(self.n)]
            action = self.dense.action[depth][letters]
            dim = self.cc.dim(depth)
            self._stacks[depth] = action.transpose(2, 0, 1).reshape(dim, self.n * dim)
        return self._stacks[depth]

    def _apply(self, depth: int, x: np.ndarray, weights: np.ndarray) -> np.ndarray:
        images = (x @ self._transport_stack(depth)).reshape(x.shape[0], self.n, -1)
        return np.einsum("bi,bic->bc", weights, images)

    def _transported_integrals(
        self, depth: int, paths: np.ndarray, derivatives: Sequence[np.ndarray]
    ) -> np.ndarray:
        """∫₀¹ β(S(γ_{≤t}))(Σ_I Z_I·minor_I(D₁, …, D_depth, γ̇)) dt for a batch of paths.

        ``paths`` has shape (B, M+1, n); each derivative array has the same shape and is
        interpolated linearly on every segment. On a segment the integrand is
        exp(θN)·Σ_j θʲ y_j, integrated in closed form, and the segments are folded
        together from the end with the running transports.
        """
        batch, samples, n = paths.shape
        dim = self.cc.dim(depth)
        steps = np.diff(paths, axis=1)
        starts = [D[:, :-1] for D in derivatives]
        slopes = [D[:, 1:] - D[:, :-1] for D in derivatives]
        tops = [
            ([i - 1 for i in index_set], self.generator_index(depth, index_set))
            for index_set in itertools.combinations(range(1, n + 1), depth + 1)
        ]
        poly = np.zeros((depth + 1, batch, samples - 1, dim))
        for pattern in itertools.product((0, 1), repeat=depth):
            columns = [slopes[j] if bit else starts[j] for j, bit in enumerate(pattern)]
            matrix = np.stack(columns + [steps], axis=-1)
            for rows, position in tops:
                poly[sum(pattern), :, :, position] += np.linalg.det(matrix[:, :, rows, :])

        acc = np.zeros((batch, dim))
        for m in reversed(range(samples - 1)):
            weights = steps[:, m]
            value = np.zeros((batch, dim))
            terms = [poly[j, :, m] for j in range(depth + 1)]
            for k in range(self.order):
                scale = factorial(k)
                for j, term in enumerate(terms):
                    value += term / (scale * (k + j + 1))
                if k + 1 < self.order:
                    terms = [self._apply(depth, term, weights) for term in terms]
            moved = acc
            term = acc
            for k in range(1, self.order):
                term = self._apply(depth, term, weights) / k
                moved = moved + term
            acc = value + moved
        return acc

    # 2-holonomy

    def transgressed_form_value(self, brane: SampledBrane, row: int) -> np.ndarray:
        """B(s) at grid row ``row``, per unit of s."""
        self._require_depth(1)
        if brane.p != 2:
            raise ConfigurationError("The transgressed form is evaluated on 2-branes")
        grid = brane.grid
        strips = grid.shape[0] - 1
        if not 0 <= row <= strips:
            raise ConfigurationError(f"Row {row} outside [0, {strips}]")
        spacing = 1.0 / strips
        if row == 0:
            derivative = (grid[1] - grid[0]) / spacing
        elif row == strips:
            derivative = (grid[-1] - grid[-2]) / spacing
        else:
            derivative = (grid[row + 1] - grid[row - 1]) / (2 * spacing)
        return self._transported_integrals(1, grid[row][None], [derivative[None]])[0]

    def strip_exponents(self, brane: SampledBrane, scheme: str = "midpoint") -> np.ndarray:
        grid = brane.grid
        lower, upper = grid[:-1], grid[1:]
        difference = upper - lower
        if scheme == "midpoint":
            return self._transported_integrals(1, 0.5 * (lower + upper), [difference])
        if scheme == "gauss":
            first, second = (
                self._transported_integrals(1, lower + node * difference, [difference])
                for node in GAUSS_NODES
            )
            correction = np.array(
                [self.dense.lie_bracket(1, b, a) for a, b in zip(first, second)]
            ).reshape(first.shape)
            return 0.5 * (first + second) + MAGNUS_FACTOR * correction
        raise ConfigurationError(f"Unknown scheme {scheme}; expected one of {SCHEMES}")

    def holonomy2(self, brane: SampledBrane, scheme: str = "midpoint") -> HolonomyResult:
        """M(Σ) ∈ G^{−1} as the ordered product of the strip exponentials."""
        self._require_depth(1)
        if brane.p != 2:
            raise ConfigurationError(f"holonomy2 needs a 2-brane, got p={brane.p}")
        value = np.zeros(self.cc.dim(1))
        for exponent in self.strip_exponents(brane, scheme):
            value = self.dense.bch(1, exponent, value)

        grid = brane.grid
        source = self.path_log(grid[0])
        target = self.path_log(grid[-1])
        expected = self.dense.bch(0, target, -source)
        residual = _max_gap(self.dense.boundary(1, value), expected)
        logger.debug(f"2-holonomy on {brane.shape} grid, boundary residual {residual:.3e}")
        boundary_tensors = {
            key: tensor_core.from_levels(signature_levels(row, self.order), self.n)
            for key, row in (("source", grid[0]), ("target", grid[-1]))
        }
        return HolonomyResult(
            degree=-1,
            nilpotency_class=self.order,
            labels=list(self.cc.labels[1]),
            value=value,
            source=source,
            target=target,
            boundary_tensors={k: t.to_dict(as_float=True) for k, t in boundary_tensors.items()},
            diagnostics={
                "strips": grid.shape[0] - 1,
                "columns": grid.shape[1] - 1,
                "scheme": scheme,
                "boundaryResidual": residual,
                "globeDefect": brane.globe_defect,
            },
        )

    # p-holonomy

    def _cell_integral(self, depth: int, grid: np.ndarray) -> np.ndarray:
        """Σ over brane cells of the two-point Gauss rule in each brane direction."""
        cells = tuple(size - 1 for size in grid.shape[:depth])
        samples, n = grid.shape[depth], grid.shape[-1]
        corners = {
            eps: grid[tuple(slice(e, e + c) for e, c in zip(eps, cells))].reshape(-1, samples, n)
            for eps in itertools.product((0, 1), repeat=depth)
        }
        total = np.zeros(self.cc.dim(depth))
        for xi in itertools.product(GAUSS_NODES, repeat=depth):
            factors = [(1 - x, x) for x in xi]
            point = sum(
                np.prod([factors[i][e] for i, e in enumerate(eps)]) * corner
                for eps, corner in corners.items()
            )
            derivatives = []
            for j in range(depth):
                derivatives.append(
                    sum(
                        (1.0 if eps[j] else -1.0)
                        * np.prod([factors[i][e] for i, e in enumerate(eps) if i != j])
                        * corner
                        for eps, corner in corners.items()
                    )
                )
            total += self._transported_integrals(depth, point, derivatives).sum(axis=0)
        return total * 0.5**depth

    def holonomy_p(self, brane: SampledBrane, face_scheme: str = "gauss") -> HolonomyResult:
        """M(Σ) ∈ G^{−p+1} for p ≥ 3, with the face identity as diagnostic."""
        p = brane.p
        if p < 3:
            raise ConfigurationError("holonomy_p handles p >= 3; use holonomy2 for surfaces")
        depth = p - 1
        if p > self.n:
            # no p-forms on R^n, so G^{−p+1} and the holonomy are trivial
            logger.debug(f"{p}-brane in R^{self.n}: trivial holonomy")
            return HolonomyResult(
                degree=-depth,
                nilpotency_class=self.order,
                labels=[],
                value=np.zeros(0),
                diagnostics={
                    "shape": [size - 1 for size in brane.shape],
                    "boundaryResidual": 0.0,
                    "globeDefect": brane.globe_defect,
                },
            )
        self._require_depth(depth)
        value = self._cell_integral(depth, brane.grid)

        if depth == 2:
            near = self.holonomy2(brane.face(0), scheme=face_scheme).value
            far = self.holonomy2(brane.face(-1), scheme=face_scheme).value
        else:
            near = self.holonomy_p(brane.face(0), face_scheme).value
            far = self.holonomy_p(brane.face(-1), face_scheme).value
        expected = self.dense.bch(depth - 1, far, -near)
        residual = _max_gap(self.dense.boundary(depth, value), expected)
        logger.debug(f"{p}-holonomy on {brane.shape} grid, boundary residual {residual:.3e}")
        return HolonomyResult(
            degree=-depth,
            nilpotency_class=self.order,
            labels=list(self.cc.labels[depth]),
            value=value,
            diagnostics={
                "shape": [size - 1 for size in brane.shape],
                "boundaryResidual": residual,
                "globeDefect": brane.globe_defect,
            },
        )

    # Functoriality and invariance

    def horizontal(self, x: Tuple[np.ndarray, np.ndarray], y: Tuple[np.ndarray, np.ndarray]):
        """x *₀ y on float 2-morphisms (h, g): (h·β(g)(h′), g·g′)."""
        (h, g), (h_other, g_other) = x, y
        moved = self.dense.exp_ad(1, g) @ h_other
        return self.dense.bch(1, h, moved), self.dense.bch(0, g, g_other)

    def whisker_checks(
        self, surface: SampledBrane, after_path: PLPath, before_path: PLPath
    ) -> Dict[str, float]:
        """Residuals of both whiskering rules, also read as *₀ with identity 2-cells.

        ``after_path`` starts where the surface ends and ``before_path`` ends where it
        starts.
        """
        base = self.holonomy2(surface)
        after = self.holonomy2(whisker_path_after(surface, after_path))
        before = self.holonomy2(whisker_path_before(before_path, surface))
        after_log = self.path_log(after_path.array)
        before_log = self.path_log(before_path.array)
        cell = (base.value, base.source)
        composed_after = self.horizontal(cell, (np.zeros(self.cc.dim(1)), after_log))
        composed_before = self.horizontal((np.zeros(self.cc.dim(1)), before_log), cell)
        transport = self.dense.exp_ad(1, before_log)
        return {
            "after": _max_gap(after.value, base.value),
            "before": _max_gap(before.value, transport @ base.value),
            "after_ncat": max(
                _max_gap(after.value, composed_after[0]), _max_gap(after.source, composed_after[1])
            ),
            "before_ncat": max(
                _max_gap(before.value, composed_before[0]),
                _max_gap(before.source, composed_before[1]),
            ),
            "boundary_after": after.diagnostics["boundaryResidual"],
            "boundary_before": before.diagnostics["boundaryResidual"],
        }

    def vertical_check(self, first: SampledBrane, second: SampledBrane) -> Dict[str, float]:
        """``first`` swept before ``second``: M(stacked) = M(second)·M(first)."""
        lower = self.holonomy2(first)
        upper = self.holonomy2(second)
        stacked = self.holonomy2(stack_vertical(first, second))
        return {
            "product": _max_gap(stacked.value, self.dense.bch(1, upper.value, lower.value)),
            "source": _max_gap(stacked.source, lower.source),
            "target": _max_gap(stacked.target, upper.target),
        }

    def reversal_check(self, surface: SampledBrane) -> float:
        forward = self.holonomy2(surface)
        backward = self.holonomy2(reverse_s(surface))
        return _max_gap(backward.value, -forward.value)

    def thin_homotopy_suite(
        self, surface: SurfaceFunction, strips: int, columns: int
    ) -> Dict[str, float]:
        """Holonomy changes under smoothstep reparametrization and inserted folds.

        A fold sampled at ``strips`` intervals revisits exactly the rows of the unfolded
        surface at ``strips / 2``, so both grids need to be multiples of 8.
        """
        if strips % 8 or columns % 8:
            raise ConfigurationError("Fold checks need grid sizes divisible by 8")
        base = self.holonomy2(sample_surface(surface, strips, columns)).value
        reparametrized = self.holonomy2(sample_surface(reparametrize(surface), strips, columns)).value
        coarse_s = self.holonomy2(sample_surface(surface, strips // 2, columns)).value
        folded_s = self.holonomy2(sample_surface(fold_insert(surface, "s"), strips, columns)).value
        coarse_t = self.holonomy2(sample_surface(surface, strips, columns // 2)).value
        folded_t = self.holonomy2(sample_surface(fold_insert(surface, "t"), strips, columns)).value
        return {
            "reparametrization": _max_gap(reparametrized, base),
            "fold_s": _max_gap(folded_s, coarse_s),
            "fold_t": _max_gap(folded_t, coarse_t),
        }

    def convergence_study(
        self, surface: SurfaceFunction, grids: Sequence[int] = (50, 100, 200)
    ) -> Dict[str, List[float]]:
        """Boundary residuals on successively halved grids and the observed orders."""
        residuals = [
            self.holonomy2(sample_surface(surface, size, size)).diagnostics["boundaryResidual"]
            for size in grids
        ]
        orders = [
            float(np.log2(coarse / fine)) if fine > 0 else float("inf")
            for coarse, fine in zip(residuals, residuals[1:])
        ]
        return {"grids": list(grids), "residuals": residuals, "orders": orders}
