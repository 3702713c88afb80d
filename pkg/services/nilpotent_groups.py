"""Malcev exponentiation of 𝔤•_{n,d} to a crossed complex of groups G•_{n,d}.

Group elements are kept in log-coordinates: g = exp(x) with x in the chosen basis
of 𝔤^{−k}. Products use the Dynkin form of the Baker–Campbell–Hausdorff series,
evaluated with the bracket of the relevant degree: the Lie bracket on 𝔤⁰, the
derived bracket [x, y]₋₁ = [dx, y] on 𝔤^{−1}, and zero below.
"""

import random
import logging
import numpy as np

from fractions import Fraction
from functools import lru_cache
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

from utils.app_utils import format_rational, parse_rational
from utils.exceptions import CompositionError, ConfigurationError
from services.free_dg_lie import FreeDGLie, parse_lie_label
from services.quotients import Coords, NilpotentCrossedComplex, extract_structure_constants
from services.tensor_core import GeneratorId, Tensor
from services import tensor_core

logger = logging.getLogger(__name__)


@lru_cache(maxsize=16)
def dynkin_bch_terms(order: int) -> Tuple[Tuple[Fraction, Tuple[int, ...]], ...]:
    """log(eˣeʸ) = Σ_w (c_w/|w|) r(w) up to ``order`` letters; letter 0 is x, 1 is y.

    c_w are the coefficients of log(exp(Z1)·exp(Z2)) in the truncated tensor algebra,
    and r is the right-normed bracketing of the word.
    """
    x = Tensor.letter(GeneratorId((1,)), 2, order)
    y = Tensor.letter(GeneratorId((2,)), 2, order)
    series = tensor_core.log(tensor_core.exp(x) * tensor_core.exp(y))
    terms = []
    for word, coeff in series.sorted_terms():
        letters = tuple(letter.index_set[0] - 1 for letter in word)
        terms.append((Fraction(coeff) / len(word), letters))
    return tuple(terms)


def _axpy(target: Dict, source: Dict, factor):
    for key, value in source.items():
        updated = target.get(key, 0) + factor * value
        if updated:
            target[key] = updated
        else:
            target.pop(key, None)


def bch_series(x, y, bracket: Callable, order: int, add: Callable, scale: Callable):
    """Evaluate the Dynkin series with an arbitrary bracket and vector arithmetic."""
    memo: Dict[Tuple[int, ...], object] = {}
    operands = (x, y)

    def right_normed(word: Tuple[int, ...]):
        if word in memo:
            return memo[word]
        if len(word) == 1:
            value = operands[word[0]]
        else:
            value = bracket(operands[word[0]], right_normed(word[1:]))
        memo[word] = value
        return value

    result = None
    for coeff, word in dynkin_bch_terms(order):
        term = scale(right_normed(word), coeff)
        result = term if result is None else add(result, term)
    return result


@dataclass(frozen=True)
class GroupElement:
    """exp(x) ∈ G^{−k} for x given by its coordinates in the degree −k basis."""

    depth: int
    coords: Tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        return -self.depth

    def sparse(self) -> Coords:
        return {k: c for k, c in enumerate(self.coords) if c}

    def is_identity(self) -> bool:
        return not any(self.coords)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "coords": [format_rational(c) for c in self.coords]}

    @classmethod
    def from_dict(cls, payload: dict) -> "GroupElement":
        try:
            return cls(-int(payload["degree"]), tuple(parse_rational(c) for c in payload["coords"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"Malformed group element: {str(e)}") from e


@dataclass(frozen=True)
class PMorphism:
    """An m-morphism (g_{−m+1}, …, g_{−1}, g₀) of nCat(G•)."""

    components: Tuple[GroupElement, ...]

    @property
    def m(self) -> int:
        return len(self.components)

    def component(self, degree: int) -> GroupElement:
        """The component of cohomological degree ``degree`` (0 is the last one)."""
        return self.components[self.m - 1 + degree]


class CrossedComplexGroups:
    """Exact group operations of G•_{n,d} built on a NilpotentCrossedComplex."""

    def __init__(self, complex_: NilpotentCrossedComplex):
        self.cc = complex_
        self.order = complex_.nilpotency_class

    @classmethod
    def build(cls, n: int, nilpotency_class: int) -> "CrossedComplexGroups":
        return cls(extract_structure_constants(n, nilpotency_class))

    def __repr__(self) -> str:
        return f"<CrossedComplexGroups n={self.cc.n} d={self.order} dims={self.cc.dims}>"

    # Elements

    def _element(self, depth: int, coords: Coords) -> GroupElement:
        dim = self.cc.dim(depth)
        dense = [Fraction(0)] * dim
        for k, c in coords.items():
            dense[k] = Fraction(c)
        return GroupElement(depth, tuple(dense))

    def element(self, depth: int, coords: Sequence) -> GroupElement:
        if len(coords) != self.cc.dim(depth):
            raise ConfigurationError(
                f"Degree -{depth} has dimension {self.cc.dim(depth)}, got {len(coords)} coordinates"
            )
        return GroupElement(depth, tuple(Fraction(c) for c in coords))

    def identity(self, depth: int) -> GroupElement:
        return self._element(depth, {})

    def random_element(self, depth: int, rng: random.Random, spread: int = 3) -> GroupElement:
        """Small random rational log-coordinates, seeded."""
        coords = [
            Fraction(rng.randint(-spread, spread), rng.randint(1, spread))
            for _ in range(self.cc.dim(depth))
        ]
        return GroupElement(depth, tuple(coords))

    def _check_depth(self, *elements: GroupElement):
        depths = {g.depth for g in elements}
        if len(depths) != 1:
            raise ConfigurationError(f"Elements live in different degrees: {sorted(depths)}")

    # Lie structure per degree

    def lie_bracket(self, depth: int, x: Coords, y: Coords) -> Coords:
        if depth == 0:
            return self.cc.bracket_coords(0, x, y)
        if depth == 1:
            return self.cc.derived_bracket(x, y)
        return {}

    def bch(self, depth: int, x: Coords, y: Coords) -> Coords:
        if depth >= 2:
            result = dict(x)
            _axpy(result, y, 1)
            return result

        def add(a, b):
            result = dict(a)
            _axpy(result, b, 1)
            return result

        def scale(a, factor):
            return {k: v * factor for k, v in a.items()}

        return bch_series(
            x, y, lambda a, b: self.lie_bracket(depth, a, b), self.order, add, scale
        )

    # Group law

    def mul(self, g: GroupElement, h: GroupElement) -> GroupElement:
        self._check_depth(g, h)
        return self._element(g.depth, self.bch(g.depth, g.sparse(), h.sparse()))

    def inv(self, g: GroupElement) -> GroupElement:
        return GroupElement(g.depth, tuple(-c for c in g.coords))

    def commutator(self, g: GroupElement, h: GroupElement) -> GroupElement:
        return self.mul(self.mul(g, h), self.mul(self.inv(g), self.inv(h)))

    def boundary(self, g: GroupElement) -> GroupElement:
        if g.depth < 1:
            raise ConfigurationError("∂ is defined on G^{-k} for k >= 1")
        return self._element(g.depth - 1, self.cc.differential_coords(g.depth, g.sparse()))

    def act(self, u: GroupElement, g: GroupElement) -> GroupElement:
        """β(u)(g) = exp(ad_{log u}) applied to log g."""
        if u.depth != 0:
            raise ConfigurationError("Only G⁰ acts")
        x = u.sparse()
        result = g.sparse()
        term = dict(result)
        for j in range(1, self.order + 1):
            term = {k: v / j for k, v in self.cc.bracket_coords(g.depth, x, term).items()}
            if not term:
                break
            _axpy(result, term, 1)
        return self._element(g.depth, result)

    # Degree-0 cross-check against the tensor algebra

    def realize_degree0(self, g: GroupElement) -> Tensor:
        """log g as a Lie element of the truncated tensor algebra on Z_1..Z_n."""
        if g.depth != 0:
            raise ConfigurationError("Only degree-0 elements realize in the tensor algebra")
        algebra = FreeDGLie.get(self.cc.n, self.order)
        result = Tensor.zero(self.cc.n, self.order)
        for k, c in g.sparse().items():
            result = result + algebra.realize(parse_lie_label(self.cc.labels[0][k])).scale(c)
        return result

    def tensor_product_residual(self, g: GroupElement, h: GroupElement) -> Fraction:
        """max |exp(log g)·exp(log h) − exp(log(gh))| over word coefficients."""
        lhs = tensor_core.exp(self.realize_degree0(g)) * tensor_core.exp(self.realize_degree0(h))
        rhs = tensor_core.exp(self.realize_degree0(self.mul(g, h)))
        difference = lhs - rhs
        return max((abs(Fraction(c)) for c in difference.terms.values()), default=Fraction(0))

    # nCat(G•)

    def morphism(self, components: Sequence[GroupElement]) -> PMorphism:
        components = tuple(components)
        for position, g in enumerate(components):
            expected = len(components) - 1 - position
            if g.depth != expected:
                raise ConfigurationError(
                    f"Component {position} must have degree {-expected}, got {g.degree}"
                )
        return PMorphism(components)

    def random_morphism(self, m: int, rng: random.Random) -> PMorphism:
        return PMorphism(tuple(self.random_element(m - 1 - p, rng) for p in range(m)))

    def source(self, x: PMorphism) -> PMorphism:
        if x.m == 0:
            raise CompositionError("Objects have no source")
        return PMorphism(x.components[1:])

    def target(self, x: PMorphism) -> PMorphism:
        """t(g_{−m+1}, g_{−m+2}, …, g₀) = (∂(g_{−m+1})·g_{−m+2}, g_{−m+3}, …, g₀)."""
        if x.m == 0:
            raise CompositionError("Objects have no target")
        if x.m == 1:
            return PMorphism(())
        head = self.mul(self.boundary(x.components[0]), x.components[1])
        return PMorphism((head,) + x.components[2:])

    def unit(self, x: PMorphism) -> PMorphism:
        return PMorphism((self.identity(x.m),) + x.components)

    def source_at(self, x: PMorphism, i: int) -> PMorphism:
        """s_i: the i-dimensional source."""
        while x.m > i:
            x = self.source(x)
        return x

    def target_at(self, x: PMorphism, i: int) -> PMorphism:
        """t_i = t ∘ s^{m−i−1}, by globularity."""
        if x.m <= i:
            return x
        return self.target(self.source_at(x, i + 1))

    def with_source(self, m: int, i: int, cell: PMorphism, rng: random.Random) -> PMorphism:
        """A random m-morphism whose i-source is ``cell``."""
        if cell.m != i:
            raise ConfigurationError(f"Expected an {i}-morphism, got an {cell.m}-morphism")
        head = tuple(self.random_element(m - 1 - p, rng) for p in range(m - i))
        return PMorphism(head + cell.components)

    def compose(self, x: PMorphism, y: PMorphism, i: int) -> PMorphism:
        """x *_i y, defined when s_i(x) = t_i(y); y is applied first."""
        if x.m != y.m:
            raise CompositionError(f"Cannot compose an {x.m}-morphism with an {y.m}-morphism")
        m = x.m
        if not 0 <= i < m:
            raise CompositionError(f"*_{i} is undefined on {m}-morphisms")
        if self.source_at(x, i) != self.target_at(y, i):
            raise CompositionError(f"s_{i}(x) ≠ t_{i}(y)")
        if i == 0:
            g0, h0 = x.component(0), y.component(0)
            head = tuple(
                self.mul(g, self.act(g0, h)) for g, h in zip(x.components[:-1], y.components[:-1])
            )
            return PMorphism(head + (self.mul(g0, h0),))
        # degrees ≤ −i multiply, degrees > −i come from y
        split = m - i
        head = tuple(self.mul(g, h) for g, h in zip(x.components[:split], y.components[:split]))
        return PMorphism(head + y.components[split:])


class DenseCrossedComplex:
    """Float structure tensors of 𝔤•_{n,d} for the holonomy numerics.

    ``action[k][a]`` is the matrix of ad(e⁰_a) on 𝔤^{−k}; ``differential[k]`` maps
    𝔤^{−k} → 𝔤^{−k+1}.
    """

    def __init__(self, complex_: NilpotentCrossedComplex):
        self.cc = complex_
        self.order = complex_.nilpotency_class
        self.dims = complex_.dims
        m0 = self.dims[0]
        self.action: List[np.ndarray] = []
        for k, dim in enumerate(self.dims):
            tensor = np.zeros((m0, dim, dim))
            for (depth, a, b), coords in complex_.bracket.items():
                if depth != k:
                    continue
                for c, value in coords.items():
                    tensor[a, c, b] = float(value)
            self.action.append(tensor)
        self.differential: List[np.ndarray] = [np.zeros((0, self.dims[0]))]
        for k in range(1, len(self.dims)):
            matrix = np.zeros((self.dims[k - 1], self.dims[k]))
            for (depth, b), coords in complex_.differential.items():
                if depth != k:
                    continue
                for c, value in coords.items():
                    matrix[c, b] = float(value)
            self.differential.append(matrix)

    def ad(self, depth: int, x: np.ndarray) -> np.ndarray:
        """Matrix of y ↦ [x, y] on 𝔤^{−depth} for x ∈ 𝔤⁰."""
        return np.tensordot(x, self.action[depth], axes=1)

    def exp_ad(self, depth: int, x: np.ndarray) -> np.ndarray:
        """exp(ad_x) on 𝔤^{−depth}; the series terminates by nilpotency."""
        generator = self.ad(depth, x)
        result = np.eye(self.dims[depth])
        term = np.eye(self.dims[depth])
        for j in range(1, self.order + 1):
            term = term @ generator / j
            result = result + term
        return result

    def lie_bracket(self, depth: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if depth == 0:
            return self.ad(0, x) @ y
        if depth == 1:
            return self.ad(1, self.differential[1] @ x) @ y
        return np.zeros_like(y)

    def bch(self, depth: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if depth >= 2:
            return x + y
        return bch_series(
            x,
            y,
            lambda a, b: self.lie_bracket(depth, a, b),
            self.order,
            lambda a, b: a + b,
            lambda a, factor: a * float(factor),
        )

    def boundary(self, depth: int, x: np.ndarray) -> np.ndarray:
        return self.differential[depth] @ x

    def to_float(self, g: GroupElement) -> np.ndarray:
        return np.array([float(c) for c in g.coords])


##################
# LAW CHECKS     #
##################


def _group_law_violations(groups: CrossedComplexGroups, depth: int, rng: random.Random) -> List[str]:
    failures = []
    g, h, k = (groups.random_element(depth, rng) for _ in range(3))
    u, v = groups.random_element(0, rng), groups.random_element(0, rng)
    if groups.mul(groups.mul(g, h), k) != groups.mul(g, groups.mul(h, k)):
        failures.append(f"associativity in degree {-depth}")
    if not groups.mul(g, groups.inv(g)).is_identity():
        failures.append(f"inverse in degree {-depth}")
    if groups.act(u, groups.mul(g, h)) != groups.mul(groups.act(u, g), groups.act(u, h)):
        failures.append(f"β(u) is not a homomorphism in degree {-depth}")
    if groups.act(groups.mul(u, v), g) != groups.act(u, groups.act(v, g)):
        failures.append(f"β is not an action in degree {-depth}")
    if depth == 0 and groups.tensor_product_residual(g, h) != 0:
        failures.append("BCH disagrees with the tensor algebra product")
    if depth >= 1 and groups.boundary(groups.act(u, g)) != groups.act(u, groups.boundary(g)):
        failures.append(f"∂ is not equivariant in degree {-depth}")
    if depth == 1 and groups.act(groups.boundary(g), h) != groups.mul(groups.mul(g, h), groups.inv(g)):
        failures.append("Peiffer identity")
    if depth >= 2:
        if not groups.boundary(groups.boundary(g)).is_identity():
            failures.append(f"∂∂ ≠ 1 in degree {-depth}")
        x = groups.random_element(1, rng)
        if groups.act(groups.boundary(x), g) != g:
            failures.append(f"∂G^-1 acts nontrivially in degree {-depth}")
    return failures


def _lift(groups: CrossedComplexGroups, cell: PMorphism, m: int) -> PMorphism:
    while cell.m < m:
        cell = groups.unit(cell)
    return cell


def _ncat_law_violations(groups: CrossedComplexGroups, m: int, rng: random.Random) -> List[str]:
    failures = []
    x = groups.random_morphism(m, rng)
    if m >= 2:
        if groups.source(groups.source(x)) != groups.source(groups.target(x)):
            failures.append(f"globularity s∘s = s∘t on {m}-morphisms")
        if groups.target(groups.source(x)) != groups.target(groups.target(x)):
            failures.append(f"globularity t∘s = t∘t on {m}-morphisms")
    for i in range(m):
        left = _lift(groups, groups.target_at(x, i), m)
        right = _lift(groups, groups.source_at(x, i), m)
        if groups.compose(left, x, i) != x or groups.compose(x, right, i) != x:
            failures.append(f"units for *_{i} on {m}-morphisms")
        c = groups.random_morphism(m, rng)
        b = groups.with_source(m, i, groups.target_at(c, i), rng)
        a = groups.with_source(m, i, groups.target_at(b, i), rng)
        ab_c = groups.compose(groups.compose(a, b, i), c, i)
        a_bc = groups.compose(a, groups.compose(b, c, i), i)
        if ab_c != a_bc:
            failures.append(f"associativity of *_{i} on {m}-morphisms")
        for j in range(i + 1, m):
            d = groups.random_morphism(m, rng)
            c = groups.with_source(m, j, groups.target_at(d, j), rng)
            b = groups.with_source(m, i, groups.target_at(d, i), rng)
            a = groups.with_source(m, j, groups.target_at(b, j), rng)
            first = groups.compose(groups.compose(a, b, j), groups.compose(c, d, j), i)
            second = groups.compose(groups.compose(a, c, i), groups.compose(b, d, i), j)
            if first != second:
                failures.append(f"interchange of *_{i} and *_{j} on {m}-morphisms")
    return failures


def law_violations(groups: CrossedComplexGroups, rng: random.Random, samples: int) -> List[str]:
    """Group, crossed-complex and n-category laws on seeded random samples.

    Returns one description per failed sample; an empty list means every law held
    exactly.
    """
    failures: List[str] = []
    top = groups.cc.depth
    for sample in range(samples):
        failures.extend(_group_law_violations(groups, sample % top, rng))
        if top >= 2:
            failures.extend(_ncat_law_violations(groups, 2 + sample % (top - 1), rng))
    logger.info(f"{samples} law samples on {groups!r}: {len(failures)} violations")
    return failures
