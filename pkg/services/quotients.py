"""Quotients of 𝔣•(kⁿ) and finite presentations of its nilpotent truncations.

Every quotient is computed slice by slice: an ambient (i, ℓ) slice of 𝔣• and the
relation vectors that land in it. Relation vectors are realized in the tensor
algebra without truncation, so a slice never depends on the global letter cutoff.
"""

import logging
import itertools

from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, Iterator, List, Tuple

from services import linalg_service
from services.tensor_core import GeneratorId, Word
from utils.app_utils import format_rational, parse_rational
from utils.exceptions import AxiomViolation, ConfigurationError
from services.free_dg_lie import (
    BigradedSubspace,
    FreeDGLie,
    LieExpr,
    bracket_vectors,
    differential_vector,
)

logger = logging.getLogger(__name__)

Vector = Dict[Word, Fraction]
Coords = Dict[int, Fraction]


@dataclass
class QuotientSlice:
    """An (i, ℓ) slice of 𝔣• modulo the relation vectors that land in it."""

    cohom_degree: int
    letters: int
    ambient: BigradedSubspace
    relation_vectors: List[Vector] = field(repr=False)

    @cached_property
    def ambient_rank(self) -> int:
        return self.ambient.rank

    @cached_property
    def relation_rank(self) -> int:
        return linalg_service.rank(self.relation_vectors)

    @property
    def dimension(self) -> int:
        return self.ambient_rank - self.relation_rank

    @cached_property
    def _relations(self) -> linalg_service.EchelonBasis:
        echelon = linalg_service.EchelonBasis()
        for vector in self.relation_vectors:
            echelon.add_relation(vector)
        return echelon

    def representative(self, vector: Vector) -> Vector:
        """Canonical representative of the class of ``vector``: its echelon residue."""
        return self._relations.reduce(vector)

    def is_zero(self, vector: Vector) -> bool:
        return not self.representative(vector)


def _empty_subspace(i: int, letters: int) -> BigradedSubspace:
    return BigradedSubspace(i, letters, [], [])


def _slice(n: int, i: int, letters: int) -> BigradedSubspace:
    if i > 0 or letters < 1 or i < letters * (1 - n):
        return _empty_subspace(i, letters)
    return FreeDGLie.get(n, letters).bigraded_subspace(i, letters)


def _slice_vectors(n: int, i: int, letters: int) -> List[Vector]:
    return [v for _, v in _slice(n, i, letters).basis()]


def _independent(vectors) -> List[Vector]:
    echelon = linalg_service.EchelonBasis()
    return [v for k, v in enumerate(vectors) if echelon.add(v, k)]


def _slice_pairs(
    n: int, i: int, letters: int, degree_range: Callable[[int], range]
) -> Iterator[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """Unordered pairs of slices (i1, ℓ1), (i2, ℓ2) with i1 + i2 = i and ℓ1 + ℓ2 = ℓ."""
    for l1 in range(1, letters):
        l2 = letters - l1
        for i1 in degree_range(l1):
            i2 = i - i1
            if i2 not in degree_range(l2):
                continue
            if (i1, l1) <= (i2, l2):
                yield (i1, l1), (i2, l2)


def _pair_brackets(n: int, first: List[Vector], second: List[Vector], same: bool):
    for a, x in enumerate(first):
        for b, y in enumerate(second):
            if same and b < a:
                continue
            yield bracket_vectors(n, x, y)


######################
# SEMIABELIANIZATION #
######################


def _negative_degrees(n: int) -> Callable[[int], range]:
    return lambda letters: range(-1, letters * (1 - n) - 1, -1)


@lru_cache(maxsize=None)
def _negative_brackets(n: int, i: int, letters: int) -> Tuple[Vector, ...]:
    """Independent span of [𝔣^{≤−1}, 𝔣^{≤−1}] inside the (i, ℓ) slice."""
    if i > -2 or letters < 2:
        return ()
    generated = []
    for (i1, l1), (i2, l2) in _slice_pairs(n, i, letters, _negative_degrees(n)):
        first = _slice_vectors(n, i1, l1)
        second = _slice_vectors(n, i2, l2)
        generated.extend(_pair_brackets(n, first, second, (i1, l1) == (i2, l2)))
    return tuple(_independent(generated))


@lru_cache(maxsize=None)
def semiabelian_relations(n: int, i: int, letters: int) -> Tuple[Vector, ...]:
    """[𝔣^{≤−1}, 𝔣^{≤−1}] + d[𝔣^{≤−1}, 𝔣^{≤−1}] inside the (i, ℓ) slice."""
    if i >= 0:
        return ()
    relations = list(_negative_brackets(n, i, letters))
    relations.extend(
        differential_vector(n, v) for v in _negative_brackets(n, i - 1, letters - 1)
    )
    return tuple(v for v in relations if v)


def semiabelianization_slice(n: int, i: int, letters: int) -> QuotientSlice:
    """The (i, ℓ) slice of 𝔣•_sab; degree 0 is left untouched."""
    if i > 0:
        raise ConfigurationError(f"𝔣• lives in degrees ≤ 0, got {i}")
    return QuotientSlice(i, letters, _slice(n, i, letters), list(semiabelian_relations(n, i, letters)))


@lru_cache(maxsize=None)
def semiabelian_dimension(n: int, i: int, letters: int) -> int:
    return semiabelianization_slice(n, i, letters).dimension


@lru_cache(maxsize=None)
def _semiabelian_d_rank(n: int, i: int, letters: int) -> int:
    """rank of the induced d: 𝔣_sab(i, ℓ) → 𝔣_sab(i+1, ℓ+1)."""
    if i > -1 or letters < 1:
        return 0
    target = semiabelian_relations(n, i + 1, letters + 1)
    images = [differential_vector(n, v) for v in _slice_vectors(n, i, letters)]
    return linalg_service.rank(images + list(target)) - linalg_service.rank(target)


def semiabelian_kernel_dimension(n: int, i: int, letters: int) -> int:
    """dim ker(d) on the (i, ℓ) slice of 𝔣_sab."""
    return semiabelian_dimension(n, i, letters) - _semiabelian_d_rank(n, i, letters)


def semiabelian_cohomology_dimension(n: int, i: int, letters: int) -> int:
    image = _semiabelian_d_rank(n, i - 1, letters - 1) if letters > 1 else 0
    return semiabelian_kernel_dimension(n, i, letters) - image


##################
# ABELIANIZATION #
##################


def _tilde_degrees(n: int) -> Callable[[int], range]:
    # 𝔣̃⁰ = [FL(V), FL(V)] starts at two letters
    def degrees(letters: int) -> range:
        top = 0 if letters >= 2 else -1
        return range(top, letters * (1 - n) - 1, -1)

    return degrees


def _tilde_slice(n: int, i: int, letters: int) -> BigradedSubspace:
    if i == 0 and letters < 2:
        return _empty_subspace(i, letters)
    return _slice(n, i, letters)


@lru_cache(maxsize=None)
def abelian_relations(n: int, i: int, letters: int) -> Tuple[Vector, ...]:
    """[𝔣̃, 𝔣̃] inside the (i, ℓ) slice."""
    generated = []
    for (i1, l1), (i2, l2) in _slice_pairs(n, i, letters, _tilde_degrees(n)):
        first = [v for _, v in _tilde_slice(n, i1, l1).basis()]
        second = [v for _, v in _tilde_slice(n, i2, l2).basis()]
        generated.extend(_pair_brackets(n, first, second, (i1, l1) == (i2, l2)))
    return tuple(_independent(generated))


def abelianization_slice(n: int, i: int, letters: int) -> QuotientSlice:
    """The (i, ℓ) slice of 𝔣̃•_ab, with 𝔣̃⁰ the commutant of FL(V)."""
    if i > 0:
        raise ConfigurationError(f"𝔣̃• lives in degrees ≤ 0, got {i}")
    return QuotientSlice(
        i, letters, _tilde_slice(n, i, letters), list(abelian_relations(n, i, letters))
    )


@lru_cache(maxsize=None)
def abelian_dimension(n: int, i: int, letters: int) -> int:
    return abelianization_slice(n, i, letters).dimension


############################
# CROSSED-MODULE QUOTIENT  #
############################


@dataclass
class CrossedModuleQuotient:
    """𝔤ₙ^{≥−1}: 𝔣⁰ ⊕ 𝔣^{−1}/d[𝔣^{−1}, 𝔣^{−1}], sliced by letters up to ``max_letters``."""

    n: int
    max_letters: int
    degree0: Dict[int, QuotientSlice]
    degree_minus_1: Dict[int, QuotientSlice]

    @cached_property
    def h0(self) -> Dict[int, int]:
        result = {}
        for letters, piece in self.degree0.items():
            image = FreeDGLie.get(self.n, letters).image_rank(-1, letters - 1) if letters > 1 else 0
            result[letters] = piece.dimension - image
        return result

    @cached_property
    def h_minus_1(self) -> Dict[int, int]:
        # d kills the relations, so the kernel on the quotient is read off the ambient
        result = {}
        for letters, piece in self.degree_minus_1.items():
            image = FreeDGLie.get(self.n, letters).image_rank(-1, letters)
            result[letters] = piece.dimension - image
        return result

    def kernel_basis(self, letters: int) -> List[Vector]:
        """Lifts of ker(d) ⊂ 𝔤^{−1} at ℓ letters to 𝔣^{−1}."""
        vectors = _slice_vectors(self.n, -1, letters)
        kernel = linalg_service.nullspace([differential_vector(self.n, v) for v in vectors])
        result = []
        for combination in kernel:
            lifted: Vector = {}
            for k, c in combination.items():
                for word, value in vectors[k].items():
                    lifted[word] = lifted.get(word, 0) + c * value
            lifted = {w: c for w, c in lifted.items() if c}
            if lifted and not self.degree_minus_1[letters].is_zero(lifted):
                result.append(lifted)
        return result

    def center_violations(self) -> List[Tuple[int, int]]:
        """Slices (ℓ_x, ℓ_y) where some x ∈ ker d has [x, y]₋₁ = [dy, x] ≠ 0 in the quotient."""
        violations = []
        for lx in range(1, self.max_letters + 1):
            kernel = self.kernel_basis(lx)
            if not kernel:
                continue
            for ly in range(1, self.max_letters - lx):
                target = self.degree_minus_1[lx + ly + 1]
                for y in _slice_vectors(self.n, -1, ly):
                    dy = differential_vector(self.n, y)
                    if any(not target.is_zero(bracket_vectors(self.n, dy, x)) for x in kernel):
                        violations.append((lx, ly))
                        break
        return violations


def crossed_module_quotient(n: int, max_letters: int) -> CrossedModuleQuotient:
    degree0 = {l: QuotientSlice(0, l, _slice(n, 0, l), []) for l in range(1, max_letters + 1)}
    degree_minus_1 = {
        l: semiabelianization_slice(n, -1, l) for l in range(1, max_letters + 1)
    }
    return CrossedModuleQuotient(n, max_letters, degree0, degree_minus_1)


#########################
# LOWER CENTRAL SERIES  #
#########################


def _all_degrees(n: int) -> Callable[[int], range]:
    return lambda letters: range(0, letters * (1 - n) - 1, -1)


@lru_cache(maxsize=None)
def _lcs_vectors(n: int, r: int, i: int, letters: int) -> Tuple[Vector, ...]:
    """Independent span of γ_r ∩ slice(i, ℓ), with γ_{r+1} = [𝔣, γ_r]."""
    if r == 1:
        return tuple(_slice_vectors(n, i, letters))
    generated = []
    for l1 in range(1, letters):
        for i1 in _all_degrees(n)(l1):
            inner = _lcs_vectors(n, r - 1, i - i1, letters - l1) if i - i1 <= 0 else ()
            if not inner:
                continue
            for x in _slice_vectors(n, i1, l1):
                generated.extend(bracket_vectors(n, x, y) for y in inner)
    return tuple(_independent(generated))


def lower_central_series_slice(n: int, r: int, i: int, letters: int) -> QuotientSlice:
    """The slice modulo γ_r; relation_vectors span γ_r ∩ slice(i, ℓ)."""
    if r < 1:
        raise ConfigurationError(f"Lower central series starts at r = 1, got {r}")
    return QuotientSlice(i, letters, _slice(n, i, letters), list(_lcs_vectors(n, r, i, letters)))


###################
# REPORT HELPERS  #
###################


def cohomology_table(n: int, max_letters: int) -> List[dict]:
    """Per-slice dimensions and cohomology of 𝔣• and 𝔣•_sab."""
    rows = []
    for letters in range(1, max_letters + 1):
        algebra = FreeDGLie.get(n, letters)
        for i in algebra.degrees_with_letters(letters):
            dim = algebra.bigraded_dimension(i, letters)
            if dim == 0:
                continue
            image = algebra.image_rank(i, letters)
            rows.append(
                {
                    "i": i,
                    "letters": letters,
                    "dim": dim,
                    "ker_d": dim - image,
                    "im_d": image,
                    "H": algebra.cohomology_dimension(i, letters),
                    "dim_sab": semiabelian_dimension(n, i, letters),
                    "H_sab": semiabelian_cohomology_dimension(n, i, letters),
                }
            )
    return rows


def symmetry_violations(n: int, letters: int) -> List[str]:
    """Adjacent transpositions of the outer letters in [Z_{i1},[…,[Z_{ip}, Z_J]]], |J| ≥ 3,
    that change the class in 𝔣_sab."""
    failures = []
    if letters < 3:
        return failures
    algebra = FreeDGLie.get(n, letters)
    for size in range(3, n + 1):
        degree = 1 - size
        relations = semiabelianization_slice(n, degree, letters)
        for inner in itertools.combinations(range(1, n + 1), size):
            top = GeneratorId(inner)
            for outer in itertools.product(range(1, n + 1), repeat=letters - 1):
                for k in range(letters - 2):
                    if outer[k] == outer[k + 1]:
                        continue
                    swapped = outer[:k] + (outer[k + 1], outer[k]) + outer[k + 2 :]
                    a = LieExpr.right_normed([GeneratorId((j,)) for j in outer] + [top])
                    b = LieExpr.right_normed([GeneratorId((j,)) for j in swapped] + [top])
                    difference = algebra.realize(a) - algebra.realize(b)
                    if not relations.is_zero(dict(difference.terms)):
                        failures.append(f"{a} vs {b}")
    return failures


##############################
# NILPOTENT CROSSED COMPLEX  #
##############################


def _accumulate(target: Coords, source: Coords, factor: Fraction):
    for key, value in source.items():
        updated = target.get(key, 0) + factor * value
        if updated:
            target[key] = updated
        else:
            target.pop(key, None)


def _terms_to_list(coords: Coords) -> List[dict]:
    return [{"c": c, "coeff": format_rational(v)} for c, v in sorted(coords.items())]


def _terms_from_list(entries: List[dict]) -> Coords:
    return {int(e["c"]): parse_rational(e["coeff"]) for e in entries}


class NilpotentCrossedComplex:
    """Structure constants of 𝔤•_{n,d} = 𝔣•_sab / γ_{d+1} in chosen echelon bases.

    Degree −k is indexed by its depth k. ``bracket[(k, a, b)]`` holds [e⁰_a, e^{−k}_b]
    in the degree −k basis (k = 0 is the Lie bracket of 𝔤⁰); ``differential[(k, b)]``
    holds d(e^{−k}_b) in the degree −k+1 basis. Missing entries are zero.
    """

    def __init__(
        self,
        n: int,
        nilpotency_class: int,
        labels: List[List[str]],
        weights: List[List[int]],
        bracket: Dict[Tuple[int, int, int], Coords],
        differential: Dict[Tuple[int, int], Coords],
    ):
        self.n = n
        self.nilpotency_class = nilpotency_class
        self.labels = labels
        self.weights = weights
        self.bracket = {k: v for k, v in bracket.items() if v}
        self.differential = {k: v for k, v in differential.items() if v}

    def __repr__(self) -> str:
        return f"<NilpotentCrossedComplex n={self.n} d={self.nilpotency_class} dims={self.dims}>"

    @property
    def depth(self) -> int:
        """Number of nonzero degrees."""
        return len(self.labels)

    @property
    def dims(self) -> List[int]:
        return [len(labels) for labels in self.labels]

    def dim(self, k: int) -> int:
        return len(self.labels[k]) if 0 <= k < self.depth else 0

    # Linear operations on coordinate dicts

    def bracket_coords(self, k: int, x: Coords, y: Coords) -> Coords:
        """[x, y] for x ∈ 𝔤⁰ and y ∈ 𝔤^{−k}."""
        result: Coords = {}
        if k >= self.depth:
            return result
        for a, xa in x.items():
            for b, yb in y.items():
                entry = self.bracket.get((k, a, b))
                if entry:
                    _accumulate(result, entry, xa * yb)
        return result

    def differential_coords(self, k: int, y: Coords) -> Coords:
        """d: 𝔤^{−k} → 𝔤^{−k+1}; zero on 𝔤⁰."""
        result: Coords = {}
        if k <= 0 or k >= self.depth:
            return result
        for b, yb in y.items():
            entry = self.differential.get((k, b))
            if entry:
                _accumulate(result, entry, yb)
        return result

    def derived_bracket(self, x: Coords, y: Coords) -> Coords:
        """[x, y]₋₁ = [dx, y] on 𝔤^{−1}."""
        return self.bracket_coords(1, self.differential_coords(1, x), y)

    def unit(self, k: int, index: int) -> Coords:
        return {index: Fraction(1)}

    def _weighted_units(self, k: int) -> List[Tuple[int, Coords]]:
        return [(w, self.unit(k, b)) for b, w in enumerate(self.weights[k])]

    # Axioms

    def validate(self) -> "NilpotentCrossedComplex":
        """Check every crossed-complex axiom exactly; raises AxiomViolation on the first failure."""
        d = self.nilpotency_class

        def fail(message: str):
            logger.error(f"Crossed complex n={self.n}, d={d}: {message}")
            raise AxiomViolation(message)

        def diff(a: Coords, b: Coords) -> Coords:
            result = dict(a)
            _accumulate(result, b, Fraction(-1))
            return result

        zero_units = self._weighted_units(0)
        for wa, a in zero_units:
            for wb, b in zero_units:
                if diff(self.bracket_coords(0, a, b), {k: -v for k, v in self.bracket_coords(0, b, a).items()}):
                    fail(f"bracket on 𝔤⁰ is not antisymmetric at {a}, {b}")

        for wa, a in zero_units:
            for wb, b in zero_units:
                if wa + wb >= d:
                    continue
                ab = self.bracket_coords(0, a, b)
                for k in range(self.depth):
                    for wx, x in self._weighted_units(k):
                        if wa + wb + wx > d:
                            continue
                        lhs = self.bracket_coords(k, ab, x)
                        rhs = diff(
                            self.bracket_coords(k, a, self.bracket_coords(k, b, x)),
                            self.bracket_coords(k, b, self.bracket_coords(k, a, x)),
                        )
                        if diff(lhs, rhs):
                            fail(f"Jacobi/action fails in degree -{k} at {a}, {b}, {x}")

        for k in range(1, self.depth):
            for wx, x in self._weighted_units(k):
                dx = self.differential_coords(k, x)
                if self.differential_coords(k - 1, dx):
                    fail(f"d∘d ≠ 0 on basis element {x} of degree -{k}")
                for wa, a in zero_units:
                    if wa + wx + 1 > d:
                        continue
                    lhs = self.differential_coords(k, self.bracket_coords(k, a, x))
                    rhs = self.bracket_coords(k - 1, a, dx)
                    if diff(lhs, rhs):
                        fail(f"d is not equivariant in degree -{k} at {a}, {x}")

        if self.depth > 1:
            units = self._weighted_units(1)
            for wx, x in units:
                dx = self.differential_coords(1, x)
                for wy, y in units:
                    if wx + wy + 1 > d:
                        continue
                    dy = self.differential_coords(1, y)
                    lhs = self.bracket_coords(1, dx, y)
                    rhs = {key: -v for key, v in self.bracket_coords(1, dy, x).items()}
                    if diff(lhs, rhs):
                        fail(f"Peiffer identity fails at {x}, {y}")
                for k in range(2, self.depth):
                    for wz, z in self._weighted_units(k):
                        if wx + wz + 1 <= d and self.bracket_coords(k, dx, z):
                            fail(f"d(𝔤^-1) acts nontrivially on degree -{k}")
        logger.debug(f"{self} satisfies the crossed-complex axioms")
        return self

    # Persistence

    def to_dict(self) -> dict:
        degrees = [
            {"i": -k, "dim": len(self.labels[k]), "labels": self.labels[k], "weights": self.weights[k]}
            for k in range(self.depth)
        ]
        bracket = [
            {"i": -k, "a": a, "b": b, "terms": _terms_to_list(coords)}
            for (k, a, b), coords in sorted(self.bracket.items())
        ]
        differential = [
            {"i": -k, "b": b, "terms": _terms_to_list(coords)}
            for (k, b), coords in sorted(self.differential.items())
        ]
        return {
            "n": self.n,
            "class": self.nilpotency_class,
            "degrees": degrees,
            "bracket": bracket,
            "differential": differential,
        }

    @classmethod
    def from_dict(cls, payload: dict, validate: bool = True) -> "NilpotentCrossedComplex":
        try:
            degrees = sorted(payload["degrees"], key=lambda entry: -int(entry["i"]))
            labels = [list(entry["labels"]) for entry in degrees]
            weights = [[int(w) for w in entry["weights"]] for entry in degrees]
            for k, entry in enumerate(degrees):
                if int(entry["i"]) != -k or int(entry["dim"]) != len(labels[k]):
                    raise ConfigurationError(f"Degree entry {entry['i']} is inconsistent")
            bracket = {
                (-int(e["i"]), int(e["a"]), int(e["b"])): _terms_from_list(e["terms"])
                for e in payload["bracket"]
            }
            differential = {
                (-int(e["i"]), int(e["b"])): _terms_from_list(e["terms"])
                for e in payload["differential"]
            }
            complex_ = cls(
                int(payload["n"]), int(payload["class"]), labels, weights, bracket, differential
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"Malformed crossed complex payload: {str(e)}") from e
        return complex_.validate() if validate else complex_


def _degree_basis(n: int, k: int, nilpotency_class: int):
    echelon = linalg_service.EchelonBasis()
    for letters in range(1, nilpotency_class + 1):
        for relation in semiabelian_relations(n, -k, letters):
            echelon.add_relation(relation)
    weights = []
    for letters in range(1, nilpotency_class + 1):
        for expr, vector in _slice(n, -k, letters).basis():
            if echelon.add(vector, str(expr)):
                weights.append(letters)
    return echelon, weights


@lru_cache(maxsize=32)
def extract_structure_constants(n: int, nilpotency_class: int) -> NilpotentCrossedComplex:
    """Echelon bases of 𝔣_sab / γ_{d+1} per degree and the tables of [𝔤⁰, −] and d in them."""
    if n < 1 or nilpotency_class < 1:
        raise ConfigurationError(
            f"Need n >= 1 and class >= 1, got n={n}, d={nilpotency_class}"
        )
    d = nilpotency_class
    bases, weights = [], []
    for k in range(n):
        echelon, degree_weights = _degree_basis(n, k, d)
        if not echelon.labels:
            break
        bases.append(echelon)
        weights.append(degree_weights)

    bracket: Dict[Tuple[int, int, int], Coords] = {}
    differential: Dict[Tuple[int, int], Coords] = {}
    zero = bases[0]
    for k, basis in enumerate(bases):
        for a, va in enumerate(zero.vectors):
            for b, vb in enumerate(basis.vectors):
                if weights[0][a] + weights[k][b] > d:
                    continue
                bracket[(k, a, b)] = basis.coordinates(bracket_vectors(n, va, vb))
        if k == 0:
            continue
        for b, vb in enumerate(basis.vectors):
            if weights[k][b] + 1 > d:
                continue
            differential[(k, b)] = bases[k - 1].coordinates(differential_vector(n, vb))

    labels = [list(basis.labels) for basis in bases]
    complex_ = NilpotentCrossedComplex(n, d, labels, weights, bracket, differential)
    logger.info(f"Extracted {complex_}")
    return complex_.validate()
