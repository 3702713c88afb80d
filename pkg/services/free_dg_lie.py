"""The free dg-Lie algebra 𝔣•(V) = FL(Λ^{≥1}V) and its universal flat connection.

Lie monomials are binary trees over the generators Z_I; everything quantitative
goes through their realization as graded commutators in ``tensor_core``.
"""

import logging
import itertools

from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from sympy import divisors, factorint
from sympy.utilities.iterables import multiset_permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from services import linalg_service
from utils.exceptions import ConfigurationError
from services.tensor_core import (
    GeneratorId,
    Tensor,
    Word,
    all_generators,
    dynkin_projection,
    graded_commutator,
    word_key,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LieExpr:
    """A Lie monomial: a generator leaf or the bracket of two monomials."""

    generator: Optional[GeneratorId] = None
    left: Optional["LieExpr"] = None
    right: Optional["LieExpr"] = None

    @classmethod
    def leaf(cls, generator: GeneratorId) -> "LieExpr":
        return cls(generator=generator)

    @classmethod
    def bracket(cls, left: "LieExpr", right: "LieExpr") -> "LieExpr":
        return cls(left=left, right=right)

    @classmethod
    def right_normed(cls, letters: Sequence[GeneratorId]) -> "LieExpr":
        """[g1,[g2,[...,gk]]]"""
        if not letters:
            raise ConfigurationError("A Lie monomial needs at least one letter")
        expr = cls.leaf(letters[-1])
        for letter in reversed(letters[:-1]):
            expr = cls.bracket(cls.leaf(letter), expr)
        return expr

    @property
    def is_leaf(self) -> bool:
        return self.generator is not None

    @property
    def cohom_degree(self) -> int:
        if self.is_leaf:
            return self.generator.cohom_degree
        return self.left.cohom_degree + self.right.cohom_degree

    @property
    def letter_count(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.letter_count + self.right.letter_count

    def letters(self) -> List[GeneratorId]:
        if self.is_leaf:
            return [self.generator]
        return self.left.letters() + self.right.letters()

    def right_normed_letters(self) -> Optional[List[GeneratorId]]:
        """Letter sequence if the monomial is right-normed, else None."""
        letters = []
        expr = self
        while not expr.is_leaf:
            if not expr.left.is_leaf:
                return None
            letters.append(expr.left.generator)
            expr = expr.right
        letters.append(expr.generator)
        return letters

    def max_index(self) -> int:
        return max(letter.index_set[-1] for letter in self.letters())

    def __str__(self) -> str:
        if self.is_leaf:
            return self.generator.label()
        return f"[{self.left},{self.right}]"


class LieSum:
    """A finite rational combination of Lie monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[LieExpr, Fraction]] = None):
        self.terms = {e: Fraction(c) for e, c in (terms or {}).items() if c != 0}

    @classmethod
    def of(cls, expr: LieExpr, coeff=1) -> "LieSum":
        return cls({expr: Fraction(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "LieSum") -> "LieSum":
        terms = dict(self.terms)
        for expr, coeff in other.terms.items():
            terms[expr] = terms.get(expr, 0) + coeff
        return LieSum(terms)

    def scale(self, factor) -> "LieSum":
        return LieSum({e: c * factor for e, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, LieSum) and self.terms == other.terms

    def __iter__(self):
        return iter(self.terms.items())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for expr, coeff in sorted(self.terms.items(), key=lambda kv: str(kv[0])):
            if coeff == 1:
                parts.append(f"+{expr}")
            elif coeff == -1:
                parts.append(f"-{expr}")
            else:
                parts.append(f"{'+' if coeff > 0 else '-'}{abs(coeff)}*{expr}")
        text = " ".join(parts)
        return text[1:] if text.startswith("+") else text


def _orientation(size: int) -> int:
    """c(m) = (-1)^{(m-1)(m-2)/2}"""
    return -1 if ((size - 1) * (size - 2) // 2) % 2 else 1


def _shuffle_sign(first: Tuple[int, ...], second: Tuple[int, ...]) -> int:
    inversions = sum(1 for j in first for k in second if j > k)
    return -1 if inversions % 2 else 1


def partition_sign(first: Tuple[int, ...], second: Tuple[int, ...]) -> int:
    """σ(J,K) in dZ_I = ½ Σ_{(J,K)} σ(J,K) [Z_J, Z_K] for the ordered split I = J ⊔ K."""
    koszul = -1 if (len(first) * (1 - len(second))) % 2 else 1
    orientation = (
        _orientation(len(first))
        * _orientation(len(second))
        * _orientation(len(first) + len(second))
    )
    return koszul * _shuffle_sign(first, second) * orientation


def ordered_splits(index_set: Tuple[int, ...]) -> Iterable[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    for size in range(1, len(index_set)):
        for first in itertools.combinations(index_set, size):
            second = tuple(i for i in index_set if i not in first)
            yield first, second


def canonical_bracket(a: GeneratorId, b: GeneratorId) -> Tuple[LieExpr, int]:
    """[Z_a, Z_b] written with the smaller generator first, plus the sign picked up."""
    if a.sort_key <= b.sort_key:
        return LieExpr.bracket(LieExpr.leaf(a), LieExpr.leaf(b)), 1
    sign = 1 if (a.cohom_degree * b.cohom_degree) % 2 else -1
    return LieExpr.bracket(LieExpr.leaf(b), LieExpr.leaf(a)), sign


@lru_cache(maxsize=None)
def differential_on_generator(generator: GeneratorId) -> LieSum:
    """dZ_I as a combination of brackets [Z_J, Z_K]; zero for |I| = 1."""
    terms: Dict[LieExpr, Fraction] = {}
    for first, second in ordered_splits(generator.index_set):
        expr, sign = canonical_bracket(GeneratorId(first), GeneratorId(second))
        coeff = Fraction(partition_sign(first, second) * sign, 2)
        terms[expr] = terms.get(expr, 0) + coeff
    return LieSum(terms)


@lru_cache(maxsize=None)
def _generator_differential_terms(generator: GeneratorId) -> Tuple[Tuple[Word, int], ...]:
    # ½ Σ σ(J,K)[Z_J,Z_K] collapses to Σ σ(J,K) Z_J Z_K on tensors
    return tuple(
        ((GeneratorId(first), GeneratorId(second)), partition_sign(first, second))
        for first, second in ordered_splits(generator.index_set)
    )


@lru_cache(maxsize=262144)
def _realize(n: int, max_letters: int, expr: LieExpr) -> Tensor:
    if expr.is_leaf:
        return Tensor.letter(expr.generator, n, max_letters)
    return graded_commutator(
        _realize(n, max_letters, expr.left), _realize(n, max_letters, expr.right)
    )


def differential_tensor(t: Tensor) -> Tensor:
    """The degree +1 derivation extending dZ_I letter by letter with Koszul signs.

    Words that would exceed the truncation after one more letter are dropped.
    """
    terms: Dict[Word, Fraction] = {}
    limit = t.max_letters
    for word, coeff in t.terms.items():
        if len(word) + 1 > limit:
            continue
        passed = 0
        for position, letter in enumerate(word):
            sign = -1 if passed % 2 else 1
            prefix, suffix = word[:position], word[position + 1 :]
            for pair, sigma in _generator_differential_terms(letter):
                image = prefix + pair + suffix
                terms[image] = terms.get(image, 0) + sign * sigma * coeff
            passed += letter.cohom_degree
    return Tensor(t.n, t.max_letters, terms, check=False)


def _vector_letters(vector: Dict[Word, Fraction]) -> int:
    return max((len(word) for word in vector), default=0)


def differential_vector(n: int, vector: Dict[Word, Fraction]) -> Dict[Word, Fraction]:
    """d of a sparse word vector, with one letter of headroom so nothing is truncated."""
    t = Tensor(n, _vector_letters(vector) + 1, vector, check=False)
    return dict(differential_tensor(t).terms)


def bracket_vectors(
    n: int, x: Dict[Word, Fraction], y: Dict[Word, Fraction]
) -> Dict[Word, Fraction]:
    """Graded commutator of two homogeneous sparse word vectors, untruncated."""
    limit = _vector_letters(x) + _vector_letters(y)
    tx = Tensor(n, limit, x, check=False)
    ty = Tensor(n, limit, y, check=False)
    return dict(graded_commutator(tx, ty).terms)


@dataclass
class BigradedSubspace:
    """The (i, ℓ) slice of 𝔣• spanned by realized Lie monomials."""

    cohom_degree: int
    letters: int
    expressions: List[LieExpr]
    vectors: List[Dict[Word, Fraction]] = field(repr=False)

    @property
    def basis_words(self) -> List[Word]:
        return sorted({w for v in self.vectors for w in v}, key=word_key)

    @cached_property
    def rank(self) -> int:
        return linalg_service.rank(self.vectors)

    @cached_property
    def independent(self) -> List[int]:
        """Positions of a maximal independent subfamily, chosen greedily in order."""
        echelon = linalg_service.EchelonBasis()
        return [k for k, v in enumerate(self.vectors) if echelon.add(v, k)]

    def basis(self) -> List[Tuple[LieExpr, Dict[Word, Fraction]]]:
        return [(self.expressions[k], self.vectors[k]) for k in self.independent]


@lru_cache(maxsize=None)
def _spanning_set(n: int, i: int, letters: int) -> Tuple[LieExpr, ...]:
    """Right-normed monomials spanning the (i, ℓ) slice.

    Over each multiset of generators the largest letter is pinned to the innermost
    position and the remaining letters run over their distinct arrangements. This
    spans because the multilinear part of a free Lie algebra is spanned by
    right-normed brackets with a fixed last letter.
    """
    generators = all_generators(n)
    expressions = []
    for multiset in itertools.combinations_with_replacement(range(len(generators)), letters):
        if sum(generators[g].cohom_degree for g in multiset) != i:
            continue
        rest = list(multiset[:-1])
        last = generators[multiset[-1]]
        arrangements = multiset_permutations(rest) if rest else [[]]
        for arrangement in arrangements:
            sequence = [generators[g] for g in arrangement] + [last]
            expressions.append(LieExpr.right_normed(sequence))
    logger.debug(f"slice ({i}, {letters}) of n={n} spanned by {len(expressions)} monomials")
    return tuple(expressions)


@lru_cache(maxsize=None)
def _subspace(n: int, i: int, letters: int) -> BigradedSubspace:
    expressions = list(_spanning_set(n, i, letters))
    vectors = [dict(_realize(n, letters, e).terms) for e in expressions]
    return BigradedSubspace(i, letters, expressions, vectors)


@lru_cache(maxsize=None)
def _image_rank(n: int, i: int, letters: int) -> int:
    """rank of d restricted to the (i, ℓ) slice."""
    if letters < 1 or i > 0:
        return 0
    subspace = _subspace(n, i, letters)
    return linalg_service.rank(differential_vector(n, v) for _, v in subspace.basis())


class FreeDGLie:
    """𝔣•(kⁿ) truncated at ``max_letters`` letters.

    Slices do not depend on the truncation once it admits them, so they are cached
    per (n, i, ℓ) at module level and shared by every instance.
    """

    def __init__(self, n: int, max_letters: int):
        if n < 1:
            raise ConfigurationError(f"n must be positive, got {n}")
        if max_letters < 1:
            raise ConfigurationError(f"max_letters must be positive, got {max_letters}")
        self.n = n
        self.max_letters = max_letters
        self.generators = all_generators(n)

    @staticmethod
    @lru_cache(maxsize=64)
    def get(n: int, max_letters: int) -> "FreeDGLie":
        return FreeDGLie(n, max_letters)

    def __repr__(self) -> str:
        return f"<FreeDGLie n={self.n} L={self.max_letters}>"

    def check_slice(self, i: int, letters: int):
        if i > 0:
            raise ConfigurationError(f"𝔣• lives in degrees ≤ 0, got {i}")
        if not 1 <= letters <= self.max_letters:
            raise ConfigurationError(
                f"letters must lie in [1, {self.max_letters}], got {letters}"
            )

    ###############
    # REALIZATION #
    ###############

    def realize(self, expr: LieExpr) -> Tensor:
        if expr.max_index() > self.n:
            raise ConfigurationError(f"{expr} uses an index > {self.n}")
        return _realize(self.n, self.max_letters, expr)

    def realize_sum(self, element: LieSum) -> Tensor:
        result = Tensor.zero(self.n, self.max_letters)
        for expr, coeff in element:
            result = result + self.realize(expr).scale(coeff)
        return result

    def letter(self, *indices: int) -> Tensor:
        return Tensor.letter(GeneratorId.of(*indices), self.n, self.max_letters)

    ################
    # DIFFERENTIAL #
    ################

    def differential_on_generator(self, generator: GeneratorId) -> LieSum:
        return differential_on_generator(generator)

    def differential(self, t: Tensor) -> Tensor:
        if t.n != self.n:
            raise ConfigurationError(f"Tensor has n={t.n}, algebra has n={self.n}")
        return differential_tensor(t)

    def differential_expr(self, expr: LieExpr) -> LieSum:
        """d on monomials through d[a,b] = [da,b] + (-1)^{|a|}[a,db]."""
        if expr.is_leaf:
            return differential_on_generator(expr.generator)
        result = LieSum()
        for sub, coeff in self.differential_expr(expr.left):
            result = result + LieSum.of(LieExpr.bracket(sub, expr.right), coeff)
        sign = -1 if expr.left.cohom_degree % 2 else 1
        for sub, coeff in self.differential_expr(expr.right):
            result = result + LieSum.of(LieExpr.bracket(expr.left, sub), sign * coeff)
        return result

    ###############
    # SLICE SPANS #
    ###############

    def degrees_with_letters(self, letters: int) -> List[int]:
        """Cohomological degrees that occur among words with ``letters`` letters."""
        return list(range(0, letters * (1 - self.n) - 1, -1))

    def lie_spanning_set(self, i: int, letters: int) -> List[LieExpr]:
        self.check_slice(i, letters)
        return list(_spanning_set(self.n, i, letters))

    def bigraded_subspace(self, i: int, letters: int) -> BigradedSubspace:
        self.check_slice(i, letters)
        return _subspace(self.n, i, letters)

    def bigraded_dimension(self, i: int, letters: int) -> int:
        return self.bigraded_subspace(i, letters).rank

    def image_rank(self, i: int, letters: int) -> int:
        """rank of d on the (i, ℓ) slice; the image has ℓ + 1 letters and is never truncated."""
        return _image_rank(self.n, i, letters)

    def cohomology_dimension(self, i: int, letters: int) -> int:
        """dim ker d − dim im d on the (i, ℓ) slice."""
        self.check_slice(i, letters)
        kernel = self.bigraded_dimension(i, letters) - self.image_rank(i, letters)
        image = self.image_rank(i - 1, letters - 1) if letters > 1 else 0
        logger.debug(f"H^{i} at {letters} letters: ker {kernel}, im {image}")
        return kernel - image

    def is_lie_element(self, t: Tensor) -> bool:
        """Dynkin–Specht–Wever test for degree-0 tensors without constant term."""
        if t.constant_term() != 0:
            return False
        return dynkin_projection(t) == t


def witt_dimension(n: int, letters: int) -> int:
    """Necklace count (1/ℓ) Σ_{d|ℓ} μ(d) n^{ℓ/d} of the free Lie algebra on n letters."""
    total = 0
    for d in divisors(letters):
        exponents = factorint(d).values()
        if any(e > 1 for e in exponents):
            continue
        mobius = -1 if len(exponents) % 2 else 1
        total += mobius * n ** (letters // d)
    return total // letters


def universal_connection(n: int, max_letters: int = 2):
    """A = Σ_I c(|I|) Z_I dt_I; c is +1 for |I| ≤ 2 and fixes the orientation of dt_I beyond."""
    from services.forms_currents import ConstantForm

    terms = {}
    for generator in all_generators(n):
        coeff = Tensor.letter(generator, n, max_letters, _orientation(len(generator.index_set)))
        terms[generator.index_set] = coeff
    return ConstantForm(n, terms)


def curvature(form):
    """F_A = dA − ½[A, A] with d = d_DR + d_𝔣 acting on constant-coefficient forms."""
    return form.differential() - form.bracket(form).scale(Fraction(1, 2))


def parse_lie_label(text: str) -> LieExpr:
    """Inverse of ``str(LieExpr)``: parses labels such as ``[Z1,[Z2,Z_{1,10}]]``."""

    def parse(position: int) -> Tuple[LieExpr, int]:
        if text.startswith("[", position):
            left, position = parse(position + 1)
            if not text.startswith(",", position):
                raise ConfigurationError(f"Expected ',' at {position} in {text!r}")
            right, position = parse(position + 1)
            if not text.startswith("]", position):
                raise ConfigurationError(f"Expected ']' at {position} in {text!r}")
            return LieExpr.bracket(left, right), position + 1
        if text.startswith("Z_{", position):
            end = text.index("}", position)
            indices = [int(part) for part in text[position + 3 : end].split(",")]
            return LieExpr.leaf(GeneratorId.of(*indices)), end + 1
        if text.startswith("Z", position):
            end = position + 1
            while end < len(text) and text[end].isdigit():
                end += 1
            if end == position + 1:
                raise ConfigurationError(f"Generator without indices in {text!r}")
            indices = [int(c) for c in text[position + 1 : end]]
            return LieExpr.leaf(GeneratorId.of(*indices)), end
        raise ConfigurationError(f"Unexpected input at {position} in {text!r}")

    expr, position = parse(0)
    if position != len(text):
        raise ConfigurationError(f"Trailing input after {position} in {text!r}")
    return expr
