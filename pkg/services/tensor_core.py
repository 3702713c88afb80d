"""Exact truncated tensor algebra on the graded generators Z_I.

Every algebraic object in the package (Lie monomials, group-like elements, path
signatures) is represented by its image here. Coefficients are Fractions, words
longer than the truncation are dropped, and since that is a two-sided ideal the
product stays associative after truncation.
"""

import logging
import itertools
import numpy as np

from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from utils.app_utils import format_rational
from utils.exceptions import ConfigurationError
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

Number = Union[Fraction, int, float]


class GeneratorId(NamedTuple):
    """The generator Z_I of cohomological degree 1 - |I| and letter weight 1."""

    index_set: Tuple[int, ...]

    @classmethod
    def of(cls, *indices: int) -> "GeneratorId":
        index_set = tuple(int(i) for i in indices)
        if not index_set:
            raise ConfigurationError("A generator needs a nonempty index set")
        if index_set[0] < 1 or any(a >= b for a, b in zip(index_set, index_set[1:])):
            raise ConfigurationError(
                f"Index set must be positive and strictly increasing, got {index_set}"
            )
        return cls(index_set)

    @property
    def cohom_degree(self) -> int:
        return 1 - len(self.index_set)

    @property
    def letter_weight(self) -> int:
        return 1

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (len(self.index_set), self.index_set)

    def label(self) -> str:
        if all(i < 10 for i in self.index_set):
            return "Z" + "".join(str(i) for i in self.index_set)
        return "Z_{" + ",".join(str(i) for i in self.index_set) + "}"


Word = Tuple[GeneratorId, ...]


def _as_generator(letter) -> GeneratorId:
    if isinstance(letter, GeneratorId):
        return GeneratorId.of(*letter.index_set)
    return GeneratorId.of(*letter)


def word_degree(word: Word) -> int:
    return sum(1 - len(letter.index_set) for letter in word)


def word_key(word: Word):
    """Length-lexicographic order on (letter count, index-set sequence)."""
    return (len(word), tuple(letter.index_set for letter in word))


def word_label(word: Word) -> str:
    return "".join(letter.label() for letter in word) or "1"


def all_generators(n: int) -> List[GeneratorId]:
    """All Z_I with I a nonempty subset of {1..n}, ordered by (|I|, I)."""
    generators = [
        GeneratorId(subset)
        for size in range(1, n + 1)
        for subset in itertools.combinations(range(1, n + 1), size)
    ]
    return sorted(generators, key=lambda g: g.sort_key)


class Tensor:
    """An element of the letter-truncated tensor algebra on the Z_I, I ⊆ {1..n}.

    Instances are immutable; every operation returns a new Tensor. Terms with a
    zero coefficient and words with more than ``max_letters`` letters are never
    stored, so equality of term maps is equality of elements.
    """

    __slots__ = ("n", "max_letters", "terms")

    def __init__(
        self,
        n: int,
        max_letters: int,
        terms: Optional[Mapping[Word, Number]] = None,
        check: bool = True,
    ):
        if n < 1 or max_letters < 0:
            raise ConfigurationError(
                f"Tensor needs n >= 1 and max_letters >= 0, got n={n}, L={max_letters}"
            )
        clean: Dict[Word, Number] = {}
        for word, coeff in (terms or {}).items():
            if coeff == 0 or len(word) > max_letters:
                continue
            if check:
                word = tuple(_as_generator(letter) for letter in word)
                if any(letter.index_set[-1] > n for letter in word):
                    raise ConfigurationError(f"Word {word_label(word)} uses an index > {n}")
            clean[word] = coeff
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "max_letters", max_letters)
        object.__setattr__(self, "terms", MappingProxyType(clean))

    def __setattr__(self, name, value):
        raise AttributeError("Tensor is immutable")

    # Constructors
    @classmethod
    def zero(cls, n: int, max_letters: int) -> "Tensor":
        return cls(n, max_letters)

    @classmethod
    def one(cls, n: int, max_letters: int) -> "Tensor":
        return cls(n, max_letters, {(): Fraction(1)}, check=False)

    @classmethod
    def letter(
        cls, generator: GeneratorId, n: int, max_letters: int, coeff: Number = 1
    ) -> "Tensor":
        return cls(n, max_letters, {(generator,): Fraction(coeff)})

    @classmethod
    def from_word(cls, word: Sequence, n: int, max_letters: int, coeff: Number = 1):
        return cls(n, max_letters, {tuple(word): Fraction(coeff)})

    def _new(self, terms: Mapping[Word, Number]) -> "Tensor":
        return Tensor(self.n, self.max_letters, terms, check=False)

    # Queries
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, word: Word) -> Number:
        return self.terms.get(tuple(word), 0)

    def constant_term(self) -> Number:
        return self.terms.get((), 0)

    def degree(self) -> Optional[int]:
        """Cohomological degree of a homogeneous tensor; None for zero."""
        degrees = {word_degree(word) for word in self.terms}
        if not degrees:
            return None
        if len(degrees) > 1:
            raise ConfigurationError(
                f"Tensor is not homogeneous in cohomological degree: {sorted(degrees)}"
            )
        return degrees.pop()

    def sorted_terms(self) -> List[Tuple[Word, Number]]:
        return sorted(self.terms.items(), key=lambda item: word_key(item[0]))

    def truncate(self, max_letters: int) -> "Tensor":
        return Tensor(self.n, max_letters, self.terms, check=False)

    def scale(self, factor: Number) -> "Tensor":
        return self._new({w: c * factor for w, c in self.terms.items()})

    # Operators
    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return add(self, -other)

    def __neg__(self) -> "Tensor":
        return self.scale(-1)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return concat_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.n == other.n
            and self.max_letters == other.max_letters
            and dict(self.terms) == dict(other.terms)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.max_letters, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "<Tensor 0>"
        shown = " + ".join(
            f"{c}*{word_label(w)}" for w, c in self.sorted_terms()[:8]
        )
        more = " + ..." if len(self.terms) > 8 else ""
        return f"<Tensor n={self.n} L={self.max_letters}: {shown}{more}>"

    # Serialization
    def to_dict(self, as_float: bool = False) -> dict:
        terms = []
        for word, coeff in self.sorted_terms():
            entry = {"word": [list(letter.index_set) for letter in word]}
            if as_float or isinstance(coeff, float):
                entry["coeff"] = float(coeff)
            else:
                coeff = Fraction(coeff)
                entry["num"] = str(coeff.numerator)
                entry["den"] = str(coeff.denominator)
            terms.append(entry)
        return {"n": self.n, "maxLetters": self.max_letters, "terms": terms}

    @classmethod
    def from_dict(cls, payload: dict) -> "Tensor":
        terms: Dict[Word, Number] = {}
        for entry in payload["terms"]:
            word = tuple(GeneratorId.of(*letter) for letter in entry["word"])
            if "coeff" in entry:
                terms[word] = float(entry["coeff"])
            else:
                terms[word] = Fraction(int(entry["num"]), int(entry["den"]))
        return cls(int(payload["n"]), int(payload["maxLetters"]), terms)

    def describe(self) -> List[dict]:
        """Human-readable term list used by the pretty printers."""
        return [
            {"word": word_label(w), "coeff": format_rational(c) if not isinstance(c, float) else c}
            for w, c in self.sorted_terms()
        ]


def _check_compatible(a: Tensor, b: Tensor):
    if a.n != b.n or a.max_letters != b.max_letters:
        raise ConfigurationError(
            f"Tensors live in different algebras: (n={a.n}, L={a.max_letters}) "
            f"vs (n={b.n}, L={b.max_letters})"
        )


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_compatible(a, b)
    terms = dict(a.terms)
    for word, coeff in b.terms.items():
        terms[word] = terms.get(word, 0) + coeff
    return a._new(terms)


def concat_product(a: Tensor, b: Tensor) -> Tensor:
    """Bilinear extension of word concatenation, dropping words beyond the truncation."""
    _check_compatible(a, b)
    limit = a.max_letters
    terms: Dict[Word, Number] = {}
    right = list(b.terms.items())
    for u, cu in a.terms.items():
        room = limit - len(u)
        if room < 0:
            continue
        for v, cv in right:
            if len(v) > room:
                continue
            w = u + v
            terms[w] = terms.get(w, 0) + cu * cv
    return a._new(terms)


def graded_commutator(a: Tensor, b: Tensor) -> Tensor:
    """ab - (-1)^{|a||b|} ba for homogeneous a and b."""
    _check_compatible(a, b)
    da, db = a.degree(), b.degree()
    if da is None or db is None:
        return Tensor.zero(a.n, a.max_letters)
    sign = -1 if (da * db) % 2 == 0 else 1
    return concat_product(a, b) + concat_product(b, a).scale(sign)


def exp(a: Tensor) -> Tensor:
    if a.constant_term() != 0:
        raise ConfigurationError("exp needs a tensor without constant term")
    result = Tensor.one(a.n, a.max_letters)
    power = Tensor.one(a.n, a.max_letters)
    for k in range(1, a.max_letters + 1):
        power = concat_product(power, a).scale(Fraction(1, k))
        if power.is_zero():
            break
        result = result + power
    return result


def log(g: Tensor) -> Tensor:
    if g.constant_term() != 1:
        raise ConfigurationError("log needs a tensor with constant term 1")
    x = g - Tensor.one(g.n, g.max_letters)
    result = Tensor.zero(g.n, g.max_letters)
    power = Tensor.one(g.n, g.max_letters)
    for k in range(1, g.max_letters + 1):
        power = concat_product(power, x)
        if power.is_zero():
            break
        result = result + power.scale(Fraction((-1) ** (k + 1), k))
    return result


def inverse(g: Tensor) -> Tensor:
    """Inverse of a tensor with constant term 1 via the geometric series."""
    if g.constant_term() != 1:
        raise ConfigurationError("inverse needs a tensor with constant term 1")
    x = Tensor.one(g.n, g.max_letters) - g
    result = Tensor.one(g.n, g.max_letters)
    power = Tensor.one(g.n, g.max_letters)
    for _ in range(g.max_letters):
        power = concat_product(power, x)
        if power.is_zero():
            break
        result = result + power
    return result


@lru_cache(maxsize=65536)
def _shuffle_terms(u: Word, v: Word) -> Tuple[Tuple[Word, int], ...]:
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    a, b = u[0], v[0]
    # moving b in front of all of u costs the Koszul sign deg(b)*deg(u)
    sign = -1 if (b.cohom_degree * word_degree(u)) % 2 else 1
    counts: Dict[Word, int] = {}
    for w, c in _shuffle_terms(u[1:], v):
        counts[(a,) + w] = counts.get((a,) + w, 0) + c
    for w, c in _shuffle_terms(u, v[1:]):
        counts[(b,) + w] = counts.get((b,) + w, 0) + sign * c
    return tuple((w, c) for w, c in counts.items() if c)


def shuffle(
    u: Sequence[GeneratorId],
    v: Sequence[GeneratorId],
    n: Optional[int] = None,
    max_letters: Optional[int] = None,
) -> Tensor:
    """Signed sum over the (|u|,|v|)-shuffles of the two words."""
    u, v = tuple(u), tuple(v)
    if n is None:
        n = max([letter.index_set[-1] for letter in u + v] or [1])
    if max_letters is None:
        max_letters = len(u) + len(v)
    return Tensor(n, max_letters, dict(_shuffle_terms(u, v)), check=False)


def is_group_like(g: Tensor, tol: Number = 0) -> Tuple[bool, Number]:
    """Check ⟨g,u⟩⟨g,v⟩ = ⟨g, u ш v⟩ for all words with |u| + |v| ≤ L.

    Returns the verdict together with the largest residual found.
    """
    residual: Number = abs(g.constant_term() - 1)
    alphabet = sorted({letter for word in g.terms for letter in word}, key=lambda x: x.sort_key)
    coeff = g.terms.get
    for total in range(2, g.max_letters + 1):
        for r in range(1, total // 2 + 1):
            s = total - r
            for u in itertools.product(alphabet, repeat=r):
                cu = coeff(u, 0)
                for v in itertools.product(alphabet, repeat=s):
                    rhs = sum(c * coeff(w, 0) for w, c in _shuffle_terms(u, v))
                    residual = max(residual, abs(cu * coeff(v, 0) - rhs))
    return residual <= tol, residual


def right_normed(word: Sequence[GeneratorId], n: int, max_letters: int) -> Tensor:
    """Realization of the right-normed bracket [w1,[w2,[...,wk]]] of the word letters."""
    word = tuple(word)
    if not word:
        raise ConfigurationError("right_normed needs a nonempty word")
    result = Tensor.letter(word[-1], n, max_letters)
    for letter in reversed(word[:-1]):
        result = graded_commutator(Tensor.letter(letter, n, max_letters), result)
    return result


def dynkin_projection(t: Tensor) -> Tensor:
    """Σ_w c_w r(w)/|w|; the identity on Lie elements of degree 0 letters."""
    result = Tensor.zero(t.n, t.max_letters)
    for word, coeff in t.terms.items():
        if word:
            factor = coeff / len(word) if isinstance(coeff, float) else Fraction(coeff) / len(word)
            result = result + right_normed(word, t.n, t.max_letters).scale(factor)
    return result


def to_levels(t: Tensor, depth: Optional[int] = None) -> List[np.ndarray]:
    """Dense float levels of the degree-0 part: level k has shape (n,)*k."""
    depth = t.max_letters if depth is None else depth
    levels = [np.zeros((t.n,) * k) for k in range(depth + 1)]
    for word, coeff in t.terms.items():
        if len(word) > depth or any(len(letter.index_set) != 1 for letter in word):
            continue
        index = tuple(letter.index_set[0] - 1 for letter in word)
        levels[len(word)][index] = float(coeff)
    return levels


def from_levels(levels: Sequence[np.ndarray], n: int) -> Tensor:
    """Float tensor from dense levels over the degree-0 letters Z_1..Z_n."""
    letters = [GeneratorId((i,)) for i in range(1, n + 1)]
    terms: Dict[Word, Number] = {}
    for k, level in enumerate(levels):
        level = np.asarray(level)
        for index in itertools.product(range(n), repeat=k):
            value = float(level[index]) if k else float(level)
            if value != 0.0:
                terms[tuple(letters[i] for i in index)] = value
    return Tensor(n, len(levels) - 1, terms, check=False)
