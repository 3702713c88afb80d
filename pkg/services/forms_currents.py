"""Polynomial forms on V = kⁿ, currents supported at 0, and the ρ maps into currents.

A monomial t^α is stored as its exponent tuple α (length n) and a form or current
term as the pair (α, I) with I a strictly increasing index tuple. A current term
c·(α, I) is the functional ω ↦ c·(∂^α ω_I)(0) = c·α!·[t^α]ω_I.
"""

import math
import logging
import itertools

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from services import linalg_service
from utils.exceptions import ConfigurationError
from services.tensor_core import Tensor, word_degree
from services.free_dg_lie import LieExpr, LieSum, differential_tensor

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]
IndexSet = Tuple[int, ...]
FormKey = Tuple[Exponent, IndexSet]


def _check_index_set(index_set: IndexSet, n: int):
    if any(a >= b for a, b in zip(index_set, index_set[1:])):
        raise ConfigurationError(f"Index set {index_set} is not strictly increasing")
    if index_set and (index_set[0] < 1 or index_set[-1] > n):
        raise ConfigurationError(f"Index set {index_set} leaves 1..{n}")


def _insertion_sign(index_set: IndexSet, j: int) -> int:
    """Sign of moving dt_j past the dt_i with i < j."""
    return -1 if sum(1 for i in index_set if i < j) % 2 else 1


def _merge_sign(first: IndexSet, second: IndexSet) -> int:
    """Sign of dt_J ∧ dt_K = ± dt_{J∪K}; 0 if they overlap."""
    if set(first) & set(second):
        return 0
    inversions = sum(1 for j in first for k in second if j > k)
    return -1 if inversions % 2 else 1


def exponents(n: int, total: int) -> List[Exponent]:
    """All α ∈ ℕⁿ with |α| = total, in lexicographic order."""
    result = []
    for chosen in itertools.combinations_with_replacement(range(n), total):
        alpha = [0] * n
        for k in chosen:
            alpha[k] += 1
        result.append(tuple(alpha))
    return sorted(result, reverse=True)


def index_sets(n: int, size: int) -> List[IndexSet]:
    return list(itertools.combinations(range(1, n + 1), size))


class _GradedTerms:
    """Shared storage for PolyForm and Current: a sparse map (α, I) → Fraction."""

    __slots__ = ("n", "p", "terms")

    def __init__(self, n: int, p: int, terms: Optional[Mapping[FormKey, Fraction]] = None):
        if n < 1 or p < 0:
            raise ConfigurationError(f"Need n >= 1 and p >= 0, got n={n}, p={p}")
        clean = {}
        for (alpha, index_set), coeff in (terms or {}).items():
            if coeff == 0:
                continue
            alpha, index_set = tuple(alpha), tuple(index_set)
            if len(alpha) != n or min(alpha, default=0) < 0:
                raise ConfigurationError(f"Exponent {alpha} is not a multi-index of length {n}")
            if len(index_set) != p:
                raise ConfigurationError(f"Index set {index_set} does not have {p} entries")
            _check_index_set(index_set, n)
            clean[(alpha, index_set)] = Fraction(coeff)
        self.n = n
        self.p = p
        self.terms = clean

    def _same_space(self, other):
        if type(self) is not type(other) or self.n != other.n or self.p != other.p:
            raise ConfigurationError(
                f"Cannot combine {type(self).__name__}(n={self.n}, p={self.p}) "
                f"with {type(other).__name__}(n={other.n}, p={other.p})"
            )

    def __add__(self, other):
        self._same_space(other)
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            terms[key] = terms.get(key, 0) + coeff
        return type(self)(self.n, self.p, terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, factor):
        return type(self)(self.n, self.p, {k: c * factor for k, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and (self.n, self.p, self.terms) == (
            other.n,
            other.p,
            other.terms,
        )

    def __hash__(self):
        return hash((type(self).__name__, self.n, self.p, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        shown = " + ".join(f"{c}*{a}{i}" for (a, i), c in sorted(self.terms.items())[:6])
        return f"<{type(self).__name__} n={self.n} p={self.p}: {shown or '0'}>"


class PolyForm(_GradedTerms):
    """Σ ω_I dt_I with polynomial coefficients ω_I; terms map (α, I) to the coefficient of t^α dt_I."""

    @classmethod
    def monomial(cls, n: int, alpha: Sequence[int], index_set: Sequence[int], coeff=1):
        return cls(n, len(index_set), {(tuple(alpha), tuple(index_set)): coeff})


class Current(_GradedTerms):
    """Finite sums of δ^α dt_I: derivatives of point masses at 0 paired with dt_I."""

    @classmethod
    def delta(cls, n: int, alpha: Sequence[int], index_set: Sequence[int], coeff=1):
        return cls(n, len(index_set), {(tuple(alpha), tuple(index_set)): coeff})

    def polynomial_degree(self) -> Optional[int]:
        degrees = {sum(alpha) for alpha, _ in self.terms}
        return degrees.pop() if len(degrees) == 1 else None


def de_rham_d(form: PolyForm) -> PolyForm:
    """d(f dt_I) = Σ_j ∂_j f dt_j ∧ dt_I, written in increasing-index normal form."""
    terms: Dict[FormKey, Fraction] = {}
    for (alpha, index_set), coeff in form.terms.items():
        for j in range(1, form.n + 1):
            power = alpha[j - 1]
            if power == 0 or j in index_set:
                continue
            lowered = alpha[: j - 1] + (power - 1,) + alpha[j:]
            raised = tuple(sorted(index_set + (j,)))
            key = (lowered, raised)
            terms[key] = terms.get(key, 0) + _insertion_sign(index_set, j) * power * coeff
    return PolyForm(form.n, form.p + 1, terms)


def boundary(current: Current) -> Current:
    """Adjoint of de_rham_d: ∂(δ^α dt_I) = Σ_{j∈I} (−1)^{pos(j)} δ^{α+e_j} dt_{I∖j}.

    On degree-0 currents this is the zero current.
    """
    if current.p == 0:
        return Current(current.n, 0)
    terms: Dict[FormKey, Fraction] = {}
    for (alpha, index_set), coeff in current.terms.items():
        for position, j in enumerate(index_set):
            raised = alpha[: j - 1] + (alpha[j - 1] + 1,) + alpha[j:]
            lowered = index_set[:position] + index_set[position + 1 :]
            sign = -1 if position % 2 else 1
            key = (raised, lowered)
            terms[key] = terms.get(key, 0) + sign * coeff
    return Current(current.n, current.p - 1, terms)


def pairing(current: Current, form: PolyForm) -> Fraction:
    if current.n != form.n or current.p != form.p:
        raise ConfigurationError(
            f"Cannot pair a current (n={current.n}, p={current.p}) "
            f"with a form (n={form.n}, p={form.p})"
        )
    total = Fraction(0)
    for key, coeff in current.terms.items():
        value = form.terms.get(key)
        if value:
            alpha = key[0]
            total += coeff * value * math.prod(math.factorial(a) for a in alpha)
    return total


################
# RHO MAPS     #
################

_RhoTerms = Dict[FormKey, Fraction]


def _shift(terms: _RhoTerms, k: int) -> _RhoTerms:
    return {
        (alpha[: k - 1] + (alpha[k - 1] + 1,) + alpha[k:], index_set): coeff
        for (alpha, index_set), coeff in terms.items()
    }


def _negate(terms: _RhoTerms) -> _RhoTerms:
    return {key: -coeff for key, coeff in terms.items()}


def _higher_count(expr: LieExpr) -> int:
    return sum(1 for letter in expr.letters() if len(letter.index_set) > 1)


def _rho_higher(expr: LieExpr, n: int) -> _RhoTerms:
    """ρ on monomials with exactly one generator Z_I, |I| > 1."""
    if expr.is_leaf:
        return {((0,) * n, expr.generator.index_set): Fraction(1)}
    left_higher = _higher_count(expr.left)
    if left_higher and _higher_count(expr.right):
        return {}
    if left_higher:
        # [a, b] = −[b, a] when b has degree 0
        return _negate(_rho_higher(LieExpr.bracket(expr.right, expr.left), n))
    if not expr.left.is_leaf:
        # a commutator of degree-0 letters acts through commuting derivatives: zero
        return {}
    return _shift(_rho_higher(expr.right, n), expr.left.generator.index_set[0])


def _rho_pure(expr: LieExpr, n: int) -> _RhoTerms:
    """ρ₀ on bracket monomials of degree-0 letters, as a degree-2 current."""
    left, right = expr.left, expr.right
    if left.is_leaf and right.is_leaf:
        a, b = left.generator.index_set[0], right.generator.index_set[0]
        if a == b:
            return {}
        sign = 1 if a < b else -1
        return {((0,) * n, (min(a, b), max(a, b))): Fraction(sign)}
    if left.is_leaf:
        return _shift(_rho_pure(right, n), left.generator.index_set[0])
    if right.is_leaf:
        return _negate(_rho_pure(LieExpr.bracket(right, left), n))
    return {}


def _check_n(expr: LieExpr, n: Optional[int]) -> int:
    needed = expr.max_index()
    n = needed if n is None else n
    if needed > n:
        raise ConfigurationError(f"{expr} uses an index > {n}")
    return n


def rho0(expr: LieExpr, n: Optional[int] = None) -> Current:
    """ρ₀([Z_{i1},[…,[Z_{i(p−1)}, Z_{ip}]]])(ω) = (∂_{i1}…∂_{i(p−2)} ω_{i(p−1) ip})(0)."""
    n = _check_n(expr, n)
    if expr.cohom_degree != 0 or expr.letter_count < 2:
        raise ConfigurationError(
            f"rho0 needs a degree-0 bracket with at least two letters, got {expr}"
        )
    return Current(n, 2, _rho_pure(expr, n))


def rho_minus_m(expr: LieExpr, n: Optional[int] = None) -> Current:
    """ρ_{−m} with values in currents of degree m+1; zero on monomials with two higher generators."""
    n = _check_n(expr, n)
    m = -expr.cohom_degree
    if m < 1:
        raise ConfigurationError(f"rho_minus_m needs negative degree, got {expr}")
    terms = _rho_higher(expr, n) if _higher_count(expr) == 1 else {}
    return Current(n, m + 1, terms)


def rho(element: Union[LieExpr, LieSum], n: int) -> Current:
    """ρ extended linearly; the result lives in Γ₂ for degree 0 and Γ_{m+1} for degree −m."""
    if isinstance(element, LieExpr):
        element = LieSum.of(element)
    if element.is_zero():
        raise ConfigurationError("rho of the zero element has no well-defined degree")
    result = None
    for expr, coeff in element:
        value = rho0(expr, n) if expr.cohom_degree == 0 else rho_minus_m(expr, n)
        value = value.scale(coeff)
        result = value if result is None else result + value
    return result


########################
# CONSTANT-COEFF FORMS #
########################


class ConstantForm:
    """Σ_I x_I dt_I with Tensor coefficients, as used for connections.

    Products are coefficient-left: (x dt_J)(y dt_K) = (−1)^{|J|·|y|} x y dt_J dt_K,
    and the total degree of x dt_J is |x| + |J|.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Optional[Mapping[IndexSet, Tensor]] = None):
        clean = {}
        for index_set, coeff in (terms or {}).items():
            index_set = tuple(index_set)
            _check_index_set(index_set, n)
            if coeff.n != n:
                raise ConfigurationError(f"Coefficient has n={coeff.n}, form has n={n}")
            if not coeff.is_zero():
                clean[index_set] = coeff
        self.n = n
        self.terms = clean

    def is_zero(self) -> bool:
        return not self.terms

    def component(self, index_set: Sequence[int]) -> Optional[Tensor]:
        return self.terms.get(tuple(index_set))

    def __add__(self, other: "ConstantForm") -> "ConstantForm":
        if self.n != other.n:
            raise ConfigurationError(f"Forms with n={self.n} and n={other.n} cannot be added")
        terms = dict(self.terms)
        for index_set, coeff in other.terms.items():
            terms[index_set] = terms[index_set] + coeff if index_set in terms else coeff
        return ConstantForm(self.n, terms)

    def __sub__(self, other: "ConstantForm") -> "ConstantForm":
        return self + other.scale(-1)

    def scale(self, factor) -> "ConstantForm":
        return ConstantForm(self.n, {i: c.scale(factor) for i, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, ConstantForm) and self.n == other.n and self.terms == other.terms

    def _homogeneous_pieces(self) -> Iterable[Tuple[IndexSet, int, Tensor]]:
        """Split each coefficient by cohomological degree."""
        for index_set, coeff in self.terms.items():
            by_degree: Dict[int, Dict] = {}
            for word, c in coeff.terms.items():
                by_degree.setdefault(word_degree(word), {})[word] = c
            for degree, terms in by_degree.items():
                yield index_set, degree, Tensor(coeff.n, coeff.max_letters, terms, check=False)

    def product(self, other: "ConstantForm") -> "ConstantForm":
        result: Dict[IndexSet, Tensor] = {}
        for first, _, x in self._homogeneous_pieces():
            for second, degree_y, y in other._homogeneous_pieces():
                sign = _merge_sign(first, second)
                if sign == 0:
                    continue
                if (len(first) * degree_y) % 2:
                    sign = -sign
                merged = tuple(sorted(first + second))
                term = (x * y).scale(sign)
                result[merged] = result[merged] + term if merged in result else term
        return ConstantForm(self.n, result)

    def bracket(self, other: "ConstantForm") -> "ConstantForm":
        """Graded commutator with respect to total degree."""
        result = ConstantForm(self.n)
        for first, degree_x, x in self._homogeneous_pieces():
            a = ConstantForm(self.n, {first: x})
            total_a = degree_x + len(first)
            for second, degree_y, y in other._homogeneous_pieces():
                b = ConstantForm(self.n, {second: y})
                total_b = degree_y + len(second)
                sign = -1 if (total_a * total_b) % 2 == 0 else 1
                result = result + a.product(b) + b.product(a).scale(sign)
        return result

    def differential(self) -> "ConstantForm":
        """d_DR + d_𝔣; only d_𝔣 survives on constant coefficients."""
        terms = {i: differential_tensor(c) for i, c in self.terms.items()}
        return ConstantForm(self.n, terms)

    def evaluate(self, vectors: Sequence[Sequence]) -> Optional[Tensor]:
        """Contract the degree-k part with k tangent vectors: Σ_I x_I · det(v_a[i])_{i∈I}."""
        k = len(vectors)
        result = None
        for index_set, coeff in self.terms.items():
            if len(index_set) != k:
                continue
            minor = _minor([[v[i - 1] for i in index_set] for v in vectors])
            term = coeff.scale(minor)
            result = term if result is None else result + term
        return result

    def __repr__(self) -> str:
        parts = [f"{c!r} dt{''.join(map(str, i))}" for i, c in sorted(self.terms.items())]
        return f"<ConstantForm n={self.n}: {' + '.join(parts) or '0'}>"


def _minor(rows: List[List]) -> Union[int, float, Fraction]:
    size = len(rows)
    if size == 0:
        return 1
    total = 0
    for perm in itertools.permutations(range(size)):
        inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        term = -1 if inversions % 2 else 1
        for row, column in enumerate(perm):
            term = term * rows[row][column]
        total += term
    return total


####################
# DIMENSION ORACLES #
####################


def gamma_dimension(p: int, q: int, n: int) -> int:
    """dim Γ_p(V) in polynomial degree q: C(n,p)·C(q+n−1, n−1)."""
    if p < 0 or q < 0 or p > n:
        return 0
    return math.comb(n, p) * math.comb(q + n - 1, n - 1)


def gamma_slice(p: int, q: int, n: int) -> List[Current]:
    """The basis δ^α dt_I of Γ_p(V) with |α| = q."""
    return [
        Current.delta(n, alpha, index_set)
        for alpha in exponents(n, q)
        for index_set in index_sets(n, p)
    ]


@lru_cache(maxsize=None)
def gamma_boundary_rank(p: int, q: int, n: int) -> int:
    """rank of ∂: Γ_p(q) → Γ_{p−1}(q+1)."""
    if p == 0 or p > n:
        return 0
    return linalg_service.rank(boundary(c).terms for c in gamma_slice(p, q, n))


def gamma_closed_dimension(p: int, q: int, n: int) -> int:
    """Γ_p^cl in degree q := ker(∂: Γ_p(q) → Γ_{p−1}(q+1)), by exact rank."""
    value = gamma_dimension(p, q, n) - gamma_boundary_rank(p, q, n)
    logger.debug(f"Γ^cl_{p}(q={q}, n={n}) = {value}")
    return value


def schur_dimension(partition: Sequence[int], n: int) -> int:
    """dim Σ^α(kⁿ) = Π_{(i,j)∈α} (n + j − i) / hook(i, j)."""
    shape = [part for part in partition if part > 0]
    if any(a < b for a, b in zip(shape, shape[1:])) or any(part < 0 for part in partition):
        raise ConfigurationError(f"{tuple(partition)} is not a partition")
    if len(shape) > n:
        return 0
    value = Fraction(1)
    for i, row in enumerate(shape):
        for j in range(row):
            arm = row - j - 1
            leg = sum(1 for lower in shape[i + 1 :] if lower > j)
            value *= Fraction(n + j - i, arm + leg + 1)
    return int(value)


def poly_form_slice(p: int, q: int, n: int) -> List[PolyForm]:
    return [
        PolyForm.monomial(n, alpha, index_set)
        for alpha in exponents(n, q)
        for index_set in index_sets(n, p)
    ]


@lru_cache(maxsize=None)
def closed_forms_dimension(p: int, d: int, n: int) -> int:
    """dim of closed p-forms with coefficients of degree d, as the rank of d on (p−1, d+1)."""
    if p < 1:
        raise ConfigurationError(f"closed_forms_dimension needs p >= 1, got {p}")
    if p > n:
        return 0
    return linalg_service.rank(de_rham_d(w).terms for w in poly_form_slice(p - 1, d + 1, n))
