import pytest

from fractions import Fraction

from services import tensor_core
from services.tensor_core import GeneratorId, Tensor, all_generators, shuffle, word_degree
from utils.exceptions import ConfigurationError

Z1, Z2, Z3 = GeneratorId.of(1), GeneratorId.of(2), GeneratorId.of(3)
Z12, Z34 = GeneratorId.of(1, 2), GeneratorId.of(3, 4)


def letter(generator, n=2, L=3, coeff=1):
    return Tensor.letter(generator, n, L, coeff)


def word(*letters, n=2, L=3, coeff=1):
    return Tensor.from_word(letters, n, L, coeff)


def test_generators_are_ordered_by_size_then_indices():
    labels = [g.label() for g in all_generators(3)]
    assert labels == ["Z1", "Z2", "Z3", "Z12", "Z13", "Z23", "Z123"]
    assert GeneratorId.of(1, 2, 3).cohom_degree == -2


def test_generator_needs_increasing_indices():
    with pytest.raises(ConfigurationError):
        GeneratorId.of(2, 1)
    with pytest.raises(ConfigurationError):
        GeneratorId.of()


def test_addition_identities():
    x = letter(Z1) + word(Z1, Z2, coeff=3)
    zero = Tensor.zero(2, 3)
    assert x + zero == x
    assert x - x == zero
    assert (x + letter(Z2)) - letter(Z2) == x


def test_product_truncates_long_words():
    x = word(Z1, Z2, L=3)
    y = word(Z2, Z1, L=3)
    assert (x * y).is_zero()
    assert (letter(Z1) * x) == word(Z1, Z1, Z2)
    assert x * Tensor.one(2, 3) == x


def test_commutator_of_even_letters_is_antisymmetric():
    bracket = tensor_core.graded_commutator(letter(Z1), letter(Z2))
    assert bracket == word(Z1, Z2) - word(Z2, Z1)


def test_commutator_of_odd_letters_is_symmetric():
    a = Tensor.letter(Z12, 4, 2)
    b = Tensor.letter(Z34, 4, 2)
    expected = Tensor.from_word((Z12, Z34), 4, 2) + Tensor.from_word((Z34, Z12), 4, 2)
    assert tensor_core.graded_commutator(a, b) == expected


def random_homogeneous(rng, n=4, L=3):
    """A letter or two-letter word, plus a letter of the same degree when one exists."""
    generators = all_generators(n)
    letters = tuple(rng.choice(generators) for _ in range(rng.randint(1, 2)))
    coeff = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 4))
    element = Tensor.from_word(letters, n, L, coeff)
    degree = word_degree(letters)
    partners = [g for g in generators if g.cohom_degree == degree and (g,) != letters]
    if partners:
        element = element + Tensor.letter(rng.choice(partners), n, L, rng.randint(1, 3))
    return element


def test_graded_commutator_is_antisymmetric_and_satisfies_jacobi(rng):
    bracket = tensor_core.graded_commutator
    degrees = set()
    for _ in range(60):
        a, b, c = (random_homogeneous(rng) for _ in range(3))
        degrees.update(x.degree() for x in (a, b, c))
        sign = (-1) ** (a.degree() * b.degree())
        assert (bracket(a, b) + bracket(b, a).scale(sign)).is_zero()
        lhs = bracket(a, bracket(b, c))
        rhs = bracket(bracket(a, b), c) + bracket(b, bracket(a, c)).scale(sign)
        assert lhs == rhs
    assert {0, -1, -2} <= degrees


def test_exp_and_log_are_inverse():
    x = letter(Z1) + word(Z1, Z2, coeff=Fraction(1, 2)) - letter(Z2, coeff=3)
    assert tensor_core.log(tensor_core.exp(x)) == x
    g = tensor_core.exp(letter(Z1)) * tensor_core.exp(letter(Z2))
    assert tensor_core.exp(tensor_core.log(g)) == g


def test_exp_of_a_letter():
    g = tensor_core.exp(letter(Z1))
    assert g.coefficient((Z1, Z1, Z1)) == Fraction(1, 6)
    assert g.constant_term() == 1


def test_inverse_of_exp():
    x = letter(Z1) + letter(Z2, coeff=2)
    assert tensor_core.inverse(tensor_core.exp(x)) == tensor_core.exp(-x)


def test_log_needs_unit_constant_term():
    with pytest.raises(ConfigurationError):
        tensor_core.log(letter(Z1))
    with pytest.raises(ConfigurationError):
        tensor_core.exp(Tensor.one(2, 3))


def test_shuffle_of_degree_zero_letters():
    assert shuffle([Z1], [Z2]) == word(Z1, Z2, L=2) + word(Z2, Z1, L=2)
    expected = word(Z1, Z1, Z2, coeff=2, L=3) + word(Z1, Z2, Z1, L=3)
    assert shuffle([Z1], [Z1, Z2]) == expected


def test_shuffle_with_odd_letters_carries_koszul_signs():
    expected = Tensor.from_word((Z12, Z34), 4, 2) - Tensor.from_word((Z34, Z12), 4, 2)
    assert shuffle([Z12], [Z34], n=4) == expected


def test_group_like_detection():
    ok, residual = tensor_core.is_group_like(tensor_core.exp(letter(Z1) + letter(Z2)))
    assert ok and residual == 0
    ok, residual = tensor_core.is_group_like(Tensor.one(2, 3) + word(Z1, Z2))
    assert not ok and residual > 0


def test_mismatched_algebras_raise():
    with pytest.raises(ConfigurationError):
        letter(Z1, n=2) + letter(Z1, n=3)
    with pytest.raises(ConfigurationError):
        letter(Z1, L=2) * letter(Z1, L=3)


def test_words_beyond_n_are_rejected():
    with pytest.raises(ConfigurationError):
        Tensor.letter(Z3, 2, 2)


def test_dynkin_projection_fixes_lie_elements():
    bracket = tensor_core.right_normed([Z1, Z2], 2, 3)
    assert tensor_core.dynkin_projection(bracket) == bracket
    assert tensor_core.dynkin_projection(word(Z1, Z2)) != word(Z1, Z2)


def test_exact_serialization():
    x = letter(Z1, coeff=Fraction(2, 3)) + word(Z2, Z1, coeff=-5)
    payload = x.to_dict()
    assert {"word": [[1]], "num": "2", "den": "3"} in payload["terms"]
    assert Tensor.from_dict(payload) == x


def test_levels_keep_degree_zero_words():
    x = letter(Z1, coeff=2) + word(Z1, Z2, coeff=Fraction(1, 4))
    levels = tensor_core.to_levels(x)
    assert levels[1][0] == 2.0
    assert levels[2][0, 1] == 0.25
    back = tensor_core.from_levels(levels, 2)
    assert back.coefficient((Z1, Z2)) == 0.25


def test_functional_forms_match_operators():
    x, y = letter(Z1), word(Z2, Z1)
    assert tensor_core.add(x, y) == x + y
    assert tensor_core.concat_product(x, y) == word(Z1, Z2, Z1)
