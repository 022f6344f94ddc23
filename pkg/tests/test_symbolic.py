import numpy as np
import pytest

from core.errors import (
    AlphabetMismatchError,
    DepthError,
    DomainError,
    EnvelopeError,
    SymbolError,
    ValidationError,
)
from core.symbolic import (
    FiniteMemoryFunction,
    add,
    compose_shift,
    compose_shift_power,
    constant,
    enumerate_words,
    extend_depth,
    index_word,
    indicator,
    linear_combination,
    log,
    max_abs_difference,
    pointwise,
    reverse_arguments,
    scale,
    word_index,
)


class TestWords:
    def test_index_order_first_symbol_most_significant(self):
        assert word_index((1, 1), 2) == 0
        assert word_index((1, 2), 2) == 1
        assert word_index((2, 1), 2) == 2
        assert word_index((3, 1, 2), 3) == 19

    def test_index_word_inverts_word_index(self):
        for index in range(27):
            assert word_index(index_word(index, 3, 3), 3) == index

    def test_enumerate_words(self):
        words = enumerate_words(2, 2)
        np.testing.assert_array_equal(words, [[1, 1], [1, 2], [2, 1], [2, 2]])
        assert enumerate_words(3, 0).shape == (1, 0)

    def test_symbol_out_of_range(self):
        with pytest.raises(SymbolError):
            word_index((1, 3), 2)
        with pytest.raises(SymbolError):
            word_index((0,), 2)


class TestFiniteMemoryFunction:
    def test_table_size_is_checked(self):
        with pytest.raises(ValidationError):
            FiniteMemoryFunction(2, 2, [0.0, 1.0, 2.0])

    def test_bad_depth_and_alphabet(self):
        with pytest.raises(DepthError):
            FiniteMemoryFunction(2, -1, [0.0])
        with pytest.raises(ValidationError):
            FiniteMemoryFunction(5, 1, np.zeros(5))
        with pytest.raises(ValidationError):
            FiniteMemoryFunction(1, 1, np.zeros(1))

    def test_envelope(self):
        with pytest.raises(EnvelopeError) as info:
            FiniteMemoryFunction(4, 9, np.zeros(4 ** 9))
        assert info.value.entries == 4 ** 9

    def test_table_is_frozen(self):
        f = FiniteMemoryFunction(2, 1, [1.0, 2.0])
        with pytest.raises(ValueError):
            f.values[0] = 5.0

    def test_call_reads_prefix(self):
        f = FiniteMemoryFunction(2, 2, [0.0, 1.0, 2.0, 3.0])
        assert f((2, 1, 2, 2)) == 2.0
        with pytest.raises(DepthError):
            f((1,))

    def test_indicator(self):
        np.testing.assert_array_equal(indicator(2, (1,)).values, [1.0, 0.0])
        np.testing.assert_array_equal(indicator(2, (2, 1)).values, [0.0, 0.0, 1.0, 0.0])


class TestDepthOperations:
    def test_extend_copies_prefix_values(self):
        f = FiniteMemoryFunction(2, 1, [3.0, 7.0])
        np.testing.assert_array_equal(extend_depth(f, 2).values, [3.0, 3.0, 7.0, 7.0])

    def test_constants_extend_to_constants(self):
        np.testing.assert_array_equal(extend_depth(constant(2, 0.0, depth=1), 3).values, np.zeros(8))

    def test_extend_to_same_depth_is_identity(self):
        f = FiniteMemoryFunction(3, 1, [1.0, 2.0, 3.0])
        assert extend_depth(f, 1) is f

    def test_cannot_extend_down(self):
        with pytest.raises(DepthError):
            extend_depth(FiniteMemoryFunction(2, 2, np.zeros(4)), 1)

    def test_compose_shift_drops_first_symbol(self):
        f = FiniteMemoryFunction(2, 1, [3.0, 7.0])
        g = compose_shift(f)
        np.testing.assert_array_equal(g.values, [3.0, 7.0, 3.0, 7.0])
        assert g((2, 1)) == f((1,))

    def test_compose_shift_of_constant(self):
        np.testing.assert_array_equal(compose_shift(constant(2, 4.0)).values, [4.0, 4.0])

    def test_compose_shift_power(self):
        f = FiniteMemoryFunction(2, 1, [3.0, 7.0])
        g = compose_shift_power(f, 2)
        assert g.depth == 3
        assert g((2, 2, 1)) == 3.0
        with pytest.raises(ValidationError):
            compose_shift_power(f, -1)

    def test_reverse_arguments(self):
        f = FiniteMemoryFunction(2, 2, [0.0, 1.0, 2.0, 3.0])
        np.testing.assert_array_equal(reverse_arguments(f).values, [0.0, 2.0, 1.0, 3.0])
        g = FiniteMemoryFunction(2, 3, np.arange(8.0))
        assert reverse_arguments(g)((1, 1, 2)) == g((2, 1, 1))


class TestPointwise:
    def test_add_negation_is_zero(self):
        f = FiniteMemoryFunction(3, 2, np.arange(9.0))
        assert add(f, scale(f, -1.0)).sup_norm() == 0.0

    def test_mixed_depths_align(self):
        f = FiniteMemoryFunction(2, 1, [1.0, 2.0])
        g = FiniteMemoryFunction(2, 2, [10.0, 20.0, 30.0, 40.0])
        np.testing.assert_array_equal(add(f, g).values, [11.0, 21.0, 32.0, 42.0])

    def test_log_domain(self):
        with pytest.raises(DomainError):
            log(FiniteMemoryFunction(2, 1, [1.0, 0.0]))

    def test_alphabet_mismatch(self):
        with pytest.raises(AlphabetMismatchError):
            add(constant(2, 1.0), constant(3, 1.0))

    def test_dispatch(self):
        f = FiniteMemoryFunction(2, 1, [1.0, 2.0])
        np.testing.assert_allclose(pointwise("exp", f).values, np.exp([1.0, 2.0]))
        np.testing.assert_allclose(pointwise("scale", f, 3.0).values, [3.0, 6.0])
        with pytest.raises(ValidationError):
            pointwise("sqrt", f)

    def test_linear_combination(self):
        f = FiniteMemoryFunction(2, 1, [1.0, 0.0])
        g = FiniteMemoryFunction(2, 2, [0.0, 1.0, 0.0, 1.0])
        h = linear_combination([2.0, -1.0], [f, g])
        np.testing.assert_array_equal(h.values, [2.0, 1.0, 0.0, -1.0])
        assert max_abs_difference(h, add(scale(f, 2.0), scale(g, -1.0))) == 0.0
