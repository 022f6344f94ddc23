# core/symbolic.py - Words, cylinder indexing and finite-memory functions on the full shift

# --- Core & Third-Party Imports ---
import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Sequence, Tuple

import numpy as np

from config import settings
from core.errors import (
    AlphabetMismatchError,
    DepthError,
    DomainError,
    EnvelopeError,
    SymbolError,
    ValidationError,
)

logger = logging.getLogger(__name__)

# A word is a tuple of 1-based symbols; the first symbol is the most significant digit.
Word = Tuple[int, ...]


# ======================================================================================
# SECTION 1: WORDS AND INDICES
# ======================================================================================

def check_alphabet(alphabet: int) -> int:
    """Validates an alphabet size and returns it as an int."""
    if int(alphabet) != alphabet or alphabet < settings.ALPHABET_MIN:
        raise ValidationError(f"alphabet size must be an integer >= {settings.ALPHABET_MIN}, got {alphabet}")
    if alphabet > settings.ALPHABET_MAX:
        raise ValidationError(f"alphabet size {alphabet} exceeds the supported maximum {settings.ALPHABET_MAX}")
    return int(alphabet)


def check_envelope(alphabet: int, depth: int, what: str = "table") -> None:
    """Raises EnvelopeError when a depth-`depth` table would not fit the storage envelope."""
    entries = alphabet ** depth
    if entries > settings.TABLE_ENVELOPE:
        raise EnvelopeError(f"{what} of depth {depth} over {alphabet} symbols is too large",
                            entries=entries, bound=settings.TABLE_ENVELOPE)


def validate_word(word: Iterable[int], alphabet: int) -> Word:
    """
    Normalizes a word to a tuple of ints and checks every symbol lies in 1..d.

    Args:
        word: Sequence of 1-based symbols.
        alphabet (int): Alphabet size d.

    Returns:
        Word: The validated word.
    """
    symbols = tuple(int(s) for s in word)
    for s in symbols:
        if s < 1 or s > alphabet:
            raise SymbolError(f"symbol {s} is outside 1..{alphabet} in word {symbols}")
    return symbols


def word_index(word: Sequence[int], alphabet: int) -> int:
    """Index of a word among the words of its length, first symbol most significant."""
    index = 0
    for s in validate_word(word, alphabet):
        index = index * alphabet + (s - 1)
    return index


def index_word(index: int, alphabet: int, length: int) -> Word:
    """Inverse of word_index for words of the given length."""
    if index < 0 or index >= alphabet ** length:
        raise ValidationError(f"index {index} out of range for words of length {length}")
    symbols = []
    for _ in range(length):
        index, digit = divmod(index, alphabet)
        symbols.append(digit + 1)
    return tuple(reversed(symbols))


def enumerate_words(alphabet: int, length: int) -> np.ndarray:
    """
    All words of a given length in index order.

    Returns:
        np.ndarray: Integer array of shape (d^m, m) holding 1-based symbols.
    """
    check_envelope(alphabet, length, what="word enumeration")
    rows = list(itertools.product(range(1, alphabet + 1), repeat=length))
    return np.array(rows, dtype=np.int64).reshape(alphabet ** length, length)


# ======================================================================================
# SECTION 2: FINITE-MEMORY FUNCTIONS
# ======================================================================================

@dataclass(frozen=True)
class FiniteMemoryFunction:
    """
    A real function on the full shift that only reads the first `depth` coordinates.

    `values[i]` is the value on the length-`depth` word with index i. The table is
    copied on construction and frozen, so instances can be shared freely.
    """
    alphabet: int
    depth: int
    values: np.ndarray

    def __post_init__(self):
        check_alphabet(self.alphabet)
        if int(self.depth) != self.depth or self.depth < 0:
            raise DepthError(f"depth must be a nonnegative integer, got {self.depth}")
        check_envelope(self.alphabet, self.depth)
        table = np.array(self.values, dtype=np.float64).reshape(-1)
        if table.size != self.alphabet ** self.depth:
            raise ValidationError(
                f"table has {table.size} entries, expected {self.alphabet}^{self.depth} = {self.alphabet ** self.depth}")
        table.setflags(write=False)
        object.__setattr__(self, "depth", int(self.depth))
        object.__setattr__(self, "values", table)

    def __call__(self, word: Sequence[int]) -> float:
        """Evaluates on any word at least `depth` long, reading its prefix."""
        symbols = validate_word(word, self.alphabet)
        if len(symbols) < self.depth:
            raise DepthError(f"word of length {len(symbols)} is shorter than depth {self.depth}")
        return float(self.values[word_index(symbols[:self.depth], self.alphabet)])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_dict(self) -> Dict:
        """Potential-file representation."""
        return {"alphabet": self.alphabet, "depth": self.depth, "log_values": self.values.tolist()}


def constant(alphabet: int, value: float, depth: int = 0) -> FiniteMemoryFunction:
    return FiniteMemoryFunction(alphabet, depth, np.full(alphabet ** depth, float(value)))


def indicator(alphabet: int, word: Sequence[int]) -> FiniteMemoryFunction:
    """Indicator of the cylinder [word]."""
    symbols = validate_word(word, alphabet)
    table = np.zeros(alphabet ** len(symbols))
    table[word_index(symbols, alphabet)] = 1.0
    return FiniteMemoryFunction(alphabet, len(symbols), table)


def extend_depth(f: FiniteMemoryFunction, depth: int) -> FiniteMemoryFunction:
    """Re-represents f at a larger depth; every value is copied from the depth-k prefix."""
    if depth < f.depth:
        raise DepthError(f"cannot extend a depth-{f.depth} function down to depth {depth}")
    if depth == f.depth:
        return f
    return FiniteMemoryFunction(f.alphabet, depth, np.repeat(f.values, f.alphabet ** (depth - f.depth)))


def compose_shift(f: FiniteMemoryFunction) -> FiniteMemoryFunction:
    """f∘σ: the depth grows by one and the new first symbol is ignored."""
    return FiniteMemoryFunction(f.alphabet, f.depth + 1, np.tile(f.values, f.alphabet))


def compose_shift_power(f: FiniteMemoryFunction, n: int) -> FiniteMemoryFunction:
    """f∘σⁿ."""
    if n < 0:
        raise ValidationError(f"shift power must be nonnegative, got {n}")
    return FiniteMemoryFunction(f.alphabet, f.depth + n, np.tile(f.values, f.alphabet ** n))


def check_same_alphabet(*functions) -> int:
    alphabets = {g.alphabet for g in functions}
    if len(alphabets) != 1:
        raise AlphabetMismatchError(f"operands use different alphabets: {sorted(alphabets)}")
    return alphabets.pop()


def to_common_depth(*functions: FiniteMemoryFunction) -> Tuple[FiniteMemoryFunction, ...]:
    """Extends every operand to the largest depth among them."""
    check_same_alphabet(*functions)
    depth = max(g.depth for g in functions)
    return tuple(extend_depth(g, depth) for g in functions)


def reverse_arguments(f: FiniteMemoryFunction) -> FiniteMemoryFunction:
    """The table with word order reversed: g(x₁…x_k) = f(x_k…x₁)."""
    if f.depth <= 1:
        return f
    shape = (f.alphabet,) * f.depth
    reversed_table = np.transpose(f.values.reshape(shape), axes=tuple(reversed(range(f.depth))))
    return FiniteMemoryFunction(f.alphabet, f.depth, reversed_table.reshape(-1))


# ======================================================================================
# SECTION 3: POINTWISE ALGEBRA
# ======================================================================================

def add(f: FiniteMemoryFunction, g: FiniteMemoryFunction) -> FiniteMemoryFunction:
    f, g = to_common_depth(f, g)
    return FiniteMemoryFunction(f.alphabet, f.depth, f.values + g.values)


def subtract(f: FiniteMemoryFunction, g: FiniteMemoryFunction) -> FiniteMemoryFunction:
    f, g = to_common_depth(f, g)
    return FiniteMemoryFunction(f.alphabet, f.depth, f.values - g.values)


def multiply(f: FiniteMemoryFunction, g: FiniteMemoryFunction) -> FiniteMemoryFunction:
    f, g = to_common_depth(f, g)
    return FiniteMemoryFunction(f.alphabet, f.depth, f.values * g.values)


def scale(f: FiniteMemoryFunction, factor: float) -> FiniteMemoryFunction:
    return FiniteMemoryFunction(f.alphabet, f.depth, f.values * float(factor))


def shift_by(f: FiniteMemoryFunction, c: float) -> FiniteMemoryFunction:
    """f + c for a real constant c."""
    return FiniteMemoryFunction(f.alphabet, f.depth, f.values + float(c))


def exp(f: FiniteMemoryFunction) -> FiniteMemoryFunction:
    return FiniteMemoryFunction(f.alphabet, f.depth, np.exp(f.values))


def log(f: FiniteMemoryFunction) -> FiniteMemoryFunction:
    if np.any(f.values <= 0.0):
        raise DomainError(f"log of a table with nonpositive entries (min {f.values.min():.3e})")
    return FiniteMemoryFunction(f.alphabet, f.depth, np.log(f.values))


def linear_combination(coefficients: Sequence[float], functions: Sequence[FiniteMemoryFunction]) -> FiniteMemoryFunction:
    """Σ c_j f_j at the common depth of the f_j."""
    if len(coefficients) != len(functions) or not functions:
        raise ValidationError("linear_combination needs one coefficient per function")
    aligned = to_common_depth(*functions)
    table = np.zeros_like(aligned[0].values)
    for c, g in zip(coefficients, aligned):
        table = table + float(c) * g.values
    return FiniteMemoryFunction(aligned[0].alphabet, aligned[0].depth, table)


_POINTWISE_OPS: Dict[str, Callable[..., FiniteMemoryFunction]] = {
    "add": add,
    "subtract": subtract,
    "multiply": multiply,
    "scale": scale,
    "exp": exp,
    "log": log,
}


def pointwise(op: str, *args) -> FiniteMemoryFunction:
    """
    Dispatches a named elementwise operation.

    Args:
        op (str): One of add, subtract, multiply, scale, exp, log.
        *args: Operands; `scale` takes (f, factor).

    Returns:
        FiniteMemoryFunction: The result at the common depth of the operands.
    """
    try:
        handler = _POINTWISE_OPS[op]
    except KeyError:
        raise ValidationError(f"unknown pointwise operation '{op}'; expected one of {sorted(_POINTWISE_OPS)}")
    return handler(*args)


def max_abs_difference(f: FiniteMemoryFunction, g: FiniteMemoryFunction) -> float:
    """Sup-norm distance after bringing both tables to a common depth."""
    f, g = to_common_depth(f, g)
    return float(np.max(np.abs(f.values - g.values)))
