# analysis/involution.py - Involution kernel, dual potential and flip entropy production

# --- Core & Third-Party Imports ---
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from config import settings
from core import measure as msr
from core.errors import ConsistencyError, UnsupportedDepthError, ValidationError
from core.symbolic import (
    FiniteMemoryFunction,
    check_envelope,
    enumerate_words,
    extend_depth,
    reverse_arguments,
    subtract,
    validate_word,
    word_index,
)
from core.transfer import equilibrium, perron

logger = logging.getLogger(__name__)


def _indices(symbols: np.ndarray, alphabet: int) -> np.ndarray:
    """Row-wise word index of a (n, m) array of 0-based symbols."""
    if symbols.shape[1] == 0:
        return np.zeros(symbols.shape[0], dtype=np.int64)
    powers = alphabet ** np.arange(symbols.shape[1] - 1, -1, -1)
    return symbols @ powers


# ======================================================================================
# SECTION 1: KERNEL AND DUAL POTENTIAL
# ======================================================================================

@dataclass(frozen=True)
class InvolutionData:
    """
    Involution kernel of a depth-k potential.

    W[r, c] is W(y|x) with r the index of the past word (y_{k−1},…,y₁), written
    oldest symbol first, and c the index of the future word (x₁,…,x_{k−1}).
    A_dual is the dual potential already carried to one-sided sequences by the flip.
    """
    potential: FiniteMemoryFunction
    reference: tuple
    W: np.ndarray
    dual: FiniteMemoryFunction
    identity_residual: float

    @property
    def depth(self) -> int:
        return self.potential.depth


def _kernel_table(A: FiniteMemoryFunction, reference_index: int) -> np.ndarray:
    d, k = A.alphabet, A.depth
    size = d ** (k - 1)
    rows = np.arange(size)[:, None]
    columns = np.arange(size)[None, :]
    table = np.zeros((size, size))
    for n in range(1, k):
        suffix = (rows % d ** n) * d ** (k - n)
        table += A.values[suffix + columns // d ** (n - 1)] - A.values[suffix + reference_index // d ** (n - 1)]
    return table


def involution_kernel(A: FiniteMemoryFunction, x_ref: Optional[Sequence[int]] = None) -> InvolutionData:
    """
    W(y|x) = Σ_{n=1}^{k−1} [A(y_n…y₁, x₁…x_{k−n}) − A(y_n…y₁, x*₁…x*_{k−n})] and the dual
    potential A_dual(y) = A(y₁,x) + W(y₂…|y₁,x) − W(y₁…|x), which does not depend on x.

    Args:
        A (FiniteMemoryFunction): Potential of depth k.
        x_ref (Sequence[int], optional): Reference future word x* of length k−1, default all ones.

    Returns:
        InvolutionData: Kernel in the gauge W(·|x*) = 0, dual potential and the residual
        of the defining identity over every x.
    """
    d = A.alphabet
    if A.depth == 0:
        A = extend_depth(A, 1)
    k = A.depth
    reference = validate_word(x_ref if x_ref is not None else (1,) * (k - 1), d)
    if len(reference) != k - 1:
        raise ValidationError(f"reference word must have length {k - 1}, got {len(reference)}")
    if k == 1:
        return InvolutionData(A, reference, np.zeros((1, 1)), A, 0.0)
    check_envelope(d, 2 * k - 1, what="involution identity check")

    ref_index = word_index(reference, d)
    W = _kernel_table(A, ref_index)

    y = enumerate_words(d, k) - 1
    first = y[:, 0]
    later_past = _indices(y[:, :0:-1], d)               # (y_k, …, y₂)
    earlier_past = _indices(y[:, k - 2::-1], d)         # (y_{k−1}, …, y₁)
    dual_values = A.values[first * d ** (k - 1) + ref_index] + W[later_past, first * d ** (k - 2) + ref_index // d]
    dual = FiniteMemoryFunction(d, k, dual_values)

    x = np.arange(d ** (k - 1))[None, :]
    identity = (A.values[first[:, None] * d ** (k - 1) + x]
                + W[later_past[:, None], first[:, None] * d ** (k - 2) + x // d]
                - W[earlier_past[:, None], x])
    residual = float(np.max(np.abs(identity - dual_values[:, None])))
    if residual >= settings.EQUALITY_TOL * max(1.0, A.sup_norm()):
        raise ConsistencyError(f"involution identity residual {residual:.3e} exceeds tolerance")
    logger.debug("involution_kernel: depth %d, identity residual %.3e", k, residual)
    return InvolutionData(A, reference, W, dual, residual)


def dual_potential(A: FiniteMemoryFunction, x_ref: Optional[Sequence[int]] = None) -> FiniteMemoryFunction:
    return involution_kernel(A, x_ref).dual


def is_reversal_symmetric(A: FiniteMemoryFunction, tol: float = settings.EQUALITY_TOL) -> bool:
    """A(x₁…x_k) = A(x_k…x₁) for every word."""
    return float(np.max(np.abs(A.values - reverse_arguments(A).values))) < tol


# ======================================================================================
# SECTION 2: ENTROPY PRODUCTION AND THE FLIPPED MEASURE
# ======================================================================================

def entropy_production(A: FiniteMemoryFunction, x_ref: Optional[Sequence[int]] = None) -> float:
    """e_p = ∫(A − A_dual) dμ_A; nonnegative, zero for reversible potentials."""
    dual = dual_potential(A, x_ref)
    return msr.integrate(equilibrium(A), subtract(A, dual))


def entropy_production_report(A: FiniteMemoryFunction) -> Dict:
    return {"e_p": entropy_production(A), "symmetric_detected": is_reversal_symmetric(A), "depth": A.depth}


def dual_equilibrium(A: FiniteMemoryFunction, x_ref: Optional[Sequence[int]] = None) -> msr.EquilibriumState:
    """Equilibrium state of A_dual, the time reversal of μ_A seen on one-sided sequences."""
    return equilibrium(dual_potential(A, x_ref))


def flip_pushforward_weights(A: FiniteMemoryFunction, length: int) -> np.ndarray:
    """
    Length-m cylinder weights of the flipped measure. They coincide with
    reversed_cylinder_weights(μ_A, m).
    """
    if length > settings.PROBE_DEPTH_MAX:
        raise ValidationError(f"cylinder length must be at most {settings.PROBE_DEPTH_MAX}, got {length}")
    return msr.cylinder_weights(dual_equilibrium(A), length)


def flip_kl(A: FiniteMemoryFunction) -> float:
    """kl(μ_A, flipped μ_A), computed from the two IRNs."""
    return msr.kl_divergence(equilibrium(A), dual_equilibrium(A))


# ======================================================================================
# SECTION 3: EIGENFUNCTION DUALITY
# ======================================================================================

def duality_check(A: FiniteMemoryFunction, allow_experimental: bool = False) -> float:
    """
    Builds g(x) = Σ_y e^{W(y|x)} ν_dual([y]) from the dual eigenprobability and returns
    max|g/φ_A − mean| / mean, which vanishes when g is the main eigenfunction of L_A.

    Depth 2 is the supported regime; deeper potentials need allow_experimental=True.
    """
    if A.depth != 2 and not allow_experimental:
        raise UnsupportedDepthError(f"duality_check supports depth-2 potentials, got depth {A.depth}")
    if A.depth < 2:
        raise UnsupportedDepthError("duality_check needs a potential of depth at least 2")
    data = involution_kernel(A)
    d, k = A.alphabet, A.depth
    nu_dual = perron(data.dual).nu
    # ν_dual is indexed by (y₁,…,y_{k−1}); W rows by the reversed word.
    past = enumerate_words(d, k - 1) - 1
    row_of = _indices(past[:, ::-1], d)
    g = np.exp(data.W[row_of, :]).T @ nu_dual
    ratio = g / perron(A).phi
    mean = float(ratio.mean())
    return float(np.max(np.abs(ratio - mean)) / mean)
