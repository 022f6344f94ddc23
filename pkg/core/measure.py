# core/measure.py - Suitable measures with finite-memory IRN, integration, entropy, KL and the dual push

# --- Core & Third-Party Imports ---
import logging
from dataclasses import dataclass
from typing import ClassVar, Dict, Sequence

import numpy as np
import pandas as pd
from scipy import linalg

from config import settings
from core.errors import PreconditionError, ValidationError
from core.symbolic import (
    FiniteMemoryFunction,
    check_envelope,
    check_same_alphabet,
    compose_shift,
    compose_shift_power,
    extend_depth,
    subtract,
    validate_word,
    word_index,
)
from core.transfer import equilibrium, jacobian_residual

logger = logging.getLogger(__name__)


# ======================================================================================
# SECTION 1: MEASURE TYPES
# ======================================================================================

@dataclass(frozen=True)
class SuitableMeasure:
    """
    A probability on the full shift given by its IRN J (depth k) and its marginal on
    words of length k-1.

    Cylinder weights follow from μ([a,w]) = J(a,w)·μ([w]) for |w| ≥ k-1. The
    constructor checks positivity and total mass only; append-consistency of the base
    is left to `verify_irn` so that a corrupted base is detected rather than refused.
    """
    log_irn: FiniteMemoryFunction
    base: np.ndarray

    invariant: ClassVar[bool] = False

    def __post_init__(self):
        if self.log_irn.depth < 1:
            object.__setattr__(self, "log_irn", extend_depth(self.log_irn, 1))
        base = np.array(self.base, dtype=np.float64).reshape(-1)
        expected = self.alphabet ** (self.depth - 1)
        if base.size != expected:
            raise ValidationError(f"base has {base.size} entries, expected {expected} for depth {self.depth}")
        if not np.all(np.isfinite(self.log_irn.values)):
            raise ValidationError("log-IRN table has non-finite entries")
        if not np.all(base > 0.0):
            raise ValidationError("base marginal must be strictly positive")
        if abs(base.sum() - 1.0) > settings.MASS_TOL:
            raise ValidationError(f"base marginal sums to {base.sum():.15g}, expected 1")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)

    @property
    def alphabet(self) -> int:
        return self.log_irn.alphabet

    @property
    def depth(self) -> int:
        return self.log_irn.depth

    def to_dict(self) -> Dict:
        """Measure-file representation."""
        return {"alphabet": self.alphabet, "depth": self.depth,
                "log_irn": self.log_irn.values.tolist(), "base": self.base.tolist()}


@dataclass(frozen=True)
class EquilibriumState(SuitableMeasure):
    """A shift-invariant suitable measure: its IRN is a normalized Jacobian."""

    invariant: ClassVar[bool] = True

    def __post_init__(self):
        super().__post_init__()
        residual = jacobian_residual(self.log_irn)
        if residual > settings.JACOBIAN_TOL:
            raise PreconditionError(f"IRN is not a normalized Jacobian (sup|Σ_a J − 1| = {residual:.3e})")


def from_dict(payload: Dict) -> SuitableMeasure:
    """Builds a measure from the measure-file fields; invariance is not assumed."""
    d, k = int(payload["alphabet"]), int(payload["depth"])
    return SuitableMeasure(FiniteMemoryFunction(d, k, payload["log_irn"]), np.asarray(payload["base"]))


# ======================================================================================
# SECTION 2: CONSTRUCTORS
# ======================================================================================

def _check_probability_vector(p: np.ndarray, label: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if np.any(p <= 0.0):
        raise ValidationError(f"{label} must be strictly positive")
    if abs(p.sum() - 1.0) > settings.EQUALITY_TOL:
        raise ValidationError(f"{label} sums to {p.sum():.15g}, expected 1")
    return p


def bernoulli(p: Sequence[float]) -> EquilibriumState:
    """Independent measure with symbol probabilities p."""
    p = _check_probability_vector(p, "Bernoulli weights")
    return EquilibriumState(FiniteMemoryFunction(p.size, 1, np.log(p)), np.ones(1))


def maximal_entropy(alphabet: int) -> EquilibriumState:
    return bernoulli(np.full(alphabet, 1.0 / alphabet))


def check_stochastic(P: np.ndarray) -> np.ndarray:
    """Validates a positive column-stochastic matrix."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValidationError(f"stochastic matrix must be square, got shape {P.shape}")
    if np.any(P <= 0.0):
        raise ValidationError("stochastic matrix entries must be strictly positive")
    column_sums = P.sum(axis=0)
    if np.max(np.abs(column_sums - 1.0)) > settings.EQUALITY_TOL:
        raise ValidationError(f"columns must sum to 1, got {column_sums.tolist()}")
    return P


def stationary_vector(P: np.ndarray) -> np.ndarray:
    """Stationary π of a column-stochastic matrix: Pπ = π, Σπ = 1."""
    P = check_stochastic(P)
    kernel = linalg.null_space(P - np.eye(P.shape[0]))
    if kernel.shape[1] != 1:
        raise ValidationError(f"stationary vector is not unique (kernel dimension {kernel.shape[1]})")
    pi = kernel[:, 0]
    return np.abs(pi) / np.abs(pi).sum()


def markov_invariant(P: np.ndarray) -> EquilibriumState:
    """
    Stationary Markov measure of a column-stochastic P (P[j, i] is the i → j probability).

    Returns:
        EquilibriumState: depth 2, μ([i,j]) = P_{ji}·π_i, J(i,j) = P_{ji}·π_i/π_j.
    """
    P = check_stochastic(P)
    pi = stationary_vector(P)
    jacobian = P.T * pi[:, None] / pi[None, :]
    return EquilibriumState(FiniteMemoryFunction(P.shape[0], 2, np.log(jacobian).reshape(-1)), pi)


def markov_noninvariant(P: np.ndarray, z: Sequence[float]) -> SuitableMeasure:
    """Markov measure started from z: IRN J^z(i,j) = P_{ji}·z_i/z_j, base z."""
    P = check_stochastic(P)
    z = _check_probability_vector(z, "initial vector z")
    if z.size != P.shape[0]:
        raise ValidationError(f"initial vector has {z.size} entries for a {P.shape[0]}-state chain")
    jacobian = P.T * z[:, None] / z[None, :]
    return SuitableMeasure(FiniteMemoryFunction(P.shape[0], 2, np.log(jacobian).reshape(-1)), z)


# ======================================================================================
# SECTION 3: CYLINDER WEIGHTS AND INTEGRATION
# ======================================================================================

def _prepend_symbols(log_jacobian: FiniteMemoryFunction, weights: np.ndarray, length: int, steps: int) -> np.ndarray:
    """
    Applies W(a,w) = J(a,w)·W(w) `steps` times to a table of length-`length` weights.

    Requires length ≥ J.depth − 1 so that J(a,w) only reads symbols of w.
    """
    d, k = log_jacobian.alphabet, log_jacobian.depth
    factors = np.exp(log_jacobian.values).reshape(d, d ** (k - 1))
    for current in range(length, length + steps):
        prefix = np.arange(d ** current) // d ** (current - k + 1)
        weights = (factors[:, prefix] * weights[None, :]).reshape(-1)
    return weights


def cylinder_weights(mu: SuitableMeasure, length: int) -> np.ndarray:
    """
    Weights of every cylinder of the given length, in word-index order.

    Args:
        mu (SuitableMeasure): The measure.
        length (int): Word length m ≥ 0.

    Returns:
        np.ndarray: d^m weights.
    """
    if length < 0:
        raise ValidationError(f"cylinder length must be nonnegative, got {length}")
    check_envelope(mu.alphabet, length, what="cylinder table")
    k = mu.depth
    if length <= k - 1:
        return mu.base.reshape(mu.alphabet ** length, -1).sum(axis=1)
    return _prepend_symbols(mu.log_irn, mu.base.copy(), k - 1, length - k + 1)


def cylinder_weight(mu: SuitableMeasure, word: Sequence[int]) -> float:
    """μ([w]) for a single word; the empty word has weight 1."""
    symbols = validate_word(word, mu.alphabet)
    m, k, d = len(symbols), mu.depth, mu.alphabet
    if m <= k - 1:
        return float(mu.base.reshape(d ** m, -1)[word_index(symbols, d)].sum())
    weight = mu.base[word_index(symbols[m - k + 1:], d)]
    for i in range(m - k + 1):
        weight *= np.exp(mu.log_irn(symbols[i:i + k]))
    return float(weight)


def integrate(mu: SuitableMeasure, f: FiniteMemoryFunction) -> float:
    """Exact ∫f dμ as a cylinder sum at length max(f.depth, k)."""
    check_same_alphabet(mu.log_irn, f)
    length = max(f.depth, mu.depth)
    return float(cylinder_weights(mu, length) @ extend_depth(f, length).values)


def integrate_on_cylinder(mu: SuitableMeasure, f: FiniteMemoryFunction, word: Sequence[int]) -> float:
    """∫_{[w]} f dμ."""
    check_same_alphabet(mu.log_irn, f)
    symbols = validate_word(word, mu.alphabet)
    length = max(f.depth, mu.depth, len(symbols))
    products = cylinder_weights(mu, length) * extend_depth(f, length).values
    return float(products.reshape(mu.alphabet ** len(symbols), -1)[word_index(symbols, mu.alphabet)].sum())


def reversed_cylinder_weights(mu: SuitableMeasure, length: int) -> np.ndarray:
    """Table whose entry at w is μ([w reversed])."""
    weights = cylinder_weights(mu, length)
    if length <= 1:
        return weights
    shape = (mu.alphabet,) * length
    return np.transpose(weights.reshape(shape), axes=tuple(reversed(range(length)))).reshape(-1)


# ======================================================================================
# SECTION 4: ENTROPY AND DIVERGENCE
# ======================================================================================

def irn_of(mu: SuitableMeasure) -> FiniteMemoryFunction:
    return mu.log_irn


def entropy(mu: SuitableMeasure) -> float:
    """−∫log J dμ in nats; unclamped for non-invariant measures."""
    return -integrate(mu, mu.log_irn)


def kl_divergence(mu1: SuitableMeasure, mu2: SuitableMeasure) -> float:
    """Dynamical KL divergence ∫(log J₁ − log J₂) dμ₁."""
    return integrate(mu1, subtract(mu1.log_irn, mu2.log_irn))


def markov_kl_closed_form(P1: np.ndarray, P2: np.ndarray) -> float:
    """KL rate Σ π₁(i) q₁(i→j) log(q₁(i→j)/q₂(i→j)) between stationary chains."""
    P1, P2 = check_stochastic(P1), check_stochastic(P2)
    pi = stationary_vector(P1)
    return float(np.sum(pi[None, :] * P1 * np.log(P1 / P2)))


# ======================================================================================
# SECTION 5: CONSISTENCY DIAGNOSTICS
# ======================================================================================

def verify_irn(mu: SuitableMeasure, length: int) -> float:
    """
    max |μ([a,w]) − J(a,w)·μ([w])| over words (a,w) of length max(m, k).

    Marginals are right-sums of the weights one symbol deeper, so a base that is not
    append-consistent with J shows up as a nonzero residual.
    """
    if length > settings.PROBE_DEPTH_MAX:
        raise ValidationError(f"verify_irn probes words up to length {settings.PROBE_DEPTH_MAX}, got {length}")
    d, k = mu.alphabet, mu.depth
    m = max(length, k)
    deep = cylinder_weights(mu, m + 1)
    joint = deep.reshape(d ** m, d).sum(axis=1)
    tail = deep.reshape(d ** (m - 1), -1).sum(axis=1)
    factors = np.exp(extend_depth(mu.log_irn, m).values)
    predicted = factors * np.tile(tail, d)
    return float(np.max(np.abs(joint - predicted)))


def append_consistency_residual(mu: SuitableMeasure) -> float:
    """sup_w |base(w) − Σ_b J(w,b)·base(w₂…w_{k−1},b)|."""
    d, k = mu.alphabet, mu.depth
    appended = _prepend_symbols(mu.log_irn, mu.base.copy(), k - 1, 1)
    return float(np.max(np.abs(appended.reshape(d ** (k - 1), d).sum(axis=1) - mu.base)))


def shift_invariance_residual(mu: SuitableMeasure, max_length: int = 4) -> float:
    """max over |w| ≤ max_length of |Σ_a μ([a,w]) − μ([w])|."""
    worst = 0.0
    for m in range(max_length + 1):
        longer = cylinder_weights(mu, m + 1).reshape(mu.alphabet, -1).sum(axis=0)
        worst = max(worst, float(np.max(np.abs(longer - cylinder_weights(mu, m)))))
    return worst


def total_mass_residual(mu: SuitableMeasure, max_length: int = settings.PROBE_DEPTH_MAX) -> float:
    return max(abs(cylinder_weights(mu, m).sum() - 1.0) for m in range(max_length + 1))


def max_cylinder_deviation(mu1: SuitableMeasure, mu2: SuitableMeasure, length: int) -> float:
    check_same_alphabet(mu1.log_irn, mu2.log_irn)
    return float(np.max(np.abs(cylinder_weights(mu1, length) - cylinder_weights(mu2, length))))


def measures_equal(mu1: SuitableMeasure, mu2: SuitableMeasure, tol: float = settings.EQUALITY_TOL) -> bool:
    """Same alphabet and cylinder weights within tol at depth max(k₁, k₂)."""
    if mu1.alphabet != mu2.alphabet:
        return False
    return max_cylinder_deviation(mu1, mu2, max(mu1.depth, mu2.depth)) <= tol


# ======================================================================================
# SECTION 6: THE DUAL PUSH
# ======================================================================================

def require_jacobian(log_jacobian: FiniteMemoryFunction) -> None:
    residual = jacobian_residual(log_jacobian)
    if residual > settings.JACOBIAN_TOL:
        raise PreconditionError(
            f"log J is not a normalized Jacobian (sup|Σ_a J − 1| = {residual:.3e}); normalize the potential first")


def dual_push(log_jacobian: FiniteMemoryFunction, mu1: SuitableMeasure) -> SuitableMeasure:
    """
    μ₃ = L*_{log J}(μ₁).

    Args:
        log_jacobian (FiniteMemoryFunction): A normalized log-Jacobian.
        mu1 (SuitableMeasure): The measure to push.

    Returns:
        SuitableMeasure: Depth max(k₁, k_J) + 1 with IRN J₁(σz)·J(z)/J(σz).
    """
    check_same_alphabet(log_jacobian, mu1.log_irn)
    require_jacobian(log_jacobian)
    d = mu1.alphabet
    depth = max(mu1.depth, log_jacobian.depth) + 1
    check_envelope(d, depth, what="pushed IRN")
    log_irn = extend_depth(compose_shift(mu1.log_irn), depth)
    log_irn = FiniteMemoryFunction(d, depth, log_irn.values
                                   + extend_depth(log_jacobian, depth).values
                                   - extend_depth(compose_shift(log_jacobian), depth).values)
    tail = cylinder_weights(mu1, depth - 2)
    base = np.exp(extend_depth(log_jacobian, depth - 1).values) * np.tile(tail, d)
    logger.debug("dual_push: depth %d -> %d", mu1.depth, depth)
    return SuitableMeasure(log_irn, base / base.sum())


def iterated_irn(log_jacobian: FiniteMemoryFunction, log_irn0: FiniteMemoryFunction, n: int) -> FiniteMemoryFunction:
    """Closed form log J_n = log J₀∘σⁿ + log J − log J∘σⁿ at depth max(k₀, k_J) + n."""
    depth = max(log_irn0.depth, log_jacobian.depth) + n
    check_envelope(log_jacobian.alphabet, depth, what="iterated IRN")
    shifted_irn, jac, shifted_jac = (extend_depth(g, depth) for g in (
        compose_shift_power(log_irn0, n), log_jacobian, compose_shift_power(log_jacobian, n)))
    return FiniteMemoryFunction(log_jacobian.alphabet, depth, shifted_irn.values + jac.values - shifted_jac.values)


def iterate_push(log_jacobian: FiniteMemoryFunction, mu0: SuitableMeasure, n: int) -> SuitableMeasure:
    """n-fold dual push; the envelope is checked before any work is done."""
    if n < 0:
        raise ValidationError(f"push count must be nonnegative, got {n}")
    if n == 0:
        return mu0
    check_envelope(mu0.alphabet, max(mu0.depth, log_jacobian.depth) + n, what=f"{n}-fold pushed IRN")
    mu = mu0
    for _ in range(n):
        mu = dual_push(log_jacobian, mu)
    return mu


def weak_convergence_trace(log_jacobian: FiniteMemoryFunction, mu0: SuitableMeasure,
                           n_max: int, probe_depth: int = 2) -> pd.DataFrame:
    """
    Distance of L*ⁿμ₀ from the equilibrium of log J on probe cylinders, with the KL
    divergence to that equilibrium along the orbit.

    Returns:
        pd.DataFrame: Columns n, max_deviation, kl.
    """
    if probe_depth > 4 or probe_depth < 1:
        raise ValidationError(f"probe depth must lie in 1..4, got {probe_depth}")
    check_envelope(mu0.alphabet, max(mu0.depth, log_jacobian.depth) + n_max, what="orbit IRN")
    target = equilibrium(log_jacobian)
    target_weights = cylinder_weights(target, probe_depth)
    rows = []
    mu = mu0
    for n in range(n_max + 1):
        if n > 0:
            mu = dual_push(log_jacobian, mu)
        deviation = float(np.max(np.abs(cylinder_weights(mu, probe_depth) - target_weights)))
        rows.append({"n": n, "max_deviation": deviation, "kl": kl_divergence(mu, target)})
    logger.info("weak_convergence_trace: %d steps, final deviation %.3e", n_max, rows[-1]["max_deviation"])
    return pd.DataFrame(rows, columns=["n", "max_deviation", "kl"])
