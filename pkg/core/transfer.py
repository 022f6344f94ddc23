# core/transfer.py - Ruelle operator, Perron eigendata, pressure and equilibrium states

# --- Core & Third-Party Imports ---
import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np

from config import settings
from core.errors import NumericError
from core.symbolic import (
    FiniteMemoryFunction,
    check_same_alphabet,
    compose_shift,
    extend_depth,
)

logger = logging.getLogger(__name__)


# ======================================================================================
# SECTION 1: THE OPERATOR ON FUNCTIONS
# ======================================================================================

def apply_ruelle(A: FiniteMemoryFunction, f: FiniteMemoryFunction) -> FiniteMemoryFunction:
    """
    (L_A f)(x) = Σ_a e^{A(a,x)} f(a,x).

    Both operands are brought to depth D = max(A.depth, f.depth, 1); the sum over the
    prepended symbol collapses the first axis, so the result has depth D - 1.
    """
    d = check_same_alphabet(A, f)
    depth = max(A.depth, f.depth, 1)
    weights = np.exp(extend_depth(A, depth).values).reshape(d, -1)
    table = extend_depth(f, depth).values.reshape(d, -1)
    return FiniteMemoryFunction(d, depth - 1, np.sum(weights * table, axis=0))


def apply_ruelle_power(A: FiniteMemoryFunction, f: FiniteMemoryFunction, n: int) -> FiniteMemoryFunction:
    """L_A applied n times."""
    result = f
    for _ in range(n):
        result = apply_ruelle(A, result)
    return result


# ======================================================================================
# SECTION 2: TRANSFER MATRIX AND PERRON DATA
# ======================================================================================

@dataclass(frozen=True)
class TransferMatrix:
    """
    Dense matrix realization of L_A on functions of the first k-1 coordinates.

    entries[(a,u₁…u_{k−2}), u] = exp(A(a,u)); the operator acting on function
    vectors is entries.T, and a Jacobian gives a column-stochastic matrix.
    """
    alphabet: int
    state_depth: int
    entries: np.ndarray

    def to_dict(self) -> Dict:
        return {"alphabet": self.alphabet, "state_depth": self.state_depth, "entries": self.entries.tolist()}


def transfer_matrix(A: FiniteMemoryFunction) -> TransferMatrix:
    d = A.alphabet
    if A.depth == 0:
        A = extend_depth(A, 1)
    k = A.depth
    weights = np.exp(A.values).reshape(d, d ** (k - 1))
    if k == 1:
        return TransferMatrix(d, 0, np.array([[weights.sum()]]))
    states = d ** (k - 1)
    columns = np.arange(states)
    rows = np.arange(d)[:, None] * d ** (k - 2) + (columns // d)[None, :]
    entries = np.zeros((states, states))
    entries[rows, np.broadcast_to(columns, rows.shape)] = weights
    return TransferMatrix(d, k - 1, entries)


@dataclass(frozen=True)
class PerronData:
    """Leading eigenvalue with eigenfunction φ and eigenprobability weights ν on (k-1)-words."""
    alphabet: int
    state_depth: int
    eigenvalue: float
    phi: np.ndarray
    nu: np.ndarray
    iterations: int = 0

    def eigenfunction(self) -> FiniteMemoryFunction:
        return FiniteMemoryFunction(self.alphabet, self.state_depth, self.phi)

    def to_dict(self) -> Dict:
        return {"lambda": self.eigenvalue, "phi": self.phi.tolist(), "nu": self.nu.tolist()}


def _power_iteration(operator: np.ndarray, label: str):
    """
    Leading eigenpair of a primitive nonnegative matrix by power iteration.

    The iterate is renormalized to sup-norm 1 every step. Iteration stops once the
    eigenvalue estimate is stable to PERRON_TOL (relative) and the vector has stopped
    moving at the same level.

    Returns:
        tuple: (eigenvalue, vector with max entry 1, iterations used)
    """
    vector = np.ones(operator.shape[0])
    estimate = 0.0
    trace = []
    for iteration in range(1, settings.PERRON_MAX_ITER + 1):
        image = operator @ vector
        new_estimate = float(np.max(image))
        new_vector = image / new_estimate
        value_change = abs(new_estimate - estimate)
        vector_change = float(np.max(np.abs(new_vector - vector)))
        vector, estimate = new_vector, new_estimate
        if iteration <= 10 or iteration % 1000 == 0:
            trace.append(estimate)
        if value_change <= settings.PERRON_TOL * estimate and vector_change <= settings.PERRON_TOL:
            logger.debug("%s power iteration converged in %d steps (lambda=%.15g)", label, iteration, estimate)
            return estimate, vector, iteration
    raise NumericError(f"{label} power iteration did not converge", iterations=settings.PERRON_MAX_ITER, trace=trace)


def perron(A: FiniteMemoryFunction) -> PerronData:
    """
    Perron eigendata of L_A.

    Args:
        A (FiniteMemoryFunction): Finite-valued potential.

    Returns:
        PerronData: λ, φ and ν normalized so that Σν = 1 and Σφν = 1.
    """
    if not np.all(np.isfinite(A.values)):
        raise NumericError("potential has non-finite entries", iterations=0)
    matrix = transfer_matrix(A)
    if matrix.state_depth == 0:
        # One state: λ is the plain sum Σ_a e^{A(a)}.
        return PerronData(A.alphabet, 0, float(matrix.entries[0, 0]), np.ones(1), np.ones(1), 0)
    eigenvalue, phi, used_right = _power_iteration(matrix.entries.T, "eigenfunction")
    _, nu, used_left = _power_iteration(matrix.entries, "eigenprobability")
    nu = nu / nu.sum()
    phi = phi / float(phi @ nu)
    return PerronData(A.alphabet, matrix.state_depth, eigenvalue, phi, nu, max(used_right, used_left))


def pressure(A: FiniteMemoryFunction) -> float:
    """Topological pressure, log of the leading eigenvalue."""
    return float(np.log(perron(A).eigenvalue))


# ======================================================================================
# SECTION 3: NORMALIZATION AND EQUILIBRIUM STATES
# ======================================================================================

def _normalize_with(A: FiniteMemoryFunction, data: PerronData) -> FiniteMemoryFunction:
    depth = max(A.depth, data.state_depth + 1)
    log_phi = np.log(extend_depth(data.eigenfunction(), depth).values)
    log_phi_shift = np.log(extend_depth(compose_shift(data.eigenfunction()), depth).values)
    table = extend_depth(A, depth).values + log_phi - log_phi_shift - np.log(data.eigenvalue)
    return FiniteMemoryFunction(A.alphabet, depth, table)


def normalize(A: FiniteMemoryFunction) -> FiniteMemoryFunction:
    """log J = A + log φ − log φ∘σ − log λ, a normalized Jacobian cohomologous to A − P(A)."""
    return _normalize_with(A, perron(A))


def jacobian_residual(log_jacobian: FiniteMemoryFunction) -> float:
    """sup_x |Σ_a J(a,x) − 1|; zero for a normalized Jacobian."""
    one = FiniteMemoryFunction(log_jacobian.alphabet, 0, np.ones(1))
    return float(np.max(np.abs(apply_ruelle(log_jacobian, one).values - 1.0)))


def equilibrium(A: FiniteMemoryFunction):
    """
    Equilibrium state of A: IRN normalize(A) and base marginal φ·ν.

    Returns:
        EquilibriumState: The shift-invariant Gibbs measure of A.
    """
    from core.measure import EquilibriumState

    data = perron(A)
    log_jacobian = _normalize_with(A, data)
    base = data.phi * data.nu
    return EquilibriumState(log_irn=log_jacobian, base=base / base.sum())


def variational_gap(A: FiniteMemoryFunction) -> float:
    """P(A) − [h(μ_A) + ∫A dμ_A]; vanishes for the equilibrium state."""
    from core.measure import entropy, integrate

    state = equilibrium(A)
    return pressure(A) - (entropy(state) + integrate(state, A))
