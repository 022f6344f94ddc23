# analysis/info_geom.py - Tangent vectors, asymptotic variance, Fisher information and the KL expansion

# --- Core & Third-Party Imports ---
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import pandas as pd

from config import settings
from core import measure as msr
from core.errors import NumericError, PreconditionError, ValidationError
from core.measure import EquilibriumState, SuitableMeasure
from core.symbolic import (
    FiniteMemoryFunction,
    add,
    compose_shift,
    multiply,
    scale,
    shift_by,
    subtract,
)
from core.transfer import apply_ruelle, equilibrium, pressure

logger = logging.getLogger(__name__)

KL_TAYLOR_COLUMNS = ["theta", "kl", "slope_pred", "curvature_pred", "second_moment_pred"]


def _require_invariant(mu: SuitableMeasure, operation: str) -> None:
    if not mu.invariant:
        raise PreconditionError(f"{operation} needs a shift-invariant measure (an equilibrium state)")


def _check_step(h_step: float) -> float:
    if not settings.FD_STEP_MIN <= h_step <= settings.FD_STEP_MAX:
        raise ValidationError(f"finite-difference step {h_step} outside [{settings.FD_STEP_MIN}, {settings.FD_STEP_MAX}]")
    return h_step


# ======================================================================================
# SECTION 1: TANGENT VECTORS
# ======================================================================================

@dataclass(frozen=True)
class TangentVector:
    """A direction ξ at an equilibrium state with L_{log J} ξ = 0 (hence ∫ξ dμ = 0)."""
    base: EquilibriumState
    xi: FiniteMemoryFunction

    def __post_init__(self):
        _require_invariant(self.base, "TangentVector")
        kernel_residual = apply_ruelle(self.base.log_irn, self.xi).sup_norm()
        mean = abs(msr.integrate(self.base, self.xi))
        if kernel_residual > settings.TANGENT_TOL or mean > settings.TANGENT_TOL:
            raise PreconditionError(
                f"xi is not tangent: sup|Lξ| = {kernel_residual:.3e}, |∫ξ dμ| = {mean:.3e}; use tangent_project")


def tangent_project(mu: EquilibriumState, eta: FiniteMemoryFunction) -> TangentVector:
    """ξ = η − (L_{log J} η)∘σ, which lies in the kernel of L_{log J}."""
    _require_invariant(mu, "tangent_project")
    image = apply_ruelle(mu.log_irn, eta)
    return TangentVector(mu, subtract(eta, compose_shift(image)))


# ======================================================================================
# SECTION 2: GREEN-KUBO SUMS
# ======================================================================================

def _centered(mu: SuitableMeasure, f: FiniteMemoryFunction) -> FiniteMemoryFunction:
    return shift_by(f, -msr.integrate(mu, f))


def asymptotic_covariance(mu: EquilibriumState, f: FiniteMemoryFunction, g: FiniteMemoryFunction,
                          tol: float = settings.GREEN_KUBO_TOL) -> float:
    """
    Green-Kubo covariance ∫f̄ḡ + Σ_{n≥1} [∫Lⁿ(f̄)ḡ + ∫Lⁿ(ḡ)f̄] dμ.

    Each correlation ∫(ḡ∘σⁿ)f̄ dμ is evaluated exactly as ∫ḡ·Lⁿ(f̄) dμ. The series
    always runs past the combined memory of f, g and log J, then stops after
    GREEN_KUBO_QUIET_TERMS consecutive terms below tol relative to the lag-zero term.
    """
    _require_invariant(mu, "asymptotic_covariance")
    log_jacobian = mu.log_irn
    f_bar, g_bar = _centered(mu, f), _centered(mu, g)
    total = msr.integrate(mu, multiply(f_bar, g_bar))
    threshold = tol * max(1.0, abs(total))
    min_terms = max(f.depth, g.depth) + log_jacobian.depth
    quiet = 0
    f_image, g_image = f_bar, g_bar
    for n in range(1, settings.GREEN_KUBO_MAX_TERMS + 1):
        f_image = apply_ruelle(log_jacobian, f_image)
        g_image = apply_ruelle(log_jacobian, g_image)
        term = msr.integrate(mu, multiply(f_image, g_bar)) + msr.integrate(mu, multiply(g_image, f_bar))
        total += term
        quiet = quiet + 1 if abs(term) < threshold else 0
        if n >= min_terms and quiet >= settings.GREEN_KUBO_QUIET_TERMS:
            logger.debug("Green-Kubo series converged after %d terms", n)
            return total
    raise NumericError("Green-Kubo series did not converge", iterations=settings.GREEN_KUBO_MAX_TERMS)


def asymptotic_variance(mu: EquilibriumState, xi: FiniteMemoryFunction, tol: float = settings.GREEN_KUBO_TOL) -> float:
    """CLT variance of the Birkhoff sums of ξ under μ."""
    return asymptotic_covariance(mu, xi, xi, tol)


# ======================================================================================
# SECTION 3: PRESSURE DERIVATIVES AND FISHER INFORMATION
# ======================================================================================

def pressure_derivatives(log_jacobian: FiniteMemoryFunction, xi: FiniteMemoryFunction,
                         h_step: float = settings.FD_STEP) -> Tuple[float, float]:
    """
    Central differences of θ ↦ P(log J + θξ) at θ = 0.

    Returns:
        tuple: (P′(0), P″(0))
    """
    h = _check_step(h_step)
    plus = pressure(add(log_jacobian, scale(xi, h)))
    zero = pressure(log_jacobian)
    minus = pressure(add(log_jacobian, scale(xi, -h)))
    return (plus - minus) / (2.0 * h), (plus - 2.0 * zero + minus) / (h * h)


def fisher_information(tangent: TangentVector) -> float:
    """∫ξ² dμ for a tangent vector."""
    return msr.integrate(tangent.base, multiply(tangent.xi, tangent.xi))


def fisher_at_time_n(mu: EquilibriumState, xi: FiniteMemoryFunction, n: int,
                     h_step: float = settings.FD_STEP) -> float:
    """
    Fisher information of the length-(n−1) cylinder marginals along θ ↦ equilibrium(log J + θξ).

    Args:
        mu (EquilibriumState): Base point with log-Jacobian log J.
        xi (FiniteMemoryFunction): Direction.
        n (int): Time, 1 ≤ n ≤ FISHER_TIME_MAX.
        h_step (float): Central-difference step in θ.

    Returns:
        float: Σ_w μ([w])·V(w)² with V(w) = ∂_θ log μ_θ([w]) at θ = 0.
    """
    _require_invariant(mu, "fisher_at_time_n")
    if not 1 <= n <= settings.FISHER_TIME_MAX:
        raise ValidationError(f"time n must lie in 1..{settings.FISHER_TIME_MAX}, got {n}")
    h = _check_step(h_step)
    length = n - 1
    plus = np.log(msr.cylinder_weights(equilibrium(add(mu.log_irn, scale(xi, h))), length))
    minus = np.log(msr.cylinder_weights(equilibrium(add(mu.log_irn, scale(xi, -h))), length))
    score = (plus - minus) / (2.0 * h)
    return float(msr.cylinder_weights(mu, length) @ (score * score))


# ======================================================================================
# SECTION 4: KL EXPANSION
# ======================================================================================

def kl_taylor(mu1: EquilibriumState, mu2: EquilibriumState, xi: FiniteMemoryFunction,
              theta_grid: Sequence[float]) -> pd.DataFrame:
    """
    kl(μ₁, equilibrium(log J₂ + θξ)) on a grid, with the predicted first and second derivatives at 0.

    curvature_pred is the asymptotic variance of ξ under μ₂, the true second derivative.
    second_moment_pred is the plain ∫ξ² dμ₂; the two agree when ξ is tangent at μ₂.

    Returns:
        pd.DataFrame: Columns theta, kl, slope_pred, curvature_pred, second_moment_pred.
    """
    _require_invariant(mu1, "kl_taylor")
    _require_invariant(mu2, "kl_taylor")
    thetas = [float(t) for t in theta_grid]
    if any(abs(t) > settings.THETA_MAX for t in thetas):
        raise ValidationError(f"theta values must lie in [-{settings.THETA_MAX}, {settings.THETA_MAX}]")
    slope = -msr.integrate(mu1, xi) + msr.integrate(mu2, xi)
    curvature = asymptotic_variance(mu2, xi)
    second_moment = msr.integrate(mu2, multiply(xi, xi))
    rows = []
    for theta in thetas:
        perturbed = equilibrium(add(mu2.log_irn, scale(xi, theta)))
        rows.append({"theta": theta, "kl": msr.kl_divergence(mu1, perturbed), "slope_pred": slope,
                     "curvature_pred": curvature, "second_moment_pred": second_moment})
    return pd.DataFrame(rows, columns=KL_TAYLOR_COLUMNS)


def kl_cubic_constant(table: pd.DataFrame) -> float:
    """
    Smallest C with |kl − slope_pred·θ − curvature_pred·θ²/2| ≤ C·|θ|³ on the nonzero rows.

    Args:
        table (pd.DataFrame): Output of kl_taylor.

    Returns:
        float: The remainder constant C (0.0 when every row has θ = 0).
    """
    theta = table["theta"].to_numpy()
    remainder = np.abs(table["kl"].to_numpy() - table["slope_pred"].to_numpy() * theta
                       - 0.5 * table["curvature_pred"].to_numpy() * theta ** 2)
    nonzero = theta != 0.0
    if not nonzero.any():
        return 0.0
    return float(np.max(remainder[nonzero] / np.abs(theta[nonzero]) ** 3))


def fit_kl_quadratic(table: pd.DataFrame) -> Tuple[float, float]:
    """Least-squares quadratic through (theta, kl); returns the fitted (slope, curvature) at 0."""
    if len(table) < 3:
        raise ValidationError("a quadratic fit needs at least three theta values")
    c2, c1, _ = np.polyfit(table["theta"].to_numpy(), table["kl"].to_numpy(), 2)
    return float(c1), float(2.0 * c2)


def relaxation_sign(mu1: SuitableMeasure, xi: FiniteMemoryFunction) -> Tuple[float, int]:
    """The value −∫ξ dμ₁ and its sign; reported, never asserted."""
    value = -msr.integrate(mu1, xi)
    return value, int(np.sign(value))
