# analysis/maxent_thermo.py - Pressure surfaces, MaxEnt duality, susceptibilities and energy accounting

# --- Core & Third-Party Imports ---
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import linalg

from config import settings
from core import measure as msr
from core.errors import (
    HypothesisAError,
    InfeasibleTargetError,
    NumericError,
    ValidationError,
)
from core.measure import SuitableMeasure
from core.symbolic import (
    FiniteMemoryFunction,
    add,
    check_same_alphabet,
    extend_depth,
    linear_combination,
    scale,
    to_common_depth,
)
from core.transfer import equilibrium, pressure
from analysis.info_geom import asymptotic_covariance

logger = logging.getLogger(__name__)

Generator = Callable[[float], Sequence[FiniteMemoryFunction]]

# Central five-point stencil for a first derivative.
_FIVE_POINT_OFFSETS = (-2, -1, 1, 2)
_FIVE_POINT_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


# ======================================================================================
# SECTION 1: CONSTRAINT FAMILIES
# ======================================================================================

@dataclass(frozen=True)
class PotentialFamily:
    """
    Constraint functions f₁…f_m, optionally parametrized by an external variable v.

    `constraints` are the functions at the reference parameter; `generator(v)` returns
    the whole list at parameter v.
    """
    constraints: tuple
    generator: Optional[Generator] = None

    def __post_init__(self):
        constraints = tuple(self.constraints)
        if not constraints:
            raise ValidationError("a potential family needs at least one constraint")
        check_same_alphabet(*constraints)
        object.__setattr__(self, "constraints", constraints)

    @property
    def alphabet(self) -> int:
        return self.constraints[0].alphabet

    @property
    def size(self) -> int:
        return len(self.constraints)

    def potential(self, z: Sequence[float]) -> FiniteMemoryFunction:
        """Σ z_j f_j."""
        z = np.asarray(z, dtype=np.float64).reshape(-1)
        if z.size != self.size:
            raise ValidationError(f"expected {self.size} multipliers, got {z.size}")
        if not np.all(np.isfinite(z)):
            raise ValidationError("multipliers must be finite")
        return linear_combination(z, self.constraints)

    def at(self, v: float) -> "PotentialFamily":
        """The family at parameter v."""
        if self.generator is None:
            raise ValidationError("this family has no parameter generator")
        return PotentialFamily(tuple(self.generator(v)), self.generator)


def affine_generator(base: Sequence[FiniteMemoryFunction], direction: Sequence[FiniteMemoryFunction]) -> Generator:
    """v ↦ [base_j + v·direction_j]."""
    if len(base) != len(direction):
        raise ValidationError("affine generator needs one direction per base constraint")
    pairs = [to_common_depth(b, g) for b, g in zip(base, direction)]

    def generate(v: float) -> List[FiniteMemoryFunction]:
        return [add(b, scale(g, v)) for b, g in pairs]

    return generate


def affine_family(base: Sequence[FiniteMemoryFunction], direction: Sequence[FiniteMemoryFunction],
                  v0: float = 0.0) -> PotentialFamily:
    generator = affine_generator(base, direction)
    return PotentialFamily(tuple(generator(v0)), generator)


# ======================================================================================
# SECTION 2: PRESSURE SURFACE AND GRADIENT
# ======================================================================================

def pressure_surface(family: PotentialFamily, z: Sequence[float]) -> float:
    return pressure(family.potential(z))


def pressure_gradient(family: PotentialFamily, z: Sequence[float]) -> np.ndarray:
    """x_j = ∫f_j dμ_z, exact."""
    mu = equilibrium(family.potential(z))
    return np.array([msr.integrate(mu, f) for f in family.constraints])


def susceptibility_green_kubo(family: PotentialFamily, z: Sequence[float]) -> np.ndarray:
    """Hessian of the pressure surface as the Green-Kubo covariance matrix of the constraints under μ_z."""
    mu = equilibrium(family.potential(z))
    m = family.size
    matrix = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            matrix[i, j] = matrix[j, i] = asymptotic_covariance(mu, family.constraints[i], family.constraints[j])
    return matrix


def check_hypothesis_a(family: PotentialFamily, z: Optional[Sequence[float]] = None) -> float:
    """
    Smallest eigenvalue of the susceptibility matrix at z (default 0).

    Raises HypothesisAError when it does not exceed HYPOTHESIS_A_MIN_EIG, i.e. some
    combination of the constraints is cohomologous to a constant.
    """
    z = np.zeros(family.size) if z is None else np.asarray(z, dtype=np.float64)
    smallest = float(linalg.eigvalsh(susceptibility_green_kubo(family, z))[0])
    if smallest <= settings.HYPOTHESIS_A_MIN_EIG:
        raise HypothesisAError(
            f"susceptibility matrix is singular (smallest eigenvalue {smallest:.3e}); drop redundant or constant constraints")
    return smallest


# ======================================================================================
# SECTION 3: MAXENT SOLVER
# ======================================================================================

@dataclass(frozen=True)
class MaxEntSolution:
    """Multipliers z* with ∇P(z*) = x, and the constrained entropy α(x) = P(z*) − ⟨x, z*⟩."""
    z: np.ndarray
    x_target: np.ndarray
    alpha: float
    entropy: float
    iterations: int
    trace: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"z": self.z.tolist(), "x_target": self.x_target.tolist(), "alpha": self.alpha,
                "entropy": self.entropy, "iterations": self.iterations}


def _check_feasible(family: PotentialFamily, x_target: np.ndarray) -> None:
    if x_target.size != family.size:
        raise ValidationError(f"expected {family.size} target values, got {x_target.size}")
    for j, (f, x) in enumerate(zip(family.constraints, x_target)):
        low, high = float(f.values.min()), float(f.values.max())
        if not low < x < high:
            raise InfeasibleTargetError(
                f"target x[{j}] = {x} is outside the achievable open interval ({low}, {high})")


def maxent_solve(family: PotentialFamily, x_target: Sequence[float], tol: float = settings.MAXENT_TOL,
                 z0: Optional[Sequence[float]] = None) -> MaxEntSolution:
    """
    Damped Newton on G(z) = P(z) − ⟨x, z⟩ with the Green-Kubo Hessian.

    Args:
        family (PotentialFamily): Constraints f_j.
        x_target (Sequence[float]): Desired expectations.
        tol (float): Stop when ‖∇P(z) − x‖∞ < tol.
        z0 (Sequence[float], optional): Starting multipliers, default 0.

    Returns:
        MaxEntSolution: The solved multipliers and α(x).
    """
    if tol < settings.MAXENT_TOL:
        raise ValidationError(f"tolerance must be at least {settings.MAXENT_TOL}")
    x = np.asarray(x_target, dtype=np.float64).reshape(-1)
    _check_feasible(family, x)
    z = np.zeros(family.size) if z0 is None else np.asarray(z0, dtype=np.float64).copy()
    check_hypothesis_a(family, z)

    objective = pressure_surface(family, z) - x @ z
    trace = []
    for iteration in range(settings.NEWTON_MAX_ITER + 1):
        gradient = pressure_gradient(family, z) - x
        residual = float(np.max(np.abs(gradient)))
        trace.append(residual)
        logger.debug("maxent Newton step %d: residual %.3e", iteration, residual)
        if residual < tol:
            alpha = pressure_surface(family, z) - x @ z
            entropy = msr.entropy(equilibrium(family.potential(z)))
            logger.info("SUCCESS: maxent_solve converged in %d steps (alpha=%.12f)", iteration, alpha)
            return MaxEntSolution(z, x, float(alpha), entropy, iteration, trace)
        if iteration == settings.NEWTON_MAX_ITER:
            break
        hessian = susceptibility_green_kubo(family, z)
        step = linalg.solve(hessian, -gradient, assume_a="pos")
        scale_factor = 1.0
        for _ in range(settings.NEWTON_MAX_HALVINGS + 1):
            candidate = z + scale_factor * step
            if np.max(np.abs(candidate)) > settings.MAXENT_Z_BOUND:
                scale_factor *= 0.5
                continue
            candidate_objective = pressure_surface(family, candidate) - x @ candidate
            if candidate_objective <= objective + 1e-13 * max(1.0, abs(objective)):
                break
            scale_factor *= 0.5
        else:
            if np.max(np.abs(z + step)) > settings.MAXENT_Z_BOUND:
                raise InfeasibleTargetError(
                    f"multipliers exceed the bound {settings.MAXENT_Z_BOUND}; the target is at the edge of the achievable set")
            raise NumericError("maxent Newton line search failed", iterations=iteration, trace=trace)
        z, objective = candidate, candidate_objective
    raise NumericError("maxent Newton iteration did not converge", iterations=settings.NEWTON_MAX_ITER, trace=trace)


def entropy_of_target(family: PotentialFamily, x_target: Sequence[float]) -> float:
    """α(x), the largest entropy among invariant measures with ∫f_j = x_j."""
    return maxent_solve(family, x_target).alpha


def internal_energy(family: PotentialFamily, z: Sequence[float], mu: SuitableMeasure) -> float:
    """∫Σ z_j f_j dμ."""
    return msr.integrate(mu, family.potential(z))


# ======================================================================================
# SECTION 4: SUSCEPTIBILITY MATRICES
# ======================================================================================

@dataclass(frozen=True)
class SusceptibilityPair:
    """Hessians of the pressure (SP, in z) and of α (SE, in x), plus their cross-checks."""
    sp: np.ndarray
    se: np.ndarray
    sp_green_kubo: np.ndarray
    sp_cross_check: float
    inverse_residual: float

    def to_dict(self) -> Dict:
        return {"SP": self.sp.tolist(), "SE": self.se.tolist(), "SP_green_kubo": self.sp_green_kubo.tolist(),
                "sp_cross_check": self.sp_cross_check, "inverse_residual": self.inverse_residual}


def _pressure_hessian_fd(family: PotentialFamily, z: np.ndarray, h: float) -> np.ndarray:
    m = family.size
    eye = np.eye(m) * h
    center = pressure_surface(family, z)
    hessian = np.zeros((m, m))
    for i in range(m):
        hessian[i, i] = (pressure_surface(family, z + eye[i]) - 2.0 * center
                         + pressure_surface(family, z - eye[i])) / (h * h)
        for j in range(i + 1, m):
            value = (pressure_surface(family, z + eye[i] + eye[j]) - pressure_surface(family, z + eye[i] - eye[j])
                     - pressure_surface(family, z - eye[i] + eye[j])
                     + pressure_surface(family, z - eye[i] - eye[j])) / (4.0 * h * h)
            hessian[i, j] = hessian[j, i] = value
    return hessian


def susceptibility(family: PotentialFamily, z: Sequence[float], h_step: float = settings.FD_STEP) -> SusceptibilityPair:
    """
    SP by central differences of the pressure surface, SE by central differences of
    ∂α/∂x = −z*(x) through the MaxEnt solver, around the dual point x = ∇P(z).
    """
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    check_hypothesis_a(family, z)
    sp = _pressure_hessian_fd(family, z, h_step)
    sp_gk = susceptibility_green_kubo(family, z)
    x = pressure_gradient(family, z)
    m = family.size
    se = np.zeros((m, m))
    for j in range(m):
        offset = np.zeros(m)
        offset[j] = h_step
        z_plus = maxent_solve(family, x + offset, z0=z).z
        z_minus = maxent_solve(family, x - offset, z0=z).z
        se[:, j] = -(z_plus - z_minus) / (2.0 * h_step)
    inverse = linalg.inv(sp_gk)
    inverse_residual = float(np.max(np.abs(se + inverse)) / np.max(np.abs(inverse)))
    return SusceptibilityPair(sp, se, sp_gk, float(np.max(np.abs(sp - sp_gk))), inverse_residual)


# ======================================================================================
# SECTION 5: GIBBS FUNDAMENTAL EQUATION
# ======================================================================================

def helmholtz_free_energy(H: FiniteMemoryFunction, beta: float) -> float:
    """−P(−βH)/β."""
    return -pressure(scale(H, -beta)) / beta


def free_energy_identity_residual(H: FiniteMemoryFunction, beta: float) -> float:
    """|F − (E − h/β)| at the equilibrium of −βH."""
    mu = equilibrium(scale(H, -beta))
    energy = msr.integrate(mu, H)
    return abs(helmholtz_free_energy(H, beta) - (energy - msr.entropy(mu) / beta))


def _energy_entropy(H: FiniteMemoryFunction, beta: float):
    mu = equilibrium(scale(H, -beta))
    return msr.integrate(mu, H), msr.entropy(mu)


def gibbs_equation(H: FiniteMemoryFunction, beta_grid: Sequence[float], h_beta: float = settings.H_BETA) -> pd.DataFrame:
    """
    Energy, entropy and dh/dE along β ↦ equilibrium(−βH).

    dh/dE at each grid point is the ratio of central differences in β with step h_beta;
    E is also recomputed as −dP(−βH)/dβ for cross-checking.

    Returns:
        pd.DataFrame: Columns beta, E, h, dh_dE, E_from_pressure.
    """
    betas = np.asarray(beta_grid, dtype=np.float64).reshape(-1)
    if betas.size == 0:
        raise ValidationError("beta grid is empty")
    if np.any(betas < settings.BETA_MIN) or np.any(betas > settings.BETA_MAX):
        raise ValidationError(f"beta values must lie in [{settings.BETA_MIN}, {settings.BETA_MAX}]")
    if np.any(np.diff(betas) <= 0.0):
        raise ValidationError("beta grid must be strictly increasing")
    rows = []
    for beta in betas:
        energy, entropy = _energy_entropy(H, beta)
        e_plus, h_plus = _energy_entropy(H, beta + h_beta)
        e_minus, h_minus = _energy_entropy(H, beta - h_beta)
        delta_e = e_plus - e_minus
        dh_de = (h_plus - h_minus) / delta_e if abs(delta_e) > 1e-15 else float("nan")
        e_from_pressure = -(pressure(scale(H, -(beta + h_beta))) - pressure(scale(H, -(beta - h_beta)))) / (2.0 * h_beta)
        rows.append({"beta": float(beta), "E": energy, "h": entropy, "dh_dE": dh_de, "E_from_pressure": e_from_pressure})
    return pd.DataFrame(rows, columns=["beta", "E", "h", "dh_dE", "E_from_pressure"])


# ======================================================================================
# SECTION 6: WORK, HEAT AND ENERGY
# ======================================================================================

@dataclass(frozen=True)
class EnergyRate:
    dW: float
    dQ: float
    dU: float
    pressure_p: float

    @property
    def first_law_residual(self) -> float:
        return abs(self.dW + self.dQ - self.dU)

    def to_dict(self) -> Dict:
        return {**asdict(self), "first_law_residual": self.first_law_residual}


def _five_point(values: Sequence, h: float):
    return sum(w * v for w, v in zip(_FIVE_POINT_WEIGHTS, values)) / h


def energy_rate_decomposition(family: PotentialFamily, index: int, v0: float, h_v: float = settings.H_V,
                              x_target: Optional[Sequence[float]] = None,
                              z: Optional[Sequence[float]] = None) -> EnergyRate:
    """
    Work, heat and internal-energy rates of constraint `index` in the external parameter v.

    The measure at v is the MaxEnt state of family.at(v) for x_target, or, when z is
    given instead, the equilibrium of Σ z_j f_j^v. Derivatives in v use five-point
    central stencils, so the generator must be defined on [v0 − 2h_v, v0 + 2h_v].

    Returns:
        EnergyRate: dW = ∫∂_v f_k dμ, dQ = ∫f_k d(∂_v μ), dU = ∂_v ∫f_k^v dμ^v, pressure_p = −dW.
    """
    if family.generator is None:
        raise ValidationError("energy-rate decomposition needs a parametrized family")
    if (x_target is None) == (z is None):
        raise ValidationError("give exactly one of x_target (MaxEnt mode) or z (fixed multipliers)")
    if not 0 <= index < family.size:
        raise ValidationError(f"constraint index {index} out of range 0..{family.size - 1}")

    def measure_at(v: float) -> SuitableMeasure:
        shifted = family.at(v)
        multipliers = z if z is not None else maxent_solve(shifted, x_target).z
        return equilibrium(shifted.potential(multipliers))

    reference = family.at(v0).constraints[index]
    mu0 = measure_at(v0)
    stencil = [v0 + offset * h_v for offset in _FIVE_POINT_OFFSETS]
    f_tables = [family.at(v).constraints[index] for v in stencil]
    measures = [measure_at(v) for v in stencil]

    aligned = to_common_depth(reference, *f_tables)
    length = max([aligned[0].depth, mu0.depth] + [mu.depth for mu in measures])
    df_dv = FiniteMemoryFunction(family.alphabet, aligned[0].depth, _five_point([f.values for f in aligned[1:]], h_v))
    d_weights = _five_point([msr.cylinder_weights(mu, length) for mu in measures], h_v)
    f_k = extend_depth(reference, length).values
    energies = [msr.integrate(mu, f) for mu, f in zip(measures, f_tables)]

    work = msr.integrate(mu0, df_dv)
    heat = float(d_weights @ f_k)
    energy = _five_point(energies, h_v)
    result = EnergyRate(dW=work, dQ=heat, dU=energy, pressure_p=-work)
    logger.info("energy_rate_decomposition: dW=%.6e dQ=%.6e dU=%.6e residual=%.2e",
                work, heat, energy, result.first_law_residual)
    return result


@dataclass(frozen=True)
class OperationAccounting:
    E1: float
    E3: float
    dQ: float
    dW: float
    dU: float

    @property
    def first_law_residual(self) -> float:
        return abs(self.dW + self.dQ - self.dU)

    def to_dict(self) -> Dict:
        return {**asdict(self), "first_law_residual": self.first_law_residual}


def thermo_operation_accounting(log_jacobian1: FiniteMemoryFunction, log_jacobian2: FiniteMemoryFunction,
                                mu1: SuitableMeasure) -> OperationAccounting:
    """
    Heat, work and energy bookkeeping of the operation μ₁ ↦ μ₃ = L*_{log J₂}(μ₁).

    E(μ) = ∫log J₁ dμ − ∫log J₂ dμ is the joint-system energy; the three deltas
    satisfy dW + dQ = dU identically.
    """
    msr.require_jacobian(log_jacobian1)
    mu3 = msr.dual_push(log_jacobian2, mu1)
    j1_on_1, j1_on_3 = msr.integrate(mu1, log_jacobian1), msr.integrate(mu3, log_jacobian1)
    j2_on_1, j2_on_3 = msr.integrate(mu1, log_jacobian2), msr.integrate(mu3, log_jacobian2)
    e1, e3 = j1_on_1 - j2_on_1, j1_on_3 - j2_on_3
    return OperationAccounting(E1=e1, E3=e3, dQ=j2_on_3 - j2_on_1, dW=j1_on_1 - j1_on_3, dU=e1 - e3)
