# analysis/second_law.py - KL invariance under the dual push and the two Second-Law statements

# --- Core & Third-Party Imports ---
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from config import settings
from core import measure as msr
from core.measure import SuitableMeasure
from core.symbolic import (
    FiniteMemoryFunction,
    compose_shift_power,
    exp,
    extend_depth,
    multiply,
    scale,
    subtract,
)
from core.transfer import apply_ruelle, equilibrium, normalize, perron, pressure

logger = logging.getLogger(__name__)


# ======================================================================================
# SECTION 1: RANDOM INPUTS
# ======================================================================================

def random_potential(rng: np.random.Generator, alphabet: int, depth: int) -> FiniteMemoryFunction:
    """Log-table drawn i.i.d. uniform on RANDOM_LOG_RANGE."""
    low, high = settings.RANDOM_LOG_RANGE
    return FiniteMemoryFunction(alphabet, depth, rng.uniform(low, high, size=alphabet ** depth))


def random_jacobian(rng: np.random.Generator, alphabet: int, depth: int) -> FiniteMemoryFunction:
    """Normalized log-Jacobian of a random potential."""
    return normalize(random_potential(rng, alphabet, depth))


def random_measure(rng: np.random.Generator, alphabet: int, depth: int, invariant: bool = True) -> SuitableMeasure:
    """
    Equilibrium state of a random potential, or (invariant=False) that state pushed once
    by an independent random Jacobian, which breaks shift-invariance.
    """
    mu = equilibrium(random_potential(rng, alphabet, depth))
    if invariant:
        return mu
    return msr.dual_push(random_jacobian(rng, alphabet, max(depth - 1, 1)), mu)


# ======================================================================================
# SECTION 2: KL INVARIANCE
# ======================================================================================

def cg_entropy_production(log_jacobian: FiniteMemoryFunction, mu1: SuitableMeasure, mu2: SuitableMeasure) -> float:
    """kl(μ₁, μ₂) − kl(L*μ₁, L*μ₂); the dual push preserves KL, so this vanishes."""
    before = msr.kl_divergence(mu1, mu2)
    after = msr.kl_divergence(msr.dual_push(log_jacobian, mu1), msr.dual_push(log_jacobian, mu2))
    return before - after


def ep_dyn(log_jacobian2: FiniteMemoryFunction, mu1: SuitableMeasure) -> float:
    """kl(μ₁, μ₂) − kl(L*μ₁, μ₂) with μ₂ the equilibrium of log J₂."""
    mu2 = equilibrium(log_jacobian2)
    return msr.kl_divergence(mu1, mu2) - msr.kl_divergence(msr.dual_push(log_jacobian2, mu1), mu2)


def kl_along_orbit(log_jacobian: FiniteMemoryFunction, mu0: SuitableMeasure, n: int) -> Tuple[float, float]:
    """
    KL of the n-th pushed measure against the equilibrium, and the same number from the
    closed form of the iterated IRN.

    Returns:
        tuple: (kl(μ_n, μ), ∫[log J₀∘σⁿ − log J∘σⁿ] dμ_n)
    """
    mu_n = msr.iterate_push(log_jacobian, mu0, n)
    kl_value = msr.kl_divergence(mu_n, equilibrium(log_jacobian))
    integrand = subtract(compose_shift_power(mu0.log_irn, n), compose_shift_power(log_jacobian, n))
    return kl_value, msr.integrate(mu_n, integrand)


# ======================================================================================
# SECTION 3: SECOND LAW, VERSION 1
# ======================================================================================

@dataclass(frozen=True)
class SecondLawReport:
    h1: float
    h2: float
    h3: float
    h3_via_j1: float
    pressure_logJ2: float
    ac_residual: float

    @property
    def entropy_gain(self) -> float:
        return self.h3 - self.h1

    def to_dict(self) -> Dict:
        return {**asdict(self), "entropy_gain": self.entropy_gain}


def second_law_v1(log_jacobian: FiniteMemoryFunction, mu1: SuitableMeasure) -> SecondLawReport:
    """
    Pushes μ₁, takes the IRN J₂ of the result and compares μ₁ with the equilibrium μ₃ of log J₂.

    Args:
        log_jacobian (FiniteMemoryFunction): Normalized log-Jacobian J.
        mu1 (SuitableMeasure): Starting measure with IRN J₁.

    Returns:
        SecondLawReport: entropies h(μ₁), h(μ₂), h(μ₃), −∫log J₁ dμ₃, P(log J₂) and the
        residual of μ₃ = φ·μ₂ on cylinders of length k₂.
    """
    mu2 = msr.dual_push(log_jacobian, mu1)
    log_j2 = msr.irn_of(mu2)
    data = perron(log_j2)
    mu3 = equilibrium(log_j2)

    length = mu2.depth
    density = extend_depth(data.eigenfunction(), length).values
    ac_residual = float(np.max(np.abs(msr.cylinder_weights(mu3, length)
                                      - density * msr.cylinder_weights(mu2, length))))
    report = SecondLawReport(
        h1=msr.entropy(mu1),
        h2=msr.entropy(mu2),
        h3=msr.entropy(mu3),
        h3_via_j1=-msr.integrate(mu3, mu1.log_irn),
        pressure_logJ2=float(np.log(data.eigenvalue)),
        ac_residual=ac_residual,
    )
    logger.info("second_law_v1: h1=%.12f h3=%.12f P(log J2)=%.3e", report.h1, report.h3, report.pressure_logJ2)
    return report


# ======================================================================================
# SECTION 4: SECOND LAW, VERSION 2
# ======================================================================================

def rrty_integrand(log_jacobian: FiniteMemoryFunction) -> FiniteMemoryFunction:
    """x ↦ Σ_a J(a,x)²/J(x), a function of the first k_J coordinates."""
    squares = apply_ruelle(log_jacobian, exp(log_jacobian))
    return multiply(extend_depth(squares, log_jacobian.depth), exp(scale(log_jacobian, -1.0)))


def rrty_margin(log_jacobian: FiniteMemoryFunction, mu1: SuitableMeasure) -> float:
    """1 − ∫ Σ_a J(a,x)²/J(x) dμ₁; a nonnegative margin guarantees entropy does not drop under the push."""
    msr.require_jacobian(log_jacobian)
    return 1.0 - msr.integrate(mu1, rrty_integrand(log_jacobian))


def entropy_change(log_jacobian: FiniteMemoryFunction, mu1: SuitableMeasure) -> float:
    """h(L*μ₁) − h(μ₁)."""
    return msr.entropy(msr.dual_push(log_jacobian, mu1)) - msr.entropy(mu1)


def search_entropy_decrease(alphabet: int, depth: int, trials: int = settings.RANDOM_TRIALS,
                            seed: int = settings.DEFAULT_SEED) -> pd.DataFrame:
    """
    Randomized search for pairs (J, μ₁) where entropy drops under the push, and for
    pairs where the margin is negative although entropy still rises.

    Returns:
        pd.DataFrame: One row per witness with columns trial, kind, margin, entropy_change.
    """
    rng = np.random.default_rng(seed)
    witnesses = []
    for trial in range(trials):
        log_jacobian = random_jacobian(rng, alphabet, depth)
        mu1 = random_measure(rng, alphabet, depth, invariant=bool(trial % 2))
        margin = rrty_margin(log_jacobian, mu1)
        change = entropy_change(log_jacobian, mu1)
        if change < 0.0:
            witnesses.append({"trial": trial, "kind": "entropy_decrease", "margin": margin, "entropy_change": change})
        elif margin < 0.0:
            witnesses.append({"trial": trial, "kind": "negative_margin_entropy_increase",
                              "margin": margin, "entropy_change": change})
    logger.info("search_entropy_decrease: %d witnesses in %d trials (seed %d)", len(witnesses), trials, seed)
    return pd.DataFrame(witnesses, columns=["trial", "kind", "margin", "entropy_change"])


def maximal_entropy_rigidity(log_jacobian: FiniteMemoryFunction) -> Dict[str, float]:
    """
    Pushes the maximal-entropy measure by J.

    Returns:
        dict: cylinder_deviation at depth k+1 between the push and the original, and
        jacobian_deviation = sup|J − 1/d|. The first is zero only when the second is.
    """
    d = log_jacobian.alphabet
    mu0 = msr.maximal_entropy(d)
    pushed = msr.dual_push(log_jacobian, mu0)
    return {
        "cylinder_deviation": msr.max_cylinder_deviation(pushed, mu0, log_jacobian.depth + 1),
        "jacobian_deviation": float(np.max(np.abs(np.exp(log_jacobian.values) - 1.0 / d))),
    }


def pressure_of_pushed_irn(log_jacobian: FiniteMemoryFunction, mu1: SuitableMeasure) -> float:
    """P(log J₂) for J₂ the IRN of L*μ₁; zero because μ₂ is an eigenprobability of L_{log J₂}."""
    return pressure(msr.irn_of(msr.dual_push(log_jacobian, mu1)))
