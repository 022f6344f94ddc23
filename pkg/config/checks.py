# config/checks.py - Catalog of the identities the engine checks numerically

from typing import Dict, NamedTuple


class IdentityCheck(NamedTuple):
    tag: str
    statement: str
    tolerance: float
    # Equation reference "<group>.<n>"; groups follow the section banners below.
    equation: str


# --- TRANSFER OPERATOR ---
# Normalization and pressure identities of the Ruelle operator.
JACOBIAN_NORMALIZATION = IdentityCheck(
    "jacobian_normalization",
    "normalize(A) is a Jacobian: sup_x |Σ_a J(a,x) − 1| is zero",
    1e-12,
    "T.1",
)
PRESSURE_OF_JACOBIAN = IdentityCheck(
    "pressure_of_jacobian",
    "the pressure of a normalized log-Jacobian is zero",
    1e-12,
    "T.2",
)
TRANSFER_OF_COMPOSITION = IdentityCheck(
    "transfer_of_composition",
    "L_{log J}(g∘σ) = g for every finite-memory g",
    1e-13,
    "T.3",
)
PRESSURE_CONSTANT_SHIFT = IdentityCheck(
    "pressure_constant_shift",
    "P(A + c) = P(A) + c",
    1e-12,
    "T.4",
)
PRESSURE_COHOMOLOGY = IdentityCheck(
    "pressure_cohomology_invariance",
    "P(A + g∘σ − g) = P(A)",
    1e-11,
    "T.5",
)
VARIATIONAL_PRINCIPLE = IdentityCheck(
    "variational_principle",
    "P(A) = h(μ_A) + ∫A dμ_A",
    1e-12,
    "T.6",
)

# --- MEASURES ---
TOTAL_MASS = IdentityCheck(
    "total_mass",
    "cylinder weights of every length sum to one",
    1e-13,
    "M.1",
)
IRN_CONSISTENCY = IdentityCheck(
    "irn_consistency",
    "μ([a,w]) = J(a,w)·μ([w]) on probe cylinders",
    1e-12,
    "M.2",
)
EQUILIBRIUM_INVARIANCE = IdentityCheck(
    "equilibrium_shift_invariance",
    "Σ_a μ([a,w]) = μ([w]) for an equilibrium state",
    1e-12,
    "M.3",
)
KL_NONNEGATIVE = IdentityCheck(
    "kl_nonnegative",
    "kl(μ₁, μ₂) ≥ 0 for invariant μ₁ and a normalized J₂",
    1e-12,
    "M.4",
)

# --- SECOND LAW ---
KL_INVARIANCE_UNDER_DUAL_PUSH = IdentityCheck(
    "kl_invariance_under_dual_push",
    "kl(μ₁, μ₂) = kl(L*μ₁, L*μ₂)",
    1e-10,
    "S.1",
)
DYNAMICAL_ENTROPY_PRODUCTION = IdentityCheck(
    "dynamical_entropy_production",
    "kl(μ₁, μ₂) = kl(L*μ₁, μ₂) when μ₂ is the equilibrium of J₂",
    1e-10,
    "S.2",
)
ITERATED_IRN = IdentityCheck(
    "iterated_irn_closed_form",
    "the n-fold pushed IRN is J₀(σⁿz)·J(z)/J(σⁿz)",
    1e-12,
    "S.3",
)
KL_ALONG_ORBIT = IdentityCheck(
    "kl_along_orbit",
    "kl(μ_n, μ) = ∫[log J₀ − log J]∘σⁿ dμ_n",
    1e-10,
    "S.4",
)
PUSHED_IRN_PRESSURE = IdentityCheck(
    "pushed_irn_pressure",
    "P(log J₂) = 0 for J₂ the IRN of L*μ₁",
    1e-10,
    "S.5",
)
ABSOLUTE_CONTINUITY = IdentityCheck(
    "absolute_continuity",
    "the equilibrium of log J₂ equals φ·μ₂ on cylinders",
    1e-10,
    "S.6",
)
SECOND_LAW_V1 = IdentityCheck(
    "second_law_v1",
    "h(μ₁) ≤ h(μ₃) for invariant μ₁",
    1e-12,
    "S.7",
)
SECOND_LAW_ENTROPY_FORMULA = IdentityCheck(
    "second_law_entropy_formula",
    "h(μ₃) = −∫log J₁ dμ₃",
    1e-10,
    "S.8",
)
MARGIN_IMPLIES_INCREASE = IdentityCheck(
    "margin_implies_entropy_increase",
    "a nonnegative margin forces h(L*μ₁) ≥ h(μ₁)",
    1e-12,
    "S.9",
)
WEAK_CONVERGENCE_KL = IdentityCheck(
    "weak_convergence_kl_constant",
    "kl(μ_n, μ) stays constant along the orbit while cylinder deviations shrink",
    1e-10,
    "S.10",
)

# --- INFORMATION GEOMETRY ---
TANGENT_KERNEL = IdentityCheck(
    "tangent_kernel",
    "projected directions satisfy L ξ = 0 and ∫ξ dμ = 0",
    1e-12,
    "G.1",
)
FISHER_THREE_WAY = IdentityCheck(
    "fisher_three_way",
    "∫ξ² dμ, the asymptotic variance and P″(0) agree on tangent directions (relative)",
    1e-4,
    "G.2",
)

# --- MAXENT AND THERMODYNAMICS ---
PRESSURE_CONVEXITY = IdentityCheck(
    "pressure_convexity",
    "P(tz + (1−t)z′) ≤ tP(z) + (1−t)P(z′)",
    1e-10,
    "X.1",
)
MAXENT_ROUND_TRIP = IdentityCheck(
    "maxent_round_trip",
    "solving for x = ∇P(z) recovers z",
    1e-8,
    "X.2",
)
LEGENDRE_DUALITY = IdentityCheck(
    "legendre_duality",
    "α(x) = P(z*) − ⟨x, z*⟩ equals the entropy of μ_{z*}",
    1e-8,
    "X.3",
)
SUSCEPTIBILITY_INVERSE = IdentityCheck(
    "susceptibility_inverse",
    "SE = −SP⁻¹ (relative)",
    1e-4,
    "X.4",
)
GIBBS_FUNDAMENTAL_EQUATION = IdentityCheck(
    "gibbs_fundamental_equation",
    "dh/dE = β along β ↦ equilibrium(−βH)",
    1e-3,
    "X.5",
)
FIRST_LAW_OPERATION = IdentityCheck(
    "first_law_operation",
    "dW + dQ = dU for the thermodynamic operation",
    1e-12,
    "X.6",
)
FIRST_LAW_ENERGY_RATE = IdentityCheck(
    "first_law_energy_rate",
    "dW + dQ = dU for rates in the external parameter",
    1e-8,
    "X.7",
)

# --- INVOLUTION ---
INVOLUTION_IDENTITY = IdentityCheck(
    "involution_identity",
    "A(y₁,x) + W(σy|y₁x) − W(y|x) does not depend on x",
    1e-12,
    "I.1",
)
ENTROPY_PRODUCTION_NONNEGATIVE = IdentityCheck(
    "entropy_production_nonnegative",
    "e_p ≥ 0, with equality for reversal-symmetric potentials",
    1e-12,
    "I.2",
)
ENTROPY_PRODUCTION_AS_KL = IdentityCheck(
    "entropy_production_as_kl",
    "e_p equals kl(μ_A, flipped μ_A)",
    1e-10,
    "I.3",
)
EIGENFUNCTION_DUALITY = IdentityCheck(
    "eigenfunction_duality",
    "Σ_y e^{W(y|x)} ν_dual([y]) is proportional to φ_A",
    1e-10,
    "I.4",
)


CHECK_CATALOG: Dict[str, IdentityCheck] = {
    check.tag: check
    for check in list(globals().values())
    if isinstance(check, IdentityCheck)
}
