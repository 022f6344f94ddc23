# app/cli.py - Command routing, input loading and report emission for the engine

# --- Core & Third-Party Imports ---
import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError as SchemaError

from analysis import info_geom, involution, maxent_thermo, second_law
from app.reports import (
    CheckReport,
    FamilyFile,
    MatrixFile,
    MeasureFile,
    PotentialFile,
    RunConfig,
    ThermoReport,
)
from app.verify_suite import run_suite
from config import checks, settings
from core import measure as msr
from core.errors import ConsistencyError, NumericError, ValidationError
from core.measure import SuitableMeasure
from core.symbolic import FiniteMemoryFunction
from core.transfer import equilibrium, jacobian_residual, perron, variational_gap
from utils.helpers import emit, file_hash, load_model, render_csv, render_json, to_jsonable

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BREACH = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

CommandResult = Tuple[ThermoReport, Optional[pd.DataFrame]]

FILE_OPTIONS = ("potential", "jacobian", "jacobian1", "measure", "measure2", "matrix", "family")


# ======================================================================================
# SECTION 1: INPUT LOADING
# ======================================================================================

def _require(config: RunConfig, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(config, name) is None]
    if missing:
        raise ValidationError(f"'{config.command}' needs {', '.join(missing)}")


def load_potential(file_name: str) -> FiniteMemoryFunction:
    return load_model(file_name, PotentialFile).to_function()


def promote(mu: SuitableMeasure) -> SuitableMeasure:
    """Returns the equilibrium state when `mu` is one, so invariant-only operations accept it."""
    if jacobian_residual(mu.log_irn) > settings.JACOBIAN_TOL:
        return mu
    candidate = equilibrium(mu.log_irn)
    return candidate if msr.measures_equal(candidate, mu, tol=settings.IRN_TOL) else mu


def load_measure(file_name: str) -> SuitableMeasure:
    payload = load_model(file_name, MeasureFile)
    return promote(msr.from_dict(payload.model_dump()))


def load_matrix_measure(file_name: str) -> SuitableMeasure:
    payload = load_model(file_name, MatrixFile)
    P = np.asarray(payload.matrix, dtype=np.float64)
    if payload.z is None:
        return msr.markov_invariant(P)
    return msr.markov_noninvariant(P, payload.z)


def load_family(file_name: str, v0: float = 0.0) -> maxent_thermo.PotentialFamily:
    payload = load_model(file_name, FamilyFile)
    if payload.generator is None:
        return maxent_thermo.PotentialFamily(tuple(f.to_function() for f in payload.constraints))
    base = [f.to_function() for f in payload.generator.base]
    direction = [f.to_function() for f in payload.generator.direction]
    return maxent_thermo.affine_family(base, direction, v0=v0)


def measure_from(config: RunConfig, option: str = "measure") -> SuitableMeasure:
    """A measure from --measure (or --measure2), else from --matrix, else the equilibrium of --potential."""
    if getattr(config, option) is not None:
        return load_measure(getattr(config, option))
    if option == "measure" and config.matrix is not None:
        return load_matrix_measure(config.matrix)
    if option == "measure" and config.potential is not None:
        return equilibrium(load_potential(config.potential))
    raise ValidationError(f"'{config.command}' needs --{option}"
                          + (", --matrix or --potential" if option == "measure" else ""))


def jacobian_from(config: RunConfig) -> FiniteMemoryFunction:
    _require(config, "jacobian")
    return load_potential(config.jacobian)


def _report(config: RunConfig, values: Dict, checks_run: Sequence[CheckReport] = (),
            labels: Sequence[str] = ()) -> ThermoReport:
    inputs = {name: file_hash(getattr(config, name)) for name in FILE_OPTIONS if getattr(config, name) is not None}
    return ThermoReport(
        command=config.command,
        seed=config.seed,
        inputs=inputs,
        tolerances={check.check: check.tolerance for check in checks_run},
        values=to_jsonable(values),
        labels=list(labels),
        checks=list(checks_run),
    )


# ======================================================================================
# SECTION 2: COMMAND HANDLERS
# ======================================================================================

def cmd_pressure(config: RunConfig) -> CommandResult:
    _require(config, "potential")
    A = load_potential(config.potential)
    data = perron(A)
    values = {"pressure": float(np.log(data.eigenvalue)), "eigenvalue": data.eigenvalue}
    return _report(config, values), None


def cmd_equilibrium(config: RunConfig) -> CommandResult:
    _require(config, "potential")
    A = load_potential(config.potential)
    mu = equilibrium(A)
    gap = variational_gap(A)
    weights = msr.cylinder_weights(mu, config.depth)
    values = {**mu.to_dict(), "pressure": float(np.log(perron(A).eigenvalue)), "entropy": msr.entropy(mu),
              "cylinder_length": config.depth, "cylinder_weights": weights}
    checks_run = [
        CheckReport.from_identity(checks.JACOBIAN_NORMALIZATION, jacobian_residual(mu.log_irn)),
        CheckReport.from_identity(checks.VARIATIONAL_PRINCIPLE, abs(gap)),
        CheckReport.from_identity(checks.TOTAL_MASS, msr.total_mass_residual(mu)),
    ]
    table = pd.DataFrame({"word_index": np.arange(weights.size), "weight": weights})
    return _report(config, values, checks_run), table


def cmd_entropy(config: RunConfig) -> CommandResult:
    mu = measure_from(config)
    values = {"entropy": msr.entropy(mu), "invariant": mu.invariant, "depth": mu.depth}
    checks_run = [CheckReport.from_identity(checks.IRN_CONSISTENCY, msr.verify_irn(mu, min(config.depth, 3)))]
    return _report(config, values, checks_run), None


def cmd_kl(config: RunConfig) -> CommandResult:
    mu1 = measure_from(config)
    mu2 = equilibrium(jacobian_from(config)) if config.measure2 is None else measure_from(config, "measure2")
    value = msr.kl_divergence(mu1, mu2)
    checks_run = []
    if mu1.invariant and mu2.invariant:
        checks_run.append(CheckReport.from_identity(checks.KL_NONNEGATIVE, max(0.0, -value)))
    return _report(config, {"kl": value}, checks_run), None


def cmd_push(config: RunConfig) -> CommandResult:
    log_jacobian = jacobian_from(config)
    mu0 = measure_from(config)
    pushed = msr.iterate_push(log_jacobian, mu0, config.n)
    closed_form = msr.iterated_irn(log_jacobian, mu0.log_irn, config.n)
    residual = float(np.max(np.abs(pushed.log_irn.values - closed_form.values))) if config.n > 0 else 0.0
    values = {**pushed.to_dict(), "n": config.n, "entropy": msr.entropy(pushed),
              "entropy_change": msr.entropy(pushed) - msr.entropy(mu0)}
    checks_run = [CheckReport.from_identity(checks.ITERATED_IRN, residual, n=config.n)]
    return _report(config, values, checks_run), None


def cmd_orbit(config: RunConfig) -> CommandResult:
    log_jacobian = jacobian_from(config)
    mu0 = measure_from(config)
    table = msr.weak_convergence_trace(log_jacobian, mu0, config.n, probe_depth=min(config.depth, 4))
    kl_spread = float(table["kl"].max() - table["kl"].min())
    deviations = table["max_deviation"].to_numpy()
    labels = ["deviation_decreasing"] if np.all(np.diff(deviations) < 0.0) else ["deviation_not_monotone"]
    values = {"n": config.n, "probe_depth": min(config.depth, 4), "table": table.to_dict(orient="records")}
    checks_run = [CheckReport.from_identity(checks.WEAK_CONVERGENCE_KL, kl_spread)]
    return _report(config, values, checks_run, labels), table


def cmd_second_law(config: RunConfig) -> CommandResult:
    log_jacobian = jacobian_from(config)
    mu1 = measure_from(config)
    report = second_law.second_law_v1(log_jacobian, mu1)
    checks_run = [
        CheckReport.from_identity(checks.PUSHED_IRN_PRESSURE, abs(report.pressure_logJ2)),
        CheckReport.from_identity(checks.ABSOLUTE_CONTINUITY, report.ac_residual),
        CheckReport.from_identity(checks.SECOND_LAW_ENTROPY_FORMULA, abs(report.h3 - report.h3_via_j1)),
    ]
    labels = []
    if mu1.invariant:
        checks_run.append(CheckReport.from_identity(checks.SECOND_LAW_V1, max(0.0, report.h1 - report.h3)))
    else:
        labels.append("entropy_increase" if report.h3 >= report.h1 else "entropy_decrease_reported")
    return _report(config, report.to_dict(), checks_run, labels), None


def cmd_rrty(config: RunConfig) -> CommandResult:
    log_jacobian = jacobian_from(config)
    mu1 = measure_from(config)
    margin = second_law.rrty_margin(log_jacobian, mu1)
    change = second_law.entropy_change(log_jacobian, mu1)
    residual = max(0.0, -change) if margin >= 0.0 else 0.0
    labels = ["margin_nonnegative" if margin >= 0.0 else "margin_negative",
              "entropy_increase" if change >= 0.0 else "entropy_decrease"]
    checks_run = [CheckReport.from_identity(checks.MARGIN_IMPLIES_INCREASE, residual)]
    return _report(config, {"margin": margin, "entropy_change": change}, checks_run, labels), None


def cmd_fisher(config: RunConfig) -> CommandResult:
    _require(config, "potential")
    mu = equilibrium(jacobian_from(config))
    tangent = info_geom.tangent_project(mu, load_potential(config.potential))
    fisher = info_geom.fisher_information(tangent)
    variance = info_geom.asymptotic_variance(mu, tangent.xi)
    slope, second = info_geom.pressure_derivatives(mu.log_irn, tangent.xi, config.step)
    spread = (max(fisher, variance, second) - min(fisher, variance, second)) / max(fisher, 1e-300)
    values = {"fisher": fisher, "asymptotic_variance": variance, "pressure_second_derivative": second,
              "pressure_first_derivative": slope, "xi": tangent.xi.values}
    if config.n >= 1:
        fisher_n = info_geom.fisher_at_time_n(mu, tangent.xi, config.n, config.step)
        values.update({"n": config.n, "fisher_at_time_n": fisher_n, "fisher_per_time": fisher_n / config.n})
    checks_run = [CheckReport.from_identity(checks.FISHER_THREE_WAY, spread, step=config.step)]
    return _report(config, values, checks_run), None


def cmd_kl_taylor(config: RunConfig) -> CommandResult:
    _require(config, "potential")
    mu1 = measure_from(config)
    if not mu1.invariant:
        raise ValidationError("kl-taylor needs an invariant --measure (an equilibrium state)")
    mu2 = equilibrium(jacobian_from(config))
    table = info_geom.kl_taylor(mu1, mu2, load_potential(config.potential), config.theta_grid)
    slope, curvature = info_geom.fit_kl_quadratic(table)
    values = {"fitted_slope": slope, "fitted_curvature": curvature,
              "slope_pred": float(table["slope_pred"].iloc[0]),
              "curvature_pred": float(table["curvature_pred"].iloc[0]),
              "second_moment_pred": float(table["second_moment_pred"].iloc[0]),
              "cubic_constant": info_geom.kl_cubic_constant(table),
              "table": table.to_dict(orient="records")}
    return _report(config, values), table


def cmd_maxent(config: RunConfig) -> CommandResult:
    _require(config, "family", "x_target")
    family = load_family(config.family, config.v0)
    solution = maxent_thermo.maxent_solve(family, config.x_target, tol=max(config.tol, settings.MAXENT_TOL))
    recovered = maxent_thermo.pressure_gradient(family, solution.z)
    checks_run = [
        CheckReport.from_identity(checks.LEGENDRE_DUALITY, abs(solution.alpha - solution.entropy)),
        CheckReport.from_identity(checks.MAXENT_ROUND_TRIP, float(np.max(np.abs(recovered - solution.x_target)))),
    ]
    return _report(config, solution.to_dict(), checks_run), None


def cmd_susceptibility(config: RunConfig) -> CommandResult:
    _require(config, "family")
    family = load_family(config.family, config.v0)
    if config.z is not None:
        z = np.asarray(config.z)
    elif config.x_target is not None:
        z = maxent_thermo.maxent_solve(family, config.x_target).z
    else:
        z = np.zeros(family.size)
    pair = maxent_thermo.susceptibility(family, z, config.step)
    values = {"z": z, **pair.to_dict()}
    checks_run = [CheckReport.from_identity(checks.SUSCEPTIBILITY_INVERSE, pair.inverse_residual, step=config.step)]
    return _report(config, values, checks_run), None


def cmd_gibbs_eq(config: RunConfig) -> CommandResult:
    _require(config, "potential")
    table = maxent_thermo.gibbs_equation(load_potential(config.potential), config.beta_grid)
    deviation = (table["dh_dE"] - table["beta"]).abs().max(skipna=True)
    residual = float(deviation) if np.isfinite(deviation) else float("inf")
    checks_run = [CheckReport.from_identity(checks.GIBBS_FUNDAMENTAL_EQUATION, residual, h_beta=settings.H_BETA)]
    return _report(config, {"table": table.to_dict(orient="records")}, checks_run), table


def cmd_thermo_op(config: RunConfig) -> CommandResult:
    """--jacobian is the operation J₂; J₁ comes from --jacobian1, else from the IRN of --measure."""
    log_jacobian2 = jacobian_from(config)
    mu1 = measure_from(config)
    log_jacobian1 = mu1.log_irn if config.jacobian1 is None else load_potential(config.jacobian1)
    accounting = maxent_thermo.thermo_operation_accounting(log_jacobian1, log_jacobian2, mu1)
    labels = ["work_nonnegative" if accounting.dW >= 0.0 else "work_negative"]
    checks_run = [CheckReport.from_identity(checks.FIRST_LAW_OPERATION, accounting.first_law_residual)]
    return _report(config, accounting.to_dict(), checks_run, labels), None


def cmd_energy_rate(config: RunConfig) -> CommandResult:
    _require(config, "family")
    family = load_family(config.family, config.v0)
    if config.x_target is None and config.z is None:
        raise ValidationError("'energy-rate' needs --x-target (MaxEnt mode) or --z (fixed multipliers)")
    rate = maxent_thermo.energy_rate_decomposition(family, config.index, config.v0,
                                                   x_target=config.x_target if config.z is None else None,
                                                   z=config.z)
    checks_run = [CheckReport.from_identity(checks.FIRST_LAW_ENERGY_RATE, rate.first_law_residual, h_v=settings.H_V)]
    values = {**rate.to_dict(), "index": config.index, "v0": config.v0}
    return _report(config, values, checks_run), None


def cmd_entropy_production(config: RunConfig) -> CommandResult:
    if config.potential is not None:
        A = load_potential(config.potential)
    elif config.matrix is not None:
        A = load_matrix_measure(config.matrix).log_irn
    else:
        raise ValidationError("'entropy-production' needs --potential or --matrix")
    data = involution.involution_kernel(A)
    values = involution.entropy_production_report(A)
    checks_run = [
        CheckReport.from_identity(checks.INVOLUTION_IDENTITY, data.identity_residual),
        CheckReport.from_identity(checks.ENTROPY_PRODUCTION_NONNEGATIVE, max(0.0, -values["e_p"])),
    ]
    if A.depth == 2:
        checks_run.append(CheckReport.from_identity(checks.ENTROPY_PRODUCTION_AS_KL,
                                                    abs(values["e_p"] - involution.flip_kl(A))))
        checks_run.append(CheckReport.from_identity(checks.EIGENFUNCTION_DUALITY, involution.duality_check(A)))
    return _report(config, values, checks_run), None


# ======================================================================================
# SECTION 3: ROUTING
# ======================================================================================

def get_commands() -> Dict[str, Callable[[RunConfig], CommandResult]]:
    """Subcommand name to handler; `verify-all` is routed separately because it emits a suite report."""
    return {
        "pressure": cmd_pressure,
        "equilibrium": cmd_equilibrium,
        "entropy": cmd_entropy,
        "kl": cmd_kl,
        "push": cmd_push,
        "orbit": cmd_orbit,
        "second-law": cmd_second_law,
        "rrty": cmd_rrty,
        "fisher": cmd_fisher,
        "kl-taylor": cmd_kl_taylor,
        "maxent": cmd_maxent,
        "susceptibility": cmd_susceptibility,
        "gibbs-eq": cmd_gibbs_eq,
        "thermo-op": cmd_thermo_op,
        "energy-rate": cmd_energy_rate,
        "entropy-production": cmd_entropy_production,
    }


COMMAND_NAMES = tuple(get_commands()) + ("verify-all",)


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=settings.ENGINE_NAME,
                                     description="Thermodynamic formalism on full shifts with finite-memory potentials.")
    parser.add_argument("command", choices=COMMAND_NAMES)
    for name in FILE_OPTIONS:
        parser.add_argument(f"--{name}", metavar="FILE")
    parser.add_argument("--n", type=int)
    parser.add_argument("--depth", type=int)
    parser.add_argument("--theta-grid", type=_float_list)
    parser.add_argument("--beta-grid", type=_float_list)
    parser.add_argument("--x-target", type=_float_list)
    parser.add_argument("--z", type=_float_list)
    parser.add_argument("--v0", type=float)
    parser.add_argument("--index", type=int)
    parser.add_argument("--step", type=float)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--out", metavar="FILE")
    parser.add_argument("--format", choices=settings.OUTPUT_FORMATS)
    parser.add_argument("--log-level", default=settings.LOG_LEVEL,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level.upper(), logging.WARNING), format=settings.LOG_FORMAT,
                        datefmt=settings.LOG_DATEFMT, stream=sys.stderr, force=True)


def parse_config(argv: Optional[Sequence[str]]) -> Tuple[RunConfig, str]:
    """Parses argv into a RunConfig; options left unset fall back to the model defaults."""
    arguments = vars(build_parser().parse_args(argv))
    log_level = arguments.pop("log_level")
    options = {key: value for key, value in arguments.items() if value is not None}
    try:
        return RunConfig(**options), log_level
    except SchemaError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ValidationError(f"option --{location.replace('_', '-')}: {first['msg']}")


def _render(config: RunConfig, report, table: Optional[pd.DataFrame]) -> str:
    if config.format == "csv":
        if table is None:
            scalars = {k: v for k, v in report.values.items() if isinstance(v, (int, float, bool)) or v is None}
            table = pd.DataFrame([scalars])
        return render_csv(table)
    return render_json(report)


# ======================================================================================
# SECTION 4: ENTRY POINT
# ======================================================================================

def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs one subcommand.

    Returns:
        int: 0 on success, 1 when verify-all finds a residual breach, 2 on invalid input
        or a failed precondition, 3 when a numerical iteration does not converge.
    """
    try:
        config, log_level = parse_config(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION
    except ValidationError as e:
        configure_logging(settings.LOG_LEVEL)
        logger.error("ERROR: %s", e)
        return EXIT_VALIDATION
    configure_logging(log_level)

    try:
        if config.command == "verify-all":
            suite = run_suite(config.seed, config.trials)
            emit(render_json(suite), config.out)
            return EXIT_OK if suite.passed else EXIT_BREACH
        report, table = get_commands()[config.command](config)
        if config.command == "pressure":
            sys.stdout.write(repr(report.values["pressure"]) + "\n")
            if config.out is not None:
                emit(_render(config, report, table), config.out)
        else:
            emit(_render(config, report, table), config.out)
        if not report.passed:
            logger.warning("WARNING: %s: checks over tolerance: %s", config.command,
                           ", ".join(check.check for check in report.checks if not check.passed))
        return EXIT_OK
    except ValidationError as e:
        logger.error("ERROR: %s: %s", config.command, e)
        return EXIT_VALIDATION
    except NumericError as e:
        logger.error("ERROR: %s: %s", config.command, e)
        return EXIT_NUMERIC
    except ConsistencyError as e:
        logger.error("ERROR: %s: internal identity breach: %s", config.command, e)
        return EXIT_BREACH
