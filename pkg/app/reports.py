# app/reports.py - Pydantic schemas for input files, run configuration and emitted reports

from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import settings
from config.checks import IdentityCheck
from core.symbolic import FiniteMemoryFunction


# ======================================================================================
# SECTION 1: INPUT FILES
# ======================================================================================

class PotentialFile(BaseModel):
    """{"alphabet": d, "depth": k, "log_values": [d^k reals in index order]}"""
    alphabet: int = Field(ge=settings.ALPHABET_MIN, le=settings.ALPHABET_MAX)
    depth: int = Field(ge=0)
    log_values: List[float]

    @model_validator(mode="after")
    def check_table_size(self):
        if len(self.log_values) != self.alphabet ** self.depth:
            raise ValueError(f"log_values has {len(self.log_values)} entries, expected {self.alphabet ** self.depth}")
        return self

    def to_function(self) -> FiniteMemoryFunction:
        return FiniteMemoryFunction(self.alphabet, self.depth, np.asarray(self.log_values))


class MeasureFile(BaseModel):
    """{"alphabet": d, "depth": k, "log_irn": [...], "base": [...]}"""
    alphabet: int = Field(ge=settings.ALPHABET_MIN, le=settings.ALPHABET_MAX)
    depth: int = Field(ge=1)
    log_irn: List[float]
    base: List[float]

    @model_validator(mode="after")
    def check_table_sizes(self):
        if len(self.log_irn) != self.alphabet ** self.depth:
            raise ValueError(f"log_irn has {len(self.log_irn)} entries, expected {self.alphabet ** self.depth}")
        if len(self.base) != self.alphabet ** (self.depth - 1):
            raise ValueError(f"base has {len(self.base)} entries, expected {self.alphabet ** (self.depth - 1)}")
        return self


class MatrixFile(BaseModel):
    """Column-stochastic matrix given row-major; an optional z gives a non-stationary start."""
    matrix: List[List[float]]
    convention: Literal["column"]
    z: Optional[List[float]] = None

    @field_validator("matrix")
    @classmethod
    def check_square(cls, value):
        if not value or any(len(row) != len(value) for row in value):
            raise ValueError("matrix must be square")
        return value


class GeneratorSpec(BaseModel):
    kind: Literal["affine"]
    base: List[PotentialFile]
    direction: List[PotentialFile]


class FamilyFile(BaseModel):
    alphabet: int = Field(ge=settings.ALPHABET_MIN, le=settings.ALPHABET_MAX)
    constraints: List[PotentialFile] = Field(min_length=1)
    generator: Optional[GeneratorSpec] = None

    @model_validator(mode="after")
    def check_alphabets(self):
        files = list(self.constraints)
        if self.generator is not None:
            if len(self.generator.base) != len(self.constraints) or len(self.generator.direction) != len(self.constraints):
                raise ValueError("generator needs one base and one direction per constraint")
            files += self.generator.base + self.generator.direction
        if any(f.alphabet != self.alphabet for f in files):
            raise ValueError("every constraint must use the family alphabet")
        return self


# ======================================================================================
# SECTION 2: RUN CONFIGURATION
# ======================================================================================

class RunConfig(BaseModel):
    """Validated command-line options; numeric defaults come from config.settings."""
    model_config = ConfigDict(frozen=True)

    command: str
    potential: Optional[str] = None
    jacobian: Optional[str] = None
    jacobian1: Optional[str] = None
    measure: Optional[str] = None
    measure2: Optional[str] = None
    matrix: Optional[str] = None
    family: Optional[str] = None
    n: int = Field(default=1, ge=0)
    depth: int = Field(default=2, ge=1, le=settings.PROBE_DEPTH_MAX)
    theta_grid: List[float] = Field(default_factory=lambda: [-1e-2, -5e-3, 0.0, 5e-3, 1e-2])
    beta_grid: List[float] = Field(default_factory=lambda: np.geomspace(0.2, 5.0, 20).tolist())
    x_target: Optional[List[float]] = None
    z: Optional[List[float]] = None
    v0: float = 0.0
    index: int = Field(default=0, ge=0)
    step: float = Field(default=settings.FD_STEP, gt=0.0)
    tol: float = Field(default=settings.THEOREM_TOL, gt=0.0)
    seed: int = settings.DEFAULT_SEED
    trials: int = Field(default=settings.RANDOM_TRIALS, ge=1)
    out: Optional[str] = None
    format: Literal["json", "csv"] = settings.DEFAULT_OUTPUT_FORMAT


# ======================================================================================
# SECTION 3: REPORTS
# ======================================================================================

class CheckReport(BaseModel):
    """{"check": tag, "equation": ref, "residual": r, "inputs": {...}, "tolerance": t, "pass": bool}"""
    model_config = ConfigDict(populate_by_name=True)

    check: str
    equation: str
    residual: float
    tolerance: float
    passed: bool = Field(alias="pass")
    inputs: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_identity(cls, identity: IdentityCheck, residual: float, **inputs) -> "CheckReport":
        """Residuals are violation sizes; NaN never passes."""
        residual = float(residual)
        return cls(check=identity.tag, equation=identity.equation, residual=residual,
                   tolerance=identity.tolerance, passed=bool(residual <= identity.tolerance), inputs=inputs)


class ThermoReport(BaseModel):
    """Named scalar outputs of one command plus provenance."""
    command: str
    engine_version: str = settings.ENGINE_VERSION
    seed: int = settings.DEFAULT_SEED
    inputs: Dict[str, str] = Field(default_factory=dict)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    values: Dict[str, Any] = Field(default_factory=dict)
    labels: List[str] = Field(default_factory=list)
    checks: List[CheckReport] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class SuiteReport(BaseModel):
    """Output of the randomized invariant suite."""
    engine_version: str = settings.ENGINE_VERSION
    seed: int
    trials: int
    checks: List[CheckReport]
    findings: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
