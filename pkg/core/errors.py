# core/errors.py - Exception hierarchy shared by every engine module

# ======================================================================================
#  Library code raises; the CLI catches at the command boundary and maps the two
#  families below onto exit codes (ValidationError -> 2, NumericError -> 3).
# ======================================================================================


class ThermoError(Exception):
    """Root of every error raised by the engine."""


# --- Validation family (bad inputs, violated preconditions) ---

class ValidationError(ThermoError):
    """Input or precondition problem the caller can fix."""


class DepthError(ValidationError):
    """A requested depth is smaller than the depth of the function it applies to."""


class DomainError(ValidationError):
    """A pointwise operation left its domain (e.g. log of a nonpositive entry)."""


class AlphabetMismatchError(ValidationError):
    """Operands live on full shifts with different alphabet sizes."""


class SymbolError(ValidationError):
    """A word contains a symbol outside 1..d."""


class PreconditionError(ValidationError):
    """An operation's stated precondition does not hold."""


class EnvelopeError(ValidationError):
    """A table would exceed the configured storage envelope."""

    def __init__(self, message: str, *, entries: int, bound: int):
        super().__init__(f"{message} (needs {entries} entries, bound is {bound})")
        self.entries = entries
        self.bound = bound


class InfeasibleTargetError(ValidationError):
    """A MaxEnt target lies outside the achievable expectation set."""


class HypothesisAError(ValidationError):
    """A constraint family is degenerate (singular susceptibility matrix)."""


class UnsupportedDepthError(ValidationError):
    """The operation has no supported implementation at this depth."""


class InputFileError(ValidationError):
    """An input file is missing, unreadable or malformed."""


# --- Numeric family ---

class NumericError(ThermoError):
    """An iterative method failed to converge."""

    def __init__(self, message: str, *, iterations: int, trace=None):
        super().__init__(f"{message} after {iterations} iterations")
        self.iterations = iterations
        self.trace = list(trace) if trace is not None else []


# --- Internal consistency ---

class ConsistencyError(ThermoError):
    """An identity that holds by construction was violated; indicates a bug."""
