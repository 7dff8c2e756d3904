"""Custom exceptions for fgwkit.

Three families matter to the CLI: ``InputError`` (bad data, exit 3),
``NumericalError`` (a solver or generator could not produce a result, exit 4)
and usage errors, which click raises itself (exit 2).
"""


class FgwError(Exception):
    """Base exception for all fgwkit errors."""


class InputError(FgwError):
    """Invalid input data or files."""


class NumericalError(FgwError):
    """A numerical routine failed to produce a valid result."""


class ConfigError(InputError):
    """Configuration error."""


# ── Validation ───────────────────────────────────────────────────


class ValidationError(InputError):
    """Data validation error."""


class DimensionMismatchError(ValidationError):
    """Array shapes do not agree."""


class NonPositiveWeightError(ValidationError):
    """A node weight is zero or negative."""


class AsymmetricStructureError(ValidationError):
    """Structure matrix is not symmetric."""


class NegativeStructureEntryError(ValidationError):
    """Structure matrix has a negative entry."""


class MixedFeatureModesError(ValidationError):
    """Two measures carry features of different kinds."""


class MarginalMismatchError(ValidationError):
    """A coupling does not have the expected marginals."""


class UnsupportedExponentError(ValidationError):
    """Exponent q outside the supported set."""


class InvalidPermutationError(ValidationError):
    """Sequence is not a permutation of the node indices."""


class MissingLabelsError(ValidationError):
    """Discrete node labels are required but absent."""


class DisconnectedGraphError(ValidationError):
    """Graph has more than one connected component."""

    def __init__(self, components: list[list[int]]) -> None:
        self.components = components
        sizes = ", ".join(str(len(c)) for c in components)
        shown = "; ".join(str(c[:5]) + ("..." if len(c) > 5 else "") for c in components[:4])
        super().__init__(f"Graph is disconnected: {len(components)} components (sizes {sizes}): {shown}")


class SpecInvalidError(ValidationError):
    """Generator specification is invalid."""


class FeatureModeUnavailableError(ValidationError):
    """Requested feature mode is not available in the dataset."""


class InvalidGammaError(ValidationError):
    """Kernel bandwidth must be positive."""


class EmptyTrainSetError(ValidationError):
    """k-NN called without training graphs."""


class KTooLargeError(ValidationError):
    """More clusters or neighbours requested than samples available."""


# ── Parsing ──────────────────────────────────────────────────────


class ParseError(InputError):
    """File parsing error."""


class MissingFileError(ParseError):
    """A required file does not exist."""


class MalformedLineError(ParseError):
    """A line in a text file cannot be parsed."""

    def __init__(self, path: str, line_no: int, detail: str) -> None:
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {detail}")


class IndexOutOfRangeError(ParseError):
    """A node or graph index is outside its valid range."""


class InconsistentCountsError(ParseError):
    """Files of one dataset disagree about node or graph counts."""


class SchemaError(ParseError):
    """JSON document does not match the graph schema."""


# ── Numerical ────────────────────────────────────────────────────


class NonFiniteCostError(NumericalError):
    """Cost matrix contains NaN or infinite entries."""


class SolverFailureError(NumericalError):
    """Exact transport solver did not reach an optimal basis."""


class ConnectivityRetriesExceededError(NumericalError):
    """Random graph generator never produced a connected graph."""
