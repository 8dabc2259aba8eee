"""Exception types shared across the library.

CLI exit-code mapping: ConfigError / BoundsError / ParseError /
KindMismatchError / SpatialUnderflowError are input errors (exit 2);
EvaluatorError and ProtocolError are evaluator failures (exit 3).
"""


class EvoCellError(Exception):
    """Base class for all library errors."""


class ConfigError(EvoCellError, ValueError):
    """A configuration value violates its invariants."""


class BoundsError(EvoCellError, ValueError):
    """A hidden-node count lies outside [b_min, b_max]."""


class ParseError(EvoCellError, ValueError):
    """A genome document is malformed; message carries the JSON path."""


class KindMismatchError(EvoCellError, ValueError):
    """Crossover attempted between cells of different kinds."""


class SpatialUnderflowError(EvoCellError, ValueError):
    """Input image too small for the configured number of reduction cells."""


class EvaluatorError(EvoCellError, RuntimeError):
    """A fitness evaluator failed. Carries the offending genome hash when known."""

    def __init__(self, message: str, genome_hash: str | None = None):
        super().__init__(message)
        self.genome_hash = genome_hash


class ProtocolError(EvaluatorError):
    """The external-evaluator wire protocol was violated."""
