"""Exception hierarchy shared across the toolkit.

Everything raised on purpose derives from GeelError so callers (and the
CLI) can tell our failures apart from genuine bugs.
"""


class GeelError(Exception):
    """Base class for all toolkit errors."""


class GraphValidationError(GeelError):
    """Malformed graph structure (asymmetry, self-loop, bad index)."""


class ConnectivityError(GeelError):
    """Operation requires a connected graph."""


class DimensionError(GeelError):
    """Shape or length mismatch between related objects."""


class OrderingError(GeelError):
    """Edge list is not sorted the way the codec requires."""


class DecodeError(GeelError):
    """Gap sequence cannot be decoded into a valid edge list.

    ``index`` is the position of the offending pair.
    """

    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} (at pair {index})")
        self.index = index


class VocabularyError(GeelError):
    """Token or pair outside the vocabulary."""


class GrammarError(GeelError):
    """Attributed token stream violates the transition rules.

    ``position`` is the token index, ``expected`` the kinds that would
    have been accepted there.
    """

    def __init__(self, message, position=None, expected=None):
        detail = message
        if position is not None:
            detail += f" (at token {position}"
            if expected:
                detail += f", expected one of {sorted(expected)}"
            detail += ")"
        super().__init__(detail)
        self.position = position
        self.expected = tuple(expected) if expected else ()


class AlphabetError(GeelError):
    """Node or edge type missing from the declared alphabets."""


class CapacityError(GeelError):
    """Source rank exceeds the positional table capacity."""


class NumericError(GeelError):
    """NaN or Inf detected during model evaluation."""


class ParseError(GeelError):
    """Dataset file is malformed. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class GenerationError(GeelError):
    """A random generator exhausted its retry budget."""


class ConfigError(GeelError):
    """Invalid run configuration (CLI exit code 2)."""


class CheckpointError(GeelError):
    """Checkpoint file is corrupt or from an unsupported version."""
