"""Exception hierarchy shared across the package."""


class RamixError(Exception):
    """Base class for all errors raised by ramix."""


class GridError(RamixError, ValueError):
    """Invalid grid, mismatched grids, or a grid range that is not covered."""


class DegenerateSpectrumError(RamixError, ValueError):
    """Spectrum has no dynamic range (max == min)."""


class ShapeError(RamixError, ValueError):
    """Array shapes or lengths do not agree."""


class LabelError(RamixError, ValueError):
    """Mixture label violates its invariants."""


class BaselineError(RamixError, ValueError):
    """Baseline parameters outside their allowed family ranges."""


class SpectrumFormatError(RamixError, ValueError):
    """Malformed spectrum or dataset file.

    ``line`` is the 1-based line number of the offending row, when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class CheckpointError(RamixError, ValueError):
    """Checkpoint file is corrupt, truncated, or of an unknown version."""


class ConfigError(RamixError, ValueError):
    """Configuration fails validation."""


class NumericalError(RamixError, ArithmeticError):
    """A non-finite value appeared during training or evaluation."""
