"""Exception types shared across the package."""


class CellgenError(Exception):
    """Base class for all package errors."""


class NetlistError(CellgenError):
    """Malformed netlist text or schema violation."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RepInvalidError(CellgenError):
    """Placement representation violates its invariants."""


class WidthOverflowError(CellgenError):
    """Realized cell width exceeds the technology bound."""


class ModelFormatError(CellgenError):
    """Weight file does not match the consuming model's manifest."""


class PipelineStageError(CellgenError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
