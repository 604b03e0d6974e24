"""Exception types raised across the package."""


class QColorError(Exception):
    """Base class for all package errors."""


class CapacityError(QColorError, ValueError):
    """Register size outside what the dense simulator supports."""


class QubitIndexError(QColorError, IndexError):
    """A gate or query referenced a qubit the register does not have."""


class ShapeError(QColorError, ValueError):
    """Mismatched qubit counts or image dimensions."""


class ImageParseError(QColorError, ValueError):
    """Malformed image file. ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class ImageFormatError(QColorError, ValueError):
    """Well-formed image file using an unsupported variant (e.g. maxval != 255)."""


class PlanError(QColorError, ValueError):
    """Invalid gate plan: bad syntax, unknown gate, or roles not allowed for the plan kind."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class PixelCircuitError(QColorError, ValueError):
    """A per-pixel recipe produced an invalid circuit."""

    def __init__(self, x: int, y: int, cause: Exception):
        super().__init__(f"pixel ({x}, {y}): {cause}")
        self.x = x
        self.y = y
        self.cause = cause
