"""Exception types shared across the toolkit."""


class SchemaError(ValueError):
    """Malformed input file (CSV/JSON). Carries a location when one is known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)


class DegenerateDataError(ValueError):
    """Input is structurally valid but carries no usable signal
    (e.g. no overlapping portfolios, no common banks across years)."""
