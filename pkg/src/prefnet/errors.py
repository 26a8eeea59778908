"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters or configuration document.

    ``path`` is the offending key path (e.g. ``rewards.beta[2]``) when known,
    ``line`` the 1-based line in the source document.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path:
            prefix += f"{path}: "
        if line is not None:
            prefix = f"line {line}: " + prefix
        super().__init__(prefix + message)


class UsageError(IndexError):
    """Out-of-range node or similar caller mistake."""


class ResultsFormatError(ValueError):
    """Malformed results file."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)
