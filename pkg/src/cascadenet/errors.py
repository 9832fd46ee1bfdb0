"""Exception hierarchy shared by every cascadenet module."""


class CascadeNetError(Exception):
    """Base class for all cascadenet errors."""


class ConfigError(CascadeNetError):
    """A configuration document does not match the expected schema."""

    def __init__(self, path, message):
        self.path = path
        where = path if path else "<root>"
        super().__init__(f"{where}: {message}")


class ValidationError(CascadeNetError):
    """A model is well-formed but violates a structural invariant."""

    def __init__(self, message, violations=()):
        self.violations = list(violations)
        if self.violations:
            message = message + ": " + "; ".join(str(v) for v in self.violations)
        super().__init__(message)


class ContractError(CascadeNetError, ValueError):
    """An operation was called with arguments outside its domain."""
