"""Exception hierarchy. Every error raised on purpose by the package derives from CorroError."""


class CorroError(Exception):
    """Base class for package errors."""


class ParseError(CorroError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownSpeciesError(CorroError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown species"


class UnsupportedLatticeError(CorroError, ValueError):
    pass


class DomainError(CorroError, ValueError):
    pass


class BudgetInfeasibleError(CorroError, ValueError):
    def __init__(self, message, slack):
        self.slack = slack
        super().__init__(f"{message} (slack {slack:.6g} Ha^2)")


class ExplicitModeTooLargeError(CorroError, ValueError):
    pass


class FitDegenerateError(CorroError, ValueError):
    pass


class TopologyError(CorroError, ValueError):
    pass


class AbsorbingStateError(CorroError, RuntimeError):
    pass


class ConfigError(CorroError, ValueError):
    pass
