"""Exception types raised across the package."""


class LangTrajError(Exception):
    """Base class for all package errors."""


class ParseError(LangTrajError):
    """A malformed input record. ``line`` is 1-based when known."""

    def __init__(self, message, *, source=None, line=None):
        where = []
        if source is not None:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.source = source
        self.line = line


class NoBaseline(LangTrajError):
    pass


class SchemaError(LangTrajError):
    pass


class EmptySpeech(LangTrajError):
    pass


class CohortEmpty(LangTrajError):
    pass


class DegenerateDesign(LangTrajError):
    pass


class ConstantColumn(LangTrajError):
    pass


class SingularDesign(LangTrajError):
    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class SampleTooSmall(LangTrajError):
    pass


class DomainError(LangTrajError, ValueError):
    pass


class ConfigError(LangTrajError):
    pass


class ProvenanceError(LangTrajError):
    pass
