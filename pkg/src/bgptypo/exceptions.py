class BgpTypoError(Exception):
    """Base class for errors raised by bgptypo."""


class PathParseError(BgpTypoError, ValueError):
    pass


class UnsupportedPathError(BgpTypoError, ValueError):
    """Operation is undefined for the path (AS_SET or empty)."""


class CorruptInputError(BgpTypoError):
    """Too many malformed lines in an input file."""


class DatabaseFormatError(BgpTypoError, ValueError):
    def __init__(self, message, lineno=None, source=None):
        if source is not None and lineno is not None:
            where = f"{source}:{lineno}: "
        elif lineno is not None:
            where = f"line {lineno}: "
        elif source is not None:
            where = f"{source}: "
        else:
            where = ""
        super().__init__(where + message)
        self.lineno = lineno
        self.source = source


class DuplicateKeyError(DatabaseFormatError):
    pass


class ContractViolation(BgpTypoError):
    """A caller broke a documented precondition."""
