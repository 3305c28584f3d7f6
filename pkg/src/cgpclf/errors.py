"""Exception hierarchy. ``InputError`` maps to CLI exit code 2, ``ConfigError`` to 3."""


class CgpClfError(Exception):
    pass


class InputError(CgpClfError):
    """Bad data: unreadable files, malformed rows, inconsistent datasets."""


class ParseError(InputError):
    pass


class LabelError(InputError):
    pass


class AssemblyError(InputError):
    pass


class ConsistencyError(InputError):
    pass


class SplitError(InputError):
    pass


class ImbalanceError(InputError):
    pass


class ConfigError(CgpClfError):
    """Bad parameters: out-of-range hyperparameters, malformed manifests."""
