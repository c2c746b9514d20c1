"""Exception hierarchy mapped to CLI exit codes."""


class CellmatError(Exception):
    exit_code = 1


class ConfigError(CellmatError):
    """Bad user input: config values, mesh sizes, file contents."""

    exit_code = 2


class AnalysisError(CellmatError):
    """A physical evaluation could not be completed."""

    exit_code = 3


class SolverError(CellmatError):
    """A linear or eigenvalue solve failed its accuracy contract."""

    exit_code = 4
