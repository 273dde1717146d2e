"""Exception hierarchy. ``exit_code`` is what the CLI returns for each family."""


class RdsError(Exception):
    exit_code = 2


class ValidationError(RdsError, ValueError):
    exit_code = 2


class SampleExceedsPopulation(ValidationError):
    pass


class EmptySample(ValidationError):
    pass


class DegenerateGroup(ValidationError):
    pass


class ZeroInclusionProbability(ValidationError):
    pass


class OddStubCount(ValidationError):
    pass


class MissingPopulationSize(ValidationError):
    pass


class InsufficientEligibleNodes(ValidationError):
    pass


class OracleLimitExceeded(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleParams(RdsError):
    exit_code = 3

    def __init__(self, message, cell=None):
        self.cell = cell
        super().__init__(message)


class RdsIOError(RdsError, OSError):
    exit_code = 4
