"""Exception hierarchy shared by every forgerybench module."""


class ForgeryBenchError(Exception):
    """Base class for all library errors."""


# imgio
class UnsupportedFormat(ForgeryBenchError):
    pass


class CorruptStream(ForgeryBenchError):
    pass


# features
class PlaneTooSmall(ForgeryBenchError, ValueError):
    pass


class EmptyPlane(ForgeryBenchError, ValueError):
    pass


class TooFewBlocks(ForgeryBenchError, ValueError):
    pass


class NoNonzeroCoefficients(ForgeryBenchError, ValueError):
    pass


# classifier
class DimensionMismatch(ForgeryBenchError, ValueError):
    pass


class TooFewSamples(ForgeryBenchError, ValueError):
    pass


class SingleClassTrainingSet(ForgeryBenchError, ValueError):
    pass


class TooFewSamplesPerClass(ForgeryBenchError, ValueError):
    pass


class NonConvergence(ForgeryBenchError):
    """SMO hit its iteration cap.

    ``model`` holds the last iterate so callers can still use (and flag) it.
    """

    def __init__(self, max_violation, iterations, model=None):
        super().__init__(
            f"SMO did not converge after {iterations} iterations "
            f"(max KKT violation {max_violation:.3g})"
        )
        self.max_violation = max_violation
        self.iterations = iterations
        self.model = model


# datasets
class ParseError(ForgeryBenchError, ValueError):
    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.path = path


class InvariantViolation(ForgeryBenchError, ValueError):
    pass


class InsufficientSamples(ForgeryBenchError, ValueError):
    pass


class UnknownDataset(ForgeryBenchError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


# synth
class RegionOutOfBounds(ForgeryBenchError, ValueError):
    pass


class DonorMissing(ForgeryBenchError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


# experiments
class LengthMismatch(ForgeryBenchError, ValueError):
    pass


class EmptyInput(ForgeryBenchError, ValueError):
    pass


class PlanInvariantViolation(ForgeryBenchError, ValueError):
    pass


class WildFlagViolation(ForgeryBenchError, ValueError):
    pass


class PlanParseError(ParseError):
    pass


class UnknownMethod(ForgeryBenchError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
