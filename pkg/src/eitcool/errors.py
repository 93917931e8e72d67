"""Exception hierarchy. The CLI maps each family onto an exit code."""


class EITCoolError(Exception):
    exit_code = 1


class ParameterError(EITCoolError, ValueError):
    """An input violates a physical or structural invariant."""

    exit_code = 2


class ConfigError(ParameterError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class DegenerateCouplingError(ParameterError):
    pass


class DegenerateSpectrumError(ParameterError):
    pass


class RegimeError(EITCoolError):
    """Parameters are valid but outside the physical regime an operation needs."""

    exit_code = 3


class HeatingRegimeError(RegimeError):
    pass


class NumericalError(EITCoolError, ArithmeticError):
    exit_code = 4


class NonUniqueSteadyStateError(NumericalError):
    pass


class SingularBlochMatrixError(NumericalError):
    pass


class UnstableSystemError(NumericalError):
    pass


class TruncationError(NumericalError):
    pass


class DimensionGuardError(NumericalError):
    pass
