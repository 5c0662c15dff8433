class PyLevyToolsException(Exception):
    pass


class QuadratureError(PyLevyToolsException):
    def __init__(self, message, partial=None, error_estimate=None):
        super().__init__(message)
        self.partial = partial
        self.error_estimate = error_estimate


class InversionError(PyLevyToolsException):
    pass


class GroundStateError(PyLevyToolsException):
    pass


class DomainError(PyLevyToolsException):
    pass


class SpectrumError(PyLevyToolsException):
    pass


class ParityError(SpectrumError):
    pass


class NondegeneracyError(SpectrumError):
    pass


class CancellationError(PyLevyToolsException):
    pass


class StiffnessError(PyLevyToolsException):
    pass


class EnsembleError(PyLevyToolsException):
    pass


class ClosedFormNotAvailable(PyLevyToolsException, AttributeError):
    pass


class ConfigError(PyLevyToolsException):
    pass


class StageError(PyLevyToolsException):
    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
