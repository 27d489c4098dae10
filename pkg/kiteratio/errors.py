"""Exception types shared by the kiteratio modules."""


class KiteratioError(Exception):
    pass


class GraphError(KiteratioError, ValueError):
    pass


class DomainError(KiteratioError, ValueError):
    pass


class SpectralError(KiteratioError):
    pass


class DisconnectedGraphError(SpectralError):
    pass


class ConvergenceError(SpectralError):
    def __init__(self, message, *, iterations, residual):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class CertifierError(KiteratioError):
    pass


class VerificationError(KiteratioError):
    pass
