"""Exception hierarchy shared by all pairdiag modules."""


class PairDiagError(Exception):
    """Base class for every error raised by pairdiag."""


class NotSquare(PairDiagError, ValueError):
    pass


class HermiticityViolation(PairDiagError, ValueError):
    def __init__(self, defect: float):
        super().__init__(f"matrix is not Hermitian (defect {defect:.3e})")
        self.defect = defect


class SolverFailure(PairDiagError, RuntimeError):
    pass


class NegativeSpectrum(PairDiagError, ValueError):
    def __init__(self, eigmin: float):
        super().__init__(f"operator has negative spectrum (eigmin {eigmin:.3e})")
        self.eigmin = eigmin


class SingularOperator(PairDiagError, ValueError):
    def __init__(self, eigmin: float):
        super().__init__(f"inverse power of a singular operator (eigmin {eigmin:.3e})")
        self.eigmin = eigmin


class DimensionMismatch(PairDiagError, ValueError):
    pass


class SingularT(PairDiagError, ValueError):
    def __init__(self, eigmin: float):
        super().__init__(f"one-particle operator T is not injective (eigmin {eigmin:.3e})")
        self.eigmin = eigmin


class ConditionViolation(PairDiagError, ValueError):
    """Raised when a model fails the hypotheses needed for diagonalization."""

    def __init__(self, report):
        super().__init__(
            "model violates the diagonalization hypotheses "
            f"(eigmin_T={report.eigmin_T:.3e}, epsilon={report.epsilon:.3e}, b6_ok={report.b6_ok})"
        )
        self.report = report


class SymplecticResidualExceeded(PairDiagError, ArithmeticError):
    def __init__(self, residuals: dict, limit: float):
        worst = max(residuals, key=residuals.get)
        super().__init__(f"symplectic residual {worst}={residuals[worst]:.3e} exceeds {limit:.3e}")
        self.residuals = residuals
        self.limit = limit


class SingularOnePlusA(PairDiagError, ArithmeticError):
    def __init__(self, det: float):
        super().__init__(f"1 + A is numerically singular (|det| = {det:.3e})")
        self.det = det


class CapacityExceeded(PairDiagError, MemoryError):
    pass


class ModeOutOfRange(PairDiagError, IndexError):
    pass


class SectorTooSmall(PairDiagError, ValueError):
    pass


class CouplingTooStrong(PairDiagError, ValueError):
    pass


class ConfigParseError(PairDiagError, ValueError):
    def __init__(self, path, field: str, message: str):
        super().__init__(f"{path}: field '{field}': {message}")
        self.path = path
        self.field = field
