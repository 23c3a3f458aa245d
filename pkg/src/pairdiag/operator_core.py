"""Dense Hermitian matrices and their spectral calculus.

Everything downstream (one-particle operators, block operators of the
example models, the sandwich checks) goes through :class:`HermitianOperator`
and the functions here, so that symmetrization, eigen-solving and the
clamping policy for fractional powers live in exactly one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    HermiticityViolation,
    NegativeSpectrum,
    NotSquare,
    SingularOperator,
    SolverFailure,
)

__all__ = [
    "HermitianOperator",
    "EigenDecomposition",
    "OperatorMetrics",
    "validate_hermitian",
    "as_hermitian",
    "eig_hermitian",
    "matrix_function",
    "sqrtm",
    "inv_sqrtm",
    "powm",
    "default_floor_tol",
    "operator_metrics",
    "max_abs",
]


def max_abs(a) -> float:
    """Max-entry norm; 0 for empty arrays."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A validated, symmetrized self-adjoint matrix.

    ``entries`` is read-only. ``clamped_eigenvalues`` counts eigenvalues in
    ``[-floor_tol, 0)`` that were set to zero when this operator was
    produced by :func:`sqrtm` (or another positive power).
    """

    entries: np.ndarray
    hermiticity_defect: float = 0.0
    clamped_eigenvalues: int = 0

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.entries)

    @classmethod
    def diag(cls, values) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def zeros(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls(np.eye(dim))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __add__(self, other):
        if isinstance(other, HermitianOperator):
            return as_hermitian(self.entries + other.entries)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, HermitianOperator):
            return as_hermitian(self.entries - other.entries)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar) and np.isreal(scalar):
            return HermitianOperator(self.entries * float(np.real(scalar)))
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        # products of Hermitian operators are not Hermitian in general
        return self.entries @ np.asarray(other)

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim}, defect={self.hermiticity_defect:.1e})"


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    reconstruction_residual: float

    def recompose(self, values) -> np.ndarray:
        v = self.eigenvectors
        out = (v * np.asarray(values)) @ v.conj().T
        if np.isrealobj(v) and np.isrealobj(values):
            return out.real
        return out


def _default_tol(m: np.ndarray) -> float:
    return 1e-12 * (1.0 + max_abs(m))


def validate_hermitian(raw, tol: float | None = None) -> HermitianOperator:
    """Symmetrize ``raw`` to ``(M + M^*)/2`` after checking it is Hermitian.

    ``tol`` bounds the max-entry defect ``|M - M^*|``; by default it is
    ``1e-12 * (1 + max|M|)``.
    """
    m = np.array(raw, copy=True)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NotSquare(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.iscomplexobj(m):
        m = m.astype(float)
    elif max_abs(m.imag) == 0.0:
        m = m.real.copy()
    defect = max_abs(m - m.conj().T)
    if tol is None:
        tol = _default_tol(m)
    if defect > tol:
        raise HermiticityViolation(defect)
    return HermitianOperator(0.5 * (m + m.conj().T), hermiticity_defect=defect)


def as_hermitian(m) -> HermitianOperator:
    """Coerce ``m`` to a HermitianOperator, passing existing ones through."""
    if isinstance(m, HermitianOperator):
        return m
    return validate_hermitian(m)


def eig_hermitian(m: HermitianOperator) -> EigenDecomposition:
    """Ascending eigen-decomposition via LAPACK ``*heevd``/``*syevd``."""
    m = as_hermitian(m)
    try:
        w, v = np.linalg.eigh(m.entries)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(str(exc)) from exc
    resid = max_abs((v * w) @ v.conj().T - m.entries)
    w.setflags(write=False)
    v.setflags(write=False)
    return EigenDecomposition(w, v, resid)


def default_floor_tol(m: HermitianOperator, eig: EigenDecomposition | None = None) -> float:
    if eig is None:
        eig = eig_hermitian(m)
    op_norm = float(np.max(np.abs(eig.eigenvalues)))
    return 1e-10 * (1.0 + op_norm)


def _parse_function(f):
    if isinstance(f, str):
        if f == "sqrt":
            return "pow", 0.5
        if f == "inv_sqrt":
            return "pow", -0.5
        raise ValueError(f"unknown spectral function {f!r}")
    kind, arg = f
    if kind not in ("pow", "exp_i"):
        raise ValueError(f"unknown spectral function {kind!r}")
    return kind, float(arg)


def matrix_function(m: HermitianOperator, f, floor_tol: float | None = None):
    """Apply a spectral function to a Hermitian matrix.

    ``f`` is ``"sqrt"``, ``"inv_sqrt"``, ``("pow", p)`` or ``("exp_i", t)``.
    Powers use the nonnegative branch. Positive powers clamp eigenvalues in
    ``[-floor_tol, 0)`` to zero; negative powers never clamp and raise
    :class:`SingularOperator` unless ``eigmin > floor_tol``.

    Returns a HermitianOperator for powers and a unitary ndarray for
    ``exp_i``.
    """
    m = as_hermitian(m)
    kind, arg = _parse_function(f)
    eig = eig_hermitian(m)
    w = eig.eigenvalues
    if kind == "exp_i":
        return eig.recompose(np.exp(1j * arg * w))

    if floor_tol is None:
        floor_tol = default_floor_tol(m, eig)
    p = arg
    if p == 0.0:
        return HermitianOperator.identity(m.dim)
    if float(p).is_integer() and p > 0:
        return HermitianOperator(eig.recompose(w ** int(p)))
    eigmin = float(w[0])
    if eigmin < -floor_tol:
        raise NegativeSpectrum(eigmin)
    clamped = 0
    if p < 0:
        if eigmin <= floor_tol:
            raise SingularOperator(eigmin)
    else:
        neg = w < 0
        clamped = int(np.count_nonzero(neg))
        w = np.where(neg, 0.0, w)
    out = eig.recompose(w ** p)
    return HermitianOperator(0.5 * (out + out.conj().T), clamped_eigenvalues=clamped)


def sqrtm(m, floor_tol: float | None = None) -> HermitianOperator:
    return matrix_function(m, "sqrt", floor_tol)


def inv_sqrtm(m, floor_tol: float | None = None) -> HermitianOperator:
    return matrix_function(m, "inv_sqrt", floor_tol)


def powm(m, p: float, floor_tol: float | None = None) -> HermitianOperator:
    return matrix_function(m, ("pow", p), floor_tol)


@dataclass(frozen=True)
class OperatorMetrics:
    trace: float
    hs_norm: float
    op_norm: float
    eigmin: float


def operator_metrics(m: HermitianOperator) -> OperatorMetrics:
    m = as_hermitian(m)
    w = eig_hermitian(m).eigenvalues
    return OperatorMetrics(
        trace=float(np.real(np.trace(m.entries))),
        hs_norm=float(np.linalg.norm(m.entries)),
        op_norm=float(np.max(np.abs(w))),
        eigmin=float(w[0]),
    )
