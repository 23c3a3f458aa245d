"""Symplectic pair (X, Y) built from two positive operators S and T.

X = (T^{-1/2} S^{1/2} + T^{1/2} S^{-1/2}) / 2
Y = (T^{-1/2} S^{1/2} - T^{1/2} S^{-1/2}) / 2

together with numerical checks of the identities such a pair must obey.
All residuals are max-entry norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import DimensionMismatch, SingularOnePlusA, SymplecticResidualExceeded
from .operator_core import HermitianOperator, as_hermitian, inv_sqrtm, max_abs, powm, sqrtm

if TYPE_CHECKING:
    from .pair_model import Conjugation, PairModel

__all__ = [
    "SymplecticPair",
    "HeinzCheck",
    "FactorizationCheck",
    "build_xy",
    "symplectic_residuals",
    "heinz_bound_check",
    "intertwining_residual",
    "appendix_b_identity",
    "bijectivity_residual",
]

SYMPLECTIC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SymplecticPair:
    X: np.ndarray
    Y: np.ndarray
    residuals: dict = field(default_factory=dict)
    hs_norm_Y: float = 0.0
    J: "Conjugation | None" = None

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    def apply_J(self, f: np.ndarray) -> np.ndarray:
        """Conjugation used by this pair; entrywise conjugation by default."""
        if self.J is None:
            return np.conj(f)
        return self.J.apply(f)


def _jmj(J, m):
    # J M J as a complex-linear matrix
    if J is None:
        return np.conj(m)
    return J.sandwich(m)


def symplectic_residuals(X, Y, J=None) -> dict:
    """Residuals of the four relations X*X - Y*Y = 1, X*Y - Y*X = 0, ...

    With ``J`` the conjugation-dressed forms are used
    (X*JYJ - Y*JXJ, XX* - JYY*J, -XY* + JYX*J); without it the plain ones.
    """
    n = X.shape[0]
    eye = np.eye(n)
    Xh, Yh = X.conj().T, Y.conj().T
    if J is None:
        r2 = Xh @ Y - Yh @ X
        r3 = X @ Xh - Y @ Yh - eye
        r4 = -X @ Yh + Y @ Xh
    else:
        r2 = Xh @ _jmj(J, Y) - Yh @ _jmj(J, X)
        r3 = X @ Xh - _jmj(J, Y @ Yh) - eye
        r4 = -X @ Yh + _jmj(J, Y @ Xh)
    return {
        "r1": max_abs(Xh @ X - Yh @ Y - eye),
        "r2": max_abs(r2),
        "r3": max_abs(r3),
        "r4": max_abs(r4),
    }


def build_xy(S: HermitianOperator, T: HermitianOperator, J=None, check: bool = True) -> SymplecticPair:
    """Construct (X, Y) from strictly positive S and T of equal dimension.

    Raises :class:`SymplecticResidualExceeded` when ``check`` is set and any
    residual exceeds ``1e-9 * dim`` (a sign of ill-conditioning).
    """
    S, T = as_hermitian(S), as_hermitian(T)
    if S.dim != T.dim:
        raise DimensionMismatch(f"S has dim {S.dim}, T has dim {T.dim}")
    up = inv_sqrtm(T).entries @ sqrtm(S).entries
    down = sqrtm(T).entries @ inv_sqrtm(S).entries
    X = 0.5 * (up + down)
    Y = 0.5 * (up - down)
    res = symplectic_residuals(X, Y, J)
    limit = SYMPLECTIC_TOL * S.dim
    if check and max(res.values()) > limit:
        raise SymplecticResidualExceeded(res, limit)
    return SymplecticPair(X, Y, res, float(np.linalg.norm(Y)), J)


@dataclass(frozen=True)
class HeinzCheck:
    norm_TpSmp: float
    lower: float
    upper: float
    within: bool


def heinz_bound_check(S, T, c1: float, c2: float, p: float, tol: float = 1e-9) -> HeinzCheck:
    """Check c1^p <= ||T^p S^{-p}|| <= c2^p for 0 < p <= 1."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    m = powm(T, p).entries @ powm(S, -p).entries
    norm = float(np.linalg.norm(m, ord=2))
    lo, hi = c1**p, c2**p
    return HeinzCheck(norm, lo, hi, lo - tol <= norm <= hi + tol)


def intertwining_residual(T, S, pair: SymplecticPair, W0) -> tuple[float, float]:
    """Residuals of TX = XS - W0(X-Y)/2 and TY = -YS + W0(X-Y)/2."""
    T, S, W0 = as_hermitian(T), as_hermitian(S), as_hermitian(W0)
    if not (T.dim == S.dim == W0.dim == pair.dim):
        raise DimensionMismatch("T, S, W0 and the pair must share one dimension")
    t, s, w0 = T.entries, S.entries, W0.entries
    X, Y = pair.X, pair.Y
    half = 0.5 * w0 @ (X - Y)
    rX = max_abs(t @ X - X @ s + half)
    rY = max_abs(t @ Y + Y @ s - half)
    return rX, rY


@dataclass(frozen=True)
class FactorizationCheck:
    residual: float
    det_one_plus_A: complex


def appendix_b_identity(model: "PairModel", S, det_floor: float = 1e-12) -> FactorizationCheck:
    """Check S^{3/2} = T^{3/2} (1 + A^*) T^{1/2} S^{-1/2}, A = sum lam |g><T^{-1} g|."""
    S = as_hermitian(S)
    T = model.T
    if S.dim != T.dim:
        raise DimensionMismatch(f"S has dim {S.dim}, model has dim {T.dim}")
    n = T.dim
    t_inv = powm(T, -1.0).entries
    A = np.zeros((n, n), dtype=complex)
    for lam, g in model.couplings:
        A += lam * np.outer(g, np.conj(t_inv @ g))
    one_plus_A = np.eye(n) + A
    det = complex(np.linalg.det(one_plus_A))
    if abs(det) < det_floor:
        raise SingularOnePlusA(abs(det))
    rhs = powm(T, 1.5).entries @ one_plus_A.conj().T @ sqrtm(T).entries @ inv_sqrtm(S).entries
    return FactorizationCheck(max_abs(powm(S, 1.5).entries - rhs), det)


def _realify(m: np.ndarray) -> np.ndarray:
    # complex-linear map on C^n as a real-linear map on R^{2n} = (Re, Im)
    re, im = np.real(m), np.imag(m)
    return np.block([[re, -im], [im, re]])


def bijectivity_residual(pair: SymplecticPair) -> float:
    """Check that f -> Xf + JYf is inverted by g -> X*g - Y*Jg.

    Both maps are real-linear, so they are compared as 2n x 2n real matrices.
    Returns the larger of the residuals of G.F - 1 and F.G - 1.
    """
    n = pair.dim
    conj = np.diag(np.concatenate([np.ones(n), -np.ones(n)]))
    U = np.eye(n) if pair.J is None else pair.J.U
    J = _realify(U) @ conj
    F = _realify(pair.X) + J @ _realify(pair.Y)
    G = _realify(pair.X.conj().T) - _realify(pair.Y.conj().T) @ J
    eye = np.eye(2 * n)
    return max(max_abs(G @ F - eye), max_abs(F @ G - eye))
