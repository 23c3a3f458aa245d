"""Pair-interaction model H = dGamma(T) + 1/2 sum_n lam_n Phi(g_n)^2.

A :class:`PairModel` carries the one-particle operator T, a finite list of
couplings (lam_n, g_n) and a real structure. :func:`diagonalize` returns the
one-particle operator S = sqrt(T^2 + W) of the diagonalized Hamiltonian and
its ground state energy, computed both as tr(S - T)/2 and through the
vacuum-expectation route <Omega, H Omega> - tr(Y S Y^*).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .bogoliubov import SymplecticPair, build_xy
from .errors import ConditionViolation, DimensionMismatch, NegativeSpectrum, SingularT
from .operator_core import (
    HermitianOperator,
    as_hermitian,
    default_floor_tol,
    eig_hermitian,
    inv_sqrtm,
    max_abs,
    sqrtm,
    validate_hermitian,
)

__all__ = [
    "Conjugation",
    "PairModel",
    "ConditionReport",
    "DiagonalizationResult",
    "validate_conditions",
    "build_W",
    "build_W0",
    "diagonalize",
    "random_pair_model",
]

CANONICAL_REAL = "canonical_real"
EPSILON_FLOOR = 1e-12
REAL_STRUCTURE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Conjugation:
    """Antiunitary involution J f = U conj(f)."""

    U: np.ndarray

    def apply(self, f):
        return self.U @ np.conj(f)

    def sandwich(self, m):
        """J M J written as a complex-linear matrix."""
        return self.U @ np.conj(m) @ np.conj(self.U)

    def defect(self) -> float:
        """Deviation from being unitary and involutive."""
        n = self.U.shape[0]
        return max(
            max_abs(self.U.conj().T @ self.U - np.eye(n)),
            max_abs(self.U @ np.conj(self.U) - np.eye(n)),
        )


RealStructure = Union[str, Conjugation]


@dataclass(frozen=True, eq=False)
class PairModel:
    """T plus couplings (lam_n, g_n).

    ``energy_offset`` is an additive constant carried along by the example
    constructors (the oscillator zero-point energies); it is not part of E.
    """

    T: HermitianOperator
    couplings: tuple = ()
    real_structure: RealStructure = CANONICAL_REAL
    energy_offset: float = 0.0
    label: str = ""

    def __post_init__(self):
        T = as_hermitian(self.T)
        object.__setattr__(self, "T", T)
        clean = []
        for lam, g in self.couplings:
            g = np.asarray(g)
            g = g.astype(complex) if np.iscomplexobj(g) else g.astype(float)
            if g.shape != (T.dim,):
                raise DimensionMismatch(f"coupling vector has shape {g.shape}, T has dim {T.dim}")
            g.setflags(write=False)
            clean.append((float(lam), g))
        object.__setattr__(self, "couplings", tuple(clean))
        rs = self.real_structure
        if isinstance(rs, Conjugation):
            if rs.U.shape != (T.dim, T.dim):
                raise DimensionMismatch(f"conjugation has shape {rs.U.shape}, T has dim {T.dim}")
        elif rs != CANONICAL_REAL:
            raise ValueError(f"unknown real structure {rs!r}")

    @property
    def dim(self) -> int:
        return self.T.dim

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([lam for lam, _ in self.couplings], dtype=float)

    @property
    def conjugation(self) -> Conjugation | None:
        """The explicit J, or None for the canonical entrywise conjugation."""
        return self.real_structure if isinstance(self.real_structure, Conjugation) else None

    def apply_J(self, f):
        J = self.conjugation
        return np.conj(f) if J is None else J.apply(f)

    def with_couplings(self, couplings) -> "PairModel":
        return PairModel(self.T, tuple(couplings), self.real_structure, self.energy_offset, self.label)


@dataclass(frozen=True)
class ConditionReport:
    eigmin_T: float
    D1: float
    D2: float
    epsilon: float
    b6_ok: bool
    kato_small: bool
    passed: bool

    def as_dict(self) -> dict:
        return {
            "eigmin_T": self.eigmin_T,
            "D1": self.D1,
            "D2": self.D2,
            "epsilon": self.epsilon,
            "b6_ok": self.b6_ok,
            "kato_small": self.kato_small,
            "pass": self.passed,
        }


def _outer_sum(vectors, weights, dim) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    for w, v in zip(weights, vectors):
        out += w * np.outer(v, np.conj(v))
    return out


def _b6_ok(model: PairModel) -> bool:
    T = model.T.entries
    J = model.conjugation
    if J is None:
        if np.iscomplexobj(T) and max_abs(T.imag) > REAL_STRUCTURE_TOL:
            return False
        return all(max_abs(np.imag(g)) <= REAL_STRUCTURE_TOL for _, g in model.couplings)
    if J.defect() > REAL_STRUCTURE_TOL:
        return False
    if max_abs(J.sandwich(T) - T) > REAL_STRUCTURE_TOL * (1.0 + max_abs(T)):
        return False
    return all(max_abs(J.apply(g) - g) <= REAL_STRUCTURE_TOL * (1.0 + max_abs(g)) for _, g in model.couplings)


def validate_conditions(model: PairModel) -> ConditionReport:
    """Check the conditions under which ``model`` can be diagonalized.

    D1, D2 are the weighted sums of ||T^{-1/2} g||^2 and ||T^{1/2} g||^2;
    epsilon is the least eigenvalue of 1 + sum lam |T^{-1/2}g><T^{-1/2}g|.
    """
    T = model.T
    eig = eig_hermitian(T)
    eigmin = float(eig.eigenvalues[0])
    floor = default_floor_tol(T, eig)
    if eigmin <= floor:
        raise SingularT(eigmin)
    t_m = inv_sqrtm(T, floor).entries
    t_p = sqrtm(T, floor).entries
    lams = model.lambdas
    lower = [t_m @ g for _, g in model.couplings]
    upper = [t_p @ g for _, g in model.couplings]
    D1 = float(sum(abs(l) * np.vdot(u, u).real for l, u in zip(lams, lower)))
    D2 = float(sum(abs(l) * np.vdot(u, u).real for l, u in zip(lams, upper)))
    K = np.eye(T.dim) + _outer_sum(lower, lams, T.dim)
    epsilon = float(eig_hermitian(validate_hermitian(K)).eigenvalues[0])
    b6 = _b6_ok(model)
    passed = eigmin > 0 and epsilon > EPSILON_FLOOR and b6
    return ConditionReport(eigmin, D1, D2, epsilon, b6, D1 < 1.0, passed)


def build_W(model: PairModel) -> HermitianOperator:
    """W = sum lam_n |T^{1/2} g_n><T^{1/2} g_n|."""
    t_p = sqrtm(model.T).entries
    vecs = [t_p @ g for _, g in model.couplings]
    return validate_hermitian(_outer_sum(vecs, model.lambdas, model.dim))


def build_W0(model: PairModel) -> HermitianOperator:
    """W0 = sum lam_n |g_n><g_n|."""
    vecs = [g for _, g in model.couplings]
    return validate_hermitian(_outer_sum(vecs, model.lambdas, model.dim))


@dataclass(frozen=True, eq=False)
class DiagonalizationResult:
    S: HermitianOperator
    E: float
    E_crosscheck: float
    c1: float
    c2: float
    sandwich_lower: float
    sandwich_upper: float
    conditions: ConditionReport
    pair: SymplecticPair
    energy_offset: float = 0.0

    @property
    def sandwich_margin(self) -> float:
        """min of eigmin(T^2 - c1^2 S^2) and eigmin(c2^2 S^2 - T^2)."""
        return min(self.sandwich_lower, self.sandwich_upper)

    @property
    def ground_energy(self) -> float:
        """E plus the model's additive offset."""
        return self.E + self.energy_offset

    @property
    def eigmin_S(self) -> float:
        return float(eig_hermitian(self.S).eigenvalues[0])


def diagonalize(model: PairModel, check_symplectic: bool = True) -> DiagonalizationResult:
    report = validate_conditions(model)
    if not report.passed:
        raise ConditionViolation(report)
    T = model.T
    t = T.entries
    t2 = t @ t
    hp = validate_hermitian(0.5 * (t2 + t2.conj().T) + build_W(model).entries)
    hp_eig = eig_hermitian(hp)
    if hp_eig.eigenvalues[0] < -default_floor_tol(hp, hp_eig):
        raise NegativeSpectrum(float(hp_eig.eigenvalues[0]))
    S = sqrtm(hp)
    s = S.entries

    E = 0.5 * float(np.real(np.trace(s - t)))
    pair = build_xy(S, T, model.conjugation, check=check_symplectic)
    Y = pair.Y
    vac = 0.25 * sum(lam * np.vdot(g, g).real for lam, g in model.couplings)
    E_cross = float(vac - np.real(np.trace(Y @ s @ Y.conj().T)))

    c1 = (1.0 + report.D1) ** -0.5
    c2 = report.epsilon**-0.5
    s2 = s @ s
    lower = eig_hermitian(validate_hermitian(0.5 * (t2 + t2.conj().T) - c1**2 * 0.5 * (s2 + s2.conj().T)))
    upper = eig_hermitian(validate_hermitian(c2**2 * 0.5 * (s2 + s2.conj().T) - 0.5 * (t2 + t2.conj().T)))
    return DiagonalizationResult(
        S=S,
        E=E,
        E_crosscheck=E_cross,
        c1=c1,
        c2=c2,
        sandwich_lower=float(lower.eigenvalues[0]),
        sandwich_upper=float(upper.eigenvalues[0]),
        conditions=report,
        pair=pair,
        energy_offset=model.energy_offset,
    )


def random_pair_model(
    rng: np.random.Generator,
    dim: int,
    n_couplings: int,
    epsilon_min: float = 0.1,
    t_range: Sequence[float] = (0.3, 3.0),
    max_tries: int = 200,
) -> PairModel:
    """Draw a real model with eigenvalues of T in ``t_range`` and epsilon >= epsilon_min.

    Couplings with negative lam are accepted; draws failing the epsilon
    margin are rejected and redrawn.
    """
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    t = q @ np.diag(rng.uniform(*t_range, size=dim)) @ q.T
    T = validate_hermitian(0.5 * (t + t.T))
    for _ in range(max_tries):
        couplings = []
        for _ in range(n_couplings):
            g = rng.standard_normal(dim) / np.sqrt(dim)
            couplings.append((float(rng.uniform(-1.0, 1.0)), g))
        model = PairModel(T, tuple(couplings))
        if validate_conditions(model).epsilon >= epsilon_min:
            return model
    raise RuntimeError("could not draw a model with the requested epsilon margin")
