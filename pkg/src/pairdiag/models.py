"""Constructors for the worked example systems.

Each constructor reduces its system to a :class:`PairModel`, on an enlarged
one-particle space when oscillator degrees of freedom are present (each
oscillator becomes one extra bosonic mode placed before the field modes).
The ``*_fock_hamiltonian`` functions assemble the same systems directly,
before any rewriting into squares, and serve as independent oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CouplingTooStrong, DimensionMismatch
from .fock import FockOperator, FockSpace, field_product, second_quantize
from .operator_core import as_hermitian, inv_sqrtm, max_abs, powm, sqrtm
from .pair_model import CANONICAL_REAL, Conjugation, PairModel, diagonalize, validate_hermitian

__all__ = [
    "single_pair",
    "single_pair_criterion",
    "oscillator_field",
    "oscillator_field_fock_hamiltonian",
    "pauli_fierz_dipole",
    "dipole_fock_hamiltonian",
    "FiberResult",
    "fiber_base_model",
    "ti_fiber",
    "ir_family",
]

ONS_TOL = 1e-10


def _vec(g, dim: int) -> np.ndarray:
    g = np.asarray(g)
    if g.shape != (dim,):
        raise DimensionMismatch(f"vector of shape {g.shape}, expected ({dim},)")
    return g


def single_pair(T, lam: float, g, real_structure=CANONICAL_REAL) -> PairModel:
    """dGamma(T) + (lam/2) Phi(g)^2."""
    T = as_hermitian(T)
    return PairModel(T, ((lam, _vec(g, T.dim)),), real_structure, label="single_pair")


def single_pair_criterion(T, lam: float, g) -> float:
    """1 + lam ||T^{-1/2} g||^2; the single-pair model is diagonalizable iff this is positive."""
    u = inv_sqrtm(T).entries @ np.asarray(g)
    return 1.0 + lam * float(np.vdot(u, u).real)


def _extend_structure(real_structure, n_osc: int):
    if isinstance(real_structure, Conjugation):
        return Conjugation(scipy.linalg.block_diag(np.eye(n_osc), real_structure.U))
    return real_structure


def oscillator_field(omega: float, lam: float, T, g, real_structure=CANONICAL_REAL) -> PairModel:
    """Harmonic oscillator coupled linearly (lam x Phi(g)) to a Bose field.

    The oscillator becomes mode 0 of C + H and the cross term is written as
    (lam / (4 sqrt(omega))) [Phi(1, g)^2 - Phi(1, -g)^2]. The zero-point
    energy omega/2 is carried in ``energy_offset``.
    """
    T = as_hermitian(T)
    g = _vec(g, T.dim)
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    norm = float(np.linalg.norm(inv_sqrtm(T).entries @ g))
    if abs(lam) * norm >= omega:
        raise CouplingTooStrong(
            f"|lambda| = {abs(lam)} is not below omega / ||T^-1/2 g|| = {omega / norm if norm else np.inf}"
        )
    T_ext = validate_hermitian(scipy.linalg.block_diag(np.array([[omega]]), T.entries))
    plus = np.concatenate([[1.0], g])
    minus = np.concatenate([[1.0], -g])
    weight = 0.5 * lam / np.sqrt(omega)
    couplings = ((weight, plus), (-weight, minus)) if lam != 0 else ()
    return PairModel(
        T_ext, couplings, _extend_structure(real_structure, 1), energy_offset=0.5 * omega, label="oscillator_field"
    )


def oscillator_field_fock_hamiltonian(space: FockSpace, omega: float, lam: float, T, g) -> FockOperator:
    """(p^2 + omega^2 x^2)/2 + dGamma(T) + lam x Phi(g) with x = omega^{-1/2} Phi(e_0)."""
    T = as_hermitian(T)
    g = _vec(g, T.dim)
    n = T.dim + 1
    if space.modes != n:
        raise DimensionMismatch(f"space has {space.modes} modes, need {n}")
    one_particle = scipy.linalg.block_diag(np.array([[omega]]), T.entries)
    e0 = np.eye(n)[0]
    field = np.concatenate([[0.0], g])
    H = second_quantize(space, one_particle) + 0.5 * omega
    if lam != 0:
        H = H + (lam / np.sqrt(omega)) * field_product(space, e0, field)
    return H


def pauli_fierz_dipole(omegas, T, gs) -> PairModel:
    """Dipole Pauli-Fierz model with harmonic confinement omega_j in each direction.

    Returns the model on C^d + H whose S^2 is diag(omega^2) + T^2 + W. Requires
    real T and g_j (entrywise conjugation as the real structure).
    """
    T = as_hermitian(T)
    omegas = np.asarray(omegas, dtype=float)
    d = omegas.shape[0]
    if len(gs) != d:
        raise DimensionMismatch(f"{len(gs)} coupling vectors for {d} oscillator directions")
    if np.any(omegas <= 0):
        raise ValueError("all omegas must be positive")
    gs = [_vec(g, T.dim) for g in gs]
    if not T.is_real or any(np.iscomplexobj(g) and max_abs(np.imag(g)) > 0 for g in gs):
        raise ValueError("pauli_fierz_dipole needs real T and coupling vectors")
    gs = [np.real(g) for g in gs]
    T_ext = validate_hermitian(scipy.linalg.block_diag(np.diag(omegas), T.entries))
    eye = np.eye(d)
    couplings = []
    for j, g in enumerate(gs):
        couplings.append((1.0, np.concatenate([np.zeros(d), g])))
        w = 0.5 * np.sqrt(omegas[j])
        couplings.append((w, np.concatenate([eye[j], g])))
        couplings.append((-w, np.concatenate([eye[j], -g])))
    return PairModel(T_ext, tuple(couplings), energy_offset=0.5 * float(omegas.sum()), label="pauli_fierz_dipole")


def dipole_fock_hamiltonian(space: FockSpace, omegas, T, gs) -> FockOperator:
    """Untwisted dipole Hamiltonian on Fock(C^d + H).

    sum_j (p_j^2 + omega_j^2 x_j^2)/2 + dGamma(T) + 1/2 sum Phi(g_j)^2 + sum p_j Phi(g_j)
    with p_j = omega_j^{1/2} Phi(i e_j).
    """
    T = as_hermitian(T)
    omegas = np.asarray(omegas, dtype=float)
    d = omegas.shape[0]
    n = d + T.dim
    if space.modes != n:
        raise DimensionMismatch(f"space has {space.modes} modes, need {n}")
    H = second_quantize(space, scipy.linalg.block_diag(np.diag(omegas), T.entries)) + 0.5 * float(omegas.sum())
    for j, g in enumerate(gs):
        field = np.concatenate([np.zeros(d), _vec(g, T.dim)])
        momentum = np.zeros(n, dtype=complex)
        momentum[j] = 1j
        H = H + 0.5 * field_product(space, field, field)
        H = H + np.sqrt(omegas[j]) * field_product(space, momentum, field)
    return H


@dataclass(frozen=True)
class FiberResult:
    P: np.ndarray
    E_P: float
    E_P_ons: float | None
    ons_defect: float
    ir_diagnostic: float
    E: float


def fiber_base_model(T, gs) -> PairModel:
    """dGamma(T) + 1/2 sum_j Phi(g_j)^2, the P = 0 fiber without the P^2/2 term."""
    T = as_hermitian(T)
    return PairModel(T, tuple((1.0, _vec(g, T.dim)) for g in gs), label="ti_fiber")


def ti_fiber(T, gs, P, result=None) -> FiberResult:
    """Lowest energy of the total-momentum-P fiber of the translation-invariant model.

    E(P) = -1/2 ||S^{-1} T^{1/2} sum P_j g_j||^2 + |P|^2/2 + E. When the
    vectors T^{-1/2} g_j are orthogonal with a common norm the shortcut
    |P|^2 / (2 (1 + ||T^{-1/2} g_1||^2)) + E is reported as well.
    """
    model = fiber_base_model(T, gs)
    P = np.asarray(P, dtype=float)
    if P.shape != (len(gs),):
        raise DimensionMismatch(f"P has shape {P.shape}, expected ({len(gs)},)")
    if result is None:
        result = diagonalize(model)
    T = model.T
    S = result.S
    v = sqrtm(T).entries @ sum((p * g for p, g in zip(P, gs)), np.zeros(T.dim))
    E_P = -0.5 * float(np.linalg.norm(powm(S, -1.0).entries @ v)) ** 2 + 0.5 * float(P @ P) + result.E

    t_m = inv_sqrtm(T).entries
    lowered = np.array([t_m @ g for g in gs])
    gram = lowered.conj() @ lowered.T
    ons_defect = max_abs(gram - gram[0, 0].real * np.eye(len(gs)))
    E_P_ons = None
    if ons_defect <= ONS_TOL:
        E_P_ons = float(P @ P / (2.0 * (1.0 + gram[0, 0].real)) + result.E)
    ir = float(np.linalg.norm(powm(S, -1.5).entries @ v))
    return FiberResult(P, E_P, E_P_ons, ons_defect, ir, result.E)


def ir_family(ts, T_tail=(1.0,), gs=((1.0, 0.0),), P=(1.0,)) -> list[tuple[float, float]]:
    """ir_diagnostic along T = diag(t, *T_tail) for each t in ``ts``."""
    out = []
    for t in ts:
        T = np.diag(np.concatenate([[t], np.asarray(T_tail, dtype=float)]))
        res = ti_fiber(T, [np.asarray(g, dtype=float) for g in gs], P)
        out.append((float(t), res.ir_diagnostic))
    return out
