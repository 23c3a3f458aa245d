"""Truncated bosonic Fock space used as a brute-force oracle.

The space keeps every occupation vector (n_1, ..., n_d) with total quanta
at most ``nmax``. Operators are stored as sparse CSR matrices and only
densified for eigensolves. Quadratic field expressions are assembled in
normal order so that the stored matrix is exactly the compression of the
untruncated operator onto the kept subspace; identities involving an
operator that changes quanta by up to k are checked only on states with at
most ``nmax - k`` quanta ("safe sector").

Conventions: A(f) = sum_i conj(f_i) a_i is antilinear in f, A*(f) is
linear, and Phi(f) = (A(f) + A*(f)) / sqrt(2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.csgraph
import scipy.sparse.linalg

from .bogoliubov import SymplecticPair
from .errors import CapacityExceeded, DimensionMismatch, ModeOutOfRange, SectorTooSmall
from .operator_core import as_hermitian, inv_sqrtm, max_abs, sqrtm
from .pair_model import PairModel, diagonalize

__all__ = [
    "DEFAULT_CAPACITY",
    "FockSpace",
    "FockOperator",
    "build_fock",
    "ladder",
    "annihilator",
    "creator",
    "second_quantize",
    "segal_field",
    "field_product",
    "assemble_hamiltonian",
    "assemble_fiber_hamiltonian",
    "lowest_eigenvalues",
    "SpectrumComparison",
    "spectrum_compare",
    "b_operator",
    "CommutatorResidual",
    "commutator_check",
    "InequalityReport",
    "inequality_suite",
    "weyl_check",
    "random_safe_states",
]

DEFAULT_CAPACITY = 20000


def _compositions(n: int, d: int):
    # stars and bars: every way to write n as an ordered sum of d parts
    for bars in itertools.combinations(range(n + d - 1), d - 1):
        edges = (-1,) + bars + (n + d - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(d))


def _graded_basis(d: int, nmax: int):
    for n in range(nmax + 1):
        yield from sorted(_compositions(n, d), reverse=True)


@dataclass(frozen=True, eq=False)
class FockSpace:
    modes: int
    nmax: int
    basis: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def index(self) -> dict:
        return {occ: i for i, occ in enumerate(self.basis)}

    @cached_property
    def quanta(self) -> np.ndarray:
        q = np.fromiter((sum(o) for o in self.basis), dtype=int, count=self.dim)
        q.setflags(write=False)
        return q

    def sector(self, max_quanta: int) -> np.ndarray:
        """Indices of basis states with at most ``max_quanta`` quanta."""
        return np.flatnonzero(self.quanta <= max_quanta)

    @cached_property
    def _ladders(self) -> list:
        out = []
        for mode in range(self.modes):
            rows, cols, vals = [], [], []
            for j, occ in enumerate(self.basis):
                if sum(occ) >= self.nmax:
                    continue
                up = list(occ)
                up[mode] += 1
                rows.append(self.index[tuple(up)])
                cols.append(j)
                vals.append(np.sqrt(occ[mode] + 1.0))
            adag = sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))
            out.append((adag.T.tocsr(), adag))
        return out

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v


def _sparse_dtype_fix(m):
    m = m.tocsr()
    if np.iscomplexobj(m.data) and m.nnz and max_abs(m.data.imag) == 0.0:
        m = m.real.tocsr()
    m.eliminate_zeros()
    return m


@dataclass(frozen=True, eq=False)
class FockOperator:
    space: FockSpace
    matrix: sp.csr_matrix
    quanta_degree: int = 0

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def H(self) -> "FockOperator":
        return FockOperator(self.space, self.matrix.conj().T.tocsr(), self.quanta_degree)

    def __add__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(
                self.space,
                _sparse_dtype_fix(self.matrix + other.matrix),
                max(self.quanta_degree, other.quanta_degree),
            )
        if np.isscalar(other):
            ident = sp.identity(self.space.dim, format="csr")
            return FockOperator(self.space, _sparse_dtype_fix(self.matrix + other * ident), self.quanta_degree)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return FockOperator(self.space, _sparse_dtype_fix(self.matrix * scalar), self.quanta_degree)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(
                self.space,
                _sparse_dtype_fix(self.matrix @ other.matrix),
                self.quanta_degree + other.quanta_degree,
            )
        return self.matrix @ other

    def commutator(self, other: "FockOperator") -> "FockOperator":
        return self @ other - other @ self


def build_fock(d: int, nmax: int, capacity: int = DEFAULT_CAPACITY) -> FockSpace:
    """Total-quanta truncated Fock space over C^d in graded-lex order."""
    if d < 1 or nmax < 0:
        raise ValueError(f"need d >= 1 and nmax >= 0, got d={d}, nmax={nmax}")
    size = comb(nmax + d, d)
    if size > capacity:
        raise CapacityExceeded(f"Fock dimension {size} exceeds the limit {capacity}")
    return FockSpace(d, nmax, tuple(_graded_basis(d, nmax)))


def ladder(space: FockSpace, mode: int) -> tuple[FockOperator, FockOperator]:
    """(a_mode, a_mode^dagger) on the truncated space."""
    if not 0 <= mode < space.modes:
        raise ModeOutOfRange(f"mode {mode} not in [0, {space.modes})")
    a, adag = space._ladders[mode]
    return FockOperator(space, a, 1), FockOperator(space, adag, 1)


def _check_vector(space: FockSpace, f) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (space.modes,):
        raise DimensionMismatch(f"vector of shape {f.shape} on a {space.modes}-mode space")
    return f


def _linear_combination(space: FockSpace, coeffs, which: int):
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for i, c in enumerate(coeffs):
        if c != 0:
            out = out + c * space._ladders[i][which]
    return _sparse_dtype_fix(out)


def annihilator(space: FockSpace, f) -> FockOperator:
    """A(f) = sum_i conj(f_i) a_i."""
    f = _check_vector(space, f)
    return FockOperator(space, _linear_combination(space, np.conj(f), 0), 1)


def creator(space: FockSpace, f) -> FockOperator:
    """A*(f) = sum_i f_i a_i^dagger."""
    f = _check_vector(space, f)
    return FockOperator(space, _linear_combination(space, f, 1), 1)


def second_quantize(space: FockSpace, A) -> FockOperator:
    """dGamma(A) = sum_ij A_ij a_i^dagger a_j."""
    A = np.asarray(A.entries if hasattr(A, "entries") else A)
    if A.shape != (space.modes, space.modes):
        raise DimensionMismatch(f"operator of shape {A.shape} on a {space.modes}-mode space")
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    lad = space._ladders
    for i in range(space.modes):
        for j in range(space.modes):
            if A[i, j] != 0:
                out = out + A[i, j] * (lad[i][1] @ lad[j][0])
    return FockOperator(space, _sparse_dtype_fix(out), 0)


def segal_field(space: FockSpace, f) -> FockOperator:
    """Phi(f) = (A(f) + A*(f)) / sqrt(2)."""
    return (annihilator(space, f) + creator(space, f)) * (1.0 / np.sqrt(2.0))


def field_product(space: FockSpace, f, h) -> FockOperator:
    """Normal-ordered Phi(f) Phi(h), exact as a compression onto the space.

    Phi(f)Phi(h) = 1/2 [A(f)A(h) + A*(h)A(f) + <f,h> + A*(f)A(h) + A*(f)A*(h)]
    """
    af, ah = annihilator(space, f), annihilator(space, h)
    cf, ch = creator(space, f), creator(space, h)
    inner = complex(np.vdot(f, h))
    out = af @ ah + ch @ af + cf @ ah + cf @ ch + inner
    return FockOperator(space, (out * 0.5).matrix, 2)


def assemble_hamiltonian(space: FockSpace, model: PairModel) -> FockOperator:
    """H = dGamma(T) + 1/2 sum lam_n Phi(g_n)^2 on the truncated space."""
    if model.dim != space.modes:
        raise DimensionMismatch(f"model has dim {model.dim}, space has {space.modes} modes")
    H = second_quantize(space, model.T)
    for lam, g in model.couplings:
        H = H + (0.5 * lam) * field_product(space, g, g)
    return FockOperator(space, H.matrix, 2 if model.couplings else 0)


def assemble_fiber_hamiltonian(space: FockSpace, T, gs, P) -> FockOperator:
    """H(P) = dGamma(T) + 1/2 sum Phi(g_j)^2 + sum P_j Phi(g_j) + |P|^2 / 2."""
    P = np.asarray(P, dtype=float)
    if len(gs) != P.shape[0]:
        raise DimensionMismatch(f"{len(gs)} coupling vectors but P has length {P.shape[0]}")
    H = second_quantize(space, T)
    for p, g in zip(P, gs):
        H = H + 0.5 * field_product(space, g, g)
        if p != 0:
            H = H + p * segal_field(space, g)
    H = H + 0.5 * float(P @ P)
    return FockOperator(space, H.matrix, 2)


DENSE_LIMIT = 2500


def _block_lowest(m, k: int) -> np.ndarray:
    n = m.shape[0]
    k = min(k, n)
    if n <= DENSE_LIMIT or k >= n // 10:
        d = m.toarray()
        return scipy.linalg.eigh(0.5 * (d + d.conj().T), eigvals_only=True, subset_by_index=[0, k - 1])
    # fixed start vector keeps the result reproducible; extra vectors guard near-degenerate levels
    v0 = np.full(n, 1.0 / np.sqrt(n))
    extra = min(n - 1, k + 6)
    vals = scipy.sparse.linalg.eigsh(m, k=extra, which="SA", tol=0, v0=v0, return_eigenvectors=False)
    return np.sort(vals.real)[:k]


def lowest_eigenvalues(op: FockOperator, k: int) -> np.ndarray:
    """The ``k`` smallest eigenvalues of a Hermitian Fock operator.

    The matrix is split into its connected blocks (quanta sectors for
    dGamma(A), parity sectors for pair Hamiltonians). Blocks up to
    ``DENSE_LIMIT`` states are solved densely, larger ones by Lanczos.
    """
    m = op.matrix
    m = (0.5 * (m + m.conj().T)).tocsr()
    k = min(k, m.shape[0])
    # magnitudes, so purely imaginary couplings still connect states
    n_blocks, labels = scipy.sparse.csgraph.connected_components(abs(m), directed=False)
    if n_blocks == 1:
        return _block_lowest(m, k)
    vals = []
    for b in range(n_blocks):
        idx = np.flatnonzero(labels == b)
        vals.append(_block_lowest(m[idx][:, idx], k))
    return np.sort(np.concatenate(vals))[:k]


@dataclass(frozen=True)
class SpectrumComparison:
    nmax: int
    eigs_H: np.ndarray
    eigs_pred: np.ndarray
    max_dev: float


def spectrum_compare(space: FockSpace, model: PairModel, k: int, result=None) -> SpectrumComparison:
    """Compare the lowest ``k`` levels of H with those of dGamma(S) + E.

    Both operators are truncated the same way; dGamma(S) conserves quanta,
    so its truncated spectrum is exact and H converges to it from above.
    """
    if k > space.dim:
        raise ValueError(f"k={k} exceeds the Fock dimension {space.dim}")
    if result is None:
        result = diagonalize(model)
    eigs_H = lowest_eigenvalues(assemble_hamiltonian(space, model), k)
    eigs_pred = lowest_eigenvalues(second_quantize(space, result.S), k) + result.E
    return SpectrumComparison(space.nmax, eigs_H, eigs_pred, float(np.max(np.abs(eigs_H - eigs_pred))))


def b_operator(space: FockSpace, f, pair: SymplecticPair) -> FockOperator:
    """B(f) = A(Xf) + A*(JYf)."""
    f = _check_vector(space, f)
    if pair.dim != space.modes:
        raise DimensionMismatch(f"pair has dim {pair.dim}, space has {space.modes} modes")
    return annihilator(space, pair.X @ f) + creator(space, pair.apply_J(pair.Y @ f))


@dataclass(frozen=True)
class CommutatorResidual:
    res_annih: float
    res_creat: float


def commutator_check(space: FockSpace, model: PairModel, pair: SymplecticPair, f, S) -> CommutatorResidual:
    """Residuals of [H, B(f)] = -B(Sf) and [H, B*(f)] = B*(Sf) on the safe sector.

    Columns are restricted to states with at most ``nmax - 3`` quanta, where
    both sides are computed without truncation error.
    """
    if space.nmax < 3:
        raise SectorTooSmall(f"nmax={space.nmax} leaves no safe sector for the commutator")
    f = _check_vector(space, f)
    s = as_hermitian(S).entries
    H = assemble_hamiltonian(space, model)
    B = b_operator(space, f, pair)
    BS = b_operator(space, s @ f, pair)
    cols = space.sector(space.nmax - 3)
    annih = (H.commutator(B) + BS).matrix[:, cols]
    creat = (H.commutator(B.H) - BS.H).matrix[:, cols]
    return CommutatorResidual(max_abs(annih.toarray()), max_abs(creat.toarray()))


def random_safe_states(space: FockSpace, samples: int, max_quanta: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized complex Gaussian states supported on quanta <= max_quanta, one per column."""
    idx = space.sector(max_quanta)
    psi = np.zeros((space.dim, samples), dtype=complex)
    psi[idx] = rng.standard_normal((idx.size, samples)) + 1j * rng.standard_normal((idx.size, samples))
    return psi / np.linalg.norm(psi, axis=0)


@dataclass(frozen=True)
class InequalityReport:
    samples: int
    violations: dict
    checks: dict
    max_identity_residual: float

    @property
    def total_violations(self) -> int:
        return int(sum(self.violations.values()))


def _colnorm(m) -> np.ndarray:
    return np.linalg.norm(m, axis=0)


def _expect(op: FockOperator, psi: np.ndarray) -> np.ndarray:
    return np.real(np.sum(np.conj(psi) * (op.matrix @ psi), axis=0))


def inequality_suite(
    space: FockSpace,
    model: PairModel,
    samples: int = 1000,
    seed: int = 42,
    cs=(0.5, 1.0, 2.0),
    slack: float = 1e-10,
) -> InequalityReport:
    """Check the second-quantization inequalities on random safe-sector states.

    Families, each evaluated with T as the one-particle operator and the
    model's coupling vectors:

    ``phi2``     1/2 ||Phi(g)^2 psi|| <= ||T^{-1/2}g||^2 ||dG(T) psi|| + ||g||^2 ||psi||
    ``aa``       ||A(f1)A(f2) psi|| <= ||T^{-1/2}f1|| ||T^{-1/2}f2||
                 (||dG(T) psi||^2 - ||dG(T^2)^{1/2} psi||^2)^{1/2}
    ``key``      ||dG(T) psi||^2 + ||c sum Phi(g)^2 psi||^2
                 <= ||(dG(T) + c sum Phi(g)^2) psi||^2 + c sum ||T^{1/2} g||^2 ||psi||^2
    ``identity`` -2 Re<dG(T) psi, Phi(g)^2 psi> + 2 ||dG(T)^{1/2} Phi(g) psi||^2
                 - ||T^{1/2} g||^2 ||psi||^2 = 0

    An inequality lhs <= rhs counts as violated when
    lhs - rhs > slack * (1 + |lhs| + |rhs|).
    """
    if space.nmax < 2:
        raise SectorTooSmall(f"nmax={space.nmax} leaves no safe sector for quadratic terms")
    if model.dim != space.modes:
        raise DimensionMismatch(f"model has dim {model.dim}, space has {space.modes} modes")
    rng = np.random.default_rng(seed)
    psi = random_safe_states(space, samples, space.nmax - 2, rng)
    t = model.T.entries
    t_m = inv_sqrtm(model.T).entries
    t_p = sqrtm(model.T).entries
    dG = second_quantize(space, t)
    dG2 = second_quantize(space, t @ t)
    dG_psi = dG.matrix @ psi
    n_dG = _colnorm(dG_psi)
    n_psi = _colnorm(psi)
    gs = [g for _, g in model.couplings] or [np.eye(model.dim)[0]]

    violations = {"phi2": 0, "aa": 0, "key": 0}
    checks = {"phi2": 0, "aa": 0, "key": 0, "identity": 0}

    def count(name, lhs, rhs):
        bad = lhs - rhs > slack * (1.0 + np.abs(lhs) + np.abs(rhs))
        violations[name] += int(np.count_nonzero(bad))
        checks[name] += lhs.size

    phi2 = [field_product(space, g, g) for g in gs]
    max_id = 0.0
    for g, p2 in zip(gs, phi2):
        p2_psi = p2.matrix @ psi
        count(
            "phi2",
            0.5 * _colnorm(p2_psi),
            np.linalg.norm(t_m @ g) ** 2 * n_dG + np.vdot(g, g).real * n_psi,
        )
        phi_psi = segal_field(space, g).matrix @ psi
        ident = (
            -2.0 * np.real(np.sum(np.conj(dG_psi) * p2_psi, axis=0))
            + 2.0 * np.real(np.sum(np.conj(phi_psi) * (dG.matrix @ phi_psi), axis=0))
            - np.linalg.norm(t_p @ g) ** 2 * n_psi**2
        )
        checks["identity"] += ident.size
        max_id = max(max_id, float(np.max(np.abs(ident))))

    spread = np.maximum(n_dG**2 - _expect(dG2, psi), 0.0)
    for i, f1 in enumerate(gs):
        for f2 in gs[i:]:
            aa = annihilator(space, f1).matrix @ (annihilator(space, f2).matrix @ psi)
            count(
                "aa",
                _colnorm(aa),
                np.linalg.norm(t_m @ f1) * np.linalg.norm(t_m @ f2) * np.sqrt(spread),
            )

    sum_p2_psi = sum(p.matrix @ psi for p in phi2)
    sum_tp = sum(np.linalg.norm(t_p @ g) ** 2 for g in gs)
    for c in cs:
        count(
            "key",
            n_dG**2 + _colnorm(c * sum_p2_psi) ** 2,
            _colnorm(dG_psi + c * sum_p2_psi) ** 2 + c * sum_tp * n_psi**2,
        )
    return InequalityReport(samples, violations, checks, max_id)


def weyl_check(nmax: int, f: complex, h: complex, safe_quanta: int | None = None) -> float:
    """Single-mode check of exp(iPhi(f)) exp(iPhi(h)) = exp(-i Im<f,h>/2) exp(iPhi(f+h)).

    Matrix exponentials of truncated fields are compared on the block of
    states with at most ``safe_quanta`` quanta (default nmax // 2).
    """
    space = build_fock(1, nmax)
    if safe_quanta is None:
        safe_quanta = nmax // 2

    def weyl(z):
        return scipy.linalg.expm(1j * segal_field(space, np.array([z])).dense())

    phase = np.exp(-0.5j * np.imag(np.conj(f) * h))
    diff = weyl(f) @ weyl(h) - phase * weyl(f + h)
    idx = space.sector(safe_quanta)
    return max_abs(diff[np.ix_(idx, idx)])
