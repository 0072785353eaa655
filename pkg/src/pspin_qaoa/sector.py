"""Exact linear algebra in the maximum-spin (S = N/2) sector.

The fully-connected p-spin Hamiltonian commutes with total spin, and the
dynamics we simulate starts from the fully x-polarized state, so everything
lives in the (N+1)-dimensional Dicke subspace labeled by the magnetization
M_k = N - 2k, with k the number of down spins.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import lgamma, log

import numpy as np
import scipy.linalg

# M^p is carried as an exact Python integer; reject anything that would not
# fit a 128-bit signed phase accumulator.
_MAX_PHASE_INT = 2**127


@dataclass(frozen=True)
class ProblemSpec:
    """The triple (N, p, h) defining the target Hamiltonian."""

    n_sites: int
    p_exponent: int
    field: float = 0.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {self.n_sites}")
        if self.p_exponent < 2:
            raise ValueError(f"p_exponent must be >= 2, got {self.p_exponent}")
        if self.field < 0:
            raise ValueError(f"field must be >= 0, got {self.field}")
        if self.n_sites**self.p_exponent >= _MAX_PHASE_INT:
            raise OverflowError(
                f"N^p = {self.n_sites}^{self.p_exponent} exceeds the supported "
                "128-bit integer width for phase arithmetic"
            )


@dataclass(frozen=True)
class SymmetricBasis:
    """Magnetization labels of the maximum-spin sector, M_k = N - 2k."""

    n_sites: int
    magnetizations: np.ndarray

    @property
    def dimension(self) -> int:
        return self.n_sites + 1


@dataclass(frozen=True)
class XSpectralDecomposition:
    """Eigendecomposition of the collective-X operator, V diag(lam) V^T."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class TargetSpectrum:
    """Extremal eigenvalues, gap and ground state of the sector Hamiltonian."""

    e_min: float
    e_max: float
    spectral_gap: float
    ground_state: np.ndarray
    eigenvalues: np.ndarray


def build_basis(n_sites: int) -> SymmetricBasis:
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    mags = n_sites - 2 * np.arange(n_sites + 1, dtype=np.int64)
    mags.setflags(write=False)
    return SymmetricBasis(n_sites=n_sites, magnetizations=mags)


def plus_state(basis: SymmetricBasis) -> np.ndarray:
    """Fully x-polarized state; amplitude_k = sqrt(C(N,k)/2^N).

    Log-gamma accumulation keeps the binomial weights finite up to N ~ 1000.
    """
    n = basis.n_sites
    k = np.arange(n + 1)
    log_amp = 0.5 * (
        lgamma(n + 1)
        - np.array([lgamma(j + 1) + lgamma(n - j + 1) for j in k])
        - n * log(2.0)
    )
    amp = np.exp(log_amp)
    return amp.astype(complex)


def collective_x_matrix(basis: SymmetricBasis) -> np.ndarray:
    """Matrix of sum_j sigma^x_j in the Dicke basis (symmetric tridiagonal)."""
    n = basis.n_sites
    k = np.arange(n)
    off = np.sqrt((k + 1.0) * (n - k))
    mat = np.zeros((n + 1, n + 1))
    mat[k, k + 1] = off
    mat[k + 1, k] = off
    return mat


def x_off_diagonal(basis: SymmetricBasis) -> np.ndarray:
    """Off-diagonal band of the collective-X matrix, entry k = sqrt((k+1)(N-k))."""
    n = basis.n_sites
    k = np.arange(n)
    return np.sqrt((k + 1.0) * (n - k))


def hz_diagonal(basis: SymmetricBasis, p: int) -> list[int]:
    """Diagonal of -(sum_j sigma^z_j)^p: entry k is the exact integer -(M_k)^p."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    n = basis.n_sites
    if n**p >= _MAX_PHASE_INT:
        raise OverflowError(f"|M|^p up to {n}^{p} exceeds the supported integer width")
    return [-(int(m) ** p) for m in basis.magnetizations]


def target_diagonal(spec: ProblemSpec, basis: SymmetricBasis) -> np.ndarray:
    """Diagonal part of the target Hamiltonian, -(M_k)^p / N^(p-1)."""
    scale = float(spec.n_sites ** (spec.p_exponent - 1))
    hz = hz_diagonal(basis, spec.p_exponent)
    return np.array([float(v) for v in hz]) / scale


def target_matrix(
    spec: ProblemSpec, basis: SymmetricBasis, xmat: np.ndarray
) -> np.ndarray:
    if basis.n_sites != spec.n_sites or xmat.shape != (basis.dimension, basis.dimension):
        raise ValueError("inconsistent system size across inputs")
    mat = -spec.field * xmat
    mat[np.diag_indices_from(mat)] = target_diagonal(spec, basis)
    return mat


@lru_cache(maxsize=None)
def x_spectral_decomposition(n_sites: int) -> XSpectralDecomposition:
    """Cached eigendecomposition of the collective-X matrix for size N."""
    basis = build_basis(n_sites)
    diag = np.zeros(n_sites + 1)
    off = x_off_diagonal(basis)
    try:
        lam, vec = scipy.linalg.eigh_tridiagonal(diag, off)
    except scipy.linalg.LinAlgError as exc:
        raise RuntimeError(f"collective-X eigensolver failed for N={n_sites}") from exc
    lam.setflags(write=False)
    vec.setflags(write=False)
    return XSpectralDecomposition(eigenvalues=lam, eigenvectors=vec)


def dynamical_gap(spec: ProblemSpec) -> float:
    """Spectral gap relevant for dynamics started from the x-polarized state.

    For even p the Hamiltonian commutes with the spin-flip reflection
    k -> N - k and |+> lies in the even subspace, so the full-sector gap
    E1 - E0 collapses to an exponentially small parity splitting below the
    critical field while the dynamics never couples the two parity sectors.
    In that case the gap is taken within the reflection-even block; for odd p
    there is no such symmetry and the full-sector gap is returned.
    """
    if spec.p_exponent % 2 == 1:
        return diagonalize_target(spec).spectral_gap
    basis = build_basis(spec.n_sites)
    xmat = collective_x_matrix(basis)
    mat = target_matrix(spec, basis, xmat)
    n = spec.n_sites
    half = (n + 1) // 2
    m = half + (1 if n % 2 == 0 else 0)
    proj = np.zeros((n + 1, m))
    for j in range(half):
        proj[j, j] = proj[n - j, j] = 1.0 / np.sqrt(2.0)
    if n % 2 == 0:
        proj[n // 2, m - 1] = 1.0
    block = proj.T @ mat @ proj
    w = scipy.linalg.eigh(block, eigvals_only=True)
    return float(w[1] - w[0])


def diagonalize_target(spec: ProblemSpec) -> TargetSpectrum:
    """Full spectrum of the sector Hamiltonian, with a phase-fixed ground state.

    For h=0 and p even the ground space is the degenerate pair of fully
    polarized states; the returned ground state is re-projected onto their
    symmetric combination, which is the state the circuit can actually reach.
    """
    basis = build_basis(spec.n_sites)
    diag = target_diagonal(spec, basis)
    off = -spec.field * x_off_diagonal(basis)
    try:
        w, v = scipy.linalg.eigh_tridiagonal(diag, off)
    except scipy.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"target eigensolver failed for N={spec.n_sites}, "
            f"p={spec.p_exponent}, h={spec.field}"
        ) from exc

    if spec.field == 0.0 and spec.p_exponent % 2 == 0:
        # degenerate ferromagnetic pair: use the symmetric cat combination
        ground = np.zeros(basis.dimension)
        ground[0] = ground[-1] = 1.0 / np.sqrt(2.0)
    else:
        ground = v[:, 0].copy()
        idx = int(np.argmax(np.abs(ground)))
        if ground[idx] < 0:
            ground = -ground
    ground = ground.astype(complex)
    ground.setflags(write=False)
    w.setflags(write=False)
    gap = float(w[1] - w[0]) if basis.dimension > 1 else 0.0
    return TargetSpectrum(
        e_min=float(w[0]),
        e_max=float(w[-1]),
        spectral_gap=gap,
        ground_state=ground,
        eigenvalues=w,
    )
