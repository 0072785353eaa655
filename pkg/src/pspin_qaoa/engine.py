"""Layer-by-layer QAOA circuit in the collective-spin sector.

One step applies the diagonal phase unitary exp(-i gamma Hz) followed by the
mixer exp(-i beta Hx) with Hx = -sum_j sigma^x_j; the mixer is evaluated
through the cached spectral decomposition of the collective-X matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sector import (
    ProblemSpec,
    SymmetricBasis,
    TargetSpectrum,
    XSpectralDecomposition,
    build_basis,
    diagonalize_target,
    hz_diagonal,
    plus_state,
    target_diagonal,
    x_off_diagonal,
    x_spectral_decomposition,
)

_SAFE_DOUBLE = 2.0**53


@dataclass(frozen=True)
class QaoaParams:
    """The 2P circuit angles (gamma_1..gamma_P, beta_1..beta_P)."""

    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        b = np.atleast_1d(np.asarray(self.betas, dtype=float))
        if g.shape != b.shape or g.ndim != 1 or g.size < 1:
            raise ValueError("gammas and betas must be equal-length 1-d sequences, P >= 1")
        g.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def depth(self) -> int:
        return self.gammas.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.gammas, self.betas])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "QaoaParams":
        x = np.asarray(x, dtype=float)
        if x.size % 2 != 0:
            raise ValueError("parameter vector length must be even")
        half = x.size // 2
        return cls(gammas=x[:half], betas=x[half:])


@dataclass(frozen=True)
class EvaluationRecord:
    """Figures of merit of a single circuit evaluation."""

    energy: float
    residual: float
    fidelity: float
    annealing_time: float


class CircuitContext:
    """Per-(N, p, h) immutable workspace shared by many evaluations."""

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        self.basis: SymmetricBasis = build_basis(spec.n_sites)
        self.hz: tuple[int, ...] = tuple(hz_diagonal(self.basis, spec.p_exponent))
        self.max_abs_hz: int = max(abs(v) for v in self.hz)
        self.hz_float = np.array([float(v) for v in self.hz])
        self.target_diag = target_diagonal(spec, self.basis)
        self.x_off = x_off_diagonal(self.basis)
        self.xdec: XSpectralDecomposition = x_spectral_decomposition(spec.n_sites)
        self.plus = plus_state(self.basis)

    def apply_phase(self, state: np.ndarray, gamma: float) -> np.ndarray:
        return state * _phase_factors(gamma, self.hz, self.hz_float, self.max_abs_hz)

    def apply_mixer(self, state: np.ndarray, beta: float) -> np.ndarray:
        v = self.xdec.eigenvectors
        lam = self.xdec.eigenvalues
        return v @ (np.exp(1j * beta * lam) * (v.T @ state))

    def apply_x(self, state: np.ndarray) -> np.ndarray:
        out = np.zeros_like(state)
        out[:-1] += self.x_off * state[1:]
        out[1:] += self.x_off * state[:-1]
        return out

    def apply_target(self, state: np.ndarray) -> np.ndarray:
        out = self.target_diag * state
        if self.spec.field != 0.0:
            h = self.spec.field
            out[:-1] -= h * self.x_off * state[1:]
            out[1:] -= h * self.x_off * state[:-1]
        return out


@lru_cache(maxsize=None)
def circuit_context(spec: ProblemSpec) -> CircuitContext:
    return CircuitContext(spec)


@lru_cache(maxsize=None)
def cached_spectrum(spec: ProblemSpec) -> TargetSpectrum:
    return diagonalize_target(spec)


def _phase_factors(gamma, hz_ints, hz_float, max_abs_hz) -> np.ndarray:
    """exp(-i gamma hz_k) with an exact-integer fallback for huge phases."""
    if abs(gamma) * max_abs_hz <= _SAFE_DOUBLE:
        return np.exp(-1j * gamma * hz_float)
    import mpmath

    with mpmath.workdps(40):
        two_pi = 2 * mpmath.pi
        g = mpmath.mpf(gamma)
        angles = np.array([float(mpmath.fmod(g * v, two_pi)) for v in hz_ints])
    return np.exp(-1j * angles)


def apply_phase_layer(state: np.ndarray, gamma: float, hz) -> np.ndarray:
    """Multiply amplitude_k by exp(-i gamma hz_k)."""
    hz = list(hz)
    hz_float = np.array([float(v) for v in hz])
    max_abs = max(abs(int(v)) for v in hz)
    return np.asarray(state, dtype=complex) * _phase_factors(gamma, hz, hz_float, max_abs)


def apply_mixer_layer(
    state: np.ndarray, beta: float, xdec: XSpectralDecomposition
) -> np.ndarray:
    """Apply exp(-i beta Hx) = exp(+i beta sum_j sigma^x_j)."""
    v = xdec.eigenvectors
    return v @ (np.exp(1j * beta * xdec.eigenvalues) * (v.T @ np.asarray(state, complex)))


def qaoa_state(spec: ProblemSpec, params: QaoaParams) -> np.ndarray:
    """Run the full circuit on |+>, phase layer first within each step."""
    ctx = circuit_context(spec)
    psi = ctx.plus.copy()
    for gamma, beta in zip(params.gammas, params.betas):
        psi = ctx.apply_phase(psi, gamma)
        psi = ctx.apply_mixer(psi, beta)
    return psi


def energy(spec: ProblemSpec, state: np.ndarray) -> float:
    """<state| H_target |state>, asserted real."""
    ctx = circuit_context(spec)
    val = np.vdot(state, ctx.apply_target(np.asarray(state, complex)))
    if abs(val.imag) >= 1e-12 * max(1.0, abs(val.real)):
        raise ValueError(f"energy has non-negligible imaginary part {val.imag}")
    return float(val.real)


def residual_energy(spectrum: TargetSpectrum, energy_value: float) -> float:
    """(E - E_min) / (E_max - E_min), clamped only within roundoff of [0, 1]."""
    if spectrum.e_max <= spectrum.e_min:
        raise ValueError("degenerate spectrum: e_max must exceed e_min")
    if not (spectrum.e_min - 1e-9 <= energy_value <= spectrum.e_max + 1e-9):
        raise ValueError(
            f"energy {energy_value} outside spectrum [{spectrum.e_min}, {spectrum.e_max}]"
        )
    res = (energy_value - spectrum.e_min) / (spectrum.e_max - spectrum.e_min)
    return min(max(res, 0.0), 1.0)


def fidelity(state: np.ndarray, target: np.ndarray) -> float:
    """Squared overlap |<target|state>|^2."""
    return float(abs(np.vdot(target, state)) ** 2)


def equivalent_annealing_time(spec: ProblemSpec, params: QaoaParams) -> float:
    """tau/hbar = sum_m [beta_m + (1-h) gamma_m N^(p-1)]."""
    scale = (1.0 - spec.field) * spec.n_sites ** (spec.p_exponent - 1)
    return float(np.sum(params.betas) + scale * np.sum(params.gammas))


def energy_and_gradient(spec: ProblemSpec, params: QaoaParams) -> tuple[float, np.ndarray]:
    """Exact analytic gradient of the energy via one forward and one adjoint sweep.

    The reverse sweep peels layers off both the state and the adjoint vector
    H|psi>, so the cost is O(P N^2) regardless of depth.
    """
    ctx = circuit_context(spec)
    gammas, betas = params.gammas, params.betas
    depth = params.depth
    # d/dgamma of the phase layer brings down +i M^p = -i hz
    d_diag = -ctx.hz_float

    phi = ctx.plus.copy()
    for m in range(depth):
        phi = ctx.apply_phase(phi, gammas[m])
        phi = ctx.apply_mixer(phi, betas[m])

    adj = ctx.apply_target(phi)
    e_val = np.vdot(phi, adj)
    if abs(e_val.imag) >= 1e-12 * max(1.0, abs(e_val.real)):
        raise ValueError(f"energy has non-negligible imaginary part {e_val.imag}")

    grad_g = np.zeros(depth)
    grad_b = np.zeros(depth)
    for m in reversed(range(depth)):
        grad_b[m] = 2.0 * np.real(np.vdot(adj, 1j * ctx.apply_x(phi)))
        phi = ctx.apply_mixer(phi, -betas[m])
        adj = ctx.apply_mixer(adj, -betas[m])
        grad_g[m] = 2.0 * np.real(np.vdot(adj, 1j * d_diag * phi))
        phi = ctx.apply_phase(phi, -gammas[m])
        adj = ctx.apply_phase(adj, -gammas[m])
    return float(e_val.real), np.concatenate([grad_g, grad_b])


def evaluate(spec: ProblemSpec, params: QaoaParams) -> EvaluationRecord:
    """Energy, residual, fidelity and equivalent annealing time in one record."""
    spectrum = cached_spectrum(spec)
    state = qaoa_state(spec, params)
    e_val = energy(spec, state)
    return EvaluationRecord(
        energy=e_val,
        residual=residual_energy(spectrum, e_val),
        fidelity=fidelity(state, spectrum.ground_state),
        annealing_time=equivalent_annealing_time(spec, params),
    )
