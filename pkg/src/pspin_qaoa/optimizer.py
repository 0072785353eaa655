"""Quasi-Newton minimization of the variational energy.

Dense inverse-Hessian BFGS with a strong-Wolfe line search (bracketing plus
zoom, Nocedal-Wright style), written from scratch so that termination,
iteration counts and determinism are fully under our control.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .engine import QaoaParams, EvaluationRecord, energy_and_gradient, evaluate
from .sector import ProblemSpec

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass(frozen=True)
class OptimizerConfig:
    grad_tol: float = 1e-9
    max_iters: int = 10000
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    stagnation_tol: float = 1e-15

    def __post_init__(self):
        if not (0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0):
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.grad_tol <= 0 or self.max_iters < 1:
            raise ValueError("grad_tol must be positive and max_iters >= 1")


@dataclass(frozen=True)
class RandomInit:
    """Independent uniform angles in [low, high] for every component."""

    low: float = 0.0
    high: float = np.pi

    def sample(self, depth: int, spec: ProblemSpec, seed: int) -> QaoaParams:
        return r_init(depth, seed, low=self.low, high=self.high)

    def tag(self) -> str:
        return "r"


@dataclass(frozen=True)
class LinearInit:
    """Trotterized linear annealing schedule with multiplicative noise."""

    dt: float = 1.0
    noise_amplitude: float = 0.05

    def __post_init__(self):
        if self.dt <= 0 or self.noise_amplitude < 0:
            raise ValueError("dt must be positive and noise_amplitude >= 0")

    def sample(self, depth: int, spec: ProblemSpec, seed: int) -> QaoaParams:
        return l_init(depth, spec, self.dt, self.noise_amplitude, seed)

    def tag(self) -> str:
        return "l"


InitScheme = Union[RandomInit, LinearInit]


@dataclass(frozen=True)
class OptimizationResult:
    params_star: QaoaParams
    record: EvaluationRecord
    n_iters: int
    converged: bool
    scheme: InitScheme
    seed: int


@dataclass(frozen=True)
class MultiStartStats:
    mean_residual: float
    std_residual: float
    min_residual: float
    max_residual: float
    mean_iters: float
    n_converged: int
    results: tuple[OptimizationResult, ...]


@dataclass
class BfgsResult:
    x: np.ndarray
    value: float
    grad: np.ndarray
    n_iters: int
    converged: bool


def derive_seed(*keys) -> int:
    """Stable 64-bit seed from a mixed int/float key tuple (order-sensitive)."""
    ints = []
    for k in keys:
        if isinstance(k, float):
            ints.append(struct.unpack("<Q", struct.pack("<d", k))[0])
        else:
            ints.append(int(k) & 0xFFFFFFFFFFFFFFFF)
    ss = np.random.SeedSequence(ints)
    return int(ss.generate_state(1, np.uint64)[0])


def r_init(depth: int, seed: int, low: float = 0.0, high: float = np.pi) -> QaoaParams:
    """2P independent uniform draws in [low, high]."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(low, high, size=2 * depth)
    return QaoaParams(gammas=x[:depth], betas=x[depth:])


def l_init(
    depth: int,
    spec: ProblemSpec,
    dt: float = 1.0,
    noise_amplitude: float = 0.05,
    seed: int = 0,
) -> QaoaParams:
    """Linear-schedule start: gamma_m = dt (m/P) / N^(p-1),
    beta_m = dt (1 - (m/P)(1-h)), each entry scaled by (1 + r) with
    r uniform in [-noise_amplitude, +noise_amplitude]."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if dt <= 0:
        raise ValueError("dt must be positive")
    m = np.arange(1, depth + 1) / depth
    gammas = dt * m / spec.n_sites ** (spec.p_exponent - 1)
    betas = dt * (1.0 - m * (1.0 - spec.field))
    if noise_amplitude > 0:
        rng = np.random.default_rng(seed)
        noise = 1.0 + rng.uniform(-noise_amplitude, noise_amplitude, size=2 * depth)
        gammas = gammas * noise[:depth]
        betas = betas * noise[depth:]
    return QaoaParams(gammas=gammas, betas=betas)


def _strong_wolfe(
    objective: Objective,
    x: np.ndarray,
    f0: float,
    g0: np.ndarray,
    direction: np.ndarray,
    c1: float,
    c2: float,
    max_bracket: int = 30,
    max_zoom: int = 40,
):
    """Bracketing + zoom line search; returns (alpha, f, g) or None on failure."""
    der0 = float(g0 @ direction)
    if der0 >= 0.0:
        return None

    def eval_at(alpha):
        f, g = objective(x + alpha * direction)
        return f, g, float(g @ direction)

    def zoom(a_lo, f_lo, der_lo, a_hi, f_hi):
        for _ in range(max_zoom):
            # quadratic interpolation with bisection safeguard
            denom = f_hi - f_lo - der_lo * (a_hi - a_lo)
            if abs(denom) > 1e-300:
                a = a_lo - 0.5 * der_lo * (a_hi - a_lo) ** 2 / denom
            else:
                a = 0.5 * (a_lo + a_hi)
            lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
            span = hi - lo
            if not (lo + 0.05 * span <= a <= hi - 0.05 * span):
                a = 0.5 * (a_lo + a_hi)
            if span <= 1e-16 * max(1.0, abs(a_lo)):
                return None
            f, g, der = eval_at(a)
            if f > f0 + c1 * a * der0 or f >= f_lo:
                a_hi, f_hi = a, f
            else:
                if abs(der) <= -c2 * der0:
                    return a, f, g
                if der * (a_hi - a_lo) >= 0:
                    a_hi, f_hi = a_lo, f_lo
                a_lo, f_lo, der_lo = a, f, der
        return None

    a_prev, f_prev, der_prev = 0.0, f0, der0
    a = 1.0
    for i in range(max_bracket):
        f, g, der = eval_at(a)
        if f > f0 + c1 * a * der0 or (i > 0 and f >= f_prev):
            return zoom(a_prev, f_prev, der_prev, a, f)
        if abs(der) <= -c2 * der0:
            return a, f, g
        if der >= 0:
            return zoom(a, f, der, a_prev, f_prev)
        a_prev, f_prev, der_prev = a, f, der
        a *= 2.0
    return None


def bfgs_minimize(
    objective: Objective, x0: Sequence[float], config: OptimizerConfig | None = None
) -> BfgsResult:
    """Minimize a smooth objective returning (value, gradient).

    Terminates on gradient infinity-norm, relative stagnation, line-search
    failure, or max_iters; deterministic for a deterministic objective.
    """
    cfg = config or OptimizerConfig()
    x = np.array(x0, dtype=float)
    dim = x.size
    f, g = objective(x)
    hinv = np.eye(dim)
    n_iters = 0
    converged = bool(np.max(np.abs(g)) <= cfg.grad_tol)
    first_update = True
    stagnant_streak = 0

    while not converged and n_iters < cfg.max_iters:
        direction = -hinv @ g
        if float(direction @ g) >= 0.0:
            # numerical breakdown of the inverse-Hessian estimate: reset
            hinv = np.eye(dim)
            first_update = True
            direction = -g
        ls = _strong_wolfe(objective, x, f, g, direction, cfg.wolfe_c1, cfg.wolfe_c2)
        if ls is None and not np.allclose(direction, -g):
            # retry once along steepest descent before giving up
            hinv = np.eye(dim)
            first_update = True
            direction = -g
            ls = _strong_wolfe(objective, x, f, g, direction, cfg.wolfe_c1, cfg.wolfe_c2)
        if ls is None:
            break
        alpha, f_new, g_new = ls
        s = alpha * direction
        y = g_new - g
        if abs(f - f_new) <= cfg.stagnation_tol * max(1.0, abs(f)):
            stagnant_streak += 1
        else:
            stagnant_streak = 0
        x = x + s
        f, g = f_new, g_new
        n_iters += 1
        if np.max(np.abs(g)) <= cfg.grad_tol or stagnant_streak >= 2:
            converged = True
            break
        sy = float(s @ y)
        if sy > 1e-14 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            if first_update:
                hinv = (sy / float(y @ y)) * np.eye(dim)
                first_update = False
            rho = 1.0 / sy
            hy = hinv @ y
            hinv = (
                hinv
                - rho * (np.outer(s, hy) + np.outer(hy, s))
                + rho * (1.0 + rho * float(y @ hy)) * np.outer(s, s)
            )
    return BfgsResult(x=x, value=f, grad=g, n_iters=n_iters, converged=converged)


def optimize(
    spec: ProblemSpec,
    depth: int,
    scheme: InitScheme,
    config: OptimizerConfig | None = None,
    seed: int = 0,
) -> OptimizationResult:
    """Run BFGS on the analytic energy/gradient from the scheme's start point.

    Internally the gamma coordinates are rescaled by N^(p-1): the phase layer
    winds as gamma M^p with |M^p| up to N^p, so the raw landscape curvature is
    wildly anisotropic between gamma and beta directions. The rescaling acts
    as a diagonal preconditioner and does not change the reported optimum.
    """
    cfg = config or OptimizerConfig()
    params0 = scheme.sample(depth, spec, seed)
    scale = float(spec.n_sites ** (spec.p_exponent - 1))

    def objective(z):
        params = QaoaParams(gammas=z[:depth] / scale, betas=z[depth:])
        value, grad = energy_and_gradient(spec, params)
        grad = grad.copy()
        grad[:depth] /= scale
        return value, grad

    z0 = params0.to_vector()
    z0[:depth] *= scale
    res = bfgs_minimize(objective, z0, cfg)
    params_star = QaoaParams(gammas=res.x[:depth] / scale, betas=res.x[depth:])
    return OptimizationResult(
        params_star=params_star,
        record=evaluate(spec, params_star),
        n_iters=res.n_iters,
        converged=res.converged,
        scheme=scheme,
        seed=seed,
    )


def multi_start(
    spec: ProblemSpec,
    depth: int,
    scheme: InitScheme,
    n_restarts: int,
    base_seed: int = 0,
    config: OptimizerConfig | None = None,
) -> MultiStartStats:
    """Independent seeded restarts; statistics are order-independent."""
    if n_restarts < 1:
        raise ValueError("n_restarts must be >= 1")
    results = tuple(
        optimize(spec, depth, scheme, config, seed=derive_seed(base_seed, i))
        for i in range(n_restarts)
    )
    residuals = np.array([r.record.residual for r in results])
    iters = np.array([r.n_iters for r in results], dtype=float)
    return MultiStartStats(
        mean_residual=float(residuals.mean()),
        std_residual=float(residuals.std()),
        min_residual=float(residuals.min()),
        max_residual=float(residuals.max()),
        mean_iters=float(iters.mean()),
        n_converged=int(sum(r.converged for r in results)),
        results=results,
    )
