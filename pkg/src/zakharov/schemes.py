"""Time stepping: Glassey's linearly-implicit scheme and the DVDM scheme.

Glassey advances N by a symmetric three-level update and E by a Crank-Nicolson
type solve, so each step needs only cyclic tridiagonal solves. DVDM is fully
implicit; each step solves for ``(E, N)`` by simplified Newton with the
Jacobian frozen at a Glassey-predicted guess.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exact import InitialData
from .grid import Grid, ShapeError, central_diff, norm, second_diff, sobolev_constant
from .linalg import CyclicTridiagonal, Factorization, assemble_newton_system, factor, poisson_meanzero

FIRST_STEP_VARIANTS = ("G", "GP", "GN")
SCHEMES = ("GLASSEY", "DVDM")


class NewtonDivergenceError(ArithmeticError):
    def __init__(self, message: str, step: int, history: list[float]):
        super().__init__(message)
        self.step = step
        self.history = history


@dataclass(frozen=True)
class State:
    E: np.ndarray
    N: np.ndarray
    V: np.ndarray | None = None
    step: int = 0
    t: float = 0.0
    newton_iters: int = 0

    def __post_init__(self):
        K = np.shape(self.E)[0]
        if np.shape(self.N) != (K,) or (self.V is not None and np.shape(self.V) != (K,)):
            raise ShapeError("E, N and V must have the same length")


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    newton_eps: float = 1e-8
    newton_max_iter: int = 50
    first_step_variant: str = "GN"
    scheme: str = "GLASSEY"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.newton_eps > 0:
            raise ValueError(f"newton_eps must be positive, got {self.newton_eps!r}")
        if int(self.newton_max_iter) != self.newton_max_iter or self.newton_max_iter < 1:
            raise ValueError(f"newton_max_iter must be a positive integer, got {self.newton_max_iter!r}")
        object.__setattr__(self, "first_step_variant", self.first_step_variant.upper())
        object.__setattr__(self, "scheme", self.scheme.upper())
        if self.first_step_variant not in FIRST_STEP_VARIANTS:
            raise ValueError(f"unknown first-step variant {self.first_step_variant!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")


# ---------------------------------------------------------------- Glassey


def glassey_first_N(E0, N0, Nt0, g: Grid, dt: float, variant: str = "GN") -> np.ndarray:
    """Second time level of N from ``N(0)``, ``N_t(0)`` and ``E(0)``.

    The Taylor term of GP expands ``(|E|^2)_xx = 2|E_x|^2 + 2 Re(conj(E) E_xx)``
    with central differences. GN removes the mean of the increment.
    """
    variant = variant.upper()
    E0, N0, Nt0 = np.asarray(E0), np.asarray(N0, dtype=float), np.asarray(Nt0, dtype=float)
    if not E0.shape == N0.shape == Nt0.shape == (g.K,):
        raise ShapeError("E0, N0 and Nt0 must have length K")
    N1 = N0 + dt * Nt0
    if variant == "G":
        return N1
    if variant not in ("GP", "GN"):
        raise ValueError(f"unknown first-step variant {variant!r}")
    dE = central_diff(E0, g)
    N_tt = second_diff(N0, g) + 2.0 * np.abs(dE) ** 2 + 2.0 * np.real(np.conj(E0) * second_diff(E0, g))
    N1 = N1 + 0.5 * dt**2 * N_tt
    if variant == "GN":
        N1 = N1 - np.sum(N1 - N0) / g.K
    return N1


def glassey_N_matrix(g: Grid, dt: float) -> CyclicTridiagonal:
    """``I - dt^2/2 D2``."""
    c = 0.5 * dt**2 / g.dx**2
    return CyclicTridiagonal.from_stencil(-c, np.full(g.K, 1.0 + 2.0 * c))


def glassey_step_N(N_prev, N_curr, E_curr, F: Factorization, g: Grid, dt: float) -> np.ndarray:
    f = np.abs(E_curr) ** 2
    return -N_prev - 2.0 * f + 2.0 * F.solve(N_curr + f)


def glassey_E_matrix(N_curr, N_next, g: Grid, dt: float) -> CyclicTridiagonal:
    """``2i I + dt (D2 - diag(mean of N_curr, N_next))``."""
    off = dt / g.dx**2
    diag = 2j - 2.0 * off - dt * 0.5 * (np.asarray(N_curr) + np.asarray(N_next))
    return CyclicTridiagonal.from_stencil(off, diag)


def glassey_step_E(E_curr, N_curr, N_next, g: Grid, dt: float) -> np.ndarray:
    A = glassey_E_matrix(N_curr, N_next, g, dt)
    return -E_curr + 4j * factor(A).solve(E_curr)


def glassey_recover_V(N_curr, N_next, g: Grid, dt: float) -> np.ndarray:
    """Mean-zero least-squares V with ``D2 V = (N_next - N_curr) / dt``."""
    return poisson_meanzero((np.asarray(N_next) - np.asarray(N_curr)) / dt, g)


def glassey_trajectory(init: InitialData, cfg: SchemeConfig, steps: int) -> Iterator[State]:
    """Yield the states at levels 0, 1, ..., steps (V is left unset)."""
    g, dt = init.grid, cfg.dt
    E, N = np.asarray(init.E0, dtype=complex), np.asarray(init.N0field, dtype=float)
    yield State(E, N, None, 0, 0.0)
    if steps < 1:
        return
    N_next = glassey_first_N(E, N, init.Nt0, g, dt, cfg.first_step_variant)
    E_next = glassey_step_E(E, N, N_next, g, dt)
    F = factor(glassey_N_matrix(g, dt))
    N_prev, N, E = N, N_next, E_next
    yield State(E, N, None, 1, dt)
    for m in range(2, steps + 1):
        N_next = glassey_step_N(N_prev, N, E, F, g, dt)
        E = glassey_step_E(E, N, N_next, g, dt)
        N_prev, N = N, N_next
        yield State(E, N, None, m, m * dt)


# ---------------------------------------------------------------- DVDM


def _split(x: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    return x[:K] + 1j * x[K:2 * K], x[2 * K:]


def _stack(E: np.ndarray, N: np.ndarray) -> np.ndarray:
    return np.concatenate([E.real, E.imag, N])


def _residual_E(E_next, N_next, E_curr, N_curr, g: Grid, dt: float) -> np.ndarray:
    muE = 0.5 * (E_next + E_curr)
    return 1j * (E_next - E_curr) / dt + second_diff(muE, g) - 0.5 * (N_next + N_curr) * muE


def _check_fields(g: Grid, *fields) -> None:
    for f in fields:
        if np.shape(f) != (g.K,):
            raise ShapeError(f"field of shape {np.shape(f)} on a grid with K={g.K}")


def dvdm_residual_FEN(E_next, N_next, E_curr, N_curr, E_prev, N_prev, g: Grid, dt: float) -> np.ndarray:
    """Residual of the V-eliminated three-level DVDM equations, stacked as (Re E, Im E, N)."""
    _check_fields(g, E_next, N_next, E_curr, N_curr, E_prev, N_prev)
    rE = _residual_E(E_next, N_next, E_curr, N_curr, g, dt)
    f = [n + np.abs(e) ** 2 for e, n in ((E_next, N_next), (E_curr, N_curr), (E_prev, N_prev))]
    rN = (N_next - 2.0 * N_curr + N_prev) / dt**2 - 0.25 * second_diff(f[0] + 2.0 * f[1] + f[2], g)
    return _stack(rE, rN)


def dvdm_V_next(E_next, N_next, curr: State, dt: float) -> np.ndarray:
    """Third DVDM equation solved for the new V."""
    return curr.V + dt * (0.5 * (N_next + curr.N) + 0.5 * (np.abs(E_next) ** 2 + np.abs(curr.E) ** 2))


def dvdm_residual_full(E_next, N_next, curr: State, g: Grid, dt: float) -> np.ndarray:
    """Residual of the two-level DVDM equations with the new V written via the third equation."""
    _check_fields(g, E_next, N_next, curr.E, curr.N, curr.V)
    rE = _residual_E(E_next, N_next, curr.E, curr.N, g, dt)
    muV = 0.5 * (dvdm_V_next(E_next, N_next, curr, dt) + curr.V)
    rN = (N_next - curr.N) / dt - second_diff(muV, g)
    return _stack(rE, rN)


def _residual_norm(F: np.ndarray, g: Grid) -> float:
    return float(np.sqrt(np.sum(F * F) * g.dx))


def _simplified_newton(residual, system, x0: np.ndarray, cfg: SchemeConfig, g: Grid, step: int):
    """Iterate ``x <- x - J0^{-1} F(x)``; returns ``(x, iterations)``."""
    x = x0
    F = residual(x)
    r = _residual_norm(F, g)
    history = [r]
    it = 0
    while r > cfg.newton_eps:
        if it == cfg.newton_max_iter or not math.isfinite(r):
            raise NewtonDivergenceError(
                f"simplified Newton did not reach |F| <= {cfg.newton_eps:g} at step {step} "
                f"after {it} iterations (|F| = {r:.3e})", step, history)
        x = x - system.solve(F)
        F = residual(x)
        r = _residual_norm(F, g)
        history.append(r)
        it += 1
    return x, it


def dvdm_full_step(curr: State, cfg: SchemeConfig, g: Grid, guess: tuple[np.ndarray, np.ndarray]) -> State:
    """One step of the two-level DVDM equations from ``curr`` (which must carry V)."""
    if curr.V is None:
        raise ValueError("DVDM needs V at the current level")
    dt, K = cfg.dt, g.K
    system = assemble_newton_system(None, (curr.E, curr.N), guess, g, dt, form="dvdm")

    def residual(x):
        E, N = _split(x, K)
        return dvdm_residual_full(E, N, curr, g, dt)

    x, it = _simplified_newton(residual, system, _stack(*guess), cfg, g, curr.step + 1)
    E, N = _split(x, K)
    return State(E, N, dvdm_V_next(E, N, curr, dt), curr.step + 1, (curr.step + 1) * dt, it)


def dvdm_first_step(init: InitialData, cfg: SchemeConfig, g: Grid | None = None) -> State:
    g = g or init.grid
    dt = cfg.dt
    E0 = np.asarray(init.E0, dtype=complex)
    N0 = np.asarray(init.N0field, dtype=float)
    curr = State(E0, N0, np.asarray(init.V0field, dtype=float), 0, 0.0)
    N_g = glassey_first_N(E0, N0, init.Nt0, g, dt, "GN")
    E_g = glassey_step_E(E0, N0, N_g, g, dt)
    return dvdm_full_step(curr, cfg, g, (E_g, N_g))


def dvdm_step(prev: State, curr: State, cfg: SchemeConfig, g: Grid,
              F_N: Factorization | None = None) -> State:
    """Advance by the three-level DVDM equations; ``F_N`` caches the Glassey N matrix factors."""
    if prev.step + 1 != curr.step:
        raise ValueError(f"levels {prev.step} and {curr.step} are not consecutive")
    if curr.V is None:
        raise ValueError("DVDM needs V at the current level")
    dt, K = cfg.dt, g.K
    F_N = F_N or factor(glassey_N_matrix(g, dt))
    N_g = glassey_step_N(prev.N, curr.N, curr.E, F_N, g, dt)
    E_g = glassey_step_E(curr.E, curr.N, N_g, g, dt)
    system = assemble_newton_system((prev.E, prev.N), (curr.E, curr.N), (E_g, N_g), g, dt, form="dvdm2")

    def residual(x):
        E, N = _split(x, K)
        return dvdm_residual_FEN(E, N, curr.E, curr.N, prev.E, prev.N, g, dt)

    x, it = _simplified_newton(residual, system, _stack(E_g, N_g), cfg, g, curr.step + 1)
    E, N = _split(x, K)
    return State(E, N, dvdm_V_next(E, N, curr, dt), curr.step + 1, (curr.step + 1) * dt, it)


def dvdm_trajectory(init: InitialData, cfg: SchemeConfig, steps: int, full_form: bool = False) -> Iterator[State]:
    """Yield DVDM states at levels 0..steps.

    ``full_form=True`` solves the two-level equations at every step instead of
    the V-eliminated three-level ones; both describe the same scheme.
    """
    g, dt = init.grid, cfg.dt
    curr = State(np.asarray(init.E0, dtype=complex), np.asarray(init.N0field, dtype=float),
                 np.asarray(init.V0field, dtype=float), 0, 0.0)
    yield curr
    if steps < 1:
        return
    prev, curr = curr, dvdm_first_step(init, cfg, g)
    yield curr
    F_N = factor(glassey_N_matrix(g, dt))
    for _ in range(2, steps + 1):
        if full_form:
            N_g = glassey_step_N(prev.N, curr.N, curr.E, F_N, g, dt)
            nxt = dvdm_full_step(curr, cfg, g, (glassey_step_E(curr.E, curr.N, N_g, g, dt), N_g))
        else:
            nxt = dvdm_step(prev, curr, cfg, g, F_N)
        prev, curr = curr, nxt
        yield curr


def trajectory(init: InitialData, cfg: SchemeConfig, steps: int) -> Iterator[State]:
    if cfg.scheme == "DVDM":
        return dvdm_trajectory(init, cfg, steps)
    return glassey_trajectory(init, cfg, steps)


# ---------------------------------------------------------------- step-size advice


@dataclass(frozen=True)
class StepSizeThresholds:
    eps1: float
    eps2: float
    L_hat: float
    p: float
    r: float
    admissible: bool  # dt < min(dx, eps1, eps2); advisory only


def stepsize_thresholds(p: float, r: float, g: Grid, dt: float) -> StepSizeThresholds:
    """Sufficient step-size bounds for unique solvability of the DVDM step."""
    if not p > 3:
        raise ValueError(f"p must exceed 3, got {p!r}")
    if not r > 0:
        raise ValueError(f"r must be positive, got {r!r}")
    dx, Lh = g.dx, sobolev_constant(g.L)
    sdx = math.sqrt(dx)
    eps1 = 2.0 * (p - 3.0) * dx / (
        2.0 + 2.0 * p * (p * Lh + 1.0) * r + p * (p + 1.0) * r * sdx + (2.0 * p * p * Lh + p + 1.0) * r * dx
    )
    eps2 = dx / (r * (2.0 * p * Lh + 1.0 + (p + 0.5) * sdx + (2.0 * p * Lh + 0.5) * dx))
    return StepSizeThresholds(eps1, eps2, Lh, p, r, dt < min(dx, eps1, eps2))


def glassey_V_residual(N_curr, N_next, g: Grid, dt: float) -> float:
    """``|D2 V - (N_next - N_curr)/dt|`` for the recovered V; nonzero only if the increment has a mean."""
    V = glassey_recover_V(N_curr, N_next, g, dt)
    return norm(second_diff(V, g) - (np.asarray(N_next) - np.asarray(N_curr)) / dt, g)
