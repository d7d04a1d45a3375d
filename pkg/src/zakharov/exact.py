"""Travelling dn-soliton of the periodic Zakharov system and initial data built from it.

The soliton moving with velocity ``v`` on a period ``L`` is

    E = E_max dn(xi, q) exp(i phi (x - u t)),   xi = E_max (x - v t) / sqrt(2 (1 - v^2))
    N = -E_max^2 dn(xi, q)^2 / (1 - v^2) + N0

with ``phi = v/2`` and ``v L / 2 = 2 pi m``. ``q`` is fixed by requiring dn to
have period ``L``. ``N0`` is chosen so that the potential ``V`` (``N_t = V_xx``,
``V_t = N + |E|^2``) is itself L-periodic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import elliptic
from .grid import Grid, ShapeError, forward_diff, norm, second_diff

_BISECT_ITERS = 200
_K_TOL = 1e-12
_LOG_QC_MIN = math.log(1e-300)


class InfeasibleSolitonError(ValueError):
    """No soliton exists for the requested amplitude, period and winding."""


class PeriodMismatchError(ShapeError):
    pass


@dataclass(frozen=True)
class SolitonParams:
    E_max: float
    L: float
    m: int
    v: float
    q: float
    qc: float  # 1 - q, kept separately because q rounds to 1 for large E_max
    phi: float
    u: float
    N0: float
    V0: float = 0.0
    K_residual: float = 0.0
    warning: str | None = None

    @property
    def scale(self) -> float:
        """Factor taking ``x - v t`` to the dn argument."""
        return self.E_max / math.sqrt(2.0 * (1.0 - self.v**2))

    @property
    def T_L(self) -> float:
        """Time for the wave to travel one period."""
        return self.L / abs(self.v)

    @property
    def T_1(self) -> float:
        return 1.0 / abs(self.v)


def resolve_soliton(E_max: float, L: float, m: int = 1) -> SolitonParams:
    if not E_max > 0 or not L > 0:
        raise InfeasibleSolitonError(f"E_max and L must be positive, got {E_max!r}, {L!r}")
    if m == 0 or int(m) != m:
        raise InfeasibleSolitonError(f"winding m must be a nonzero integer, got {m!r}")
    m = int(m)
    v = 4.0 * math.pi * m / L
    if abs(v) >= 1.0:
        raise InfeasibleSolitonError(f"velocity |v| = {abs(v):.6g} >= 1 for L={L}, m={m}")
    K_target = E_max * L / (2.0 * math.sqrt(2.0 * (1.0 - v * v)))
    if K_target < math.pi / 2:
        raise InfeasibleSolitonError(
            f"amplitude too small: K(q) = {K_target:.6g} < pi/2 has no solution q >= 0"
        )

    # K grows monotonically as qc -> 0; bisect in log(qc) so that q near 1 stays resolvable
    lo, hi = _LOG_QC_MIN, 0.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if elliptic.complete_K(qc=math.exp(mid)) > K_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    qc = math.exp(0.5 * (lo + hi))
    residual = abs(elliptic.complete_K(qc=qc) - K_target)
    warning = None
    if residual > 1e-8 * max(1.0, K_target):
        warning = f"K(q) residual {residual:.3g}: q is too close to 1 for double precision"
    q = 1.0 - qc

    N0 = 2.0 * math.sqrt(2.0) * v * v * E_max * elliptic.complete_E(qc=qc) / (L * math.sqrt(1.0 - v * v))
    u = v / 2.0 + 2.0 * N0 / v - (2.0 - q) * E_max**2 / (v * (1.0 - v * v))
    return SolitonParams(E_max=float(E_max), L=float(L), m=m, v=v, q=q, qc=qc, phi=v / 2.0,
                         u=u, N0=N0, V0=0.0, K_residual=residual, warning=warning)


class SolitonFields(NamedTuple):
    E: np.ndarray
    N: np.ndarray
    V: np.ndarray
    Nt: np.ndarray


def soliton_fields(p: SolitonParams, x, t: float = 0.0) -> SolitonFields:
    """Exact E, N, V and N_t at arbitrary points ``x`` and time ``t``."""
    x = np.asarray(x, dtype=float)
    s = x - p.v * t
    sn, cn, dn = elliptic.jacobi_snd(p.scale * s, qc=p.qc)
    sn, cn, dn = np.asarray(sn), np.asarray(cn), np.asarray(dn)
    one_v2 = 1.0 - p.v**2
    E = p.E_max * dn * np.exp(1j * p.phi * (x - p.u * t))
    N = -p.E_max**2 / one_v2 * dn**2 + p.N0
    coef = math.sqrt(2.0) * p.v * p.E_max / math.sqrt(one_v2)
    V = coef * np.asarray(elliptic.incomplete_E2(elliptic.amplitude_phiV(s, p), qc=p.qc)) - p.N0 / p.v * s + p.V0
    # d/dt of dn^2(scale (x - v t)) = 2 dn (-q sn cn) (-scale v)
    Nt = -2.0 * p.q * p.v * p.E_max**2 * p.scale / one_v2 * sn * cn * dn
    return SolitonFields(E, N, V, Nt)


def _check_period(g: Grid, L: float) -> None:
    if not math.isclose(g.L, L, rel_tol=1e-12):
        raise PeriodMismatchError(f"grid period {g.L} does not match soliton period {L}")


def sample_single_soliton(p: SolitonParams, g: Grid, t: float = 0.0) -> SolitonFields:
    _check_period(g, p.L)
    return soliton_fields(p, g.x, t)


@dataclass(frozen=True)
class InitialData:
    E0: np.ndarray
    N0field: np.ndarray
    Nt0: np.ndarray
    V0field: np.ndarray
    grid: Grid
    variant: str  # "single", "collision-0" or "collision-1"
    seam_jump: float = 0.0  # size of |E| dropped to zero where truncated solitons meet


def single_soliton_initial(p: SolitonParams, g: Grid) -> InitialData:
    E, N, V, Nt = sample_single_soliton(p, g, 0.0)
    return InitialData(E, N, Nt, V, g, "single")


def sample_collision_initial(p: SolitonParams, g: Grid, variant: int = 0) -> InitialData:
    """Two counter-propagating solitons on ``[3L, 4L)`` and ``(4L, 5L)`` of an 8L domain.

    E vanishes outside the two cells and at ``x = 4L``. N, which does not decay
    to zero, takes the soliton's edge value there. ``variant=0`` pairs the
    piecewise analytic N_t with a potential whose second derivative is that
    N_t; ``variant=1`` uses the piecewise soliton potential and its discrete
    second difference as N_t.
    """
    if variant not in (0, 1):
        raise ValueError(f"collision variant must be 0 or 1, got {variant!r}")
    _check_period(g, 8.0 * p.L)
    if g.K % 8:
        raise PeriodMismatchError(f"K={g.K} does not place nodes on the cell boundaries 3L, 4L, 5L")
    plus = p if p.v > 0 else resolve_soliton(p.E_max, p.L, -p.m)
    minus = resolve_soliton(p.E_max, p.L, -plus.m)
    n = g.K // 8
    dx = g.dx
    s_right = np.arange(n) * dx - 0.5 * p.L  # x - 7L/2 on [3L, 4L)
    s_left = np.arange(1, n) * dx - 0.5 * p.L  # x - 9L/2 on (4L, 5L)
    fp = soliton_fields(plus, s_right)
    fm = soliton_fields(minus, s_left)
    edge = soliton_fields(plus, np.array([-0.5 * p.L]))

    E = np.zeros(g.K, dtype=complex)
    N = np.full(g.K, edge.N[0])
    Nt = np.zeros(g.K)
    E[3 * n:4 * n], E[4 * n + 1:5 * n] = fp.E, fm.E
    N[3 * n:4 * n], N[4 * n + 1:5 * n] = fp.N, fm.N
    Nt[3 * n:4 * n], Nt[4 * n + 1:5 * n] = fp.Nt, fm.Nt

    V = np.zeros(g.K)
    if variant == 0:
        vabs = abs(plus.v)
        coef = math.sqrt(2.0) * vabs * p.E_max / math.sqrt(1.0 - vabs**2)
        const = plus.N0 * p.L / (2.0 * vabs)
        s_left0 = np.arange(n) * dx - 0.5 * p.L  # includes x = 4L
        E2r = elliptic.incomplete_E2(elliptic.amplitude_phiV(s_right, plus), qc=plus.qc)
        E2l = elliptic.incomplete_E2(elliptic.amplitude_phiV(s_left0, plus), qc=plus.qc)
        V[3 * n:4 * n] = coef * E2r + const
        V[4 * n:5 * n] = -coef * E2l + const
    else:
        V[3 * n:4 * n], V[4 * n + 1:5 * n] = fp.V, fm.V
        Nt = second_diff(V, g)
    seam = float(np.abs(edge.E[0]))
    return InitialData(E, N, Nt, V, g, f"collision-{variant}", seam_jump=seam)


class TruncationResidual(NamedTuple):
    tau_E: float
    d_tau_E: float
    tau_N: float
    d_tau_V: float


def truncation_residual(p: SolitonParams, g: Grid, t: float, dt: float) -> TruncationResidual:
    """Norms of the residual left by exact samples in the two-level implicit-midpoint scheme."""
    a = sample_single_soliton(p, g, t)
    b = sample_single_soliton(p, g, t + dt)
    muE = 0.5 * (a.E + b.E)
    muN = 0.5 * (a.N + b.N)
    tau_E = 1j * (b.E - a.E) / dt + second_diff(muE, g) - muN * muE
    tau_N = (b.N - a.N) / dt - second_diff(0.5 * (a.V + b.V), g)
    tau_V = (b.V - a.V) / dt - muN - 0.5 * (np.abs(a.E) ** 2 + np.abs(b.E) ** 2)
    return TruncationResidual(
        norm(tau_E, g), norm(forward_diff(tau_E, g), g), norm(tau_N, g), norm(forward_diff(tau_V, g), g)
    )
