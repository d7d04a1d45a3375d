"""Discrete invariants, bound monitors and error norms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, forward_diff, norm, norm_p
from .schemes import State


@dataclass(frozen=True)
class InvariantSample:
    step: int
    norm: float
    energy: float
    bound_monitor: tuple[float, float, float, float, float]  # |E|, |D+E|, |E|_inf, |N|, |D+V|


@dataclass(frozen=True)
class ErrorRecord:
    step: int
    errE: float
    errN: float


def norm_invariant(s: State, g: Grid) -> float:
    return norm(s.E, g) ** 2


def _real_ip(a, b, g: Grid) -> float:
    return float(np.dot(a, b) * g.dx)


def energy_dvdm(s: State, g: Grid) -> float:
    if s.V is None:
        raise ValueError("energy_dvdm needs V on the state")
    return (norm(forward_diff(s.E, g), g) ** 2
            + 0.5 * (norm(s.N, g) ** 2 + norm(forward_diff(s.V, g), g) ** 2)
            + _real_ip(s.N, np.abs(s.E) ** 2, g))


def energy_dvdm_expanded(s: State, g: Grid) -> float:
    """Same quantity as :func:`energy_dvdm`, summed node by node."""
    if s.V is None:
        raise ValueError("energy_dvdm needs V on the state")
    E, N, V, dx = s.E, s.N, s.V, g.dx
    total = 0.0
    for k in range(g.K):
        kp = (k + 1) % g.K
        dE = (E[kp] - E[k]) / dx
        dV = (V[kp] - V[k]) / dx
        total += (dE.real**2 + dE.imag**2 + 0.5 * (N[k] ** 2 + dV**2)
                  + N[k] * (E[k].real ** 2 + E[k].imag ** 2))
    return float(total * dx)


def energy_glassey(curr: State, nxt: State, V_curr, g: Grid) -> float:
    """Energy of Glassey's scheme attached to level ``nxt.step``; ``V_curr`` pairs with ``curr``."""
    N_mid = 0.5 * (curr.N + nxt.N)
    return (norm(forward_diff(nxt.E, g), g) ** 2
            + 0.5 * (0.5 * (norm(curr.N, g) ** 2 + norm(nxt.N, g) ** 2) + norm(forward_diff(V_curr, g), g) ** 2)
            + _real_ip(N_mid, np.abs(nxt.E) ** 2, g))


def bound_monitor(s: State, g: Grid, V=None) -> tuple[float, float, float, float, float]:
    V = s.V if V is None else V
    dV = norm(forward_diff(V, g), g) if V is not None else float("nan")
    return (norm(s.E, g), norm(forward_diff(s.E, g), g), norm_p(s.E, np.inf, g), norm(s.N, g), dV)


def error_vs_reference(s: State, ref, g: Grid, ref_t: float | None = None) -> ErrorRecord:
    """L2 distances to a reference ``(E, N)`` taken at the same time as ``s``."""
    if ref_t is not None and not np.isclose(ref_t, s.t, rtol=1e-12, atol=1e-12):
        raise ValueError(f"reference time {ref_t} does not match state time {s.t}")
    E_ref, N_ref = ref
    return ErrorRecord(s.step, norm(s.E - E_ref, g), norm(s.N - N_ref, g))
