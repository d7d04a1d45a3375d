"""Periodic grid, difference/average operators and discrete norms.

Fields are plain 1-D numpy arrays of length ``K`` (real or complex). Node ``k``
sits at ``x_k = k * dx`` for ``k = 0..K-1``; every stencil wraps modulo ``K``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class ShapeError(ValueError):
    """A field does not match the grid (or its partner field) in length."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic mesh with ``K`` cells over one period ``L``."""

    K: int
    L: float

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 3:
            raise ValueError(f"K must be an integer >= 3, got {self.K!r}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "L", float(self.L))

    @property
    def dx(self) -> float:
        return self.L / self.K

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.K) * self.dx

    @classmethod
    def from_spacing(cls, L: float, dx: float) -> "Grid":
        """Grid whose spacing is as close to ``dx`` as an integer ``K`` allows."""
        return cls(K=int(round(L / dx)), L=L)


def _check(v, g: Grid) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != g.K:
        raise ShapeError(f"field of shape {v.shape} does not fit a grid with K={g.K}")
    return v


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def forward_diff(v, g: Grid) -> np.ndarray:
    v = _check(v, g)
    return (np.roll(v, -1) - v) / g.dx


def backward_diff(v, g: Grid) -> np.ndarray:
    v = _check(v, g)
    return (v - np.roll(v, 1)) / g.dx


def second_diff(v, g: Grid) -> np.ndarray:
    v = _check(v, g)
    return (np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / g.dx**2


def central_diff(v, g: Grid) -> np.ndarray:
    """Two-sided first difference ``(v[k+1] - v[k-1]) / (2 dx)``."""
    v = _check(v, g)
    return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * g.dx)


def forward_avg(v, g: Grid) -> np.ndarray:
    """Spatial forward average; neither scheme steps with it."""
    v = _check(v, g)
    return 0.5 * (np.roll(v, -1) + v)


def inner_product(v, w, g: Grid) -> complex:
    v, w = _check(v, g), _check(w, g)
    return complex(np.sum(v * np.conj(w)) * g.dx)


def norm_p(v, p: float, g: Grid) -> float:
    v = _check(v, g)
    if p == np.inf:
        return float(np.max(np.abs(v))) if v.size else 0.0
    if p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    return float((np.sum(np.abs(v) ** p) * g.dx) ** (1.0 / p))


def norm(v, g: Grid) -> float:
    """Discrete L2 norm."""
    v = _check(v, g)
    return float(np.sqrt(np.sum(np.abs(v) ** 2) * g.dx))


def sobolev_constant(L: float) -> float:
    """``L_hat`` in ``|v|_inf <= L_hat * (|v|^2 + |D+ v|^2)^(1/2)``."""
    return float(np.sqrt(2.0) * max(np.sqrt(L), 1.0 / np.sqrt(L)))


def avg2(a, b) -> np.ndarray:
    a, b = _check_pair(a, b)
    return 0.5 * (a + b)


def diff2(a, b, dt: float) -> np.ndarray:
    a, b = _check_pair(a, b)
    return (b - a) / dt


def laplacian_matrix(g: Grid) -> np.ndarray:
    """Dense circulant matrix of ``second_diff``; meant for small-K checks."""
    D = -2.0 * np.eye(g.K) + np.eye(g.K, k=1) + np.eye(g.K, k=-1)
    D[0, -1] = D[-1, 0] = 1.0
    return D / g.dx**2
