"""Cyclic tridiagonal solvers, mean-zero Poisson solve, Newton Jacobians.

A cyclic tridiagonal matrix ``A`` is stored by three length-K arrays with
``A[k, k-1] = lower[k]``, ``A[k, k] = diag[k]``, ``A[k, k+1] = upper[k]``
(indices mod K), so ``lower[0]`` and ``upper[K-1]`` are the periodic corners.

Solves use the Thomas algorithm on the leading ``(K-1) x (K-1)`` block and
close the periodic loop with a bordering (Schur complement) correction for the
last unknown. The leading block of every matrix the schemes produce is either
symmetric definite or complex symmetric with a definite imaginary part, so no
pivoting is needed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .grid import Grid, ShapeError

PIVOT_TOL = 1e-300


class SingularMatrixError(ArithmeticError):
    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


@numba.njit(cache=True)
def _thomas_factor(lower, diag, upper, n):
    # Eliminates the sub-diagonal of the leading n x n block; returns the
    # multipliers and pivots, or the index of the first vanishing pivot.
    piv = np.empty(n, dtype=diag.dtype)
    mult = np.empty(n, dtype=diag.dtype)
    piv[0] = diag[0]
    mult[0] = 0.0
    if abs(piv[0]) <= PIVOT_TOL:
        return mult, piv, 0
    for k in range(1, n):
        mult[k] = lower[k] / piv[k - 1]
        piv[k] = diag[k] - mult[k] * upper[k - 1]
        if abs(piv[k]) <= PIVOT_TOL:
            return mult, piv, k
    return mult, piv, -1


@numba.njit(cache=True)
def _thomas_solve(mult, piv, upper, rhs, n):
    # rhs must already carry the wider of the matrix / right-hand-side dtypes
    y = np.empty_like(rhs)
    y[0] = rhs[0]
    for k in range(1, n):
        y[k] = rhs[k] - mult[k] * y[k - 1]
    y[n - 1] = y[n - 1] / piv[n - 1]
    for k in range(n - 2, -1, -1):
        y[k] = (y[k] - upper[k] * y[k + 1]) / piv[k]
    return y


@dataclass(frozen=True)
class CyclicTridiagonal:
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(a) for a in (self.lower, self.diag, self.upper)]
        if any(a.ndim != 1 for a in arrs) or len({a.shape[0] for a in arrs}) != 1:
            raise ShapeError("lower, diag and upper must be 1-D arrays of equal length")
        if arrs[0].shape[0] < 3:
            raise ShapeError("cyclic tridiagonal systems need K >= 3")
        dtype = np.result_type(*arrs, np.float64)
        for name, a in zip(("lower", "diag", "upper"), arrs):
            a = np.array(a, dtype=dtype)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def K(self) -> int:
        return self.diag.shape[0]

    @classmethod
    def from_stencil(cls, off, diag, K: int | None = None) -> "CyclicTridiagonal":
        """Symmetric matrix with constant off-diagonal ``off``."""
        diag = np.asarray(diag)
        if diag.ndim == 0:
            diag = np.full(K, diag)
        off = np.full(diag.shape[0], off, dtype=np.result_type(off, diag))
        return cls(off, diag, off)

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x)
        return self.lower * np.roll(x, 1) + self.diag * x + self.upper * np.roll(x, -1)

    def to_dense(self) -> np.ndarray:
        K = self.K
        A = np.zeros((K, K), dtype=self.diag.dtype)
        k = np.arange(K)
        A[k, k] += self.diag
        A[k, (k - 1) % K] += self.lower
        A[k, (k + 1) % K] += self.upper
        return A

    def to_sparse(self) -> sp.csc_matrix:
        K = self.K
        k = np.arange(K)
        rows = np.concatenate([k, k, k])
        cols = np.concatenate([k, (k - 1) % K, (k + 1) % K])
        vals = np.concatenate([self.diag, self.lower, self.upper])
        return sp.csc_matrix((vals, (rows, cols)), shape=(K, K))


@dataclass(frozen=True)
class Factorization:
    """Reusable factored form of a :class:`CyclicTridiagonal` matrix."""

    matrix: CyclicTridiagonal
    mult: np.ndarray = field(repr=False)
    piv: np.ndarray = field(repr=False)
    border: np.ndarray = field(repr=False)  # T^{-1} s, s = last column of A above the diagonal
    schur: complex | float = 0.0

    def solve(self, b) -> np.ndarray:
        A = self.matrix
        b = np.asarray(b)
        if b.shape != (A.K,):
            raise ShapeError(f"right-hand side of shape {b.shape} for a K={A.K} system")
        n = A.K - 1
        b = b.astype(np.result_type(b.dtype, A.diag.dtype), copy=False)
        y = _thomas_solve(self.mult, self.piv, A.upper, np.ascontiguousarray(b[:n]), n)
        w_dot_y = A.upper[n] * y[0] + A.lower[n] * y[n - 1]
        x_last = (b[n] - w_dot_y) / self.schur
        out = np.empty(A.K, dtype=y.dtype)
        out[:n] = y - x_last * self.border
        out[n] = x_last
        return out


def factor(A: CyclicTridiagonal) -> Factorization:
    n = A.K - 1
    mult, piv, bad = _thomas_factor(A.lower, A.diag, A.upper, n)
    if bad >= 0:
        raise SingularMatrixError(f"zero pivot at row {bad}", pivot=int(bad))
    s = np.zeros(n, dtype=A.diag.dtype)
    s[0] += A.lower[0]
    s[n - 1] += A.upper[n - 1]
    border = _thomas_solve(mult, piv, A.upper, s, n)
    # last row of A restricted to the first n columns: upper[n] at col 0, lower[n] at col n-1
    schur = A.diag[n] - (A.upper[n] * border[0] + A.lower[n] * border[n - 1])
    if abs(schur) <= PIVOT_TOL * max(1.0, float(np.max(np.abs(A.diag)))):
        raise SingularMatrixError(f"zero pivot at row {n}", pivot=n)
    border.setflags(write=False)
    return Factorization(A, mult, piv, border, schur)


def solve(F: Factorization, b) -> np.ndarray:
    return F.solve(b)


class MeanZeroPoisson:
    """Moore-Penrose solve of ``second_diff(V) = rhs`` on a periodic grid.

    The constant mode is removed from ``rhs``; the leading block (Dirichlet
    Laplacian with ``V[K-1] = 0``) is solved and the mean is subtracted.
    """

    def __init__(self, g: Grid):
        self.grid = g
        n = g.K - 1
        inv = 1.0 / g.dx**2
        lower = np.full(n, inv)
        upper = np.full(n, inv)
        diag = np.full(n, -2.0 * inv)
        self._upper = upper
        self._mult, self._piv, bad = _thomas_factor(lower, diag, upper, n)
        if bad >= 0:
            raise SingularMatrixError(f"zero pivot at row {bad}", pivot=int(bad))

    def __call__(self, rhs) -> np.ndarray:
        g = self.grid
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (g.K,):
            raise ShapeError(f"rhs of shape {rhs.shape} for K={g.K}")
        r = rhs - rhs.mean()
        V = np.zeros(g.K)
        V[:-1] = _thomas_solve(self._mult, self._piv, self._upper, np.ascontiguousarray(r[:-1]), g.K - 1)
        return V - V.mean()


@lru_cache(maxsize=32)
def _poisson_for(g: Grid) -> MeanZeroPoisson:
    return MeanZeroPoisson(g)


def poisson_meanzero(rhs, g: Grid) -> np.ndarray:
    return _poisson_for(g)(rhs)


def _laplacian_sparse(g: Grid) -> sp.csr_matrix:
    K = g.K
    k = np.arange(K)
    inv = 1.0 / g.dx**2
    rows = np.concatenate([k, k, k])
    cols = np.concatenate([k, (k - 1) % K, (k + 1) % K])
    vals = np.concatenate([np.full(K, -2.0 * inv), np.full(K, inv), np.full(K, inv)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(K, K))


@dataclass
class SparseBlockSystem:
    """Real 3K x 3K Newton matrix over ``(Re E, Im E, N)`` and its LU factors."""

    matrix: sp.csc_matrix
    lu: object = field(repr=False, default=None)

    def __post_init__(self):
        if self.lu is None:
            try:
                self.lu = splu(self.matrix)
            except RuntimeError as exc:  # SuperLU reports exact singularity this way
                raise SingularMatrixError(f"Newton matrix is singular: {exc}") from exc

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def solve(self, rhs) -> np.ndarray:
        return self.lu.solve(np.asarray(rhs, dtype=float))


def assemble_newton_system(prev, curr, guess, g: Grid, dt: float, form: str = "dvdm2") -> SparseBlockSystem:
    """Jacobian of the DVDM residual at ``guess`` in real block form.

    ``prev`` and ``curr`` are ``(E, N)`` or ``(E, N, V)`` tuples for levels m-1
    and m; ``guess`` is ``(E, N)`` at level m+1. ``form="dvdm2"`` differentiates
    the V-eliminated three-level residual; ``form="dvdm"`` the two-level one in
    which ``V^{m+1}`` is written in terms of ``N^{m+1}`` and ``|E^{m+1}|^2``
    (``prev`` is ignored there).
    """
    E_c, N_c = np.asarray(curr[0]), np.asarray(curr[1])
    E_g, N_g = np.asarray(guess[0]), np.asarray(guess[1])
    K = g.K
    if not (E_c.shape == N_c.shape == E_g.shape == N_g.shape == (K,)):
        raise ShapeError("all fields must have length K")
    D = _laplacian_sparse(g)
    I = sp.identity(K, format="csr")
    a, b = E_g.real, E_g.imag
    muN = 0.5 * (N_g + N_c)
    muA = 0.5 * (a + E_c.real)
    muB = 0.5 * (b + E_c.imag)

    # Real and imaginary parts of  i*dE/dt + D2(muE) - muN*muE  w.r.t. (a, b, N).
    lap_half = 0.5 * D - sp.diags(0.5 * muN)
    re_row = [lap_half, -I / dt, sp.diags(-0.5 * muA)]
    im_row = [I / dt, lap_half, sp.diags(-0.5 * muB)]

    if form == "dvdm2":
        n_row = [-0.5 * D @ sp.diags(a), -0.5 * D @ sp.diags(b), I / dt**2 - 0.25 * D]
    elif form == "dvdm":
        n_row = [-0.5 * dt * D @ sp.diags(a), -0.5 * dt * D @ sp.diags(b), I / dt - 0.25 * dt * D]
    else:
        raise ValueError(f"unknown residual form {form!r}")
    J = sp.bmat([re_row, im_row, n_row], format="csc")
    J.eliminate_zeros()
    return SparseBlockSystem(J)
