"""Jacobi elliptic functions and Legendre integrals, parameter convention.

``q`` is the *parameter* multiplying ``sin^2`` (``dn^2 = 1 - q sn^2``), never the
modulus. Every routine also accepts the complementary parameter ``qc = 1 - q``;
when given it is authoritative. Solitons of large amplitude need ``q`` within
1e-30 of one, which only ``qc`` can represent.

All functions accept scalars or numpy arrays for the argument (``u`` or
``phi``); the parameter must be a scalar.
"""
from __future__ import annotations

import math

import numpy as np

Q_MAX = 1.0 - 1e-12
_AGM_TOL = 1e-15
_CARLSON_TOL = 1e-3


class EllipticDomainError(ValueError):
    pass


def _parameter(q, qc):
    """Return ``(q, qc)`` after validation."""
    if qc is not None:
        qc = float(qc)
        if not 0.0 < qc <= 1.0:
            raise EllipticDomainError(f"complementary parameter must lie in (0, 1], got {qc!r}")
        return 1.0 - qc, qc
    q = float(q)
    if not 0.0 <= q < 1.0 or q >= Q_MAX:
        raise EllipticDomainError(
            f"parameter q={q!r} outside [0, {Q_MAX!r}); pass qc=1-q for q closer to 1"
        )
    return q, 1.0 - q


def _agm_ladder(q, qc):
    """Descending Landen ladder: lists of ``a_n`` and ``c_n``."""
    a, b, c = 1.0, math.sqrt(qc), math.sqrt(q)
    A, C = [a], [c]
    while abs(c) > _AGM_TOL * a:
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        A.append(a)
        C.append(c)
        if len(A) > 64:
            raise ArithmeticError("AGM did not converge")
    return A, C


def complete_K(q=0.0, qc=None) -> float:
    """Complete integral of the first kind, ``int_0^{pi/2} dt / sqrt(1 - q sin^2 t)``."""
    q, qc = _parameter(q, qc)
    A, _ = _agm_ladder(q, qc)
    return math.pi / (2.0 * A[-1])


def _am_reduced(u, q, qc, A, C):
    # amplitude for arguments already reduced to |u| <= K
    N = len(A) - 1
    phi = (2.0**N) * A[-1] * u
    for n in range(N, 0, -1):
        phi = 0.5 * (phi + np.arcsin(C[n] / A[n] * np.sin(phi)))
    return phi


_SERIES_QC = 1e-2


def _cn_dn_sech_series(u, q, qc, K):
    """cn, dn for ``q`` near one as sech sums over the complementary period.

    Terms decay like ``exp(-pi K / K')``; with ``qc < 1e-2`` eight images on each
    side are far below double precision.
    """
    Kp = complete_K(q=qc)
    scale = math.pi / (2.0 * Kp)
    cn = np.zeros_like(u)
    dn = np.zeros_like(u)
    for n in range(-8, 9):
        z = np.exp(-np.abs(scale * (u - 2.0 * n * K)))
        t = 2.0 * z / (1.0 + z * z)  # sech without overflow
        dn += t
        cn += t if n % 2 == 0 else -t
    return cn * scale / math.sqrt(q), dn * scale


def _jacobi(u, q, qc):
    """``(am, sn, cn, dn)`` as arrays for ``q > 0``."""
    A, C = _agm_ladder(q, qc)
    K = math.pi / (2.0 * A[-1])
    j = np.round(u / (2.0 * K))
    ur = u - 2.0 * K * j  # |ur| <= K, where am(ur) lies in [-pi/2, pi/2]
    phi = _am_reduced(ur, q, qc, A, C)
    sn = np.sin(phi)
    if qc < _SERIES_QC:
        # the Landen ladder loses cos(phi) to cancellation once q is close to 1;
        # sn stays accurate there, cn and dn come from the series
        cn, dn = _cn_dn_sech_series(ur, q, qc, K)
        phi = np.arctan2(sn, cn)
    else:
        cn = np.cos(phi)
        # cn^2 + qc sn^2 avoids cancellation in 1 - q sn^2
        dn = np.sqrt(cn * cn + qc * sn * sn)
    sign = 1.0 - 2.0 * (j % 2)  # sn and cn flip sign over each half period 2K
    return phi + math.pi * j, sign * sn, sign * cn, dn


def jacobi_am(u, q=0.0, qc=None):
    """Jacobi amplitude: the ``phi`` with ``u = F(phi | q)``; ``am(u + 2K) = am(u) + pi``."""
    q, qc = _parameter(q, qc)
    u = np.asarray(u, dtype=float)
    if q == 0.0:
        return u.copy() if u.ndim else float(u)
    phi = _jacobi(u, q, qc)[0]
    return phi if phi.ndim else float(phi)


def jacobi_snd(u, q=0.0, qc=None):
    """``(sn, cn, dn)`` of ``u`` for parameter ``q``."""
    q, qc = _parameter(q, qc)
    u = np.asarray(u, dtype=float)
    if q == 0.0:
        sn, cn, dn = np.sin(u), np.cos(u), np.ones_like(u)
    else:
        _, sn, cn, dn = _jacobi(u, q, qc)
    if u.ndim == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def carlson_rf(x, y, z):
    """Carlson's symmetric integral ``R_F(x, y, z)`` (at most one argument zero)."""
    x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, z)))
    x, y, z = x.copy(), y.copy(), z.copy()
    for _ in range(200):
        A = (x + y + z) / 3.0
        dev = np.max(np.abs(np.stack([A - x, A - y, A - z])), axis=0) / A
        if np.all(dev < _CARLSON_TOL):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    else:
        raise ArithmeticError("R_F duplication did not converge")
    X, Y = 1.0 - x / A, 1.0 - y / A
    Z = -(X + Y)
    E2 = X * Y - Z * Z
    E3 = X * Y * Z
    series = 1.0 - E2 / 10.0 + E3 / 14.0 + E2 * E2 / 24.0 - 3.0 * E2 * E3 / 44.0
    out = series / np.sqrt(A)
    return out if out.ndim else float(out)


def carlson_rd(x, y, z):
    """Carlson's symmetric integral ``R_D(x, y, z)`` (``z > 0``)."""
    x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, z)))
    x, y, z = x.copy(), y.copy(), z.copy()
    acc = np.zeros_like(x)
    fac = 1.0
    for _ in range(200):
        A = (x + y + 3.0 * z) / 5.0
        dev = np.max(np.abs(np.stack([A - x, A - y, A - z])), axis=0) / A
        if np.all(dev < _CARLSON_TOL):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        acc = acc + fac / (sz * (z + lam))
        fac *= 0.25
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    else:
        raise ArithmeticError("R_D duplication did not converge")
    X, Y = 1.0 - x / A, 1.0 - y / A
    Z = -(X + Y) / 3.0
    XY, ZZ = X * Y, Z * Z
    E2 = XY - 6.0 * ZZ
    E3 = (3.0 * XY - 8.0 * ZZ) * Z
    E4 = 3.0 * (XY - ZZ) * ZZ
    E5 = XY * Z * ZZ
    series = (1.0 - 3.0 * E2 / 14.0 + E3 / 6.0 + 9.0 * E2 * E2 / 88.0
              - 3.0 * E4 / 22.0 - 9.0 * E2 * E3 / 52.0 + 3.0 * E5 / 26.0)
    out = 3.0 * acc + fac * series / (A * np.sqrt(A))
    return out if out.ndim else float(out)


def _E2_reduced(phi, q, qc):
    s, c = np.sin(phi), np.cos(phi)
    c2 = c * c
    y = c2 + qc * s * s
    return s * carlson_rf(c2, y, 1.0) - (q / 3.0) * s**3 * carlson_rd(c2, y, 1.0)


def complete_E(q=0.0, qc=None) -> float:
    """Complete integral of the second kind, ``E2(pi/2, q)``."""
    q, qc = _parameter(q, qc)
    return float(carlson_rf(0.0, qc, 1.0) - (q / 3.0) * carlson_rd(0.0, qc, 1.0))


def incomplete_E2(phi, q=0.0, qc=None):
    """``int_0^phi sqrt(1 - q sin^2 t) dt`` for any real ``phi``."""
    q, qc = _parameter(q, qc)
    phi = np.asarray(phi, dtype=float)
    j = np.round(phi / math.pi)
    out = _E2_reduced(phi - math.pi * j, q, qc) + 2.0 * j * complete_E(qc=qc)
    return out if np.ndim(out) else float(out)


def amplitude_phiV(x, params):
    """Continuous branch of ``l*pi + arcsin(sn(...))`` used by the soliton potential.

    ``params`` needs ``E_max``, ``v``, ``L`` and ``qc`` (a resolved
    :class:`~zakharov.exact.SolitonParams`). On each cell
    ``(l - 1/2) L < x <= (l + 1/2) L`` the sn argument is shifted by ``2 l K``
    so that it stays in ``[-K, K]``, where ``arcsin(sn)`` equals the amplitude.
    """
    if getattr(params, "qc", None) is None:
        raise ValueError("soliton parameters are not resolved")
    x = np.asarray(x, dtype=float)
    K = complete_K(qc=params.qc)
    scale = params.E_max / math.sqrt(2.0 * (1.0 - params.v**2))
    l = np.ceil(x / params.L - 0.5)
    w = scale * x - 2.0 * l * K
    # arcsin(sn(w)) == am(w) for |w| <= K; am avoids arcsin's loss of accuracy near sn = 1
    out = l * math.pi + jacobi_am(w, qc=params.qc)
    return out if out.ndim else float(out)
