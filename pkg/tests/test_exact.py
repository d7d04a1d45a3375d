import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from zakharov.elliptic import complete_K
from zakharov.exact import (InfeasibleSolitonError, PeriodMismatchError, resolve_soliton, sample_collision_initial,
                            sample_single_soliton, single_soliton_initial, soliton_fields, truncation_residual)
from zakharov.grid import Grid, norm, second_diff


def test_velocity_and_period_time():
    p = resolve_soliton(1.0, 20.0, 1)
    assert p.v == pytest.approx(math.pi / 5)
    assert p.T_L == pytest.approx(100 / math.pi)
    assert p.phi == p.v / 2


def test_q_root_against_quadrature_oracle():
    p = resolve_soliton(1.0, 20.0, 1)
    K_target = 20.0 / (2 * math.sqrt(2 * (1 - p.v**2)))
    K_q = quad(lambda t: 1 / math.sqrt(1 - p.q * math.sin(t) ** 2), 0, math.pi / 2, epsabs=1e-14, limit=400)[0]
    assert K_q == pytest.approx(K_target, rel=1e-9)
    assert abs(complete_K(qc=p.qc) - K_target) <= 1e-12


@given(st.floats(0.5, 6.0), st.sampled_from([15.0, 20.0, 40.0]), st.sampled_from([1, -1, 2]))
def test_resolved_parameters_satisfy_invariants(E_max, L, m):
    try:
        p = resolve_soliton(E_max, L, m)
    except InfeasibleSolitonError:
        return
    assert abs(p.v) < 1
    assert p.v * L / 2 == pytest.approx(2 * math.pi * m, rel=1e-15)
    assert L == pytest.approx(2 * math.sqrt(2 * (1 - p.v**2)) / E_max * complete_K(qc=p.qc), rel=1e-10)
    u = p.v / 2 + 2 * p.N0 / p.v - (2 - p.q) * E_max**2 / (p.v * (1 - p.v**2))
    assert p.u == pytest.approx(u, rel=1e-12)
    assert p.warning is None


def test_infeasible_parameters():
    with pytest.raises(InfeasibleSolitonError):
        resolve_soliton(1.0, 10.0, 1)  # |v| = 1.26
    with pytest.raises(InfeasibleSolitonError):
        resolve_soliton(0.1, 20.0, 1)  # K < pi/2
    with pytest.raises(InfeasibleSolitonError):
        resolve_soliton(1.0, 20.0, 0)


def test_single_soliton_examples():
    p = resolve_soliton(1.0, 20.0, 1)
    g = Grid(200, 20.0)
    E, N, V, Nt = sample_single_soliton(p, g, 0.0)
    assert E[0] == pytest.approx(1.0)
    assert np.all(np.abs(E) <= p.E_max * (1 + 1e-15))
    assert V[0] == 0.0
    ends = soliton_fields(p, np.array([0.0, p.L]), 0.0).V
    assert abs(ends[0] - ends[1]) <= 1e-9
    assert abs(Nt.sum() * g.dx) <= 1e-10
    with pytest.raises(PeriodMismatchError):
        sample_single_soliton(p, Grid(200, 21.0), 0.0)


@pytest.mark.parametrize("E_max", [1.0, 2.0, 5.0])
def test_fields_solve_the_continuous_equations(E_max):
    p = resolve_soliton(E_max, 20.0, 1)
    x = np.linspace(-3.0, 23.0, 11)
    f = soliton_fields(p, x, 0.4)
    h = 1e-5
    Nt_fd = (soliton_fields(p, x, 0.4 + h).N - soliton_fields(p, x, 0.4 - h).N) / (2 * h)
    Vt_fd = (soliton_fields(p, x, 0.4 + h).V - soliton_fields(p, x, 0.4 - h).V) / (2 * h)
    scale = E_max**3
    assert np.max(np.abs(Nt_fd - f.Nt)) <= 1e-7 * scale
    assert np.max(np.abs(Vt_fd - f.N - np.abs(f.E) ** 2)) <= 1e-7 * scale
    hx = 1e-3
    Vxx = (soliton_fields(p, x + hx, 0.4).V - 2 * f.V + soliton_fields(p, x - hx, 0.4).V) / hx**2
    assert np.max(np.abs(Vxx - f.Nt)) <= 1e-4 * scale


def test_time_shift_by_one_period():
    p = resolve_soliton(1.0, 20.0, 1)
    g = Grid(200, 20.0)
    a, b = sample_single_soliton(p, g, 0.7), sample_single_soliton(p, g, 0.7 + p.T_L)
    assert np.max(np.abs(np.abs(a.E) - np.abs(b.E))) <= 1e-9
    assert np.max(np.abs(a.N - b.N)) <= 1e-9


def test_single_initial_data_contract():
    p = resolve_soliton(2.0, 20.0, 1)
    init = single_soliton_initial(p, Grid(400, 20.0))
    assert init.variant == "single" and init.V0field[0] == 0.0
    assert abs(init.Nt0.sum() * init.grid.dx) <= 1e-10


def test_collision_variant0():
    p = resolve_soliton(1.0, 20.0, 1)
    g = Grid(1600, 160.0)
    init = sample_collision_initial(p, g, 0)
    n = 200
    assert np.all(init.E0[:3 * n] == 0) and np.all(init.E0[5 * n:] == 0) and init.E0[4 * n] == 0
    assert abs(init.Nt0.sum() * g.dx) <= 1e-10
    assert init.seam_jump == pytest.approx(math.sqrt(p.qc))
    # one-sided limits of V0 at the seams 3L, 4L, 5L
    x = np.array([-0.5 * p.L, 0.5 * p.L])
    from zakharov import elliptic
    coef = math.sqrt(2) * p.v / math.sqrt(1 - p.v**2)
    E2 = elliptic.incomplete_E2(elliptic.amplitude_phiV(x, p), qc=p.qc)
    const = p.N0 * p.L / (2 * p.v)
    right_at_3L, left_at_4L = coef * E2[0] + const, coef * E2[1] + const
    right_at_4L, left_at_5L = -coef * E2[0] + const, -coef * E2[1] + const
    assert abs(right_at_3L) <= 1e-8 and abs(left_at_5L) <= 1e-8
    assert abs(left_at_4L - right_at_4L) <= 1e-8
    assert init.V0field[4 * n] == pytest.approx(right_at_4L)


def test_collision_variant0_potential_links_to_Nt_at_second_order():
    p = resolve_soliton(1.0, 20.0, 1)
    errs = []
    for K in (800, 1600, 3200):
        g = Grid(K, 160.0)
        init = sample_collision_initial(p, g, 0)
        n = K // 8
        inner = np.r_[3 * n + 2:4 * n - 1, 4 * n + 2:5 * n - 1]
        errs.append(np.max(np.abs(second_diff(init.V0field, g) - init.Nt0)[inner]))
    assert 3.5 <= errs[0] / errs[1] <= 4.5 and 3.5 <= errs[1] / errs[2] <= 4.5


def test_collision_variant1():
    p = resolve_soliton(1.0, 20.0, 1)
    g = Grid(1600, 160.0)
    init = sample_collision_initial(p, g, 1)
    np.testing.assert_allclose(init.Nt0, second_diff(init.V0field, g))
    n = 200
    assert abs(init.V0field[3 * n]) < 1e-12 and abs(init.V0field[4 * n]) < 1e-12
    assert np.all(init.V0field[:3 * n] == 0) and np.all(init.V0field[5 * n:] == 0)


def test_collision_errors():
    p = resolve_soliton(1.0, 20.0, 1)
    with pytest.raises(PeriodMismatchError):
        sample_collision_initial(p, Grid(1600, 20.0), 0)
    with pytest.raises(PeriodMismatchError):
        sample_collision_initial(p, Grid(1604, 160.0), 0)
    with pytest.raises(ValueError):
        sample_collision_initial(p, Grid(1600, 160.0), 2)


@given(st.floats(0.0, 30.0))
def test_truncation_residual_is_second_order(t):
    p = resolve_soliton(1.0, 20.0, 1)
    r = [truncation_residual(p, Grid(K, 20.0), t, 20.0 / K) for K in (200, 400)]
    for a, b in zip(*r):
        assert 3.5 <= a / b <= 4.5


def test_truncation_residual_time_shift_invariance():
    p = resolve_soliton(1.0, 20.0, 1)
    g = Grid(200, 20.0)
    a = truncation_residual(p, g, 1.0, 0.1)
    b = truncation_residual(p, g, 1.0 + p.T_L, 0.1)
    for x, y in zip(a, b):
        assert y == pytest.approx(x, rel=1e-2)
