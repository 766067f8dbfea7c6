import dataclasses
import numpy as np
import pytest

from fragspec import (AngularBasis, LaserPulse, RadialGrid, build_initial,
                      model_potential, solve_bound_state, run_job)
from fragspec.errors import (BoundaryContaminationError, DomainError,
                             NumericalBlowupError)
from fragspec.propagator import Numerics, TwoChannelPropagator, Wavefunction

MASS = 918.0763505


def free_space_setup(r_max=300.0, n_r=2048, n_l=6):
    pot = model_potential("flat-coupled", {"v_gap": 1e-30, "mu_const": 1e-30,
                                           "r_max": r_max, "n_samples": 401})
    grid = RadialGrid(n_r=n_r, r_min=0.2, r_max=r_max)
    basis = AngularBasis(m_n=0, n_l=n_l)
    pulse = LaserPulse.constant(0.0, t_end=1.0)
    prop = TwoChannelPropagator(pot, grid, basis, pulse)
    return pot, grid, basis, pulse, prop


def outgoing_packet(grid, basis, l_index=2, k0=5.0, center=60.0, width=8.0):
    rad = np.exp(-((grid.r - center) / width) ** 2 / 2.0) * np.exp(1j * k0 * grid.r)
    psi = np.zeros((2, grid.n_r, basis.n_theta), complex)
    psi[0] = np.outer(rad, basis.P[:, l_index])
    wf = Wavefunction(psi=psi, t=0.0, m_n=0, grid=grid, basis=basis)
    wf.psi /= np.sqrt(wf.norm())
    return wf


# -- build_initial -------------------------------------------------------------


def test_initial_isotropic_cos2(harmonic, harmonic_grid, basis8):
    st = solve_bound_state(harmonic, 0, 0, harmonic_grid)
    wf = build_initial(st, 0, basis8, harmonic_grid)
    assert abs(wf.norm() - 1.0) < 1e-12
    assert abs(wf.cos2_expectation() - 1.0 / 3.0) < 1e-10


@pytest.mark.parametrize("m_n,expect", [(0, 0.6), (1, 0.2)])
def test_initial_n1_cos2(harmonic, harmonic_grid, m_n, expect):
    st = solve_bound_state(harmonic, 1, 0, harmonic_grid)
    basis = AngularBasis(m_n=m_n, n_l=8)
    wf = build_initial(st, m_n, basis, harmonic_grid)
    assert abs(wf.cos2_expectation() - expect) < 1e-10


def test_initial_m_exceeds_n(harmonic, harmonic_grid):
    st = solve_bound_state(harmonic, 0, 0, harmonic_grid)
    with pytest.raises(DomainError):
        build_initial(st, 1, AngularBasis(m_n=1, n_l=8), harmonic_grid)


def test_no_phi_axis_anywhere(harmonic, harmonic_grid, basis8):
    # the e^{i M phi} factor has unit modulus: no type carries a phi axis
    st = solve_bound_state(harmonic, 0, 0, harmonic_grid)
    wf = build_initial(st, 0, basis8, harmonic_grid)
    assert wf.psi.ndim == 3 and wf.psi.shape[0] == 2  # (channel, R, theta)
    names = {f.name for f in dataclasses.fields(wf)}
    assert "phi" not in names


# -- step ----------------------------------------------------------------------


def test_stationary_state_phase_law(harmonic, harmonic_grid, basis8):
    st = solve_bound_state(harmonic, 0, 0, harmonic_grid)
    pulse = LaserPulse.constant(0.0, t_end=100.0)
    prop = TwoChannelPropagator(harmonic, harmonic_grid, basis8, pulse)
    wf = build_initial(st, 0, basis8, harmonic_grid)
    ref = wf.copy()
    dt, n = 0.05, 1000
    for _ in range(n):
        prop.step(wf, dt)
    ov = np.sum(np.conj(ref.psi) * wf.psi * basis8.w[None, None, :]) \
        * harmonic_grid.dr
    assert abs(abs(ov) - 1.0) < 1e-6
    expected = (-st.energy * dt * n) % (2 * np.pi)
    got = np.angle(ov) % (2 * np.pi)
    err = min(abs(got - expected), 2 * np.pi - abs(got - expected))
    assert err / n < 1e-4  # rad per step
    assert abs(wf.norm() - 1.0) < 1e-9  # unitarity over 1000 steps


def test_rabi_two_level_fixture():
    gap, mu_c, e0 = 0.2, 1.0, 0.02
    pot = model_potential("flat-coupled", {"v_gap": gap, "mu_const": mu_c,
                                           "r_max": 40.0})
    grid = RadialGrid(n_r=256, r_min=0.2, r_max=40.0, k_max_expected=20.0)
    basis = AngularBasis(m_n=0, n_l=4)
    pulse = LaserPulse.constant(e0, t_end=100.0)
    prop = TwoChannelPropagator(pot, grid, basis, pulse, couple_angle=False)
    psi = np.zeros((2, grid.n_r, basis.n_theta), complex)
    psi[0] = np.outer(np.exp(-((grid.r - 20.0) / 3.0) ** 2), np.ones(basis.n_theta))
    wf = Wavefunction(psi=psi, t=0.0, m_n=0, grid=grid, basis=basis)
    wf.psi /= np.sqrt(wf.norm())

    w_coupling = mu_c * e0
    omega_r = np.sqrt(gap**2 + 4 * w_coupling**2)
    amp_exact = 4 * w_coupling**2 / (gap**2 + 4 * w_coupling**2)
    period_exact = 2 * np.pi / omega_r

    dt = 0.01
    p2 = []
    n = int(round(1.2 * period_exact / dt))
    for _ in range(n):
        prop.step(wf, dt)
        dens = np.abs(wf.psi[1]) ** 2
        p2.append(float(np.sum(dens.sum(axis=0) * basis.w) * grid.dr))
    p2 = np.array(p2)
    i_max = int(np.argmax(p2))
    # parabolic refinement of the extremum
    a, b, c = p2[i_max - 1], p2[i_max], p2[i_max + 1]
    delta = 0.5 * (a - c) / (a - 2 * b + c)
    amp = b - 0.25 * (a - c) * delta
    t_half = (i_max + 1 + delta) * dt
    assert abs(amp / amp_exact - 1.0) < 1e-3
    assert abs(2.0 * t_half / period_exact - 1.0) < 1e-3


def test_free_gaussian_spreading():
    _, grid, basis, _, prop = free_space_setup(r_max=400.0, n_r=2048, n_l=2)
    sig0, t_total, dt = 5.0, 40000.0, 10.0
    psi = np.zeros((2, grid.n_r, basis.n_theta), complex)
    psi[0] = np.outer(np.exp(-((grid.r - 150.0) ** 2) / (4 * sig0**2)),
                      np.ones(basis.n_theta))
    wf = Wavefunction(psi=psi, t=0.0, m_n=0, grid=grid, basis=basis)
    wf.psi /= np.sqrt(wf.norm())
    for _ in range(int(t_total / dt)):
        prop.step(wf, dt)
    dens = (np.abs(wf.psi[0]) ** 2 @ basis.w) * grid.dr
    mean = float(np.sum(dens * grid.r))
    var = float(np.sum(dens * (grid.r - mean) ** 2))
    exact = sig0 * np.sqrt(1.0 + (t_total / (2 * MASS * sig0**2)) ** 2)
    assert abs(np.sqrt(var) / exact - 1.0) < 1e-6


# -- splitting -----------------------------------------------------------------


def run_free_split(prop, grid, basis, r_split, t_total=30000.0, dt=10.0,
                   stride=20, mask_width=15.0):
    wf = outgoing_packet(grid, basis)
    mask = prop.mask(r_split, mask_width)
    acc = prop.new_accumulator(t_ref=t_total, m_n=0)
    n = int(t_total / dt)
    for i in range(n):
        prop.step(wf, dt)
        if (i + 1) % stride == 0 or i == n - 1:
            wf, acc = prop.split_and_accumulate(wf, acc, mask, mode="free")
    return wf, acc


def test_split_position_independence():
    _, grid, basis, _, prop = free_space_setup()
    _, acc1 = run_free_split(prop, grid, basis, 120.0)
    _, acc2 = run_free_split(prop, grid, basis, 180.0)
    p1 = (np.abs(acc1.phi_hat) ** 2).sum(axis=0)
    p2 = (np.abs(acc2.phi_hat) ** 2).sum(axis=0)
    assert np.linalg.norm(p1 - p2) / np.linalg.norm(p2) < 1e-4


def test_split_against_whole_grid_oracle():
    _, grid, basis, _, prop = free_space_setup()
    wf1, acc1 = run_free_split(prop, grid, basis, 120.0)
    # norm budget: internal + accumulated = initial
    assert abs(wf1.norm() + acc1.norm() - 1.0) < 1e-4
    wf = outgoing_packet(grid, basis)
    t_total, dt = 30000.0, 10.0
    for _ in range(int(t_total / dt)):
        prop.step(wf, dt)
    acc_direct = prop.analyze_outer(wf, prop.mask(120.0, 15.0), t_ref=t_total)
    p1 = (np.abs(acc1.phi_hat) ** 2).sum(axis=0)
    p2 = (np.abs(acc_direct.phi_hat) ** 2).sum(axis=0)
    assert np.linalg.norm(p1 - p2) / np.linalg.norm(p2) < 1e-3


def test_zero_flux_keeps_empty_accumulator(h2plus):
    grid = RadialGrid(n_r=512, r_min=0.2, r_max=60.0)
    basis = AngularBasis(m_n=0, n_l=4)
    st = solve_bound_state(h2plus, 0, 0, grid)
    pulse = LaserPulse.gaussian(785.0, 1e8, 2.0)  # deeply bound, negligible field
    nm = Numerics(dt=0.5, r_split=40.0, mask_width=4.0, split_stride=20,
                  diag_stride=100, tail_time=200.0)
    res = run_job(h2plus, st, 0, pulse, grid, basis, nm)
    assert res.amplitude.norm() < 1e-8


def test_no_field_no_dissociation(h2plus):
    grid = RadialGrid(n_r=512, r_min=0.2, r_max=60.0)
    basis = AngularBasis(m_n=0, n_l=4)
    st = solve_bound_state(h2plus, 0, 3, grid)
    pulse = LaserPulse.gaussian(785.0, 0.0, 2.0)
    nm = Numerics(dt=0.5, r_split=40.0, mask_width=4.0, split_stride=20,
                  diag_stride=100, tail_time=200.0)
    res = run_job(h2plus, st, 0, pulse, grid, basis, nm)
    assert abs(res.dissociation_probability) < 1e-8


@pytest.mark.slow
def test_weak_field_linearity(h2plus):
    grid = RadialGrid(n_r=1024, r_min=0.2, r_max=100.0)
    basis = AngularBasis(m_n=0, n_l=6)
    st = solve_bound_state(h2plus, 0, 9, grid)
    probs = []
    for intensity in (1e10, 2e10):
        pulse = LaserPulse.gaussian(785.0, intensity, 10.0, pre_center_widths=2.5)
        nm = Numerics(dt=0.5, r_split=70.0, mask_width=7.0, split_stride=50,
                      diag_stride=400, dt_tail=2.0, tail_time=10000.0)
        res = run_job(h2plus, st, 0, pulse, grid, basis, nm)
        probs.append(res.amplitude.norm())
        assert abs(res.final_internal_norm + res.amplitude.norm()
                   - res.initial_norm) < 1e-4
    assert abs(probs[1] / probs[0] - 2.0) < 0.1


def test_mn_sign_symmetry(h2plus):
    grid = RadialGrid(n_r=512, r_min=0.2, r_max=60.0)
    st = solve_bound_state(h2plus, 1, 2, grid)
    out = []
    for m_n in (1, -1):
        basis = AngularBasis(m_n=m_n, n_l=6)
        pulse = LaserPulse.gaussian(785.0, 5e12, 2.0)
        nm = Numerics(dt=0.5, r_split=40.0, mask_width=4.0, split_stride=20,
                      diag_stride=100, tail_time=500.0)
        res = run_job(h2plus, st, m_n, pulse, grid, basis, nm)
        out.append(res.amplitude.phi_hat)
    assert np.array_equal(out[0], out[1])  # bitwise: +M and -M identical


def test_nan_raises_blowup(h2plus, basis8):
    grid = RadialGrid(n_r=512, r_min=0.2, r_max=60.0)
    st = solve_bound_state(h2plus, 0, 0, grid)
    st.chi[10] = np.nan
    pulse = LaserPulse.gaussian(785.0, 1e12, 2.0)
    nm = Numerics(dt=0.5, r_split=40.0, mask_width=4.0, tail_time=100.0,
                  diag_stride=50)
    with pytest.raises(NumericalBlowupError):
        run_job(h2plus, st, 0, pulse, grid, basis8, nm)


@pytest.mark.slow
def test_defer_boundary_contamination(h2plus):
    # deferred splitting on a grid too small for the flux produced during the
    # pulse: run_job must detect the contamination at r_max
    grid = RadialGrid(n_r=512, r_min=0.2, r_max=40.0)
    basis = AngularBasis(m_n=0, n_l=6)
    st = solve_bound_state(h2plus, 0, 12, grid)
    pulse = LaserPulse.gaussian(785.0, 1.6e13, 30.0, pre_center_widths=2.2)
    nm = Numerics(dt=0.5, r_split=28.0, mask_width=2.5, split_stride=50,
                  diag_stride=400, asymptotic_phase="defer", tail_time=100.0)
    with pytest.raises(BoundaryContaminationError):
        run_job(h2plus, st, 0, pulse, grid, basis, nm)


def test_dt_midstep_field_sampling(h2plus, basis8):
    # trailing/leading half potential phases use the same mid-step field value
    grid = RadialGrid(n_r=512, r_min=0.2, r_max=60.0)
    pulse = LaserPulse.gaussian(785.0, 1e13, 1.0)
    prop = TwoChannelPropagator(h2plus, grid, basis8, pulse)
    st = solve_bound_state(h2plus, 0, 0, grid)
    wf = prop.build_initial(st, 0)
    n0 = wf.norm()
    for _ in range(10):
        prop.step(wf, 0.1)
    assert abs(wf.norm() - n0) < 1e-12  # each step exactly unitary
