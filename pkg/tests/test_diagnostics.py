import numpy as np
import pytest

from hfscatter import Grid, OrbitalEnsemble
from hfscatter.diagnostics import (DiagnosticsError, FitConfig, ProbeError,
                                   decay_fit, dispersive_estimate_check,
                                   operator_scattering, phase_drift, profile,
                                   records, remainder_fd,
                                   remainder_quadrature,
                                   resonance_kernel_checks, scattering_cauchy,
                                   spacetime_norm, trajectory_profiles)
from hfscatter.integrator import IntegratorConfig, WavePacket, evolve, prepare_initial
from hfscatter.nonlinearity import RhsMode
from hfscatter.potential import DiracMass, GaussianMass

from conftest import plane_wave_ensemble, smooth_ensemble

W = GaussianMass(1.0, 1.0)

PACKETS = [
    WavePacket(weight=1.0, amplitude=0.3, center=-2.0, frequency=0.5, width=1.2),
    WavePacket(weight=0.5, amplitude=0.3, center=2.0, frequency=-0.5, width=1.0),
]


@pytest.fixture(scope="module")
def linear_traj():
    init = prepare_initial(PACKETS, Grid(2048, 512.0))
    cfg = IntegratorConfig(dt=0.05, t_end=16.0, snapshot_ratio=np.sqrt(2.0),
                           extra_snapshots=(3.9, 4.1))
    return evolve(cfg, init, W, RhsMode.LINEAR)


@pytest.fixture(scope="module")
def rank1_traj():
    init = prepare_initial(PACKETS[:1], Grid(2048, 512.0))
    cfg = IntegratorConfig(dt=0.05, t_end=16.0, snapshot_ratio=np.sqrt(2.0),
                           extra_snapshots=(3.9, 4.1))
    return evolve(cfg, init, W, RhsMode.HARTREE_FOCK)


def bracket_profiles(traj, lo=3.9, hi=4.1):
    times = list(traj.times)
    i = next(k for k, t in enumerate(times) if abs(t - lo) < 1e-9)
    j = next(k for k, t in enumerate(times) if abs(t - hi) < 1e-9)
    return profile(traj.snapshots[i]), profile(traj.snapshots[j])


@pytest.fixture(scope="module")
def hf_remainder_traj():
    # snapshots bracketing s=4 for the two-route remainder comparison; the
    # box is sized for the oscillatory kernel, not for long propagation, so
    # the seam monitor trips harmlessly at the per-mille level
    import warnings

    from hfscatter.integrator import WrapAroundWarning
    init = prepare_initial(PACKETS, Grid(512, 64.0))
    s, h = 4.0, 0.1
    cfg = IntegratorConfig(dt=0.01, t_end=s + h, snapshot_ratio=8.0,
                           extra_snapshots=(s - h, s))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WrapAroundWarning)
        return evolve(cfg, init, W, RhsMode.HARTREE_FOCK)


class TestProfile:
    def test_frozen_for_linear_flow(self, linear_traj):
        profs = trajectory_profiles(linear_traj)
        base = profs[0].profiles
        scale = np.max(np.abs(base))
        for p in profs[1:]:
            assert np.max(np.abs(p.profiles - base)) <= 1e-10 * scale

    def test_frozen_for_rank_one(self, rank1_traj):
        profs = trajectory_profiles(rank1_traj)
        base = profs[0].profiles
        scale = np.max(np.abs(base))
        for p in profs[1:]:
            assert np.max(np.abs(p.profiles - base)) <= 1e-10 * scale

    def test_profile_at_time_zero_is_transform(self):
        g = Grid(128, 32.0)
        ens = smooth_ensemble(g, 2, seed=1, t=0.0)
        p = profile(ens)
        assert np.max(np.abs(p.profiles - g.forward(ens.orbitals))) == 0.0

    def test_unitarity(self, linear_traj):
        for snap in linear_traj.snapshots:
            p = profile(snap)
            for zu, u in zip(p.profiles, snap.orbitals):
                g = snap.grid
                assert abs(g.spectral_norm(zu) - g.norm(u)) <= 1e-12 * g.norm(u)


class TestSpacetimeNorm:
    def test_zero_trajectory(self):
        g = Grid(64, 16.0)
        zero = OrbitalEnsemble(g, [1.0], np.zeros((1, 64), complex), t=1.0)
        cfg = IntegratorConfig(dt=0.05, t_end=2.0, snapshot_ratio=2.0)
        traj = evolve(cfg, zero, W, RhsMode.LINEAR)
        st = spacetime_norm(traj, FitConfig())
        assert st.combined == 0.0

    def test_linear_mass_component(self, linear_traj):
        st = spacetime_norm(linear_traj, FitConfig())
        m0 = np.sqrt(linear_traj.snapshots[0].trace_mass())
        assert abs(st.mass_component - m0) <= 1e-10 * m0

    def test_needs_two_snapshots(self):
        g = Grid(64, 16.0)
        zero = OrbitalEnsemble(g, [1.0], np.zeros((1, 64), complex), t=1.0)
        traj = evolve(IntegratorConfig(dt=0.05, t_end=1.0), zero, W,
                      RhsMode.LINEAR)
        with pytest.raises(DiagnosticsError):
            spacetime_norm(traj, FitConfig())


class TestDecayFit:
    def test_exact_power(self):
        ts = np.geomspace(1, 64, 13)
        fit = decay_fit([(t, 3.0 * t**-0.5) for t in ts], (1.0, 64.0))
        assert abs(fit.exponent + 0.5) <= 1e-10
        assert fit.stderr <= 1e-10

    def test_constant_series(self):
        ts = np.geomspace(1, 64, 13)
        fit = decay_fit([(t, 2.5) for t in ts], (1.0, 64.0))
        assert abs(fit.exponent) <= 1e-10

    def test_window_and_errors(self):
        ts = np.geomspace(1, 64, 13)
        with pytest.raises(DiagnosticsError):
            decay_fit([(t, 1.0) for t in ts], (100.0, 200.0))
        with pytest.raises(DiagnosticsError):
            decay_fit([(t, -1.0) for t in ts], (1.0, 64.0))

    def test_linear_gaussian_sup_norm_exponent(self):
        # closed form sup |e^{i t Lap} e^{-x^2/2}| = (1 + 4 t^2)^(-1/4);
        # the prepared state at time t is exactly e^{i t Lap} of the data
        g = Grid(4096, 1024.0)
        init = prepare_initial(
            [WavePacket(weight=1.0, amplitude=1.0, width=1.0)], g)
        cfg = IntegratorConfig(dt=0.05, t_end=64.0, snapshot_ratio=np.sqrt(2.0))
        traj = evolve(cfg, init, W, RhsMode.LINEAR)
        recs = records(traj)
        for r in recs:
            exact = (1 + 4 * r.t**2) ** -0.25
            assert abs(r.sup_norm - exact) <= 1e-6
        fit = decay_fit([(r.t, r.sup_norm) for r in recs], (4.0, 64.0))
        assert abs(fit.exponent + 0.5) <= 0.05


class TestScatteringCauchy:
    def test_identical_profiles(self, linear_traj):
        p = trajectory_profiles(linear_traj)[0]
        d = scattering_cauchy(p, p, FitConfig())
        assert d.as_tuple() == (0.0, 0.0, 0.0)

    def test_linear_pairs_vanish(self, linear_traj):
        profs = trajectory_profiles(linear_traj)
        d = scattering_cauchy(profs[0], profs[-1], FitConfig())
        scale = np.sqrt(linear_traj.snapshots[0].trace_mass())
        assert max(d.as_tuple()) <= 1e-10 * max(scale, 1.0)

    def test_family_mismatch_rejected(self, linear_traj):
        profs = trajectory_profiles(linear_traj)
        other = profile(smooth_ensemble(linear_traj.grid, 3, seed=2))
        with pytest.raises(DiagnosticsError):
            scattering_cauchy(profs[0], other, FitConfig())


class TestPhaseDrift:
    def test_linear_slope_zero(self, linear_traj):
        profs = trajectory_profiles(linear_traj)
        pd = phase_drift(profs, 0.5)
        assert abs(pd.slope) <= 1e-6

    def test_probe_amplitude_guard(self, linear_traj):
        profs = trajectory_profiles(linear_traj)
        with pytest.raises(ProbeError):
            phase_drift(profs, np.max(linear_traj.grid.xi) * 0.9)


class TestRemainders:
    def test_linear_remainder_vanishes(self, linear_traj):
        p_lo, p_hi = bracket_profiles(linear_traj)
        fd = remainder_fd(p_lo, p_hi)
        scale = np.max(np.abs(p_lo.profiles))
        assert fd.sup() <= 1e-8 * scale

    def test_rank_one_remainder_vanishes(self, rank1_traj):
        p_lo, p_hi = bracket_profiles(rank1_traj)
        fd = remainder_fd(p_lo, p_hi)
        scale = np.max(np.abs(p_lo.profiles))
        assert fd.sup() <= 1e-8 * scale

    def test_fd_step_guard(self, linear_traj):
        profs = trajectory_profiles(linear_traj)
        with pytest.raises(DiagnosticsError):
            remainder_fd(profs[0], profs[-1])  # h far beyond 0.1*s

    def test_quadrature_zero_profile(self):
        g = Grid(512, 64.0)
        zero = OrbitalEnsemble(g, [1.0], np.zeros((1, 512), complex), t=4.0)
        rq = remainder_quadrature(profile(zero), W, coarse_n=32)
        assert np.max(rq.l2_omega) == 0.0

    def test_quadrature_plane_wave_cancels(self):
        g = Grid(512, 64.0)
        ens = plane_wave_ensemble(g, [0.5 + 0.1j, -0.2 + 0.3j], [1.0, 0.5],
                                  xi0=1.0, t=4.0)
        rq = remainder_quadrature(profile(ens), W, coarse_n=32)
        scale = W.m1_norm() * 0.5**3
        assert np.max(rq.l2_omega) <= 1e-12 * scale

    def test_quadrature_guards(self):
        g = Grid(512, 64.0)
        p = profile(smooth_ensemble(g, 1, seed=3, t=4.0))
        with pytest.raises(DiagnosticsError):
            remainder_quadrature(p, W, coarse_n=128)
        with pytest.raises(DiagnosticsError):
            remainder_quadrature(p, W, coarse_n=48)

    def test_two_routes_agree(self, hf_remainder_traj):
        traj = hf_remainder_traj
        profs = [profile(traj.snapshots[i]) for i in (1, 2, 3)]
        fd = remainder_fd(profs[0], profs[2])
        rq = remainder_quadrature(profs[1], W, coarse_n=64)
        idx = [int(np.argmin(np.abs(fd.xi - x))) for x in rq.xi]
        fdc = fd.l2_omega[idx]
        sup_z = float(np.max(np.sqrt(np.tensordot(
            profs[1].weights, np.abs(profs[1].profiles) ** 2, axes=(0, 0)))))
        cubic = (2 * np.pi) ** -0.5 * W.m1_norm() * sup_z**3
        allowed = 0.1 * fdc + 1e-6 * cubic
        worst = np.max(np.abs(rq.l2_omega - fdc) / allowed)
        assert worst <= 1.0, f"two-route remainder mismatch ratio {worst:.3f}"


class TestResonanceKernel:
    def test_zero_shift_identity(self):
        g = Grid(128, 32.0)
        prof = profile(smooth_ensemble(g, 2, seed=4, t=4.0))
        rep = resonance_kernel_checks(prof, W)
        assert rep.zero_shift_max <= 1e-14 * rep.cubic_scale
        assert rep.bracket_antisymmetry_max <= 1e-14 * rep.cubic_scale

    def test_full_antisymmetry_for_constant_transform(self):
        # a Dirac mass has constant w_hat, so the full integrand flips sign
        g = Grid(128, 32.0)
        prof = profile(smooth_ensemble(g, 2, seed=5, t=4.0))
        rep = resonance_kernel_checks(prof, DiracMass(1.3))
        assert rep.full_antisymmetry_max <= 1e-14 * rep.cubic_scale

    def test_massless_potential_kills_kernel(self):
        g = Grid(128, 32.0)
        prof = profile(smooth_ensemble(g, 2, seed=6, t=4.0))
        rep = resonance_kernel_checks(prof, GaussianMass(0.0, 1.0))
        assert rep.cubic_scale == 0.0
        assert rep.full_antisymmetry_max == 0.0


class TestOperatorScattering:
    def test_linear_distances_vanish(self, linear_traj):
        osc = operator_scattering(linear_traj)
        assert max(d for _, d in osc.distances) <= 1e-9

    def test_rank_one_distances_vanish(self, rank1_traj):
        osc = operator_scattering(rank1_traj)
        assert max(d for _, d in osc.distances) <= 1e-9

    def test_needs_four_snapshots(self):
        g = Grid(64, 16.0)
        zero = OrbitalEnsemble(g, [1.0], np.zeros((1, 64), complex), t=1.0)
        traj = evolve(IntegratorConfig(dt=0.05, t_end=2.0, snapshot_ratio=4.0),
                      zero, W, RhsMode.LINEAR)
        with pytest.raises(DiagnosticsError):
            operator_scattering(traj)


class TestDispersiveEstimate:
    def test_gaussian_constant_bounded(self):
        g = Grid(8192, 512.0)
        ts = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
        for a in (0.5, 1.0, 2.0):
            rep = dispersive_estimate_check(g, np.exp(-a * g.x**2), ts,
                                            beta=0.125, gamma_exp=1.0)
            assert rep.constant <= 2.0

    def test_zero_field_guarded(self):
        g = Grid(256, 32.0)
        rep = dispersive_estimate_check(g, np.zeros(256), [1.0, 2.0])
        assert rep.constant == 0.0

    def test_single_time_reports_row(self):
        g = Grid(256, 64.0)
        rep = dispersive_estimate_check(g, np.exp(-g.x**2), [1.0])
        assert len(rep.rows) == 1
        t, lhs, rhs_val, ratio = rep.rows[0]
        assert t == 1.0 and lhs > 0 and rhs_val > 0 and ratio > 0

    def test_exponent_precondition(self):
        g = Grid(256, 32.0)
        with pytest.raises(DiagnosticsError):
            dispersive_estimate_check(g, np.exp(-g.x**2), [1.0],
                                      beta=0.3, gamma_exp=1.0)


def test_fit_config_validation():
    with pytest.raises(DiagnosticsError):
        FitConfig(alpha=0.3)
    with pytest.raises(DiagnosticsError):
        FitConfig(theta=1.0)
    with pytest.raises(DiagnosticsError):
        FitConfig(beta=0.0)
    with pytest.raises(DiagnosticsError):
        FitConfig(window=(4.0, 2.0))
    # alpha limit tightens with theta
    FitConfig(alpha=0.0624, theta=0.0)
    with pytest.raises(DiagnosticsError):
        FitConfig(alpha=0.0626, theta=0.5)
