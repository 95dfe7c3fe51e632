"""Built-in verification suites behind the `verify` CLI command.

fast: algebraic identities and oracle equivalences at small sizes.
full: adds integrator order, quadrature refinement of the integral-form
defect, and the two-route remainder cross-check.
"""

from __future__ import annotations

import warnings
import numpy as np

from . import diagnostics, nonlinearity
from .ensemble import OrbitalEnsemble
from .grid import Grid
from .integrator import (IntegratorConfig, WavePacket, WrapAroundWarning,
                         duhamel_residual, evolve, prepare_initial,
                         richardson_errors)
from .nonlinearity import RhsMode
from .potential import BoxMass, DiracMass, GaussianMass, SumOfDiracs

__all__ = ["run_suite", "CHECKS_FAST", "CHECKS_FULL"]

_VARIANTS = (
    DiracMass(1.3),
    GaussianMass(1.0, 1.0),
    BoxMass(0.8, 2.0),
    SumOfDiracs(atoms=((0.5, 0.7), (0.5, -0.7))),
)


def _smooth_ensemble(grid: Grid, K: int, seed: int = 3,
                     amplitude: float = 0.5) -> OrbitalEnsemble:
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(K):
        c = rng.uniform(-grid.length / 8, grid.length / 8)
        f = rng.uniform(-1.5, 1.5)
        s = rng.uniform(0.8, 1.6)
        a = amplitude * (rng.standard_normal() + 1j * rng.standard_normal())
        fields.append(a * np.exp(-((grid.x - c) ** 2) / (2 * s * s))
                      * np.exp(1j * f * grid.x))
    weights = rng.uniform(0.2, 1.0, size=K)
    return OrbitalEnsemble(grid, weights, np.array(fields), t=1.0)


def check_transform_roundtrip():
    grid = Grid(256, 32.0)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    err = np.max(np.abs(grid.inverse(grid.forward(f)) - f)) / np.max(np.abs(f))
    plancherel = abs(grid.norm(f) - grid.spectral_norm(grid.forward(f)))
    return max(err, plancherel) <= 1e-12, {"roundtrip": err,
                                           "plancherel": plancherel}


def check_potential_symmetry():
    eta = np.linspace(-40.0, 40.0, 1001)
    worst = 0.0
    for w in _VARIANTS:
        vals = w.fourier_at(eta)
        worst = max(worst, float(np.max(np.abs(vals - vals[::-1]))))
        worst = max(worst, float(np.max(np.abs(np.imag(vals)))))
        bound = w.m1_norm() / np.sqrt(2 * np.pi)
        if np.max(np.abs(vals)) > bound + 1e-12:
            return False, {"bound_violation": float(np.max(np.abs(vals)))}
    return worst <= 1e-12, {"symmetry_residual": worst}


def check_plane_wave_cancellation():
    grid = Grid(64, 16.0)
    xi0 = grid.nearest_mode(1.2)
    c = np.array([0.7 + 0.2j, -0.3 + 0.5j])
    orbs = np.array([ck * np.exp(1j * xi0 * grid.x) for ck in c])
    ens = OrbitalEnsemble(grid, [1.0, 0.5], orbs, t=1.0)
    scale = float(np.max(np.abs(c))) ** 3
    worst = 0.0
    for w in _VARIANTS:
        r = nonlinearity.rhs(ens, w, RhsMode.HARTREE_FOCK)
        worst = max(worst, float(np.max(np.abs(r))) / (w.m1_norm() * scale))
    return worst <= 1e-12, {"relative_residual": worst}


def check_rank_one_freeness():
    grid = Grid(128, 32.0)
    ens = _smooth_ensemble(grid, 1, seed=5, amplitude=1.0)
    scale = float(np.max(np.abs(ens.orbitals))) ** 3
    worst = 0.0
    for w in _VARIANTS:
        r = nonlinearity.rhs(ens, w, RhsMode.HARTREE_FOCK)
        worst = max(worst, float(np.max(np.abs(r))) / (w.m1_norm() * scale))
    return worst <= 1e-12, {"relative_residual": worst}


def check_mass_selfadjointness():
    grid = Grid(128, 32.0)
    ens = _smooth_ensemble(grid, 3, seed=7, amplitude=1.0)
    scale = float(np.max(np.abs(ens.orbitals))) ** 4
    worst = 0.0
    for w in _VARIANTS[:2]:
        for mode in (RhsMode.HARTREE_FOCK, RhsMode.REDUCED_HARTREE):
            r = nonlinearity.rhs(ens, w, mode)
            val = sum(a * grid.inner(u, ru) for a, u, ru in
                      zip(ens.weights, ens.orbitals, r))
            worst = max(worst, abs(val.imag) / scale)
    return worst <= 1e-12, {"imaginary_part": worst}


def check_exchange_oracle():
    grid = Grid(64, 32.0)
    ens = _smooth_ensemble(grid, 3, seed=11, amplitude=0.8)
    w = GaussianMass(1.0, 1.0)
    fast = nonlinearity.exchange_term(ens, w)
    dense = nonlinearity.exchange_dense_oracle(ens, w)
    rel = float(np.max(np.abs(fast - dense)) / np.max(np.abs(dense)))
    return rel <= 1e-10, {"relative_error": rel}


def check_kernel_identity():
    grid = Grid(128, 32.0)
    ens = _smooth_ensemble(grid, 2, seed=13, amplitude=0.6)
    prof = diagnostics.profile(ens)
    rep = diagnostics.resonance_kernel_checks(prof, GaussianMass(1.0, 1.0))
    tol = 1e-14 * rep.cubic_scale
    ok = (rep.zero_shift_max <= tol
          and rep.bracket_antisymmetry_max <= tol)
    return ok, {"zero_shift": rep.zero_shift_max,
                "bracket_antisymmetry": rep.bracket_antisymmetry_max,
                "tolerance": tol}


def check_linear_dispersion():
    grid = Grid(8192, 512.0)
    worst = 0.0
    ts = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    for a in (0.5, 1.0, 2.0):
        rep = diagnostics.dispersive_estimate_check(
            grid, np.exp(-a * grid.x**2), ts, beta=0.125, gamma_exp=1.0)
        worst = max(worst, rep.constant)
    return worst <= 2.0, {"constant": worst}


def check_integrator_order():
    grid = Grid(256, 64.0)
    packets = [WavePacket(weight=1.0, amplitude=0.7, center=-3.0,
                          frequency=0.5, width=1.2),
               WavePacket(weight=0.5, amplitude=0.7, center=3.0,
                          frequency=-0.5, width=1.0)]
    init = prepare_initial(packets, grid)
    w = GaussianMass(1.0, 1.0)
    errs = richardson_errors(init, w, RhsMode.HARTREE_FOCK, 2.0,
                             [0.04, 0.02], 0.0025)
    ratio = errs[0] / errs[1]
    return 14.0 <= ratio <= 18.0, {"halving_ratio": ratio}


def check_duhamel_refinement():
    grid = Grid(512, 128.0)
    packets = [WavePacket(weight=1.0, amplitude=0.7, center=-3.0,
                          frequency=0.5, width=1.2),
               WavePacket(weight=0.5, amplitude=0.7, center=3.0,
                          frequency=-0.5, width=1.0)]
    init = prepare_initial(packets, grid)
    w = GaussianMass(1.0, 1.0)
    cfg = IntegratorConfig(dt=0.01, t_end=2.0, snapshot_ratio=2.0)
    traj = evolve(cfg, init, w, RhsMode.HARTREE_FOCK)
    r16 = duhamel_residual(traj, w, RhsMode.HARTREE_FOCK, n_quad=16)[0]
    r32 = duhamel_residual(traj, w, RhsMode.HARTREE_FOCK, n_quad=32)[0]
    return r16 / r32 >= 8.0, {"residual_16": r16, "residual_32": r32,
                              "refinement_ratio": r16 / r32}


def check_remainder_crosscheck():
    grid = Grid(512, 64.0)
    packets = [WavePacket(weight=1.0, amplitude=0.3, center=-2.0,
                          frequency=0.5, width=1.2),
               WavePacket(weight=0.5, amplitude=0.3, center=2.0,
                          frequency=-0.5, width=1.0)]
    init = prepare_initial(packets, grid)
    w = GaussianMass(1.0, 1.0)
    s, h = 4.0, 0.1
    cfg = IntegratorConfig(dt=0.01, t_end=s + h, snapshot_ratio=8.0,
                           extra_snapshots=(s - h, s))
    traj = evolve(cfg, init, w, RhsMode.HARTREE_FOCK)
    profs = [diagnostics.profile(traj.snapshots[i]) for i in (1, 2, 3)]
    fd = diagnostics.remainder_fd(profs[0], profs[2])
    rq = diagnostics.remainder_quadrature(profs[1], w, coarse_n=64)
    idx = [int(np.argmin(np.abs(fd.xi - x))) for x in rq.xi]
    fdc = fd.l2_omega[idx]
    sup_z = float(np.max(np.sqrt(np.tensordot(
        profs[1].weights, np.abs(profs[1].profiles) ** 2, axes=(0, 0)))))
    cubic = (2 * np.pi) ** -0.5 * w.m1_norm() * sup_z**3
    allowed = 0.1 * fdc + 1e-6 * cubic
    worst = float(np.max(np.abs(rq.l2_omega - fdc) / allowed))
    return worst <= 1.0, {"worst_ratio": worst, "sup_fd": float(np.max(fdc))}


CHECKS_FAST = [
    ("transform_roundtrip", check_transform_roundtrip),
    ("potential_symmetry", check_potential_symmetry),
    ("plane_wave_cancellation", check_plane_wave_cancellation),
    ("rank_one_freeness", check_rank_one_freeness),
    ("mass_selfadjointness", check_mass_selfadjointness),
    ("exchange_oracle", check_exchange_oracle),
    ("kernel_identity", check_kernel_identity),
]

CHECKS_FULL = CHECKS_FAST + [
    ("linear_dispersion", check_linear_dispersion),
    ("integrator_order", check_integrator_order),
    ("duhamel_refinement", check_duhamel_refinement),
    ("remainder_crosscheck", check_remainder_crosscheck),
]


def run_suite(level: str = "fast", emit=None) -> tuple[bool, list[dict]]:
    """Run the named suite; returns (all_passed, results)."""
    checks = CHECKS_FAST if level == "fast" else CHECKS_FULL
    results = []
    all_ok = True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WrapAroundWarning)
        for name, fn in checks:
            try:
                ok, detail = fn()
            except Exception as exc:  # a crashed check is a failed check
                ok, detail = False, {"exception": repr(exc)}
            all_ok = all_ok and ok
            row = {"check": name, "level": level, "passed": bool(ok),
                   "detail": {k: (float(v) if isinstance(v, (int, float, np.floating))
                                  else v) for k, v in detail.items()}}
            results.append(row)
            if emit is not None:
                emit(row)
    return all_ok, results
