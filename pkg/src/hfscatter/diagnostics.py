"""Scattering and decay diagnostics over evolved trajectories.

Everything here is pure post-processing of snapshots: the spectral
profile (free flow pulled out of the solution), its Cauchy distances in
weighted Sobolev norms, decay-exponent fits, phase-drift detection for
long-range behavior, the profile time-derivative ("remainder") computed
two independent ways, and the trace-norm distance to the free evolution
of the estimated asymptotic operator.

Expectations over the probability space reduce exactly to weighted sums
over the orbital family; L2-in-omega norms of differences are
component-wise because the same Gaussian coefficients multiply both
fields being compared.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .ensemble import OrbitalEnsemble, schatten1_distance
from .grid import Grid
from .integrator import Trajectory, boundary_mass_fraction

__all__ = [
    "ProfileSnapshot", "DiagnosticsRecord", "FitConfig", "FitResult",
    "profile", "trajectory_profiles", "records", "spacetime_norm",
    "SpacetimeNorm", "decay_fit", "scattering_cauchy", "CauchyDistances",
    "phase_drift", "PhaseDrift", "remainder_fd", "remainder_quadrature",
    "RemainderEstimate", "resonance_kernel_checks", "ResonanceKernelReport",
    "operator_scattering", "OperatorScattering",
    "dispersive_estimate_check", "DispersiveReport",
    "DiagnosticsError", "ProbeError",
]


class DiagnosticsError(ValueError):
    """Invalid diagnostics input."""


class ProbeError(DiagnosticsError):
    """Probe amplitude too small for a meaningful phase measurement."""


# -- profiles --------------------------------------------------------------


@dataclass
class ProfileSnapshot:
    """Per-orbital spectral profiles exp(i t xi^2) * u_hat(t, xi)."""

    t: float
    grid: Grid
    weights: np.ndarray
    profiles: np.ndarray  # (K, n) complex, centered frequency order


def profile(ens: OrbitalEnsemble) -> ProfileSnapshot:
    """Pull the free flow out of the solution; the frozen object of scattering."""
    g = ens.grid
    zhat = g.free_phase(-ens.t) * g.forward(ens.orbitals)
    return ProfileSnapshot(t=ens.t, grid=g, weights=ens.weights.copy(),
                           profiles=zhat)


def trajectory_profiles(traj: Trajectory) -> list[ProfileSnapshot]:
    return [profile(s) for s in traj.snapshots]


def _omega_amplitude(weights: np.ndarray, fields: np.ndarray) -> np.ndarray:
    """Pointwise L2-in-omega magnitude sqrt(sum_n alpha_n |f_n|^2)."""
    return np.sqrt(np.tensordot(weights, np.abs(fields) ** 2, axes=(0, 0)))


# -- per-snapshot records ----------------------------------------------------


@dataclass
class DiagnosticsRecord:
    t: float
    sup_norm: float
    l2_mass: float
    h10_x: float
    h01_z: float
    gram_drift: float
    boundary_mass_fraction: float

    def as_dict(self) -> dict:
        return {
            "t": self.t, "sup_norm": self.sup_norm, "l2_mass": self.l2_mass,
            "h10_x": self.h10_x, "h01_z": self.h01_z,
            "gram_drift": self.gram_drift,
            "boundary_mass_fraction": self.boundary_mass_fraction,
        }


def _record(ens: OrbitalEnsemble, gram_ref: np.ndarray,
            margin: float) -> DiagnosticsRecord:
    g = ens.grid
    sup_norm = float(np.max(_omega_amplitude(ens.weights, ens.orbitals)))
    l2_mass = float(np.sqrt(ens.trace_mass()))
    U_hat = g.forward(ens.orbitals)
    grad_sq = g.dxi * np.sum((g.xi**2) * np.abs(U_hat) ** 2, axis=1)
    h10 = float(np.sqrt(np.dot(ens.weights, grad_sq)))
    z = g.inverse(g.free_phase(-ens.t) * U_hat)
    xz_sq = g.dx * np.sum((g.x**2) * np.abs(z) ** 2, axis=1)
    h01 = float(np.sqrt(np.dot(ens.weights, xz_sq)))
    gram_drift = float(np.max(np.abs(ens.gram() - gram_ref)))
    return DiagnosticsRecord(
        t=ens.t, sup_norm=sup_norm, l2_mass=l2_mass, h10_x=h10, h01_z=h01,
        gram_drift=gram_drift,
        boundary_mass_fraction=boundary_mass_fraction(ens, margin))


def records(traj: Trajectory, margin: float = 1.0 / 16.0) -> list[DiagnosticsRecord]:
    """One DiagnosticsRecord per snapshot; Gram drift is vs the first snapshot."""
    gram_ref = traj.snapshots[0].gram()
    return [_record(s, gram_ref, margin) for s in traj.snapshots]


# -- fit configuration -------------------------------------------------------


@dataclass
class FitConfig:
    """Exponent and window parameters for the weighted norms and fits."""

    alpha: float = 0.05
    theta: float = 0.5
    beta: float = 0.125
    window: tuple = (4.0, 64.0)

    def __post_init__(self):
        if not (0.0 <= self.theta < 1.0):
            raise DiagnosticsError(f"theta must be in [0, 1), got {self.theta}")
        limit = min(0.25, (1.0 - self.theta) / (4.0 * (3.0 - 2.0 * self.theta)))
        if not (0.0 < self.alpha < limit):
            raise DiagnosticsError(
                f"alpha must be in (0, {limit:g}) for theta={self.theta}, "
                f"got {self.alpha}")
        if not self.beta > 0:
            raise DiagnosticsError(f"beta must be positive, got {self.beta}")
        lo, hi = self.window
        if not (0 < lo < hi):
            raise DiagnosticsError(f"window must be increasing, got {self.window}")


# -- time-weighted solution norm ---------------------------------------------


@dataclass
class SpacetimeNorm:
    """Max over snapshots of the four time-weighted instantaneous norms."""

    sup_component: float     # t^(1/2) * sup-in-x amplitude
    grad_component: float    # t^(-alpha) * homogeneous H^1 norm of the field
    weight_component: float  # t^(-alpha) * weighted L2 norm x * profile
    mass_component: float    # plain L2 mass

    @property
    def combined(self) -> float:
        return (self.sup_component + self.grad_component
                + self.weight_component + self.mass_component)


def spacetime_norm(traj: Trajectory, fit: FitConfig) -> SpacetimeNorm:
    if len(traj) < 2:
        raise DiagnosticsError("need at least two snapshots")
    recs = records(traj)
    ts = np.array([r.t for r in recs])
    sup = np.array([r.sup_norm for r in recs])
    h10 = np.array([r.h10_x for r in recs])
    h01 = np.array([r.h01_z for r in recs])
    mass = np.array([r.l2_mass for r in recs])
    return SpacetimeNorm(
        sup_component=float(np.max(np.sqrt(ts) * sup)),
        grad_component=float(np.max(ts**(-fit.alpha) * h10)),
        weight_component=float(np.max(ts**(-fit.alpha) * h01)),
        mass_component=float(np.max(mass)),
    )


# -- decay fits ---------------------------------------------------------------


@dataclass
class FitResult:
    exponent: float
    stderr: float
    window: tuple
    n_points: int

    def as_dict(self) -> dict:
        return {"exponent": self.exponent, "stderr": self.stderr,
                "window": list(self.window), "n_points": self.n_points}


def _log_linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xbar = np.mean(x)
    den = np.sum((x - xbar) ** 2)
    slope = float(np.sum((x - xbar) * (y - np.mean(y))) / den)
    resid = y - (np.mean(y) + slope * (x - xbar))
    dof = max(len(x) - 2, 1)
    stderr = float(np.sqrt(np.sum(resid**2) / dof / den))
    return slope, stderr


def decay_fit(series, window) -> FitResult:
    """Least-squares slope of log(value) against log(t) on the window."""
    ts = np.array([t for t, _ in series], dtype=float)
    vs = np.array([v for _, v in series], dtype=float)
    lo, hi = window
    keep = (ts >= lo) & (ts <= hi)
    ts, vs = ts[keep], vs[keep]
    if len(ts) < 5:
        raise DiagnosticsError(
            f"decay fit needs >= 5 points in window {window}, got {len(ts)}")
    if np.any(vs <= 0):
        raise DiagnosticsError("decay fit requires positive values")
    slope, stderr = _log_linear_fit(np.log(ts), np.log(vs))
    return FitResult(exponent=slope, stderr=stderr, window=(lo, hi),
                     n_points=len(ts))


# -- profile Cauchy distances -------------------------------------------------


@dataclass
class CauchyDistances:
    d_inf: float      # sup over xi of the omega-amplitude of the difference
    d_theta0: float   # smoothness-weighted norm, <x>^theta on the conjugate side
    d_0theta: float   # <xi>^theta weighted L2 norm

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.d_inf, self.d_theta0, self.d_0theta)


def scattering_cauchy(p1: ProfileSnapshot, p2: ProfileSnapshot,
                      fit: FitConfig) -> CauchyDistances:
    """Distances between two profiles of the same evolved orbital family."""
    p1.grid.require_same(p2.grid)
    if p1.profiles.shape != p2.profiles.shape or not np.allclose(
            p1.weights, p2.weights):
        raise DiagnosticsError("profiles belong to different orbital families")
    g = p1.grid
    delta = p2.profiles - p1.profiles
    amp = _omega_amplitude(p1.weights, delta)
    d_inf = float(np.max(amp))
    bracket_xi = (1.0 + g.xi**2) ** (fit.theta / 2.0)
    w_sq = g.dxi * np.sum((bracket_xi * np.abs(delta)) ** 2, axis=1)
    d_0theta = float(np.sqrt(np.dot(p1.weights, w_sq)))
    # <grad_xi>^theta acts as <x>^theta after transforming back to x
    dz = g.inverse(delta)
    bracket_x = (1.0 + g.x**2) ** (fit.theta / 2.0)
    s_sq = g.dx * np.sum((bracket_x * np.abs(dz)) ** 2, axis=1)
    d_theta0 = float(np.sqrt(np.dot(p1.weights, s_sq)))
    return CauchyDistances(d_inf=d_inf, d_theta0=d_theta0, d_0theta=d_0theta)


# -- phase drift ---------------------------------------------------------------


@dataclass
class PhaseDrift:
    slope: float        # d(phase)/d(log t) at the probe frequency
    stderr: float
    xi_probe: float
    orbital: int


def phase_drift(profiles: list[ProfileSnapshot], xi_probe: float) -> PhaseDrift:
    """Unwrapped phase of the dominant orbital's profile at one frequency,
    fitted against log t.  A slope resolvably away from zero is the
    signature of a logarithmic phase correction (long-range scattering)."""
    if len(profiles) < 5:
        raise DiagnosticsError("phase drift needs >= 5 snapshots")
    g = profiles[0].grid
    n0 = int(np.argmax(profiles[0].weights))
    k = int(np.argmin(np.abs(g.xi - xi_probe)))
    values = np.array([p.profiles[n0, k] for p in profiles])
    scale = max(float(np.max(np.abs(p.profiles[n0]))) for p in profiles)
    if scale == 0.0 or np.min(np.abs(values)) < 1e-3 * scale:
        raise ProbeError(
            f"probe amplitude at xi={g.xi[k]:g} below 1e-3 of profile scale")
    phases = np.unwrap(np.angle(values))
    ts = np.array([p.t for p in profiles])
    slope, stderr = _log_linear_fit(np.log(ts), phases)
    return PhaseDrift(slope=slope, stderr=stderr, xi_probe=float(g.xi[k]),
                      orbital=n0)


# -- remainder (profile time-derivative) ---------------------------------------


@dataclass
class RemainderEstimate:
    s: float
    xi: np.ndarray
    per_orbital: np.ndarray  # (K, n_xi) complex
    l2_omega: np.ndarray     # (n_xi,) nonnegative

    def sup(self) -> float:
        return float(np.max(self.l2_omega))


def remainder_fd(p_minus: ProfileSnapshot, p_plus: ProfileSnapshot) -> RemainderEstimate:
    """Central finite difference of the spectral profile between two snapshots."""
    p_minus.grid.require_same(p_plus.grid)
    s = 0.5 * (p_minus.t + p_plus.t)
    h = 0.5 * (p_plus.t - p_minus.t)
    if not 0 < h <= 0.1 * s:
        raise DiagnosticsError(f"finite-difference half-step {h} exceeds 0.1*s={0.1*s}")
    per = (p_plus.profiles - p_minus.profiles) / (2.0 * h)
    return RemainderEstimate(
        s=s, xi=p_minus.grid.xi.copy(), per_orbital=per,
        l2_omega=_omega_amplitude(p_minus.weights, per))


def remainder_quadrature(prof: ProfileSnapshot, w,
                         coarse_n: int = 64) -> RemainderEstimate:
    """Profile time-derivative from the oscillatory-integral reduction.

    Evaluates, per output frequency, the double integral of the kernel
    (1/2s)(exp(-i x y / 2s) - 1) against the position-space reduction of
    the trilinear frequency-shift integrand (a triple sum over a coarse
    sub-lattice, with the expectation collapsed to the orbital sum and
    the potential applied as an exact spectral convolution along one
    axis).  Independent of the finite-difference route; their agreement
    validates the whole convolution/phase bookkeeping chain.
    """
    if coarse_n > 64:
        raise DiagnosticsError(f"coarse_n limited to 64 (cost guard), got {coarse_n}")
    g = prof.grid
    if g.n % coarse_n != 0:
        raise DiagnosticsError(f"coarse_n={coarse_n} must divide n={g.n}")
    stride = g.n // coarse_n
    cg = Grid(coarse_n, g.length)
    s = prof.t
    z_fine = g.inverse(prof.profiles)
    z = z_fine[:, ::stride]  # (K, nc), coarse nodes align with fine ones
    alpha = prof.weights
    K, nc = z.shape
    xc = cg.x
    # pair-covariance C(a, b) = sum_n alpha_n z_n(a) conj(z_n(b))
    cmat = np.einsum("n,np,nq->pq", alpha, z, z.conj())
    # lattice index of the value x_p - x_q (nodes start at -L/2, so the
    # index of value 0 is nc/2)
    shift = (np.arange(nc)[:, None] - np.arange(nc)[None, :] + nc // 2) % nc
    cshift = cmat[shift.T, np.arange(nc)[None, :]]  # [y, p] = C(x_p - x_y, x_p)
    kern = (np.exp(-1j * np.outer(xc, xc) / (2.0 * s)) - 1.0) / (2.0 * s)
    mult = np.sqrt(2.0 * np.pi) * w.fourier_at(cg.xi)
    per = np.zeros((K, nc), dtype=complex)
    const = -1j * (2.0 * np.pi) ** (-1.5) * cg.dx**3
    for k_out, xi_out in enumerate(cg.xi):
        probe = np.exp(-1j * xi_out * xc)
        A = probe[None, :] * cshift  # [y, p]
        outer = np.exp(1j * xi_out * (xc[:, None] + xc[None, :]))
        for m in range(K):
            B = z[m][shift]             # [p, x] = z_m(x_p - x)
            P = (A @ B).T               # [x, y]
            bracket = P - P.T
            field = outer * bracket
            # convolve along the x axis (exact, analytic transform of w)
            conv = cg.inverse(mult[None, :] * cg.forward(field.T)).T
            per[m, k_out] = const * np.sum(kern * conv)
    return RemainderEstimate(s=s, xi=cg.xi.copy(), per_orbital=per,
                             l2_omega=_omega_amplitude(alpha, per))


# -- trilinear kernel identities -----------------------------------------------


@dataclass
class ResonanceKernelReport:
    zero_shift_max: float          # |kernel| at zero frequency shifts
    bracket_antisymmetry_max: float
    full_antisymmetry_max: float   # includes the potential factor
    cubic_scale: float


def resonance_kernel_checks(prof: ProfileSnapshot, w, n_samples: int = 8,
                            seed: int = 0) -> ResonanceKernelReport:
    """Exact identities of the trilinear frequency-shift integrand.

    At zero shifts the two cubic terms coincide, so the integrand
    vanishes identically; swapping the two shift variables flips the
    sign of the bracketed difference.  Both are evaluated on lattice
    shifts where the discrete profile is known exactly.
    """
    g = prof.grid
    zhat = prof.profiles
    alpha = prof.weights

    def kernel(j_eta: int, j_sigma: int, with_potential: bool) -> np.ndarray:
        z_es = np.roll(zhat, j_eta + j_sigma, axis=-1)  # args xi - sigma - eta
        z_s = np.roll(zhat, j_sigma, axis=-1)
        z_e = np.roll(zhat, j_eta, axis=-1)
        cov_s = np.tensordot(alpha, z_es.conj() * z_s, axes=(0, 0))
        cov_e = np.tensordot(alpha, z_es.conj() * z_e, axes=(0, 0))
        bracket = cov_s[None, :] * z_e - cov_e[None, :] * z_s
        if with_potential:
            return w.fourier_at(j_eta * g.dxi) * bracket
        return bracket

    def omega_max(arr: np.ndarray) -> float:
        return float(np.max(_omega_amplitude(alpha, arr)))

    zero_shift = omega_max(kernel(0, 0, with_potential=True))
    rng = np.random.default_rng(seed)
    bracket_resid = 0.0
    full_resid = 0.0
    for _ in range(n_samples):
        j_eta, j_sigma = rng.integers(-g.n // 8, g.n // 8, size=2)
        bracket_resid = max(bracket_resid, omega_max(
            kernel(j_eta, j_sigma, False) + kernel(j_sigma, j_eta, False)))
        full_resid = max(full_resid, omega_max(
            kernel(j_eta, j_sigma, True) + kernel(j_sigma, j_eta, True)))
    scale = float(np.max(_omega_amplitude(alpha, zhat)))
    cubic = float(np.max(np.abs(w.fourier_at(g.xi)))) * scale**3
    return ResonanceKernelReport(
        zero_shift_max=zero_shift, bracket_antisymmetry_max=bracket_resid,
        full_antisymmetry_max=full_resid, cubic_scale=cubic)


# -- operator-level scattering --------------------------------------------------


@dataclass
class OperatorScattering:
    limit_weights: np.ndarray
    limit_fields: np.ndarray            # asymptotic orbitals in the profile frame
    distances: list                     # (t, trace-norm distance) pairs


def operator_scattering(traj: Trajectory,
                        tail_fraction: float = 0.0) -> OperatorScattering:
    """Trace-norm distance between gamma(t) and the free flow of the
    asymptotic operator estimated from the trailing profile(s)."""
    if len(traj) < 4:
        raise DiagnosticsError("operator scattering needs >= 4 snapshots")
    g = traj.grid
    profs = trajectory_profiles(traj)
    n_tail = max(1, int(round(tail_fraction * len(profs))))
    tail = np.mean([p.profiles for p in profs[-n_tail:]], axis=0)
    limit_fields = g.inverse(tail)
    weights = traj.snapshots[0].weights
    distances = []
    for snap in traj.snapshots:
        evolved = g.free_propagate(limit_fields, snap.t)
        target = OrbitalEnsemble(g, weights.copy(), evolved, t=snap.t)
        distances.append((snap.t, schatten1_distance(snap, target)))
    return OperatorScattering(limit_weights=weights.copy(),
                              limit_fields=limit_fields, distances=distances)


# -- dispersive estimate ----------------------------------------------------------


@dataclass
class DispersiveReport:
    constant: float
    rows: list  # (t, lhs, rhs, ratio)


def dispersive_estimate_check(grid: Grid, gfield: np.ndarray, t_list,
                              beta: float = 0.125,
                              gamma_exp: float = 1.0) -> DispersiveReport:
    """Measured constant in the sup-norm decay bound for the free flow:
    lhs = sup |exp(i t Lap) g|, rhs = t^(-1/2) sup|g_hat| +
    t^(-1/2-2 beta) ||<x>^gamma g||."""
    if not gamma_exp > 0.5 + 2.0 * beta:
        raise DiagnosticsError(
            f"need gamma_exp > 1/2 + 2*beta = {0.5 + 2 * beta}, got {gamma_exp}")
    gfield = np.asarray(gfield, dtype=complex)
    ghat = grid.forward(gfield)
    sup_hat = float(np.max(np.abs(ghat)))
    weighted = float(np.sqrt(grid.dx * np.sum(
        (1.0 + grid.x**2) ** gamma_exp * np.abs(gfield) ** 2)))
    rows = []
    constant = 0.0
    for t in t_list:
        lhs = float(np.max(np.abs(grid.inverse(grid.free_phase(t) * ghat))))
        rhs = t**(-0.5) * sup_hat + t**(-0.5 - 2.0 * beta) * weighted
        ratio = 0.0 if rhs == 0.0 else lhs / rhs
        rows.append((float(t), lhs, rhs, ratio))
        constant = max(constant, ratio)
    return DispersiveReport(constant=constant, rows=rows)
