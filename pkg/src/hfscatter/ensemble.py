"""Weighted orbital families: random field and density operator in one.

An ensemble (alpha_n, u_n) simultaneously represents the rank-K operator
gamma = sum_n alpha_n |u_n><u_n| and the Gaussian random field
X = sum_n sqrt(alpha_n) g_n u_n.  Expectations over the probability space
collapse exactly to weighted sums over orbitals, so every diagnostic here
is deterministic; Monte-Carlo sampling exists only as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .grid import Grid

__all__ = [
    "OrbitalEnsemble", "GaussianSample", "EnsembleError",
    "density", "covariance_apply", "weighted_traces",
    "schatten1_distance", "sample_field",
]


class EnsembleError(ValueError):
    """Invalid ensemble construction or incompatible operands."""


@dataclass
class OrbitalEnsemble:
    """Nonnegative weights plus complex orbital fields on a shared grid.

    Attributes:
        grid: The periodic grid all orbitals live on.
        weights: Shape (K,) nonnegative reals.
        orbitals: Shape (K, n) complex values; NOT kept normalized.
        t: Time stamp of the snapshot.
    """

    grid: Grid
    weights: np.ndarray
    orbitals: np.ndarray
    t: float = 1.0

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        self.orbitals = np.atleast_2d(np.asarray(self.orbitals, dtype=complex))
        if self.weights.ndim != 1 or self.weights.size < 1:
            raise EnsembleError("weights must be a nonempty 1D array")
        if np.any(self.weights < 0):
            raise EnsembleError("weights must be nonnegative")
        if self.orbitals.shape != (self.weights.size, self.grid.n):
            raise EnsembleError(
                f"orbitals shape {self.orbitals.shape} does not match "
                f"(K={self.weights.size}, n={self.grid.n})")

    @property
    def rank(self) -> int:
        return self.weights.size

    def trace_mass(self) -> float:
        """sum_n alpha_n ||u_n||^2, the conserved L2 mass of the field."""
        norms_sq = self.grid.dx * np.sum(np.abs(self.orbitals) ** 2, axis=1)
        return float(np.dot(self.weights, norms_sq))

    def gram(self) -> np.ndarray:
        """Hermitian K x K matrix of orbital inner products."""
        U = self.orbitals
        return self.grid.dx * (U.conj() @ U.T)

    def copy(self) -> "OrbitalEnsemble":
        return OrbitalEnsemble(self.grid, self.weights.copy(),
                               self.orbitals.copy(), self.t)


@dataclass
class GaussianSample:
    """One seeded realization of the random field over the ensemble."""

    seed: int
    coefficients: np.ndarray = field(repr=False)
    realization: np.ndarray = field(repr=False)


def density(ens: OrbitalEnsemble) -> np.ndarray:
    """Particle density rho(x) = sum_n alpha_n |u_n(x)|^2 = E|X(x)|^2."""
    return np.tensordot(ens.weights, np.abs(ens.orbitals) ** 2, axes=(0, 0))


def covariance_apply(ens: OrbitalEnsemble, v: np.ndarray,
                     v_grid: Grid | None = None) -> np.ndarray:
    """Apply the covariance operator: gamma(v) = sum_n alpha_n <u_n, v> u_n."""
    if v_grid is not None:
        ens.grid.require_same(v_grid)
    v = np.asarray(v, dtype=complex)
    if v.shape != (ens.grid.n,):
        raise EnsembleError(
            f"field length {v.shape} does not match grid n={ens.grid.n}")
    coeffs = ens.grid.dx * (ens.orbitals.conj() @ v)
    return (ens.weights * coeffs) @ ens.orbitals


def weighted_traces(ens: OrbitalEnsemble) -> tuple[float, float]:
    """Traces of <grad> gamma and <x> gamma via the multipliers
    sqrt(1+xi^2) in frequency and sqrt(1+x^2) in position."""
    g = ens.grid
    U_hat = g.forward(ens.orbitals)
    bracket_xi = np.sqrt(1.0 + g.xi**2)
    bracket_x = np.sqrt(1.0 + g.x**2)
    tr_grad = float(np.dot(
        ens.weights, g.dxi * np.sum(bracket_xi * np.abs(U_hat) ** 2, axis=1)))
    tr_x = float(np.dot(
        ens.weights, g.dx * np.sum(bracket_x * np.abs(ens.orbitals) ** 2, axis=1)))
    return tr_grad, tr_x


def schatten1_distance(a: OrbitalEnsemble, b: OrbitalEnsemble) -> float:
    """Trace-norm distance between the two rank-K operators, exactly.

    The difference acts on the span of the combined orbital family, so
    its spectrum is that of the small Hermitian matrix
    G^(1/2) C G^(1/2), with G the combined Gram matrix and
    C = diag(alpha_a, -alpha_b).
    """
    a.grid.require_same(b.grid)
    W = np.vstack([a.orbitals, b.orbitals])
    coeff = np.concatenate([a.weights, -b.weights])
    G = a.grid.dx * (W.conj() @ W.T)
    gvals, gvecs = np.linalg.eigh(G)
    # null directions of the combined family carry no trace-norm weight;
    # clipping them keeps sqrt(G) from amplifying eigenvalue roundoff
    gvals[gvals < 1e-13 * max(float(gvals[-1]), 0.0)] = 0.0
    sqrtG = (gvecs * np.sqrt(gvals)) @ gvecs.conj().T
    H = sqrtG @ np.diag(coeff) @ sqrtG
    eigs = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
    return float(np.sum(np.abs(eigs)))


def sample_field(ens: OrbitalEnsemble, seed: int) -> GaussianSample:
    """Draw one realization sum_n sqrt(alpha_n) g_n u_n, deterministic in seed.

    g_n = (a + i b)/sqrt(2) with a, b independent standard normals, so
    E[g] = 0 and E[|g|^2] = 1.
    """
    rng = np.random.default_rng(seed)
    re = rng.standard_normal(ens.rank)
    im = rng.standard_normal(ens.rank)
    g = (re + 1j * im) / np.sqrt(2.0)
    realization = (np.sqrt(ens.weights) * g) @ ens.orbitals
    return GaussianSample(seed=seed, coefficients=g, realization=realization)
