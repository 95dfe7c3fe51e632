"""Mean-field and exchange terms of the orbital evolution.

For the rank-K family (alpha_n, u_n) the two nonlinear terms reduce to

    direct:   (w * rho) u_m,              rho = sum_n alpha_n |u_n|^2
    exchange: sum_n alpha_n u_n (w * (conj(u_n) u_m))

i.e. K^2 spectral convolutions per right-hand side instead of an N x N
kernel.  Hermitian symmetry of the pair densities halves the convolution
count.  A dense quadrature oracle is kept for verification only.
"""

from __future__ import annotations

import enum
import numpy as np

from .ensemble import OrbitalEnsemble, density
from .grid import Grid

__all__ = [
    "RhsMode", "direct_term", "exchange_term", "exchange_dense_oracle",
    "rhs", "rhs_fields", "rhs_spectral", "OracleError",
]


class OracleError(ValueError):
    """Dense-oracle precondition violated (cost guard or Dirac potential)."""


class RhsMode(str, enum.Enum):
    HARTREE_FOCK = "hartree-fock"
    REDUCED_HARTREE = "reduced-hartree"
    LINEAR = "linear"


def _direct_fields(grid: Grid, weights, orbitals, w) -> np.ndarray:
    rho = np.tensordot(weights, np.abs(orbitals) ** 2, axes=(0, 0))
    # w real and even makes w*rho exactly real; drop the roundoff imag part
    pot = np.real(grid.convolve(w, rho))
    return pot[None, :] * orbitals


def _exchange_fields(grid: Grid, weights, orbitals, w) -> np.ndarray:
    K = len(weights)
    U = orbitals
    iu, ju = np.triu_indices(K)
    pair = U[iu].conj() * U[ju]
    mult = np.sqrt(2.0 * np.pi) * w.fourier_at(grid.xi)
    conv = grid.inverse(mult * grid.forward(pair))
    V = np.empty((K, K, grid.n), dtype=complex)
    V[iu, ju] = conv
    V[ju, iu] = conv.conj()  # w*(conj(u_m) u_n) = conj(w*(conj(u_n) u_m))
    return np.einsum("n,nx,nmx->mx", weights, U, V)


def direct_term(ens: OrbitalEnsemble, w) -> np.ndarray:
    """Per-orbital Hartree term (w * rho) u_m, shape (K, n)."""
    return _direct_fields(ens.grid, ens.weights, ens.orbitals, w)


def exchange_term(ens: OrbitalEnsemble, w) -> np.ndarray:
    """Per-orbital exchange term via low-rank pair convolutions, shape (K, n)."""
    return _exchange_fields(ens.grid, ens.weights, ens.orbitals, w)


def exchange_dense_oracle(ens: OrbitalEnsemble, w, n_max: int = 512) -> np.ndarray:
    """O(N^2 K) quadrature of the exchange integral, for verification.

    Grids the potential density on the periodic difference lattice and
    sums integral w(x-y) k(x,y) u_m(y) dy directly.  Requires a density
    variant (Gaussian or box) and a small grid.
    """
    g = ens.grid
    if g.n > n_max:
        raise OracleError(f"dense oracle limited to n <= {n_max}, got {g.n}")
    if not getattr(w, "has_density", False):
        raise OracleError("dense oracle requires a potential with a density")
    offsets = np.arange(g.n) * g.dx
    offsets = (offsets + g.length / 2.0) % g.length - g.length / 2.0
    row = np.asarray(w.density(offsets), dtype=float)
    idx = (np.arange(g.n)[:, None] - np.arange(g.n)[None, :]) % g.n
    W = row[idx]  # W[i, j] = w(x_i - x_j), wrapped to the nearest period
    kmat = np.einsum("n,ni,nj->ij", ens.weights, ens.orbitals,
                     ens.orbitals.conj())
    op = g.dx * (W * kmat)
    return (op @ ens.orbitals.T).T


def rhs_fields(grid: Grid, weights, orbitals, w, mode: RhsMode,
               dealias: bool = False) -> np.ndarray:
    """Nonlinear right-hand side for raw (weights, orbitals) arrays."""
    return grid.inverse(
        rhs_spectral(grid, weights, orbitals, w, mode, dealias=dealias))


def rhs_spectral(grid: Grid, weights, orbitals, w, mode: RhsMode,
                 dealias: bool = False) -> np.ndarray:
    """Spectral coefficients of the right-hand side, Nyquist mode zeroed."""
    mode = RhsMode(mode)
    orbitals = np.atleast_2d(np.asarray(orbitals, dtype=complex))
    if mode is RhsMode.LINEAR:
        return np.zeros_like(orbitals)
    out = _direct_fields(grid, weights, orbitals, w)
    if mode is RhsMode.HARTREE_FOCK:
        out = out - _exchange_fields(grid, weights, orbitals, w)
    F = grid.forward(out)
    F[..., 0] = 0.0
    if dealias:
        F[..., np.abs(grid.xi) > (2.0 / 3.0) * np.max(np.abs(grid.xi))] = 0.0
    return F


def rhs(ens: OrbitalEnsemble, w, mode: RhsMode,
        dealias: bool = False) -> np.ndarray:
    """Per-orbital nonlinearity of the evolution equation, shape (K, n).

    HartreeFock: direct - exchange (cancels identically for rank one and
    for any family sharing a single plane wave); ReducedHartree: direct
    only; Linear: zero.
    """
    return rhs_fields(ens.grid, ens.weights, ens.orbitals, w, mode,
                      dealias=dealias)
