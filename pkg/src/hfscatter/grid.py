"""Periodic 1D grid with continuum-normalized spectral transforms.

The discrete transform is scaled to approximate the continuum convention

    f_hat(xi) = (2*pi)**-0.5 * integral exp(-i*x*xi) f(x) dx,

sampled on the lattice x_j = -L/2 + j*dx, xi_k = 2*pi*k/L with
k in [-n/2, n/2).  With this scaling analytic transform formulas apply
verbatim, convolution is multiplication by sqrt(2*pi)*w_hat, and
Plancherel holds exactly in the quadrature norms

    ||f||^2 = dx * sum |f|^2,    ||f_hat||^2 = dxi * sum |f_hat|^2.

Spectral arrays are stored in ascending-frequency ("centered") order
throughout the package; index 0 is the unpaired Nyquist mode.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Grid", "make_grid", "GridError"]


class GridError(ValueError):
    """Invalid grid construction or mismatched grid operands."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class Grid:
    """Uniform periodic grid on [-L/2, L/2) with matched frequency lattice.

    Attributes:
        n: Number of nodes (power of two, >= 8).
        length: Domain length L.
        dx: Node spacing L/n.
        dxi: Frequency spacing 2*pi/L.
        x: Nodes -L/2 + j*dx.
        xi: Frequencies 2*pi*k/L, k = -n/2 .. n/2-1, ascending.
    """

    def __init__(self, n_points: int, length: float):
        if not isinstance(n_points, (int, np.integer)):
            raise GridError(f"n_points must be an integer, got {n_points!r}")
        if n_points < 8 or not _is_power_of_two(int(n_points)):
            raise GridError(
                f"n_points must be a power of two >= 8, got {n_points}")
        if not (length > 0) or not np.isfinite(length):
            raise GridError(f"length must be positive and finite, got {length}")
        self.n = int(n_points)
        self.length = float(length)
        self.dx = self.length / self.n
        self.dxi = 2.0 * np.pi / self.length
        self.x = -self.length / 2.0 + self.dx * np.arange(self.n)
        k = np.arange(self.n) - self.n // 2
        self.xi = self.dxi * k
        # (-1)^k alternating sign carries the -L/2 origin shift through the DFT;
        # stored in numpy's FFT bin order.
        k_fft = np.fft.ifftshift(k)
        self._sign = np.where(k_fft % 2 == 0, 1.0, -1.0)
        self._fwd_scale = self.dx / np.sqrt(2.0 * np.pi)

    # -- transforms -------------------------------------------------------

    def forward(self, f: np.ndarray) -> np.ndarray:
        """Continuum-scaled DFT of f (last axis), centered frequency order."""
        f = np.asarray(f, dtype=complex)
        F = np.fft.fft(f, axis=-1)
        return np.fft.fftshift(self._sign * F, axes=-1) * self._fwd_scale

    def inverse(self, F: np.ndarray) -> np.ndarray:
        """Exact discrete inverse of :meth:`forward`."""
        F = np.asarray(F, dtype=complex)
        G = self._sign * np.fft.ifftshift(F, axes=-1)
        return np.fft.ifft(G, axis=-1) / self._fwd_scale

    def free_propagate(self, f: np.ndarray, t: float) -> np.ndarray:
        """Apply exp(i*t*Laplacian): multiply coefficients by exp(-i*t*xi^2)."""
        return self.inverse(self.free_phase(t) * self.forward(f))

    def free_phase(self, t: float) -> np.ndarray:
        """Spectral symbol exp(-i*t*xi^2) of the free flow, centered order."""
        return np.exp(-1j * float(t) * self.xi**2)

    def convolve(self, w, f: np.ndarray) -> np.ndarray:
        """Convolution with a finite-measure potential, exact in Fourier.

        Uses (w * f)^ = sqrt(2*pi) * w_hat * f_hat with the analytic
        transform of w sampled on the frequency lattice.
        """
        multiplier = np.sqrt(2.0 * np.pi) * w.fourier_at(self.xi)
        return self.inverse(multiplier * self.forward(f))

    def project_nyquist(self, f: np.ndarray) -> np.ndarray:
        """Zero the unpaired Nyquist mode of a position-space field."""
        F = self.forward(f)
        F[..., 0] = 0.0
        return self.inverse(F)

    # -- norms and reductions ---------------------------------------------

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.dx * np.sum(np.abs(f) ** 2)))

    def spectral_norm(self, F: np.ndarray) -> float:
        return float(np.sqrt(self.dxi * np.sum(np.abs(F) ** 2)))

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """Discrete L2 inner product dx * sum(conj(f) * g)."""
        return complex(self.dx * np.sum(np.conj(f) * g))

    def integrate(self, f: np.ndarray) -> complex:
        return complex(self.dx * np.sum(f))

    # -- misc ---------------------------------------------------------------

    def nearest_mode(self, xi0: float) -> float:
        """Snap a frequency to the nearest lattice point (exact grid mode)."""
        k = int(np.rint(xi0 / self.dxi))
        k = max(-self.n // 2, min(self.n // 2 - 1, k))
        return k * self.dxi

    def compatible(self, other: "Grid") -> bool:
        return self.n == other.n and self.length == other.length

    def require_same(self, other: "Grid") -> None:
        if not self.compatible(other):
            raise GridError(
                f"grid mismatch: ({self.n}, {self.length}) vs "
                f"({other.n}, {other.length})")

    def __repr__(self) -> str:
        return f"Grid(n_points={self.n}, length={self.length})"


def make_grid(n_points: int, length: float) -> Grid:
    """Construct a periodic grid; rejects non-power-of-two sizes and L <= 0."""
    return Grid(n_points, length)
