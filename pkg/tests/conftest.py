import numpy as np
import pytest

from hfscatter import Grid, OrbitalEnsemble
from hfscatter.potential import BoxMass, DiracMass, GaussianMass, SumOfDiracs


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

ALL_POTENTIALS = [
    DiracMass(1.3),
    GaussianMass(1.0, 1.0),
    BoxMass(0.8, 2.0),
    SumOfDiracs(atoms=((0.5, 0.7), (0.5, -0.7))),
]


@pytest.fixture
def grid64():
    return Grid(64, 16.0)


@pytest.fixture
def grid256():
    return Grid(256, 32.0)


def smooth_ensemble(grid, K, seed=3, amplitude=0.5, t=1.0):
    """Random band-limited wave packets; Nyquist-free by construction."""
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
    return OrbitalEnsemble(grid, weights, np.array(fields), t=t)


def plane_wave_ensemble(grid, coeffs, weights, xi0=1.2, t=1.0):
    """Orbitals all proportional to one shared grid mode."""
    mode = np.exp(1j * grid.nearest_mode(xi0) * grid.x)
    orbs = np.array([c * mode for c in coeffs])
    return OrbitalEnsemble(grid, np.asarray(weights, float), orbs, t=t)
