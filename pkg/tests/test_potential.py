import numpy as np
import pytest

from hfscatter.potential import (BoxMass, DiracMass, GaussianMass,
                                 PotentialError, SumOfDiracs,
                                 potential_from_spec)

from conftest import ALL_POTENTIALS

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def test_dirac_transform_is_constant():
    w = DiracMass(1.0)
    eta = np.linspace(-50, 50, 101)
    assert np.allclose(w.fourier_at(eta), INV_SQRT_2PI)


def test_gaussian_transform_at_zero():
    assert abs(GaussianMass(1.0, 1.0).fourier_at(0.0) - INV_SQRT_2PI) <= 1e-15


def test_box_sinc_zero():
    # half-width 2 at eta = pi: sin(2*pi)/(2*pi) = 0
    assert abs(BoxMass(1.0, 2.0).fourier_at(np.pi)) <= 1e-15


def test_box_center_limit():
    assert abs(BoxMass(1.0, 2.0).fourier_at(0.0) - INV_SQRT_2PI) <= 1e-15


def test_dirac_pair_transform():
    w = SumOfDiracs(atoms=((0.5, 0.7), (0.5, -0.7)))
    eta = 1.3
    assert abs(w.fourier_at(eta) - INV_SQRT_2PI * np.cos(0.7 * eta)) <= 1e-15


@pytest.mark.parametrize("w,expected", [
    (DiracMass(-2.0), 2.0),
    (SumOfDiracs(atoms=((1.0, 1.0), (1.0, -1.0))), 2.0),
    (GaussianMass(0.5, 1.0), 0.5),
    (BoxMass(-0.8, 2.0), 0.8),
])
def test_m1_norm(w, expected):
    assert w.m1_norm() == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("w", ALL_POTENTIALS)
def test_even_real_and_bounded(w):
    eta = np.linspace(-60.0, 60.0, 1001)
    vals = w.fourier_at(eta)
    assert np.max(np.abs(np.imag(vals))) == 0.0
    assert np.max(np.abs(vals - vals[::-1])) <= 1e-13
    assert np.max(np.abs(vals)) <= INV_SQRT_2PI * w.m1_norm() + 1e-13


@pytest.mark.parametrize("w", ALL_POTENTIALS)
def test_total_mass_matches_zero_frequency(w):
    assert abs(w.total_mass() - np.sqrt(2 * np.pi) * w.fourier_at(0.0)) <= 1e-12


def test_density_normalization():
    x = np.linspace(-30, 30, 600_001)
    assert abs(np.trapezoid(GaussianMass(0.7, 1.3).density(x), x) - 0.7) <= 1e-6
    # box edges are jumps; trapezoid converges only first order there
    assert abs(np.trapezoid(BoxMass(0.7, 2.0).density(x), x) - 0.7) <= 1e-4


def test_dirac_has_no_density():
    with pytest.raises(PotentialError):
        DiracMass(1.0).density(np.zeros(3))


def test_unpaired_atoms_rejected():
    with pytest.raises(PotentialError):
        SumOfDiracs(atoms=((1.0, 0.5),))


def test_invalid_parameters():
    with pytest.raises(PotentialError):
        GaussianMass(1.0, 0.0)
    with pytest.raises(PotentialError):
        BoxMass(1.0, -1.0)


def test_from_spec():
    w = potential_from_spec({"kind": "gaussian", "mass": 1.0, "sigma": 2.0})
    assert isinstance(w, GaussianMass) and w.sigma == 2.0
    w = potential_from_spec({"kind": "dirac_pair", "mass": 1.0, "shift": 0.5})
    assert isinstance(w, SumOfDiracs)
    assert abs(w.total_mass() - 1.0) <= 1e-15
    with pytest.raises(PotentialError):
        potential_from_spec({"kind": "coulomb", "mass": 1.0})
    with pytest.raises(PotentialError):
        potential_from_spec({"kind": "gaussian", "mass": 1.0})
