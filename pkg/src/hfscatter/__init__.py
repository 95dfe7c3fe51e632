"""Pseudospectral simulator and scattering diagnostics for 1D Hartree-Fock
dynamics of low-rank orbital ensembles."""

from .grid import Grid, make_grid
from .potential import (BoxMass, DiracMass, GaussianMass, Potential,
                        SumOfDiracs, potential_from_spec)
from .ensemble import (OrbitalEnsemble, covariance_apply, density,
                       sample_field, schatten1_distance, weighted_traces)
from .nonlinearity import (RhsMode, direct_term, exchange_dense_oracle,
                           exchange_term, rhs)
from .integrator import (IntegratorConfig, Trajectory, WavePacket,
                         duhamel_residual, evolve, prepare_initial, step)

__version__ = "0.1.0"
