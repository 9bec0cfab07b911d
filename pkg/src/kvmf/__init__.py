"""Spectral solver suite for a mean-field kinetic alignment model on the
circle with angular tilt F and confining field h.

Subpackages: model (parameters, Fourier densities, interaction), stationary
(self-consistency fixed points), linstab (analytic h = 0 stability), kato
(perturbation theory in h), galerkin (Fourier-Galerkin linearization and
numerical thresholds), pde (pseudospectral time evolution), cli (driver).
"""

from .errors import (BlowUpError, BracketError, ConvergenceError,
                     DivisionGuardError, KvmfError, SingularParameterError)
from .galerkin import (EigenBranch, GalerkinOperator, assemble_Mh,
                       assemble_Mh_spatial, critical_coupling_numeric,
                       eigen_branch, tracked_eigenvalue)
from .kato import (PerturbationCoeffs, PerturbativeMode, alpha_of,
                   gamma_c_perturbative, lambda2, perturbation_coeffs,
                   perturbative_state, rho1, threshold_shift_coefficient)
from .linstab import (ModeGrowth, ThresholdMethod, ThresholdResult, bessel_j1,
                      critical_coupling_h0, dispersion_rows, dominance_gap,
                      growth_rate, kernel_factor, variant_prefactor)
from .model import (AngularDensity, FourierMoments, ModelParams,
                    NormalizationVariant, PotentialSpec, TrigPolynomial,
                    angular_potential, drift_coefficients, interaction_field,
                    kernel_mass, linearization_kappa, moments, params_from_config,
                    params_to_config, parse_variant)
from .pde import (EvolveConfig, Trajectory, evolve_angular, evolve_spatial,
                  initial_angular_sin, initial_spatial_cos_sin, order_parameter)
from .stationary import (SelfConsistencyConfig, SpatialAngularDensity,
                         export_density_csv, periodic_integral,
                         selfconsistency_map, solve_stationary_homogeneous,
                         solve_stationary_spatial, stationarity_residual,
                         tophat_kernel_hat)

__version__ = "0.1.0"
