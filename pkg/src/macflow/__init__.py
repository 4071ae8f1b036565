"""Structure-preserving exponential integrators for matrix-valued Allen-Cahn flows."""
from .matfield import (MatrixField, ModelParams, PreconditionError, check_mbp, frob_norm,
                       nonlinear_f, stabilized_N, sup_frob)
from .spectral import SpectralCache, apply_phi_operator, build_cache, laplacian_symbol, phi, phi_all
from .polymax import poly_sup_norm
from .etdrk import RescaledETDRK, build_ladder, rescale_alpha, step, tau_max
from .energy import EnergyReport, discrete_energy, dissipation_check
from .scenarios import ScenarioSpec, ic_petal, ic_random_vector, ic_voronoi
from .diagnostics import contour_length, order_parameter, u31_sup, zero_contour
from .harness import RunConfig, convergence_study, run_simulation, tau_max_report
from .io import read_field, write_field

__version__ = "0.1.0"
