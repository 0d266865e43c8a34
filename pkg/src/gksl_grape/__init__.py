"""Gate synthesis for an open qubit driven by coherent and incoherent (photon) controls.

The qubit evolves under a GKSL master equation whose Bloch form is
``dr/dt = (B + Bu u(t) + Bn n(t)) r + b``. Controls are piecewise constant,
the objective is the mean Hilbert-Schmidt distance between evolved basis
states and their images under the target gate, and the optimizer is a
gradient descent with an adaptive step size using the exact gradient.
"""
from .channel import (apply_kraus, choi_from_affine, choi_from_kraus, cptp_report,
                      kraus_completeness_residual, kraus_from_choi, sphere_distance_profile,
                      stiefel_embedding, stiefel_trajectory)
from .core import (GATE_H, GATE_X, SIGMA_X, SIGMA_Y, SIGMA_Z, SystemParams, assemble_generator,
                   bloch_from_density, bloch_generator, canonical_basis, density_from_bloch,
                   gate_targets, unitary_to_bloch_rotation)
from .gradient import (ControlGradient, QuadratureConfig, directional_exp_derivative,
                       final_state_gradient, finite_difference_gradient, gradient_error,
                       objective_and_gradient, objective_gradient, step_derivatives)
from .objective import GateProblem, bloch_hs_distance, gate_objective, hs_distance, map_distance
from .optimizer import (IterationRecord, OptimizationError, OptimizationResult, OptimizerConfig,
                        StopReason, adaptive_grape, default_initial_controls)
from .propagator import (AffineBlochMap, ControlGrid, PiecewiseControls, affine_map_history,
                         compose_affine_map, expm, matrix_exponential, propagate, propagate_dense,
                         step_offset)
from .spectrum import (SpectralDensity, TailNotConvergedError, filtered_density, peak_frequency,
                       planck_density, sample_incoherent_control, total_density)

__version__ = "0.1.0"
