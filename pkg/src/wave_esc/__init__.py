"""Extremum seeking control with distributed wave-PDE actuation.

A numpy/scipy toolkit that simulates the closed loop (quadratic performance
map fed by the spatial integral of a boundary-actuated wave field) and
machine-checks the designs that make it work: the motion-planned dither, the
compensation kernels, the stability functionals of the averaged error
system, and the ultimate convergence bounds.
"""

from .backstepping import (BacksteppingGains, LyapunovConfig, TargetResiduals,
                           g_kernel, g_kernel_prime, gamma_kernel,
                           gamma_kernel_prime, inverse_transform_u,
                           lyapunov_functional, omega_norm,
                           probe_delta_positive_definite, target_residuals,
                           transform_w, transform_w_time_derivative, transform_z)
from .config import DEFAULTS, dump_config, parse_config
from .controller import (ControllerState, Measurements, average_control,
                         boundary_input, filter_step, filtered_control_step,
                         ideal_control)
from .errors import (BlowupError, ConfigError, ControllerBlowupError,
                     KernelSingularityError, ValidationError)
from .probing import (FrequencyVerdict, ProbeDesign, beta, beta_t, beta_x,
                      check_frequency, demod_gradient_signal,
                      demod_hessian_signal, grad_estimate, hess_estimate,
                      perturbation, series_beta, trailing_period_mean)
from .simulation import (AverageTrace, BoundsReport, ErrorFields, SimConfig,
                         SimTrace, averaging_oracle, compatible_average_init,
                         compute_error_fields, config_digest, fit_exponential,
                         run_average_system, run_closed_loop,
                         tracking_initial_field, ultimate_bounds_report)
from .static_map import MapParams, eval_map
from .verification import CheckResult, run_verification
from .wave_field import (Grid, WaveField, boundary_slope, distributed_output,
                         field_energy, init_field, second_difference,
                         spatial_integral, step)

__version__ = "0.1.0"
