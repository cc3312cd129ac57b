"""tauberlab: a numerical laboratory for one-sided Tauberian averaging.

Sieve-exact summatory functions, boundary values of the associated Laplace
transform, a compactly band-limited averaging kernel family, time/frequency
cross-validated shift averages, and prime-number-theorem convergence tables.
"""

from .arithmetic import (EULER_GAMMA, SieveBlock, SieveEngine, SummatoryLedger,
                         TauberInput, s_of, sieve_block, summatory)
from .kernel import (KernelParams, PiecewisePoly, first_moment_phi1, make_kernel,
                     phi, phi0, phi0_hat, phi1, phi1_hat, phi_hat)
from .pnt import ConvergenceRow, abel_identity_check, pnt_table
from .tauber import (AverageRow, ExperimentConfig, StepS, average_freq, average_time,
                     decay_report, exp_decay, synthetic_exp_table, tauberian_bounds)
from .zeta import (BoundaryTable, LaurentData, ZetaConfig, boundary_g,
                   build_boundary_table, euler_product, g_zero_fill, laplace_psi1,
                   laplace_s, log_deriv, zero_free_scan, zeta_eval, zeta_prime_eval)

__version__ = "0.1.0"
