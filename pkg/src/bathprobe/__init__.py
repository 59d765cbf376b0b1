"""Dephasing qubit probes of a bosonic environment.

Exact pure-dephasing dynamics of one- and two-qubit probes, quantum and
classical Fisher information for estimating the environment's cutoff
frequency, coupling strength, and temperature, and a discrete-mode oracle
that validates the closed forms by brute force.
"""

from .correlations import (CorrelationFactors, corr_factors_single_qubit,
                           corr_factors_two_qubit, d_corr_dx)
from .dynamics import (CORRELATED, FACTORIZED, SINGLE_QUBIT_PROBE,
                       TWO_QUBIT_TRACED, ProbeConfig, QubitState,
                       TwoQubitState, coherence_factor, dephasing_factors,
                       eigendecompose, partial_trace_second_qubit,
                       reduced_qubit_state, two_qubit_state)
from .fisher import (Estimand, FisherCurve, FisherOptimum, cfi, cfi_born,
                     optimal_angle, optimize_qfi_over_time, qfi_closed,
                     qfi_curve, qfi_spectral, state_derivative)
from .oracle import (DiscreteBath, DiscreteFactors, compare_report,
                     discrete_factors, evolve_correlated, evolve_factorized,
                     magnus_unitary, prepare_correlated)
from .quadrature import QuadratureError, QuadratureResult
from .spectral import (BathState, DephasingFactors, GammaPoleError,
                       SpectralDensity, c_shift, d_delta_dx, d_gamma_dx,
                       d_phi_dx, delta_factor, gamma_th, gamma_un, gamma_vac,
                       phi_factor, quadrature_factor, real_gamma,
                       spectral_density)

__version__ = "0.1.0"

__all__ = [
    "SpectralDensity", "BathState", "DephasingFactors", "GammaPoleError",
    "real_gamma", "spectral_density", "gamma_vac", "gamma_th", "gamma_un",
    "delta_factor", "phi_factor", "c_shift", "d_gamma_dx", "d_delta_dx",
    "d_phi_dx", "quadrature_factor", "QuadratureError", "QuadratureResult",
    "CorrelationFactors", "corr_factors_two_qubit",
    "corr_factors_single_qubit", "d_corr_dx",
    "ProbeConfig", "QubitState", "TwoQubitState", "TWO_QUBIT_TRACED",
    "SINGLE_QUBIT_PROBE", "FACTORIZED", "CORRELATED", "dephasing_factors",
    "two_qubit_state", "reduced_qubit_state", "partial_trace_second_qubit",
    "coherence_factor", "eigendecompose",
    "Estimand", "FisherCurve", "FisherOptimum", "qfi_closed", "qfi_spectral",
    "state_derivative", "cfi", "cfi_born", "optimal_angle", "qfi_curve",
    "optimize_qfi_over_time",
    "DiscreteBath", "DiscreteFactors", "discrete_factors", "magnus_unitary",
    "evolve_factorized", "prepare_correlated", "evolve_correlated",
    "compare_report",
]
