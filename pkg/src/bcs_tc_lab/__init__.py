"""Linear bounds on the BCS critical temperature.

Library layers, bottom to top: kernels (scalar kernel evaluation),
interactions (potentials, transforms, sphere-restricted spectra), quadrature
(panel integration, closed forms, region integrals), bs_spectra
(Birman-Schwinger matrices and their spectra), critical_temps (temperature
solvers and weak-coupling sweeps), bound_verifier (quantitative bound
checks), cli (command-line front end), plots (figure rendering).
"""

__version__ = "0.1.0"

REPORT_FORMAT = "bcs-tc-lab/1"

from .kernels import PhysParams, chi_ratio, k_t, n_t, b_t, m_bound, f_strong, f_strong_prime  # noqa: E402,F401
from .interactions import InteractionModel, v_hat, sphere_operator_spectrum  # noqa: E402,F401
from .errors import (  # noqa: E402,F401
    AccuracyError,
    BcsTcLabError,
    ConfigError,
    DomainError,
    EigenSolveError,
    FitError,
    NoBracketError,
    PreconditionError,
)
