"""Frequency-domain stability laboratory for thermally damped laminated beams.

The package dissects a one-parameter family of linear ODE systems
``dU/dt = A(xi) U`` obtained by Fourier transforming a laminated beam
model with a single thermal unknown.  It provides the generator and its
energy structure (:mod:`thermolam.model`), spectral diagnostics
(:mod:`thermolam.spectral`), exact and oracle time evolution
(:mod:`thermolam.evolution`), quadratic Lyapunov certificates
(:mod:`thermolam.lyapunov`), physical-space decay rates and the
auxiliary integral bounds behind them (:mod:`thermolam.decay`), and a
deterministic command line front end (:mod:`thermolam.cli`).
"""

from .errors import (
    NumericalError,
    ParameterError,
    RegimeError,
    ThermolamError,
    UsageError,
    VerificationError,
)
from .model import (
    CaseTag,
    GeneratorMatrix,
    ModelParams,
    assemble_generator,
    classify,
    decay_function,
    dissipation_diagonal,
    energy_weights,
)
from .spectral import (
    SpectrumSample,
    abscissa_scan,
    characteristic_residual,
    highfreq_abscissa_slope,
    imaginary_eigen_check,
    nonstability_scan,
    spectrum,
)
from .evolution import (
    Propagator,
    dissipation_residual,
    energy,
    energy_rate,
    pointwise_bound_check,
    propagate,
    rk_oracle,
)

__version__ = "0.1.0"
