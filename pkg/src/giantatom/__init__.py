"""Two giant atoms on a 1D waveguide: delayed collective decay and entanglement.

Each atom couples to the line at two points, so emission interferes with
retarded copies of itself.  This package derives the delay kernel for the
three possible coupling-point orders, integrates the resulting two-level
delay system, and checks it against closed forms and a brute-force
discretized field.
"""

__version__ = "0.1.0"

from .analytic import (
    NoClosedFormError,
    NoSteadyValueError,
    SteadyStateResult,
    TransferMatrix,
    braided_halfpi_detuned_concurrence,
    markovian_closed_form,
    markovian_matrix_solution,
    nested_halfpi_envelopes,
    steady_state_closed,
    steady_state_numeric,
)
from .dde import InitialState, Trajectory, concurrence_series, integrate
from .model import (
    CONFIGS,
    CouplingLayout,
    DelayKernel,
    SystemParams,
    derive_kernel,
    dicke_coefficients,
    layout_for,
    theta0_class,
)
from .observables import (
    concurrence,
    dicke_inverse,
    dicke_transform,
    reduced_density,
    wootters_concurrence,
)
from .oracle import ModeAmplitudes, ModeGrid, calibrate, oracle_integrate

__all__ = [
    "CONFIGS",
    "CouplingLayout",
    "DelayKernel",
    "InitialState",
    "ModeAmplitudes",
    "ModeGrid",
    "NoClosedFormError",
    "NoSteadyValueError",
    "SteadyStateResult",
    "SystemParams",
    "Trajectory",
    "TransferMatrix",
    "braided_halfpi_detuned_concurrence",
    "calibrate",
    "concurrence",
    "concurrence_series",
    "derive_kernel",
    "dicke_coefficients",
    "dicke_inverse",
    "dicke_transform",
    "integrate",
    "layout_for",
    "markovian_closed_form",
    "markovian_matrix_solution",
    "nested_halfpi_envelopes",
    "oracle_integrate",
    "reduced_density",
    "steady_state_closed",
    "steady_state_numeric",
    "theta0_class",
    "wootters_concurrence",
    "__version__",
]
