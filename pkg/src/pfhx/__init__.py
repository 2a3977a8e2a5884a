"""Simulation and control toolkit for a parallel-flow heat exchanger.

The plant is a pair of co-flowing streams on ``x in [0, l]``, both moving
with unit speed and exchanging heat at rates ``h1`` and ``h2``:

    dt theta1 = -dx theta1 + h1 (theta2 - theta1)
    dt theta2 = -dx theta2 + h2 (theta1 - theta2)

Inlet temperatures ``theta1(t, 0) = u1(t)`` and ``theta2(t, 0) = u2(t)``
are the controls; the exit temperatures are measured cross-wise and only
become available after a known delay ``tau``:

    y1(t) = theta2(t - tau, l),   y2(t) = theta1(t - tau, l).

The package provides an exact method-of-characteristics solver (plus an
independent upwind scheme for cross-validation), a Luenberger observer
with delayed output injection, a prediction step that compensates the
delay in closed form, boundary feedback built from the predicted state,
and analysis tools (transfer function, frequency-response measurement,
decay-rate fitting).  A CLI drives single runs, parameter sweeps, and
frequency-response experiments with deterministic CSV output.
"""

from .params import Params, GainReport, SanoReport, validate_gains, sano_window
from .coupling import CouplingExp, coupling_exp, coupling_matrix
from .grid import (
    Grid,
    CompatibilityReport,
    compatibility_check,
    l2_norm,
    make_field,
    zero_field,
)
from .history import InputHistory
from .profiles import input_function, profile_array
from .solver import (
    SolverState,
    Trajectory,
    closed_form_state,
    evaluate_output,
    output_at,
    solve_exact,
    solve_upwind,
    step_exact,
    step_upwind,
)
from .observer import (
    ObserverState,
    Prediction,
    control_law,
    observer_step,
    predict,
    predict_by_resolve,
    predict_exit,
)
from .loop import (
    RunResult,
    RunSummary,
    Scenario,
    run_closed_loop,
    run_delay_free_feedback,
    run_error_system,
    run_open_loop,
    run_sano_baseline,
    run_scenario,
)
from .analysis import (
    ConditionReport,
    DecayReport,
    TransferEval,
    condition_report,
    fit_decay,
    measure_frequency_response,
    transfer_function,
)
from .errors import ConfigError

__version__ = "0.1.0"

__all__ = [
    "CompatibilityReport",
    "ConditionReport",
    "ConfigError",
    "CouplingExp",
    "DecayReport",
    "GainReport",
    "Grid",
    "InputHistory",
    "ObserverState",
    "Params",
    "Prediction",
    "RunResult",
    "RunSummary",
    "SanoReport",
    "Scenario",
    "SolverState",
    "Trajectory",
    "TransferEval",
    "closed_form_state",
    "compatibility_check",
    "condition_report",
    "control_law",
    "coupling_exp",
    "coupling_matrix",
    "evaluate_output",
    "fit_decay",
    "input_function",
    "l2_norm",
    "make_field",
    "measure_frequency_response",
    "observer_step",
    "output_at",
    "predict",
    "predict_by_resolve",
    "predict_exit",
    "profile_array",
    "run_closed_loop",
    "run_delay_free_feedback",
    "run_error_system",
    "run_open_loop",
    "run_sano_baseline",
    "run_scenario",
    "sano_window",
    "solve_exact",
    "solve_upwind",
    "step_exact",
    "step_upwind",
    "transfer_function",
    "validate_gains",
    "zero_field",
]
