"""Transfer function, frequency-response measurement, and decay fitting.

With zero delay the map from the inlet inputs to the (cross-measured)
exit outputs is a pure transport delay combined with the heat-exchange
mixing; its transfer matrix is

    G(s) = 1/(h1+h2) * [[h2 e^{-sl} - h2 e^{-(h1+h2+s)l},  h2 e^{-(h1+h2+s)l} + h1 e^{-sl}],
                        [h2 e^{-sl} + h1 e^{-(h1+h2+s)l}, -h1 e^{-(h1+h2+s)l} + h1 e^{-sl}]]

which is exp(A1 l) with swapped rows times e^{-sl}.  Rows of G(0) sum to
one (a constant inlet passes through unchanged in steady state) and every
entry rolls off like e^{-Re(s) l} for large positive real part.

``measure_frequency_response`` estimates G(i omega) empirically by driving
one inlet with a sinusoid and fitting the exit oscillations after the
transient has flushed.  It deliberately runs the dissipative upwind scheme
at CFL < 1: the characteristic solver reproduces G to rounding and would
make the measurement a tautology, while the upwind route has an honest
O(dx) discretization error that must shrink under grid refinement.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .params import GainReport, Params, SanoReport, sano_window, validate_gains
from .solver import solve_upwind


@dataclass(frozen=True)
class TransferEval:
    """G evaluated at one complex frequency."""

    s: complex
    matrix: np.ndarray


def transfer_function(s: complex, params: Params) -> TransferEval:
    """Evaluate the delay-free transfer matrix G(s)."""
    h1, h2, l = params.h1, params.h2, params.l
    rate = h1 + h2
    if rate == 0.0:
        a = cmath.exp(-s * l)
        return TransferEval(s=s, matrix=np.array([[0.0, a], [a, 0.0]], dtype=complex))
    a = cmath.exp(-s * l)
    b = cmath.exp(-(rate + s) * l)
    matrix = (
        np.array(
            [
                [h2 * a - h2 * b, h2 * b + h1 * a],
                [h2 * a + h1 * b, -h1 * b + h1 * a],
            ],
            dtype=complex,
        )
        / rate
    )
    return TransferEval(s=s, matrix=matrix)


def measure_frequency_response(
    omega: float,
    params: Params,
    grid: Grid,
    cycles: int = 10,
    cfl: float = 0.5,
    transient_factor: float = 3.0,
) -> np.ndarray:
    """Measure the 2x2 gain at frequency omega by simulation.

    Drives one inlet channel with sin(omega t) (the other zero), discards
    t < transient_factor * l, and extracts amplitude and phase of both exit
    values by a least-squares sinusoid fit; repeating for the other channel
    fills the matrix.  omega = 0 is handled by a constant-input steady
    state instead.  Needs cycles >= 10 for a well-conditioned fit.
    """
    if omega < 0:
        raise ValueError(f"omega must be nonnegative, got {omega}")
    if cycles < 10:
        raise ValueError(f"need at least 10 cycles after the transient, got {cycles}")
    transient = transient_factor * params.l
    dt = cfl * grid.dx
    gain = np.zeros((2, 2), dtype=complex)
    theta0 = np.zeros((grid.n_cells + 1, 2))

    if omega == 0.0:
        T = (transient_factor + 5.0) * params.l
        T = math.ceil(T / dt) * dt
        for chan in (0, 1):
            drive = np.zeros(2)
            drive[chan] = 1.0
            traj = solve_upwind(
                theta0, lambda t: drive, T, params, grid, cfl=cfl, snapshot_stride=T
            )
            exits = traj.exit_values[-1]
            gain[0, chan] = exits[1]  # output 1 observes stream 2
            gain[1, chan] = exits[0]
        return gain

    T = transient + cycles * 2 * math.pi / omega
    T = math.ceil(T / dt) * dt
    for chan in (0, 1):
        def drive(t, _chan=chan):
            u = np.zeros(2)
            u[_chan] = math.sin(omega * t)
            return u

        traj = solve_upwind(
            theta0, drive, T, params, grid, cfl=cfl, snapshot_stride=T
        )
        sel = traj.t >= transient - 1e-9
        ts = traj.t[sel]
        design = np.column_stack([np.sin(omega * ts), np.cos(omega * ts)])
        for row, col in ((0, 1), (1, 0)):  # output row observes the opposite stream
            coef, *_ = np.linalg.lstsq(design, traj.exit_values[sel, col], rcond=None)
            gain[row, chan] = coef[0] + 1j * coef[1]
    return gain


@dataclass(frozen=True)
class DecayReport:
    """Log-linear decay fit of a norm series.

    ``gamma_hat`` is minus the fitted slope of log(norm) against time.  A
    series that sits at or below the numerical floor on the whole window is
    reported as extinct with gamma_hat = +inf (decay faster than any
    exponential, e.g. finite-time flush); r_squared is NaN in that case.
    """

    gamma_hat: float
    r_squared: float
    window: tuple[float, float]
    floor_hit: bool
    extinct: bool
    n_used: int


def fit_decay(
    t,
    norms,
    window: tuple[float, float] | None = None,
    floor_rel: float = 1e-13,
) -> DecayReport:
    """Least-squares line on (t, log norm) over a window.

    Samples below ``floor_rel`` times the series' initial value (where
    rounding and finite-time flush effects dominate) are excluded and
    flagged via ``floor_hit``.  Requires at least 10 usable samples unless
    the whole window is below the floor, which yields the extinct report.
    """
    t = np.asarray(t, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if t.shape != norms.shape or t.ndim != 1:
        raise ValueError("t and norms must be 1-D arrays of equal length")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(norms))):
        raise ValueError("series contains non-finite values")
    if window is None:
        window = (float(t[0]), float(t[-1]))
    t0, t1 = window
    sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
    if not sel.any():
        raise ValueError(f"window {window} contains no samples")
    tw = t[sel]
    vw = norms[sel]
    floor = floor_rel * norms[0] if norms[0] > 0 else 0.0
    keep = vw > floor
    floor_hit = bool((~keep).any())
    tw = tw[keep]
    vw = vw[keep]
    if len(tw) == 0:
        return DecayReport(
            gamma_hat=math.inf,
            r_squared=float("nan"),
            window=window,
            floor_hit=floor_hit,
            extinct=True,
            n_used=0,
        )
    if len(tw) < 10:
        raise ValueError(
            f"need at least 10 samples above the floor in the window, got {len(tw)}"
        )
    y = np.log(vw)
    design = np.column_stack([tw, np.ones_like(tw)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ coef
    ss_res = float(np.dot(residuals, residuals))
    centered = y - y.mean()
    ss_tot = float(np.dot(centered, centered))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayReport(
        gamma_hat=float(-coef[0]),
        r_squared=r_squared,
        window=window,
        floor_hit=floor_hit,
        extinct=False,
        n_used=int(len(tw)),
    )


@dataclass(frozen=True)
class ConditionReport:
    """Gain inequalities, delay regime, and optional static-feedback window."""

    gains: GainReport
    tau: float
    l: float
    regime: str
    sano: SanoReport | None


def condition_report(params: Params, k_sano: float | None = None) -> ConditionReport:
    """Evaluate all stability-related conditions for a parameter set."""
    regime = (
        "tau>l (exact delay compensation, any initial value)"
        if params.tau > params.l
        else "tau<=l (requires a compatible initial observer error)"
    )
    return ConditionReport(
        gains=validate_gains(params),
        tau=params.tau,
        l=params.l,
        regime=regime,
        sano=sano_window(params, k_sano) if k_sano is not None else None,
    )


def render_condition(report: ConditionReport) -> str:
    """Plain-text rendering used by the CLI and run summaries."""
    g = report.gains
    lines = ["condition report:"]
    if not g.applicable:
        lines.append("  gain inequalities: not applicable (requires h1 > 0 and h2 > 0)")
    else:
        lines.append(
            f"  theorem_valid = {str(g.theorem_valid).lower()}"
            f"  [0 < k1 < {g.k1_upper:.6g}: {str(g.k1_ok).lower()}"
            f" (margin {g.k1_margin:.6g}),"
            f" 0 < k2 < {g.k2_upper:.6g}: {str(g.k2_ok).lower()}"
            f" (margin {g.k2_margin:.6g})]"
        )
    lines.append(f"  delay regime: {report.regime} (tau={report.tau:g}, l={report.l:g})")
    if report.sano is not None:
        s = report.sano
        if not s.applicable:
            lines.append("  static-feedback window: not applicable (requires h1, h2 > 0)")
        else:
            lines.append(
                f"  static-feedback window for k={s.k:g}: "
                f"({s.window_low:g}, {s.window_high:g}), gain_ok={str(s.gain_ok).lower()}, "
                f"tau inside: {str(s.in_window).lower()}"
            )
    return "\n".join(lines)
