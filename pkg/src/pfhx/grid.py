"""Spatial grid, sampled temperature fields, norms, and compatibility checks.

A field is a plain ``(n_cells + 1, 2)`` float array sampled at the uniform
nodes ``x_i = i * dx``; column 0 holds theta1 and column 1 holds theta2.
Both transport speeds equal one, so the solver locks the time step to
``dt = dx`` and every delay or horizon is snapped to a whole number of
steps.  That makes characteristic updates and delayed lookups exact at the
nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

_ALIGN_RTOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, l] with n_cells cells (n_cells + 1 nodes)."""

    n_cells: int
    l: float

    def __post_init__(self) -> None:
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError(f"n_cells must be a positive integer, got {self.n_cells}")
        if not np.isfinite(self.l) or self.l <= 0:
            raise ValueError(f"tube length l must be positive, got {self.l}")

    @property
    def dx(self) -> float:
        return self.l / self.n_cells

    @property
    def dt(self) -> float:
        """Solver time step; equal to dx (unit transport speed, CFL = 1)."""
        return self.dx

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.l, self.n_cells + 1)

    def snap_steps(self, duration: float, minimum: int = 0) -> tuple[int, float, bool]:
        """Round a duration to a whole number of steps.

        Returns (step count, snapped duration, whether snapping changed it).
        """
        steps = max(minimum, int(round(duration / self.dt)))
        snapped = steps * self.dt
        changed = abs(snapped - duration) > _ALIGN_RTOL * max(1.0, abs(duration))
        return steps, snapped, changed

    def snap_tau(self, tau: float) -> tuple[int, float, bool]:
        """Snap a delay to the step grid; the delay is at least one step."""
        return self.snap_steps(tau, minimum=1)


def zero_field(grid: Grid) -> np.ndarray:
    return np.zeros((grid.n_cells + 1, 2))


def make_field(grid: Grid, theta1, theta2) -> np.ndarray:
    """Assemble a field from per-component values.

    Each component may be a scalar, an array over the nodes, or a callable
    evaluated at the node positions.
    """
    field = np.empty((grid.n_cells + 1, 2))
    for col, comp in enumerate((theta1, theta2)):
        if callable(comp):
            field[:, col] = comp(grid.nodes)
        else:
            field[:, col] = np.broadcast_to(np.asarray(comp, dtype=float), grid.n_cells + 1)
    check_field(field, grid)
    return field


def check_field(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Validate shape and finiteness of a field against its grid."""
    field = np.asarray(field, dtype=float)
    expected = (grid.n_cells + 1, 2)
    if field.shape != expected:
        raise ValueError(f"field shape {field.shape} does not match grid {expected}")
    if not np.all(np.isfinite(field)):
        raise ValueError("field contains non-finite entries")
    return field


def _l2(field: np.ndarray, dx: float) -> float:
    return float(np.sqrt(np.trapezoid(field[:, 0] ** 2 + field[:, 1] ** 2, dx=dx)))


def l2_norm(field: np.ndarray, grid: Grid) -> float:
    """Trapezoid approximation of the L2([0,l])^2 norm of a field."""
    field = check_field(field, grid)
    return _l2(field, grid.dx)


@dataclass(frozen=True)
class CompatibilityReport:
    """Boundary residuals and smoothness diagnostics of an error profile."""

    compatible: bool
    residual1: float
    residual2: float
    boundary_ok: bool
    max_slope: float
    jump_count: int
    jump_threshold: float


def compatibility_check(
    w: np.ndarray,
    params,
    grid: Grid,
    tol: float = 1e-9,
    jump_factor: float = 10.0,
    jump_abs: float | None = None,
) -> CompatibilityReport:
    """Check whether an initial observer-error profile is admissible.

    The boundary part mirrors the closed-loop boundary coupling: the profile
    must satisfy w1(0) + k1*w2(l) = 0 and w2(0) + k2*w1(l) = 0 up to ``tol``.
    The smoothness part is a discrete proxy for one weak derivative: the
    profile must not contain step discontinuities, detected as node-to-node
    increments far larger than the typical increment.  The default threshold
    is ``jump_factor * dx * median(|slope|)`` with a small absolute guard so
    that jumps on otherwise flat profiles are still caught; pass ``jump_abs``
    to override the threshold outright.
    """
    w = check_field(w, grid)
    n = grid.n_cells
    residual1 = abs(w[0, 0] + params.k1 * w[n, 1])
    residual2 = abs(w[0, 1] + params.k2 * w[n, 0])
    boundary_ok = residual1 <= tol and residual2 <= tol

    diffs = np.abs(np.diff(w, axis=0))
    slopes = diffs / grid.dx
    max_slope = float(slopes.max()) if slopes.size else 0.0
    if jump_abs is not None:
        threshold = jump_abs
    else:
        scale = float(np.median(slopes))
        guard = 1e-8 * max(1.0, float(np.abs(w).max()))
        threshold = max(jump_factor * grid.dx * scale, guard)
    jump_count = int(np.count_nonzero(diffs > threshold))

    return CompatibilityReport(
        compatible=boundary_ok and jump_count == 0,
        residual1=residual1,
        residual2=residual2,
        boundary_ok=boundary_ok,
        max_slope=max_slope,
        jump_count=jump_count,
        jump_threshold=threshold,
    )
