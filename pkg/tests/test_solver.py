import numpy as np
import pytest
from scipy.integrate import solve_ivp

from conftest import field_from, history_from, random_field
from pfhx import (
    Grid,
    Params,
    SolverState,
    closed_form_state,
    evaluate_output,
    l2_norm,
    output_at,
    solve_exact,
    solve_upwind,
    step_exact,
    step_upwind,
    zero_field,
)


def params_with(h1=1.0, h2=2.0, k1=0.5, k2=0.5, l=1.0, tau=0.5):
    return Params(h1=h1, h2=h2, l=l, tau=tau, k1=k1, k2=k2)


def test_zero_field_zero_input_stays_zero():
    grid = Grid(50, 1.0)
    traj = solve_exact(zero_field(grid), None, 2.0, params_with(), grid)
    assert np.all(traj.plant_l2 == 0.0)
    assert np.all(traj.exit_values == 0.0)


def test_equal_components_are_coupling_fixed_point():
    grid = Grid(40, 1.0)
    state = SolverState(0.0, field_from(grid, 3.0, 3.0), grid, params_with())
    state = step_exact(state, None)
    # nodes fed from the interior keep the common value; node 0 takes u = 0
    np.testing.assert_allclose(state.field[1:], 3.0, rtol=0, atol=1e-13)
    assert state.field[0, 0] == 0.0 and state.field[0, 1] == 0.0


def test_characteristic_point_value_vs_ode_oracle():
    # theta0 = (1, 0), h1 = h2 = 1: the exit at t = 0.5 is exp(A1*0.5) @ (1, 0)
    grid = Grid(200, 1.0)
    params = params_with(h1=1.0, h2=1.0)
    theta0 = field_from(grid, 1.0, 0.0)
    traj = solve_exact(theta0, None, 0.5, params, grid)
    a1 = np.array([[-1.0, 1.0], [1.0, -1.0]])
    sol = solve_ivp(lambda t, v: a1 @ v, (0.0, 0.5), np.array([1.0, 0.0]),
                    method="DOP853", rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(traj.exit_values[-1], sol.y[:, -1], rtol=0, atol=1e-10)
    np.testing.assert_allclose(
        traj.exit_values[-1],
        [(1 + np.exp(-1)) / 2, (1 - np.exp(-1)) / 2],
        rtol=0,
        atol=1e-12,
    )


def test_pure_advection_when_decoupled():
    grid = Grid(80, 1.0)
    params = params_with(h1=0.0, h2=0.0)
    theta0 = field_from(grid, lambda x: np.sin(2 * np.pi * x), lambda x: x**2)
    state = SolverState(0.0, theta0, grid, params)
    steps = 30
    for _ in range(steps):
        state = step_exact(state, None)
    np.testing.assert_allclose(state.field[steps:], theta0[:-steps], rtol=0, atol=0)


def test_constant_input_steady_state():
    grid = Grid(100, 1.0)
    params = params_with(h1=1.0, h2=1.0)
    traj = solve_exact(zero_field(grid), lambda t: np.array([1.0, 0.0]), 3.0, params, grid)
    expected = [(1 + np.exp(-2)) / 2, (1 - np.exp(-2)) / 2]
    np.testing.assert_allclose(traj.exit_values[-1], expected, rtol=0, atol=1e-12)
    # input applied from t = dt reaches the exit at t = l + dt; steady after
    late = traj.exit_values[traj.t >= 1.0 + grid.dt]
    np.testing.assert_allclose(late, np.tile(expected, (len(late), 1)), rtol=0, atol=1e-12)


def test_finite_time_flush():
    grid = Grid(64, 1.0)
    rng = np.random.default_rng(7)
    traj = solve_exact(random_field(grid, rng), None, 2.5, params_with(), grid)
    # the last characteristic carrying initial data exits at t = l; strictly
    # after that the state is exactly zero
    assert np.all(traj.plant_l2[traj.t >= 1.0 + grid.dt] == 0.0)
    assert np.all(traj.exit_values[traj.t >= 1.0 + grid.dt] == 0.0)
    # data whose inflow corner is zero flushes by t = l already
    smooth = field_from(grid, lambda x: np.sin(np.pi * x), lambda x: np.sin(2 * np.pi * x))
    traj = solve_exact(smooth, None, 2.0, params_with(), grid)
    assert np.all(traj.plant_l2[traj.t >= 1.0] <= 1e-14)


def test_closed_form_agrees_with_stepping():
    grid = Grid(100, 1.0)
    params = params_with()
    rng = np.random.default_rng(8)
    theta0 = random_field(grid, rng)
    u = lambda t: np.array([np.sin(3.0 * t), np.cos(2.0 * t)])
    for t_query in (0.37, 1.0, 2.31):
        j, t_snapped, _ = grid.snap_steps(t_query)
        state = SolverState(0.0, theta0.copy(), grid, params)
        for _ in range(j):
            state = step_exact(state, u)
        direct = closed_form_state(theta0, u, t_snapped, params, grid)
        np.testing.assert_allclose(state.field, direct, rtol=0, atol=1e-12)


def test_linearity_of_solution_operator():
    grid = Grid(60, 1.0)
    params = params_with()
    rng = np.random.default_rng(9)
    theta0, phi0 = random_field(grid, rng), random_field(grid, rng)
    u = lambda t: np.array([np.sin(t), 0.2])
    v = lambda t: np.array([0.0, np.cos(2 * t)])
    a, b = 1.7, -0.6
    combo = solve_exact(
        a * theta0 + b * phi0,
        lambda t: a * u(t) + b * v(t),
        3.0,
        params,
        grid,
    )
    first = solve_exact(theta0, u, 3.0, params, grid)
    second = solve_exact(phi0, v, 3.0, params, grid)
    np.testing.assert_allclose(
        combo.exit_values,
        a * first.exit_values + b * second.exit_values,
        rtol=0,
        atol=1e-12,
    )
    np.testing.assert_allclose(
        combo.snapshots[-1],
        a * first.snapshots[-1] + b * second.snapshots[-1],
        rtol=0,
        atol=1e-12,
    )


def test_conservation_along_characteristics():
    grid = Grid(60, 1.0)
    params = params_with(h1=0.8, h2=1.9)
    rng = np.random.default_rng(10)
    states = [SolverState(0.0, random_field(grid, rng), grid, params)]
    u = lambda t: np.array([np.sin(t), np.cos(t)])
    for _ in range(40):
        states.append(step_exact(states[-1], u))
    weights = np.array([params.h2, params.h1])
    worst = 0.0
    for start_node in range(0, 40, 7):
        for start_step in range(0, 15, 4):
            length = min(grid.n_cells - start_node, 40 - start_step)
            values = [
                weights @ states[start_step + q].field[start_node + q]
                for q in range(length + 1)
            ]
            worst = max(worst, np.ptp(values))
    assert worst <= 1e-12


def test_hull_bounds_zero_input():
    grid = Grid(50, 1.0)
    params = params_with(h1=2.0, h2=0.7)
    rng = np.random.default_rng(11)
    theta0 = rng.uniform(-1.0, 1.0, size=(grid.n_cells + 1, 2))
    state = SolverState(0.0, theta0, grid, params)
    for j in range(1, grid.n_cells + 1):
        state = step_exact(state, None)
        for i in range(j, grid.n_cells + 1):
            foot = theta0[i - j]
            lo, hi = foot.min(), foot.max()
            assert np.all(state.field[i] >= lo - 1e-12)
            assert np.all(state.field[i] <= hi + 1e-12)


def test_upwind_at_cfl_one_matches_exact():
    grid = Grid(200, 1.0)
    params = params_with()
    rng = np.random.default_rng(12)
    theta0 = random_field(grid, rng)
    u = lambda t: np.array([np.sin(t), 0.3 * np.cos(2 * t)])
    exact = solve_exact(theta0, u, 20.0, params, grid)
    upwind = solve_upwind(theta0, u, 20.0, params, grid, cfl=1.0)
    assert np.abs(upwind.exit_values - exact.exit_values).max() <= 1e-10
    np.testing.assert_allclose(upwind.snapshots[-1], exact.snapshots[-1], rtol=0, atol=1e-10)


def test_upwind_first_order_convergence():
    params = params_with()
    errors = []
    for n in (100, 200, 400):
        grid = Grid(n, 1.0)
        theta0 = field_from(
            grid,
            lambda x: np.sin(np.pi * x) ** 2,
            lambda x: 0.5 * np.sin(np.pi * x) ** 2,
        )
        exact = solve_exact(theta0, None, 0.5, params, grid)
        upwind = solve_upwind(theta0, None, 0.5, params, grid, cfl=0.5)
        diff = upwind.snapshots[-1] - exact.snapshots[-1]
        errors.append(l2_norm(diff, grid))
    rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(np.abs(rates - 1.0) <= 0.2)


def test_upwind_cfl_validation():
    grid = Grid(10, 1.0)
    state = SolverState(0.0, zero_field(grid), grid, params_with())
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(ValueError, match="cfl"):
            step_upwind(state, None, bad)


def test_delayed_output_cross_structure():
    grid = Grid(50, 1.0)
    params = params_with()
    theta0 = field_from(grid, lambda x: x, lambda x: 1.0 - x)
    traj = solve_exact(theta0, None, 2.0, params, grid)
    tau = 0.5
    times, y = evaluate_output(traj, tau)
    m = round(tau / traj.dt)
    assert times[0] == pytest.approx(tau)
    # y(tau) reveals the initial exit pair, swapped
    np.testing.assert_array_equal(y[0], theta0[-1][::-1])
    np.testing.assert_array_equal(y[:, 0], traj.exit_values[:-m, 1])
    np.testing.assert_array_equal(y[:, 1], traj.exit_values[:-m, 0])


def test_output_undefined_before_delay():
    grid = Grid(20, 1.0)
    traj = solve_exact(zero_field(grid), None, 2.0, params_with(), grid)
    with pytest.raises(ValueError, match="undefined before"):
        output_at(traj, 0.5, 0.25)
    np.testing.assert_array_equal(output_at(traj, 0.5, 1.0), [0.0, 0.0])


def test_zero_trajectory_gives_zero_outputs():
    grid = Grid(20, 1.0)
    traj = solve_exact(zero_field(grid), None, 2.0, params_with(), grid)
    _, y = evaluate_output(traj, 0.5)
    assert np.all(y == 0.0)


def test_time_shift_invariance():
    grid = Grid(40, 1.0)
    params = params_with()
    rng = np.random.default_rng(13)
    theta0 = random_field(grid, rng)
    base = solve_exact(theta0, None, 2.0, params, grid)
    shifted = solve_exact(theta0, None, 2.0, params, grid, t0=5.0)
    np.testing.assert_array_equal(shifted.t, base.t + 5.0)
    np.testing.assert_array_equal(shifted.exit_values, base.exit_values)
    np.testing.assert_array_equal(shifted.plant_l2, base.plant_l2)


def test_missing_boundary_value_names_time():
    grid = Grid(10, 1.0)
    hist = history_from(grid.dt, 3, np.zeros((4, 2)))  # covers t <= 0.3
    state = SolverState(0.3, zero_field(grid), grid, params_with())
    with pytest.raises(ValueError, match="0.4"):
        step_exact(state, hist)
