import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from giantroute.errors import InvalidParameterError, SingularPointError
from giantroute.linalg import solve_dense
from giantroute.scattering import (
    AMPLITUDE_NAMES, ScatteringInput, closed_form_amplitudes, closed_form_amplitudes_from_right,
    continuity_residual, oracle_amplitudes, stationary_residual, sweep, xi_value,
)

inputs = st.builds(
    ScatteringInput,
    g=st.floats(0.05, 3.0),
    k=st.floats(0.05, math.pi - 0.05),
    n_sep=st.integers(1, 40),
    theta=st.floats(-math.pi, math.pi),
    J=st.floats(0.5, 2.0),
)


def random_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield ScatteringInput(g=rng.uniform(0.05, 3.0), k=rng.uniform(0.05, math.pi - 0.05),
                              n_sep=int(rng.integers(1, 41)), theta=rng.uniform(-math.pi, math.pi),
                              J=rng.uniform(0.5, 2.0))


# -- dense solver -------------------------------------------------------------

def test_solver_matches_numpy():
    rng = np.random.default_rng(5)
    for n in (1, 3, 9, 20):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        b = rng.normal(size=n) + 1j * rng.normal(size=n)
        assert np.allclose(solve_dense(a, b), np.linalg.solve(a, b), atol=1e-10)


def test_solver_needs_pivoting():
    a = np.array([[0.0, 1.0], [1.0, 1.0]], dtype=complex)
    assert np.allclose(solve_dense(a, np.array([2.0, 3.0])), [1.0, 2.0])


def test_solver_rejects_singular():
    with pytest.raises(SingularPointError):
        solve_dense(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))


# -- closed form against oracle -----------------------------------------------

def test_closed_form_equals_oracle_on_random_draws():
    worst = 0.0
    for inp in random_inputs(1000):
        diff = closed_form_amplitudes(inp).as_array() - oracle_amplitudes(inp).as_array()
        worst = max(worst, np.abs(diff).max())
    assert worst < 1e-10


@settings(max_examples=200, deadline=None)
@given(inputs)
def test_flux_conserved(inp):
    assert closed_form_amplitudes(inp).flux() == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(inputs)
def test_continuity_and_stationary_equations(inp):
    amps = closed_form_amplitudes(inp)
    assert continuity_residual(inp, amps) < 1e-10
    assert stationary_residual(inp, amps, -5, inp.n_sep + 5) < 1e-9 * max(1.0, inp.J, inp.g)


@settings(max_examples=100, deadline=None)
@given(inputs)
def test_reflections_equal_on_both_lattices(inp):
    amps = closed_form_amplitudes(inp)
    assert abs(amps.r_a - amps.r_b) < 1e-12
    # Matching conditions fix the remaining offsets between the lattices.
    assert abs(amps.t_a - amps.t_b - 1) < 1e-12
    assert abs(amps.l_ar - amps.l_br - 1) < 1e-12
    assert abs(amps.l_al - amps.l_bl) < 1e-12


@settings(max_examples=100, deadline=None)
@given(inputs)
def test_right_incidence_solves_stationary_equations(inp):
    amps = closed_form_amplitudes_from_right(inp)
    assert stationary_residual(inp, amps, -5, inp.n_sep + 5) < 1e-9 * max(1.0, inp.J, inp.g)
    assert amps.flux() == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(inputs)
def test_theta_periodicity(inp):
    a = closed_form_amplitudes(inp).as_array()
    b = closed_form_amplitudes(inp.replace(theta=inp.theta + 2 * math.pi)).as_array()
    assert np.abs(a - b).max() < 1e-10


# -- routing points and limits ------------------------------------------------

def test_perfect_routing_to_b():
    amps = closed_form_amplitudes(ScatteringInput(g=0.7, k=math.pi / 2, n_sep=3,
                                                  theta=-math.pi / 2))
    assert amps.T_b == pytest.approx(1.0, abs=1e-12)
    assert amps.T_a == pytest.approx(0.0, abs=1e-12)


def test_perfect_routing_to_a():
    amps = closed_form_amplitudes(ScatteringInput(g=0.7, k=math.pi / 2, n_sep=3,
                                                  theta=math.pi / 2))
    assert amps.T_a == pytest.approx(1.0, abs=1e-12)
    assert amps.T_b == pytest.approx(0.0, abs=1e-12)


def test_quarter_split_at_theta_zero():
    # N = 3, k = pi/2, theta = 0: xi = -2, D = 2 - 2i.
    amps = closed_form_amplitudes(ScatteringInput(g=0.7, n_sep=3, theta=0.0))
    assert amps.xi == pytest.approx(-2.0)
    assert (amps.T_a, amps.T_b, amps.R_a, amps.R_b) == pytest.approx((0.625, 0.125, 0.125, 0.125))


def test_weak_coupling_limit():
    amps = closed_form_amplitudes(ScatteringInput(g=1e-4, k=1.0, n_sep=5, theta=0.3))
    assert amps.T_a == pytest.approx(1.0, abs=1e-6)
    assert amps.T_b < 1e-6
    zero = closed_form_amplitudes(ScatteringInput(g=0.0, k=1.0, n_sep=5))
    assert (zero.t_a, zero.t_b, zero.r_a) == (1, 0, 0)
    assert xi_value(ScatteringInput(g=0.0)) == math.inf


@pytest.mark.parametrize("n", [0, 1, 4])
@pytest.mark.parametrize("theta", np.linspace(-math.pi, math.pi, 9))
def test_separation_mirror_identity(n, theta):
    # At k = pi/2, N = 4n+1 at theta behaves like N = 4n+3 at -theta.
    a = closed_form_amplitudes(ScatteringInput(g=0.7, n_sep=4 * n + 1, theta=theta))
    b = closed_form_amplitudes(ScatteringInput(g=0.7, n_sep=4 * n + 3, theta=-theta))
    assert (a.T_a, a.T_b, a.R_a, a.R_b) == pytest.approx((b.T_a, b.T_b, b.R_a, b.R_b), abs=1e-12)


def test_bound_state_is_singular():
    inp = ScatteringInput(g=0.7, k=math.pi / 2, n_sep=2, theta=0.0)
    with pytest.raises(SingularPointError):
        closed_form_amplitudes(inp)
    with pytest.raises(SingularPointError):
        oracle_amplitudes(inp)


@pytest.mark.parametrize("kw", [dict(g=-1), dict(g=1, k=0.0), dict(g=1, k=math.pi),
                                dict(g=1, n_sep=0), dict(g=1, J=0)])
def test_input_validation(kw):
    with pytest.raises(InvalidParameterError):
        ScatteringInput(**kw)


# -- sweeps -------------------------------------------------------------------

def test_theta_sweep_matches_pointwise():
    base = ScatteringInput(g=0.7, n_sep=3)
    thetas = np.linspace(-math.pi, math.pi, 41)
    table = sweep("theta", base, thetas)
    assert table.columns == ["value", "T_a", "T_b", "R_a", "R_b", "singular"]
    assert len(table) == 41
    for row, th in zip(table.rows, thetas):
        assert row[2] == pytest.approx(closed_form_amplitudes(base.replace(theta=th)).T_b)


def test_sweep_marks_singular_points():
    table = sweep("separation", ScatteringInput(g=0.7, theta=0.0), [1, 2, 3])
    singular = table.column("singular")
    assert list(singular) == [0, 1, 0]
    assert math.isnan(table.rows[1][2])


def test_sweep_rejects_unknown_kind():
    with pytest.raises(ValueError):
        sweep("colour", ScatteringInput(g=0.7), [1.0])


def test_amplitude_names_order():
    amps = closed_form_amplitudes(ScatteringInput(g=0.7))
    assert list(AMPLITUDE_NAMES) == ["r_a", "l_al", "l_ar", "t_a", "r_b", "l_bl", "l_br", "t_b"]
    assert amps.as_array()[7] == amps.t_b
