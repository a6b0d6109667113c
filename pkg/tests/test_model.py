import math
import warnings

import numpy as np
import pytest

from giantroute.errors import (
    AdiabaticityWarning, ConfigurationError, InvalidParameterError,
)
from giantroute.model import (
    EffectiveParams, FullModelParams, LatticeGrid, SingleExcitationState, build_effective_generator,
    build_full_generator, build_generator, derive_effective_params,
)

GRID = LatticeGrid(60)


def random_vector(rng, dim):
    return rng.normal(size=dim) + 1j * rng.normal(size=dim)


def random_full(rng):
    return FullModelParams(g0=rng.uniform(0, 5), gN=rng.uniform(0, 2), eta=rng.uniform(0, 20),
                           theta=rng.uniform(-math.pi, math.pi), delta_e=rng.uniform(-3, 3),
                           delta_f=rng.uniform(50, 150), n_sep=int(rng.integers(1, 10)))


def random_effective(rng):
    return EffectiveParams(g0_prime=rng.uniform(0, 2), gN=rng.uniform(0, 2),
                           delta0_prime=rng.uniform(0, 0.5), delta_e_prime=rng.uniform(0, 4),
                           delta_e=rng.uniform(0, 4), theta=rng.uniform(-math.pi, math.pi),
                           n_sep=int(rng.integers(1, 10)), include_delta0=bool(rng.integers(2)))


def swap_lattices(x, grid):
    y = x.copy()
    y[grid.lattice_slice("a")] = x[grid.lattice_slice("b")]
    y[grid.lattice_slice("b")] = x[grid.lattice_slice("a")]
    return y


# -- parameters ---------------------------------------------------------------

def test_derive_main_text_values():
    eff = derive_effective_params(FullModelParams(g0=4, gN=0.7, eta=17.5, delta_f=100,
                                                  delta_e=3.0625))
    assert eff.g0_prime == pytest.approx(0.7, abs=1e-12)
    assert eff.delta0_prime == pytest.approx(0.16, abs=1e-12)
    assert eff.delta_e_prime == pytest.approx(3.0625, abs=1e-12)
    assert eff.gN == 0.7
    assert not eff.include_delta0


def test_derive_without_drive_decouples_site_zero():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticityWarning)
        eff = derive_effective_params(FullModelParams(g0=4, eta=0.0, delta_f=100))
    assert eff.g0_prime == 0.0
    assert eff.delta_e_prime == 0.0


def test_derive_within_regime_is_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error", AdiabaticityWarning)
        derive_effective_params(FullModelParams(delta_e=3.0625))


@pytest.mark.parametrize("kw", [dict(eta=40.0, delta_e=16.0), dict(g0=30.0, delta_e=3.0625),
                                dict(delta_e=0.0)])
def test_derive_warns_outside_regime(kw):
    with pytest.warns(AdiabaticityWarning):
        derive_effective_params(FullModelParams(**kw))


def test_derive_rejects_zero_detuning():
    with pytest.raises(InvalidParameterError):
        derive_effective_params(FullModelParams(delta_f=0.0))


@pytest.mark.parametrize("kw", [dict(J=0.0), dict(n_sep=0), dict(n_sep=1.5), dict(gamma_e=-1.0)])
def test_invalid_parameters(kw):
    with pytest.raises(InvalidParameterError):
        EffectiveParams(**kw)
    with pytest.raises(InvalidParameterError):
        FullModelParams(**kw)


# -- grid ---------------------------------------------------------------------

def test_grid_layout():
    grid = LatticeGrid(400)
    assert grid.dim == 802
    assert (grid.m_min, grid.m_max) == (-200, 199)
    assert grid.index("a", 0) == 200
    assert grid.index("b", 0) == 600
    assert grid.atom_index("e") == 800 and grid.atom_index("f") == 801


def test_grid_rejects_coupling_site_outside():
    with pytest.raises(ConfigurationError):
        build_effective_generator(EffectiveParams(n_sep=30), LatticeGrid(40))


def test_state_views():
    x = np.arange(GRID.dim, dtype=complex)
    s = SingleExcitationState(x, GRID)
    assert s.u[0] == 0 and s.v[0] == GRID.n_sites
    assert s.w_e == GRID.dim - 2 and s.w_f == GRID.dim - 1
    # norm() is the total probability, i.e. the squared 2-norm.
    assert s.norm() == pytest.approx(np.linalg.norm(x) ** 2)


# -- generator properties -----------------------------------------------------

@pytest.mark.parametrize("make", [random_full, random_effective])
def test_hermitian_random_draws(make):
    rng = np.random.default_rng(1)
    for _ in range(100):
        gen = build_generator(make(rng), GRID)
        H = gen.hamiltonian
        x, y = random_vector(rng, GRID.dim), random_vector(rng, GRID.dim)
        lhs = np.vdot(x, H @ y)
        rhs = np.vdot(H @ x, y)
        assert abs(lhs - rhs) < 1e-12 * np.linalg.norm(x) * np.linalg.norm(y)


def test_apply_is_linear():
    rng = np.random.default_rng(2)
    gen = build_generator(random_effective(rng), GRID)
    x, y = random_vector(rng, GRID.dim), random_vector(rng, GRID.dim)
    a, b = 0.3 - 1.2j, 2.5
    assert np.allclose(gen.apply(a * x + b * y), a * gen.apply(x) + b * gen.apply(y),
                       rtol=0, atol=1e-12)


@pytest.mark.parametrize("make", [random_full, random_effective])
def test_lattice_swap_symmetry(make):
    rng = np.random.default_rng(3)
    for _ in range(10):
        gen = build_generator(make(rng), GRID)
        x = random_vector(rng, GRID.dim)
        assert np.allclose(swap_lattices(gen.apply(x), GRID), gen.apply(swap_lattices(x, GRID)),
                           rtol=0, atol=1e-12)


@pytest.mark.parametrize("k", [0.3, math.pi / 2, 2.4])
def test_bulk_dispersion(k):
    J = 1.3
    gen = build_effective_generator(EffectiveParams(J=J, n_sep=2), GRID)
    x = np.zeros(GRID.dim, dtype=complex)
    sites = GRID.sites
    x[GRID.lattice_slice("b")] = np.exp(1j * k * sites)
    hx = gen.hamiltonian @ x
    bulk = [GRID.index("b", m) for m in (-20, -10, 15, 25)]
    assert np.allclose(hx[bulk], -2 * J * math.cos(k) * x[bulk], atol=1e-12)


def test_isolated_atom_decays_at_twice_gamma():
    gamma = 0.37
    gen = build_full_generator(FullModelParams(g0=0, gN=0, eta=0, gamma_e=gamma), GRID)
    x = np.zeros(GRID.dim, dtype=complex)
    x[GRID.atom_index("e")] = 1.0
    dx = gen.apply(x)
    rate = 2 * np.vdot(x, dx).real
    assert rate == pytest.approx(-2 * gamma, abs=1e-14)
    assert not gen.is_lossless()


def test_effective_coupling_phases():
    p = EffectiveParams(g0_prime=0.7, gN=0.5, theta=0.9, n_sep=3)
    H = build_effective_generator(p, GRID).hamiltonian.toarray()
    e = GRID.atom_index("e")
    for lat in ("a", "b"):
        assert H[e, GRID.index(lat, 0)] == pytest.approx(0.7 * np.exp(0.9j))
        assert H[GRID.index(lat, 0), e] == pytest.approx(0.7 * np.exp(-0.9j))
        assert H[e, GRID.index(lat, 3)] == pytest.approx(0.5)
    # The effective model leaves the |f> slot decoupled.
    f = GRID.atom_index("f")
    assert not H[f].any() and not H[:, f].any()


def test_delta0_block_only_when_enabled():
    p = EffectiveParams(delta0_prime=0.16, n_sep=2)
    a0, b0 = GRID.index("a", 0), GRID.index("b", 0)
    off = build_effective_generator(p, GRID).hamiltonian
    on = build_effective_generator(EffectiveParams(delta0_prime=0.16, n_sep=2,
                                                   include_delta0=True), GRID).hamiltonian
    assert off[a0, b0] == 0 and off[a0, a0] == 0
    for i in (a0, b0):
        for j in (a0, b0):
            assert on[i, j] == pytest.approx(0.16)


def test_with_theta_returns_new_generator():
    gen = build_effective_generator(EffectiveParams(n_sep=2), GRID)
    other = gen.with_theta(1.0)
    assert other is not gen and gen.theta == 0.0 and other.theta == 1.0
    assert gen.with_theta(0.0) is gen


def test_theta_periodicity_of_generator():
    p = EffectiveParams(n_sep=3, theta=0.4)
    a = build_effective_generator(p, GRID).hamiltonian
    b = build_effective_generator(p.with_theta(0.4 + 2 * math.pi), GRID).hamiltonian
    assert abs(a - b).max() < 1e-14


def test_rk4_operator_matches_stagewise_step():
    from giantroute.dynamics import rk4_step
    rng = np.random.default_rng(4)
    gen = build_generator(random_full(rng), GRID)
    x = random_vector(rng, GRID.dim)
    dt = 0.005
    assert np.allclose(gen.rk4_step_operator(dt) @ x, rk4_step(gen.apply, x, dt),
                       rtol=0, atol=1e-12)
