"""Unit tests for the pseudospectral time evolution."""
import numpy as np
import pytest

from kvmf.errors import DivisionGuardError
from kvmf.galerkin import tracked_eigenvalue
from kvmf.kato import perturbative_state
from kvmf.model import TWO_PI, AngularDensity, ModelParams
from kvmf.pde import (EvolveConfig, evolve_angular, evolve_spatial,
                      initial_angular_sin, initial_spatial_cos_sin,
                      order_parameter)
from kvmf.stationary import SpatialAngularDensity, solve_stationary_homogeneous


def test_config_validation():
    with pytest.raises(ValueError):
        EvolveConfig(n_theta=33)
    with pytest.raises(ValueError):
        EvolveConfig(dt=-0.1)


def test_initial_conditions_normalized():
    rho = initial_angular_sin(60)
    assert rho.coefficient(0) == pytest.approx(1.0 / TWO_PI, abs=1e-14)
    assert order_parameter(rho) == pytest.approx(0.25, abs=1e-12)
    spa = initial_spatial_cos_sin(40, 40)
    ks, ns = spa.spatial_modes, spa.max_mode
    assert spa.coeffs[ks, ns] == pytest.approx(1.0 / TWO_PI, abs=1e-14)


def test_order_parameter_examples():
    assert order_parameter(AngularDensity.uniform(8)) == 0.0
    p = ModelParams(gamma_noise=1.0, coupling=2.0, tilt=0.5)  # alpha = 0
    state = perturbative_state(p, 0.1)
    assert order_parameter(state) == pytest.approx(0.1, abs=1e-12)
    n = np.arange(-32, 33)
    coeffs = np.exp(-n**2 / 200.0) / TWO_PI
    sharp = AngularDensity(32, coeffs.astype(complex), validate=False)
    assert order_parameter(sharp) == pytest.approx(np.exp(-0.005), abs=1e-12)
    # cross-check against direct quadrature of the first moment
    grid = sharp.to_grid(512)
    tg = TWO_PI * np.arange(512) / 512
    mc = (grid * np.cos(tg)).mean() * TWO_PI
    ms = (grid * np.sin(tg)).mean() * TWO_PI
    assert order_parameter(sharp) == pytest.approx(np.hypot(mc, ms), abs=1e-10)


def test_free_decay_matches_heat_kernel():
    """With negligible coupling each mode decays as exp((-Gamma n^2 - i n F) t)."""
    params = ModelParams(gamma_noise=0.7, coupling=1e-300, tilt=0.6)
    init = initial_angular_sin(32)
    t_end = 2.0
    cfg = EvolveConfig(n_theta=32, dt=1e-3, t_max=t_end, steady_tol=1e-16)
    traj = evolve_angular(params, init, cfg)
    final = traj.final_state
    for n in range(-init.max_mode, init.max_mode + 1):
        lam = -0.7 * n * n - 1j * n * 0.6
        expected = init.coefficient(n) * np.exp(lam * t_end)
        assert abs(final.coefficient(n) - expected) < 1e-8


def test_mass_conserved_angular():
    params = ModelParams(gamma_noise=1.0, coupling=3.0, tilt=0.5, field=0.1)
    cfg = EvolveConfig(n_theta=40, dt=5e-3, t_max=20.0)
    traj = evolve_angular(params, initial_angular_sin(40), cfg)
    assert abs(traj.final_state.coefficient(0) - 1.0 / TWO_PI) < 1e-13
    assert np.all(traj.order_params >= 0)
    assert np.all(traj.order_params <= 1.0)


def test_rotating_frame_equivalence():
    """With h = 0, evolving at tilt F and rotating back by F t matches F = 0."""
    t_end = 10.0
    cfg = EvolveConfig(n_theta=48, dt=2e-3, t_max=t_end, steady_tol=1e-16)
    init = initial_angular_sin(48)
    base = evolve_angular(ModelParams(gamma_noise=1.0, coupling=3.0),
                          init, cfg).final_state
    tilted = evolve_angular(ModelParams(gamma_noise=1.0, coupling=3.0, tilt=0.5),
                            init, cfg).final_state
    unrotated = tilted.rotated(0.5 * t_end)
    assert base.l1_distance(unrotated) < 1e-6


def test_time_step_convergence():
    params = ModelParams(gamma_noise=1.0, coupling=3.0, tilt=0.5)
    init = initial_angular_sin(40)
    r = []
    for dt in (2e-3, 1e-3):
        cfg = EvolveConfig(n_theta=40, dt=dt, t_max=5.0, steady_tol=1e-16)
        r.append(evolve_angular(params, init, cfg).order_params[-1])
    assert abs(r[0] - r[1]) < 1e-8


def test_steady_state_early_exit():
    params = ModelParams(gamma_noise=1.0, coupling=1.5)
    cfg = EvolveConfig(n_theta=40, dt=5e-3, t_max=300.0, steady_tol=1e-9)
    traj = evolve_angular(params, initial_angular_sin(40), cfg)
    assert traj.converged
    assert traj.times[-1] < 300.0
    assert traj.residual < 1e-9


def test_growth_rate_matches_galerkin_branch():
    """Small perturbations of the confined state grow/decay at Re lambda_+."""
    h = 0.1
    base = ModelParams(gamma_noise=1.0, coupling=2.0, tilt=0.5, field=h)
    gamma_c = 2.0215  # numeric threshold at h = 0.1 (F = 0.5, Gamma = 1)
    for factor in (0.98, 1.02):
        gamma = factor * gamma_c
        p = base.replace(coupling=gamma)
        lam = tracked_eigenvalue(p, h, max_mode=32)
        start = perturbative_state(p, h, max_mode=30)
        kicked = start.coeffs.copy()
        eps = 1e-7
        kicked[start.max_mode + 1] += eps
        kicked[start.max_mode - 1] += eps
        kicked_state = AngularDensity(start.max_mode, kicked, validate=False)
        dists = []
        for t_end in (20.0, 60.0):
            cfg = EvolveConfig(n_theta=60, dt=5e-3, t_max=t_end,
                               steady_tol=1e-16)
            a = evolve_angular(p, start, cfg).final_state
            b = evolve_angular(p, kicked_state, cfg).final_state
            dists.append(np.linalg.norm(b.coeffs - a.coeffs))
        rate = np.log(dists[1] / dists[0]) / 40.0
        assert np.sign(rate) == np.sign(lam.real)
        assert rate == pytest.approx(lam.real, rel=0.05)


def test_spatial_uniform_stays_uniform():
    params = ModelParams(gamma_noise=1.0, coupling=3.0, speed=0.1, radius=0.2,
                         variant="unnormalised", dimension=1)
    init = SpatialAngularDensity.uniform(8, 8)
    cfg = EvolveConfig(n_theta=24, n_x=24, dt=0.01, t_max=2.0)
    traj = evolve_spatial(params, init, cfg)
    grid = traj.final_state.to_grid(24, 24)
    assert np.max(np.abs(grid - 1.0 / TWO_PI)) < 1e-12
    ks, ns = traj.final_state.spatial_modes, traj.final_state.max_mode
    assert abs(traj.final_state.coeffs[ks, ns] - 1.0 / TWO_PI) < 1e-13


def test_spatial_mass_conserved():
    params = ModelParams(gamma_noise=1.0, coupling=6.0, speed=0.1, radius=0.2,
                         variant="unnormalised", dimension=1)
    cfg = EvolveConfig(n_theta=40, n_x=40, dt=0.01, t_max=5.0)
    traj = evolve_spatial(params, initial_spatial_cos_sin(40, 40), cfg)
    ks, ns = traj.final_state.spatial_modes, traj.final_state.max_mode
    assert abs(traj.final_state.coeffs[ks, ns] - 1.0 / TWO_PI) < 1e-13


def test_division_guard_fires_on_vanishing_local_mass():
    """Partial-theta normalization divides by the local angular mass, which
    the guard rejects once it falls below the floor."""
    params = ModelParams(gamma_noise=1.0, coupling=1.0, speed=0.1, radius=0.2,
                         variant="partial_theta", dimension=1)
    nx = nth = 32
    x = np.arange(nx) / nx
    th = TWO_PI * np.arange(nth) / nth
    # nearly-vanishing mass in half the domain
    vals = np.outer(1e-9 + np.sin(np.pi * x) ** 20, np.ones(nth))
    vals /= vals.mean() * TWO_PI
    init = SpatialAngularDensity.from_grid(vals)
    cfg = EvolveConfig(n_theta=32, n_x=32, dt=1e-3, t_max=0.1, dealias=False)
    with pytest.raises(DivisionGuardError):
        evolve_spatial(params, init, cfg)
