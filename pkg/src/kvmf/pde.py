"""Pseudospectral time integration of the mean-field dynamics.

Angular-only evolution works directly on Fourier coefficients: every
nonlinear term is a banded coefficient convolution, so no collocation grid
(and hence no aliasing) is involved.  The spatial solver evolves the full
(x, theta) field with FFT products and the 2/3 dealiasing rule.  Both use
an integrating factor for the stiff diagonal part (angular diffusion and
tilt) and classical RK4 for the rest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BlowUpError, DivisionGuardError
from .model import TWO_PI, AngularDensity, NormalizationVariant
from .stationary import SpatialAngularDensity, tophat_kernel_hat

_DENOM_FLOOR = 1e-8


@dataclass(frozen=True)
class EvolveConfig:
    n_theta: int = 60
    n_x: int = 40
    dt: float = 1e-3
    t_max: float = 300.0
    steady_tol: float = 1e-9
    dealias: bool = True
    record_interval: float = 0.5

    def __post_init__(self):
        if self.n_theta <= 0 or self.n_theta % 2:
            raise ValueError("n_theta must be even and positive")
        if self.n_x <= 0 or self.n_x % 2:
            raise ValueError("n_x must be even and positive")
        if self.dt <= 0 or self.t_max <= 0 or self.steady_tol <= 0:
            raise ValueError("dt, t_max and steady_tol must be positive")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    order_params: np.ndarray
    final_state: object
    converged: bool
    residual: float


def order_parameter(state):
    """Magnitude of the first angular Fourier moment (x-averaged locally
    for spatial states)."""
    if isinstance(state, SpatialAngularDensity):
        nx = max(64, 2 * state.spatial_modes + 1)
        nth = max(64, 2 * state.max_mode + 1)
        grid = state.to_grid(nx, nth)
        theta = TWO_PI * np.arange(nth) / nth
        dth = TWO_PI / nth
        m_c = grid @ np.cos(theta) * dth
        m_s = grid @ np.sin(theta) * dth
        return float(np.hypot(m_c, m_s).mean())
    c1 = state.coefficient(1)
    return float(TWO_PI * abs(c1))


def initial_angular_sin(n_theta=60):
    """Perturbed start: density proportional to sin(theta) + 2."""
    theta = TWO_PI * np.arange(n_theta) / n_theta
    return AngularDensity.from_grid(np.sin(theta) + 2.0)


def initial_spatial_cos_sin(n_x=40, n_theta=40):
    """Smooth spatial perturbation proportional to cos(theta) sin(2 pi x) + 2."""
    x = np.arange(n_x) / n_x
    theta = TWO_PI * np.arange(n_theta) / n_theta
    vals = np.cos(theta)[None, :] * np.sin(TWO_PI * x)[:, None] + 2.0
    vals = vals / (vals.mean() * TWO_PI)
    return SpatialAngularDensity.from_grid(vals)


def _interaction_coeffs(c, max_mode, potential, kappa0, coupling, field):
    """Coefficients of -h sin(th) - gamma I[rho] on modes -deg..deg."""
    deg = len(potential)
    b = np.zeros(2 * deg + 1, dtype=complex)
    b[deg + 1] += 0.5j * field
    b[deg - 1] += -0.5j * field
    for k, a_k in enumerate(potential, start=1):
        ck = c[max_mode + k]
        r_c = TWO_PI * ck.real
        r_s = -TWO_PI * ck.imag
        # I coefficient on e^{i k th}: kappa0 k a_k (-i r_c - r_s)/2
        i_k = kappa0 * k * a_k * 0.5 * (-1j * r_c - r_s)
        b[deg + k] += -coupling * i_k
        b[deg - k] += -coupling * np.conj(i_k)
    return b


def evolve_angular(params, init, cfg=None):
    """Integrate the spatially homogeneous angular dynamics.

    d rho / dt = Gamma rho'' - d/dth([F - h sin th - gamma I[rho]] rho),
    advanced by integrating-factor RK4 on Fourier coefficients.
    """
    cfg = cfg or EvolveConfig()
    m_max = cfg.n_theta // 2
    modes = np.arange(-m_max, m_max + 1)
    c = np.zeros(2 * m_max + 1, dtype=complex)
    lo = min(m_max, init.max_mode)
    c[m_max - lo:m_max + lo + 1] = init.coeffs[init.max_mode - lo:init.max_mode + lo + 1]

    deg = len(params.potential)
    lin = -params.gamma_noise * modes**2 - 1j * modes * params.tilt
    dt = cfg.dt
    e_full = np.exp(lin * dt)
    e_half = np.exp(lin * 0.5 * dt)
    center = 2 * m_max + 1

    def rhs(state):
        b = _interaction_coeffs(state, m_max, params.potential, params.kappa0,
                                params.coupling, params.field)
        conv = np.convolve(b, state)[deg:deg + center]
        out = -1j * modes * conv
        out[m_max] = 0.0  # mass mode is exactly conserved
        return out

    n_steps = int(math.ceil(cfg.t_max / dt))
    record_every = max(1, int(round(cfg.record_interval / dt)))
    check_every = max(1, int(round(1.0 / dt)))
    times = [0.0]
    orders = [TWO_PI * abs(c[m_max + 1])]
    last_check = c.copy()
    converged = False
    residual = math.inf
    t = 0.0
    for step in range(1, n_steps + 1):
        k1 = rhs(c)
        k2 = rhs(e_half * (c + 0.5 * dt * k1))
        k3 = rhs(e_half * c + 0.5 * dt * k2)
        k4 = rhs(e_full * c + dt * e_half * k3)
        c = e_full * c + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
        t = step * dt
        if step % record_every == 0 or step == n_steps:
            times.append(t)
            orders.append(TWO_PI * abs(c[m_max + 1]))
        if step % check_every == 0:
            if not np.all(np.isfinite(c)):
                raise BlowUpError("angular evolution produced non-finite values",
                                  time=t)
            diff = _l1_coeff_grid(c - last_check, m_max)
            residual = diff / (check_every * dt)
            last_check = c.copy()
            if residual < cfg.steady_tol:
                converged = True
                break
    final = AngularDensity.from_coeffs(c)
    return Trajectory(times=np.asarray(times), order_params=np.asarray(orders),
                      final_state=final, converged=converged, residual=residual)


def _l1_coeff_grid(delta, m_max, n_points=256):
    raw = np.zeros(n_points, dtype=complex)
    for n in range(-m_max, m_max + 1):
        raw[n % n_points] += delta[n + m_max]
    vals = np.fft.ifft(raw).real * n_points
    return float(np.abs(vals).mean() * TWO_PI)


def _interaction_spatial(rho, params, trig, what):
    """Alignment field I[rho](x, theta) on the grid for the chosen variant."""
    cos_kth, sin_kth, theta = trig
    dth = TWO_PI / theta.size
    a_k = np.asarray(params.potential)
    deg = a_k.size
    m_c = rho @ cos_kth.T * dth
    m_s = rho @ sin_kth.T * dth
    conv_c = np.fft.ifft(np.fft.fft(m_c, axis=0) * what[:, None], axis=0).real
    conv_s = np.fft.ifft(np.fft.fft(m_s, axis=0) * what[:, None], axis=0).real
    ka = np.arange(1, deg + 1) * a_k
    j = (conv_c * ka) @ sin_kth - (conv_s * ka) @ cos_kth

    variant = params.variant
    if variant is NormalizationVariant.UNNORMALISED:
        return j
    if variant is NormalizationVariant.FULLY_NORMALISED:
        local_mass = rho.sum(axis=1) * dth
        denom = np.fft.ifft(np.fft.fft(local_mass) * what).real
        _guard(denom)
        return j / denom[:, None]
    if variant is NormalizationVariant.PARTIAL_THETA:
        denom = rho.sum(axis=1) * dth
        _guard(denom)
        return j / denom[:, None]
    # partial normalization in x
    denom = np.fft.ifft(np.fft.fft(rho, axis=0) * what[:, None], axis=0).real
    _guard(denom)
    return j / denom


def _guard(denom):
    if np.min(denom) < _DENOM_FLOOR:
        raise DivisionGuardError(
            f"normalization denominator fell below {_DENOM_FLOOR}")


def evolve_spatial(params, init, cfg=None):
    """Integrate the 1d-space x angle mean-field dynamics.

    Transport -v0 cos(theta) d_x rho and the drift -d_th(b rho) are treated
    explicitly (pseudospectral products, 2/3 dealiasing); angular diffusion
    and tilt go through the integrating factor.
    """
    cfg = cfg or EvolveConfig(n_theta=40, t_max=250.0)
    nx, nth = cfg.n_x, cfg.n_theta
    theta = TWO_PI * np.arange(nth) / nth
    deg = len(params.potential)
    cos_kth = np.array([np.cos(k * theta) for k in range(1, deg + 1)])
    sin_kth = np.array([np.sin(k * theta) for k in range(1, deg + 1)])
    trig = (cos_kth, sin_kth, theta)
    kx = TWO_PI * np.fft.fftfreq(nx, d=1.0 / nx)
    n_modes = np.fft.fftfreq(nth, d=1.0 / nth)
    kint = np.fft.fftfreq(nx, d=1.0 / nx)
    what = tophat_kernel_hat(params.radius, kint)

    lin = (-params.gamma_noise * n_modes**2 - 1j * n_modes * params.tilt)[None, :]
    dt = cfg.dt
    e_full = np.exp(lin * dt)
    e_half = np.exp(lin * 0.5 * dt)

    if cfg.dealias:
        mask = (np.abs(kint)[:, None] <= nx // 3) & (np.abs(n_modes)[None, :] <= nth // 3)
    else:
        mask = np.ones((nx, nth), dtype=bool)

    minus_v0_cos = -params.speed * np.cos(theta)[None, :]
    h_sin = params.field * np.sin(theta)[None, :]
    gamma = params.coupling

    def rhs(fhat):
        fm = np.where(mask, fhat, 0.0)
        rho = np.fft.ifft2(fm).real
        inter = _interaction_spatial(rho, params, trig, what)
        b_tilde = -h_sin - gamma * inter
        drift = -1j * n_modes[None, :] * np.fft.fft2(b_tilde * rho)
        dx_rho = np.fft.ifft2(1j * kx[:, None] * fm).real
        trans = np.fft.fft2(minus_v0_cos * dx_rho)
        out = np.where(mask, drift + trans, 0.0)
        out[0, 0] = 0.0
        return out

    grid0 = init.to_grid(nx, nth)
    fhat = np.fft.fft2(grid0)
    dth = TWO_PI / nth

    def local_r(fh):
        rho = np.fft.ifft2(fh).real
        m_c = rho @ np.cos(theta) * dth
        m_s = rho @ np.sin(theta) * dth
        return float(np.hypot(m_c, m_s).mean())

    n_steps = int(math.ceil(cfg.t_max / dt))
    record_every = max(1, int(round(cfg.record_interval / dt)))
    check_every = max(1, int(round(1.0 / dt)))
    times = [0.0]
    orders = [local_r(fhat)]
    last_check = fhat.copy()
    converged = False
    residual = math.inf
    t = 0.0
    for step in range(1, n_steps + 1):
        k1 = rhs(fhat)
        k2 = rhs(e_half * (fhat + 0.5 * dt * k1))
        k3 = rhs(e_half * fhat + 0.5 * dt * k2)
        k4 = rhs(e_full * fhat + dt * e_half * k3)
        fhat = e_full * fhat + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
        t = step * dt
        if step % record_every == 0 or step == n_steps:
            times.append(t)
            orders.append(local_r(fhat))
        if step % check_every == 0:
            if not np.all(np.isfinite(fhat)):
                raise BlowUpError("spatial evolution produced non-finite values",
                                  time=t)
            diff = np.abs(np.fft.ifft2(fhat - last_check).real).mean() * TWO_PI
            residual = diff / (check_every * dt)
            last_check = fhat.copy()
            if residual < cfg.steady_tol:
                converged = True
                break
    final = SpatialAngularDensity.from_grid(np.fft.ifft2(fhat).real)
    return Trajectory(times=np.asarray(times), order_params=np.asarray(orders),
                      final_state=final, converged=converged, residual=residual)
