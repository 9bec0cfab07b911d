"""Self-consistency solvers for stationary states.

Homogeneous case: damped Picard iteration of the map
T(rho) = exp(-U/Gamma) * I(theta) / Z with the tilt-periodic integral
I(theta).  Spatial case (v0 = 0): the same map applied pointwise in x
with kernel-convolved moments.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .model import (TWO_PI, UNIFORM_C0, AngularDensity, angular_potential,
                    drift_coefficients)

_EXP_GUARD = 700.0


@dataclass(frozen=True)
class SelfConsistencyConfig:
    quad_points: int = 512
    tol: float = 1e-10
    max_iter: int = 10000
    damping: float = 1.0

    def __post_init__(self):
        if self.quad_points < 64:
            raise ValueError("quad_points must be at least 64")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")


class SpatialAngularDensity:
    """Density on (periodic 1d space) x circle stored as 2d Fourier coefficients.

    coeffs[k + K, n + N] is the coefficient of exp(i 2 pi k x) exp(i n theta).
    """

    __slots__ = ("spatial_modes", "max_mode", "coeffs")

    def __init__(self, spatial_modes, max_mode, coeffs, validate=True):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (2 * spatial_modes + 1, 2 * max_mode + 1):
            raise ValueError("coeffs must have shape (2K+1, 2N+1)")
        if validate:
            if np.max(np.abs(coeffs - np.conj(coeffs[::-1, ::-1]))) > 1e-9:
                raise ValueError("coefficients must satisfy c(-k,-n) = conj(c(k,n))")
            if abs(coeffs[spatial_modes, max_mode] - UNIFORM_C0) > 1e-9:
                raise ValueError("c(0, 0) must equal 1/(2 pi)")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        self.spatial_modes = int(spatial_modes)
        self.max_mode = int(max_mode)
        self.coeffs = coeffs

    @classmethod
    def uniform(cls, spatial_modes, max_mode):
        c = np.zeros((2 * spatial_modes + 1, 2 * max_mode + 1), dtype=complex)
        c[spatial_modes, max_mode] = UNIFORM_C0
        return cls(spatial_modes, max_mode, c, validate=False)

    @classmethod
    def from_grid(cls, values, spatial_modes=None, max_mode=None):
        """Project samples rho(x_i, theta_j) on uniform periodic grids."""
        values = np.asarray(values, dtype=float)
        nx, nth = values.shape
        if spatial_modes is None:
            spatial_modes = (nx - 1) // 2
        if max_mode is None:
            max_mode = (nth - 1) // 2
        raw = np.fft.fft2(values) / (nx * nth)
        coeffs = np.empty((2 * spatial_modes + 1, 2 * max_mode + 1), dtype=complex)
        for k in range(-spatial_modes, spatial_modes + 1):
            for n in range(-max_mode, max_mode + 1):
                coeffs[k + spatial_modes, n + max_mode] = raw[k % nx, n % nth]
        return cls(spatial_modes, max_mode, coeffs, validate=False)

    def to_grid(self, nx, ntheta):
        raw = np.zeros((nx, ntheta), dtype=complex)
        ks = self.spatial_modes
        ns = self.max_mode
        for k in range(-ks, ks + 1):
            for n in range(-ns, ns + 1):
                raw[k % nx, n % ntheta] += self.coeffs[k + ks, n + ns]
        return np.fft.ifft2(raw).real * nx * ntheta

    def angular_slice(self, x):
        """AngularDensity-style coefficient vector at position x (may not be a
        probability density before convergence)."""
        k = np.arange(-self.spatial_modes, self.spatial_modes + 1)
        phase = np.exp(2j * math.pi * k * x)
        return phase @ self.coeffs

    def __repr__(self):
        return (f"SpatialAngularDensity(spatial_modes={self.spatial_modes}, "
                f"max_mode={self.max_mode})")


def _guarded_exp(exponent):
    shift = max(0.0, float(np.max(exponent)) - _EXP_GUARD)
    return np.exp(exponent - shift)


def periodic_integral(pot, params, cfg):
    """Tilt-periodic self-consistency integral on the theta grid.

    I(theta) = int_0^{2 pi} exp(-[F t - P(t + theta)] / Gamma) dt where P is
    the periodic part of the potential; computed with the composite
    trapezoid rule on quad_points + 1 nodes in t.
    """
    nq = cfg.quad_points
    gam = params.gamma_noise
    theta = TWO_PI * np.arange(nq) / nq
    t = TWO_PI * np.arange(nq + 1) / nq
    # exponent(theta_j, t_i) = (-F t_i + P(t_i + theta_j)) / Gamma
    phase = theta[:, None] + t[None, :]
    exponent = (-params.tilt * t[None, :] + pot.periodic(phase)) / gam
    integrand = _guarded_exp(exponent)
    return np.trapezoid(integrand, dx=TWO_PI / nq, axis=1)


def selfconsistency_map(rho, params, cfg):
    """One application of the stationary self-consistency map T."""
    pot = angular_potential(rho, params)
    nq = cfg.quad_points
    theta = TWO_PI * np.arange(nq) / nq
    integral = periodic_integral(pot, params, cfg)
    weight = _guarded_exp(-pot.periodic(theta) / params.gamma_noise)
    values = weight * integral
    return AngularDensity.from_grid(values, max_mode=rho.max_mode)


def _l1(a, b, n_points):
    return float(np.abs(a.to_grid(n_points) - b.to_grid(n_points)).mean() * TWO_PI)


def solve_stationary_homogeneous(params, cfg=None, init=None):
    """Damped Picard iteration of the self-consistency map to a fixed point.

    Returns (density, iterations, residual).  Damping is halved to 0.5
    automatically if the residual increases twice in a row.
    """
    cfg = cfg or SelfConsistencyConfig()
    rho = init if init is not None else AngularDensity.uniform(32)
    damping = cfg.damping
    prev_residual = math.inf
    increases = 0
    for iteration in range(1, cfg.max_iter + 1):
        mapped = selfconsistency_map(rho, params, cfg)
        if damping < 1.0:
            mixed = (1.0 - damping) * rho.coeffs + damping * mapped.coeffs
            mapped = AngularDensity.from_coeffs(mixed)
        residual = _l1(mapped, rho, cfg.quad_points)
        rho = mapped
        if residual < cfg.tol:
            return rho, iteration, residual
        if residual > prev_residual:
            increases += 1
            if increases >= 2 and damping > 0.5:
                damping = 0.5
                increases = 0
        else:
            increases = 0
        prev_residual = residual
    raise ConvergenceError(
        f"self-consistency iteration did not converge in {cfg.max_iter} steps",
        last_state=rho, residual=prev_residual, iterations=cfg.max_iter)


def stationarity_residual(rho, params):
    """Max Fourier-coefficient magnitude of -d(b rho)/dth + Gamma rho''.

    Checked up to mode max_mode - degree so that truncation of the product
    does not enter.
    """
    b = drift_coefficients(rho, params)
    deg = (b.size - 1) // 2
    n_max = rho.max_mode
    conv = np.convolve(b, rho.coeffs)
    conv = conv[deg:deg + 2 * n_max + 1]
    n = np.arange(-n_max, n_max + 1)
    res = -1j * n * conv - params.gamma_noise * n * n * rho.coeffs
    keep = np.abs(n) <= n_max - deg
    return float(np.max(np.abs(res[keep])))


def tophat_kernel_hat(radius, wavenumbers, scale=1.0):
    """Fourier multipliers of the interval kernel of half-width R on [0, 1].

    W_hat(k) = scale * 2R * sinc(2 k R) at integer wavenumber k; scale = 1
    gives the unnormalised (mass 2R) kernel and scale = 1/(2R) the fully
    normalised one.
    """
    k = np.asarray(wavenumbers, dtype=float)
    return scale * 2.0 * radius * np.sinc(2.0 * k * radius)


def solve_stationary_spatial(params, kernel_hat, cfg=None, init=None,
                             spatial_points=None):
    """Pointwise-in-x self-consistency for the v0 = 0 stationary state.

    kernel_hat maps integer wavenumber arrays to Fourier multipliers of the
    spatial interaction kernel.  Returns (SpatialAngularDensity, iterations,
    residual) with residual = sup over x of the L1(theta) update size.
    """
    if params.speed != 0.0:
        raise ValueError("spatial self-consistency requires speed = 0")
    cfg = cfg or SelfConsistencyConfig()
    if init is None:
        init = SpatialAngularDensity.uniform(8, 16)
    nx = spatial_points or (2 * init.spatial_modes + 1)
    nq = cfg.quad_points
    gam = params.gamma_noise
    theta = TWO_PI * np.arange(nq) / nq
    dth = TWO_PI / nq
    kint = np.fft.fftfreq(nx, d=1.0 / nx)
    what = kernel_hat(kint)

    rho = init.to_grid(nx, nq)
    # trapezoid-in-t weights folded into a circular correlation over theta
    t_weights = np.exp(-params.tilt * theta / gam)
    t_weights[0] = 0.5 * (1.0 + math.exp(-params.tilt * TWO_PI / gam))
    fw = np.conj(np.fft.fft(t_weights))

    degree = len(params.potential)
    cos_kth = np.array([np.cos(k * theta) for k in range(1, degree + 1)])
    sin_kth = np.array([np.sin(k * theta) for k in range(1, degree + 1)])

    residual = math.inf
    for iteration in range(1, cfg.max_iter + 1):
        # kernel-convolved local moments C_k(x), S_k(x)
        m_c = rho @ cos_kth.T * dth
        m_s = rho @ sin_kth.T * dth
        conv_c = np.fft.ifft(np.fft.fft(m_c, axis=0) * what[:, None], axis=0).real
        conv_s = np.fft.ifft(np.fft.fft(m_s, axis=0) * what[:, None], axis=0).real
        # periodic part of the potential at each x
        a_k = np.asarray(params.potential)
        p_grid = (params.field * np.cos(theta)[None, :]
                  + params.coupling * ((conv_c * a_k) @ cos_kth
                                       + (conv_s * a_k) @ sin_kth))
        # periodic part of U is P = -p_grid
        g_fac = _guarded_exp(-p_grid / gam)  # exp(P(x, .) / Gamma)
        # I(x, theta_j) = dth * sum_i w_i exp(P(x, theta_{i+j}) / Gamma)
        integral = np.fft.ifft(np.fft.fft(g_fac, axis=1) * fw[None, :], axis=1).real * dth
        weight = _guarded_exp(p_grid / gam)  # exp(-P(x, .) / Gamma)
        new = weight * integral
        new /= (new.mean(axis=1) * TWO_PI)[:, None]
        if cfg.damping < 1.0:
            new = (1.0 - cfg.damping) * rho + cfg.damping * new
        residual = float(np.max(np.abs(new - rho).mean(axis=1) * TWO_PI))
        rho = new
        if residual < cfg.tol:
            out = SpatialAngularDensity.from_grid(
                rho, spatial_modes=init.spatial_modes, max_mode=init.max_mode)
            return _enforce_spatial_invariants(out), iteration, residual
    raise ConvergenceError(
        f"spatial self-consistency did not converge in {cfg.max_iter} steps",
        last_state=rho, residual=residual, iterations=cfg.max_iter)


def _enforce_spatial_invariants(density):
    c = density.coeffs.copy()
    ks, ns = density.spatial_modes, density.max_mode
    c = 0.5 * (c + np.conj(c[::-1, ::-1]))
    c[:, ns][np.arange(2 * ks + 1) != ks] = 0.0
    c[ks, ns] = UNIFORM_C0
    return SpatialAngularDensity(ks, ns, c, validate=False)


def export_density_csv(path, density, params=None, iterations=None,
                       residual=None, n_points=512, nx=None):
    """Write a converged density as CSV plus a JSON metadata sidecar."""
    path = str(path)
    if isinstance(density, SpatialAngularDensity):
        nx = nx or (2 * density.spatial_modes + 1)
        grid = density.to_grid(nx, n_points)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "theta", "rho"])
            for i in range(nx):
                for j in range(n_points):
                    writer.writerow([i / nx, TWO_PI * j / n_points, grid[i, j]])
    else:
        grid = density.to_grid(n_points)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "rho"])
            for j in range(n_points):
                writer.writerow([TWO_PI * j / n_points, grid[j]])
    sidecar = {"iterations": iterations, "residual": residual}
    if params is not None:
        from .model import params_to_config
        sidecar["params"] = params_to_config(params)
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
