"""Fourier-Galerkin discretization of the linearized dynamics around the
perturbative confined state, eigenvalue branch continuation in h, and
bisection in gamma for the numerical critical coupling.

The matrix is assembled symbolically from exact Fourier product rules:
every multiplier appearing in the operator is a first-harmonic trig
polynomial, so each entry is a closed-form expression in the parameters.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BracketError
from .kato import _rho1_AB, alpha_of, _require_monochromatic
from .linstab import ThresholdMethod, ThresholdResult
from .model import TWO_PI

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class GalerkinOperator:
    """Complex matrix on angular modes n in {-N..N} \\ {0}.

    Row/column i corresponds to mode modes[i] where
    modes = [-N, ..., -1, 1, ..., N].
    """

    max_mode: int
    entries: np.ndarray
    params_snapshot: object
    h: float
    spatial_k: object = None

    @property
    def modes(self):
        n = self.max_mode
        return np.concatenate([np.arange(-n, 0), np.arange(1, n + 1)])

    def index(self, mode):
        if mode == 0 or abs(mode) > self.max_mode:
            raise ValueError(f"mode {mode} outside {{-N..N}} \\ {{0}}")
        return mode + self.max_mode if mode < 0 else mode + self.max_mode - 1

    def eigenvalues(self):
        return np.linalg.eigvals(self.entries)


@dataclass(frozen=True)
class EigenBranch:
    h_grid: tuple
    lambdas: tuple
    start: complex
    max_mode: int
    ties: tuple = ()


def _first_harmonic_data(params, h):
    """Fourier data of the h-dependent multipliers: (q_plus, q_minus, c1)."""
    if h == 0.0:
        return 0.0j, 0.0j, 0.0j
    alpha = alpha_of(params)
    f = params.tilt
    gamma_kappa = params.coupling * params.kappa0
    a_c, b_c = _rho1_AB(alpha, f)
    c1 = 0.5 * (a_c - 1j * b_c)
    # q(th) = -(1 + gamma kappa0 pi A) sin(th) + gamma kappa0 pi B cos(th)
    p_sin = -(1.0 + gamma_kappa * np.pi * a_c)
    q_cos = gamma_kappa * np.pi * b_c
    q_plus = -0.5j * p_sin + 0.5 * q_cos
    q_minus = 0.5j * p_sin + 0.5 * q_cos
    return q_plus, q_minus, c1


def _assemble(params, h, n_max, interaction_weight, transport_k=None):
    _require_monochromatic(params)
    if n_max < 4:
        raise ValueError("max_mode must be at least 4")
    gam = params.gamma_noise
    f = params.tilt
    g = params.coupling
    q_plus, q_minus, c1 = _first_harmonic_data(params, h)
    modes = np.concatenate([np.arange(-n_max, 0), np.arange(1, n_max + 1)])
    index = {int(m): i for i, m in enumerate(modes)}
    size = 2 * n_max
    mat = np.zeros((size, size), dtype=complex)

    # uniform + h * rho1 Fourier coefficients
    p_coeff = {0: 1.0 / TWO_PI, 1: h * c1, -1: h * np.conj(c1)}
    q_coeff = {1: h * q_plus, -1: h * q_minus}

    for m in modes:
        i = index[int(m)]
        mat[i, i] += -gam * m * m - 1j * m * f
        # advection by the first-harmonic part of q_h: -d/dth (q eta)
        for dn in (-1, 1):
            n = m - dn
            if n != 0 and abs(n) <= n_max:
                mat[i, index[n]] += -1j * m * q_coeff[dn]
        # interaction term: gamma d/dth (rho_h^pert I[eta]); I picks modes +-1
        if 1 in index:
            p = p_coeff.get(m - 1)
            if p is not None:
                mat[i, index[1]] += m * g * np.pi * interaction_weight * p
            p = p_coeff.get(m + 1)
            if p is not None:
                mat[i, index[-1]] += -m * g * np.pi * interaction_weight * p

    if transport_k is not None:
        v0 = params.speed
        k1, k2 = transport_k
        for m in modes:
            i = index[int(m)]
            n = m - 1
            if n != 0 and abs(n) <= n_max:
                mat[i, index[n]] += -0.5j * v0 * (k1 - 1j * k2)
            n = m + 1
            if n != 0 and abs(n) <= n_max:
                mat[i, index[n]] += -0.5j * v0 * (k1 + 1j * k2)
    return mat


def assemble_Mh(params, h, max_mode=32):
    """Galerkin matrix of the homogeneous linearized operator at field h."""
    entries = _assemble(params, h, max_mode, interaction_weight=params.kappa0)
    return GalerkinOperator(max_mode=max_mode, entries=entries,
                            params_snapshot=params, h=h)


def assemble_Mh_spatial(params, h, k, kernel_hat, max_mode=32):
    """Spatially resolved Galerkin matrix at angular wavenumber vector k.

    k is the wavenumber entering exp(i k . x) (scalars are treated as 1d,
    k2 = 0); kernel_hat is the kernel transform W_hat(k), which replaces
    kappa0 in the interaction term while the frozen stationary-state drift
    keeps the homogeneous kappa0.
    """
    kvec = np.atleast_1d(np.asarray(k, dtype=float))
    k1 = float(kvec[0])
    k2 = float(kvec[1]) if kvec.size > 1 else 0.0
    if abs(kernel_hat) > params.kappa0 * (1 + 1e-12):
        raise ValueError("kernel_hat must satisfy |W_hat(k)| <= kappa0")
    entries = _assemble(params, h, max_mode, interaction_weight=kernel_hat,
                        transport_k=(k1, k2))
    return GalerkinOperator(max_mode=max_mode, entries=entries,
                            params_snapshot=params, h=h, spatial_k=(k1, k2))


def _nearest(eigs, target):
    dist = np.abs(eigs - target)
    best = float(dist.min())
    close = np.flatnonzero(dist <= best + _TIE_TOL)
    tie = close.size > 1
    if tie:
        pick = close[np.argmax(eigs[close].real)]
        warnings.warn("eigenvalue continuation tie broken by larger real part",
                      stacklevel=2)
    else:
        pick = int(np.argmin(dist))
    return complex(eigs[pick]), tie


def eigen_branch(params, h_grid, max_mode=32):
    """Track the n = +1 eigenvalue branch over an increasing h grid.

    At h = 0 the branch is the eigenvalue nearest lambda0 = alpha - i F;
    at each later grid point the eigenvalue nearest the previous one is
    selected.  Ties are broken toward the larger real part and flagged.
    """
    h_grid = [float(h) for h in h_grid]
    if len(h_grid) == 0:
        raise ValueError("h_grid must be nonempty")
    if any(b < a for a, b in zip(h_grid, h_grid[1:])) or h_grid[0] != 0.0:
        raise ValueError("h_grid must be increasing and start at 0")
    lambda0 = alpha_of(params) - 1j * params.tilt
    current = lambda0
    lambdas = []
    ties = []
    for h in h_grid:
        op = assemble_Mh(params, h, max_mode)
        current, tie = _nearest(op.eigenvalues(), current)
        lambdas.append(current)
        ties.append(tie)
    return EigenBranch(h_grid=tuple(h_grid), lambdas=tuple(lambdas),
                       start=lambda0, max_mode=max_mode, ties=tuple(ties))


def tracked_eigenvalue(params, h, max_mode=32, n_steps=6):
    """Leading eigenvalue at field h via continuation from h = 0."""
    if h == 0.0:
        grid = [0.0]
    else:
        grid = list(np.linspace(0.0, h, max(2, n_steps)))
    return eigen_branch(params, grid, max_mode).lambdas[-1]


def critical_coupling_numeric(h, params_base, max_mode=32, tol=1e-10):
    """Bisection in gamma of Re lambda_+(h, gamma) = 0.

    The branch is re-identified by continuation from h = 0 at every gamma.
    The initial bracket is [1.5 Gamma, 4 Gamma], expanded once if the sign
    does not change.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    gam = params_base.gamma_noise

    def re_lambda(gamma):
        params = params_base.replace(coupling=gamma)
        return tracked_eigenvalue(params, h, max_mode).real

    lo, hi = 1.5 * gam, 4.0 * gam
    flo, fhi = re_lambda(lo), re_lambda(hi)
    if flo * fhi > 0:
        lo, hi = 0.5 * gam, 8.0 * gam
        flo, fhi = re_lambda(lo), re_lambda(hi)
        if flo * fhi > 0:
            raise BracketError("Re lambda_+ does not change sign on the expanded bracket")
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = re_lambda(mid)
        if abs(fmid) < tol:
            break
        if flo * fmid <= 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    else:
        raise BracketError("bisection did not reach the requested tolerance")
    return ThresholdResult(gamma_c=float(mid), variant=params_base.variant,
                           dimension=params_base.dimension,
                           method=ThresholdMethod.BISECTION)
