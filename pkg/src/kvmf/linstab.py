"""Linear stability of the uniform state at h = 0.

Growth rates of (k, m) modes, the top-hat kernel transform factor S_R, and
the closed-form critical couplings for the four normalization variants in
both the 2d (disc kernel) and 1d (interval kernel) conventions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import NormalizationVariant, linearization_kappa


class ThresholdMethod(Enum):
    ANALYTIC = "analytic"
    PERTURBATIVE = "perturbative"
    BISECTION = "bisection"


@dataclass(frozen=True)
class ModeGrowth:
    spatial_mode: object
    angular_mode: int
    re_lambda: float
    im_lambda: float


@dataclass(frozen=True)
class ThresholdResult:
    gamma_c: float
    variant: NormalizationVariant
    dimension: int
    method: ThresholdMethod

    def __post_init__(self):
        if self.gamma_c <= 0:
            raise ValueError("gamma_c must be positive")


def bessel_j1(x):
    """Bessel function J1 evaluated from its integral representation.

    J1(x) = (1/(2 pi)) * int_0^{2 pi} cos(tau - x sin tau) d tau.  The
    integrand is 2 pi-periodic and entire, so the periodic trapezoid rule
    converges geometrically; the node count grows with |x| to keep full
    double precision.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    xmax = float(np.max(np.abs(xv))) if xv.size else 0.0
    m = 64 + 4 * int(math.ceil(xmax))
    tau = 2.0 * math.pi * np.arange(m) / m
    vals = np.cos(tau[None, :] - np.outer(xv, np.sin(tau))).mean(axis=1)
    return float(vals[0]) if scalar else vals


def kernel_factor(k_magnitude, radius, dimension):
    """Normalized transform of the interaction window: S_R(|k|).

    2 J1(|k| R)/(|k| R) for the disc in 2d, sin(|k| R)/(|k| R) for the
    interval in 1d; S_R(0) = 1 in both conventions.
    """
    z = np.asarray(k_magnitude, dtype=float) * radius
    scalar = z.ndim == 0
    zv = np.atleast_1d(z)
    if np.any(zv < 0):
        raise ValueError("k_magnitude must be nonnegative")
    if dimension == 2:
        out = np.ones_like(zv)
        # series branch avoids cancellation in 2 J1(z)/z at small z
        small = zv < 1e-3
        out[small] = 1.0 - zv[small] ** 2 / 8.0 + zv[small] ** 4 / 192.0
        big = ~small
        out[big] = 2.0 * bessel_j1(zv[big]) / zv[big]
    elif dimension == 1:
        out = np.sinc(zv / math.pi)
    else:
        raise ValueError("dimension must be 1 or 2")
    return float(out[0]) if scalar else out


def variant_prefactor(params, dimension=None):
    """Coefficient A multiplying S_R(|k|) in the m = +-1 growth rate."""
    dim = params.dimension if dimension is None else dimension
    kappa = linearization_kappa(params.variant, params.radius, dim)
    return 0.5 * params.coupling * kappa


def growth_rate(k, m, params, dimension=None):
    """Growth rate of the (k, m) Fourier mode of the linearization at h = 0.

    The transport term is skew-Hermitian and contributes nothing to the
    real part; its imaginary contribution is not included here, so
    im_lambda records only the tilt part -m F.
    """
    dim = params.dimension if dimension is None else dimension
    k_mag = float(np.linalg.norm(np.atleast_1d(np.asarray(k, dtype=float))))
    if abs(m) == 1:
        a = variant_prefactor(params, dim)
        re = a * kernel_factor(k_mag, params.radius, dim) - params.gamma_noise
    else:
        re = -params.gamma_noise * m * m
    return ModeGrowth(spatial_mode=k, angular_mode=m,
                      re_lambda=float(re), im_lambda=float(-m * params.tilt))


def critical_coupling_h0(variant, gamma_noise, radius, dimension):
    """Closed-form critical coupling of the uniform state at h = 0."""
    if gamma_noise <= 0 or radius <= 0:
        raise ValueError("gamma_noise and radius must be positive")
    if variant is NormalizationVariant.FULLY_NORMALISED:
        gamma_c = 2.0 * gamma_noise
    elif variant in (NormalizationVariant.UNNORMALISED, NormalizationVariant.PARTIAL_THETA):
        if dimension == 2:
            gamma_c = 2.0 * gamma_noise / (math.pi * radius**2)
        else:
            gamma_c = gamma_noise / radius
    elif variant is NormalizationVariant.PARTIAL_X:
        gamma_c = gamma_noise / math.pi
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return ThresholdResult(gamma_c=gamma_c, variant=variant, dimension=dimension,
                           method=ThresholdMethod.ANALYTIC)


def dominance_gap(k_samples, params, dimension=None):
    """Re lambda_{+1}(k) - Re lambda_{+1}(0) for each sampled wavenumber."""
    if len(k_samples) == 0:
        raise ValueError("k_samples must be nonempty")
    base = growth_rate(0.0, 1, params, dimension).re_lambda
    return [(k, growth_rate(k, 1, params, dimension).re_lambda - base)
            for k in k_samples]


def dispersion_rows(k_magnitudes, m_values, params, dimension=None):
    """Rows (|k|, m, Re lambda, Im lambda) for CSV emission."""
    rows = []
    for k in k_magnitudes:
        for m in m_values:
            g = growth_rate(float(k), int(m), params, dimension)
            rows.append((float(k), int(m), g.re_lambda, g.im_lambda))
    return rows
