"""Closed-form perturbation theory for the confined stationary state.

First-order density correction rho1, the coupling coefficients of the
perturbing operator on the first two harmonics, the second-order
eigenvalue correction, and the resulting perturbative critical coupling
as a function of the confinement strength h.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BracketError, SingularParameterError
from .linstab import ThresholdMethod, ThresholdResult
from .model import TWO_PI, AngularDensity, NormalizationVariant, TrigPolynomial

_DUAL_PATH_TOL = 1e-13


class PerturbativeMode(Enum):
    LEADING_ORDER = "leading_order"
    SELF_CONSISTENT_ALPHA = "self_consistent_alpha"


@dataclass(frozen=True)
class PerturbationCoeffs:
    alpha: float
    A: float
    B: float
    c1: complex
    a_coeff: complex
    b_coeff: complex
    lambda0: complex
    lambda2: complex


def alpha_of(params):
    """Linear growth coefficient alpha = gamma kappa0 / 2 - Gamma."""
    return 0.5 * params.coupling * params.kappa0 - params.gamma_noise


def _require_monochromatic(params):
    if params.potential != (1.0,):
        raise SingularParameterError(
            "perturbation theory is implemented for the monochromatic potential only")


def _rho1_AB(alpha, tilt):
    denom = alpha * alpha + tilt * tilt
    if denom < 1e-28:
        raise SingularParameterError(
            "rho1 is singular at alpha = F = 0 (expansion invalid)")
    a = -alpha / (TWO_PI * denom)
    b = tilt / (TWO_PI * denom)
    return a, b


def rho1(params):
    """First-order stationary correction A cos(theta) + B sin(theta)."""
    _require_monochromatic(params)
    a, b = _rho1_AB(alpha_of(params), params.tilt)
    return TrigPolynomial(cos_coeffs=(a,), sin_coeffs=(b,))


def perturbative_state(params, h, max_mode=32):
    """Perturbative stationary density uniform + h * rho1."""
    corr = rho1(params)
    alpha = alpha_of(params)
    scale = alpha * alpha + params.tilt * params.tilt
    if h * h > 0.1 * scale:
        warnings.warn(
            "h^2 is not small against alpha^2 + F^2; the perturbative state "
            "may be inaccurate", stacklevel=2)
    coeffs = np.zeros(2 * max_mode + 1, dtype=complex)
    coeffs[max_mode] = 1.0 / TWO_PI
    c1 = h * corr.complex_coefficient(1)
    coeffs[max_mode + 1] = c1
    coeffs[max_mode - 1] = np.conj(c1)
    return AngularDensity(max_mode, coeffs, validate=False)


def _lambda2_closed(alpha, tilt, gamma_noise):
    f, g = tilt, gamma_noise
    return (1.0 / (4.0 * g + alpha + 1j * f)) \
        * (-(f - 1j * (2.0 * g + alpha)) / (f + 1j * alpha)) \
        * ((f + 1j * g) / (2.0 * (f - 1j * alpha)))


def _lambda2_product(alpha, tilt, gamma_noise):
    """Second path: assemble lambda2 from the first-harmonic multiplier
    coefficients of the perturbing operator, q_{+-1}, and the interaction
    contribution on the first harmonic."""
    f, g = tilt, gamma_noise
    gamma_kappa = 2.0 * (alpha + g)  # gamma * kappa0
    a_c, b_c = _rho1_AB(alpha, f)
    c1 = 0.5 * (a_c - 1j * b_c)
    # q(theta) = -(1 + gamma kappa0 pi A) sin(theta) + gamma kappa0 pi B cos(theta)
    p_sin = -(1.0 + gamma_kappa * math.pi * a_c)
    q_cos = gamma_kappa * math.pi * b_c
    q1 = -0.5j * p_sin + 0.5 * q_cos
    qm1 = 0.5j * p_sin + 0.5 * q_cos
    a = -2j * q1 + 2.0 * gamma_kappa * math.pi * c1
    b = -1j * qm1
    lambda0 = alpha - 1j * f
    mu2 = -4.0 * g - 2j * f
    return a, b, -a * b / (mu2 - lambda0)


def lambda2(params):
    """Second-order eigenvalue correction for the n = +1 branch."""
    _require_monochromatic(params)
    if params.tilt <= 0:
        raise SingularParameterError("lambda2 requires F > 0")
    alpha = alpha_of(params)
    return _lambda2_value(alpha, params.tilt, params.gamma_noise)


def _lambda2_value(alpha, tilt, gamma_noise):
    closed = _lambda2_closed(alpha, tilt, gamma_noise)
    _, _, product = _lambda2_product(alpha, tilt, gamma_noise)
    if abs(closed - product) > _DUAL_PATH_TOL * max(1.0, abs(closed)):
        raise AssertionError(
            f"lambda2 dual-path mismatch: {closed} vs {product}")
    return closed


def perturbation_coeffs(params):
    """All closed-form perturbation quantities for the given parameters."""
    _require_monochromatic(params)
    if params.tilt <= 0:
        raise SingularParameterError("perturbation coefficients require F > 0")
    alpha = alpha_of(params)
    f, g = params.tilt, params.gamma_noise
    a_c, b_c = _rho1_AB(alpha, f)
    c1 = 0.5 * (a_c - 1j * b_c)
    a_closed = (f - 1j * (2.0 * g + alpha)) / (f + 1j * alpha)
    b_closed = -(f + 1j * g) / (2.0 * (f - 1j * alpha))
    return PerturbationCoeffs(
        alpha=alpha,
        A=a_c,
        B=b_c,
        c1=c1,
        a_coeff=a_closed,
        b_coeff=b_closed,
        lambda0=alpha - 1j * f,
        lambda2=_lambda2_value(alpha, f, g),
    )


def threshold_shift_coefficient(tilt, gamma_noise):
    """Quadratic coefficient of the threshold shift: Gamma(3F^2+8Gamma^2)/(F^2(16Gamma^2+F^2))."""
    if tilt <= 0:
        raise SingularParameterError("threshold shift requires F > 0")
    f, g = tilt, gamma_noise
    return g * (3.0 * f * f + 8.0 * g * g) / (f * f * (16.0 * g * g + f * f))


def gamma_c_perturbative(h, tilt, gamma_noise, mode=PerturbativeMode.LEADING_ORDER):
    """Perturbative critical coupling gamma_c(h) for the confined model."""
    if tilt <= 0:
        raise SingularParameterError("gamma_c_perturbative requires F > 0")
    if gamma_noise <= 0:
        raise ValueError("gamma_noise must be positive")
    if isinstance(mode, str):
        mode = PerturbativeMode(mode)
    h2 = h * h
    if mode is PerturbativeMode.LEADING_ORDER:
        gamma_c = 2.0 * gamma_noise + h2 * threshold_shift_coefficient(tilt, gamma_noise)
    else:
        def objective(alpha):
            return alpha + h2 * _lambda2_value(alpha, tilt, gamma_noise).real

        lo, hi = -gamma_noise, gamma_noise
        flo, fhi = objective(lo), objective(hi)
        if flo * fhi > 0:
            raise BracketError(
                f"self-consistent alpha not bracketed in [{lo}, {hi}]")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fmid = objective(mid)
            if fmid == 0 or hi - lo < 1e-12:
                break
            if flo * fmid <= 0:
                hi = mid
            else:
                lo, flo = mid, fmid
        gamma_c = 2.0 * (0.5 * (lo + hi) + gamma_noise)
    return ThresholdResult(gamma_c=float(gamma_c),
                           variant=NormalizationVariant.FULLY_NORMALISED,
                           dimension=2,
                           method=ThresholdMethod.PERTURBATIVE)


def evaluation_record(h, tilt, gamma_noise, mode=PerturbativeMode.LEADING_ORDER):
    """JSON-ready record of one perturbative threshold evaluation."""
    if isinstance(mode, str):
        mode = PerturbativeMode(mode)
    res = gamma_c_perturbative(h, tilt, gamma_noise, mode)
    alpha_c = 0.5 * res.gamma_c - gamma_noise
    lam2 = _lambda2_value(0.0 if mode is PerturbativeMode.LEADING_ORDER else alpha_c,
                          tilt, gamma_noise)
    return {
        "h": float(h),
        "gamma_c": res.gamma_c,
        "mode": mode.value,
        "F": float(tilt),
        "Gamma": float(gamma_noise),
        "lambda0": [alpha_c, -float(tilt)],
        "lambda2": [lam2.real, lam2.imag],
    }


def dump_records(records, path):
    with open(path, "w") as fh:
        json.dump(records, fh, indent=2)
