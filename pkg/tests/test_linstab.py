"""Unit tests for the h = 0 linear stability results."""
import math

import numpy as np
import pytest
import scipy.special

from kvmf.linstab import (ThresholdMethod, bessel_j1, critical_coupling_h0,
                          dispersion_rows, dominance_gap, growth_rate,
                          kernel_factor, variant_prefactor)
from kvmf.model import ModelParams, NormalizationVariant

FIRST_J1_ZERO = 3.8317059702075123


def test_bessel_j1_against_scipy():
    x = np.linspace(0.0, 50.0, 501)
    assert np.max(np.abs(bessel_j1(x) - scipy.special.j1(x))) < 1e-12
    assert bessel_j1(0.0) == pytest.approx(0.0, abs=1e-15)
    assert bessel_j1(1.5) == pytest.approx(scipy.special.j1(1.5), abs=1e-14)


def test_kernel_factor_limits():
    assert kernel_factor(0.0, 0.25, 2) == 1.0
    assert kernel_factor(0.0, 0.25, 1) == 1.0
    # both sides of the series/Bessel crossover agree with scipy
    for z in (0.999e-3, 1.001e-3):
        assert kernel_factor(z / 0.25, 0.25, 2) == pytest.approx(
            2.0 * scipy.special.j1(z) / z, abs=1e-12)
    with pytest.raises(ValueError):
        kernel_factor(1.0, 0.25, 3)


def test_kernel_factor_vanishes_at_first_bessel_zero():
    radius = 0.25
    k = FIRST_J1_ZERO / radius
    assert abs(kernel_factor(k, radius, 2)) < 1e-8


def test_kernel_factor_1d_is_sinc():
    radius = 0.3
    k = np.array([0.5, 1.0, 5.0])
    expected = np.sin(k * radius) / (k * radius)
    assert np.max(np.abs(kernel_factor(k, radius, 1) - expected)) < 1e-14


@pytest.mark.parametrize("variant,dim,expected", [
    (NormalizationVariant.FULLY_NORMALISED, 2, 2.0),
    (NormalizationVariant.UNNORMALISED, 2, 2.0 / (math.pi * 0.04)),
    (NormalizationVariant.PARTIAL_THETA, 2, 2.0 / (math.pi * 0.04)),
    (NormalizationVariant.PARTIAL_X, 2, 1.0 / math.pi),
    (NormalizationVariant.FULLY_NORMALISED, 1, 2.0),
    (NormalizationVariant.UNNORMALISED, 1, 5.0),
    (NormalizationVariant.PARTIAL_THETA, 1, 5.0),
    (NormalizationVariant.PARTIAL_X, 1, 1.0 / math.pi),
])
def test_table_thresholds(variant, dim, expected):
    res = critical_coupling_h0(variant, 1.0, 0.2, dim)
    assert res.gamma_c == expected
    assert res.method is ThresholdMethod.ANALYTIC


def test_growth_rate_sign_flips_at_threshold():
    for variant in NormalizationVariant:
        gc = critical_coupling_h0(variant, 1.0, 0.2, 1).gamma_c
        below = ModelParams(gamma_noise=1.0, coupling=0.99 * gc, radius=0.2,
                            variant=variant, dimension=1)
        above = ModelParams(gamma_noise=1.0, coupling=1.01 * gc, radius=0.2,
                            variant=variant, dimension=1)
        assert growth_rate(0.0, 1, below).re_lambda < 0
        assert growth_rate(0.0, 1, above).re_lambda > 0


def test_growth_rate_higher_modes_and_tilt():
    p = ModelParams(gamma_noise=1.5, coupling=2.0, tilt=0.5)
    g = growth_rate(0.0, 2, p)
    assert g.re_lambda == pytest.approx(-6.0)
    assert g.im_lambda == pytest.approx(-1.0)
    g1 = growth_rate(0.0, 1, p)
    assert g1.re_lambda == pytest.approx(0.5 * 2.0 - 1.5)
    # threshold is independent of the tilt
    assert g1.re_lambda == growth_rate(0.0, 1, p.replace(tilt=0.0)).re_lambda


def test_variant_prefactor():
    p = ModelParams(gamma_noise=1.0, coupling=3.0, radius=0.2,
                    variant=NormalizationVariant.UNNORMALISED, dimension=1)
    assert variant_prefactor(p) == pytest.approx(0.5 * 3.0 * 0.4)


def test_dominance_gap_nonpositive():
    p = ModelParams(gamma_noise=1.0, coupling=2.5, radius=0.25)
    gaps = dominance_gap(np.linspace(0.1, 60.0, 40), p)
    assert all(g <= 0.0 for _, g in gaps)
    p1 = p.replace(dimension=1)
    gaps = dominance_gap(np.linspace(0.1, 60.0, 40), p1)
    assert all(g <= 0.0 for _, g in gaps)


def test_dispersion_rows():
    p = ModelParams(gamma_noise=1.0, coupling=2.0, tilt=0.5)
    rows = dispersion_rows([0.0, 1.0], [-1, 1, 2], p)
    assert len(rows) == 6
    k, m, re, im = rows[1]
    assert (k, m) == (0.0, 1)
    assert im == pytest.approx(-0.5)
