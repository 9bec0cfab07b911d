"""Unit tests for the Fourier-Galerkin linearization and thresholds."""
import numpy as np
import pytest

from kvmf.errors import BracketError
from kvmf.galerkin import (assemble_Mh, assemble_Mh_spatial,
                           critical_coupling_numeric, eigen_branch,
                           tracked_eigenvalue)
from kvmf.kato import PerturbativeMode, alpha_of, gamma_c_perturbative, lambda2
from kvmf.model import ModelParams, NormalizationVariant


def _params(coupling=2.0, tilt=0.5):
    return ModelParams(gamma_noise=1.0, coupling=coupling, tilt=tilt)


def test_operator_indexing():
    op = assemble_Mh(_params(), 0.0, max_mode=4)
    assert op.entries.shape == (8, 8)
    assert list(op.modes) == [-4, -3, -2, -1, 1, 2, 3, 4]
    assert op.index(-4) == 0
    assert op.index(1) == 4
    with pytest.raises(ValueError):
        op.index(0)


def test_h0_spectrum_is_exact():
    """At h = 0 the matrix decouples: lambda_{+-1} = alpha -+ i F and
    lambda_m = -Gamma m^2 - i m F otherwise."""
    p = _params(coupling=2.6, tilt=0.5)
    op = assemble_Mh(p, 0.0, max_mode=8)
    eigs = op.eigenvalues()
    alpha = alpha_of(p)
    expected = []
    for m in op.modes:
        if abs(m) == 1:
            expected.append(alpha - 1j * m * 0.5)
        else:
            expected.append(-m * m - 1j * m * 0.5)
    for lam in expected:
        assert np.min(np.abs(eigs - lam)) < 1e-12


def test_spectrum_conjugate_symmetry():
    """M_h generates a real flow, so its spectrum is closed under
    conjugation."""
    for h in (0.05, 0.1, 0.2):
        eigs = assemble_Mh(_params(), h, max_mode=12).eigenvalues()
        for lam in eigs:
            gap = np.min(np.abs(eigs - np.conj(lam)))
            assert gap < 1e-9 * max(1.0, abs(lam))


def test_branch_matches_perturbation_theory():
    p = _params()
    lam2 = lambda2(p)
    lam0 = alpha_of(p) - 0.5j
    for h in (0.02, 0.05, 0.1):
        lam = tracked_eigenvalue(p, h, max_mode=32)
        pred = lam0 + h * h * lam2
        assert abs(lam - pred) < 5e-4


def test_branch_grid_validation():
    p = _params()
    with pytest.raises(ValueError):
        eigen_branch(p, [0.1, 0.2])  # must start at 0
    with pytest.raises(ValueError):
        eigen_branch(p, [0.0, 0.2, 0.1])  # must be increasing
    branch = eigen_branch(p, [0.0, 0.05, 0.1], max_mode=16)
    assert len(branch.lambdas) == 3
    assert branch.lambdas[0] == pytest.approx(branch.start, abs=1e-12)


def test_truncation_independence():
    p = _params()
    a = tracked_eigenvalue(p, 0.15, max_mode=24)
    b = tracked_eigenvalue(p, 0.15, max_mode=40)
    assert abs(a - b) < 1e-10


def test_spatial_matrix_reduces_to_homogeneous_at_k0():
    p = _params()
    hom = assemble_Mh(p, 0.1, max_mode=12)
    spa = assemble_Mh_spatial(p, 0.1, 0.0, kernel_hat=p.kappa0, max_mode=12)
    assert np.max(np.abs(hom.entries - spa.entries)) == 0.0


def test_transport_block_is_skew_hermitian():
    p = _params().replace(speed=0.7)
    k = (3.0, 1.5)
    with_t = assemble_Mh_spatial(p, 0.1, k, kernel_hat=0.5 * p.kappa0,
                                 max_mode=10)
    without = assemble_Mh_spatial(p.replace(speed=1e-300), 0.1, k,
                                  kernel_hat=0.5 * p.kappa0, max_mode=10)
    transport = with_t.entries - without.entries
    assert np.max(np.abs(transport + transport.conj().T)) < 1e-12


def test_kernel_hat_bound_enforced():
    p = _params()
    with pytest.raises(ValueError):
        assemble_Mh_spatial(p, 0.0, 1.0, kernel_hat=1.5 * p.kappa0)


def test_numeric_threshold_h0_matches_closed_form():
    p = _params()
    res = critical_coupling_numeric(0.0, p, max_mode=16)
    assert res.gamma_c == pytest.approx(2.0, abs=1e-8)


def test_numeric_threshold_matches_perturbative():
    p = _params()
    num = critical_coupling_numeric(0.1, p, max_mode=32).gamma_c
    pert = gamma_c_perturbative(0.1, 0.5, 1.0,
                                PerturbativeMode.SELF_CONSISTENT_ALPHA).gamma_c
    assert abs(num - pert) / num < 0.01


def test_numeric_threshold_variants():
    """Bisection reproduces the variant-dependent h = 0 threshold."""
    p = ModelParams(gamma_noise=1.0, coupling=2.0, tilt=0.5, radius=0.2,
                    variant=NormalizationVariant.UNNORMALISED, dimension=1)
    res = critical_coupling_numeric(0.0, p, max_mode=16)
    assert res.gamma_c == pytest.approx(5.0, abs=1e-7)
