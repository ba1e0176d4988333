import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from immaculate.errors import AmplifierError, ConfigurationError, NearDegenerateError, RegimeError
from immaculate.fock import FockVector, coherent
from immaculate.usd import (
    SymmetricEnsemble,
    a_of_epsilon,
    amplifier_usd_bound,
    branch_fidelity,
    build_reciprocal_basis,
    chernoff_remainder,
    dense_dense_bound,
    dense_sparse_bound,
    disk_bound,
    exact_remainder,
    failure_spectrum,
    fit_a_epsilon,
    helstrom_two,
    jacobi_theta3,
    q_r_exact,
    q_spectrum,
    usd_amp_apply,
    usd_probability,
    usd_success,
    usd_success_dense,
    usd_success_sparse,
    usd_two,
)

from oracles import q_r as mp_q_r
from oracles import usd_success as mp_usd

abars = st.floats(0.0, 7.0)
Ms = st.integers(2, 40)


# values frozen from the mpmath oracle
@pytest.mark.parametrize(
    "abar,M,want",
    [
        (1.0, 8, 0.0005839356231576387604),
        (2.0, 4, 0.97194189494379157277),
        (1.5, 3, 0.95753227817577319677),
        (3.0, 6, 0.98013189596740124431),
        (math.sqrt(0.15 * 36), 6, 0.88072758975459015647),
    ],
)
def test_usd_success_frozen(abar, M, want):
    assert usd_probability(abar, M) == pytest.approx(want, rel=1e-12)


def test_argmin_is_last_residue_for_small_amplitude():
    sp = usd_success(SymmetricEnsemble(1.0, 8))
    assert sp.argmin_r == 7
    want = [float(mp_q_r(1.0, 8, r)) for r in range(8)]
    assert np.allclose(sp.q, want, rtol=1e-12, atol=0)


def test_argmin_ties_pick_smallest_residue():
    assert usd_success(SymmetricEnsemble(0.0, 5)).argmin_r == 1


@pytest.mark.parametrize("abar,M", [(0.5, 3), (2.2, 7), (4.0, 11), (6.5, 30)])
def test_spectrum_matches_oracle(abar, M):
    e = SymmetricEnsemble(abar, M)
    vec = q_spectrum(e)
    for r in range(M):
        want = float(mp_q_r(abar, M, r))
        assert vec[r] == pytest.approx(want, rel=1e-11)
        assert q_r_exact(e, r) == pytest.approx(want, rel=1e-12)


@given(abars, Ms)
def test_spectrum_sums_to_M(abar, M):
    q = q_spectrum(SymmetricEnsemble(abar, M))
    assert math.fsum(q) == pytest.approx(M, rel=1e-12)
    assert q.min() <= 1.0 + 1e-12 <= q.max() + 2e-12


@given(st.floats(0.0, 6.0), st.floats(0.0, 0.5), st.integers(2, 12))
def test_success_grows_with_amplitude(abar, step, M):
    assert usd_probability(abar + step, M) >= usd_probability(abar, M) - 1e-12


def test_q_r_bounds():
    with pytest.raises(ValueError):
        q_r_exact(SymmetricEnsemble(1.0, 4), 4)


def test_dense_approximation_formula():
    e = SymmetricEnsemble(0.8, 5)
    want = 5 * math.exp(-0.64) * 0.64**4 / 24
    assert usd_success_dense(e) == pytest.approx(want, rel=1e-14)
    with pytest.raises(ValueError):
        usd_success_dense(SymmetricEnsemble(1.0, 1))


def test_remainder_and_chernoff():
    e = SymmetricEnsemble(1.0, 5)
    # exact remainder sum_{k>=1} 1/(5k+4)! from the oracle
    assert exact_remainder(e) == pytest.approx(2.7557433931524074318e-6, rel=1e-13)
    assert chernoff_remainder(e) == pytest.approx(2.0915475968993947575e-5, rel=1e-13)
    with pytest.raises(RegimeError):
        chernoff_remainder(SymmetricEnsemble(3.0, 4))


@given(st.floats(0.05, 4.0), st.integers(2, 20))
def test_chernoff_bounds_remainder(abar, M):
    e = SymmetricEnsemble(abar, M)
    if 2 * M - 1 <= abar * abar:
        return
    assert exact_remainder(e) <= chernoff_remainder(e) * (1 + 1e-12)


@pytest.mark.parametrize("z,q", [(0.0, 0.1), (0.3, 0.5), (1.2, 0.9), (2.0, 0.0)])
def test_theta3_matches_mpmath(z, q):
    assert jacobi_theta3(z, q) == pytest.approx(float(mp.jtheta(3, z, q)), rel=1e-13)


def test_theta3_regime():
    with pytest.raises(RegimeError):
        jacobi_theta3(0.0, 1.0)


def test_sparse_forms_converge_at_large_amplitude():
    e = SymmetricEnsemble(6.0, 8)
    exact = usd_probability(6.0, 8)
    assert usd_success_sparse(e) == pytest.approx(exact, abs=1e-4)
    assert usd_success_sparse(e, "theta") == pytest.approx(exact, abs=1e-4)
    with pytest.raises(RegimeError):
        usd_success_sparse(SymmetricEnsemble(0.0, 4))
    with pytest.raises(ValueError):
        usd_success_sparse(e, "bogus")


def test_theta_form_when_aleph_vanishes():
    # abar^2 / M an integer, so aleph = 0; what remains is the Poisson-to-Gaussian error
    e = SymmetricEnsemble(math.sqrt(40.0), 8)
    assert usd_success_sparse(e, "theta") == pytest.approx(float(mp_usd(e.abar, 8)), abs=5e-3)


def test_a_of_epsilon():
    assert a_of_epsilon(0.1) == pytest.approx(-math.log(0.05) / (2 * math.pi**2), rel=1e-15)
    a = a_of_epsilon(0.1, "numeric", M=20)
    assert usd_probability(20 * math.sqrt(a), 20) == pytest.approx(0.9, abs=1e-6)
    with pytest.raises(AmplifierError):
        a_of_epsilon(0.0)
    with pytest.raises(ValueError):
        a_of_epsilon(0.1, "numeric", M=1)


def test_fit_needs_two_eps_values():
    with pytest.raises(ValueError):
        fit_a_epsilon([0.1], [20])
    with pytest.raises(ValueError):
        fit_a_epsilon([0.1, 0.7], [20])
    with pytest.raises(ValueError):
        fit_a_epsilon([0.1, 0.01], [50])


def test_two_point_fit_is_exact():
    fit = fit_a_epsilon([0.1, 0.01], [20])
    assert fit.residual_rms < 1e-15
    assert not fit.failures
    (e0, a0), (e1, a1) = sorted(fit.samples)
    assert fit.slope == pytest.approx((a1 - a0) / (math.log(e1) - math.log(e0)))


def test_analytic_fit_recovers_analytic_line():
    fit = fit_a_epsilon([0.5, 0.1, 1e-3, 1e-5], [20], mode="analytic")
    assert fit.slope == pytest.approx(-1 / (2 * math.pi**2), rel=1e-12)
    assert fit.intercept == pytest.approx(math.log(2) / (2 * math.pi**2), rel=1e-12)


@given(st.floats(1.0001, 10.0), st.floats(0.0, 4.0))
def test_two_state_bounds(g, d):
    h = helstrom_two(0j, d, g)
    u = usd_two(0j, d, g)
    assert u.bound == pytest.approx(h.bound**2, rel=1e-12)
    assert 1 / g**2 - 1e-12 <= u.bound <= 1.0
    assert h.p_before <= h.p_after + 1e-15


def test_two_state_limits():
    assert helstrom_two(1j, 1j, 3.0).bound == pytest.approx(1 / 3)
    assert usd_two(1j, 1j, 3.0).bound == pytest.approx(1 / 9)
    assert helstrom_two(0, 1e-9, 3.0).bound == pytest.approx(1 / 3, rel=1e-9)


@pytest.mark.parametrize("g", [1.5, 3.0])
@pytest.mark.parametrize("M", [2, 5])
def test_amplifier_bound_limits(g, M):
    assert amplifier_usd_bound(SymmetricEnsemble(0.0, M), g) == disk_bound(M, g)
    e = SymmetricEnsemble(0.05, M)
    assert dense_dense_bound(e, g) == pytest.approx(
        usd_success_dense(e) / usd_success_dense(e.scaled(g)), rel=1e-12
    )
    assert dense_sparse_bound(e) == usd_success_dense(e)


def test_reciprocal_basis_and_failure_operator():
    e = SymmetricEnsemble(1.5, 4)
    basis = build_reciprocal_basis(e)
    assert np.allclose(basis.gram(), np.eye(4), atol=1e-12)
    assert failure_spectrum(basis).min() >= -1e-12
    for r, g in enumerate(basis.gamma):
        n = np.nonzero(np.abs(g.amps) > 0)[0]
        assert np.all(n % 4 == r)
        assert g.norm2 == pytest.approx(1.0, abs=1e-12)


def test_near_degenerate_basis():
    with pytest.raises(NearDegenerateError):
        build_reciprocal_basis(SymmetricEnsemble(0.1, 8))


def test_mismatched_ensemble():
    basis = build_reciprocal_basis(SymmetricEnsemble(1.5, 4))
    with pytest.raises(ConfigurationError):
        usd_amp_apply(basis, SymmetricEnsemble(1.5, 5), 2.0, coherent(1.5))


def test_usd_amplifier_on_off_ensemble_input():
    e = SymmetricEnsemble(2.0, 4)
    basis = build_reciprocal_basis(e)
    branches = usd_amp_apply(basis, e, 2.0, coherent(2.0j, basis.cutoff))
    assert [round(b.prob, 12) for b in branches] == [0.0, round(usd_probability(2.0, 4), 12), 0.0, 0.0]
    # a state between two ensemble members fires both neighbouring branches
    mid = coherent(2.0 * np.exp(1j * np.pi / 4), basis.cutoff)
    branches = usd_amp_apply(basis, e, 2.0, mid)
    assert branch_fidelity(branches, coherent(4.0 * np.exp(1j * np.pi / 4), 80)) < 0.5
    assert branch_fidelity([], FockVector.vacuum()) == 0.0
