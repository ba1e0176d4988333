import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from immaculate.errors import AmplifierError
from immaculate.gaussian import (
    GaussianAmpSpec,
    cloning_fidelity,
    fidelity_mu,
    output_q,
    output_stats,
    pfp_bound,
    snr_resolvability_bound,
    success_bound_mu,
)

gains = st.floats(1.0001, 20.0)
mu2s = st.floats(0.0, 5.0)


@given(gains, mu2s)
def test_variance_ladder(g, mu2):
    s = output_stats(GaussianAmpSpec(g, mu2), 1 + 2j)
    assert s.mean == pytest.approx(g * (1 + 2j))
    assert s.var_W - s.var_P == pytest.approx(0.5)
    assert s.var_Q - s.var_W == pytest.approx(0.5)


@given(gains, mu2s)
def test_pfp_is_inverse_gain_squared(g, mu2):
    assert pfp_bound(GaussianAmpSpec(g, mu2)) == pytest.approx(1 / g**2, abs=1e-12)


@given(gains, mu2s)
def test_fidelity_is_pi_times_q_at_target(g, mu2):
    spec = GaussianAmpSpec(g, mu2)
    alpha = 0.7 - 0.3j
    assert math.pi * output_q(spec, alpha, g * alpha) == pytest.approx(fidelity_mu(spec), rel=1e-12)


def test_output_q_is_normalized():
    spec = GaussianAmpSpec(2.0, 0.5)
    c = 2.0 * (1 + 1j)
    val, _ = integrate.dblquad(
        lambda y, x: output_q(spec, 1 + 1j, complex(x, y)), c.real - 12, c.real + 12, c.imag - 12, c.imag + 12
    )
    assert val == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize(
    "mu2,F,P",
    [(1.0, 1 / 4, 1.0), (0.5, 2 / 5, 5 / 8), (0.0, 1.0, 1 / 4)],
)
def test_named_amplifiers_at_gain_two(mu2, F, P):
    spec = GaussianAmpSpec(2.0, mu2)
    assert fidelity_mu(spec) == pytest.approx(F)
    assert success_bound_mu(spec) == pytest.approx(P)


def test_physical_flag():
    assert GaussianAmpSpec(2.0, 1.0).physical
    assert GaussianAmpSpec(2.0, 3.0).physical
    assert not GaussianAmpSpec(2.0, 0.5).physical


def test_success_bound_monotone_in_mu2():
    vals = [success_bound_mu(GaussianAmpSpec(3.0, m)) for m in np.linspace(0, 1, 11)]
    assert vals == sorted(vals)
    assert vals[-1] == 1.0


@pytest.mark.parametrize("g,mu2", [(1.0, 0.5), (0.5, 0.5), (2.0, -0.1)])
def test_invalid_specs(g, mu2):
    with pytest.raises(ValueError):
        GaussianAmpSpec(g, mu2)


def test_resolvability_bound():
    assert snr_resolvability_bound(1.5) == pytest.approx(math.sqrt(2) * 1.5)
    with pytest.raises(ValueError):
        snr_resolvability_bound(-1.0)


def test_cloning():
    assert cloning_fidelity(1) == 1.0
    assert cloning_fidelity(2) == pytest.approx(2 / 3)
    assert cloning_fidelity(3) == pytest.approx(3 / 5)
    with pytest.raises(AmplifierError):
        cloning_fidelity(0)
