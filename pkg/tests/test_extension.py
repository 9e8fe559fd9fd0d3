"""Cutoff extensions and their (log-)homogeneity scaling laws."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hres import (
    CutoffProfile,
    DomainError,
    ExpBump,
    GaussianBump,
    GradedSpace,
    MonomialGaussian,
    PolyBump,
    PreconditionError,
    Regime,
    build_extension,
    c_alpha,
    classify_regime,
    dilate,
    koranyi_power,
    odd_x1,
    pair,
    pair_scaled,
    predicted_scaling_defect,
    scaling_defect,
)

SPHERE_CONST_D2 = math.sqrt(math.pi) * math.gamma(0.25) ** 2

SPACE = GradedSpace(2)


def _bump(scale=1.0):
    return GaussianBump(SPACE, [scale, 1.25 * scale, 1.5 * scale])


def test_regime_classification():
    q = 4
    assert classify_regime(-3.9, q) is Regime.INTEGRABLE
    assert classify_regime(-4.0, q) is Regime.LOG_HOMOGENEOUS
    assert classify_regime(-5.0, q) is Regime.LOG_HOMOGENEOUS
    assert classify_regime(-4.5, q) is Regime.HOMOGENEOUS
    assert classify_regime(-4.0 + 1.0j, q) is Regime.HOMOGENEOUS
    assert classify_regime(-3.0 + 5.0j, q) is Regime.INTEGRABLE


@given(k=st.integers(0, 6))
def test_regime_every_nonpositive_integer_offset_logs(k):
    assert classify_regime(-4 - k, 4) is Regime.LOG_HOMOGENEOUS


@given(
    t=st.floats(0.2, 5.0),
    xi=st.lists(st.floats(-3.0, 3.0), min_size=3, max_size=3).filter(
        lambda v: sum(abs(x) for x in v) > 1e-3
    ),
)
@settings(max_examples=30)
def test_symbol_homogeneity(t, xi):
    p = koranyi_power(SPACE, -4.5)
    xi = np.array([xi])
    scaled = p(dilate(SPACE, t, xi))[0]
    assert np.isclose(scaled, t**-4.5 * p(xi)[0], rtol=1e-10)


def test_gaussian_bump_dilation_identity():
    u = _bump()
    xi = np.array([[0.3, -0.7, 1.1]])
    for t in (0.5, 2.0):
        assert np.isclose(u.dilated(t).value(xi)[0],
                          u.value(dilate(SPACE, t, xi))[0], rtol=1e-12)


def test_gaussian_bump_moment_parity():
    u = _bump()
    assert u.moment((1, 0, 0)) == 0.0
    assert u.moment((0, 1, 2)) == 0.0
    even = u.moment((2, 0, 2))
    assert even.real > 0.0 and even.imag == 0.0


def test_gaussian_bump_needs_matching_scales():
    with pytest.raises(DomainError):
        GaussianBump(SPACE, [1.0, 1.0])
    with pytest.raises(DomainError):
        GaussianBump(SPACE, [1.0, -1.0, 1.0])


def test_monomial_gaussian_derivative_parity():
    u = MonomialGaussian(SPACE, (0, 1, 0), [1.0, 1.0, 1.0])
    # odd total parity in coordinate 1: only alphas odd there survive
    assert u.derivatives_at_0((0, 0, 0)) == 0.0
    assert u.derivatives_at_0((0, 1, 0)) != 0.0


def test_obstruction_coefficient_at_zero_index():
    p = koranyi_power(SPACE, -4.0)
    c0 = complex(c_alpha(p, (0, 0, 0)))
    assert abs(c0.real - SPHERE_CONST_D2) / SPHERE_CONST_D2 < 1e-8
    assert c0.imag == 0.0


def test_obstruction_vanishes_for_odd_symbol():
    p = odd_x1(SPACE, -4.0)
    c0 = complex(c_alpha(p, (0, 0, 0)))
    assert abs(c0) < 1e-9 * SPHERE_CONST_D2


def test_build_extension_regimes():
    assert build_extension(koranyi_power(SPACE, -2.0)).regime is Regime.INTEGRABLE
    assert build_extension(koranyi_power(SPACE, -4.5)).regime is Regime.HOMOGENEOUS
    assert build_extension(koranyi_power(SPACE, -4.0)).regime is Regime.LOG_HOMOGENEOUS


def test_build_extension_rejects_subtraction_in_integrable_regime():
    with pytest.raises(DomainError):
        build_extension(koranyi_power(SPACE, -2.0), k=3)


def test_homogeneous_scaling_law():
    tau = build_extension(koranyi_power(SPACE, -4.5))
    u = _bump()
    base = complex(pair(tau, u))
    for lam in (0.5, 2.0):
        measured = complex(pair_scaled(tau, u, lam))
        predicted = lam**-4.5 * base
        assert abs(measured - predicted) / abs(predicted) < 1e-9


def test_integrable_extension_scales_without_defect():
    tau = build_extension(koranyi_power(SPACE, -2.0))
    u = _bump()
    base = complex(pair(tau, u))
    measured = complex(pair_scaled(tau, u, 2.0))
    assert abs(measured - 2.0**-2 * base) / abs(base) < 1e-9


def test_log_defect_matches_prediction():
    tau = build_extension(koranyi_power(SPACE, -4.0))
    u = _bump()
    lam = 2.0
    measured = complex(scaling_defect(tau, u, lam))
    predicted = complex(predicted_scaling_defect(tau, u, lam))
    assert abs(measured - predicted) / abs(predicted) < 1e-9


def test_defect_accessors_outside_log_regime():
    tau = build_extension(koranyi_power(SPACE, -4.5))
    u = _bump()
    with pytest.raises(PreconditionError):
        scaling_defect(tau, u, 2.0)
    assert predicted_scaling_defect(tau, u, 2.0) == 0.0


def test_bump_independence_of_homogeneous_pairing():
    symbol = koranyi_power(SPACE, -4.5)
    u = _bump()
    v_exp = complex(pair(build_extension(symbol, g=ExpBump()), u))
    v_poly = complex(pair(build_extension(symbol, g=PolyBump()), u))
    assert abs(v_exp - v_poly) / abs(v_exp) < 1e-9


def test_cutoff_profile_moments():
    profile = CutoffProfile([1.0, 2.0])
    assert abs(profile.exponential_moment(0.0) - 1.0) < 1e-10
    assert abs(profile.exponential_moment(1.0)) < 1e-10
    assert abs(profile.exponential_moment(2.0)) < 1e-10
