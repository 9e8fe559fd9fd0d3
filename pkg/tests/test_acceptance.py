"""Acceptance suite: the twelve shipping criteria, one line of output each.

Run with `pytest -s tests/test_acceptance.py` to see the PASS/FAIL lines;
each test also asserts, so a plain pytest run fails loudly if a criterion
slips.  Tolerances are the shipping contract, not the observed accuracy,
which is usually orders of magnitude better.
"""

import math
import time
from fractions import Fraction

import numpy as np
from scipy import integrate

import hres.constants as constants_mod
from hres import (
    ExpBump,
    GaussianBump,
    GaugedFamily,
    GradedSpace,
    HeatExpansion,
    HeatGammaRegistry,
    PolyBump,
    SpectrumSample,
    SymbolExpansion,
    area_dim3,
    area_factor,
    build_extension,
    c_alpha,
    contact_model,
    contact_volume,
    extract_heat,
    gamma_from_heat,
    gauged_laurent,
    heat_model,
    heat_to_zeta,
    koranyi_power,
    mellin_top_residue,
    normalization_ratio,
    pair,
    pair_scaled,
    residue_density,
    rho,
    scaling_defect,
    sphere_integral,
    synthesize_trace,
    weyl_fit,
)

PI2 = math.pi**2
SPACE = GradedSpace(2)


def _report(num: int, ok: bool, what: str, detail: str) -> None:
    print(f"C{num:02d} {'PASS' if ok else 'FAIL'}  {what}  [{detail}]")
    assert ok, f"criterion {num}: {what} ({detail})"


def _sinh_kernel(x: float) -> float:
    # x / sinh x in overflow-proof form 2x e^{-x} / (1 - e^{-2x})
    if x == 0.0:
        return 1.0
    return 2.0 * x * math.exp(-x) / (1.0 - math.exp(-2.0 * x))


def test_c01_rho_anchor_under_a_second():
    constants_mod._rho_cached.cache_clear()
    started = time.perf_counter()
    got = rho(1, 0.0)
    elapsed = time.perf_counter() - started
    oracle, quad_err = integrate.quad(_sinh_kernel, 0.0, 60.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    oracle /= math.pi**2
    assert quad_err < 1e-12
    dev = abs(got - oracle)
    ok = dev <= 1e-9 and abs(got - 0.25) <= 1e-9 and elapsed < 1.0
    _report(1, ok, "rho(1, 0) = 1/4 against the sinh-integral oracle",
            f"dev {dev:.2e}, {elapsed * 1e3:.0f} ms")


def test_c02_rho_evenness_on_grids():
    worst = 0.0
    for n in (1, 2):
        for mu in np.linspace(-0.9 * n, 0.9 * n, 9):
            worst = max(worst, abs(rho(n, mu) - rho(n, -mu)))
    _report(2, worst <= 1e-11, "rho evenness over 9-point grids, n = 1, 2",
            f"max asymmetry {worst:.2e}")


def test_c03_sphere_dual_method_agreement():
    g = lambda w: np.ones(np.asarray(w).shape[0])
    started = time.perf_counter()
    chart = float(sphere_integral(SPACE, g, method="chart"))
    shell = float(sphere_integral(SPACE, g, method="shell"))
    elapsed = time.perf_counter() - started
    rel = abs(chart - shell) / abs(shell)
    ok = rel <= 1e-6 and elapsed < 30.0
    _report(3, ok, "pseudo-sphere measure: chart rule vs shell oracle",
            f"rel {rel:.2e}, {elapsed:.1f} s")


def test_c04_homogeneous_scaling_and_bump_independence():
    symbol = koranyi_power(SPACE, -4.5)
    tau = build_extension(symbol)
    u = GaussianBump(SPACE, [1.0, 1.25, 1.5])
    base = complex(pair(tau, u))
    worst = 0.0
    for lam in (0.5, 2.0, 4.0):
        predicted = lam**-4.5 * base
        measured = complex(pair_scaled(tau, u, lam))
        worst = max(worst, abs(measured - predicted) / abs(predicted))
    v_exp = complex(pair(build_extension(symbol, g=ExpBump()), u))
    v_poly = complex(pair(build_extension(symbol, g=PolyBump()), u))
    bump_dev = abs(v_exp - v_poly) / abs(v_exp)
    ok = worst <= 1e-6 and bump_dev <= 1e-7
    _report(4, ok, "degree -4.5 scaling law and cutoff-bump independence",
            f"residual {worst:.2e}, bump dev {bump_dev:.2e}")


def test_c05_log_homogeneity_slope_and_intercept():
    tau = build_extension(koranyi_power(SPACE, -4.0))
    u = GaussianBump(SPACE, [1.0, 1.25, 1.5])
    lambdas = np.array([0.5, 2.0, 4.0, 8.0])
    ys = np.array([
        complex(scaling_defect(tau, u, lam)).real / lam**-4.0
        for lam in lambdas
    ])
    slope, intercept = np.polyfit(np.log(lambdas), ys, 1)
    target = complex(c_alpha(tau.symbol, (0, 0, 0))).real * complex(
        u.value(np.zeros((1, 3)))[0]
    ).real
    rel = abs(slope - target) / abs(target)
    ok = rel <= 1e-5 and abs(intercept) <= 1e-7
    _report(5, ok, "degree -4 log law: slope = c_0(p) u(0), zero intercept",
            f"slope rel {rel:.2e}, intercept {abs(intercept):.2e}")


def test_c06_gauged_pole_matches_density():
    expansion = SymbolExpansion(SPACE, [koranyi_power(SPACE, -4.0)])
    fit = gauged_laurent(GaugedFamily(expansion))
    sphere = residue_density(expansion).sphere_part
    rel = abs(abs(complex(fit.residue)) - abs(sphere)) / abs(sphere)
    _report(6, rel <= 1e-4, "Laurent pole of the gauged family vs density",
            f"rel {rel:.2e}")


def test_c07_s3_volume():
    model = contact_model("s3-standard")
    started = time.perf_counter()
    got = contact_volume(model)
    elapsed = time.perf_counter() - started
    rel = abs(got - PI2) / PI2
    ok = rel <= 1e-6 and elapsed < 60.0
    _report(7, ok, "contact volume of the standard 3-sphere = pi^2",
            f"rel {rel:.2e}, {elapsed:.1f} s")


def test_c08_s3_heat_chain():
    fit = extract_heat(heat_model("s3-sublaplacian"), m=2, Q=4,
                       t_min=1e-5, t_max=1e-3)
    targets = {0: PI2 / 16, 2: PI2 / 16, 4: PI2 / 32}
    worst_a = max(abs(fit.a(j) - v) / v for j, v in targets.items())
    model = contact_model("s3-standard")
    g0, g1p = gamma_from_heat(fit.a(0), fit.a(2), model)
    dev_g = max(abs(g0 - 1 / 16) * 16, abs(g1p - 1 / 64) * 64)
    ok = worst_a <= 1e-5 and dev_g <= 1e-6
    _report(8, ok, "heat coefficients and inverted gamma constants",
            f"a rel {worst_a:.2e}, gamma rel {dev_g:.2e}")


def test_c09_s3_area_and_universal_factor():
    model = contact_model("s3-standard")
    area = area_dim3(model)
    want_area = PI2 / (8 * math.sqrt(2))
    rel_area = abs(area - want_area) / want_area
    fit = extract_heat(heat_model("s3-sublaplacian"), m=2, Q=4,
                       t_min=1e-5, t_max=1e-3)
    g0, g1p = gamma_from_heat(fit.a(0), fit.a(2), model)
    factor = area_factor(HeatGammaRegistry(n=1, gamma0=g0, gamma1_prime=g1p))
    want_factor = 1 / (32 * math.sqrt(2))
    rel_factor = abs(factor - want_factor) / want_factor
    ok = rel_area <= 1e-6 and rel_factor <= 1e-6
    _report(9, ok, "area pi^2/(8 sqrt 2) and pipeline factor 1/(32 sqrt 2)",
            f"area rel {rel_area:.2e}, factor rel {rel_factor:.2e}")


def test_c10_weyl_estimator_on_synthetic_spectrum():
    nu0 = PI2 / 32
    ks = np.arange(1, 10_001, dtype=float)
    sample = SpectrumSample(tuple((ks / nu0) ** 0.5), m=2, Q=4)
    nu0_hat, exponent_hat = weyl_fit(sample)
    rel_nu = abs(nu0_hat - nu0) / nu0
    rel_exp = abs(exponent_hat - 0.5) / 0.5
    ok = rel_nu <= 0.01 and rel_exp <= 0.005
    _report(10, ok, "Weyl fit on 10^4 synthetic eigenvalues",
            f"nu0 rel {rel_nu:.2e}, exponent rel {rel_exp:.2e}")


def test_c11_dictionary_round_trip_and_mellin():
    h = HeatExpansion(m=2, Q=4, a_coeffs={0: PI2 / 16, 2: PI2 / 16,
                                          4: PI2 / 32})
    trace = synthesize_trace(h)
    fitted = extract_heat(trace, m=2, Q=4, t_min=1e-4, t_max=1e-2)
    worst = max(abs(fitted.a(j) - v) for j, v in h.a_coeffs.items())
    sings = {s.location: s for s in heat_to_zeta(fitted)}
    top = sings[Fraction(2)].amount
    mellin = mellin_top_residue(trace, m=2, Q=4)
    mellin_dev = abs(mellin - top) / abs(top)
    ok = worst <= 1e-8 and mellin_dev <= 1e-4
    _report(11, ok, "heat -> zeta -> trace round trip with Mellin cross-check",
            f"coeff dev {worst:.2e}, mellin rel {mellin_dev:.2e}")


def test_c12_normalization_ratio_report():
    first = normalization_ratio(1, 1.0 / 16.0)
    constants_mod._rho_cached.cache_clear()
    second = normalization_ratio(1, 1.0 / 16.0)
    finite = math.isfinite(first)
    reproducible = abs(first - second) <= 1e-9
    # documented outcome: the chain lands near 1/16, not 1; asserting
    # r = 1 would hard-code away the convention mismatch, so the check
    # pins the reported value instead
    documented = abs(first - 1.0 / 16.0) <= 1e-6
    ok = finite and reproducible and documented
    _report(12, ok, "normalization ratio r1 finite, reproducible, near 1/16",
            f"r1 = {first:.12g}, drift {abs(first - second):.1e}")
