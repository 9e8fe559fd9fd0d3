"""Heat expansions, the zeta dictionary, and Weyl counting fits."""

import math
from fractions import Fraction

import numpy as np
import pytest

from hres import (
    ConfigurationError,
    DomainError,
    HeatExpansion,
    PreconditionError,
    SpectrumSample,
    extract_heat,
    fit_heat_samples,
    heat_model,
    heat_to_zeta,
    load_spectrum,
    load_trace_samples,
    mellin_top_residue,
    synthesize_trace,
    weyl_fit,
    weyl_nu0,
    zeta_res_to_ncres,
)

PI2 = math.pi**2


def _s3_expansion():
    return HeatExpansion(m=2, Q=4,
                         a_coeffs={0: PI2 / 16, 2: PI2 / 16, 4: PI2 / 32})


def test_expansion_validation():
    with pytest.raises(DomainError):
        HeatExpansion(m=0, Q=4, a_coeffs={})
    with pytest.raises(DomainError):
        HeatExpansion(m=2, Q=4, a_coeffs={-1: 1.0})
    with pytest.raises(DomainError):
        HeatExpansion(m=2, Q=4, a_coeffs={1: 0.5}, differential=True)
    with pytest.raises(DomainError):
        HeatExpansion(m=2, Q=4, a_coeffs={}, b_coeffs={1: 0.5}, differential=True)


def test_expansion_unknown_versus_certified_zero():
    plain = HeatExpansion(m=2, Q=4, a_coeffs={0: 1.0})
    assert plain.a(1) is None
    assert plain.b(1) is None
    diff = HeatExpansion(m=2, Q=4, a_coeffs={0: 1.0}, differential=True)
    assert diff.a(1) == 0.0
    assert diff.b(1) == 0.0
    assert diff.a(2) is None


def test_zeta_dictionary_positions_and_residues():
    sings = {s.location: s for s in heat_to_zeta(_s3_expansion())}
    top = sings[Fraction(2)]
    assert top.kind.value == "SimplePole"
    # residue a_0 / Gamma(2) = a_0
    assert math.isclose(top.amount, PI2 / 16, rel_tol=1e-12)
    mid = sings[Fraction(1)]
    assert math.isclose(mid.amount, PI2 / 16, rel_tol=1e-12)
    origin = sings[Fraction(0)]
    assert origin.kind.value == "RegularValue"
    assert math.isclose(origin.amount, PI2 / 32, rel_tol=1e-12)


def test_zeta_kernel_dimension_shifts_origin_only():
    h = HeatExpansion(m=2, Q=4, a_coeffs={0: 1.0, 2: 2.0, 4: 3.0}, dim_ker=5)
    sings = {s.location: s for s in heat_to_zeta(h)}
    assert math.isclose(sings[Fraction(0)].amount, 3.0 - 5.0, rel_tol=1e-12)
    assert math.isclose(sings[Fraction(2)].amount, 1.0, rel_tol=1e-12)


def test_residue_conversions():
    assert zeta_res_to_ncres(6.0, 2) == 3.0
    with pytest.raises(DomainError):
        zeta_res_to_ncres(6.0, 0)
    assert weyl_nu0(PI2 / 8, 4) == PI2 / 32
    with pytest.raises(DomainError):
        weyl_nu0(1.0, 0)


def test_fit_recovers_synthesized_coefficients():
    h = _s3_expansion()
    trace = synthesize_trace(h)
    ts = np.geomspace(1e-4, 1e-2, 60)
    fitted = fit_heat_samples(ts, trace(ts), m=2, Q=4)
    # the depth-6 basis carries two superfluous columns, which cost the
    # constant coefficient a few parts in 1e9 of absolute accuracy
    for j, want in h.a_coeffs.items():
        assert abs(fitted.a(j) - want) < 1e-8


def test_extract_heat_round_trip_with_log_term():
    h = HeatExpansion(m=2, Q=4, a_coeffs={0: 2.0, 2: -1.0, 4: 0.5},
                      b_coeffs={1: 0.25})
    # the t*log(t) column is nearly collinear with the constant and t columns
    # over a two-decade window, so this fit needs three decades to resolve a(4)
    fitted = extract_heat(synthesize_trace(h), m=2, Q=4, depth=6, log_depth=1,
                          t_min=1e-4, t_max=1e-1)
    for j, want in h.a_coeffs.items():
        assert abs(fitted.a(j) - want) < 1e-7
    assert abs(fitted.b(1) - 0.25) < 1e-5


def test_mellin_residue_against_top_coefficient():
    trace = synthesize_trace(_s3_expansion())
    got = mellin_top_residue(trace, m=2, Q=4)
    want = (PI2 / 16) / math.gamma(2.0)
    assert abs(got - want) / want < 1e-4


def test_weyl_fit_on_exact_counting_law():
    nu0 = PI2 / 32
    ks = np.arange(1, 2001, dtype=float)
    sample = SpectrumSample(tuple((ks / nu0) ** 0.5), m=2, Q=4)
    nu0_hat, exponent_hat = weyl_fit(sample)
    assert abs(nu0_hat - nu0) / nu0 < 1e-10
    assert abs(exponent_hat - 0.5) < 1e-10


def test_spectrum_sample_validation():
    with pytest.raises(DomainError):
        SpectrumSample((3.0, 2.0, 1.0) * 40, m=2, Q=4)
    with pytest.raises(DomainError):
        SpectrumSample((-1.0,) * 120, m=2, Q=4)


def test_weyl_fit_needs_enough_eigenvalues():
    small = tuple(float(k) for k in range(1, 50))
    with pytest.raises((DomainError, PreconditionError)):
        weyl_fit(SpectrumSample(small, m=2, Q=4))


def test_load_spectrum_skips_comments(tmp_path):
    nu0 = 0.5
    lines = ["# header", ""]
    lines += [f"{(k / nu0) ** 0.5:.17g}  # entry" for k in range(1, 151)]
    path = tmp_path / "spec.txt"
    path.write_text("\n".join(lines))
    sample = load_spectrum(path, 2, 4)
    assert len(sample) == 150


def test_load_trace_samples_feeds_the_fitter(tmp_path):
    h = _s3_expansion()
    trace = synthesize_trace(h)
    ts = np.geomspace(1e-4, 1e-2, 50)
    rows = ["t,value", "# synthetic S3 trace"]
    rows += [f"{t:.17g},{v:.17g}" for t, v in zip(ts, trace(ts))]
    path = tmp_path / "trace.csv"
    path.write_text("\n".join(rows))
    got_ts, got_vals = load_trace_samples(path)
    assert len(got_ts) == 50
    fitted = fit_heat_samples(got_ts, got_vals, m=2, Q=4)
    for j, want in h.a_coeffs.items():
        assert abs(fitted.a(j) - want) < 1e-8


def test_load_trace_samples_errors(tmp_path):
    bad_cols = tmp_path / "cols.csv"
    bad_cols.write_text("0.1,2.0,extra\n")
    with pytest.raises(ConfigurationError):
        load_trace_samples(bad_cols)
    bad_row = tmp_path / "row.csv"
    bad_row.write_text("0.1,2.0\nnot,numeric\n")
    with pytest.raises(ConfigurationError):
        load_trace_samples(bad_row)
    empty = tmp_path / "empty.csv"
    empty.write_text("# nothing here\n")
    with pytest.raises(ConfigurationError):
        load_trace_samples(empty)


def test_heat_model_lookup():
    trace = heat_model("s3-sublaplacian")
    t = 0.01
    assert math.isclose(trace(t), math.exp(t) * PI2 / (16 * t * t),
                        rel_tol=1e-12)
    with pytest.raises(ConfigurationError):
        heat_model("unobtainium")
