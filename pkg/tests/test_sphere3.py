"""Contact-form quadrature on the 3-sphere and the volume chain."""

import dataclasses
import json
import math

import numpy as np
import pytest

from hres import (
    ConfigurationError,
    ContactModel,
    DomainError,
    HeatGammaRegistry,
    PreconditionError,
    S3_HEAT_GAMMAS,
    area_dim3,
    area_factor,
    contact_integral,
    contact_model,
    contact_volume,
    gamma_from_heat,
    load_contact_model,
    lower_volume,
)

PI2 = math.pi**2
AREA_S3 = PI2 / (8.0 * math.sqrt(2.0))


@pytest.fixture(scope="module")
def s3():
    return contact_model("s3-standard")


def test_unknown_model_name():
    with pytest.raises(ConfigurationError):
        contact_model("s5-standard")


def test_volume_converges_to_pi_squared(s3):
    got = contact_volume(s3, nodes=48)
    assert abs(got - PI2) / PI2 < 1e-6


def test_volume_atlas_independence(s3):
    std = contact_volume(s3, nodes=64)
    rot = contact_volume(s3, atlas="rotated", nodes=64)
    assert abs(std - rot) / PI2 < 1e-7


def test_volume_thread_count_does_not_change_bits(s3):
    serial = contact_volume(s3, nodes=48)
    threaded = contact_volume(s3, nodes=48, threads=3)
    assert serial == threaded


def test_curvature_integral(s3):
    got = contact_integral(s3, s3.scalar_curvature, nodes=64)
    assert abs(got - 4.0 * PI2) / (4.0 * PI2) < 1e-7


def test_area(s3):
    got = area_dim3(s3)
    assert abs(got - AREA_S3) / AREA_S3 < 1e-6


def test_area_needs_dimension_three():
    flat5 = ContactModel(
        name="toy5", n=2,
        theta_form=lambda x: 0.1 * np.ones_like(x),
        scalar_curvature=lambda x: np.ones(x.shape[0]),
    )
    with pytest.raises(PreconditionError):
        area_dim3(flat5)


def test_form_scaling_is_quadratic(s3):
    # theta -> c*theta multiplies theta ^ dtheta by c^2 at n = 1,
    # exactly, node for node
    c = 1.7
    scaled = dataclasses.replace(
        s3,
        name="s3-scaled",
        theta_form=lambda x: c * _standard_theta_copy(x),
        dtheta_form=lambda x: c * s3.dtheta_form(x),
        known_volume=c * c * PI2,
    )
    v0 = contact_volume(s3, nodes=24)
    v1 = contact_volume(scaled, nodes=24)
    assert abs(v1 - c * c * v0) < 1e-12 * abs(v1)


def _standard_theta_copy(x):
    out = np.empty_like(x)
    out[:, 0::2] = -0.5 * x[:, 1::2]
    out[:, 1::2] = 0.5 * x[:, 0::2]
    return out


def test_numeric_dtheta_fallback(s3):
    finite_diff = dataclasses.replace(s3, name="s3-fd", dtheta_form=None)
    exact = contact_volume(s3, nodes=32)
    approx = contact_volume(finite_diff, nodes=32)
    assert abs(exact - approx) < 1e-10 * PI2


def test_lower_volumes(s3):
    assert lower_volume(S3_HEAT_GAMMAS, s3, 1) == 0.0
    assert lower_volume(S3_HEAT_GAMMAS, s3, 3) == 0.0
    top = lower_volume(S3_HEAT_GAMMAS, s3, 4)
    assert abs(top - PI2) / PI2 < 1e-6
    area = lower_volume(S3_HEAT_GAMMAS, s3, 2)
    assert abs(area - AREA_S3) / AREA_S3 < 1e-6


def test_lower_volume_rejects_bad_k(s3):
    with pytest.raises(DomainError):
        lower_volume(S3_HEAT_GAMMAS, s3, 0)
    with pytest.raises(DomainError):
        lower_volume(S3_HEAT_GAMMAS, s3, 6)


def test_lower_volume_rejects_rank_mismatch(s3):
    other = HeatGammaRegistry(n=2, gamma0=1.0, gamma1_prime=1.0)
    with pytest.raises(DomainError):
        lower_volume(other, s3, 2)


def test_gamma_registry_validation():
    with pytest.raises(DomainError):
        HeatGammaRegistry(n=1, gamma0=0.0, gamma1_prime=1.0)
    with pytest.raises(DomainError):
        HeatGammaRegistry(n=1, gamma0=1.0, gamma1_prime=-2.0)


def test_area_factor_value():
    want = 1.0 / (32.0 * math.sqrt(2.0))
    assert abs(area_factor(S3_HEAT_GAMMAS) - want) / want < 1e-12


def test_gamma_from_heat_inverts_the_chain(s3):
    g0, g1p = gamma_from_heat(PI2 / 16.0, PI2 / 16.0, s3)
    assert abs(g0 - 1.0 / 16.0) * 16.0 < 1e-6
    assert abs(g1p - 1.0 / 64.0) * 64.0 < 1e-6


def test_gamma_from_heat_rejects_flat_curvature(s3):
    flat = dataclasses.replace(
        s3, name="s3-flat", scalar_curvature=lambda x: np.zeros(x.shape[0])
    )
    with pytest.raises(DomainError):
        gamma_from_heat(1.0, 1.0, flat)


def test_model_file_round_trip(tmp_path, s3):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({
        "name": "s3-from-file",
        "n": 1,
        "theta": "pairwise-rotation",
        "scalar_curvature": 4.0,
        "known_volume": PI2,
    }))
    loaded = load_contact_model(path)
    assert loaded.dim == 3
    got = contact_volume(loaded, nodes=32)
    assert abs(got - contact_volume(s3, nodes=32)) < 1e-14


def test_model_file_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_contact_model(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "name": "x", "n": 1, "theta": "moebius", "scalar_curvature": 1.0,
    }))
    with pytest.raises(ConfigurationError):
        load_contact_model(bad)
    nonnumeric = tmp_path / "nonnumeric.json"
    nonnumeric.write_text(json.dumps({
        "name": "x", "n": 1, "theta": "pairwise-rotation",
        "scalar_curvature": "R",
    }))
    with pytest.raises(ConfigurationError):
        load_contact_model(nonnumeric)
