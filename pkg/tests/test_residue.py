"""Finite-part functionals, gauged Laurent analysis, residue densities."""

import math

import pytest

from hres import (
    DomainError,
    GaugedFamily,
    GradedSpace,
    ResidueDensity,
    SymbolExpansion,
    dixmier_value,
    gauged_laurent,
    global_res,
    koranyi_power,
    odd_x1,
    residue_density,
)

SPHERE_CONST_D2 = math.sqrt(math.pi) * math.gamma(0.25) ** 2

SPACE = GradedSpace(2)


def _critical():
    return SymbolExpansion(SPACE, [koranyi_power(SPACE, -4.0)])


def test_expansion_requires_unit_degree_steps():
    good = SymbolExpansion(
        SPACE, [koranyi_power(SPACE, -4.0), koranyi_power(SPACE, -5.0)]
    )
    assert len(good.components) == 2
    with pytest.raises(DomainError):
        SymbolExpansion(
            SPACE, [koranyi_power(SPACE, -4.0), koranyi_power(SPACE, -6.0)]
        )


def test_density_of_critical_power():
    dens = residue_density(_critical())
    assert abs(dens.sphere_part - SPHERE_CONST_D2) / SPHERE_CONST_D2 < 1e-8
    want = SPHERE_CONST_D2 / (2.0 * math.pi) ** 3
    assert abs(dens.value - want) / want < 1e-8
    assert dens.jacobian_included


def test_density_vanishes_without_critical_component():
    dens = residue_density(SymbolExpansion(SPACE, [koranyi_power(SPACE, -3.5)]))
    assert dens.value == 0.0 and dens.sphere_part == 0.0


def test_density_vanishes_for_odd_symbol():
    dens = residue_density(SymbolExpansion(SPACE, [odd_x1(SPACE, -4.0)]))
    assert abs(dens.sphere_part) < 1e-9 * SPHERE_CONST_D2


def test_gauged_pole_matches_sphere_integral():
    fit = gauged_laurent(GaugedFamily(_critical()))
    sphere = residue_density(_critical()).sphere_part
    assert abs(abs(complex(fit.residue)) - abs(sphere)) / abs(sphere) < 1e-6
    assert fit.fit_residual < 1e-6 * abs(sphere)
    residue, regular = fit
    assert residue == fit.residue and regular == fit.regular_value


def test_global_res_weights_densities():
    d1 = ResidueDensity(2.0, 0.0, 0.0, jacobian_included=True)
    d2 = ResidueDensity(3.0, 0.0, 0.0, jacobian_included=True)
    assert global_res([(0.5, d1), (1.0, d2)]) == 4.0
    with pytest.raises(DomainError):
        global_res([(-0.5, d1)])


def test_dixmier_value_divides_by_homogeneous_dimension():
    assert dixmier_value(8.0, SPACE) == 2.0
    assert dixmier_value(8.0 + 4.0j, SPACE) == 2.0 + 1.0j
