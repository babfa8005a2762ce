from __future__ import annotations

import numpy as np
import pytest

from circum import (
    ExceptionalParams,
    ExpSum,
    Mobius,
    Polynomial,
    RationalMap,
    ahlfors_shimizu_T,
    ahlfors_shimizu_T_with_error,
    order_estimate,
    spherical_derivative,
)

Z2 = Polynomial([0.0, 0.0, 1.0])
EIZ = ExpSum([(1.0, 1.0)])


def test_spherical_derivative_frozen_points():
    assert spherical_derivative(Polynomial([0.0, 1.0]), 0.0) == pytest.approx(1.0)
    assert spherical_derivative(EIZ, 0.0) == pytest.approx(0.5)
    assert spherical_derivative(Z2, 1.0) == pytest.approx(1.0)


def test_spherical_derivative_finite_at_pole():
    f = RationalMap(Polynomial([1.0]), Polynomial([0.0, 1.0]))
    # |f'|/(1+|f|^2) = 1/(1+|z|^2) for 1/z; finite and smooth through z = 0
    assert spherical_derivative(f, 0.0) == pytest.approx(1.0)
    assert spherical_derivative(f, 1.0) == pytest.approx(0.5)


def test_spherical_derivative_array_shape():
    zz = np.array([[0.0, 1.0], [1.0j, 2.0]])
    out = spherical_derivative(Z2, zz)
    assert out.shape == zz.shape
    assert out[0, 0] == pytest.approx(0.0)


def test_characteristic_of_square_closed_form():
    # T(r) = 2 log r + O(1/r^2) for z^2; at r = 100 the tail is < 1e-4
    val = ahlfors_shimizu_T(Z2, 100.0)
    assert val / np.log(100.0) == pytest.approx(2.0, abs=0.2)
    assert val == pytest.approx(2.0 * np.log(100.0), abs=1e-6)


def test_characteristic_of_inversion_closed_form():
    inv = RationalMap(Polynomial([1.0]), Polynomial([0.0, 1.0]))
    # sph(1/z) = sph(z), and for z the integral is elementary
    assert ahlfors_shimizu_T(inv, 10.0) == pytest.approx(0.5 * np.log(101.0), abs=1e-9)


def test_characteristic_of_exponential_frozen():
    assert ahlfors_shimizu_T(EIZ, 20.0) == pytest.approx(6.026173856, abs=2e-6)


def test_characteristic_monotone_in_radius():
    vals = [ahlfors_shimizu_T(EIZ, r) for r in (5.0, 10.0, 20.0, 40.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_characteristic_rotation_invariant():
    # rotating the sphere must not move T; M = (z + i)/(iz + 1)
    rot = Mobius(1.0, 1.0j, 1.0j, 1.0)
    plain = ahlfors_shimizu_T(Z2, 50.0)
    rotated = ahlfors_shimizu_T(rot.as_rational_map().compose(RationalMap(Z2)), 50.0)
    assert abs(rotated - plain) <= 0.05 * plain
    assert rotated == pytest.approx(plain, rel=1e-9)


def test_self_convergence_error_is_small():
    val, err = ahlfors_shimizu_T_with_error(EIZ, 20.0)
    assert err <= 0.01 * val
    val2, err2 = ahlfors_shimizu_T_with_error(
        ExceptionalParams(c1=1.0, b1=0.0, c2=float(np.sqrt(2.0)), b2=0.0), 60.0
    )
    assert err2 <= 0.01 * val2


def test_order_of_exponential():
    profile = order_estimate(EIZ, np.geomspace(2.0, 40.0, 12))
    assert profile.order_defined
    assert 0.85 <= profile.order_estimate <= 1.15
    lo, hi = profile.order_ci
    assert lo <= profile.order_estimate <= hi


def test_order_of_cubic_is_near_zero():
    profile = order_estimate(Polynomial([0.0, 0.0, 0.0, 1.0]), np.geomspace(10.0, 1000.0, 12))
    assert profile.order_defined
    assert profile.order_estimate < 0.3


def test_order_undefined_for_constant():
    profile = order_estimate(Polynomial([5.0]), np.geomspace(1.0, 100.0, 6))
    assert not profile.order_defined
    assert np.isnan(profile.order_estimate)


def test_order_estimate_input_validation():
    with pytest.raises(ValueError):
        order_estimate(EIZ, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        order_estimate(EIZ, [1.0, 2.0, 3.0, 4.0])  # span under a decade
    with pytest.raises(ValueError):
        order_estimate(EIZ, [-1.0, 2.0, 30.0, 40.0])


def test_profile_values_match_single_radius_runs():
    radii = np.geomspace(2.0, 30.0, 6)
    profile = order_estimate(EIZ, radii)
    for r, t in zip(profile.radii, profile.T_values):
        solo = ahlfors_shimizu_T(EIZ, float(r))
        assert t == pytest.approx(solo, rel=5e-3, abs=1e-9)
