from __future__ import annotations

import numpy as np
import pytest

from circum import (
    INF,
    DegreeCapExceeded,
    Mobius,
    Polynomial,
    RationalMap,
    chordal,
    is_inf,
    poly_roots,
)


def _close(z: complex, w: complex, tol: float = 1e-9) -> bool:
    return chordal(z, w) <= tol


def _match_multiset(got: list[complex], want: list[complex], tol: float = 1e-8) -> None:
    assert len(got) == len(want)
    left = list(got)
    for w in want:
        hit = min(range(len(left)), key=lambda i: chordal(left[i], w))
        assert chordal(left[hit], w) <= tol, f"no match for {w} in {got}"
        left.pop(hit)


def test_polynomial_eval_square():
    f = Polynomial([0.0, 0.0, 1.0])
    assert f(1.0 + 1.0j) == pytest.approx(2.0j)


def test_rational_eval_pole_and_infinity():
    inv = RationalMap(Polynomial([1.0]), Polynomial([0.0, 1.0]))
    assert is_inf(inv(0.0))
    f = RationalMap(Polynomial([1.0, 0.0, 1.0]), Polynomial([-2.0, 1.0]))
    assert is_inf(f(INF))


def test_rational_eval_at_infinity_same_degree():
    # (2z^2+1)/(z^2-5) tends to 2 at infinity
    f = RationalMap(Polynomial([1.0, 0.0, 2.0]), Polynomial([-5.0, 0.0, 1.0]))
    assert f(INF) == pytest.approx(2.0)


def test_derivative_frozen_value():
    f = RationalMap(Polynomial([-3.0, 0.0, 1.0]), Polynomial([1.0, 0.05]))
    assert f.derivative()(0.0) == pytest.approx(0.15)


def test_derivative_against_central_difference():
    rng = np.random.default_rng(11)
    f = RationalMap(Polynomial([-3.0, 0.0, 1.0]), Polynomial([1.0, 0.05]))
    df = f.derivative()
    h = 1e-6
    for _ in range(25):
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        fd = (f(z + h) - f(z - h)) / (2 * h)
        assert abs(df(z) - fd) <= 1e-6 * (1 + abs(fd))


def test_compose_chebyshev_like_square():
    f = RationalMap(Polynomial([-2.0, 0.0, 1.0]))
    g = f.compose(f)
    assert np.allclose(g.num.coeffs, [2.0, 0.0, -4.0, 0.0, 1.0])
    assert g.den.degree == 0


def test_compose_matches_pointwise_eval():
    rng = np.random.default_rng(23)
    for _ in range(20):
        nf = Polynomial(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        df = Polynomial(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        ng = Polynomial(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        dg = Polynomial(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        try:
            f = RationalMap(nf, df)
            g = RationalMap(ng, dg)
            h = f.compose(g)
        except ValueError:
            continue
        for _ in range(8):
            z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            assert chordal(h(z), f(g(z))) <= 1e-8


def test_compose_degree_cap():
    f = RationalMap(Polynomial.from_roots(np.arange(90)))
    with pytest.raises(DegreeCapExceeded):
        f.compose(f)


def test_conjugate_by_halving():
    f = RationalMap(Polynomial([-2.0, 0.0, 1.0]))
    m = Mobius(0.5, 0.0, 0.0, 1.0)  # z -> z/2
    g = f.conjugate(m)
    # m o f o m^{-1} turns z^2 - 2 into 2z^2 - 1
    lead = g.num.coeffs[-1] / g.den.coeffs[0]
    scaled = g.num.coeffs / g.den.coeffs[0]
    assert np.allclose(scaled, [-1.0, 0.0, 2.0])
    assert lead == pytest.approx(2.0)


def test_poly_roots_cubic_contains_two():
    p = Polynomial([-2.0, -1.0, -1.0, 1.0])
    roots = poly_roots(p)
    assert any(abs(r - 2.0) < 1e-10 for r in roots)
    assert len(roots) == 3


def test_poly_roots_reexpansion_roundtrip():
    rng = np.random.default_rng(7)
    for _ in range(20):
        deg = int(rng.integers(2, 9))
        roots = rng.uniform(-2, 2, deg) + 1j * rng.uniform(-2, 2, deg)
        p = Polynomial.from_roots(roots, lead=1.7)
        got = poly_roots(p)
        q = Polynomial.from_roots(got, lead=p.coeffs[-1])
        scale = max(np.max(np.abs(p.coeffs)), 1.0)
        assert np.max(np.abs(q.coeffs - p.coeffs)) <= 1e-8 * scale


def test_preimages_of_infinity_count_pole_and_infinity():
    f = RationalMap(Polynomial([-3.0, 0.0, 1.0]), Polynomial([1.0, 0.05]))
    pre = f.preimages(INF)
    _match_multiset(pre, [-20.0, INF], tol=1e-9)


def test_preimages_count_equals_degree():
    rng = np.random.default_rng(31)
    for _ in range(15):
        n = Polynomial(rng.standard_normal(4) + 1j * rng.standard_normal(4))
        d = Polynomial(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        try:
            f = RationalMap(n, d)
        except ValueError:
            continue
        w = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        pre = f.preimages(w)
        assert len(pre) == f.degree
        for z in pre:
            assert _close(f(z), w, 1e-7)


def test_fixed_points_square():
    f = RationalMap(Polynomial([0.0, 0.0, 1.0]))
    fps = f.fixed_points()
    assert len(fps) == 3
    pts = [p for p, _ in fps]
    _match_multiset(pts, [0.0, 1.0, INF])
    lams = {round(abs(p), 6): lam for p, lam in fps if not is_inf(p)}
    assert lams[0.0] == pytest.approx(0.0)
    assert lams[1.0] == pytest.approx(2.0)
    inf_lam = [lam for p, lam in fps if is_inf(p)]
    assert inf_lam == [0.0]


def test_fixed_points_shifted_square():
    f = RationalMap(Polynomial([-2.0, 0.0, 1.0]))
    fps = {}
    for p, lam in f.fixed_points():
        fps[INF if is_inf(p) else complex(round(p.real, 9), round(p.imag, 9))] = lam
    assert fps[(2 + 0j)] == pytest.approx(4.0)
    assert fps[(-1 + 0j)] == pytest.approx(-2.0)
    assert fps[INF] == pytest.approx(0.0)  # superattracting


def test_multiplier_is_conjugation_invariant():
    rng = np.random.default_rng(43)
    f = RationalMap(Polynomial([-2.0, 0.0, 1.0]))
    key = lambda lam: (round(lam.real, 6), round(lam.imag, 6))
    base = sorted((lam for _, lam in f.fixed_points() if abs(lam) > 1e-12), key=key)
    for _ in range(10):
        a, b, c, d = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        if abs(a * d - b * c) < 1e-3:
            continue
        g = f.conjugate(Mobius(a, b, c, d))
        got = sorted((lam for _, lam in g.fixed_points() if abs(lam) > 1e-12), key=key)
        assert np.allclose(got, base, atol=1e-8)


def test_critical_points_cubic():
    f = RationalMap(Polynomial([0.0, -3.0, 0.0, 1.0]))
    crit = f.critical_points()
    _match_multiset(crit, [1.0, -1.0, INF, INF])


def test_critical_point_count_generic():
    rng = np.random.default_rng(57)
    for _ in range(12):
        n = Polynomial(rng.standard_normal(4) + 1j * rng.standard_normal(4))
        d = Polynomial(rng.standard_normal(4) + 1j * rng.standard_normal(4))
        try:
            f = RationalMap(n, d)
        except ValueError:
            continue
        if f.degree < 2:
            continue
        assert len(f.critical_points()) == 2 * f.degree - 2


def test_real_symmetry_detection():
    real_f = RationalMap(Polynomial([-3.0, 0.0, 1.0]), Polynomial([1.0, 0.05]))
    assert real_f.is_real_symmetric()
    skew = RationalMap(Polynomial([-3.0j, 0.0, 1.0]), Polynomial([1.0, 0.05]))
    assert not skew.is_real_symmetric()


def test_mobius_inverse_roundtrip():
    rng = np.random.default_rng(3)
    m = Mobius(1.3, -0.2j, 0.7, 1.0)
    mi = m.inverse()
    for _ in range(20):
        z = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        assert _close(mi(m(z)), z, 1e-10)
    assert _close(m(mi(INF)), INF, 1e-10)


def test_chordal_basics():
    assert chordal(0.0, 0.0) == 0.0
    assert chordal(0.0, INF) == pytest.approx(2.0)
    assert chordal(1.0, 1.0 + 1e-12j) <= 1e-11
    # symmetry under inversion
    rng = np.random.default_rng(19)
    for _ in range(30):
        z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        w = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if abs(z) < 1e-3 or abs(w) < 1e-3:
            continue
        assert chordal(1 / z, 1 / w) == pytest.approx(chordal(z, w), abs=1e-12)


def test_common_factor_rejected():
    # num and den share the root z = 1
    with pytest.raises(ValueError):
        RationalMap(Polynomial.from_roots([1.0, 2.0]), Polynomial.from_roots([1.0, -3.0]))
