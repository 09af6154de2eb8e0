import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from specflag.errors import DomainViolation, SingularAlpha, UnsupportedDimension
from specflag.holocalc import (HoloFunction, MartinelliContext, QuadratureSpec, apply_map,
                               apply_series, ball_domination, default_quadrature,
                               extended_wedges, lipschitz_bound, mt_eval, vasilescu_integral,
                               verify_pushforward)
from specflag.regions import Disk, rectangle
from specflag.triangular import joint_measure, marginal, multiset_distance
from specflag.tuples import (CommPolynomial, certify_commuting, eval_poly,
                             planted_commuting_tuple, random_poly)

seeds = st.integers(0, 2**31 - 1)
# exact values from sympy, see tests/oracles/frozen_values.py
E1 = 2.7182818284590452354
E2 = 7.3890560989306502272
EXP_UPPER = np.array([[7.3890560989306502272, 12.696480824257017514],
                      [0.0, 20.085536923187667741]])
UPPER = np.array([[2.0, 1.0], [0.0, 3.0]])
Z1, Z2 = CommPolynomial.coordinate(2, 0), CommPolynomial.coordinate(2, 1)


def poly(p):
    return HoloFunction.polynomial(p)


def test_series_exp_on_diagonal(diagonal_pair):
    got = apply_series(HoloFunction.exp_linear([1, 0]), diagonal_pair)
    assert np.abs(got - np.diag([E1, E2])).max() <= 1e-12 * E2


def test_series_product_is_exact(triangular_pair):
    got = apply_series(poly(Z1 * Z2), triangular_pair)
    a, b = triangular_pair.matrices
    assert np.array_equal(got, a @ b)


@given(seeds)
def test_series_exp_of_sum(seed):
    t = planted_commuting_tuple(4, 2, seed).tuple
    got = apply_series(HoloFunction.exp_linear([1, 1]), t)
    want = scipy.linalg.expm(t.matrices[0]) @ scipy.linalg.expm(t.matrices[1])
    assert np.abs(got - want).max() <= 1e-10 * max(1.0, np.abs(want).max())


@given(seeds, seeds)
def test_series_of_polynomial_matches_eval(seed, pseed):
    t = planted_commuting_tuple(4, 2, seed).tuple
    p = random_poly(2, 3, pseed)
    assert np.allclose(apply_series(poly(p), t), eval_poly(p, t), rtol=0, atol=1e-12)


def test_series_domain_violation():
    t = certify_commuting([2 * np.eye(2)])
    with pytest.raises(DomainViolation):
        apply_series(HoloFunction.reciprocal(1, 0, 1.5), t)
    with pytest.raises(DomainViolation):
        apply_series(HoloFunction.exp_linear([1, 1]), t)


def test_reciprocal_series_is_resolvent():
    t = certify_commuting([0.1 * UPPER])
    got = apply_series(HoloFunction.reciprocal(1, 0, 2.0), t)
    assert np.abs(got - np.linalg.inv(2 * np.eye(2) - 0.1 * UPPER)).max() <= 1e-12


def test_apply_map_builds_tuple(diagonal_pair):
    h = HoloFunction.composite([Z1 + Z2, Z1 * Z2])
    ht = apply_map(h, diagonal_pair)
    assert ht.n == 2
    assert np.allclose(ht.matrices[0], np.diag([4, 6]))
    assert np.allclose(ht.matrices[1], np.diag([3, 8]))
    with pytest.raises(TypeError):
        apply_series(h, diagonal_pair)


def test_wedges_anticommute():
    dz, sw = extended_wedges(2)
    ops = dz + sw
    for i, a in enumerate(ops):
        assert not (a @ a).any()
        for b in ops[i + 1:]:
            assert np.array_equal(a @ b, -(b @ a))


def test_mt_of_zero_at_two():
    ctx = MartinelliContext.build(certify_commuting([np.zeros((2, 2))]))
    v = mt_eval(ctx, [1, 0], 2.0)
    assert v[0] == 0.5 and not v[1:].any()


@given(st.floats(-4, 4), st.floats(-4, 4))
def test_mt_reproduces_resolvent(x, y):
    z = complex(x, y)
    if min(abs(z - 2), abs(z - 3)) < 0.1:
        return
    ctx = MartinelliContext.build(certify_commuting([UPPER]))
    v = mt_eval(ctx, [0.3, 1.0], z)
    want = np.linalg.solve(z * np.eye(2) - UPPER, [0.3, 1.0])
    assert np.abs(v[:2] - want).max() <= 1e-10 * max(1.0, np.abs(want).max())


def test_mt_refuses_the_spectrum():
    ctx = MartinelliContext.build(certify_commuting([UPPER]))
    with pytest.raises(SingularAlpha):
        mt_eval(ctx, [1.0, 0.0], 2.0)


@given(seeds, st.integers(0, 1))
def test_dbar_matches_finite_differences(seed, j):
    pt = planted_commuting_tuple(3, 2, seed)
    ctx = MartinelliContext.build(pt.tuple)
    rng = np.random.default_rng(seed)
    z = pt.eigenvalues.mean(axis=0) + 2.0 + rng.normal(size=2) + 1j * rng.normal(size=2)
    h = 1e-5
    e = np.zeros(2)
    e[j] = h

    def inv(w):
        return ctx.inverse(w.reshape(1, 2))[0]

    dx = (inv(z + e) - inv(z - e)) / (2 * h)
    dy = (inv(z + 1j * e) - inv(z - 1j * e)) / (2 * h)
    fd = 0.5 * (dx + 1j * dy)
    exact = ctx.dbar_inverse(z, j)
    assert np.abs(fd - exact).max() <= 1e-6 * max(1.0, np.abs(exact).max())


def test_integral_exp_single_variable():
    t = certify_commuting([UPPER])
    exp = HoloFunction.series(1, lambda a: 1 / math.factorial(a[0]),
                              lambda p: np.exp(np.atleast_2d(p)[:, 0]), name="exp")
    r = vasilescu_integral(t, exp, default_quadrature(t, angular=256))
    assert np.abs(r.value - EXP_UPPER).max() <= 1e-8


def test_integral_resolvent_single_variable():
    t = certify_commuting([UPPER])
    w = 6.0 + 1j
    f = HoloFunction.reciprocal(1, 0, w)
    spec = QuadratureSpec((2.5 + 0j,), (1.5,), 256)
    r = vasilescu_integral(t, f, spec)
    assert np.abs(r.value - np.linalg.inv(w * np.eye(2) - UPPER)).max() <= 1e-8


@pytest.mark.parametrize("n", [1, 2])
def test_integral_of_one_is_identity(n):
    t = planted_commuting_tuple(4, n, 3).tuple
    one = poly(CommPolynomial.constant(n, 1.0))
    r = vasilescu_integral(t, one, default_quadrature(t, angular=256 if n == 1 else 64))
    assert np.abs(r.value - np.eye(4)).max() <= 1e-10


@given(seeds)
@settings(max_examples=3)
def test_integral_product_two_variables(seed):
    t = planted_commuting_tuple(4, 2, seed).tuple
    r = vasilescu_integral(t, poly(Z1 * Z2), default_quadrature(t, angular=64, radial=16),
                           richardson=False)
    a, b = t.matrices
    assert np.abs(r.value - a @ b).max() <= 1e-4
    assert r.nodes == 2 * 64 * 64 * 16


@given(seeds, st.integers(0, 1))
@settings(max_examples=3)
def test_coordinate_recovery(seed, j):
    t = planted_commuting_tuple(3, 2, seed).tuple
    r = vasilescu_integral(t, poly(CommPolynomial.coordinate(2, j)), richardson=False)
    assert np.abs(r.value - t.matrices[j]).max() <= 1e-6


@given(seeds, seeds, seeds)
@settings(max_examples=2)
def test_integral_is_multiplicative(seed, s1, s2):
    t = planted_commuting_tuple(3, 2, seed).tuple
    f, g = random_poly(2, 2, s1), random_poly(2, 2, s2)
    spec = default_quadrature(t)
    val = lambda p: vasilescu_integral(t, poly(p), spec, richardson=False).value
    lhs, rhs = val(f * g), val(f) @ val(g)
    assert np.abs(lhs - rhs).max() <= 1e-6 * max(1.0, np.abs(rhs).max())


@given(seeds)
@settings(max_examples=3)
def test_series_and_integral_agree(seed):
    t = planted_commuting_tuple(3, 2, seed).tuple
    f = HoloFunction.exp_linear([0.5, -0.3j])
    a = apply_series(f, t)
    b = vasilescu_integral(t, f, richardson=False).value
    assert np.abs(a - b).max() <= 1e-6 * max(1.0, np.abs(a).max())


def test_richardson_order_on_the_circle():
    t = certify_commuting([UPPER])
    f = HoloFunction.exp_linear([1])
    spec = QuadratureSpec((2.5 + 0j,), (1.5,), 8)
    errs = []
    for m in (8, 16):
        r = vasilescu_integral(t, f, spec.with_angular(m), richardson=False)
        errs.append(np.abs(r.value - EXP_UPPER).max())
    assert math.log2(errs[0] / errs[1]) >= 4


def test_richardson_estimate_tracks_the_error():
    t = planted_commuting_tuple(3, 2, 1).tuple
    r = vasilescu_integral(t, poly(Z1 * Z2), default_quadrature(t, angular=32, radial=16))
    err = np.abs(r.value - t.matrices[0] @ t.matrices[1]).max()
    assert r.error_estimate is not None and err <= 10 * r.error_estimate + 1e-12


def test_integral_dimension_and_domain_checks():
    t3 = planted_commuting_tuple(2, 3, 0).tuple
    with pytest.raises(UnsupportedDimension):
        vasilescu_integral(t3, poly(CommPolynomial.constant(3, 1.0)))
    t = certify_commuting([UPPER])
    with pytest.raises(DomainViolation):
        vasilescu_integral(t, poly(Z1 * Z2))
    with pytest.raises(DomainViolation):
        vasilescu_integral(t, poly(CommPolynomial.coordinate(1, 0)),
                           QuadratureSpec((0j,), (2.5,), 64))
    with pytest.raises(DomainViolation):
        vasilescu_integral(t, HoloFunction.reciprocal(1, 0, 4.0), QuadratureSpec((2.5 + 0j,), (1.6,), 64))


def test_pushforward_coordinate(diagonal_pair):
    h = HoloFunction.composite([Z1])
    rep = verify_pushforward(h, diagonal_pair, [Disk(1, 0.5)])
    assert rep.passed()
    assert multiset_distance(joint_measure(rep.image), marginal(joint_measure(diagonal_pair), 0)) == 0


@given(seeds)
def test_pushforward_sum_and_product(seed):
    t = planted_commuting_tuple(4, 2, seed).tuple
    h = HoloFunction.composite([Z1 + Z2, Z1 * Z2])
    image = [h(a) for a in joint_measure(t).atoms]
    regions = [rectangle(Disk(image[0][0], 0.05), None), rectangle(None, Disk(50, 1))]
    rep = verify_pushforward(h, t, regions)
    assert rep.measure_distance <= 1e-7
    assert all(d <= 1e-7 for d in rep.projection_distances)


@given(seeds, st.floats(0.05, 1.0))
def test_ball_domination(seed, eps):
    t = planted_commuting_tuple(5, 2, seed).tuple
    h = HoloFunction.composite([Z1 * Z2, Z1 + Z2 * Z2])
    z = joint_measure(t).atoms[0] + 0.01
    rep = ball_domination(h, t, z, eps)
    assert rep.excess <= 1e-7
    assert rep.constant == pytest.approx(math.sqrt(2) * lipschitz_bound(h, z, eps))
