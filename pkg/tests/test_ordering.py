from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from specflag.errors import NotTriangular
from specflag.ordering import (assign_params, build_flag, curve_for, diag_expectation,
                               triangularize_by_flag, verify_simultut)
from specflag.triangular import joint_measure, multiset_distance
from specflag.tuples import (CommPolynomial, certify_commuting, eval_poly,
                             planted_commuting_tuple, random_poly)

seeds = st.integers(0, 2**31 - 1)


def flag_for(t, depth=3):
    nu = joint_measure(t)
    ordering = assign_params(curve_for(t, depth), nu)
    return nu, ordering, build_flag(t, ordering)


def test_atom_at_curve_start_gets_zero():
    z = 2 * complex(-1, -1) / np.sqrt(2)
    t = certify_commuting([[[z]]])
    ordering = assign_params(curve_for(t, 3), joint_measure(t))
    assert ordering.indices == (0,)
    assert ordering.params[0] == 0.0


@given(seeds, st.integers(1, 2))
def test_order_matches_brute_force_preimage(seed, depth):
    pt = planted_commuting_tuple(3, 2, seed, defective=False)
    t = pt.tuple
    nu = joint_measure(t)
    curve = curve_for(t, depth)
    ordering = assign_params(curve, nu)
    cells = curve.chain_cells(np.arange(curve.samples))
    for p, a in enumerate(nu.atoms):
        hits = np.flatnonzero(np.all(cells == curve.target_cell(a), axis=1))
        assert ordering.indices[p] == hits[0]
    assert list(ordering.params[list(ordering.order)]) == sorted(ordering.params)


def test_exact_params_are_dyadic():
    t = planted_commuting_tuple(3, 1, 2).tuple
    ordering = assign_params(curve_for(t, 4), joint_measure(t))
    for f, i in zip(ordering.exact_params(), ordering.indices):
        assert f == Fraction(i, 4 ** 4)
        assert 0 <= f < 1


def test_diagonal_pair_flag(diagonal_pair):
    nu, ordering, flag = flag_for(diagonal_pair)
    assert flag.dims == (1, 2)
    assert len(flag.breakpoints) == 2
    assert flag.breakpoints[0] <= flag.breakpoints[1]
    v, tri = triangularize_by_flag(diagonal_pair, flag)
    diag = np.column_stack([np.diag(r) for r in tri])
    assert np.allclose(diag, nu.atoms[list(ordering.order)], atol=1e-14)


@given(seeds, st.integers(1, 3))
def test_flag_is_invariant_and_counts_atoms(seed, n):
    t = planted_commuting_tuple(6, n, seed).tuple
    nu, ordering, flag = flag_for(t, 2)
    assert flag.dims[-1] == t.k
    assert all(a < b for a, b in zip(flag.dims, flag.dims[1:]))
    assert flag.invariance_residual(t) <= 1e-8
    rank = {a: r for r, a in enumerate(ordering.order)}
    for step, p in enumerate(flag.projections):
        covered = sum(c for a, c in enumerate(nu.counts) if rank[a] <= step)
        assert p.trace == Fraction(covered, nu.total)


@given(seeds, st.integers(1, 3))
def test_triangular_in_flag_basis(seed, n):
    t = planted_commuting_tuple(6, n, seed).tuple
    nu, ordering, flag = flag_for(t, 2)
    v, tri = triangularize_by_flag(t, flag)
    assert np.linalg.norm(v.conj().T @ v - np.eye(t.k)) <= 1e-12
    for r, a in zip(tri, t.matrices):
        assert np.linalg.norm(np.tril(r, -1), 2) <= 1e-8 * max(1.0, np.linalg.norm(a, 2))
    diag = np.column_stack([np.diag(r) for r in tri])
    expected = np.repeat(nu.atoms[list(ordering.order)],
                         [nu.counts[p] for p in ordering.order], axis=0)
    # defective atoms only come back to ~sqrt(eps) on the diagonal
    assert np.abs(diag - expected).max() <= 1e-6


@given(seeds)
def test_params_map_back_to_their_atoms(seed):
    t = planted_commuting_tuple(5, 2, seed).tuple
    nu = joint_measure(t)
    curve = curve_for(t, 2)
    ordering = assign_params(curve, nu)
    start = curve.breakpoints(np.array(ordering.indices))
    target = curve.to_square(nu.atoms)
    assert np.abs(start - target).max() <= 2.0 ** -curve.depth


def test_diag_expectation_of_diagonal(diagonal_pair):
    _, _, flag = flag_for(diagonal_pair)
    s = np.diag([7.0, -1.0])
    assert np.allclose(diag_expectation(s, flag), s, atol=1e-14)


def test_diag_expectation_refuses_non_triangular(triangular_pair):
    _, _, flag = flag_for(triangular_pair)
    with pytest.raises(NotTriangular):
        diag_expectation(np.array([[0.0, 0.0], [1.0, 0.0]]), flag)


@given(seeds, seeds)
def test_diag_expectation_evaluates_pointwise(seed, pseed):
    t = planted_commuting_tuple(5, 2, seed).tuple
    nu, ordering, flag = flag_for(t, 2)
    f = random_poly(2, 2, pseed)
    n_part = diag_expectation(eval_poly(f, t), flag)
    got = np.diag(flag.unitary.conj().T @ n_part @ flag.unitary)
    atoms = np.repeat(nu.atoms[list(ordering.order)],
                      [nu.counts[p] for p in ordering.order], axis=0)
    scale = max(1.0, np.abs([f(a) for a in atoms]).max())
    assert np.abs(got - np.array([f(a) for a in atoms])).max() <= 1e-6 * scale


@given(seeds, seeds, seeds)
def test_diag_expectation_is_multiplicative(seed, p1, p2):
    t = planted_commuting_tuple(5, 2, seed).tuple
    _, _, flag = flag_for(t, 2)
    s1 = eval_poly(random_poly(2, 2, p1), t)
    s2 = eval_poly(random_poly(2, 2, p2), t)
    e = lambda s: diag_expectation(s, flag)
    scale = max(1.0, np.linalg.norm(s1, 2) * np.linalg.norm(s2, 2))
    assert np.linalg.norm(e(s1 @ s2) - e(s1) @ e(s2), 2) <= 1e-8 * scale
    assert abs(np.trace(e(s1)) - np.trace(s1)) <= 1e-10 * max(1.0, np.linalg.norm(s1, 2)) * t.k


def test_simultut_product_on_diagonal_pair(diagonal_pair):
    _, _, flag = flag_for(diagonal_pair)
    f = CommPolynomial.coordinate(2, 0) * CommPolynomial.coordinate(2, 1)
    rep = verify_simultut(None, diagonal_pair, flag, f)
    assert rep.passed()
    assert np.allclose(sorted(np.diag(rep.normal_part).real), [3, 8])


def test_simultut_constant(triangular_pair):
    _, _, flag = flag_for(triangular_pair)
    f = CommPolynomial.constant(2, 2.5)
    s = eval_poly(f, triangular_pair)
    rep = verify_simultut(s, triangular_pair, flag, f)
    assert rep.passed()
    assert np.allclose(s - rep.normal_part, 0, atol=1e-14)


@given(seeds, seeds, st.integers(1, 3))
def test_simultut_random(seed, pseed, degree):
    t = planted_commuting_tuple(5, 2, seed).tuple
    _, _, flag = flag_for(t, 2)
    f = random_poly(2, degree, pseed)
    rep = verify_simultut(None, t, flag, f)
    scale = max(1.0, np.linalg.norm(eval_poly(f, t), 2))
    assert rep.nilpotent
    assert rep.eigen_distance <= 1e-7 * scale


def test_measure_distance_from_flag(triangular_pair):
    nu, ordering, flag = flag_for(triangular_pair)
    assert multiset_distance(flag.atoms, nu.atoms[list(ordering.order)]) == 0
