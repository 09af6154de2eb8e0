import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from specflag.curve import (disk_to_square, hilbert_cell, hilbert_cells, hilbert_corner,
                            hilbert_corners, hilbert_index, hilbert_point, peano_curve,
                            square_to_disk)
from specflag.errors import AtomOutsidePolydisk


# textbook iterative Hilbert conversion, kept independent of the package
def d2xy(order, d):
    side = 1 << order
    x = y = 0
    s = 1
    t = d
    while s < side:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x, y = s - 1 - x, s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t //= 4
        s *= 2
    return x, y


# polar form of the concentric square-to-disk map, inverted
def concentric_inverse(z):
    r = abs(z)
    phi = math.atan2(z.imag, z.real)
    if phi < -math.pi / 4:
        phi += 2 * math.pi
    if phi < math.pi / 4:
        a, b = r, r * phi / (math.pi / 4)
    elif phi < 3 * math.pi / 4:
        a, b = -r * (phi - math.pi / 2) / (math.pi / 4), r
    elif phi < 5 * math.pi / 4:
        a, b = -r, -r * (phi - math.pi) / (math.pi / 4)
    else:
        a, b = r * (phi - 3 * math.pi / 2) / (math.pi / 4), -r
    return (a + 1) / 2, (b + 1) / 2


DEPTH2_CELLS = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 2), (0, 3), (1, 3), (1, 2),
                (2, 2), (2, 3), (3, 3), (3, 2), (3, 1), (2, 1), (2, 0), (3, 0)]


@pytest.mark.parametrize("depth", [1, 2, 3, 4, 5])
def test_cells_match_reference_conversion(depth):
    for i in range(4 ** depth):
        assert hilbert_cell(i, depth) == d2xy(depth, i)


def test_depth_two_cells_frozen():
    assert [hilbert_cell(i, 2) for i in range(16)] == DEPTH2_CELLS
    assert sum((i + 1) * (x * 8 + y) for i, (x, y) in enumerate(
        hilbert_cell(d, 3) for d in range(64))) == 82992


def test_endpoints():
    for d in (1, 3, 6):
        assert hilbert_corner(0, d) == (0, 0)
        assert hilbert_corner(4 ** d, d) == (2 ** d, 0)
    assert hilbert_point(Fraction(0)) == (0, 0)
    assert hilbert_point(Fraction(1)) == (1, 0)
    assert hilbert_point(Fraction(1, 4)) == (0, Fraction(1, 2))


@given(st.integers(1, 12), st.data())
def test_index_inverts_cell(depth, data):
    i = data.draw(st.integers(0, 4 ** depth - 1))
    assert hilbert_index(*hilbert_cell(i, depth), depth) == i


@given(st.integers(1, 20), st.lists(st.integers(0, 2**40), min_size=1, max_size=20))
def test_vectorized_matches_scalar(depth, raw):
    idx = np.array([r % (4 ** depth) for r in raw], dtype=np.int64)
    xs, ys = hilbert_cells(idx, depth)
    assert [(int(x), int(y)) for x, y in zip(xs, ys)] == [hilbert_cell(int(i), depth) for i in idx]
    xs, ys = hilbert_corners(idx, depth)
    assert [(int(x), int(y)) for x, y in zip(xs, ys)] == [hilbert_corner(int(i), depth) for i in idx]


@given(st.floats(0, 1), st.floats(0, 1))
def test_square_disk_round_trip(sx, sy):
    z = square_to_disk(np.array([sx]), np.array([sy]))
    assert abs(z[0]) <= 1 + 1e-15
    bx, by = disk_to_square(z)
    assert abs(bx[0] - sx) < 1e-12 and abs(by[0] - sy) < 1e-12


@given(st.floats(0, 1), st.floats(-math.pi, math.pi))
def test_disk_to_square_matches_polar_form(r, phi):
    z = r * complex(math.cos(phi), math.sin(phi))
    ax, ay = concentric_inverse(z)
    bx, by = disk_to_square(np.array([z]))
    if r > 1e-9:
        assert abs(ax - bx[0]) < 1e-9 and abs(ay - by[0]) < 1e-9


def test_curve_start_is_image_of_origin():
    c = peano_curve(1, (2.0,), 3)
    assert abs(c.point(0) - 2 * square_to_disk(np.array([0.0]), np.array([0.0])))[0] < 1e-15
    assert abs(c.point(0)[0] - 2 * complex(-1, -1) / math.sqrt(2)) < 1e-15


@pytest.mark.parametrize("n,depth", [(1, 1), (1, 3), (1, 5), (2, 1), (2, 2)])
def test_every_cell_is_visited(n, depth):
    c = peano_curve(n, (1.0,) * n, depth)
    cells = c.chain_cells(np.arange(c.samples))
    assert len({tuple(r) for r in cells}) == (2 ** depth) ** (2 * n)


@pytest.mark.parametrize("n,depth", [(1, 4), (2, 1), (2, 2)])
def test_consecutive_breakpoints_are_one_cell_apart(n, depth):
    c = peano_curve(n, (1.0,) * n, depth)
    b = c.breakpoints(np.arange(c.samples + 1))
    assert np.abs(np.diff(b, axis=0)).max() <= 2.0 ** -depth


def test_breakpoints_are_exact():
    c = peano_curve(2, (1.0, 1.0), 2)
    for i in (0, 1, 77, 4000, c.samples):
        exact = c.square_point(Fraction(i, c.samples))
        assert np.array_equal(c.breakpoints([i])[0], [float(v) for v in exact])


FROZEN_ATOMS = [(0.3 + 0.4j, (5, 6), 39), (-0.5 + 0.1j, (1, 4), 17), (0j, (4, 4), 32)]


@pytest.mark.parametrize("atom,cell,index", FROZEN_ATOMS)
def test_frozen_parameters_on_the_disk(atom, cell, index):
    c = peano_curve(1, (1.0,), 3)
    assert c.target_cell([atom]) == cell
    assert c.first_index(cell) == index


@given(st.integers(0, 2**31 - 1))
def test_first_index_is_brute_force_minimum(seed):
    rng = np.random.default_rng(seed)
    c = peano_curve(2, (1.0, 1.0), 2)
    cells = c.chain_cells(np.arange(c.samples))
    cell = tuple(int(v) for v in rng.integers(0, 4, size=4))
    hits = np.flatnonzero(np.all(cells == cell, axis=1))
    assert c.first_index(cell) == hits[0]


def test_outside_polydisk_is_refused():
    c = peano_curve(1, (1.0,), 2)
    with pytest.raises(AtomOutsidePolydisk):
        c.to_square([[1.5]])
    # rounding slack is clamped
    assert c.to_square([[1.0 + 1e-12]]).shape == (1, 2)


def test_degenerate_radius():
    c = peano_curve(2, (1.0, 0.0), 1)
    assert c.target_cell([0.2, 0.0])[2:] == (1, 1)


@given(st.floats(0, 0.99), st.floats(-math.pi, math.pi), st.integers(2, 6))
def test_refinement_on_the_disk(r, phi, depth):
    z = r * complex(math.cos(phi), math.sin(phi))
    coarse = peano_curve(1, (1.0,), depth - 1)
    fine = peano_curve(1, (1.0,), depth)
    t0 = Fraction(coarse.first_index(coarse.target_cell([z])), coarse.samples)
    t1 = Fraction(fine.first_index(fine.target_cell([z])), fine.samples)
    # the fine cell sits inside the coarse one, so t moves forward by less than a cell
    assert t0 <= t1 < t0 + Fraction(1, coarse.samples)


@pytest.mark.xfail(strict=True, reason="for n >= 2 the minimal preimage can jump many cells "
                   "when the depth grows")
def test_refinement_within_one_cell_in_two_variables():
    rng = np.random.default_rng(0)
    worst = 0
    for _ in range(20):
        z = rng.uniform(-0.6, 0.6, 2) + 1j * rng.uniform(-0.6, 0.6, 2)
        coarse = peano_curve(2, (1.0, 1.0), 1)
        fine = peano_curve(2, (1.0, 1.0), 2)
        t0 = Fraction(coarse.first_index(coarse.target_cell([z])), coarse.samples)
        t1 = Fraction(fine.first_index(fine.target_cell([z])), fine.samples)
        worst = max(worst, abs(t1 - t0) * coarse.samples)
    assert worst <= 1
