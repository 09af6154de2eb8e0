"""Space-filling curves onto polydisks.

The base curve is the 2-d Hilbert curve ``h`` on the unit square with
``h(0) = (0, 0)`` and ``h(1) = (1, 0)``, defined as the attractor of the four
similarities below (quadrant q of the parameter goes to ``F_q``)::

    F0(x, y) = (y/2, x/2)          F1(x, y) = (x/2, y/2 + 1/2)
    F2(x, y) = (x/2 + 1/2, y/2 + 1/2)   F3(x, y) = (1 - y/2, 1/2 - x/2)

Higher-dimensional curves are built by feeding the second coordinate of
``h`` back into ``h``::

    rho_2 = h,   rho_k(x) = (rho_{k-1}(x)_1, ..., rho_{k-1}(x)_{k-2}, h(rho_{k-1}(x)_{k-1}))

so coordinate j of ``rho_K`` is ``h_1(h_2^j(x))`` and the last one is
``h_2(h_2^{K-2}(x))``.  All breakpoint arithmetic is done on Python integers
and is exact.

At finite depth d the curve is discretized level by level: the innermost
copy of ``h`` resolves cells of side 2^-d and each outer copy uses twice the
depth of the one inside it, so that the second coordinate of an outer
level is an exact index into the next.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from .errors import AtomOutsidePolydisk

__all__ = [
    "hilbert_corner", "hilbert_cell", "hilbert_index", "hilbert_corners", "hilbert_cells",
    "hilbert_point", "square_to_disk", "disk_to_square", "PeanoCurve", "peano_curve",
]


# -- 2-d Hilbert curve on integers -------------------------------------------------

def _digits(i, depth):
    return [(i >> (2 * (depth - 1 - j))) & 3 for j in range(depth)]


def _apply(q, x, y, m):
    """Apply F_q to integer coordinates at scale 2^m; result is at scale 2^(m+1)."""
    half = 1 << m
    if q == 0:
        return y, x
    if q == 1:
        return x, y + half
    if q == 2:
        return x + half, y + half
    return 2 * half - y, half - x


def hilbert_corner(i, depth):
    """Exact point ``h(i / 4^depth)`` as integers over ``2^depth`` (0 <= i <= 4^depth)."""
    if i == 1 << (2 * depth):
        return 1 << depth, 0
    x = y = 0
    for m, q in enumerate(reversed(_digits(i, depth))):
        x, y = _apply(q, x, y, m)
    return x, y


def hilbert_cell(i, depth):
    """Lower-left integer corner of the depth-``depth`` cell traversed by index ``i``."""
    x = y = 1  # centre of the unit square at scale 2
    for m, q in enumerate(reversed(_digits(i, depth))):
        x, y = _apply(q, x, y, m + 1)
    return (x - 1) >> 1, (y - 1) >> 1


def hilbert_index(x, y, depth):
    """Inverse of :func:`hilbert_cell`."""
    cx, cy = 2 * x + 1, 2 * y + 1
    i = 0
    for m in range(depth, 0, -1):
        half = 1 << m
        if cx < half:
            if cy < half:
                q, cx, cy = 0, cy, cx
            else:
                q, cy = 1, cy - half
        elif cy >= half:
            q, cx, cy = 2, cx - half, cy - half
        else:
            q, cx, cy = 3, half - cy, 2 * half - cx
        i = 4 * i + q
    return i


def _apply_vec(q, x, y, m):
    half = np.int64(1) << np.int64(m)
    nx = np.select([q == 0, q == 1, q == 2], [y, x, x + half], 2 * half - y)
    ny = np.select([q == 0, q == 1, q == 2], [x, y + half, y + half], half - x)
    return nx, ny


def hilbert_corners(idx, depth):
    """Vectorized :func:`hilbert_corner` for int64 index arrays (depth <= 30)."""
    idx = np.asarray(idx, dtype=np.int64)
    x = np.zeros_like(idx)
    y = np.zeros_like(idx)
    for m in range(depth):
        q = (idx >> np.int64(2 * m)) & 3
        x, y = _apply_vec(q, x, y, m)
    end = idx == (np.int64(1) << np.int64(2 * depth))
    x = np.where(end, np.int64(1) << np.int64(depth), x)
    y = np.where(end, 0, y)
    return x, y


def hilbert_cells(idx, depth):
    """Vectorized :func:`hilbert_cell` (depth <= 30)."""
    idx = np.asarray(idx, dtype=np.int64)
    x = np.ones_like(idx)
    y = np.ones_like(idx)
    for m in range(depth):
        q = (idx >> np.int64(2 * m)) & 3
        x, y = _apply_vec(q, x, y, m + 1)
    return (x - 1) >> 1, (y - 1) >> 1


def hilbert_point(t):
    """Exact ``h(t)`` for a dyadic rational t in [0, 1], as two Fractions."""
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise ValueError("curve parameter must lie in [0, 1]")
    e = t.denominator.bit_length() - 1
    if t.denominator != 1 << e:
        raise ValueError("exact evaluation needs a dyadic parameter")
    depth = (e + 1) // 2
    i = int(t * (1 << (2 * depth)))
    x, y = hilbert_corner(i, depth)
    return Fraction(x, 1 << depth), Fraction(y, 1 << depth)


# -- square <-> disk (concentric map) ---------------------------------------------

def square_to_disk(sx, sy):
    """Area-preserving concentric map from [0,1]^2 onto the closed unit disk."""
    a = 2.0 * np.asarray(sx, dtype=float) - 1.0
    b = 2.0 * np.asarray(sy, dtype=float) - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        first = np.abs(a) > np.abs(b)
        r = np.where(first, a, b)
        phi = np.where(first, np.pi / 4 * b / a, np.pi / 2 - np.pi / 4 * a / b)
    phi = np.where(r == 0, 0.0, phi)
    return r * np.exp(1j * phi)


def disk_to_square(z):
    """Inverse of :func:`square_to_disk` on the closed unit disk."""
    z = np.asarray(z, dtype=complex)
    rho = np.abs(z)
    phi = np.angle(z)
    phi = np.where(phi < -np.pi / 4, phi + 2 * np.pi, phi)
    q = np.pi / 4
    a = np.select([phi < q, phi < 3 * q, phi < 5 * q],
                  [rho, -(phi - 2 * q) * rho / q, -rho], (phi - 6 * q) * rho / q)
    b = np.select([phi < q, phi < 3 * q, phi < 5 * q],
                  [phi * rho / q, rho, -(phi - 4 * q) * rho / q], -rho)
    return (a + 1.0) / 2.0, (b + 1.0) / 2.0


# -- composite curve -----------------------------------------------------------------

def _decompose(a, b):
    """Split the index interval [a, b) into maximal aligned blocks (prefix, log4 size)."""
    out = []
    while a < b:
        m = 0
        while a % (1 << (2 * (m + 1))) == 0 and a + (1 << (2 * (m + 1))) <= b:
            m += 1
        out.append((a >> (2 * m), m))
        a += 1 << (2 * m)
    return out


@dataclass(frozen=True, eq=False)
class PeanoCurve:
    """Continuous surjection of [0, 1] onto a polydisk, discretized at ``depth``."""

    n: int
    radii: tuple
    depth: int

    def __post_init__(self):
        if self.n < 1 or self.depth < 1:
            raise ValueError("need n >= 1 and depth >= 1")
        radii = tuple(float(r) for r in self.radii)
        if len(radii) != self.n or any(r < 0 for r in radii):
            raise ValueError("need n non-negative radii")
        object.__setattr__(self, "radii", radii)

    @property
    def dims(self):
        """Number of real coordinates."""
        return 2 * self.n

    @property
    def level_depths(self):
        k = self.dims
        return tuple(self.depth << (k - 2 - j) for j in range(k - 1))

    @property
    def outer_depth(self):
        return self.level_depths[0]

    @property
    def samples(self):
        """Number of parameter cells at the outer level."""
        return 1 << (2 * self.outer_depth)

    # square coordinates -----------------------------------------------------------
    def to_square(self, points, clamp_tol=1e-8):
        """Map points of C^n (rows) to [0,1]^{2n}; raises if a point is outside the polydisk."""
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        out = np.empty((len(points), self.dims))
        for j, r in enumerate(self.radii):
            z = points[:, j]
            slack = clamp_tol * (1.0 + r)
            if np.any(np.abs(z) > r + slack):
                bad = points[int(np.argmax(np.abs(z) - r))]
                raise AtomOutsidePolydisk(f"point {bad} lies outside the polydisk in coordinate {j}")
            if r == 0:
                out[:, 2 * j] = out[:, 2 * j + 1] = 0.5
                continue
            w = z / r
            w = w / np.maximum(np.abs(w), 1.0)
            sx, sy = disk_to_square(w)
            out[:, 2 * j] = np.clip(sx, 0.0, 1.0)
            out[:, 2 * j + 1] = np.clip(sy, 0.0, 1.0)
        return out

    def from_square(self, coords):
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        return np.column_stack([r * square_to_disk(coords[:, 2 * j], coords[:, 2 * j + 1])
                                for j, r in enumerate(self.radii)])

    def target_cell(self, point):
        """Integer coordinates of the half-open depth-d cell holding a point."""
        s = self.to_square(point)[0]
        side = 1 << self.depth
        return tuple(int(min(side - 1, math.floor(c * side))) for c in s)

    # exact breakpoints --------------------------------------------------------------
    def square_point(self, t):
        """Exact ``rho(t)`` in [0,1]^{2n} for dyadic t, as Fractions."""
        coords = []
        u = Fraction(t)
        for _ in range(self.dims - 2):
            x, u = hilbert_point(u)
            coords.append(x)
        coords.extend(hilbert_point(u))
        return coords

    def point(self, t):
        """``rho(t)`` in the polydisk."""
        return self.from_square([[float(c) for c in self.square_point(t)]])[0]

    def breakpoints(self, idx):
        """Square coordinates of ``rho(i / 4^D)`` for index arrays at the outer depth."""
        depths = self.level_depths
        if depths[0] > 30:
            raise ValueError("vectorized breakpoints need outer depth <= 30")
        u = np.asarray(idx, dtype=np.int64)
        cols = []
        for j, dj in enumerate(depths):
            x, y = hilbert_corners(u, dj)
            cols.append(x / float(1 << dj))
            if j == len(depths) - 1:
                cols.append(y / float(1 << dj))
            u = y
        return np.column_stack(cols)

    def chain_cells(self, idx):
        """Integer cells (per level resolution) traversed by outer indices."""
        depths = self.level_depths
        if depths[0] > 30:
            raise ValueError("vectorized cells need outer depth <= 30")
        u = np.asarray(idx, dtype=np.int64)
        cols = []
        for j, dj in enumerate(depths):
            x, y = hilbert_cells(u, dj)
            cols.append(x >> np.int64(dj - self.depth))
            if j == len(depths) - 1:
                cols.append(y)
            u = y
        return np.column_stack(cols)

    # minimal preimage -------------------------------------------------------------
    def first_index(self, cell):
        """Smallest outer index whose curve piece lies in the given depth-d cell.

        Runs a depth-first descent of the outer Hilbert quadtree in curve
        order, pruning subtrees that cannot reach the cell; feasibility of a
        subtree is decided level by level on index intervals.
        """
        depths = self.level_depths
        last = len(depths) - 1
        d = self.depth

        @lru_cache(maxsize=None)
        def node_ok(level, prefix, m):
            dj = depths[level]
            x, y = hilbert_cell(prefix, m)
            s = 1 << (dj - m)
            w = 1 << (dj - d)
            lo = cell[level] * w
            if x * s >= lo + w or (x + 1) * s <= lo:
                return False
            if level == last:
                return y * s <= cell[level + 1] < (y + 1) * s
            return any(node_ok(level + 1, p, depths[level + 1] - mm)
                       for p, mm in _decompose(y * s, (y + 1) * s))

        prefix = 0
        for m in range(1, depths[0] + 1):
            for q in range(4):
                if node_ok(0, 4 * prefix + q, m):
                    prefix = 4 * prefix + q
                    break
            else:
                raise RuntimeError("curve does not reach the requested cell")
        return prefix


def peano_curve(n, radii, depth):
    return PeanoCurve(n, tuple(radii), depth)
