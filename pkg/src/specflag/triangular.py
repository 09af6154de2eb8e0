"""Simultaneous Schur form of commuting tuples and the finite joint spectral measure.

The joint generalized eigenspaces are found by splitting C^k with sorted
Schur forms of T_1, then splitting each piece with T_2, and so on.  Common
eigenvectors are taken from the common numerical kernel of the centred
restrictions, which survives Jordan blocks where eigenvector chains do not.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np
import scipy.cluster.hierarchy
import scipy.linalg
import scipy.spatial.distance
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch, ResidualTooLarge
from .numcore import DEFAULT_TOL
from .tuples import CommutingTuple

__all__ = [
    "SchurFlag", "JointSpectralMeasure", "BlockTuple", "JointCluster",
    "joint_clusters", "common_eigenvector", "simultaneous_schur", "joint_eigenvalues",
    "joint_measure", "marginal", "pushforward", "direct_sum", "mixture",
    "merge_radius", "multiset_distance", "lex_compare", "phase_fix", "restrict",
    "measures_equal", "measure_from_points", "lower_residual", "eigen_groups",
]


def merge_radius(points):
    points = np.asarray(points, dtype=complex)
    scale = float(np.abs(points).max()) if points.size else 0.0
    return 1e-7 * (1.0 + scale)


def _mat_scale(mats):
    return max(1.0, max(np.linalg.norm(m, 2) for m in mats))


def _single_linkage(values, radius):
    """Group points (rows) whose chained distances are <= radius."""
    values = np.asarray(values, dtype=complex)
    if values.ndim == 1:
        values = values[:, None]
    m = len(values)
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(m):
        for j in range(i + 1, m):
            if np.linalg.norm(values[i] - values[j]) <= radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in sorted(groups.values(), key=lambda g: g[0])]


def phase_fix(v):
    """Rotate a vector so its largest-modulus entry is real and positive."""
    v = np.asarray(v, dtype=complex)
    i = int(np.argmax(np.abs(v) > np.abs(v).max() * (1 - 1e-12)))
    return v * (abs(v[i]) / v[i])


def lex_compare(a, b, radius):
    """Compare points of C^n on (Re z1, Im z1, ..., Re zn, Im zn).

    Coordinates closer than ``radius`` compare as equal so that rounding
    noise does not decide ties.
    """
    for x, y in zip(np.asarray(a).ravel(), np.asarray(b).ravel()):
        for p, q in ((x.real, y.real), (x.imag, y.imag)):
            if abs(p - q) > radius:
                return -1 if p < q else 1
    return 0


def _invariant_basis(b, select):
    """Orthonormal basis of the invariant subspace for eigenvalues with ``select``."""
    t, z, sdim = scipy.linalg.schur(b, output="complex", sort=select)
    return z[:, :sdim], sdim


# two eigenvalues are linked when they are closer than this many times the
# sum of their first-order error estimates eps * scale / s_i (s_i the
# cosine between left and right eigenvectors); a perturbed Jordan block of
# size m scatters by about its own error estimates, distinct eigenvalues
# with resolvable gaps are far outside them
_LINK_FACTOR = 100.0
# a cluster is split where a single-linkage step exceeds the previous one
# by this factor
_GAP_RATIO = 10.0


def _group_basis(b, ev, members):
    member = np.zeros(len(ev), dtype=bool)
    member[members] = True

    def select(x):
        return bool(member[int(np.argmin(np.abs(ev - x)))])

    return _invariant_basis(b, select)


def _gap_split(values, scale):
    """Split a group at its widest relative gap in single linkage, or None.

    The eigenvalues of a perturbed Jordan block spread evenly around a
    circle, so a linkage step much longer than the one before it separates
    distinct eigenvalues.
    """
    pts = np.column_stack([values.real, values.imag])
    z = scipy.cluster.hierarchy.linkage(scipy.spatial.distance.pdist(pts), method="single")
    heights = z[:, 2]
    if len(heights) < 2:
        return None
    # exactly repeated eigenvalues have height 0; rounding sets a floor
    below = np.maximum(heights[:-1], np.sqrt(np.finfo(float).eps) * scale)
    ratios = heights[1:] / below
    j = int(np.argmax(ratios))
    if ratios[j] <= _GAP_RATIO:
        return None
    labels = scipy.cluster.hierarchy.fcluster(z, below[j], criterion="distance")
    return [np.flatnonzero(labels == c) for c in np.unique(labels)]


def eigenvalue_errors(b, delta):
    """Eigenvalues and first-order error estimates ``delta / s_i``.

    ``delta`` is the size of the perturbation already present in ``b``,
    ``eps * ||B||`` for a matrix given exactly.
    """
    ev, vl, vr = scipy.linalg.eig(b, left=True, right=True)
    cos = np.abs(np.sum(vl.conj() * vr, axis=0)) / (
        np.linalg.norm(vl, axis=0) * np.linalg.norm(vr, axis=0))
    tiny = np.finfo(float).tiny
    return ev, delta / np.maximum(cos, tiny)


def _linked_groups(ev, err, cap):
    m = len(ev)
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(m):
        for j in range(i + 1, m):
            if abs(ev[i] - ev[j]) <= min(_LINK_FACTOR * (err[i] + err[j]), cap):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def eigen_groups(b, tol=DEFAULT_TOL, scale=None, delta=None, reference=None):
    """Eigenvalues of ``b`` and their grouping into numerically multiple eigenvalues.

    Two eigenvalues are linked when their distance is within a multiple of
    their first-order error estimates, capped by ``tol.cluster_radius``
    (the ~eps^(1/m) scatter of a Jordan block of size m).  A linked group
    with a wide relative gap in its linkage heights is split there.
    ``delta`` is the perturbation already present in ``b`` (default
    ``eps * scale``).  ``reference`` is a pair of eigenvalues and error
    estimates of a matrix that ``b`` is a compression of.
    """
    b = np.asarray(b, dtype=complex)
    if scale is None:
        scale = max(1.0, np.linalg.norm(b, 2))
    eps_scale = np.finfo(float).eps * scale
    ev, err = eigenvalue_errors(b, eps_scale if delta is None else max(delta, eps_scale))

    def refine(idx):
        if len(idx) == 1:
            return [idx]
        parts = _gap_split(ev[idx], scale)
        if parts is None:
            return [idx]
        return [g for part in parts for g in refine(idx[part])]

    if reference is not None:
        # a compressed block inherits the scatter of the full matrix
        ref_ev, ref_err = reference
        near = np.argmin(np.abs(ev[:, None] - ref_ev[None, :]), axis=1)
        err = np.maximum(err, ref_err[near])
    groups = [g for grp in _linked_groups(ev, err, tol.cluster_radius(scale)) for g in refine(grp)]
    return ev, sorted(groups, key=lambda g: int(g.min()))


@dataclass(frozen=True, eq=False)
class JointCluster:
    """A joint generalized eigenspace: orthonormal ``basis`` and mean joint eigenvalue."""

    basis: np.ndarray
    eigenvalue: np.ndarray

    @property
    def multiplicity(self):
        return self.basis.shape[1]


def joint_clusters(t, tol=DEFAULT_TOL, delta=0.0):
    """Split C^k into joint generalized eigenspaces of a commuting tuple.

    Each returned cluster carries an orthonormal basis of its (T-invariant)
    generalized eigenspace and the joint eigenvalue computed as the mean of
    the restricted traces, which stays accurate for defective clusters.
    ``delta`` is the backward error already present in the tuple, as for a
    deflated block.
    """
    mats = list(t.matrices) if isinstance(t, CommutingTuple) else [np.asarray(m) for m in t]
    k = mats[0].shape[0]
    scale = _mat_scale(mats)
    current = [(np.eye(k, dtype=complex), [])]
    for a in mats:
        nxt = []
        full = (eigenvalue_errors(a, max(delta, np.finfo(float).eps * scale))
                if len(current) > 1 else None)
        for q, lam in current:
            aq = a @ q
            b = q.conj().T @ aq
            m = b.shape[0]
            # the block is only as good as the invariance of q
            leak = np.linalg.norm(aq - q @ b, 2) if m < k else 0.0
            ev, groups = eigen_groups(b, tol, scale, max(leak, delta), full)
            if len(groups) == 1:
                nxt.append((q, lam + [np.trace(b) / m]))
                continue
            for g in groups:
                z, sdim = _group_basis(b, ev, g)
                if sdim != len(g):
                    raise ResidualTooLarge(
                        f"eigenvalue cluster near {ev[g].mean():.6g} has {len(g)} members "
                        f"but its invariant subspace has dimension {sdim}")
                bz = z.conj().T @ b @ z
                nxt.append((q @ z, lam + [np.trace(bz) / sdim]))
        current = nxt
    return [JointCluster(q, np.array(lam, dtype=complex)) for q, lam in current]


def _sort_clusters(clusters):
    pts = np.array([c.eigenvalue for c in clusters])
    radius = merge_radius(pts)
    return sorted(clusters, key=functools.cmp_to_key(
        lambda a, b: lex_compare(a.eigenvalue, b.eigenvalue, radius)))


def common_eigenvector(t, tol=DEFAULT_TOL, scales=None, delta=0.0):
    """A unit vector v and joint eigenvalue with ``T_i v = lambda_i v`` for all i.

    Among all joint eigenvalues the lexicographically smallest one is used.
    Raises :class:`ResidualTooLarge` if the best candidate misses the
    tolerance ``tol.threshold(||T_i||)`` for some i.  ``scales`` overrides
    the norms, e.g. with those of the undeflated tuple, and ``delta`` is
    passed on to :func:`joint_clusters`.
    """
    mats = list(t.matrices) if isinstance(t, CommutingTuple) else [np.asarray(m) for m in t]
    cluster = _sort_clusters(joint_clusters(mats, tol, delta))[0]
    q, lam = cluster.basis, cluster.eigenvalue
    m = q.shape[1]
    stacked = np.vstack([q.conj().T @ a @ q - l * np.eye(m) for a, l in zip(mats, lam)])
    _, _, vh = np.linalg.svd(stacked)
    v = phase_fix(q @ vh[-1].conj())
    if scales is None:
        scales = [np.linalg.norm(a, 2) for a in mats]
    for a, l, sc in zip(mats, lam, scales):
        r = np.linalg.norm(a @ v - l * v)
        if r > tol.threshold(sc):
            raise ResidualTooLarge(
                f"common eigenvector residual {r:.3e} exceeds tolerance at joint eigenvalue {lam}")
    return v, lam


@dataclass(frozen=True, eq=False)
class SchurFlag:
    """Unitary U with every ``U* T_i U`` upper triangular."""

    unitary: np.ndarray
    triangulars: tuple
    residual: float

    @property
    def k(self):
        return self.unitary.shape[0]

    @property
    def n(self):
        return len(self.triangulars)

    def reconstruction_error(self, t):
        u = self.unitary
        return max(np.linalg.norm(u @ r @ u.conj().T - a, 2) / max(1.0, np.linalg.norm(a, 2))
                   for r, a in zip(self.triangulars, t.matrices))


def _complement_basis(w, v):
    """Orthonormal basis (in ambient coordinates) of span(w) minus the unit vector w @ x."""
    m = w.shape[1]
    x = w.conj().T @ v
    q, _ = np.linalg.qr(np.hstack([x[:, None], np.eye(m, dtype=complex)]))
    return w @ q[:, 1:m]


def lower_residual(triangulars, mats):
    return max(np.linalg.norm(np.tril(r, -1), 2) / max(1.0, np.linalg.norm(a, 2))
               for r, a in zip(triangulars, mats))


def simultaneous_schur(t, tol=DEFAULT_TOL, scales=None, delta=0.0):
    """Simultaneous upper triangular form by repeated common-eigenvector deflation.

    ``scales`` and ``delta`` describe the tuple ``t`` was cut from when it is
    itself a corner of a larger one: the norms there and the size of the
    block that was dropped.
    """
    mats = list(t.matrices)
    k = t.k
    w = np.eye(k, dtype=complex)
    cols = []
    # deflated blocks inherit the rounding of the full tuple
    if scales is None:
        scales = [np.linalg.norm(a, 2) for a in mats]
    base = delta
    for _ in range(k - 1):
        compressed = [w.conj().T @ a @ w for a in mats]
        # the dropped lower block is the backward error of the deflation
        delta = max([base] + [np.linalg.norm(w.conj().T @ a @ np.column_stack(cols), 2)
                              for a in mats if cols])
        x, _ = common_eigenvector(compressed, tol, scales, delta)
        u = phase_fix(w @ x)
        cols.append(u)
        w = _complement_basis(w, u)
    cols.append(phase_fix(w[:, 0]))
    u = np.column_stack(cols)
    tri = tuple(u.conj().T @ a @ u for a in mats)
    return SchurFlag(u, tri, lower_residual(tri, mats))


def joint_eigenvalues(flag):
    """k x n array; row p holds the p-th diagonal entry of every triangular form."""
    return np.column_stack([np.diag(r) for r in flag.triangulars])


# -- measures -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JointSpectralMeasure:
    """Atomic probability measure on C^n with rational weights ``counts / total``."""

    atoms: np.ndarray
    counts: tuple
    total: int

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=complex)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        if len(atoms) != len(self.counts) or sum(self.counts) != self.total:
            raise ValueError("counts must match atoms and sum to total")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @property
    def n(self):
        return self.atoms.shape[1]

    @property
    def weights(self):
        return np.array(self.counts, dtype=float) / self.total

    @property
    def fractions(self):
        return [Fraction(c, self.total) for c in self.counts]

    def mass(self, contains):
        """Exact measure of the set ``{z : contains(z)}``."""
        return Fraction(sum(c for a, c in zip(self.atoms, self.counts) if contains(a)), self.total)

    def expanded(self):
        """Atoms repeated by multiplicity (total rows)."""
        return np.repeat(self.atoms, self.counts, axis=0)

    def as_dict(self):
        return {tuple(a): Fraction(c, self.total) for a, c in zip(self.atoms, self.counts)}

    def __repr__(self):
        return f"JointSpectralMeasure(n={self.n}, atoms={len(self.counts)}, total={self.total})"


def _from_points(points, counts=None, total=None, radius=None):
    points = np.asarray(points, dtype=complex)
    if points.ndim == 1:
        points = points[:, None]
    if counts is None:
        counts = [1] * len(points)
    if total is None:
        total = int(sum(counts))
    if radius is None:
        radius = merge_radius(points)
    groups = _single_linkage(points, radius)
    atoms, cnt = [], []
    for g in groups:
        w = np.array([counts[i] for i in g], dtype=float)
        atoms.append((points[g] * w[:, None]).sum(axis=0) / w.sum())
        cnt.append(int(sum(counts[i] for i in g)))
    order = sorted(range(len(atoms)), key=functools.cmp_to_key(
        lambda i, j: lex_compare(atoms[i], atoms[j], radius)))
    return JointSpectralMeasure(np.array([atoms[i] for i in order]),
                                tuple(cnt[i] for i in order), total)


def measure_from_points(points):
    """Uniform counting measure on the rows of ``points`` after merging."""
    return _from_points(points)


def joint_measure(t, tol=DEFAULT_TOL):
    """Joint spectral measure: uniform atoms at the joint eigenvalues.

    Atoms are the cluster means of the joint generalized eigenspaces; the
    diagonal of a triangular form scatters a defective eigenvalue by about
    eps^(1/m) and would split it.
    """
    pts = [c.eigenvalue for c in joint_clusters(t, tol) for _ in range(c.multiplicity)]
    return _from_points(np.array(pts))


def marginal(nu, i):
    """Push the measure to coordinate ``i`` (0-based)."""
    if not 0 <= i < nu.n:
        raise IndexError(f"coordinate {i} out of range for n={nu.n}")
    return _from_points(nu.atoms[:, [i]], nu.counts, nu.total)


def _as_map(f):
    """Turn a polynomial, function object, sequence of them or callable into z -> C^m."""
    if isinstance(f, (list, tuple)):
        parts = [_as_map(g) for g in f]
        return lambda z: np.concatenate([p(z) for p in parts])
    if callable(f):
        return lambda z: np.atleast_1d(np.asarray(f(z), dtype=complex))
    raise TypeError(f"cannot use {type(f).__name__} as a map")


def pushforward(nu, f, m=None):
    """The image measure ``f_* nu`` (atoms mapped, weights carried, merged)."""
    fmap = _as_map(f)
    pts = np.array([fmap(a) for a in nu.atoms])
    if m is not None and pts.shape[1] != m:
        raise DimensionMismatch(f"map has {pts.shape[1]} outputs, expected {m}")
    return _from_points(pts, nu.counts, nu.total)


def multiset_distance(a, b):
    """Largest matched distance under an optimal assignment of two point multisets.

    Accepts arrays (rows are points) or :class:`JointSpectralMeasure` (expanded
    by multiplicity on a common denominator).  Returns ``inf`` when the
    multisets have different sizes.
    """
    if isinstance(a, JointSpectralMeasure) and isinstance(b, JointSpectralMeasure):
        d = lcm(a.total, b.total)
        a = np.repeat(a.atoms, [c * d // a.total for c in a.counts], axis=0)
        b = np.repeat(b.atoms, [c * d // b.total for c in b.counts], axis=0)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape != b.shape:
        return float("inf")
    cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if len(r) else 0.0


def measures_equal(a, b):
    """Atom-level equality: same rational weights on atoms within the merge radius."""
    if a.n != b.n or len(a.counts) != len(b.counts):
        return False
    radius = max(merge_radius(a.atoms), merge_radius(b.atoms))
    fa, fb = a.fractions, b.fractions
    used = set()
    for atom, w in zip(a.atoms, fa):
        hit = [j for j in range(len(fb)) if j not in used
               and np.linalg.norm(b.atoms[j] - atom) <= 10 * radius and fb[j] == w]
        if not hit:
            return False
        used.add(hit[0])
    return True


# -- direct sums ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockTuple:
    """Finite family of commuting tuples; weights are proportional to block sizes."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("need at least one block")
        if len({b.n for b in blocks}) != 1:
            raise DimensionMismatch("all blocks must have the same tuple length")
        object.__setattr__(self, "blocks", blocks)

    @property
    def weights(self):
        sizes = [b.k for b in self.blocks]
        return [Fraction(s, sum(sizes)) for s in sizes]


def direct_sum(blocks):
    """Block-diagonal tuple of a :class:`BlockTuple` (or a sequence of tuples)."""
    if not isinstance(blocks, BlockTuple):
        blocks = BlockTuple(tuple(blocks))
    n = blocks.blocks[0].n
    mats = tuple(scipy.linalg.block_diag(*[b.matrices[i] for b in blocks.blocks]) for i in range(n))
    return CommutingTuple(mats, threshold=max(b.threshold for b in blocks.blocks))


def mixture(measures, weights):
    """``sum_z w_z nu_z`` for rational weights summing to one."""
    weights = [Fraction(w) for w in weights]
    if sum(weights) != 1:
        raise ValueError("mixture weights must sum to one")
    denom = 1
    for nu, w in zip(measures, weights):
        denom = lcm(denom, (w / nu.total).denominator)
    pts, counts = [], []
    for nu, w in zip(measures, weights):
        for atom, c in zip(nu.atoms, nu.counts):
            pts.append(atom)
            counts.append(int(w * c / nu.total * denom))
    return _from_points(np.array(pts), counts, denom)


def restrict(nu, contains):
    """Renormalized restriction of ``nu`` to ``{z : contains(z)}``."""
    keep = [(a, c) for a, c in zip(nu.atoms, nu.counts) if contains(a)]
    if not keep:
        raise ValueError("restriction to a null set")
    total = sum(c for _, c in keep)
    return JointSpectralMeasure(np.array([a for a, _ in keep]), tuple(c for _, c in keep), total)
