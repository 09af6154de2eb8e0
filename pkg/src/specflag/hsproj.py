"""Spectral projections of single matrices and commuting tuples onto regions.

For a matrix A and a region B of C the projection is onto the sum of the
generalized eigenspaces of A with eigenvalues in B.  Such projections are
invariant but not reducing, so complements are built from a reordered
Schur form instead of orthogonal complements.

Joint projections of tuples are built two ways:

* :func:`hs_joint` follows the region's structure (meets over rectangle
  coordinates, joins over unions) using single-matrix projections;
* :func:`joint_spectral_subspace` spans the joint generalized eigenspaces
  whose joint eigenvalue satisfies a classifier.

Agreement of the two is a nontrivial check and is what the tests exploit.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BoundaryAmbiguous, DimensionMismatch, NotInvariant, SingularMatrix
from .numcore import (DEFAULT_TOL, Subspace, as_cmatrix, join, join_all, meet, meet_all,
                      orth_complement, projection_distance, span)
from .regions import (Complement, FullPlane, Intersection, Predicate, Rectangle, Region,
                      Union)
from .triangular import (_group_basis, eigen_groups, joint_clusters, joint_measure,
                         measures_equal, mixture, restrict)
from .tuples import CommutingTuple

__all__ = [
    "HSProjection", "hs_single", "hs_joint", "joint_spectral_subspace", "boundary_band",
    "invariance_residual", "compress", "middle_corner", "adjoint_dual", "similarity_transport",
    "CompressionReport", "DualityReport", "TransportReport",
]


def boundary_band(scale, tol=DEFAULT_TOL):
    """Distance to a region boundary below which membership is refused.

    Membership is always decided for cluster means, which are accurate to
    rounding even for defective eigenvalues.
    """
    return tol.threshold(scale)


@dataclass(frozen=True, eq=False)
class HSProjection:
    subspace: Subspace
    region: Region
    tuple_ref: int | None = None

    @property
    def trace(self):
        return self.subspace.trace

    @property
    def dim(self):
        return self.subspace.dim

    @property
    def frame(self):
        return self.subspace.frame

    def __repr__(self):
        return f"HSProjection(dim={self.dim}, trace={self.trace})"


def invariance_residual(subspace, mats):
    """``max_i ||(1 - P) T_i P|| / max(1, ||T_i||)``."""
    w = subspace.frame
    if w.shape[1] == 0:
        return 0.0
    out = 0.0
    for a in mats:
        aw = a @ w
        r = aw - w @ (w.conj().T @ aw)
        out = max(out, np.linalg.norm(r, 2) / max(1.0, np.linalg.norm(a, 2)))
    return float(out)


def _check_region(region, n):
    if region.n != n:
        raise DimensionMismatch(f"region has dimension {region.n}, tuple has {n}")


def hs_single(a, region, tol=DEFAULT_TOL):
    """Invariant subspace of ``a`` for its eigenvalues in the region of C.

    Eigenvalues are grouped into clusters first and each cluster is judged by
    its mean, so a perturbed Jordan block is never split by the boundary.
    """
    a = as_cmatrix(a, square=True, name="A")
    if region.n != 1:
        raise DimensionMismatch("hs_single needs a region of C")
    k = a.shape[0]
    if isinstance(region, FullPlane):
        return HSProjection(Subspace.full(k), region)
    scale = max(1.0, np.linalg.norm(a, 2))
    ev, groups = eigen_groups(a, tol, scale)
    band = boundary_band(scale, tol)
    chosen = []
    for g in groups:
        c = ev[g].mean()
        v = region.classify(np.array([c]), band)
        if v is None:
            raise BoundaryAmbiguous(f"eigenvalue {c:.6g} lies on the boundary of the region", c)
        if v:
            chosen.extend(g)
    if not chosen:
        return HSProjection(Subspace.zero(k), region)
    if len(chosen) == k:
        return HSProjection(Subspace.full(k), region)
    z, sdim = _group_basis(a, ev, np.array(chosen))
    if sdim != len(chosen):
        raise BoundaryAmbiguous("reordered Schur form disagrees with the eigenvalue count",
                                ev[chosen[0]])
    return HSProjection(Subspace(k, z), region)


def _mats(t):
    return list(t.matrices) if isinstance(t, CommutingTuple) else [np.asarray(m) for m in t]


def joint_spectral_subspace(t, region, tol=DEFAULT_TOL):
    """Span of the joint generalized eigenspaces whose eigenvalue lies in ``region``.

    ``region`` may be any :class:`Region`, including a :class:`Predicate`.
    """
    mats = _mats(t)
    k = mats[0].shape[0]
    _check_region(region, len(mats))
    band = boundary_band(max(1.0, max(np.linalg.norm(m, 2) for m in mats)), tol)
    chosen = []
    for c in joint_clusters(mats, tol):
        v = region.classify(c.eigenvalue, band)
        if v is None:
            raise BoundaryAmbiguous(
                f"joint eigenvalue {np.round(c.eigenvalue, 8)} lies on the region boundary",
                c.eigenvalue)
        if v:
            chosen.append(c.basis)
    if not chosen:
        return HSProjection(Subspace.zero(k), region, id(t))
    # the generalized eigenspaces are independent, so QR never loses rank here
    q, _ = np.linalg.qr(np.hstack(chosen))
    return HSProjection(Subspace(k, q), region, id(t))


def hs_joint(t, region, tol=DEFAULT_TOL):
    """Joint spectral projection of a commuting tuple for a constructible region.

    Rectangles give meets of the coordinate projections, unions give joins,
    intersections give meets and complements use the joint reordered Schur
    construction.
    """
    mats = _mats(t)
    k = mats[0].shape[0]
    _check_region(region, len(mats))
    if isinstance(region, Predicate):
        raise TypeError("predicate regions are for verification only; "
                        "use joint_spectral_subspace")
    if isinstance(region, Rectangle):
        parts = [hs_single(a, f, tol).subspace for a, f in zip(mats, region.factors)
                 if not isinstance(f, FullPlane)]
        sub = meet_all(parts, k, tol)
    elif isinstance(region, Union):
        sub = join_all([hs_joint(mats, m, tol).subspace for m in region.members], k, tol)
    elif isinstance(region, Intersection):
        sub = meet_all([hs_joint(mats, m, tol).subspace for m in region.members], k, tol)
    elif isinstance(region, Complement) or region.n == 1:
        sub = joint_spectral_subspace(mats, region, tol).subspace
    else:
        raise TypeError(f"unsupported region type {type(region).__name__}")
    return HSProjection(sub, region, id(t))


# -- compression and corners ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class CompressionReport:
    compressed: CommutingTuple
    complement: CommutingTuple | None
    weight: Fraction
    measure_ok: bool
    q_distances: tuple
    complement_distances: tuple

    @property
    def max_distance(self):
        return max(self.q_distances + self.complement_distances, default=0.0)


def _embed(frame, sub):
    """Subspace of C^k given a subspace of the range of ``frame``."""
    return Subspace(frame.shape[0], frame @ sub.frame)


def compress(t, q, regions=(), tol=DEFAULT_TOL, atol=1e-8):
    """Compress ``t`` to an invariant subspace ``q`` and check the corner identities.

    For each region X the projection of the compressed tuple is compared with
    ``P(T:X) meet Q`` and the projection of the complementary corner with
    ``(Q join P(T:X)) meet (1 - Q)``; the measure of ``t`` is compared with the
    trace-weighted mixture of the two corner measures.
    """
    sub = q.subspace if isinstance(q, HSProjection) else q
    res = invariance_residual(sub, t.matrices)
    if res > atol:
        raise NotInvariant(f"subspace is not invariant (residual {res:.3e})")
    if sub.dim == 0:
        raise ValueError("cannot compress to the zero subspace")
    thr = max(t.threshold, 10 * res)
    compressed = CommutingTuple(tuple(sub.frame.conj().T @ a @ sub.frame for a in t.matrices),
                                threshold=thr)
    comp_sub = orth_complement(sub)
    complement = None
    if comp_sub.dim:
        complement = CommutingTuple(
            tuple(comp_sub.frame.conj().T @ a @ comp_sub.frame for a in t.matrices), threshold=thr)
    weight = sub.trace
    parts = [joint_measure(compressed, tol)]
    weights = [weight]
    if complement is not None:
        parts.append(joint_measure(complement, tol))
        weights.append(1 - weight)
    measure_ok = measures_equal(joint_measure(t, tol), mixture(parts, weights))
    qd, cd = [], []
    for x in regions:
        p = hs_joint(t, x, tol).subspace
        inner = _embed(sub.frame, hs_joint(compressed, x, tol).subspace)
        qd.append(projection_distance(inner, meet(p, sub, tol)))
        if complement is not None:
            outer = _embed(comp_sub.frame, hs_joint(complement, x, tol).subspace)
            cd.append(projection_distance(outer, meet(join(sub, p, tol), comp_sub, tol)))
    return CompressionReport(compressed, complement, weight, measure_ok, tuple(qd), tuple(cd))


@dataclass(frozen=True, eq=False)
class CornerReport:
    subspace: Subspace
    compressed: CommutingTuple
    measure_ok: bool


def middle_corner(t, inner, outer, tol=DEFAULT_TOL):
    """Compress ``t`` to ``P(T:outer) - P(T:inner)`` for nested regions.

    The compressed measure is compared with the restriction of the joint
    measure to ``outer`` minus ``inner``, renormalized.
    """
    p1 = hs_joint(t, inner, tol).subspace
    p2 = hs_joint(t, outer, tol).subspace
    diff = meet(p2, orth_complement(p1), tol)
    if diff.dim == 0:
        raise ValueError("the corner between the two regions is zero")
    comp = CommutingTuple(tuple(diff.frame.conj().T @ a @ diff.frame for a in t.matrices),
                          threshold=max(t.threshold, 1e-9))
    nu = joint_measure(t, tol)
    expected = restrict(nu, lambda z: outer.contains(z) and not inner.contains(z))
    return CornerReport(diff, comp, measures_equal(joint_measure(comp, tol), expected))


# -- duality and similarity -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class DualityReport:
    adjoint_side: Subspace
    complement_side: Subspace
    distance: float


def adjoint_dual(t, region, tol=DEFAULT_TOL):
    """Compare ``P(T*:E)`` with ``1 - P(T : C^n minus conj(E))``, computed independently."""
    left = hs_joint(t.adjoint(), region, tol).subspace
    right = orth_complement(hs_joint(t, Complement(region.conjugate()), tol).subspace)
    return DualityReport(left, right, projection_distance(left, right))


@dataclass(frozen=True, eq=False)
class TransportReport:
    transported: Subspace
    range_side: Subspace
    distance: float
    condition: float


def similarity_transport(s, t, region, tol=DEFAULT_TOL):
    """Compare ``P(S T S^-1 : X)`` with the range projection of ``S P(T:X)``."""
    s = as_cmatrix(s, square=True, name="S")
    if s.shape[0] != t.k:
        raise DimensionMismatch("S must match the tuple size")
    sv = np.linalg.svd(s, compute_uv=False)
    if sv[-1] <= tol.threshold(sv[0]):
        raise SingularMatrix(f"S is numerically singular (smallest singular value {sv[-1]:.3e})")
    st = t.conjugate_by(s)
    left = hs_joint(st, region, tol).subspace
    right = span(s @ hs_joint(t, region, tol).frame, tol)
    return TransportReport(left, right, projection_distance(left, right), float(sv[0] / sv[-1]))
