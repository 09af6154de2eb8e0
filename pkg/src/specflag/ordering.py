"""Curve-induced orderings of joint eigenvalues, invariant flags and the diagonal expectation."""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curve import PeanoCurve, peano_curve
from .errors import NotTriangular
from .hsproj import HSProjection
from .numcore import DEFAULT_TOL, Subspace
from .regions import Predicate
from .triangular import (JointSpectralMeasure, joint_clusters, joint_measure, lex_compare,
                         merge_radius, multiset_distance, simultaneous_schur)
from .tuples import CommutingTuple, eval_poly, is_nilpotent

__all__ = [
    "SpectralOrdering", "Flag", "SimultutReport", "peano_curve", "curve_for", "assign_params",
    "build_flag", "triangularize_by_flag", "diag_expectation", "verify_simultut",
    "eigenvalue_multiset",
]


@dataclass(frozen=True, eq=False)
class SpectralOrdering:
    """Curve parameters of the atoms of a joint measure.

    ``indices[p]`` is the outer curve index assigned to atom p and
    ``params[p] = indices[p] / 4^D``.  ``order`` lists atom positions by
    increasing parameter, ties broken lexicographically on the atoms.
    """

    measure: JointSpectralMeasure
    indices: tuple
    params: np.ndarray
    order: tuple
    curve: PeanoCurve

    @property
    def atoms(self):
        return self.measure.atoms

    @property
    def depth(self):
        return self.curve.depth

    def exact_params(self):
        return [Fraction(i, self.curve.samples) for i in self.indices]


def curve_for(t, depth):
    """Curve onto the polydisk whose radii are the operator norms of the tuple."""
    return peano_curve(t.n, tuple(float(r) for r in t.norms), depth)


def assign_params(curve, nu):
    """Smallest curve parameter whose depth-d piece lands in each atom's cell."""
    idx = tuple(curve.first_index(curve.target_cell(a)) for a in nu.atoms)
    params = np.array([i / curve.samples for i in idx])
    radius = merge_radius(nu.atoms)

    def cmp(p, q):
        if idx[p] != idx[q]:
            return -1 if idx[p] < idx[q] else 1
        return lex_compare(nu.atoms[p], nu.atoms[q], radius)

    order = tuple(sorted(range(len(idx)), key=functools.cmp_to_key(cmp)))
    return SpectralOrdering(nu, idx, params, order, curve)


# -- flags -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Flag:
    """Nested invariant subspaces, one step per atom in curve order.

    ``unitary`` has the flag as leading column blocks and is refined inside
    each block so that every ``V* T_i V`` is upper triangular.
    """

    breakpoints: tuple
    projections: tuple
    dims: tuple
    unitary: np.ndarray
    atoms: np.ndarray
    ordering: SpectralOrdering

    @property
    def k(self):
        return self.unitary.shape[0]

    def invariance_residual(self, t):
        from .hsproj import invariance_residual
        return max(invariance_residual(p.subspace, t.matrices) for p in self.projections)


def _nearest_atom(atoms, point):
    return int(np.argmin(np.linalg.norm(atoms - point, axis=1)))


def build_flag(t, ordering, tol=DEFAULT_TOL):
    """Flag ``q_1 <= q_2 <= ...`` of joint spectral subspaces along the curve order."""
    atoms = ordering.atoms
    rank = {a: r for r, a in enumerate(ordering.order)}
    clusters = joint_clusters(t, tol)
    blocks = [[] for _ in ordering.order]
    for c in clusters:
        blocks[rank[_nearest_atom(atoms, c.eigenvalue)]].append(c.basis)
    bases = [np.hstack(b) for b in blocks if b]
    q, _ = np.linalg.qr(np.hstack(bases))
    dims = tuple(int(d) for d in np.cumsum([b.shape[1] for b in bases]))
    # refine each block of the flag with a simultaneous Schur form of its corner
    cols, start = [], 0
    scales = t.norms
    for end in dims:
        w = q[:, start:end]
        corner = CommutingTuple(tuple(w.conj().T @ a @ w for a in t.matrices), threshold=1e-8)
        dropped = max((np.linalg.norm(q[:, end:].conj().T @ a @ w, 2) for a in t.matrices),
                      default=0.0) if end < q.shape[1] else 0.0
        cols.append(w @ simultaneous_schur(corner, tol, scales, dropped).unitary)
        start = end
    v = np.hstack(cols)
    ordered = atoms[list(ordering.order)]
    projections, breaks = [], []
    nonempty = [p for p, b in enumerate(blocks) if b]
    for step, end in enumerate(dims):
        p = nonempty[step]
        chosen = {ordering.order[r] for r in range(p + 1)}
        region = Predicate(lambda z, s=frozenset(chosen): _nearest_atom(atoms, z) in s, t.n)
        projections.append(HSProjection(Subspace(t.k, v[:, :end]), region, id(t)))
        breaks.append(float(ordering.params[ordering.order[p]]))
    return Flag(tuple(breaks), tuple(projections), dims, v, ordered, ordering)


def triangularize_by_flag(t, flag):
    """``(V, [V* T_i V])`` for the flag's unitary."""
    v = flag.unitary
    return v, [v.conj().T @ a @ v for a in t.matrices]


def diag_expectation(s, flag, tol=DEFAULT_TOL):
    """Keep the diagonal of ``s`` in the flag basis: ``V diag(V* S V) V*``."""
    v = flag.unitary
    r = v.conj().T @ np.asarray(s, dtype=complex) @ v
    low = np.linalg.norm(np.tril(r, -1), 2)
    scale = max(1.0, np.linalg.norm(s, 2))
    if low > 10 * tol.threshold(scale):
        raise NotTriangular(f"operator is not triangular for the flag (lower part {low:.3e})")
    return v @ np.diag(np.diag(r)) @ v.conj().T


def eigenvalue_multiset(a, tol=DEFAULT_TOL):
    """Eigenvalues with multiplicity, each cluster replaced by its exact-trace mean.

    Plain eigenvalues of a Jordan block of size m are off by about eps^(1/m);
    cluster means are accurate to rounding.
    """
    out = []
    for c in joint_clusters([np.asarray(a, dtype=complex)], tol):
        out.extend([c.eigenvalue[0]] * c.multiplicity)
    return np.array(out)


@dataclass(frozen=True, eq=False)
class SimultutReport:
    eigen_distance: float
    nilpotent: bool
    normal_part: np.ndarray

    def passed(self, atol=1e-7):
        return self.eigen_distance <= atol and self.nilpotent


def verify_simultut(s, t, flag, f=None, tol=DEFAULT_TOL):
    """Check that ``s`` and its flag diagonal share eigenvalues and differ by a nilpotent.

    If ``f`` (a polynomial with ``s = f(T)``) is given, the eigenvalues of
    ``s`` are also compared with ``f`` evaluated at the joint eigenvalues.
    """
    s = eval_poly(f, t) if s is None else np.asarray(s, dtype=complex)
    n_part = diag_expectation(s, flag, tol)
    ev_s = eigenvalue_multiset(s, tol)
    if f is not None:
        nu = joint_measure(t, tol)
        target = np.array([f(a) for a in nu.expanded()])
    else:
        target = np.diag(flag.unitary.conj().T @ n_part @ flag.unitary)
    dist = multiset_distance(ev_s, target)
    return SimultutReport(dist, is_nilpotent(s - n_part, tol), n_part)
