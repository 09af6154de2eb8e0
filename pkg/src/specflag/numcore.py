"""Dense complex matrices, tolerances and the lattice of subspaces.

A :class:`Subspace` is stored as an orthonormal frame; the orthogonal
projector is derived on demand.  Meets are computed from principal angles
and joins from a rank-revealing SVD of the stacked frames.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch

__all__ = [
    "Tolerance", "DEFAULT_TOL", "Subspace", "as_cmatrix", "numerical_rank",
    "range_projection", "meet", "join", "meet_all", "join_all",
    "orth_complement", "is_subspace_of", "projection_distance", "span",
    "random_unitary", "random_invertible", "random_subspace",
    "lattice_example_codim_one", "lattice_example_nonmodular_angle",
]


@dataclass(frozen=True)
class Tolerance:
    """Absolute floor plus a relative part scaled by the problem size.

    A quantity ``x`` is treated as zero when
    ``x <= abs_eps + rel_eps * scale``.
    """

    abs_eps: float = 1e-10
    rel_eps: float = 1e-8

    def __post_init__(self):
        if not (self.abs_eps > 0 and self.rel_eps > 0):
            raise ValueError("tolerances must be strictly positive")

    def threshold(self, scale=1.0):
        return self.abs_eps + self.rel_eps * float(scale)

    def cluster_radius(self, scale=1.0):
        # eigenvalues of a defective block of size m move by ~eps**(1/m);
        # the square root of the threshold absorbs the m=2 case with margin
        return np.sqrt(self.abs_eps + self.rel_eps) * (1.0 + float(scale))


DEFAULT_TOL = Tolerance()


def as_cmatrix(a, square=False, name="matrix"):
    """Validate and convert to a 2-d complex128 array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 2-d array, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^k held as a k x r matrix with orthonormal columns.

    The zero subspace has a frame with zero columns.
    """

    ambient_dim: int
    frame: np.ndarray = field(repr=False)

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=complex)
        if f.ndim != 2 or f.shape[0] != self.ambient_dim:
            raise DimensionMismatch(
                f"frame shape {f.shape} does not match ambient dimension {self.ambient_dim}")
        f.setflags(write=False)
        object.__setattr__(self, "frame", f)

    @classmethod
    def zero(cls, k):
        return cls(k, np.zeros((k, 0), dtype=complex))

    @classmethod
    def full(cls, k):
        return cls(k, np.eye(k, dtype=complex))

    @property
    def dim(self):
        return self.frame.shape[1]

    @property
    def projector(self):
        return self.frame @ self.frame.conj().T

    @property
    def trace(self):
        """Normalized trace dim/k as an exact rational."""
        return Fraction(self.dim, self.ambient_dim)

    def orthonormality_error(self):
        if self.dim == 0:
            return 0.0
        return float(np.linalg.norm(self.frame.conj().T @ self.frame - np.eye(self.dim), 2))

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _check_same_ambient(p, q):
    if p.ambient_dim != q.ambient_dim:
        raise DimensionMismatch(
            f"ambient dimensions differ: {p.ambient_dim} vs {q.ambient_dim}")


def numerical_rank(s, tol=DEFAULT_TOL):
    """Number of singular values above ``abs_eps + rel_eps * s_max``."""
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        return 0
    smax = float(s.max())
    return int(np.count_nonzero(s > tol.threshold(smax)))


def span(vectors, tol=DEFAULT_TOL):
    """Subspace spanned by the columns of ``vectors`` (k x m, m may be 0)."""
    v = np.asarray(vectors, dtype=complex)
    if v.ndim != 2:
        raise DimensionMismatch("vectors must be a 2-d array")
    k = v.shape[0]
    if v.shape[1] == 0 or not np.any(v):
        return Subspace.zero(k)
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    r = numerical_rank(s, tol)
    return Subspace(k, u[:, :r])


def range_projection(a, tol=DEFAULT_TOL):
    """Subspace spanned by the columns of the square matrix ``a``."""
    return span(as_cmatrix(a, square=True), tol)


def meet(p, q, tol=DEFAULT_TOL):
    """Intersection of two subspaces via principal angles.

    Principal vectors whose cosine is within ``tol.threshold()`` of 1 span
    the intersection.
    """
    _check_same_ambient(p, q)
    if p.dim == 0 or q.dim == 0:
        return Subspace.zero(p.ambient_dim)
    u, c, _ = np.linalg.svd(p.frame.conj().T @ q.frame, full_matrices=False)
    r = int(np.count_nonzero(c >= 1.0 - tol.threshold()))
    if r == 0:
        return Subspace.zero(p.ambient_dim)
    return span(p.frame @ u[:, :r], tol)


def join(p, q, tol=DEFAULT_TOL):
    """Closed linear span of two subspaces."""
    _check_same_ambient(p, q)
    if p.dim == 0:
        return q
    if q.dim == 0:
        return p
    return span(np.hstack([p.frame, q.frame]), tol)


def meet_all(subspaces, k, tol=DEFAULT_TOL):
    out = Subspace.full(k)
    for s in subspaces:
        out = meet(out, s, tol)
    return out


def join_all(subspaces, k, tol=DEFAULT_TOL):
    out = Subspace.zero(k)
    for s in subspaces:
        out = join(out, s, tol)
    return out


def orth_complement(p):
    """The orthogonal complement, i.e. the projection ``1 - P``."""
    k = p.ambient_dim
    if p.dim == 0:
        return Subspace.full(k)
    if p.dim == k:
        return Subspace.zero(k)
    q, _ = np.linalg.qr(np.hstack([p.frame, np.eye(k, dtype=complex)]))
    return Subspace(k, q[:, p.dim:k])


def is_subspace_of(p, q, atol=1e-7):
    """True when ``P <= Q``, i.e. ``||(1 - Q) P|| <= atol``."""
    _check_same_ambient(p, q)
    if p.dim == 0:
        return True
    resid = p.frame - q.frame @ (q.frame.conj().T @ p.frame)
    return float(np.linalg.norm(resid, 2)) <= atol


def projection_distance(p, q):
    """Operator-norm distance between the orthogonal projectors."""
    _check_same_ambient(p, q)
    return float(np.linalg.norm(p.projector - q.projector, 2))


# -- seeded generators (part of the public test API) -------------------------

def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(k, seed):
    rng = _rng(seed)
    q, r = np.linalg.qr(_complex_gaussian(rng, (k, k)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_invertible(k, seed, max_cond=1e3):
    """Random invertible matrix with condition number at most ``max_cond``."""
    rng = _rng(seed)
    u = random_unitary(k, rng)
    v = random_unitary(k, rng)
    s = np.exp(rng.uniform(0.0, np.log(max_cond), size=k))
    s[0] = 1.0
    if k > 1:
        s[-1] = max_cond
    return (u * (s / np.sqrt(max_cond))) @ v


def random_subspace(k, r, seed):
    rng = _rng(seed)
    if r == 0:
        return Subspace.zero(k)
    return span(_complex_gaussian(rng, (k, r)))


# -- finite truncations of the infinite-dimensional counterexamples ---------

def lattice_example_codim_one(N, n):
    """Return ``(P_n, Q_n)`` in C^N with P_n = e_n^perp, Q_n = (e_1/n + e_n)^perp.

    Basis vectors are 1-based as in the usual statement of the example.
    """
    if not 1 < n <= N:
        raise ValueError("need 1 < n <= N")
    e = np.eye(N, dtype=complex)
    p = orth_complement(span(e[:, [n - 1]]))
    q = orth_complement(span((e[:, 0] / n + e[:, n - 1])[:, None]))
    return p, q


def lattice_example_nonmodular_angle(N):
    """Principal angle between e_0 and E + F in the truncated three-space example.

    The ambient space is sum_{n=0}^{N} C^2 with unit vectors e_n, f_n in the
    n-th summand and <e_n, f_n> = 1 - 1/n^3 (f_0 is taken orthogonal to e_0).
    E = span{e_0 + n e_n : 1 <= n <= N}, F = span{f_n : 0 <= n <= N}.
    """
    dim = 2 * (N + 1)
    e = np.zeros((dim, N + 1))
    f = np.zeros((dim, N + 1))
    for n in range(N + 1):
        c = 0.0 if n == 0 else 1.0 - 1.0 / n ** 3
        e[2 * n, n] = 1.0
        f[2 * n, n] = c
        f[2 * n + 1, n] = np.sqrt(max(0.0, 1.0 - c * c))
    E = np.column_stack([e[:, 0] + n * e[:, n] for n in range(1, N + 1)])
    sum_frame = scipy.linalg.orth(np.hstack([E, f]).astype(complex), rcond=1e-14)
    e0 = e[:, 0].astype(complex)
    resid = e0 - sum_frame @ (sum_frame.conj().T @ e0)
    return float(np.arcsin(min(1.0, np.linalg.norm(resid))))
