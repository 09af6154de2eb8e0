"""Holomorphic functional calculus for commuting tuples.

Two independent routes to ``f(T)``:

* :func:`apply_series` sums the Taylor series of ``f`` at the origin degree
  by degree, stopping on a majorant tail bound built from the norms
  ``||T_j||``;
* :func:`vasilescu_integral` integrates ``f(z) (M_T x)(z) dz_1 ... dz_n`` over
  the boundary of a polydisk around the joint spectrum (n = 1, 2), where

      M_T = beta (dbar beta)^(n-1) L(s_1) ... L(s_n),   beta = I (x) alpha_{z-T}^{-1}.

The z-bar derivatives of ``B = alpha_{z-T}^{-1}`` are never taken
numerically: since ``d alpha_{z-T} / d zbar_k = L(s_k)^* (x) I =: K_k`` we have
``d B / d zbar_k = -B K_k B``, so ``M_T`` expands into a finite sum of words
in ``B`` and the ``K_k``.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryAmbiguous, DomainViolation, SingularAlpha, UnsupportedDimension
from .hsproj import hs_joint, joint_spectral_subspace
from .jointspec import alpha_matrix, exterior_ops, thread_count
from .numcore import DEFAULT_TOL, projection_distance
from .regions import Predicate, polydisk_union
from .triangular import joint_measure, multiset_distance, pushforward
from .tuples import CommPolynomial, CommutingTuple, eval_poly

__all__ = [
    "HoloFunction", "apply_series", "apply_map", "MartinelliContext", "mt_eval", "extended_wedges",
    "QuadratureSpec", "default_quadrature", "QuadratureResult", "vasilescu_integral",
    "PushforwardReport", "verify_pushforward", "lipschitz_bound", "ball_domination", "BallReport",
]


# -- functions --------------------------------------------------------------------

def _poly_values(p, pts):
    out = np.zeros(len(pts), dtype=complex)
    for alpha, c in p.terms.items():
        out += c * np.prod(pts ** np.array(alpha), axis=1)
    return out


@dataclass(frozen=True, eq=False)
class HoloFunction:
    """Holomorphic function on a polydisk around the origin.

    ``kind`` is ``"polynomial"``, ``"series"`` (Taylor coefficients plus a
    closed-form evaluator) or ``"composite"`` (a map into C^m).
    """

    n: int
    kind: str
    poly: CommPolynomial | None = None
    coeff: object = None
    func: object = None
    radius: tuple = ()
    components: tuple = ()
    name: str = ""

    @classmethod
    def polynomial(cls, p):
        return cls(p.n, "polynomial", poly=p, radius=(math.inf,) * p.n, name="poly")

    @classmethod
    def series(cls, n, coeff, func, radius=None, name="series"):
        radius = (math.inf,) * n if radius is None else tuple(float(r) for r in radius)
        return cls(n, "series", coeff=coeff, func=func, radius=radius, name=name)

    @classmethod
    def composite(cls, parts):
        parts = tuple(p if isinstance(p, HoloFunction) else cls.polynomial(p) for p in parts)
        if len({p.n for p in parts}) != 1:
            raise ValueError("components must share the number of variables")
        radius = tuple(min(p.radius[j] for p in parts) for j in range(parts[0].n))
        return cls(parts[0].n, "composite", components=parts, radius=radius, name="map")

    @classmethod
    def exp_linear(cls, a):
        """``exp(a . z)``."""
        a = np.asarray(a, dtype=complex)

        def coeff(alpha):
            return complex(np.prod([a[j] ** m / math.factorial(m) for j, m in enumerate(alpha)]))

        def func(pts):
            return np.exp(np.atleast_2d(pts) @ a)

        return cls.series(len(a), coeff, func, name="exp")

    @classmethod
    def reciprocal(cls, n, j, w):
        """``1 / (w - z_j)``, convergent for ``|z_j| < |w|``."""
        w = complex(w)

        def coeff(alpha):
            if any(m for i, m in enumerate(alpha) if i != j):
                return 0.0
            return w ** (-alpha[j] - 1)

        def func(pts):
            return 1.0 / (w - np.atleast_2d(pts)[:, j])

        radius = tuple(abs(w) if i == j else math.inf for i in range(n))
        return cls.series(n, coeff, func, radius, name="reciprocal")

    @property
    def m(self):
        return len(self.components) if self.kind == "composite" else 1

    def evaluate(self, pts):
        """Values at the rows of ``pts``; shape (N,) or (N, m) for composite maps."""
        pts = np.atleast_2d(np.asarray(pts, dtype=complex))
        if self.kind == "polynomial":
            return _poly_values(self.poly, pts)
        if self.kind == "series":
            return np.asarray(self.func(pts), dtype=complex).reshape(len(pts))
        return np.column_stack([c.evaluate(pts) for c in self.components])

    def __call__(self, z):
        out = self.evaluate(np.asarray(z, dtype=complex).reshape(1, -1))[0]
        return out if self.kind == "composite" else complex(out)

    def coefficients(self, degree):
        """Multi-indices of total degree ``degree`` with their coefficients."""
        if self.kind == "polynomial":
            return [(a, c) for a, c in self.poly.terms.items() if sum(a) == degree]
        if self.kind == "series":
            return [(a, self.coeff(a)) for a in _multi_indices(self.n, degree)]
        raise TypeError("composite maps have no scalar coefficients")


def _multi_indices(n, degree):
    for c in itertools.combinations_with_replacement(range(n), degree):
        alpha = [0] * n
        for j in c:
            alpha[j] += 1
        yield tuple(alpha)


# -- power series ------------------------------------------------------------------

def _check_domain(f, t, tol):
    if f.n != t.n:
        raise DomainViolation(f"function of {f.n} variables applied to a {t.n}-tuple")
    if all(math.isinf(r) for r in f.radius):
        return
    atoms = joint_measure(t, tol).atoms
    for j, r in enumerate(f.radius):
        if math.isinf(r):
            continue
        worst = float(np.abs(atoms[:, j]).max())
        if worst >= r:
            raise DomainViolation(
                f"joint eigenvalue with |z_{j + 1}| = {worst:.6g} outside the radius {r:.6g}")


def _series_sum(f, t, rtol, max_degree):
    k = t.k
    norms = [float(x) for x in t.norms]
    for j, r in enumerate(f.radius):
        if norms[j] >= r:
            raise DomainViolation(
                f"||T_{j + 1}|| = {norms[j]:.6g} is not below the convergence radius {r:.6g}; "
                "the majorant cannot certify the tail")
    eye = np.eye(k, dtype=complex)
    zero = (0,) * t.n
    c0 = f.coeff(zero) if f.kind == "series" else f.poly.terms.get(zero, 0)
    total = complex(c0) * eye
    majorant_sum = abs(c0)
    prev = {zero: eye}
    last = None
    for d in range(1, max_degree + 1):
        cur = {}
        part = np.zeros((k, k), dtype=complex)
        maj = 0.0
        for alpha in _multi_indices(t.n, d):
            j = next(i for i, m in enumerate(alpha) if m)
            parent = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
            cur[alpha] = t.matrices[j] @ prev[parent]
            c = f.coeff(alpha)
            if c:
                part += c * cur[alpha]
                maj += abs(c) * math.prod(x ** m for x, m in zip(norms, alpha))
        total += part
        majorant_sum += maj
        prev = cur
        # tail <= maj q / (1 - q) once the majorant ratios have settled below q < 1
        if last is not None and last > 0:
            q = maj / last
            if q < 1 and maj * q / (1 - q) <= rtol * max(1.0, majorant_sum):
                return total
        elif last == 0 and maj == 0 and d > 2:
            return total
        last = maj
    raise DomainViolation(f"series majorant did not certify within {max_degree} degrees")


def apply_series(f, t, rtol=1e-12, max_degree=500, tol=DEFAULT_TOL):
    """``f(T)`` from the Taylor series at the origin.

    The joint eigenvalues must lie in the polydisk of convergence
    (:class:`DomainViolation` otherwise).  Summation runs by total degree
    and stops when the ratio-test majorant of the tail, evaluated at the
    norms ``||T_j||``, drops below ``rtol`` times the majorant sum.
    """
    if f.kind == "composite":
        raise TypeError("use apply_map for maps into C^m")
    _check_domain(f, t, tol)
    if f.kind == "polynomial":
        return eval_poly(f.poly, t)
    return _series_sum(f, t, rtol, max_degree)


def apply_map(h, t, rtol=1e-12, tol=DEFAULT_TOL, threshold=1e-8):
    """``h(T)`` for a map into C^m, as a commuting tuple."""
    parts = h.components if h.kind == "composite" else (h,)
    mats = tuple(apply_series(p, t, rtol, tol=tol) for p in parts)
    return CommutingTuple(mats, threshold=max(t.threshold, threshold))


# -- the Martinelli kernel ------------------------------------------------------------

def _expand_words(n):
    """``beta (dbar beta)^(n-1)`` as signed words.

    A word is a tuple of tokens read as an operator product, ``"B"`` for the
    inverse of alpha and an integer ``i`` for ``K_i``.  Each entry is
    ``(coefficient, dzbar indices (sorted), word)``.
    """
    terms = {((), ("B",)): 1}
    for _ in range(n - 1):
        new = defaultdict(int)
        for (dz, word), coef in terms.items():
            for i in range(n):
                if i in dz:
                    continue
                sign = (-1) ** sum(1 for j in dz if j < i)
                key = tuple(sorted(dz + (i,)))
                for p, tok in enumerate(word):
                    if tok != "B":
                        continue
                    w = ("B",) + word[:p] + ("B", i, "B") + word[p + 1:]
                    new[(key, w)] += -sign * coef
        terms = {key: c for key, c in new.items() if c}
    return tuple((c, dz, w) for (dz, w), c in sorted(terms.items(), key=lambda kv: repr(kv[0])))


@dataclass(frozen=True, eq=False)
class MartinelliContext:
    """Precomputed pieces of ``M_T`` for a tuple.

    Vectors live in (exterior algebra on s) (x) C^k; forms in dzbar are
    kept as separate components.
    """

    t: CommutingTuple
    words: tuple
    base: np.ndarray = field(repr=False)
    raise_ops: tuple = field(repr=False)
    lower_ops: tuple = field(repr=False)
    g0: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, t):
        n, k = t.n, t.k
        ext = exterior_ops(n)
        eye = np.eye(k)
        raise_ops = tuple(np.kron(l, eye).astype(complex) for l in ext.wedge)
        lower_ops = tuple(r.conj().T for r in raise_ops)
        base = -alpha_matrix(list(t.matrices), np.zeros(n))
        top = np.zeros((ext.dim, 1))
        top[-1, 0] = 1.0
        # L(s_1) ... L(s_n) Omega = s_1 ^ ... ^ s_n, the last basis vector
        g0 = np.kron(top, eye).astype(complex)
        return cls(t, _expand_words(n), base, raise_ops, lower_ops, g0)

    @property
    def n(self):
        return self.t.n

    @property
    def k(self):
        return self.t.k

    def alpha(self, z):
        """``alpha_{z - T}`` at a batch of points, shape (N, 2^n k, 2^n k)."""
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        out = np.broadcast_to(self.base, (len(z),) + self.base.shape).copy()
        for j in range(self.n):
            out += z[:, j, None, None] * self.raise_ops[j]
            out += np.conj(z[:, j])[:, None, None] * self.lower_ops[j]
        return out

    def inverse(self, z, check=True, atol=1e-10):
        a = self.alpha(z)
        try:
            b = np.linalg.inv(a)
        except np.linalg.LinAlgError as exc:
            raise SingularAlpha("alpha is singular at a quadrature node") from exc
        if check:
            eye = np.eye(a.shape[1])
            res = np.abs(a @ b - eye).max(axis=(1, 2))
            worst = int(np.argmax(res))
            if not np.isfinite(res[worst]) or res[worst] > atol:
                raise SingularAlpha(
                    f"alpha inverse residual {res[worst]:.3e} at node {np.round(z[worst], 6)}")
        return b

    def components(self, z, check=True):
        """dzbar components of ``M_T`` applied to the identity, at a batch of points.

        Returns ``{dzbar indices: array (N, 2^n k, k)}``.
        """
        b = self.inverse(z, check)
        out = {}
        for coef, dz, word in self.words:
            y = np.broadcast_to(self.g0, (len(b),) + self.g0.shape)
            for tok in reversed(word):
                y = b @ y if tok == "B" else self.lower_ops[tok] @ y
            out[dz] = out.get(dz, 0) + coef * y
        return out


    def dbar_inverse(self, z, j):
        """``d/d zbar_j`` of the inverse of alpha at one point, in closed form."""
        b = self.inverse(np.asarray(z, dtype=complex).reshape(1, self.n))[0]
        return -b @ self.lower_ops[j] @ b


def extended_wedges(n):
    """Left wedges on the algebra generated by dzbar_1..dzbar_n and s_1..s_n.

    The space is (forms in dzbar) (x) (forms in s); ``L(dzbar_j) = L_j (x) I``
    and ``L(s_j) = parity (x) L_j``, so all 2n maps anticommute.
    """
    ext = exterior_ops(n)
    eye = np.eye(ext.dim)
    dz = tuple(np.kron(l, eye) for l in ext.wedge)
    sw = tuple(np.kron(ext.parity(), l) for l in ext.wedge)
    return dz, sw


def mt_eval(ctx, x, z):
    """``(M_T x)(z)`` in (forms in dzbar) (x) (forms in s) (x) C^k, flattened."""
    x = np.asarray(x, dtype=complex).reshape(ctx.k)
    comps = ctx.components(np.asarray(z, dtype=complex).reshape(1, ctx.n))
    ext = exterior_ops(ctx.n)
    out = np.zeros((ext.dim, ext.dim * ctx.k), dtype=complex)
    for dz, v in comps.items():
        out[ext.index(dz)] += v[0] @ x
    return out.ravel()


# -- boundary quadrature --------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Polydisk ``prod |z_j - center_j| <= radii_j`` and node counts."""

    center: tuple
    radii: tuple
    angular: int = 64
    radial: int = 16
    margin: float = 0.0

    def with_angular(self, m):
        return QuadratureSpec(self.center, self.radii, m, self.radial, self.margin)


def default_quadrature(t, angular=None, radial=16, tol=DEFAULT_TOL):
    """Polydisk around the joint spectrum.

    The centre is the joint centroid ``trace(T_j)/k``.  Each radius is 1.25
    times ``||T_j - c_j||``, which bounds the eigenvalue spread and equals it
    for normal tuples; for non-normal tuples it keeps the Neumann series of
    the resolvent at ratio <= 0.8 on the whole boundary, which the radial
    rule needs.  Scalar coordinates get the floor ``0.1 (1 + ||T_j||)``.
    """
    atoms = joint_measure(t, tol).atoms
    center = np.array([np.trace(a) / t.k for a in t.matrices])
    spread = np.abs(atoms - center).max(axis=0)
    shifted = np.array([np.linalg.norm(a - c * np.eye(t.k), 2) for a, c in zip(t.matrices, center)])
    floor = 0.1 * (1.0 + np.asarray(t.norms, dtype=float))
    radii = np.maximum(1.25 * np.maximum(spread, shifted), floor)
    margin = float((radii - spread).min())
    if angular is None:
        angular = 256 if t.n == 1 else 64
    return QuadratureSpec(tuple(complex(c) for c in center), tuple(float(r) for r in radii),
                          angular, radial, margin)


@dataclass(frozen=True, eq=False)
class QuadratureResult:
    value: np.ndarray
    error_estimate: float | None
    nodes: int
    spec: QuadratureSpec


NODE_CHUNK = 2048


def _faces(spec, n):
    """Nodes, weights and the dzbar component used on each boundary face."""
    c = np.asarray(spec.center, dtype=complex)
    r = np.asarray(spec.radii, dtype=float)
    m = spec.angular
    theta = 2 * np.pi * np.arange(m) / m
    dth = 2 * np.pi / m
    if n == 1:
        e = np.exp(1j * theta)
        z = (c[0] + r[0] * e)[:, None]
        # dz = i r e^{i theta} d theta, divided by 2 pi i
        w = r[0] * e * dth / (2 * np.pi)
        return [((), z, w)]
    x, gw = np.polynomial.legendre.leggauss(spec.radial)
    faces = []
    for outer in range(2):
        rho = r[1 - outer] * (x + 1) / 2
        wr = gw * r[1 - outer] / 2
        th, rh, ph = np.meshgrid(theta, np.arange(spec.radial), theta, indexing="ij")
        th, rh, ph = th.ravel(), rh.ravel(), ph.ravel()
        if outer == 0:
            # |z_1 - c_1| = r_1, z_2 ranges over its disk
            z = np.column_stack([c[0] + r[0] * np.exp(1j * th), c[1] + rho[rh] * np.exp(1j * ph)])
            w = 2 * r[0] * rho[rh] * np.exp(1j * th)
            comp = (1,)
        else:
            z = np.column_stack([c[0] + rho[rh] * np.exp(1j * th), c[1] + r[1] * np.exp(1j * ph)])
            w = -2 * rho[rh] * r[1] * np.exp(1j * ph)
            comp = (0,)
        w = w * wr[rh] * dth * dth / (2j * np.pi) ** 2
        faces.append((comp, z, w))
    return faces


def _chunk_sum(ctx, f, comp, z, w, check, center, radii):
    vals = f.evaluate(center + radii * z)
    vals = vals[:, None] if vals.ndim == 1 else vals
    omega = ctx.components(z, check)[comp][:, :ctx.k, :]
    return np.einsum("n,nm,nij->mij", w, vals, omega)


def _integrate(ctx, f, spec, check, threads):
    # nodes live on the unit polydisk of the normalized tuple
    unit = QuadratureSpec((0j,) * ctx.n, (1.0,) * ctx.n, spec.angular, spec.radial)
    center = np.asarray(spec.center, dtype=complex)
    radii = np.asarray(spec.radii, dtype=float)
    jobs = []
    for comp, z, w in _faces(unit, ctx.n):
        for s in range(0, len(z), NODE_CHUNK):
            jobs.append((comp, z[s:s + NODE_CHUNK], w[s:s + NODE_CHUNK]))
    run = lambda job: _chunk_sum(ctx, f, *job, check, center, radii)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    # ordered reduction keeps the result independent of the worker count
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total, sum(len(j[1]) for j in jobs)


def vasilescu_integral(t, f, spec=None, richardson=True, check=True, threads=None,
                       tol=DEFAULT_TOL):
    """``f(T)`` by integrating ``f M_T`` over the boundary of a polydisk (n = 1, 2).

    For n = 1 this is the Cauchy integral of the resolvent, computed here
    through the Koszul operator all the same.  For n = 2 the integral runs
    over the two solid-torus faces ``{|z_1 - c_1| = r_1} x D_2`` and
    ``D_1 x {|z_2 - c_2| = r_2}`` with the trapezoid rule in the angles and
    Gauss-Legendre in the radius.  The integral is taken for the tuple
    normalized to the unit polydisk, which is exact for the calculus and
    keeps the radial rule accurate when the coordinates have different
    scales.  With ``richardson`` the estimate is the
    change against half as many angular nodes.
    """
    if t.n not in (1, 2):
        raise UnsupportedDimension(f"boundary quadrature is implemented for n = 1, 2, got {t.n}")
    if f.n != t.n:
        raise DomainViolation(f"function of {f.n} variables applied to a {t.n}-tuple")
    spec = default_quadrature(t, tol=tol) if spec is None else spec
    c = np.asarray(spec.center)
    r = np.asarray(spec.radii)
    reach = np.abs(c) + r
    if any(reach[j] >= f.radius[j] for j in range(t.n)):
        raise DomainViolation("the integration polydisk leaves the domain of the function")
    atoms = joint_measure(t, tol).atoms
    margin = float((r - np.abs(atoms - c).max(axis=0)).min())
    if margin <= 0:
        raise DomainViolation(f"joint spectrum is not inside the polydisk (margin {margin:.3e})")
    # f(T) = g(S) for S_j = (T_j - c_j) / r_j and g(w) = f(c + r w); the unit
    # polydisk keeps the near-singular directions balanced across coordinates
    eye = np.eye(t.k)
    normalized = CommutingTuple(tuple((a - cj * eye) / rj for a, cj, rj in zip(t.matrices, c, r)),
                                threshold=t.threshold)
    ctx = MartinelliContext.build(normalized)
    threads = thread_count() if threads is None else max(1, int(threads))
    value, nodes = _integrate(ctx, f, spec, check, threads)
    err = None
    if richardson:
        coarse, _ = _integrate(ctx, f, spec.with_angular(max(2, spec.angular // 2)), check, threads)
        err = float(np.abs(value - coarse).max())
    value = value[0] if f.kind != "composite" else value
    return QuadratureResult(value, err, nodes, spec)


# -- pushforward checks ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PushforwardReport:
    image: CommutingTuple
    measure_distance: float
    projection_distances: tuple

    def passed(self, atol=1e-8):
        return self.measure_distance <= atol and all(d <= atol for d in self.projection_distances)


def _atom_radius(atoms):
    if len(atoms) < 2:
        return 1.0
    d = np.abs(atoms[:, None, :] - atoms[None, :, :]).max(axis=2)
    return 0.45 * float(d[np.triu_indices(len(atoms), 1)].min())


def verify_pushforward(h, t, regions=(), tol=DEFAULT_TOL):
    """Compare the measure and projections of ``h(T)`` with those pushed through ``h``.

    For each region X of C^m the projection ``P(h(T):X)`` is compared with
    ``P(T:Y)`` where Y is a union of small polydisks around the joint
    eigenvalues mapped into X, which has the same joint spectral projection as
    the preimage of X.
    """
    ht = apply_map(h, t, tol=tol)
    nu = joint_measure(t, tol)
    dist = multiset_distance(joint_measure(ht, tol), pushforward(nu, h))
    rad = _atom_radius(nu.atoms)
    band = tol.threshold(max(1.0, max(ht.norms)))
    out = []
    for x in regions:
        keep = []
        for a in nu.atoms:
            v = x.classify(np.atleast_1d(h(a)), band)
            if v is None:
                raise BoundaryAmbiguous(f"image of {np.round(a, 8)} lies on the region boundary", a)
            if v:
                keep.append(a)
        left = hs_joint(ht, x, tol).subspace
        right = hs_joint(t, polydisk_union(keep, rad), tol).subspace if keep else None
        if right is None:
            out.append(float(np.linalg.norm(left.projector, 2)) if left.dim else 0.0)
        else:
            out.append(projection_distance(left, right))
    return PushforwardReport(ht, dist, tuple(out))


def _gradient_majorant(f, radii, j, rtol=1e-12, max_degree=500):
    """``sup |d f / d z_j|`` over the polydisk with the given radii (about the origin)."""
    if any(r >= rho for r, rho in zip(radii, f.radius)):
        raise DomainViolation("ball leaves the domain of the function")
    total, last = 0.0, None
    top = f.poly.degree if f.kind == "polynomial" else max_degree
    for d in range(1, top + 1):
        b = sum(abs(c) * a[j] * math.prod(r ** (m - (i == j)) for i, (r, m) in enumerate(zip(radii, a)))
                for a, c in f.coefficients(d) if a[j])
        total += b
        if f.kind == "series" and last:
            q = b / last
            if q < 1 and b * q / (1 - q) <= rtol * max(1.0, total):
                return total
        last = b
    if f.kind == "series":
        raise DomainViolation("gradient majorant did not converge")
    return total


def lipschitz_bound(h, z, eps):
    """Upper bound on ``sqrt(sum_ij sup |d h_i / d z_j|^2)`` over the polydisk of radius eps at z."""
    parts = h.components if h.kind == "composite" else (h,)
    radii = np.abs(np.asarray(z, dtype=complex)) + eps
    return float(np.sqrt(sum(_gradient_majorant(p, radii, j) ** 2
                              for p in parts for j in range(h.n))))


@dataclass(frozen=True, eq=False)
class BallReport:
    inner: object
    outer: object
    constant: float
    excess: float


def ball_domination(h, t, z, eps, tol=DEFAULT_TOL):
    """Check ``P(T : B(z, eps)) <= P(h(T) : B(h(z), c eps))`` with ``c = sqrt(n) L``.

    ``L`` is :func:`lipschitz_bound`.  ``excess`` is ``||(1 - Q) P||``, zero
    when the inequality holds.
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    hz = np.atleast_1d(h(z))
    c = math.sqrt(t.n) * lipschitz_bound(h, z, eps)
    ht = apply_map(h, t, tol=tol)
    inner = joint_spectral_subspace(t, Predicate(lambda w: np.linalg.norm(w - z) < eps, t.n), tol)
    outer = joint_spectral_subspace(
        ht, Predicate(lambda u: np.linalg.norm(u - hz) < c * eps, ht.n), tol)
    p, q = inner.subspace, outer.subspace
    if p.dim == 0:
        excess = 0.0
    else:
        excess = float(np.linalg.norm(p.frame - q.frame @ (q.frame.conj().T @ p.frame), 2))
    return BallReport(inner, outer, c, excess)
