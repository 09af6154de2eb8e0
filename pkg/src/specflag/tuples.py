"""Commuting matrix tuples, commutative polynomials and nilpotency tests."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NilpotencyDisagreement, NonCommuting
from .numcore import DEFAULT_TOL, _complex_gaussian, _rng, as_cmatrix, random_unitary

__all__ = [
    "CERTIFY_THRESHOLD", "CommutingTuple", "CommPolynomial", "certify_commuting",
    "commutation_residual", "eval_poly", "is_nilpotent", "random_commuting_tuple",
    "planted_commuting_tuple", "PlantedTuple", "random_poly",
]

CERTIFY_THRESHOLD = 1e-10


def commutation_residual(matrices):
    """Largest normalized commutator ``||AB - BA|| / max(1, ||A|| ||B||)``.

    Returns ``(residual, pair)``; ``pair`` is None for a single matrix.
    """
    norms = [np.linalg.norm(m, 2) for m in matrices]
    worst, pair = 0.0, None
    for i, j in itertools.combinations(range(len(matrices)), 2):
        a, b = matrices[i], matrices[j]
        r = np.linalg.norm(a @ b - b @ a, 2) / max(1.0, norms[i] * norms[j])
        if pair is None or r > worst:
            worst, pair = float(r), (i, j)
    return worst, pair


@dataclass(frozen=True, eq=False)
class CommutingTuple:
    """n square k x k complex matrices certified to commute pairwise.

    Build instances with :func:`certify_commuting`; the constructor itself
    re-checks the residual against ``threshold``.
    """

    matrices: tuple
    comm_residual: float = 0.0
    threshold: float = CERTIFY_THRESHOLD

    def __post_init__(self):
        mats = tuple(as_cmatrix(m, square=True, name=f"T_{i + 1}") for i, m in enumerate(self.matrices))
        if not mats:
            raise DimensionMismatch("a tuple needs at least one matrix")
        k = mats[0].shape[0]
        if any(m.shape != (k, k) for m in mats):
            raise DimensionMismatch("all matrices in a tuple must have the same size")
        for m in mats:
            m.setflags(write=False)
        resid, pair = commutation_residual(mats)
        if resid > self.threshold:
            raise NonCommuting(
                f"T_{pair[0] + 1} and T_{pair[1] + 1} do not commute "
                f"(normalized residual {resid:.3e} > {self.threshold:.1e})", pair, resid)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "comm_residual", resid)

    @property
    def k(self):
        return self.matrices[0].shape[0]

    @property
    def n(self):
        return len(self.matrices)

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.matrices[i]

    def __iter__(self):
        return iter(self.matrices)

    @property
    def norms(self):
        return np.array([np.linalg.norm(m, 2) for m in self.matrices])

    @property
    def scale(self):
        return float(max(1.0, self.norms.max()))

    def adjoint(self):
        return CommutingTuple(tuple(m.conj().T for m in self.matrices), threshold=self.threshold)

    def conjugate_by(self, s, s_inv=None):
        """The tuple ``S T_i S^{-1}``."""
        s = as_cmatrix(s, square=True, name="S")
        if s_inv is None:
            s_inv = np.linalg.inv(s)
        # similarity amplifies rounding by cond(S)
        cond = np.linalg.cond(s)
        return CommutingTuple(tuple(s @ m @ s_inv for m in self.matrices),
                              threshold=max(self.threshold, self.threshold * cond))

    def compress(self, frame):
        """Compression ``W* T_i W`` to the span of an orthonormal frame."""
        w = np.asarray(frame, dtype=complex)
        return CommutingTuple(tuple(w.conj().T @ m @ w for m in self.matrices),
                              threshold=self.threshold)

    def shift(self, w):
        """The tuple ``T - w``."""
        w = np.asarray(w, dtype=complex).reshape(-1)
        eye = np.eye(self.k)
        return CommutingTuple(tuple(m - wi * eye for m, wi in zip(self.matrices, w)),
                              threshold=self.threshold)


def certify_commuting(matrices, tol=DEFAULT_TOL, threshold=CERTIFY_THRESHOLD):
    """Validate shapes and pairwise commutation; return a :class:`CommutingTuple`.

    ``tol`` is accepted for interface symmetry; the certification cut-off is
    ``threshold`` on the normalized commutator norm.
    """
    return CommutingTuple(tuple(matrices), threshold=threshold)


# -- polynomials --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CommPolynomial:
    """Polynomial in n commuting variables: ``{multi-index: coefficient}``."""

    n: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for idx, c in dict(self.terms).items():
            idx = tuple(int(a) for a in idx)
            if len(idx) != self.n or any(a < 0 for a in idx):
                raise ValueError(f"bad multi-index {idx} for {self.n} variables")
            c = complex(c)
            if c != 0:
                clean[idx] = clean.get(idx, 0) + c
        object.__setattr__(self, "terms", clean)

    @classmethod
    def coordinate(cls, n, j):
        """The coordinate function z_j (0-based ``j``)."""
        idx = [0] * n
        idx[j] = 1
        return cls(n, {tuple(idx): 1.0})

    @classmethod
    def constant(cls, n, c):
        return cls(n, {(0,) * n: c})

    @property
    def degree(self):
        return max((sum(a) for a in self.terms), default=0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex).reshape(-1)
        if z.size != self.n:
            raise DimensionMismatch(f"point has {z.size} coordinates, polynomial has {self.n}")
        return complex(sum(c * np.prod(z ** np.array(a)) for a, c in self.terms.items()))

    def _coerce(self, other):
        if isinstance(other, CommPolynomial):
            if other.n != self.n:
                raise DimensionMismatch("polynomials have different arity")
            return other
        return CommPolynomial.constant(self.n, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0) + c
        return CommPolynomial(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return CommPolynomial(self.n, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms = {}
        for (a, c), (b, d) in itertools.product(self.terms.items(), other.terms.items()):
            idx = tuple(x + y for x, y in zip(a, b))
            terms[idx] = terms.get(idx, 0) + c * d
        return CommPolynomial(self.n, terms)

    __rmul__ = __mul__

    def __pow__(self, m):
        out = CommPolynomial.constant(self.n, 1.0)
        for _ in range(int(m)):
            out = out * self
        return out

    def partial(self, j):
        """Derivative with respect to z_j."""
        terms = {}
        for a, c in self.terms.items():
            if a[j] > 0:
                b = list(a)
                b[j] -= 1
                terms[tuple(b)] = terms.get(tuple(b), 0) + c * a[j]
        return CommPolynomial(self.n, terms)


def _matrix_powers(t, max_deg):
    eye = np.eye(t.k, dtype=complex)
    powers = []
    for m in t.matrices:
        p = [eye]
        for _ in range(max_deg):
            p.append(p[-1] @ m)
        powers.append(p)
    return powers


def eval_poly(f, t):
    """``sum c_a T_1^{a_1} ... T_n^{a_n}``."""
    if f.n != t.n:
        raise DimensionMismatch(f"polynomial in {f.n} variables applied to a {t.n}-tuple")
    powers = _matrix_powers(t, f.degree)
    out = np.zeros((t.k, t.k), dtype=complex)
    for a, c in f.terms.items():
        term = powers[0][a[0]]
        for j in range(1, t.n):
            term = term @ powers[j][a[j]]
        out += c * term
    return out


def random_poly(n, degree, seed, constant_term=True):
    """Random polynomial with Gaussian coefficients of total degree <= ``degree``."""
    rng = _rng(seed)
    terms = {}
    for idx in itertools.product(range(degree + 1), repeat=n):
        if sum(idx) <= degree and (constant_term or sum(idx) > 0):
            terms[idx] = complex(*rng.standard_normal(2)) / (1 + sum(idx))
    return CommPolynomial(n, terms)


# -- nilpotency ----------------------------------------------------------------

def is_nilpotent(a, tol=DEFAULT_TOL):
    """Decide ``A^k = 0`` for a k x k matrix by two independent tests.

    The power test checks ``||(A/||A||)^k|| <= thr`` and the eigenvalue test
    checks ``max |lambda| <= thr**(1/k) ||A||`` with ``thr = abs_eps + rel_eps``.
    The eigenvalue bound is implied by the power bound, so a matrix passing
    only the eigenvalue test is ambiguous and raises
    :class:`NilpotencyDisagreement`.
    """
    a = as_cmatrix(a, square=True)
    k = a.shape[0]
    norm = np.linalg.norm(a, 2)
    if norm <= tol.abs_eps:
        return True
    thr = tol.threshold()
    b = a / norm
    power_ok = np.linalg.norm(np.linalg.matrix_power(b, k), 2) <= thr
    radius = np.abs(np.linalg.eigvals(b)).max()
    eig_ok = radius <= thr ** (1.0 / k) * (1.0 + 1e-6)
    if power_ok != eig_ok:
        raise NilpotencyDisagreement(
            f"power test {'passed' if power_ok else 'failed'} but eigenvalue test "
            f"{'passed' if eig_ok else 'failed'} (relative spectral radius {radius:.3e})")
    return bool(power_ok)


# -- generators -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PlantedTuple:
    """A generated tuple together with the joint eigenvalues it was built from."""

    tuple: CommutingTuple
    eigenvalues: np.ndarray  # k x n, row p is the p-th planted joint eigenvalue


def planted_commuting_tuple(k, n, seed, conjugation="unitary", defective=True,
                            separation=0.3, max_cond=30.0):
    """Commuting tuple with a known joint spectrum.

    Joint eigenvalues are drawn at least ``separation`` apart; some are
    repeated and, with ``defective``, coupled by a shared nilpotent so that
    the tuple is not diagonalizable.  The block form is made upper
    triangular by a unit upper-triangular similarity and then conjugated by
    a random unitary (``conjugation="unitary"``) or invertible matrix.
    """
    rng = _rng(seed)
    # distinct joint eigenvalues, then multiplicities
    points = []
    while len(points) < k:
        cand = np.round(_complex_gaussian(rng, n) * 1.5, 3)
        if all(np.abs(cand - p).max() >= separation for p in points):
            points.append(cand)
    mult = []
    remaining = k
    while remaining:
        m = min(remaining, int(rng.choice([1, 1, 1, 2, 2, 3])))
        mult.append(m)
        remaining -= m
    points = points[: len(mult)]
    blocks = [[np.zeros((m, m), dtype=complex) for _ in range(n)] for m in mult]
    for (m, blk), lam in zip(zip(mult, blocks), points):
        nil = np.triu(_complex_gaussian(rng, (m, m)), 1) if (defective and m > 1) else np.zeros((m, m))
        for i in range(n):
            blk[i][:] = lam[i] * np.eye(m) + rng.standard_normal() * nil
    order = rng.permutation(len(mult))
    mats = [np.zeros((k, k), dtype=complex) for _ in range(n)]
    eig = np.zeros((k, n), dtype=complex)
    pos = 0
    for b in order:
        m = mult[b]
        for i in range(n):
            mats[i][pos:pos + m, pos:pos + m] = blocks[b][i]
        eig[pos:pos + m] = points[b]
        pos += m
    x = np.eye(k) + 0.5 * np.triu(_complex_gaussian(rng, (k, k)), 1)
    x_inv = np.linalg.inv(x)
    mats = [x @ m @ x_inv for m in mats]
    if conjugation == "unitary":
        w = random_unitary(k, rng)
        w_inv = w.conj().T
    elif conjugation == "invertible":
        from .numcore import random_invertible
        w = random_invertible(k, rng, max_cond=max_cond)
        w_inv = np.linalg.inv(w)
    elif conjugation == "none":
        w = w_inv = np.eye(k)
    else:
        raise ValueError(f"unknown conjugation {conjugation!r}")
    mats = [w @ m @ w_inv for m in mats]
    return PlantedTuple(CommutingTuple(tuple(mats)), eig)


def random_commuting_tuple(k, n, seed, style="poly-of-one"):
    """Seeded random commuting tuple.

    ``style`` is ``"poly-of-one"`` (each T_i a random quadratic in one random
    matrix) or ``"conjugated-triangular"`` (see :func:`planted_commuting_tuple`).
    """
    if k < 1 or n < 1:
        raise ValueError("k and n must be positive")
    if style == "poly-of-one":
        rng = _rng(seed)
        a = _complex_gaussian(rng, (k, k)) / np.sqrt(k)
        mats = []
        for _ in range(n):
            c = _complex_gaussian(rng, 3)
            mats.append(c[0] * np.eye(k) + c[1] * a + c[2] * (a @ a) / 2)
        return CommutingTuple(tuple(mats))
    if style == "conjugated-triangular":
        return planted_commuting_tuple(k, n, seed).tuple
    raise ValueError(f"unknown style {style!r}")
