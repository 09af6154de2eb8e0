"""Harte and Taylor joint spectra of commuting tuples.

The exterior algebra on n generators is realized on C^(2^n) with basis
vectors indexed by increasing subsets (ordered by size, then
lexicographically).  ``alpha(T, w)`` assembles

    delta = sum_j L(s_j) (x) (T_j - w_j),    alpha = delta + delta^*

whose singularity characterizes the Taylor spectrum.  Its square restricted
to the degree-0 part is ``sum_j (T_j - w_j)^* (T_j - w_j)``, the left Harte
operator, so ``sigma_min(alpha)^2 <= left Harte margin`` always.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse.linalg

from .numcore import DEFAULT_TOL
from .tuples import CommutingTuple

__all__ = [
    "ExteriorAlgebra", "exterior_ops", "KoszulOperator", "alpha", "alpha_matrix",
    "HarteResult", "harte_member", "harte_margin", "membership_threshold", "taylor_threshold",
    "KoszulEndReport", "koszul_end_checks", "SpectrumScan", "scan", "complex_grid",
    "thread_count",
]

MAX_GENERATORS = 6
DENSE_LIMIT = 512
SCAN_CHUNK = 64


@dataclass(frozen=True, eq=False)
class ExteriorAlgebra:
    """Exterior algebra on ``n`` generators with its left wedge operators."""

    n: int
    basis: tuple
    wedge: tuple

    @property
    def dim(self):
        return 1 << self.n

    def index(self, subset):
        return self.basis.index(tuple(sorted(subset)))

    def grades(self):
        return np.array([len(b) for b in self.basis])

    def parity(self):
        """Diagonal grading operator ``(-1)^degree``."""
        return np.diag((-1.0) ** self.grades())


@lru_cache(maxsize=None)
def exterior_ops(n):
    if not 1 <= n <= MAX_GENERATORS:
        raise ValueError(f"exterior algebra supports 1 <= n <= {MAX_GENERATORS}, got {n}")
    basis = tuple(c for r in range(n + 1) for c in itertools.combinations(range(n), r))
    pos = {b: i for i, b in enumerate(basis)}
    wedge = []
    for j in range(n):
        m = np.zeros((len(basis), len(basis)))
        for b in basis:
            if j in b:
                continue
            sign = (-1) ** sum(1 for i in b if i < j)
            m[pos[tuple(sorted(b + (j,)))], pos[b]] = sign
        m.setflags(write=False)
        wedge.append(m)
    return ExteriorAlgebra(n, basis, tuple(wedge))


def alpha_matrix(mats, w):
    """Dense ``alpha_{T - w}`` on (exterior algebra) (x) C^k."""
    ext = exterior_ops(len(mats))
    k = mats[0].shape[0]
    eye = np.eye(k)
    delta = sum(np.kron(l, a - wj * eye) for l, a, wj in zip(ext.wedge, mats, w))
    return delta + delta.conj().T


def _smallest_singular(h):
    """Smallest singular value of a Hermitian matrix."""
    if h.shape[0] <= DENSE_LIMIT:
        return float(np.abs(np.linalg.eigvalsh(h)).min())
    try:
        vals = scipy.sparse.linalg.eigsh(h, k=1, sigma=0.0, which="LM",
                                         return_eigenvectors=False)
        return float(np.abs(vals).min())
    except (RuntimeError, ValueError, scipy.sparse.linalg.ArpackNoConvergence):
        # shift-invert fails on exactly singular matrices
        return float(np.linalg.svd(h, compute_uv=False)[-1])


@dataclass(frozen=True, eq=False)
class KoszulOperator:
    n: int
    k: int
    matrix: np.ndarray
    sigma_min: float

    def hermitian_error(self):
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


def _mats(t):
    return list(t.matrices) if isinstance(t, CommutingTuple) else [np.asarray(m, dtype=complex) for m in t]


def alpha(t, w):
    mats = _mats(t)
    w = np.asarray(w, dtype=complex).reshape(-1)
    a = alpha_matrix(mats, w)
    return KoszulOperator(len(mats), mats[0].shape[0], a, _smallest_singular(a))


# -- Harte -----------------------------------------------------------------------

def membership_threshold(t, tol=DEFAULT_TOL):
    """Cut-off for the (quadratic) Harte margins."""
    norms = [np.linalg.norm(a, 2) for a in _mats(t)]
    return float(tol.abs_eps + tol.rel_eps * (1.0 + sum(x * x for x in norms)))


def taylor_threshold(t, tol=DEFAULT_TOL):
    """Cut-off for ``sigma_min(alpha)``, the square root of the Harte cut-off."""
    return float(np.sqrt(membership_threshold(t, tol)))


def harte_margin(mats, lam, side="left"):
    """Smallest eigenvalue of ``sum (T_i - l_i)^*(T_i - l_i)`` (left) or its mirror (right)."""
    k = mats[0].shape[0]
    eye = np.eye(k)
    pos = np.zeros((k, k), dtype=complex)
    for a, l in zip(mats, lam):
        d = a - l * eye
        pos += d.conj().T @ d if side == "left" else d @ d.conj().T
    return max(0.0, float(np.linalg.eigvalsh(pos)[0]))


@dataclass(frozen=True)
class HarteResult:
    member: bool
    margin: float
    threshold: float


def harte_member(t, lam, side="left", tol=DEFAULT_TOL):
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    mats = _mats(t)
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    margin = harte_margin(mats, lam, side)
    thr = membership_threshold(mats, tol)
    return HarteResult(bool(margin <= thr), margin, float(thr))


# -- Koszul end maps ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KoszulEndReport:
    """Surjectivity of ``(B_i) -> sum T_i B_i`` and bounded-belowness of ``x -> (T_i x)``.

    Witnesses satisfy ``sum T_i B_i = I`` and ``sum S_i T_i = I`` when the
    corresponding check passes.
    """

    surjective: bool
    surjective_margin: float
    right_witness: tuple | None
    right_residual: float | None
    bounded_below: bool
    bounded_below_margin: float
    left_witness: tuple | None
    left_residual: float | None


def _single_inverse(mats, thr):
    """Index of the first well-conditioned coordinate, if any."""
    for j, a in enumerate(mats):
        s = np.linalg.svd(a, compute_uv=False)
        if s[-1] > thr and s[-1] > 1e-6 * s[0]:
            return j
    return None


def koszul_end_checks(t, tol=DEFAULT_TOL):
    mats = _mats(t)
    k = mats[0].shape[0]
    eye = np.eye(k)
    row = np.hstack(mats)
    col = np.vstack(mats)
    thr = taylor_threshold(mats, tol)
    s_row = float(np.linalg.svd(row, compute_uv=False)[-1])
    s_col = float(np.linalg.svd(col, compute_uv=False)[-1])
    zero = np.zeros((k, k), dtype=complex)
    single = _single_inverse(mats, thr)

    right = left = None
    r_res = l_res = None
    if s_row > thr:
        if single is not None:
            right = tuple(np.linalg.inv(mats[single]) if j == single else zero
                          for j in range(len(mats)))
        else:
            b = np.linalg.pinv(row)
            right = tuple(b[j * k:(j + 1) * k] for j in range(len(mats)))
        r_res = float(np.linalg.norm(sum(a @ b for a, b in zip(mats, right)) - eye, 2))
    if s_col > thr:
        if single is not None:
            left = tuple(np.linalg.inv(mats[single]) if j == single else zero
                         for j in range(len(mats)))
        else:
            s = np.linalg.pinv(col)
            left = tuple(s[:, j * k:(j + 1) * k] for j in range(len(mats)))
        l_res = float(np.linalg.norm(sum(s @ a for s, a in zip(left, mats)) - eye, 2))
    return KoszulEndReport(s_row > thr, s_row, right, r_res, s_col > thr, s_col, left, l_res)


# -- scans -----------------------------------------------------------------------

def thread_count(default=1):
    """Worker cap from ``SPECFLAG_THREADS`` (at least 1)."""
    try:
        return max(1, int(os.environ.get("SPECFLAG_THREADS", default)))
    except ValueError:
        return max(1, default)


def complex_grid(center, half_width, num_re, num_im=None):
    """``num_re x num_im`` points of the square centred at ``center``, row-major in Im then Re."""
    num_im = num_re if num_im is None else num_im
    re = np.linspace(center.real - half_width, center.real + half_width, num_re)
    im = np.linspace(center.imag - half_width, center.imag + half_width, num_im)
    return (re[None, :] + 1j * im[:, None]).ravel()


@dataclass(frozen=True, eq=False)
class SpectrumScan:
    grid: np.ndarray
    harte_margins: np.ndarray
    alpha_margins: np.ndarray
    harte_threshold: float
    alpha_threshold: float

    @property
    def harte_members(self):
        return self.harte_margins <= self.harte_threshold

    @property
    def taylor_members(self):
        return self.alpha_margins <= self.alpha_threshold


def _margins(mats, points):
    out = np.empty((len(points), 2))
    for r, w in enumerate(points):
        out[r, 0] = harte_margin(mats, w, "left")
        out[r, 1] = _smallest_singular(alpha_matrix(mats, w))
    return out


def scan(t, grid, tol=DEFAULT_TOL, threads=None):
    """Harte-left and alpha margins at every grid point.

    ``grid`` is either an ``(N, n)`` array of points or a list of n 1-d
    arrays whose Cartesian product is scanned (first coordinate slowest).
    Rows are returned in grid order whatever the number of worker threads.
    """
    mats = _mats(t)
    n = len(mats)
    if isinstance(grid, (list, tuple)) and len(grid) == n and all(np.ndim(g) == 1 for g in grid):
        points = np.array(list(itertools.product(*grid)), dtype=complex)
    else:
        points = np.asarray(grid, dtype=complex).reshape(-1, n)
    threads = thread_count() if threads is None else max(1, int(threads))
    # fixed-size chunks: the split never depends on the worker count
    chunks = np.array_split(np.arange(len(points)), max(1, -(-len(points) // SCAN_CHUNK)))
    if threads == 1:
        parts = [_margins(mats, points[c]) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _margins(mats, points[c]), chunks))
    m = np.vstack(parts) if parts else np.empty((0, 2))
    return SpectrumScan(points, m[:, 0], m[:, 1], membership_threshold(mats, tol),
                        taylor_threshold(mats, tol))
