"""Exact small-dimension lattice computations.

Lattices are given by a square generator ``G`` whose columns are basis
vectors, so lattice points are ``G @ a`` for integer ``a``.  Exact routines
(shortest vector, successive minima) enumerate with Fincke-Pohst inside the
radius given by an LLL-reduced basis and are intended for ``K <= 8``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import DomainError, EnumerationCapError, NumericalError

log = logging.getLogger(__name__)

EXACT_DIM_CAP = 8
DEFAULT_DELTA = 0.99
DEFAULT_ENUM_CAP = 10**8
# Per-call cap for the Fincke-Pohst buffer used by the exact routines.
_FP_CAP = 2_000_000
_RADIUS_SLACK = 1e-9
RANK_RTOL = 1e-13


@dataclass(frozen=True)
class LatticeBasis:
    """Full-rank square generator matrix; columns are the basis vectors."""

    generator: np.ndarray

    def __post_init__(self):
        g = np.array(self.generator, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
            raise DomainError(f"generator must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise DomainError("generator entries must be finite")
        # scale-free test: smallest singular value against the largest
        sv = np.linalg.svd(g, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= RANK_RTOL * sv[0]:
            raise DomainError("generator is rank deficient")
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    @property
    def gram(self) -> np.ndarray:
        return self.generator.T @ self.generator

    def norms(self, coeffs) -> np.ndarray:
        """Euclidean norms of ``G @ a`` for each row ``a`` of ``coeffs``."""
        c = np.atleast_2d(np.asarray(coeffs, dtype=float))
        return np.linalg.norm(c @ self.generator.T, axis=1)


def int_det(m) -> int:
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    a = [[int(x) for x in row] for row in np.asarray(m)]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class IntegerMatrix:
    """Full-rank integer matrix; ``unimodular`` is derived from the exact determinant."""

    entries: np.ndarray
    unimodular: bool = False

    def __post_init__(self):
        m = np.array(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"integer matrix must be square, got shape {m.shape}")
        if not np.all(np.equal(np.mod(m, 1), 0)):
            raise DomainError("integer matrix has non-integer entries")
        m = m.astype(np.int64)
        det = int_det(m)
        if det == 0:
            raise DomainError("integer matrix is singular")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "unimodular", abs(det) == 1)

    @property
    def det(self) -> int:
        return int_det(self.entries)

    @property
    def rows(self) -> np.ndarray:
        return self.entries


@dataclass(frozen=True)
class MinimaReport:
    """Successive minima ``norms`` with witnessing coefficient ``vectors`` (rows)."""

    norms: np.ndarray
    vectors: np.ndarray


def _check_dim(k: int, heuristic: bool):
    if k > EXACT_DIM_CAP and not heuristic:
        raise DomainError(
            f"exact mode supports dimension <= {EXACT_DIM_CAP}, got {k}; pass heuristic=True"
        )


def lll_reduce(b: LatticeBasis, delta: float = DEFAULT_DELTA) -> tuple[LatticeBasis, IntegerMatrix]:
    """LLL reduction; returns the reduced basis and ``U`` with ``reduced = G @ U``."""
    if not 0.25 < delta < 1:
        raise DomainError("delta must lie in (0.25, 1)")
    red, u = _kernels.lll_columns(np.ascontiguousarray(b.generator), float(delta))
    # recompute from the integer transform so reduced == G @ U exactly in float
    red = b.generator @ u
    return LatticeBasis(red), IntegerMatrix(u)


def is_lll_reduced(g: np.ndarray, delta: float = DEFAULT_DELTA, tol: float = 1e-9) -> bool:
    """Check size reduction and the Lovasz condition for the columns of ``g``."""
    bstar, mu, bn = _kernels._gram_schmidt(np.ascontiguousarray(g, dtype=float))
    k = g.shape[1]
    for i in range(k):
        for j in range(i):
            if abs(mu[i, j]) > 0.5 + tol:
                return False
    for i in range(1, k):
        if bn[i] < (delta - mu[i, i - 1] ** 2) * bn[i - 1] * (1 - tol):
            return False
    return True


def _short_vectors(g: np.ndarray, r2: float, cap: int = _FP_CAP):
    """All nonzero coefficient rows ``a`` with ``||g a||^2 <= r2`` (both signs)."""
    _, r = np.linalg.qr(g)
    coeffs, _, count = _kernels.enumerate_short(np.ascontiguousarray(r), float(r2), int(cap))
    if count < 0:
        raise EnumerationCapError(f"more than {cap} lattice vectors within radius^2 {r2:.6g}")
    norms2 = np.einsum("ij,ij->i", coeffs @ g.T, coeffs @ g.T)
    return coeffs, norms2


def _reduced(g: np.ndarray, delta: float = DEFAULT_DELTA):
    red, u = _kernels.lll_columns(np.ascontiguousarray(g, dtype=float), float(delta))
    return g @ u, u


def _sorted_candidates(g: np.ndarray, r2: float):
    red, u = _reduced(g)
    x, n2 = _short_vectors(red, r2)
    coeffs = x @ u.T
    # ascending norm; ties (to 1e-12 relative) broken lexicographically
    scale = max(float(n2.max()) if n2.size else 1.0, 1e-300)
    key_norm = np.round(n2 / scale, 12)
    order = np.lexsort(tuple(coeffs[:, i] for i in range(coeffs.shape[1] - 1, -1, -1)) + (key_norm,))
    return coeffs[order], n2[order], x[order]


def shortest_vector(b: LatticeBasis, heuristic: bool = False) -> tuple[np.ndarray, float]:
    """Global minimum of ``||G a||`` over nonzero integer ``a``.

    Exact for ``dim <= 8``; with ``heuristic=True`` larger dimensions return the
    first LLL vector.
    """
    k = b.dim
    _check_dim(k, heuristic)
    g = b.generator
    if k > EXACT_DIM_CAP:
        log.warning("dimension %d above exact cap; using LLL heuristic", k)
        red, u = _reduced(g)
        idx = int(np.argmin(np.linalg.norm(red, axis=0)))
        return u[:, idx].copy(), float(np.linalg.norm(red[:, idx]))
    red, u = _reduced(g)
    r2 = float(np.min(np.sum(red**2, axis=0))) * (1 + _RADIUS_SLACK)
    coeffs, n2, _ = _sorted_candidates(g, r2)
    return coeffs[0].copy(), float(math.sqrt(n2[0]))


def _greedy_minima(coeffs, n2, xred, k):
    chosen = []
    basis = np.zeros((0, k))
    for idx in range(len(n2)):
        v = xred[idx].astype(float)
        resid = v - basis.T @ (basis @ v) if basis.shape[0] else v
        if np.linalg.norm(resid) > 1e-9 * max(1.0, np.linalg.norm(v)):
            chosen.append(idx)
            basis = np.vstack([basis, resid / np.linalg.norm(resid)])
            if len(chosen) == k:
                break
    return chosen


def successive_minima(b: LatticeBasis, heuristic: bool = False) -> MinimaReport:
    """Exact successive minima with linearly independent witnesses.

    Vectors are scanned by increasing norm (lexicographic among ties) and
    admitted when they increase the dimension of the span.
    """
    k = b.dim
    _check_dim(k, heuristic)
    g = b.generator
    red, u = _reduced(g)
    if k > EXACT_DIM_CAP:
        log.warning("dimension %d above exact cap; using LLL heuristic", k)
        nrm = np.linalg.norm(red, axis=0)
        order = np.argsort(nrm, kind="stable")
        return MinimaReport(nrm[order], u[:, order].T.copy())
    r2 = float(np.max(np.sum(red**2, axis=0))) * (1 + _RADIUS_SLACK)
    coeffs, n2, xred = _sorted_candidates(g, r2)
    chosen = _greedy_minima(coeffs, n2, xred, k)
    if len(chosen) < k:
        raise NumericalError("enumeration did not produce a full set of independent vectors")
    return MinimaReport(np.sqrt(n2[chosen]), coeffs[chosen].copy())


def dual_basis(b: LatticeBasis) -> LatticeBasis:
    """Generator ``(G^T)^{-1}`` of the dual lattice."""
    try:
        return LatticeBasis(np.linalg.inv(b.generator.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular generator") from exc


# ---------------------------------------------------------------------------
# Integer vectors in balls


@lru_cache(maxsize=64)
def shell_counts(dim: int, max_n2: int) -> np.ndarray:
    """``r[m]`` = number of ``a`` in ``Z^dim`` with ``||a||^2 = m`` for ``m <= max_n2``."""
    max_n2 = int(max_n2)
    one = np.zeros(max_n2 + 1, dtype=object)
    for t in range(int(math.isqrt(max_n2)) + 1):
        one[t * t] += 1 if t == 0 else 2
    acc = np.zeros(max_n2 + 1, dtype=object)
    acc[0] = 1
    for _ in range(dim):
        nxt = np.zeros(max_n2 + 1, dtype=object)
        nz = np.nonzero(one)[0]
        for s in nz:
            nxt[s:] += one[s] * acc[: max_n2 + 1 - s]
        acc = nxt
    return acc


def _mobius(n: int) -> int:
    res = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            res = -res
        p += 1
    if n > 1:
        res = -res
    return res


@lru_cache(maxsize=64)
def primitive_shell_counts(dim: int, max_n2: int) -> np.ndarray:
    """Like :func:`shell_counts` but counting only vectors with entry gcd 1."""
    r = shell_counts(dim, max_n2)
    out = np.zeros_like(r)
    for k in range(1, int(math.isqrt(int(max_n2))) + 1):
        mu = _mobius(k)
        if mu == 0:
            continue
        k2 = k * k
        idx = np.arange(0, int(max_n2) // k2 + 1)
        out[idx * k2] += mu * r[idx]
    out[0] = 0
    return out


def ball_bound(beta: float, d: float) -> int:
    """Largest integer ``m`` with ``m < beta / d`` (squared-norm limit of the ball)."""
    lim = beta / d
    m = math.ceil(lim) - 1
    return max(m, 0)


def count_ball(beta: float, d: float, dim: int) -> int:
    m = ball_bound(beta, d)
    return int(sum(shell_counts(dim, m)[1:])) if m >= 1 else 0


def enumerate_ball(beta: float, d: float, dim: int, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Integer vectors with ``0 < ||a|| < sqrt(beta/d)`` as rows, sorted lexicographically."""
    if beta <= 0 or d <= 0:
        raise DomainError("beta and d must be positive")
    if dim < 1:
        raise DomainError("dim must be >= 1")
    m = ball_bound(beta, d)
    if m < 1:
        return np.zeros((0, dim), dtype=np.int64)
    n = count_ball(beta, d, dim)
    if n > cap:
        raise EnumerationCapError(f"ball contains {n} vectors, above cap {cap}")
    coeffs, _ = _short_vectors(np.eye(dim), m + 0.5, cap=max(n, 1))
    n2 = np.sum(coeffs**2, axis=1)
    coeffs = coeffs[n2 <= m]
    order = np.lexsort(tuple(coeffs[:, i] for i in range(dim - 1, -1, -1)))
    return coeffs[order]


def _as_rows(s) -> np.ndarray:
    arr = np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, arr.shape[1] if arr.ndim == 2 else 0)
    return np.atleast_2d(arr)


def primitive_filter(s) -> np.ndarray:
    """Keep the vectors whose entries have gcd 1."""
    arr = _as_rows(s)
    if arr.shape[0] == 0:
        return arr
    g = np.gcd.reduce(np.abs(arr), axis=1)
    return arr[g == 1]


def unit_images(arr: np.ndarray) -> list[np.ndarray]:
    """Images of real-lifted complex vectors under multiplication by 1, -1, j, -j.

    A vector ``a`` of even length is read as ``(Re a_c, Im a_c)``.
    """
    n = arr.shape[1] // 2
    re, im = arr[:, :n], arr[:, n:]
    return [arr, -arr, np.hstack([-im, re]), np.hstack([im, -re])]


def _lex_min_rows(cands: list[np.ndarray]) -> np.ndarray:
    best = cands[0].copy()
    for c in cands[1:]:
        diff = c != best
        first = np.argmax(diff, axis=1)
        rows = np.arange(best.shape[0])
        any_diff = diff.any(axis=1)
        smaller = any_diff & (c[rows, first] < best[rows, first])
        best[smaller] = c[smaller]
    return best


def quadruple_reduce(s) -> np.ndarray:
    """One lexicographically smallest representative per ``{1,-1,j,-j}`` orbit."""
    arr = _as_rows(s)
    if arr.shape[0] == 0:
        return arr
    if arr.shape[1] % 2:
        raise DomainError("quadruple_reduce needs even-length (real-lifted) vectors")
    reps = _lex_min_rows(unit_images(arr))
    reps = np.unique(reps, axis=0)
    return reps


# ---------------------------------------------------------------------------
# Bases minimizing the largest Gram-Schmidt norm (used by IF-SIC)


def complete_to_unimodular(x) -> np.ndarray:
    """Unimodular integer matrix whose first column is the primitive vector ``x``."""
    v = [int(t) for t in x]
    k = len(v)
    if math.gcd(*v) != 1:
        raise DomainError("vector is not primitive")
    minv = [[int(i == j) for j in range(k)] for i in range(k)]

    def add_col(dst, src, q):
        for r in range(k):
            minv[r][dst] += q * minv[r][src]

    while sum(1 for t in v if t != 0) > 1:
        p = min((i for i in range(k) if v[i] != 0), key=lambda i: abs(v[i]))
        for i in range(k):
            if i != p and v[i] != 0:
                q = v[i] // v[p]
                v[i] -= q * v[p]
                add_col(p, i, q)
    p = next(i for i in range(k) if v[i] != 0)
    if p != 0:
        v[0], v[p] = v[p], v[0]
        for r in range(k):
            minv[r][0], minv[r][p] = minv[r][p], minv[r][0]
    if v[0] < 0:
        for r in range(k):
            minv[r][0] = -minv[r][0]
    out = np.array(minv, dtype=np.int64)
    if not np.array_equal(out[:, 0], np.asarray(x, dtype=np.int64)):
        raise NumericalError("unimodular completion failed")
    return out


def gram_schmidt_norms(g: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Gram-Schmidt norms of the lattice vectors ``G @ rows[m]`` in row order."""
    vecs = np.asarray(rows, dtype=float) @ g.T
    _, r = np.linalg.qr(vecs.T)
    return np.abs(np.diagonal(r))


def min_max_gs_basis(b: LatticeBasis, cap: int = _FP_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Basis (rows = coefficient vectors) minimizing the largest Gram-Schmidt norm.

    Branch and bound over primitive vectors of successive projected lattices,
    seeded with the LLL basis.  Returns ``(rows, gs_norms)``.
    """
    g = b.generator
    k = b.dim
    _check_dim(k, False)
    red, u = _reduced(g)
    best_rows = u.T.copy()
    best_gs = gram_schmidt_norms(g, best_rows)
    best = [float(best_gs.max()) * (1 + 1e-12), best_rows, best_gs]

    def recurse(p, w, chosen, ells, vol):
        kk = p.shape[1]
        t = best[0]
        if kk == 1:
            ell = float(np.linalg.norm(p[:, 0]))
            if max(ells + [ell]) < t:
                rows = np.array(chosen + [w[:, 0]], dtype=np.int64)
                best[0] = max(ells + [ell])
                best[1] = rows
                best[2] = np.array(ells + [ell])
            return
        q, r = np.linalg.qr(p)
        x, n2 = _short_vectors(r, t * t, cap=cap)
        if x.shape[0] == 0:
            return
        order = np.argsort(n2, kind="stable")
        for idx in order:
            xv = x[idx]
            nz = xv[np.nonzero(xv)[0][0]]
            if nz < 0:
                continue
            if math.gcd(*[int(t_) for t_ in xv]) != 1:
                continue
            ell = math.sqrt(n2[idx])
            if ell >= best[0]:
                break
            rest = vol / ell
            if rest ** (1.0 / (kk - 1)) >= best[0]:
                continue
            xm = complete_to_unimodular(xv)
            v = p @ xv
            vh = v / np.linalg.norm(v)
            newp = p @ xm[:, 1:]
            newp = newp - np.outer(vh, vh @ newp)
            recurse(newp, w @ xm[:, 1:], chosen + [w @ xv], ells + [ell], rest)

    vol = abs(float(np.linalg.det(g)))
    recurse(g.copy(), np.eye(k, dtype=np.int64), [], [], vol)
    return np.asarray(best[1], dtype=np.int64), np.asarray(best[2], dtype=float)
