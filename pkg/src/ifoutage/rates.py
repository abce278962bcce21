"""Achievable rates of MMSE, IF, IF-SIC and joint-ML receivers.

All receivers work on the real channel ``H`` (``2N_r x 2N_t``).  The
quadratic form ``a^T (I + H^T H)^{-1} a`` is the squared norm of ``G a`` for
``G = D^{-1/2} V^T``, so IF rates reduce to lattice problems on ``G``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from . import lattice as lat
from .channel import ComplexChannel, RealChannel
from .errors import DomainError, NumericalError
from .lattice import IntegerMatrix, LatticeBasis

SCHEMES = ("mmse", "if", "if_sic", "joint_ml")


@dataclass(frozen=True)
class RateReport:
    scheme: str
    total_rate_bits: float
    per_stream_bits: tuple = ()
    integer_matrix: Optional[IntegerMatrix] = field(default=None, repr=False)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.total_rate_bits < 0:
            raise DomainError("total rate must be non-negative")
        object.__setattr__(self, "per_stream_bits", tuple(float(r) for r in self.per_stream_bits))


@dataclass(frozen=True)
class EqualizerSet:
    """MMSE equalizer ``B``, Cholesky factor ``L``, SIC matrix ``S`` and ``B~ = S B``."""

    b_matrix: np.ndarray
    l_matrix: np.ndarray
    s_matrix: np.ndarray
    b_tilde: np.ndarray


def inverse_gram(h: RealChannel) -> np.ndarray:
    """``(I + H^T H)^{-1}``."""
    m = h.entries
    return np.linalg.inv(np.eye(m.shape[1]) + m.T @ m)


def channel_lattice(h: RealChannel) -> LatticeBasis:
    """Lattice generated by ``G = D^{-1/2} V^T`` where ``H^T H = V (D - I) V^T``."""
    m = h.entries
    w, v = np.linalg.eigh(m.T @ m)
    d = 1.0 + np.maximum(w, 0.0)
    return LatticeBasis(v.T / np.sqrt(d)[:, None])


def _as_int_rows(a) -> np.ndarray:
    if isinstance(a, IntegerMatrix):
        return a.entries
    return np.asarray(a, dtype=np.int64)


def mmse_equalizer(h: RealChannel, a) -> EqualizerSet:
    """Equalizer matrices of the MMSE-GDFE form of IF-SIC for integer matrix ``a``."""
    hm = h.entries
    am = _as_int_rows(a).astype(float)
    n_out, n_in = hm.shape
    if am.shape != (n_in, n_in):
        raise DomainError(f"integer matrix must be {n_in}x{n_in}, got {am.shape}")
    if abs(np.linalg.det(am)) < 0.5:
        raise DomainError("integer matrix must be full rank")
    b = am @ hm.T @ np.linalg.inv(np.eye(n_out) + hm @ hm.T)
    kzz = am @ inverse_gram(h) @ am.T
    kzz = 0.5 * (kzz + kzz.T)
    try:
        l = np.linalg.cholesky(kzz)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"effective noise covariance not positive definite (cond = {np.linalg.cond(kzz):.3e})"
        ) from exc
    s = np.diag(np.diagonal(l)) @ np.linalg.inv(l)
    return EqualizerSet(b, l, s, s @ b)


def effective_snr(h: RealChannel, a_m) -> float:
    """``(a^T (I + H^T H)^{-1} a)^{-1}``."""
    a = np.asarray(a_m, dtype=float)
    if not np.any(a):
        raise DomainError("integer vector must be nonzero")
    return float(1.0 / (a @ inverse_gram(h) @ a))


def rate_per_equation(h: RealChannel, a_m) -> float:
    """Rate of one equation, ``max(0, log2(SNR_eff) / 2)``."""
    return max(0.0, 0.5 * math.log2(effective_snr(h, a_m)))


def if_rates_for_matrix(h: RealChannel, a) -> np.ndarray:
    """Per-equation IF rates (clipped) for the rows of ``a``."""
    am = _as_int_rows(a).astype(float)
    q = inverse_gram(h)
    quad = np.einsum("ij,jk,ik->i", am, q, am)
    return np.maximum(0.0, -0.5 * np.log2(quad))


def sic_stream_rates(h: RealChannel, a, clip: bool = True) -> np.ndarray:
    """Per-stream IF-SIC rates ``log2(1/l_mm^2) / 2`` for the row order of ``a``."""
    eq = mmse_equalizer(h, a)
    r = -np.log2(np.abs(np.diagonal(eq.l_matrix)))
    return np.maximum(0.0, r) if clip else r


def _dim_check(h: RealChannel, exact: bool):
    if h.dim % 2:
        raise DomainError("real channel must have an even number of columns")
    if exact and h.dim > lat.EXACT_DIM_CAP:
        raise DomainError(
            f"exact mode supports 2N_t <= {lat.EXACT_DIM_CAP}; use exact=False for larger channels"
        )


def mmse_rate(h: RealChannel) -> RateReport:
    """IF rate evaluated at ``A = I``."""
    k = h.dim
    eye = np.eye(k, dtype=np.int64)
    per = if_rates_for_matrix(h, eye)
    return RateReport("mmse", k * float(per.min()) + 0.0, per, IntegerMatrix(eye))


def if_rate(h: RealChannel, exact: bool = True) -> RateReport:
    """Maximal IF rate; exact mode uses the successive minima of the channel lattice."""
    _dim_check(h, exact)
    k = h.dim
    b = channel_lattice(h)
    if exact:
        rep = lat.successive_minima(b)
        rows = rep.vectors
    else:
        red, u = lat.lll_reduce(b)
        rows = u.entries.T
    per = if_rates_for_matrix(h, rows)
    return RateReport("if", k * float(per.min()) + 0.0, per, IntegerMatrix(rows))


def _j_map(rows: np.ndarray) -> np.ndarray:
    n = rows.shape[-1] // 2
    return np.concatenate([-rows[..., n:], rows[..., :n]], axis=-1)


def _sic_basis_complex4(b: LatticeBasis):
    """Optimal IF-SIC rows for a 4-D lattice with complex (Z[j]) structure.

    The optimum is ``(a, ja, c, jc)`` with ``a`` a shortest vector and ``c`` a
    vector of minimal distance to ``span(a, ja)``; Gram-Schmidt norms are
    ``(l1, l1, m, m)`` with ``m = sqrt(det G) / l1``.
    """
    g = b.generator
    a, lam1 = lat.shortest_vector(b)
    ja = _j_map(a)
    m = math.sqrt(abs(np.linalg.det(g))) / lam1
    r2 = (m * m + 0.5 * lam1 * lam1) * (1 + 1e-9)
    coeffs, n2, _ = lat._sorted_candidates(g, r2)
    w = np.stack([g @ a, g @ ja], axis=1)
    qw, _ = np.linalg.qr(w)
    vecs = coeffs @ g.T
    proj = vecs - (vecs @ qw) @ qw.T
    pn = np.linalg.norm(proj, axis=1)
    ok = pn > 1e-9 * max(m, 1e-300)
    pmin = pn[ok].min()
    for idx in np.nonzero(ok & (pn <= pmin * (1 + 1e-9)))[0]:
        c = coeffs[idx]
        rows = np.stack([a, ja, c, _j_map(c)])
        if abs(lat.int_det(rows)) == 1:
            return rows
    raise NumericalError("could not complete the complex-structured IF-SIC basis")


def if_sic_rate(h: RealChannel, exact: bool = True) -> RateReport:
    """Maximal equal-rate IF-SIC rate over unimodular integer matrices."""
    _dim_check(h, exact)
    k = h.dim
    b = channel_lattice(h)
    if not exact:
        red, u = lat.lll_reduce(b)
        rows = u.entries.T
    elif k == 4 and h.is_complex_structured():
        rows = _sic_basis_complex4(b)
    else:
        rows, _ = lat.min_max_gs_basis(b)
    per = sic_stream_rates(h, rows)
    return RateReport("if_sic", k * float(per.min()) + 0.0, per, IntegerMatrix(rows))


def r1_if(h: RealChannel) -> float:
    """Rate ``log2(1/lambda_1^2) / 2`` of the best single equation."""
    _, lam1 = lat.shortest_vector(channel_lattice(h))
    return -math.log2(lam1)


def joint_ml_rate(h_eff: ComplexChannel) -> RateReport:
    """Joint ML rate ``min_S (N_t/|S|) log2 det(I + H_S H_S^H)`` over nonempty subsets."""
    best = joint_ml_value(h_eff.entries)
    return RateReport("joint_ml", best, ())


def all_rates(h: ComplexChannel, exact: bool = True) -> dict[str, RateReport]:
    from .channel import realify

    hr = realify(h)
    return {
        "mmse": mmse_rate(hr),
        "if": if_rate(hr, exact),
        "if_sic": if_sic_rate(hr, exact),
        "joint_ml": joint_ml_rate(h),
    }


def lattice_rates(g: np.ndarray, schemes, exact: bool = True, complex_structured: bool = True) -> dict:
    """Total rates of the lattice-based schemes straight from a generator ``G``.

    Lean path for Monte Carlo loops: one LLL pass and one enumeration feed all
    requested schemes.  Values agree with :func:`mmse_rate`, :func:`if_rate`
    and :func:`if_sic_rate` on the channel that ``G`` comes from.
    """
    k = g.shape[0]
    out = {}
    if "mmse" in schemes:
        out["mmse"] = max(0.0, -k * math.log2(float(np.linalg.norm(g, axis=0).max())))
    want_if = "if" in schemes
    want_sic = "if_sic" in schemes
    if not (want_if or want_sic):
        return out
    red, u = lat._reduced(g)
    col2 = np.sum(red**2, axis=0)
    if not exact:
        if want_if:
            out["if"] = max(0.0, -0.5 * k * math.log2(float(col2.max())))
        if want_sic:
            ell = lat.gram_schmidt_norms(g, u.T)
            out["if_sic"] = max(0.0, -k * math.log2(float(ell.max())))
        return out
    sic_closed = want_sic and complex_structured and k == 4
    r2 = float(col2.max()) * (1 + lat._RADIUS_SLACK) if want_if else float(col2.min()) * (1 + lat._RADIUS_SLACK)
    coeffs, n2, xred = lat._sorted_candidates(g, r2)
    if want_if:
        chosen = lat._greedy_minima(coeffs, n2, xred, k)
        if len(chosen) < k:
            raise NumericalError("enumeration did not produce a full set of independent vectors")
        out["if"] = max(0.0, -0.5 * k * math.log2(float(n2[chosen[-1]])))
    if want_sic:
        if sic_closed:
            lam1 = math.sqrt(float(n2[0]))
            m = math.sqrt(abs(float(np.linalg.det(g)))) / lam1
            worst = max(lam1, m)
        else:
            _, ell = lat.min_max_gs_basis(LatticeBasis(g))
            worst = float(ell.max())
        out["if_sic"] = max(0.0, -k * math.log2(worst))
    return out


def joint_ml_value(hc: np.ndarray) -> float:
    """Joint ML rate for a raw complex matrix (no validation)."""
    n_t = hc.shape[1]
    best = math.inf
    for size in range(1, n_t + 1):
        for cols in combinations(range(n_t), size):
            hs = hc[:, cols]
            _, logdet = np.linalg.slogdet(np.eye(size) + hs.conj().T @ hs)
            best = min(best, n_t / size * float(logdet) / math.log(2.0))
    return max(0.0, best) + 0.0
