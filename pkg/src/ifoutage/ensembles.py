"""Haar-random unitary/orthogonal matrices and the normalized Rayleigh ensemble.

Randomness is counter based: every sample is drawn from its own generator
seeded by ``(master_seed, stream_index, sample_index)``, so results do not
depend on how samples are split across workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .channel import ComplexChannel, OrthogonalMatrix, UnitaryMatrix, _lift, wi_mutual_information
from .errors import DomainError, NumericalError

MAX_RESAMPLES = 16
BISECTION_TOL = 1e-10


@dataclass(frozen=True)
class RandomStream:
    """A reproducible random stream identified by ``(master_seed, stream_index)``.

    ``generator(i)`` returns an independent generator for sample ``i``; the
    stream itself also works as a sequential source through ``rng``.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")
        if int(self.stream_index) < 0:
            raise DomainError("stream_index must be non-negative")

    def generator(self, sample_index: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(self.stream_index), int(sample_index))
        )
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream_index: int) -> "RandomStream":
        return RandomStream(self.master_seed, stream_index)


def _as_rng(rs) -> np.random.Generator:
    if isinstance(rs, np.random.Generator):
        return rs
    if isinstance(rs, RandomStream):
        return rs.generator(0)
    raise TypeError(f"expected RandomStream or numpy Generator, got {type(rs).__name__}")


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    phase = diag / np.abs(diag)
    return q * phase[None, :]


def haar_orthogonal(m: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((m, m))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diagonal(r))[None, :]


def sample_cue(n: int, rs) -> UnitaryMatrix:
    """Draw an ``n x n`` matrix from the circular unitary ensemble.

    QR of an i.i.d. complex Gaussian matrix, with the columns of ``Q``
    multiplied by the phases of ``diag(R)`` so the result is Haar distributed.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    return UnitaryMatrix(haar_unitary(n, _as_rng(rs)))


def sample_cre(m: int, rs) -> OrthogonalMatrix:
    """Draw an ``m x m`` Haar-distributed real orthogonal matrix."""
    if m < 1:
        raise DomainError("m must be >= 1")
    return OrthogonalMatrix(haar_orthogonal(m, _as_rng(rs)))


def induced_real_orthogonal(v: UnitaryMatrix) -> OrthogonalMatrix:
    """Real ``2N x 2N`` lift ``[[Re V, -Im V], [Im V, Re V]]`` of a unitary matrix."""
    return OrthogonalMatrix(_lift(v.entries))


def scale_to_capacity(h: np.ndarray, c_target: float, tol: float = BISECTION_TOL) -> float:
    """Return the ``s > 0`` with ``log2 det(I + s^2 H^H H) = c_target``.

    ``tol`` bounds the error in the mutual information, in bits.
    """
    sv2 = np.linalg.svd(h, compute_uv=False) ** 2

    def gap(s):
        return float(np.sum(np.log2(1.0 + s * s * sv2))) - c_target

    fro = float(np.sqrt(sv2.sum()))
    if fro == 0.0 or not np.any(sv2 > 0):
        raise NumericalError("cannot scale an all-zero channel to positive capacity")
    n = max(1, h.shape[1])
    lo = 2.0 ** (c_target / (2 * n)) / fro
    # lo may already overshoot for ill-conditioned draws; shrink until it does not
    while gap(lo) > 0:
        lo *= 0.5
    hi = lo
    while gap(hi) < 0:
        hi *= 2.0
    if hi == lo:
        return lo
    s = brentq(gap, lo, hi, xtol=1e-15 * hi)
    if abs(gap(s)) > tol:
        raise NumericalError(f"capacity scaling missed the target by {gap(s):.3g} bits")
    return s


def sample_normalized_rayleigh(n_t: int, c_target: float, rs) -> ComplexChannel:
    """I.i.d. CN(0,1) ``n_t x n_t`` channel scaled to WI mutual information ``c_target``."""
    if n_t < 1:
        raise DomainError("n_t must be >= 1")
    if c_target <= 0:
        raise DomainError("c_target must be positive")
    rng = _as_rng(rs)
    for _ in range(MAX_RESAMPLES):
        h = (rng.standard_normal((n_t, n_t)) + 1j * rng.standard_normal((n_t, n_t))) / np.sqrt(2.0)
        sv = np.linalg.svd(h, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            continue
        s = scale_to_capacity(h, c_target)
        out = ComplexChannel(s * h)
        if abs(wi_mutual_information(out) - c_target) < 1e-8:
            return out
    raise NumericalError(f"no well-conditioned draw after {MAX_RESAMPLES} attempts")
