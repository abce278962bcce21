"""Channel representations, white-input mutual information and spectrum grids.

A complex ``N_r x N_t`` channel ``H_c`` is lifted to the real
``2N_r x 2N_t`` matrix ``[[Re, -Im], [Im, Re]]``.  For rate purposes a
channel is summarised by the paired diagonal ``D = I + Sigma^T Sigma`` whose
entries satisfy ``prod sqrt(d_i) = 2**C``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import DomainError

UNITARY_TOL = 1e-10
PRODUCT_RTOL = 1e-9


def _lift(m: np.ndarray) -> np.ndarray:
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


@dataclass(frozen=True)
class ComplexChannel:
    """Complex channel matrix with unit-variance noise and unit input power."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim == 1:
            m = m.reshape(1, -1)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DomainError(f"channel must be a non-empty 2-D matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("channel entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n_r(self) -> int:
        return self.entries.shape[0]

    @property
    def n_t(self) -> int:
        return self.entries.shape[1]

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return ComplexChannel(self.entries * float(other))
        return NotImplemented

    __rmul__ = __mul__


@dataclass(frozen=True)
class RealChannel:
    """Real-valued ``2N_r x 2N_t`` representation of a complex channel."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise DomainError(f"real channel must be a non-empty 2-D matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("channel entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def dim(self) -> int:
        """Number of real transmit dimensions (``2N_t``)."""
        return self.entries.shape[1]

    def is_complex_structured(self, tol: float = 1e-12) -> bool:
        """True when the matrix has the block form produced by :func:`realify`."""
        r, c = self.entries.shape
        if r % 2 or c % 2:
            return False
        nr, nt = r // 2, c // 2
        m = self.entries
        scale = max(1.0, np.abs(m).max())
        return bool(
            np.allclose(m[:nr, :nt], m[nr:, nt:], atol=tol * scale, rtol=0)
            and np.allclose(m[:nr, nt:], -m[nr:, :nt], atol=tol * scale, rtol=0)
        )


@dataclass(frozen=True)
class UnitaryMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"unitary matrix must be square, got shape {m.shape}")
        err = np.abs(m.conj().T @ m - np.eye(m.shape[0])).max()
        if err > UNITARY_TOL:
            raise DomainError(f"matrix is not unitary (max |U^H U - I| = {err:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class OrthogonalMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"orthogonal matrix must be square, got shape {m.shape}")
        err = np.abs(m.T @ m - np.eye(m.shape[0])).max()
        if err > UNITARY_TOL:
            raise DomainError(f"matrix is not orthogonal (max |O^T O - I| = {err:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SpectrumD:
    """Paired diagonal of ``D = I + Sigma^T Sigma`` in descending order.

    ``d`` holds ``2N_t`` entries ``(d_1, d_1, d_2, d_2, ...)`` with
    ``d_i >= 1`` and ``prod sqrt(d_i) = 2**capacity_bits``.
    """

    d: tuple
    capacity_bits: float

    def __post_init__(self):
        d = tuple(float(x) for x in self.d)
        if len(d) == 0 or len(d) % 2:
            raise DomainError("spectrum must have an even, positive number of entries")
        if any(not np.isfinite(x) or x < 1.0 for x in d):
            raise DomainError(f"spectrum entries must be finite and >= 1, got {d}")
        if any(d[i] < d[i + 1] for i in range(len(d) - 1)):
            raise DomainError("spectrum entries must be in descending order")
        if any(d[2 * i] != d[2 * i + 1] for i in range(len(d) // 2)):
            raise DomainError("spectrum entries must come in equal pairs")
        c = float(self.capacity_bits)
        if c < 0:
            raise DomainError("capacity must be non-negative")
        log_prod = 0.5 * float(np.sum(np.log2(d)))
        if abs(2.0 ** (log_prod - c) - 1.0) > PRODUCT_RTOL:
            raise DomainError(
                f"prod sqrt(d_i) = 2^{log_prod:.12g} does not match capacity {c:.12g} bits"
            )
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "capacity_bits", c)

    @classmethod
    def from_complex(cls, dc, capacity_bits: float | None = None) -> "SpectrumD":
        """Build from the complex diagonal ``D_c`` (any order)."""
        dc = sorted((float(x) for x in dc), reverse=True)
        if capacity_bits is None:
            capacity_bits = float(np.sum(np.log2(dc)))
        return cls(tuple(x for v in dc for x in (v, v)), capacity_bits)

    @property
    def n_t(self) -> int:
        return len(self.d) // 2

    @property
    def dc(self) -> np.ndarray:
        """Complex diagonal ``D_c`` (descending)."""
        return np.array(self.d[::2])

    @property
    def d_min(self) -> float:
        return self.d[-1]

    @property
    def d_max(self) -> float:
        return self.d[0]

    def real_diag(self) -> np.ndarray:
        """Diagonal of ``D`` in the block layout ``diag(D_c, D_c)`` used by :func:`realify`."""
        dc = self.dc
        return np.concatenate([dc, dc])

    def log2_dc(self) -> np.ndarray:
        return np.log2(self.dc)


def realify(h: ComplexChannel) -> RealChannel:
    """Lift a complex channel to its real ``2N_r x 2N_t`` representation."""
    return RealChannel(_lift(h.entries))


def wi_mutual_information(h: ComplexChannel) -> float:
    """White-input mutual information ``log2 det(I + H^H H)`` in bits."""
    m = h.entries
    gram = np.eye(h.n_t) + m.conj().T @ m
    sign, logdet = np.linalg.slogdet(gram)
    if sign.real <= 0:
        raise DomainError("I + H^H H is not positive definite")
    return max(0.0, float(logdet) / np.log(2.0))


def spectrum_from_channel(h: ComplexChannel) -> SpectrumD:
    """Paired spectrum ``d_i = 1 + sigma_i^2`` of a channel (zero-padded to ``N_t``)."""
    sigma = np.linalg.svd(h.entries, compute_uv=False)
    s = np.zeros(h.n_t)
    k = min(len(sigma), h.n_t)
    s[:k] = sigma[:k]
    dc = 1.0 + s**2
    return SpectrumD.from_complex(dc)


def channel_from_spectrum(s: SpectrumD, v: UnitaryMatrix) -> ComplexChannel:
    """Canonical synthesis ``H_c = Sigma_c V_c^H`` (left singular vectors = I)."""
    if v.n != s.n_t:
        raise DomainError(f"unitary is {v.n}x{v.n} but spectrum has N_t = {s.n_t}")
    sigma = np.sqrt(np.maximum(s.dc - 1.0, 0.0))
    return ComplexChannel(sigma[:, None] * v.entries.conj().T)


def spectrum_grid(c_bits: float, n_t: int, resolution: int) -> list[SpectrumD]:
    """Spectra on a uniform grid of the ordered log-simplex.

    Points are ``log2 d_c = c_bits * k / (n_t * resolution)`` for every
    descending composition ``k`` of ``n_t * resolution`` into ``n_t``
    non-negative parts.  The all-on-one and the equal-split spectra are
    always included.  Order: descending largest entry, then lexicographic.
    """
    if c_bits < 0:
        raise DomainError("capacity must be non-negative")
    if n_t < 1 or resolution < 1:
        raise DomainError("n_t and resolution must be >= 1")
    total = n_t * resolution
    comps = []
    for combo in combinations_with_replacement(range(total, -1, -1), n_t):
        if sum(combo) == total:
            comps.append(combo)
    comps.sort(reverse=True)
    out = []
    for k in comps:
        logs = c_bits * np.asarray(k, dtype=float) / total
        out.append(SpectrumD.from_complex(2.0**logs, capacity_bits=c_bits))
    return out
