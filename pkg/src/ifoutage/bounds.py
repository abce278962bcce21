"""Union-bound outage estimates for IF and IF-SIC under CUE pre-processing.

The per-spectrum bounds sum a term that depends on the integer vector ``a``
only through ``||a||``, so the sums run over squared-norm shells with exact
integer shell counts (theta series) instead of listing vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import lattice as lat
from .channel import SpectrumD
from .errors import DomainError, EnumerationCapError

VARIANTS = frozenset({"primitive", "quadruple", "tightened"})
DEFAULT_ENUM_CAP = lat.DEFAULT_ENUM_CAP

# Exact Hermite constants gamma_n (not squared)
_HERMITE_EXACT = {
    1: 1.0,
    2: (4.0 / 3.0) ** 0.5,
    3: 2.0 ** (1.0 / 3.0),
    4: 2.0**0.5,
    5: 8.0 ** (1.0 / 5.0),
    6: (64.0 / 3.0) ** (1.0 / 6.0),
    7: 64.0 ** (1.0 / 7.0),
    8: 2.0,
    24: 4.0,
}
# gamma_n^2, kept separately so that alpha stays exact (sqrt(2)**2 != 2 in floats)
_HERMITE_SQ = {
    1: 1.0,
    2: 4.0 / 3.0,
    3: 2.0 ** (2.0 / 3.0),
    4: 2.0,
    5: 8.0 ** (2.0 / 5.0),
    6: (64.0 / 3.0) ** (1.0 / 3.0),
    7: 64.0 ** (2.0 / 7.0),
    8: 4.0,
    24: 16.0,
}
# transmit-antenna counts for which alpha uses the exact value by default
_ALPHA_EXACT_NT = (2, 3, 4, 12)


def blichfeldt(k: int) -> float:
    """Blichfeldt upper bound ``(2/pi) Gamma(2 + k/2)^(2/k)`` on ``gamma_k``."""
    return (2.0 / math.pi) * math.exp(math.lgamma(2.0 + k / 2.0) * 2.0 / k)


def hermite(k: int) -> float:
    """Exact ``gamma_k`` where known, Blichfeldt bound otherwise."""
    if k < 1:
        raise DomainError("dimension must be >= 1")
    return _HERMITE_EXACT.get(k, blichfeldt(k))


def hermite_bar(k: int) -> float:
    """Monotonized Hermite constant ``max(gamma_1, ..., gamma_k)``."""
    if k < 1:
        raise DomainError("dimension must be >= 1")
    return max(hermite(i) for i in range(1, k + 1))


def alpha(n_t: int, exact_all: bool = False) -> float:
    """``(2N_t + 3)/4 * gamma_{2N_t}^2`` with exact gamma for N_t in {2, 3, 4, 12}.

    Other ``N_t`` use the Blichfeldt bound, unless ``exact_all`` is set, in
    which case every dimension with a known Hermite constant uses it.
    """
    if n_t < 1:
        raise DomainError("n_t must be >= 1")
    k = 2 * n_t
    if n_t in _ALPHA_EXACT_NT or (exact_all and k in _HERMITE_EXACT):
        g2 = _HERMITE_SQ[k]
    else:
        g2 = blichfeldt(k) ** 2
    return (2 * n_t + 3) / 4.0 * g2


def _check_variants(variants) -> frozenset:
    v = frozenset(variants or ())
    bad = v - VARIANTS
    if bad:
        raise DomainError(f"unknown bound variants: {sorted(bad)}")
    return v


@dataclass(frozen=True)
class BoundParams:
    """Parameters shared by the per-spectrum bounds.

    Use :meth:`for_if` or :meth:`for_if_sic` to get the matching ``beta``.
    """

    c_bits: float
    gap_bits: float
    n_t: int
    beta: float
    alpha: float
    variants: frozenset = frozenset()
    scheme: str = "if"

    def __post_init__(self):
        object.__setattr__(self, "variants", _check_variants(self.variants))
        if self.n_t < 1:
            raise DomainError("n_t must be >= 1")
        if self.c_bits < 0:
            raise DomainError("capacity must be non-negative")
        if self.scheme == "if":
            want = 2.0 ** ((self.c_bits - self.gap_bits) / self.n_t) * self.alpha
        elif self.scheme == "if_sic":
            want = 2.0 ** (-0.5 * (self.c_bits + self.gap_bits))
        else:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if not math.isclose(self.beta, want, rel_tol=1e-12):
            raise DomainError(f"beta = {self.beta} inconsistent with scheme {self.scheme} (expected {want})")

    @classmethod
    def for_if(cls, c_bits, gap_bits, n_t, variants=(), exact_hermite: bool = False) -> "BoundParams":
        a = alpha(n_t, exact_hermite)
        beta = 2.0 ** ((c_bits - gap_bits) / n_t) * a
        return cls(float(c_bits), float(gap_bits), int(n_t), beta, a, frozenset(variants), "if")

    @classmethod
    def for_if_sic(cls, c_bits, gap_bits, variants=()) -> "BoundParams":
        beta = 2.0 ** (-0.5 * (c_bits + gap_bits))
        return cls(float(c_bits), float(gap_bits), 2, beta, alpha(2), frozenset(variants), "if_sic")


def _shell_sum(dim: int, max_n2: int, variants: frozenset, term, cap: int) -> float:
    """``sum_a term(||a||^2)`` over ``0 < ||a||^2 <= max_n2`` in descending norm order."""
    if max_n2 < 1:
        return 0.0
    # cheap volume estimate first so absurd radii fail before building shell tables
    est = math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * max_n2 ** (dim / 2)
    if est > 4 * cap:
        raise EnumerationCapError(f"ball holds about {est:.3g} vectors, above cap {cap}")
    counts = lat.shell_counts(dim, max_n2)
    total = int(sum(counts[1:]))
    if total > cap:
        raise EnumerationCapError(f"ball holds {total} vectors, above cap {cap}")
    if "primitive" in variants:
        counts = lat.primitive_shell_counts(dim, max_n2)
    parts = [int(counts[m]) * term(m) for m in range(max_n2, 0, -1) if counts[m]]
    s = math.fsum(parts)
    if "quadruple" in variants:
        # every nonzero orbit under {1, -1, j, -j} has exactly four members
        s /= 4.0
    return s


def _consistent(p: BoundParams, s: SpectrumD):
    if s.n_t != p.n_t:
        raise DomainError(f"spectrum has N_t = {s.n_t}, parameters say {p.n_t}")
    if abs(s.capacity_bits - p.c_bits) > 1e-9 * max(1.0, p.c_bits):
        raise DomainError(f"spectrum capacity {s.capacity_bits} != {p.c_bits}")


def lemma2_terms(p: BoundParams, d_min: float, cap: int = DEFAULT_ENUM_CAP) -> float:
    """Unclipped IF union-bound sum as a function of ``d_min`` alone."""
    n = p.n_t
    beta = p.beta
    num = 2 * n * beta ** (n - 0.5) * math.sqrt(d_min) / (2.0 ** p.c_bits * 2.0)

    def term(m):
        return num / m ** (n - 0.5)

    return _shell_sum(2 * n, lat.ball_bound(beta, d_min), p.variants, term, cap)


def lemma2_bound(p: BoundParams, s: SpectrumD, cap: int = DEFAULT_ENUM_CAP) -> float:
    """Union bound on the IF outage probability for spectrum ``s``, clipped to [0, 1]."""
    if p.scheme != "if":
        raise DomainError("lemma2_bound needs IF parameters (BoundParams.for_if)")
    _consistent(p, s)
    return min(1.0, lemma2_terms(p, s.d_min, cap))


def _sic_domain(c_bits, gap_bits, n_t):
    if n_t != 2:
        raise DomainError("the IF-SIC bounds are derived for N_t = 2 only")
    if not c_bits > 1:
        raise DomainError(f"IF-SIC bounds need C > 1 (got {c_bits})")
    if not gap_bits > 1:
        raise DomainError(f"IF-SIC bounds need gap > 1 bit (got {gap_bits})")


def lemma3_terms(p: BoundParams, d_max: float, cap: int = DEFAULT_ENUM_CAP) -> float:
    """Unclipped IF-SIC union-bound sum as a function of ``d_max`` alone."""
    c, dc = p.c_bits, p.gap_bits
    num = 2.0 * 2.0 ** (-0.75 * (c + dc)) * 2.0**c / math.sqrt(d_max)

    def term(m):
        return num / m**1.5

    return _shell_sum(4, lat.ball_bound(p.beta, 1.0 / d_max), p.variants, term, cap)


def lemma3_bound(p: BoundParams, s: SpectrumD, cap: int = DEFAULT_ENUM_CAP) -> float:
    """Union bound on the IF-SIC outage probability (``N_t = 2``), clipped to [0, 1]."""
    if p.scheme != "if_sic":
        raise DomainError("lemma3_bound needs IF-SIC parameters (BoundParams.for_if_sic)")
    _sic_domain(p.c_bits, p.gap_bits, p.n_t)
    _consistent(p, s)
    return min(1.0, lemma3_terms(p, s.d_max, cap))


def theorem1_constant(n_t: int, tightened: bool = False, exact_hermite: bool = False) -> float:
    a = alpha(n_t, exact_hermite)
    k = 2 * n_t
    if tightened:
        lead = (2.0 + math.sqrt(k) / 2.0) ** k
    else:
        lead = k + (1.0 + math.sqrt(k)) ** k
    return lead * n_t * a**n_t * math.pi**n_t / math.gamma(n_t + 1)


def theorem1_bound(n_t: int, gap_bits: float, tightened: bool = False) -> float:
    """Spectrum-free IF outage bound ``min(1, c(N_t) 2^{-gap})``."""
    if n_t < 2:
        raise DomainError("theorem1_bound needs n_t >= 2")
    return min(1.0, theorem1_constant(n_t, tightened) * 2.0 ** (-gap_bits))


def theorem2_constant(tightened: bool = False) -> float:
    return (81.0 if tightened else 85.0) * math.pi**2


def theorem2_bound(gap_bits: float, tightened: bool = False) -> float:
    """Spectrum-free IF-SIC outage bound for ``N_t = 2`` and gap > 1 bit."""
    if not gap_bits > 1:
        raise DomainError(f"theorem2_bound needs gap > 1 bit (got {gap_bits})")
    return min(1.0, theorem2_constant(tightened) * 2.0 ** (-gap_bits))


def _as_grid(grid, c_bits, n_t) -> Sequence[SpectrumD]:
    from .channel import spectrum_grid

    if isinstance(grid, int):
        grid = spectrum_grid(c_bits, n_t, grid)
    grid = list(grid)
    if not grid:
        raise DomainError("grid must be nonempty")
    return grid


def worst_case_bound(
    c_bits: float,
    gap_bits: float,
    n_t: int,
    scheme: str,
    grid: Iterable[SpectrumD] | int,
    variants=(),
    cap: int = DEFAULT_ENUM_CAP,
    return_argmax: bool = False,
):
    """Largest per-spectrum bound over ``grid`` (a list of spectra or a resolution).

    ``scheme`` is ``"if"`` (Lemma-2 family) or ``"if_sic"`` (Lemma-3 family).
    With ``return_argmax`` the first spectrum reaching the maximum is returned too.
    """
    grid = _as_grid(grid, c_bits, n_t)
    if scheme == "if":
        p = BoundParams.for_if(c_bits, gap_bits, n_t, variants)
        key, fn = (lambda s: s.d_min), lemma2_terms
    elif scheme == "if_sic":
        _sic_domain(c_bits, gap_bits, n_t)
        p = BoundParams.for_if_sic(c_bits, gap_bits, variants)
        key, fn = (lambda s: s.d_max), lemma3_terms
    else:
        raise DomainError(f"scheme must be 'if' or 'if_sic', got {scheme!r}")
    cache: dict[float, float] = {}
    best, arg = -1.0, None
    for s in grid:
        _consistent(p, s)
        k = key(s)
        if k not in cache:
            cache[k] = min(1.0, fn(p, k, cap))
        if cache[k] > best:
            best, arg = cache[k], s
    return (best, arg) if return_argmax else best


def carlson_surface_lower(d, a_norm: float) -> float:
    """Lower bound on the surface area of the ellipsoid with semi-axes ``sqrt(d_i) ||a||``.

    ``Vol(B) prod x_i sum 1/x_i`` over the ``len(d)`` semi-axes ``x_i``; equality
    holds for a sphere.
    """
    x = np.sqrt(np.asarray(d, dtype=float)) * a_norm
    k = x.size
    vol = math.pi ** (k / 2) / math.gamma(k / 2 + 1)
    return float(vol * np.prod(x) * np.sum(1.0 / x))


BOUND_NAMES = ("lemma2", "theorem1", "lemma3", "theorem2")


def evaluate_bound(name: str, c_bits: float, gap_bits: float, n_t: int = 2, variants=(), grid=50):
    """Worst-case value of a named bound; returns ``(value, argmax spectrum or None)``.

    ``grid`` is a resolution or a list of spectra (ignored by the theorems).
    """
    v = _check_variants(variants)
    if name == "lemma2":
        return worst_case_bound(c_bits, gap_bits, n_t, "if", grid, v, return_argmax=True)
    if name == "lemma3":
        return worst_case_bound(c_bits, gap_bits, n_t, "if_sic", grid, v, return_argmax=True)
    if name == "theorem1":
        return theorem1_bound(n_t, gap_bits, "tightened" in v), None
    if name == "theorem2":
        if n_t != 2:
            raise DomainError("theorem2 holds for N_t = 2 only")
        return theorem2_bound(gap_bits, "tightened" in v), None
    raise DomainError(f"unknown bound {name!r}; choose from {', '.join(BOUND_NAMES)}")


def gap_domain(name: str, c_bits: float) -> tuple[float, bool]:
    """Smallest admissible gap and whether it is excluded (open end)."""
    if name in ("lemma3", "theorem2"):
        return 1.0, True
    return 0.0, False
