"""Closed-loop multicast: normalizing users and inverting outage bounds into rates.

If the worst-case outage bound at gap ``C - R`` is at most ``1/K``, a union
over the ``K`` users leaves positive probability that one pre-processing
matrix serves everyone at rate ``R``, so such a matrix exists.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bounds import evaluate_bound, gap_domain
from .channel import ComplexChannel, realify, spectrum_grid, wi_mutual_information
from .ensembles import RandomStream, haar_unitary, scale_to_capacity
from .errors import DomainError
from .rates import channel_lattice, lattice_rates

RATE_TOL = 1e-4
MI_TOL = 1e-9


@dataclass(frozen=True)
class MulticastScenario:
    """Pre-whitened effective channels of ``K`` users sharing one transmitter."""

    user_channels: tuple
    k_users: Optional[int] = None
    c_multicast: Optional[float] = None

    def __post_init__(self):
        users = tuple(self.user_channels)
        if not users:
            raise DomainError("need at least one user")
        n_t = users[0].n_t
        if any(u.n_t != n_t for u in users):
            raise DomainError("all users must share the transmit dimension")
        c = min(wi_mutual_information(u) for u in users)
        if self.c_multicast is not None and abs(self.c_multicast - c) > MI_TOL * max(1.0, c):
            raise DomainError(f"c_multicast = {self.c_multicast} but the weakest user has {c} bits")
        if self.k_users is not None and self.k_users != len(users):
            raise DomainError(f"k_users = {self.k_users} but {len(users)} channels were given")
        object.__setattr__(self, "user_channels", users)
        object.__setattr__(self, "k_users", len(users))
        object.__setattr__(self, "c_multicast", float(c))

    @property
    def n_t(self) -> int:
        return self.user_channels[0].n_t


def normalize_users(sc: MulticastScenario) -> tuple[list[ComplexChannel], list[float]]:
    """Scale every user down to the common WI mutual information.

    Returns the scaled channels and the factors ``alpha_i >= 1`` with
    ``H_i = alpha_i * scaled_i``.
    """
    c = sc.c_multicast
    out, alphas = [], []
    for h in sc.user_channels:
        mi = wi_mutual_information(h)
        if mi < c - MI_TOL * max(1.0, c):
            raise DomainError(f"user has {mi} bits, below the multicast capacity {c}")
        if abs(mi - c) <= MI_TOL * max(1.0, c):
            out.append(h)
            alphas.append(1.0)
            continue
        s = scale_to_capacity(h.entries, c)
        out.append(ComplexChannel(s * h.entries))
        alphas.append(1.0 / s)
    return out, alphas


def _bound_at(bound, c_bits, gap, n_t, variants, grid):
    return evaluate_bound(bound, c_bits, gap, n_t, variants, grid)[0]


def guaranteed_rate(
    c_bits: float,
    k_users: int,
    n_t: int = 2,
    bound: str = "lemma3",
    variants: Sequence[str] = ("primitive",),
    grid_res: int = 50,
    tol: float = RATE_TOL,
) -> float:
    """Largest rate ``R`` with worst-case bound at gap ``C - R`` at most ``1/K``.

    Bisection on the gap over the bound's admissible domain (gap > 1 bit for
    the IF-SIC bounds); returns 0 when no positive rate qualifies.  The bound
    must also be below 1, so ``K = 1`` does not accept the clipped value.
    """
    if k_users < 1:
        raise DomainError("k_users must be >= 1")
    if c_bits <= 0:
        raise DomainError("capacity must be positive")
    lo, open_lo = gap_domain(bound, c_bits)
    if lo >= c_bits:
        return 0.0
    grid = spectrum_grid(c_bits, n_t, grid_res) if bound in ("lemma2", "lemma3") else None
    target = 1.0 / k_users

    def ok(gap):
        v = _bound_at(bound, c_bits, gap, n_t, variants, grid)
        # a clipped value of 1 certifies nothing, even when K = 1
        return v <= target and v < 1.0

    hi = float(c_bits)
    if not ok(hi):
        return 0.0
    if not open_lo and ok(lo):
        return float(c_bits - lo)
    # invariant: ok(hi) holds, ok(lo) fails or lo is excluded
    while hi - lo > tol / 4:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return max(0.0, float(c_bits - hi))


def existence_margin(
    c_bits: float,
    rate_bits: float,
    k_users: int,
    bound: str = "lemma3",
    variants: Sequence[str] = ("primitive",),
    n_t: int = 2,
    grid_res: int = 50,
) -> float:
    """``1 - K * P_bound(C, C - R)``; positive means a common pre-processing matrix exists."""
    if k_users < 1:
        raise DomainError("k_users must be >= 1")
    grid = spectrum_grid(c_bits, n_t, grid_res) if bound in ("lemma2", "lemma3") else None
    return 1.0 - k_users * _bound_at(bound, c_bits, c_bits - rate_bits, n_t, variants, grid)


def monotone_soundness(sc: MulticastScenario, n: int, seed, exact: bool = True) -> float:
    """Fraction of CUE draws ``P`` where IF on ``H_i P`` is at least IF on the scaled ``H_i P``.

    Checked for every user with ``alpha_i > 1``; returns the smallest fraction.
    """
    scaled, alphas = normalize_users(sc)
    rs = seed if isinstance(seed, RandomStream) else RandomStream(int(seed))
    worst = 1.0
    for h, hb, a in zip(sc.user_channels, scaled, alphas):
        if a <= 1.0:
            continue
        good = 0
        for i in range(n):
            p = haar_unitary(sc.n_t, rs.generator(i))
            r_full = lattice_rates(channel_lattice(realify(ComplexChannel(h.entries @ p))).generator, ("if",), exact)
            r_scaled = lattice_rates(channel_lattice(realify(ComplexChannel(hb.entries @ p))).generator, ("if",), exact)
            good += r_full["if"] >= r_scaled["if"] - 1e-9
        worst = min(worst, good / n)
    return worst
