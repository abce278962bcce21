"""Monte Carlo estimates of scheme outage under CUE pre-processing.

Every spectrum is paired with the same per-sample unitary draws (common
random numbers), so an estimate for a spectrum does not depend on which
grid it sits in, and a refined grid can only raise the worst case.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .channel import SpectrumD, _lift, realify
from .ensembles import RandomStream, haar_orthogonal, haar_unitary, sample_normalized_rayleigh
from .errors import DomainError
from .rates import SCHEMES, channel_lattice, joint_ml_value, lattice_rates

DEFAULT_SAMPLES = 10_000
DEFAULT_BIN = 0.05
CP_SWITCH = 10  # use Clopper-Pearson when p_hat * n falls below this


def _stream(seed) -> RandomStream:
    if isinstance(seed, RandomStream):
        return seed
    return RandomStream(int(seed))


@dataclass(frozen=True)
class SimConfig:
    scheme: str = "if"
    n_samples: int = DEFAULT_SAMPLES
    seed: RandomStream = field(default_factory=lambda: RandomStream(0))
    exact_if: bool = True
    grid: tuple = ()
    target_rate_bits: Optional[float] = None
    threads: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if int(self.n_samples) < 1:
            raise DomainError("n_samples must be >= 1")
        if int(self.threads) < 1:
            raise DomainError("threads must be >= 1")
        object.__setattr__(self, "seed", _stream(self.seed))
        object.__setattr__(self, "grid", tuple(self.grid))


@dataclass(frozen=True)
class OutageEstimate:
    """Outage fraction with a 95% interval.

    Wald half-width normally; when ``p_hat * n < 10`` the exact
    Clopper-Pearson interval is used and the half-width is its larger side.
    """

    p_hat: float
    ci95_halfwidth: float
    n_samples: int
    n_outage: int = 0
    method: str = "wald"

    @classmethod
    def from_counts(cls, k: int, n: int) -> "OutageEstimate":
        if n < 1 or not 0 <= k <= n:
            raise DomainError(f"invalid counts k={k}, n={n}")
        p = k / n
        if k < CP_SWITCH:
            lo, hi = stats.binomtest(k, n).proportion_ci(0.95, method="exact")
            return cls(p, max(p - lo, hi - p), n, k, "clopper-pearson")
        return cls(p, 1.96 * math.sqrt(p * (1 - p) / n), n, k, "wald")

    @property
    def lower(self) -> float:
        return max(0.0, self.p_hat - self.ci95_halfwidth)


# ---------------------------------------------------------------------------
# per-sample rate evaluation


def _sample_block(dc, schemes, exact, master_seed, stream_index, start, stop):
    """Rates for samples ``start..stop-1`` of one stream; shape ``(stop-start, len(schemes))``."""
    dc = np.asarray(dc, dtype=float)
    n_t = dc.size
    sigma = np.sqrt(np.maximum(dc - 1.0, 0.0))
    dinv = 1.0 / np.sqrt(np.concatenate([dc, dc]))
    rs = RandomStream(master_seed, stream_index)
    lat_schemes = [s for s in schemes if s != "joint_ml"]
    out = np.empty((stop - start, len(schemes)))
    for row, i in enumerate(range(start, stop)):
        v = haar_unitary(n_t, rs.generator(i))
        # H_c = Sigma V^H gives H^T H = V_r diag(D - 1) V_r^T, so G = D^{-1/2} V_r^T
        g = dinv[:, None] * _lift(v).T
        vals = lattice_rates(g, lat_schemes, exact) if lat_schemes else {}
        if "joint_ml" in schemes:
            vals["joint_ml"] = joint_ml_value(sigma[:, None] * v.conj().T)
        out[row] = [vals[s] for s in schemes]
    return out


def _chunks(n, parts):
    step = max(1, math.ceil(n / parts))
    return [(a, min(n, a + step)) for a in range(0, n, step)]


def _threads(cfg_threads: int) -> int:
    return max(1, int(cfg_threads))


def sample_rates(s: SpectrumD, schemes, cfg: SimConfig) -> np.ndarray:
    """Rates of ``schemes`` for ``cfg.n_samples`` CUE draws on spectrum ``s``.

    Returns an ``(n_samples, len(schemes))`` array.  The result depends only on
    the seed, never on ``cfg.threads``.
    """
    schemes = tuple(schemes)
    for sc in schemes:
        if sc not in SCHEMES:
            raise DomainError(f"unknown scheme {sc!r}")
    n = int(cfg.n_samples)
    args = (tuple(s.dc), schemes, cfg.exact_if, cfg.seed.master_seed, cfg.seed.stream_index)
    workers = min(_threads(cfg.threads), n)
    if workers == 1:
        return _sample_block(*args, 0, n)
    parts = _chunks(n, workers * 4)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(_sample_block, *args, a, b) for a, b in parts]
        return np.vstack([f.result() for f in futs])


def sample_rates_grid(grid: Sequence[SpectrumD], schemes, cfg: SimConfig) -> list[np.ndarray]:
    """:func:`sample_rates` for every spectrum in ``grid``, sharing one worker pool."""
    schemes = tuple(schemes)
    n = int(cfg.n_samples)
    workers = _threads(cfg.threads)
    if workers == 1:
        return [sample_rates(s, schemes, cfg) for s in grid]
    parts = _chunks(n, max(1, workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [
            [
                ex.submit(
                    _sample_block, tuple(s.dc), schemes, cfg.exact_if,
                    cfg.seed.master_seed, cfg.seed.stream_index, a, b,
                )
                for a, b in parts
            ]
            for s in grid
        ]
        return [np.vstack([f.result() for f in fs]) for fs in futs]


def _outage(rates: np.ndarray, r_bits: float) -> OutageEstimate:
    # strict inequality: a rate exactly equal to the target is not an outage
    return OutageEstimate.from_counts(int(np.count_nonzero(rates < r_bits)), rates.size)


def empirical_outage(s: SpectrumD, r_bits: float, cfg: SimConfig) -> OutageEstimate:
    """Fraction of CUE draws for which ``cfg.scheme`` falls strictly below ``r_bits``."""
    if r_bits < 0:
        raise DomainError("target rate must be non-negative")
    return _outage(sample_rates(s, (cfg.scheme,), cfg)[:, 0], r_bits)


@dataclass(frozen=True)
class WorstCaseCurve:
    gaps: tuple
    estimates: tuple
    argmax: tuple  # spectrum reaching the maximum at each gap

    def p_hat(self) -> np.ndarray:
        return np.array([e.p_hat for e in self.estimates])


def worst_case_from_rates(c_bits, gaps, grid, rates: Sequence[np.ndarray]) -> WorstCaseCurve:
    """Worst case over the grid from precomputed per-spectrum rate samples."""
    ests, args = [], []
    for gap in gaps:
        best, arg = None, None
        for s, r in zip(grid, rates):
            e = _outage(r, c_bits - gap)
            if best is None or e.n_outage > best.n_outage:
                best, arg = e, s
        ests.append(best)
        args.append(arg)
    return WorstCaseCurve(tuple(float(g) for g in gaps), tuple(ests), tuple(args))


def worst_case_empirical(c_bits: float, gap_bits, cfg: SimConfig) -> WorstCaseCurve:
    """Largest empirical outage over ``cfg.grid`` at ``R = C - gap`` for each gap.

    Rates are drawn once per (spectrum, sample) and reused for every gap.
    Ties between spectra go to the earliest in grid order.
    """
    grid = list(cfg.grid)
    if not grid:
        raise DomainError("grid must be nonempty")
    gaps = np.atleast_1d(np.asarray(gap_bits, dtype=float))
    rates = [r[:, 0] for r in sample_rates_grid(grid, (cfg.scheme,), cfg)]
    return worst_case_from_rates(c_bits, gaps, grid, rates)


@dataclass(frozen=True)
class RateHistogram:
    edges: np.ndarray
    mass: np.ndarray
    samples: np.ndarray = field(repr=False)

    def cdf(self, x) -> np.ndarray:
        """Empirical CDF of the underlying samples at ``x``."""
        srt = np.sort(self.samples)
        return np.searchsorted(srt, np.asarray(x, dtype=float), side="right") / srt.size


def histogram(samples, bin_width: float = DEFAULT_BIN) -> RateHistogram:
    x = np.asarray(samples, dtype=float)
    if bin_width <= 0:
        raise DomainError("bin width must be positive")
    # snap values sitting on a bin edge up to float noise onto that edge
    idx = np.floor(np.round(x / bin_width, 9)).astype(np.int64)
    nbins = int(idx.max()) + 1 if idx.size else 1
    counts = np.bincount(idx, minlength=nbins)
    edges = np.arange(nbins + 1) * bin_width
    return RateHistogram(edges, counts / x.size, x)


def rate_pdf(
    ensemble: str,
    scheme: str,
    cfg: SimConfig,
    c_bits: Optional[float] = None,
    n_t: int = 2,
    spectrum: Optional[SpectrumD] = None,
    bin_width: float = DEFAULT_BIN,
) -> RateHistogram:
    """Histogram of ``scheme`` rates, normalized to unit mass.

    ``ensemble="normalized_rayleigh"`` draws i.i.d. Rayleigh channels scaled
    to ``c_bits``; ``"fixed_spectrum_cue"`` uses ``spectrum`` (or the first
    grid entry) with CUE pre-processing.
    """
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}")
    if ensemble == "fixed_spectrum_cue":
        s = spectrum if spectrum is not None else (cfg.grid[0] if cfg.grid else None)
        if s is None:
            raise DomainError("fixed_spectrum_cue needs a spectrum")
        return histogram(sample_rates(s, (scheme,), cfg)[:, 0], bin_width)
    if ensemble == "normalized_rayleigh":
        if c_bits is None or c_bits <= 0:
            raise DomainError("normalized_rayleigh needs c_bits > 0")
        rates = rayleigh_rates(n_t, c_bits, (scheme,), cfg)[:, 0]
        return histogram(rates, bin_width)
    raise DomainError(f"unknown ensemble {ensemble!r}")


def rayleigh_rates(n_t: int, c_bits: float, schemes, cfg: SimConfig) -> np.ndarray:
    """Rates on ``cfg.n_samples`` normalized Rayleigh channels (no pre-processing)."""
    rs = cfg.seed
    out = np.empty((cfg.n_samples, len(schemes)))
    lat_schemes = [s for s in schemes if s != "joint_ml"]
    for i in range(cfg.n_samples):
        h = sample_normalized_rayleigh(n_t, c_bits, rs.generator(i))
        vals = lattice_rates(channel_lattice(realify(h)).generator, lat_schemes, cfg.exact_if)
        if "joint_ml" in schemes:
            vals["joint_ml"] = joint_ml_value(h.entries)
        out[i] = [vals[s] for s in schemes]
    return out


def _round_sig(x: np.ndarray, digits: int = 12) -> np.ndarray:
    scale = float(np.max(np.abs(x))) if x.size else 1.0
    if scale == 0:
        return x
    return np.round(x, digits - int(math.ceil(math.log10(scale))))


def lemma1_samples(s: SpectrumD, a, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Norms ``||D^{1/2} V a||`` (CUE-induced ``V``) and ``||D^{1/2} O a||`` (CRE ``O``)."""
    a = np.asarray(a, dtype=float)
    k = 2 * s.n_t
    if a.shape != (k,) or not np.any(a):
        raise DomainError(f"a must be a nonzero vector of length {k}")
    rs = _stream(seed)
    cue = RandomStream(rs.master_seed, 2 * rs.stream_index)
    cre = RandomStream(rs.master_seed, 2 * rs.stream_index + 1)
    dh = np.sqrt(s.real_diag())
    x = np.empty(n)
    y = np.empty(n)
    for i in range(n):
        v = _lift(haar_unitary(s.n_t, cue.generator(i)))
        o = haar_orthogonal(k, cre.generator(i))
        x[i] = np.linalg.norm(dh * (v @ a))
        y[i] = np.linalg.norm(dh * (o @ a))
    return x, y


def lemma1_distribution_check(s: SpectrumD, a, n: int, seed) -> float:
    """Two-sample KS statistic between the CUE-induced and CRE norm samples.

    Norms are rounded to 12 significant digits first so that degenerate
    (isotropic) cases compare equal instead of differing by float noise.
    """
    if n < 1000:
        raise DomainError("n must be >= 1000")
    x, y = lemma1_samples(s, a, n, seed)
    both = _round_sig(np.concatenate([x, y]))
    return float(stats.ks_2samp(both[:n], both[n:]).statistic)


def default_threads() -> int:
    env = os.environ.get("IF_OUTAGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"IF_OUTAGE_THREADS must be an integer, got {env!r}") from None
    return 1
