"""Reproducible Monte Carlo over disorder realizations: moment bounds on
Green blocks, n-level eigenvalue-count bounds, integrated density of
states, level-spacing statistics and fractional-moment decay fits.

Every realization is a pure function of (model, master seed, realization
index); reduction happens in realization-index order, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .lattice import (BackgroundSpec, DisorderDensity, HamiltonianSample,
                      LatticeBox, SeedRecord, build_background,
                      sample_potential)
from .spectral import (NumericalFault, _as_z, det_im, green_block,
                       sum_principal_minors)

_BLOCK_SIZE = 256  # realizations per scheduling block; fixed for determinism


@dataclass(frozen=True)
class ModelSpec:
    box: LatticeBox
    background: BackgroundSpec
    density: DisorderDensity


@dataclass(frozen=True)
class McConfig:
    model: ModelSpec
    samples: int
    master_seed: int
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class BoundCheck:
    """A Monte Carlo estimate against a theoretical upper bound; PASS
    allows a 3-stderr one-sided margin for sampling noise."""

    estimate: McEstimate
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.estimate.mean

    @property
    def z_score(self) -> float:
        if self.estimate.stderr == 0.0:
            return math.inf if self.slack >= 0 else -math.inf
        return self.slack / self.estimate.stderr

    @property
    def passed(self) -> bool:
        return self.estimate.mean <= self.bound + 3.0 * self.estimate.stderr

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def _estimate(values: np.ndarray) -> McEstimate:
    values = np.asarray(values, dtype=float)
    m = len(values)
    stderr = float(np.std(values, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return McEstimate(mean=float(np.mean(values)), stderr=stderr, samples=m)


def run_realizations(config: McConfig,
                     kernel: Callable[[HamiltonianSample], object]) -> list:
    """Map ``kernel`` over all realizations, in parallel, returning the
    per-realization results in realization-index order."""
    model = config.model
    background = build_background(model.box, model.background)

    def run_block(start: int) -> list:
        out = []
        for i in range(start, min(start + _BLOCK_SIZE, config.samples)):
            rec = SeedRecord(config.master_seed, i)
            sample = HamiltonianSample(
                box=model.box, background=background,
                potential=sample_potential(model.box, model.density, rec),
                seed_record=rec)
            try:
                out.append(kernel(sample))
            except NumericalFault as exc:
                raise NumericalFault(f"realization {i}: {exc}") from exc
        return out

    starts = range(0, config.samples, _BLOCK_SIZE)
    if config.workers == 1 or len(starts) == 1:
        blocks = [run_block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            blocks = list(pool.map(run_block, starts))
    return [item for block in blocks for item in block]


# ---------------------------------------------------------------------------
# moment / counting bounds
# ---------------------------------------------------------------------------

def mc_minami(config: McConfig, z, indices: Sequence[int]) -> BoundCheck:
    """Mean of det Im g over realizations vs the bound
    (pi * sup_density)^n for a subset of n sites."""
    zc = _as_z(z)
    n = len(indices)
    vals = run_realizations(
        config, lambda s: det_im(green_block(s, zc, indices, "full")))
    bound = (math.pi * config.model.density.sup_density) ** n
    return BoundCheck(estimate=_estimate(np.array(vals)), bound=bound)


def interval_energy(interval: tuple[float, float]) -> complex:
    """Default spectral parameter tied to an interval [a, b):
    (a + b + i*|b - a|)/2."""
    a, b = interval
    return complex((a + b) / 2.0, abs(b - a) / 2.0)


def mc_wegner_nlevel(config: McConfig, interval: tuple[float, float],
                     n: int) -> BoundCheck:
    """Empirical frequency of at least n eigenvalues in the interval vs
    the bound (pi^n / n!) sup_density^n |J|^n |box|^n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    a, b = interval
    length = b - a
    if not np.isfinite(length) or length <= 0:
        raise ValueError(f"interval must be bounded and nonempty, got {interval}")

    def kernel(sample: HamiltonianSample) -> float:
        w = np.linalg.eigvalsh(sample.matrix)
        return 1.0 if np.count_nonzero((w >= a) & (w < b)) >= n else 0.0

    vals = run_realizations(config, kernel)
    rho = config.model.density.sup_density
    vol = config.model.box.n_sites
    bound = (math.pi ** n / math.factorial(n)) * (rho * length * vol) ** n
    return BoundCheck(estimate=_estimate(np.array(vals)), bound=bound)


def minor_sum_linkage(sample: HamiltonianSample, z) -> tuple[float, float]:
    """Per-realization identity: the sum of 2x2 principal-minor
    determinants of Im R equals [(Tr Im R)^2 - Tr (Im R)^2]/2.
    Returns (minor_sum, trace_form)."""
    zc = _as_z(z)
    r = np.linalg.inv(sample.matrix.astype(complex)
                      - zc * np.eye(sample.box.n_sites))
    im_r = (r - r.conj().T) / 2j
    minor_sum = sum_principal_minors(im_r, 2)
    tr = float(np.trace(im_r).real)
    tr_sq = float(np.trace(im_r @ im_r).real)
    return minor_sum, (tr * tr - tr_sq) / 2.0


# ---------------------------------------------------------------------------
# density of states
# ---------------------------------------------------------------------------

def estimate_ids(config: McConfig, energy: float) -> McEstimate:
    """Mean of #{eigenvalues <= E} / |box| over realizations."""
    vol = config.model.box.n_sites

    def kernel(sample: HamiltonianSample) -> float:
        w = np.linalg.eigvalsh(sample.matrix)
        return float(np.count_nonzero(w <= energy)) / vol

    return _estimate(np.array(run_realizations(config, kernel)))


def estimate_dos(config: McConfig, energy: float, bandwidth: float = 0.05) -> McEstimate:
    """Central-difference estimate of the density of states at E with
    half-width ``bandwidth``; the O(h) bias is accepted and recorded by
    the caller, not corrected here."""
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    vol = config.model.box.n_sites
    lo, hi = energy - bandwidth, energy + bandwidth

    def kernel(sample: HamiltonianSample) -> float:
        w = np.linalg.eigvalsh(sample.matrix)
        return float(np.count_nonzero((w > lo) & (w <= hi))) / (2.0 * bandwidth * vol)

    return _estimate(np.array(run_realizations(config, kernel)))


# ---------------------------------------------------------------------------
# level statistics
# ---------------------------------------------------------------------------

def rescaled_points(sample: HamiltonianSample, energy: float) -> np.ndarray:
    """|box| * (E_j - E) for all eigenvalues E_j of the realization."""
    w = np.linalg.eigvalsh(sample.matrix)
    return sample.box.n_sites * (w - energy)


@dataclass(frozen=True)
class SpacingStats:
    """Pooled rescaled-spectrum statistics around a reference energy."""

    window: float
    rate: float                      # reference intensity (DOS estimate)
    gaps: np.ndarray = field(repr=False)       # within-realization gaps, pooled
    counts: np.ndarray = field(repr=False)     # per-realization window counts
    ks_distance: float
    ks_pvalue: float
    count_chi2_pvalue: float
    mean_count: float
    expected_count: float            # 2 * window * rate


def _poisson_chi2_pvalue(counts: np.ndarray, lam: float) -> float:
    """Chi-square goodness of fit of integer counts against Poisson(lam),
    merging tail bins to keep expected occupancy >= 5."""
    m = len(counts)
    kmax = int(counts.max())
    observed = np.bincount(counts.astype(int), minlength=kmax + 1).astype(float)
    expected = m * stats.poisson.pmf(np.arange(kmax + 1), lam)
    expected = np.append(expected, m * stats.poisson.sf(kmax, lam))
    observed = np.append(observed, 0.0)
    # merge low-occupancy bins from the right
    while len(expected) > 2 and expected[-1] < 5.0:
        expected[-2] += expected[-1]
        observed[-2] += observed[-1]
        expected = expected[:-1]
        observed = observed[:-1]
    if len(expected) < 2:
        return 1.0
    chi2 = float(np.sum((observed - expected) ** 2 / expected))
    return float(stats.chi2.sf(chi2, df=len(expected) - 1))


def spacing_statistics(point_sets: Sequence[np.ndarray], window: float,
                       rate: float) -> SpacingStats:
    """Build spacing statistics from per-realization rescaled point sets.

    Gaps are nearest-neighbor differences within each realization's
    window, pooled across realizations; they are tested against
    Exponential(rate).  Window counts are tested against
    Poisson(2 * window * rate).
    """
    if rate <= 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    gap_chunks = []
    counts = []
    for pts in point_sets:
        inside = np.sort(pts[(pts >= -window) & (pts < window)])
        counts.append(len(inside))
        if len(inside) >= 2:
            gap_chunks.append(np.diff(inside))
    gaps = np.concatenate(gap_chunks) if gap_chunks else np.empty(0)
    counts = np.array(counts, dtype=int)
    if len(gaps) > 0:
        ks = stats.kstest(gaps, "expon", args=(0.0, 1.0 / rate))
        ks_distance, ks_pvalue = float(ks.statistic), float(ks.pvalue)
    else:
        ks_distance, ks_pvalue = math.nan, math.nan
    return SpacingStats(
        window=window, rate=rate, gaps=gaps, counts=counts,
        ks_distance=ks_distance, ks_pvalue=ks_pvalue,
        count_chi2_pvalue=_poisson_chi2_pvalue(counts, 2.0 * window * rate),
        mean_count=float(np.mean(counts)),
        expected_count=2.0 * window * rate)


def spacing_experiment(config: McConfig, energy: float, window: float,
                       rate: Optional[float] = None,
                       dos_bandwidth: float = 0.05) -> SpacingStats:
    """Pool rescaled spectra near ``energy`` over realizations and test
    them against the Poisson predictions at intensity ``rate`` (estimated
    from the same configuration when not supplied)."""
    if rate is None:
        dos = estimate_dos(config, energy, dos_bandwidth)
        rate = dos.mean
    if rate <= 0:
        raise ValueError(f"reference intensity must be > 0, got {rate}")
    point_sets = run_realizations(config, lambda s: rescaled_points(s, energy))
    return spacing_statistics(point_sets, window, rate)


# ---------------------------------------------------------------------------
# fractional-moment decay
# ---------------------------------------------------------------------------

_LOG_FLOOR = -650.0  # log of smallest trusted mean moment


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log mean |G(0, y)|^s against |y| along an
    axis; a negative slope signals exponential decay."""

    slope: float
    intercept: float
    r_squared: float
    distances: np.ndarray = field(repr=False)
    log_means: np.ndarray = field(repr=False)
    below_floor: bool = False


def frac_moment_decay(config: McConfig, energy: float, eps: float, s: float,
                      max_distance: Optional[int] = None) -> DecayFit:
    """Estimate E|G(0, y; E + i*eps)|^s for y along the first axis and
    fit the log-mean against distance."""
    if not 0 < s < 1:
        raise ValueError(f"s must be in (0, 1), got {s}")
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    box = config.model.box
    zc = complex(energy, eps)
    origin = box.index_of((0,) * box.dimension)
    reach = box.sides[0] - 1 if max_distance is None else min(max_distance, box.sides[0] - 1)
    if reach < 3:
        raise ValueError("need at least 3 distances along the first axis")
    dists = np.arange(1, reach + 1)
    targets = [box.index_of((int(r),) + (0,) * (box.dimension - 1)) for r in dists]

    def kernel(sample: HamiltonianSample) -> np.ndarray:
        mat = sample.matrix.astype(complex)
        mat[np.diag_indices(box.n_sites)] -= zc
        col = np.zeros(box.n_sites, dtype=complex)
        col[origin] = 1.0
        g_col = np.linalg.solve(mat, col)
        return np.abs(g_col[targets]) ** s

    moments = np.array(run_realizations(config, kernel))
    means = moments.mean(axis=0)
    with np.errstate(divide="ignore"):
        log_means = np.log(means)
    usable = log_means > _LOG_FLOOR
    if np.count_nonzero(usable) < 3:
        return DecayFit(slope=-math.inf, intercept=math.nan, r_squared=math.nan,
                        distances=dists.astype(float), log_means=log_means,
                        below_floor=True)
    x = dists[usable].astype(float)
    y = log_means[usable]
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else math.nan
    return DecayFit(slope=float(slope), intercept=float(intercept),
                    r_squared=r_squared, distances=dists.astype(float),
                    log_means=log_means, below_floor=False)
