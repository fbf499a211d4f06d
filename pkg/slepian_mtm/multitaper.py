"""
Periodogram, tapered and multitaper spectral estimates, and the
Monte-Carlo harness measuring their bias, variance and MSE.

Trials are split into consecutive blocks of `trial_block` indices. Blocks
run on a thread pool but their moments are merged in block order, so a
report depends on the seed and the block size only.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .errors import PreconditionError
from .grid import FrequencyGrid, GridFunction, circular_convolve
from .models import SpectrumSpec
from .prolate import CHUNK, DpssBasis, compute_dpss, default_grid, dpss_params, dtft_on_grid, power_sum
from .settings import get_settings
from .stochastic import SamplePath, covariance_factor, covariance_from_spectrum, draw_block, evaluate

logger = logging.getLogger(__name__)

Samples = Union[SamplePath, np.ndarray]


@dataclass(frozen=True)
class Estimate:
    """A non-negative spectral estimate on a grid; `method` names the estimator"""

    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)
    method: str = "periodogram"

    def __post_init__(self):
        if self.values.shape != (self.grid.M,):
            raise PreconditionError(f"estimate of shape {self.values.shape} on a grid of {self.grid.M} points")

    def as_grid_function(self) -> GridFunction:
        return GridFunction(self.grid, self.values)


def _samples(x: Samples) -> np.ndarray:
    return x.values if isinstance(x, SamplePath) else np.asarray(x)


def tapered_spectra(x: Samples, tapers: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """|sum_t x(t) D_t e^{-2 pi i xi t}|^2 for each row D of `tapers`, as a K x M array"""
    x = _samples(x)
    tapers = np.atleast_2d(tapers)
    if tapers.shape[-1] != len(x):
        raise PreconditionError(f"taper length {tapers.shape[-1]} differs from N={len(x)}")
    grid.require_resolution(len(x))
    return np.abs(dtft_on_grid(tapers * x, grid)) ** 2


def weighted_spectra(x: Samples, tapers: np.ndarray, weights: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """
    sum_k w_k S_k over the rows of `tapers`, accumulated CHUNK tapers at a time
    so that at most CHUNK x M tapered spectra are held in memory.
    """
    tapers = np.atleast_2d(tapers)
    weights = np.asarray(weights, dtype=float)
    if len(weights) != tapers.shape[0]:
        raise PreconditionError(f"{len(weights)} weights for {tapers.shape[0]} tapers")
    total = np.zeros(grid.M)
    for start in range(0, len(weights), CHUNK):
        total += weights[start:start + CHUNK] @ tapered_spectra(x, tapers[start:start + CHUNK], grid)
    return total


def tapered_periodogram(x: Samples, taper: np.ndarray, grid: FrequencyGrid, method: str = "tapered") -> Estimate:
    taper = np.asarray(taper, dtype=float)
    if taper.ndim != 1:
        raise PreconditionError("a taper is a single length-N vector")
    return Estimate(grid, tapered_spectra(x, taper, grid)[0], method)


def periodogram(x: Samples, grid: FrequencyGrid) -> Estimate:
    """(1/N) |sum_t x(t) e^{-2 pi i xi t}|^2, the boxcar-tapered periodogram"""
    N = len(_samples(x))
    return tapered_periodogram(x, np.full(N, 1.0 / np.sqrt(N)), grid, "periodogram")


def thomson_estimate(x: Samples, basis: DpssBasis, K: int, grid: FrequencyGrid) -> Estimate:
    """Average of the K tapered periodograms with tapers v^(0..K-1)"""
    return Estimate(grid, weighted_spectra(x, basis.tapers(K), np.full(K, 1.0 / K), grid), f"thomson({K})")


def weighted_estimate(x: Samples, basis: DpssBasis, grid: FrequencyGrid, K: Optional[int] = None) -> Estimate:
    """(1/K) sum_{k<N} lambda_k S_k with K = floor(2NW) unless given"""
    if not basis.complete:
        raise PreconditionError(f"weighted estimate needs all {basis.N} tapers, got {basis.num}")
    K = basis.params.taper_count if K is None else K
    return Estimate(grid, weighted_spectra(x, basis.tapers(basis.N), basis.eigenvalues / K, grid), "weighted")


def expected_estimate(spec: Union[SpectrumSpec, GridFunction], window: GridFunction) -> GridFunction:
    """S * window, the expectation of the estimator whose spectral window is `window`"""
    S = evaluate(spec, window.grid) if isinstance(spec, SpectrumSpec) else spec
    return circular_convolve(S, window)


@dataclass
class MomentAccumulator:
    """Running per-frequency mean and sum of squared deviations"""

    count: int = 0
    mean: Optional[np.ndarray] = None
    m2: Optional[np.ndarray] = None

    @classmethod
    def from_block(cls, values: np.ndarray) -> "MomentAccumulator":
        mean = values.mean(axis=0)
        return cls(values.shape[0], mean, np.sum((values - mean) ** 2, axis=0))

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Chan's pairwise update; the merged result does not depend on block sizes beyond rounding"""
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        total = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / total)
        m2 = self.m2 + other.m2 + delta ** 2 * (self.count * other.count / total)
        return MomentAccumulator(total, mean, m2)

    def variance(self, ddof: int = 1) -> np.ndarray:
        if self.count <= ddof:
            raise PreconditionError(f"variance needs more than {ddof} trial(s), got {self.count}")
        return self.m2 / (self.count - ddof)


def trial_blocks(trials: int, block: int) -> List[range]:
    return [range(start, min(start + block, trials)) for start in range(0, trials, block)]


def run_blocks(
    trials: int,
    work: Callable[[range], MomentAccumulator],
    threads: Optional[int] = None,
    block: Optional[int] = None,
) -> MomentAccumulator:
    """Run `work` on every trial block and merge the results in block order"""
    settings = get_settings()
    threads = threads or settings.threads
    block = block or settings.trial_block
    blocks = trial_blocks(trials, block)
    if threads == 1 or len(blocks) == 1:
        parts = [work(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, len(blocks))) as pool:
            parts = list(pool.map(work, blocks))
    total = MomentAccumulator()
    for part in parts:
        total = total.merge(part)
    return total


@dataclass(frozen=True)
class EstimateReport:
    """
    Monte-Carlo moments of an estimator against the true spectrum.

    `expected` is S * window, the exact mean of the estimator; `bias` is
    measured against S itself.
    """

    grid: FrequencyGrid
    true_S: np.ndarray = field(repr=False)
    expected: np.ndarray = field(repr=False)
    mean: np.ndarray = field(repr=False)
    variance: np.ndarray = field(repr=False)
    trials: int
    N: int
    W: float
    K: int
    spectrum: str
    method: str = "thomson"

    @property
    def bias(self) -> np.ndarray:
        return self.mean - self.true_S

    @property
    def bias_squared(self) -> np.ndarray:
        return self.bias ** 2

    @property
    def mse(self) -> np.ndarray:
        return self.bias_squared + self.variance

    @property
    def window_bias(self) -> np.ndarray:
        """Mean estimate minus S * window; zero up to Monte-Carlo error"""
        return self.mean - self.expected

    @property
    def smoothing_bias(self) -> np.ndarray:
        """S * window - S, the deterministic part of the bias"""
        return self.expected - self.true_S

    @property
    def standard_error(self) -> np.ndarray:
        return np.sqrt(self.variance / self.trials)

    @property
    def max_bias(self) -> float:
        return float(np.max(np.abs(self.bias)))

    @property
    def mean_mse(self) -> float:
        return float(np.mean(self.mse))

    @property
    def mean_variance(self) -> float:
        return float(np.mean(self.variance))


def mse_monte_carlo(
    spec: SpectrumSpec,
    N: int,
    W: float,
    K: Optional[int],
    trials: int,
    base_seed: int,
    grid: Optional[FrequencyGrid] = None,
    weighted: bool = False,
    basis: Optional[DpssBasis] = None,
    method: str = "dense",
    threads: Optional[int] = None,
) -> EstimateReport:
    """
    Bias, variance and MSE of Thomson's estimate (or of the weighted one)
    over `trials` sample paths of the process with spectrum `spec`.

    Symmetric spectra are sampled as real processes, others as complex
    circular ones. Variance uses ddof = 1. The grid needs M >= 2N and M even
    (the expectation S * window is a periodic convolution); both are
    checked before any trial runs.
    """
    if trials < 2:
        raise PreconditionError(f"variance needs at least 2 trials, got {trials}")
    params = dpss_params(N, W, K)
    K = params.taper_count
    grid = grid or default_grid(N)
    grid.require_resolution(N)
    grid.require_even()
    if basis is None:
        basis = compute_dpss(params, num=None if weighted else K, method=method)

    if weighted:
        if not basis.complete:
            raise PreconditionError(f"weighted estimate needs all {N} tapers, got {basis.num}")
        weights = basis.eigenvalues / K
        tapers = basis.tapers(N)
    else:
        weights = np.full(K, 1.0 / K)
        tapers = basis.tapers(K)

    factor = covariance_factor(covariance_from_spectrum(spec, N))
    real_valued = spec.symmetric

    def work(block: range) -> MomentAccumulator:
        paths = draw_block(factor, block.start, block.stop, base_seed, real_valued)
        estimates = np.stack([weighted_spectra(x, tapers, weights, grid) for x in paths])
        return MomentAccumulator.from_block(estimates)

    moments = run_blocks(trials, work, threads)
    true_S = evaluate(spec, grid)
    window = power_sum(basis, grid, weights)
    expected = expected_estimate(true_S, window)
    report = EstimateReport(
        grid=grid,
        true_S=true_S.values,
        expected=expected.values,
        mean=moments.mean,
        variance=moments.variance(ddof=1),
        trials=trials,
        N=N,
        W=W,
        K=K,
        spectrum=spec.label,
        method="weighted" if weighted else "thomson",
    )
    logger.info(
        f"mse N={N} W={W:.6g} K={K} trials={trials}: mean_mse={report.mean_mse:.6g} "
        f"max_bias={report.max_bias:.6g} mean_var={report.mean_variance:.6g}"
    )
    return report


def mse_sweep(
    spec: SpectrumSpec,
    N: int,
    taper_counts: Sequence[int],
    W: Optional[float],
    trials: int,
    base_seed: int,
    grid: Optional[FrequencyGrid] = None,
    weighted: bool = False,
    method: str = "dense",
    threads: Optional[int] = None,
) -> List[EstimateReport]:
    """
    One report per K, all from the same sample paths. Without W every K is
    its own critical count, W = K/(2N).
    """
    reports = []
    for K in taper_counts:
        band = W if W is not None else K / (2 * N)
        reports.append(
            mse_monte_carlo(spec, N, band, K, trials, base_seed, grid, weighted, method=method, threads=threads)
        )
    return reports


def argmin_K(reports: Sequence[EstimateReport]) -> int:
    if not reports:
        raise PreconditionError("empty sweep")
    return min(reports, key=lambda r: (r.mean_mse, r.K)).K


__all__ = [
    "Estimate",
    "EstimateReport",
    "MomentAccumulator",
    "argmin_K",
    "expected_estimate",
    "mse_monte_carlo",
    "mse_sweep",
    "periodogram",
    "run_blocks",
    "tapered_periodogram",
    "tapered_spectra",
    "thomson_estimate",
    "trial_blocks",
    "weighted_estimate",
    "weighted_spectra",
]
