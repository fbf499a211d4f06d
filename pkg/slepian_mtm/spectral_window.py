"""
Aggregated Slepian spectral windows

rho_K(xi) = sum_{k<K} |U_k(xi)|^2 is the window of Thomson's estimator
(divided by K); rho~_K weights every U_k with its eigenvalue. Both are
compared in L1 with the ideal band-pass kernel (1/2W) 1_[-W, W].
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import PreconditionError
from .grid import FrequencyGrid, GridFunction, circular_convolve, trig_series_on_grid
from .models import WindowReport
from .prolate import DpssBasis, SlepianSpectra, compute_dpss, default_grid, dpss_params, power_sum, sinc_lags

logger = logging.getLogger(__name__)


def dirichlet(N: int, x):
    """
    D_N(x) = sin(N pi x) / sin(pi x).

    At integer x the removable singularity takes its limit N (-1)^{x (N-1)}.
    Accepts scalars or arrays.
    """
    if N < 2:
        raise PreconditionError(f"Dirichlet kernel needs N >= 2, got N={N}")
    x = np.asarray(x, dtype=float)
    nearest = np.rint(x)
    singular = np.abs(x - nearest) < 1e-12
    denominator = np.where(singular, 1.0, np.sin(np.pi * x))
    values = np.where(
        singular,
        N * np.where((nearest * (N - 1)) % 2 == 0, 1.0, -1.0),
        np.sin(N * np.pi * x) / denominator,
    )
    return float(values) if values.ndim == 0 else values


def _check_count(K: int, available: int) -> None:
    if not 1 <= K <= available:
        raise PreconditionError(f"K={K} outside 1..{available} available Slepian functions")


def rho_window(spectra: SlepianSpectra, K: int) -> GridFunction:
    """(1/K) sum_{k<K} |U_k|^2, a window of unit mass"""
    _check_count(K, spectra.num)
    values = np.sum(np.abs(spectra.values[:K]) ** 2, axis=0) / K
    return GridFunction(spectra.grid, values)


def rho_tilde_window(spectra: SlepianSpectra, eigenvalues: np.ndarray, K: Optional[int] = None) -> GridFunction:
    """
    (1/K) sum_{k<N} lambda_k |U_k|^2 with K = floor(2NW) unless given.

    The weights sum to 2NW, so the mass of this window is 2NW/K >= 1.
    """
    N = spectra.basis.N
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if spectra.num != N or eigenvalues.shape != (N,):
        raise PreconditionError(
            f"weighted window needs all {N} Slepian functions and eigenvalues, "
            f"got {spectra.num} and {eigenvalues.shape[0]}"
        )
    K = spectra.basis.params.taper_count if K is None else K
    _check_count(K, N)
    values = eigenvalues @ (np.abs(spectra.values) ** 2) / K
    return GridFunction(spectra.grid, values)


def ideal_bandpass(W: float, grid: FrequencyGrid) -> GridFunction:
    if not 0 < W < 0.5:
        raise PreconditionError(f"band [-W, W] must lie inside I, got W={W}")
    return GridFunction(grid, np.where(grid.band_mask(W), 1.0 / (2 * W), 0.0))


def eigen_sum_defect(eigenvalues: np.ndarray, K: int) -> float:
    """|1 - (1/K) sum_{k<K} lambda_k|"""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    _check_count(K, len(eigenvalues))
    return abs(1.0 - float(np.sum(eigenvalues[:K])) / K)


def trace_defect(eigenvalues: np.ndarray) -> float:
    """sum_k lambda_k (1 - lambda_k); zero iff every eigenvalue is 0 or 1"""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    return float(np.sum(eigenvalues * (1.0 - eigenvalues)))


def l1_deviation(
    window: GridFunction,
    ideal: GridFunction,
    N: int,
    W: float,
    K: int,
    eigen_defect: float = 0.0,
    kind: str = "thomson",
    l1_mass_normalized: Optional[float] = None,
) -> WindowReport:
    """
    Riemann L1 distance between a window and the ideal kernel, split into
    the narrow-band part over [-W, W] and the broad-band part outside it.
    """
    window.same_grid(ideal)
    mask = window.grid.band_mask(W)
    difference = window - ideal
    narrow = difference.l1_norm(mask)
    broad = difference.l1_norm(~mask)
    return WindowReport(
        N=N,
        W=W,
        K=K,
        window=kind,
        l1_deviation=narrow + broad,
        narrowband_part=narrow,
        broadband_part=broad,
        eigen_sum_defect=eigen_defect,
        l1_mass_normalized=l1_mass_normalized,
    )


def dirichlet_smooth(f: GridFunction, N: int) -> GridFunction:
    """
    (1/N) (f * |D_N|^2), a periodic convolution on the grid.

    The kernel has unit mass; the Riemann sum of |D_N|^2 is exact once
    M >= 2N - 1. M must be even.
    """
    f.grid.require_resolution(N)
    f.grid.require_even()
    kernel = GridFunction(f.grid, dirichlet(N, f.grid.points) ** 2 / N)
    return circular_convolve(f, kernel)


def band_kernel(W: float, N: int, grid: FrequencyGrid) -> GridFunction:
    """
    1_[-W, W] * |D_N|^2 evaluated exactly through its Fourier series
    sum_{|tau|<N} (N - |tau|) sin(2 pi W tau) / (pi tau) e^{2 pi i xi tau}.
    """
    grid.require_resolution(N)
    lags = sinc_lags(W, N) * (N - np.arange(N))
    coefficients = np.concatenate([lags[:0:-1], lags])
    return GridFunction(grid, trig_series_on_grid(coefficients, grid).real)


def saturation(basis: DpssBasis, grid: FrequencyGrid) -> GridFunction:
    """sum_{k<N} |U_k|^2, equal to N at every frequency"""
    if not basis.complete:
        raise PreconditionError(f"saturation needs all {basis.N} tapers, got {basis.num}")
    return power_sum(basis, grid, np.ones(basis.N))


def aggregated_window(
    basis: DpssBasis, grid: FrequencyGrid, K: Optional[int] = None, weighted: bool = False
) -> GridFunction:
    """rho_K/K, or rho~_K/K when `weighted`, on the grid"""
    K = basis.params.taper_count if K is None else K
    if not weighted:
        _check_count(K, basis.num)
        return power_sum(basis, grid, np.ones(K)).scaled(1.0 / K)
    if not basis.complete:
        raise PreconditionError(f"weighted window needs all {basis.N} tapers, got {basis.num}")
    return power_sum(basis, grid, basis.eigenvalues / K)


def window_report(
    basis: DpssBasis,
    grid: FrequencyGrid,
    K: Optional[int] = None,
    weighted: bool = False,
) -> WindowReport:
    """
    L1 deviation of rho_K/K (or of rho~_K/K when `weighted`) from the ideal
    band-pass kernel, with the eigenvalue-sum defect at the same K.

    The weighted report also carries the deviation of the window rescaled
    to unit mass, i.e. divided by 2NW instead of K.
    """
    K = basis.params.taper_count if K is None else K
    return _measure(basis, aggregated_window(basis, grid, K, weighted), K, weighted)


def _measure(basis: DpssBasis, window: GridFunction, K: int, weighted: bool) -> WindowReport:
    N, W = basis.N, basis.W
    ideal = ideal_bandpass(W, window.grid)
    defect = eigen_sum_defect(basis.eigenvalues, K)
    if not weighted:
        return l1_deviation(window, ideal, N, W, K, defect)

    mass_normalized = (window.scaled(K / (2 * N * W)) - ideal).l1_norm()
    return l1_deviation(window, ideal, N, W, K, defect, kind="weighted", l1_mass_normalized=mass_normalized)


def window_run(
    N: int,
    W: float,
    K: Optional[int] = None,
    grid_size: Optional[int] = None,
    weighted: bool = False,
    method: str = "dense",
) -> Tuple[WindowReport, GridFunction]:
    """The report for one N together with the window it measures"""
    params = dpss_params(N, W, K)
    count = params.taper_count
    grid = FrequencyGrid(grid_size) if grid_size else default_grid(N)
    basis = compute_dpss(params, num=None if weighted else count, method=method)
    window = aggregated_window(basis, grid, count, weighted)
    report = _measure(basis, window, count, weighted)
    logger.info(
        f"window N={N} W={W} K={count} ({report.window}): "
        f"l1={report.l1_deviation:.6g} broad={report.broadband_part:.6g} defect={report.eigen_sum_defect:.6g}"
    )
    return report, window


def window_sweep(
    sample_counts: Sequence[int],
    W: float,
    K: Optional[int] = None,
    grid_size: Optional[int] = None,
    weighted: bool = False,
    method: str = "dense",
) -> List[WindowReport]:
    """One WindowReport per N; K defaults to floor(2NW) for each N"""
    return [window_run(N, W, K, grid_size, weighted, method)[0] for N in sample_counts]


__all__ = [
    "aggregated_window",
    "band_kernel",
    "dirichlet",
    "dirichlet_smooth",
    "eigen_sum_defect",
    "ideal_bandpass",
    "l1_deviation",
    "rho_tilde_window",
    "rho_window",
    "saturation",
    "trace_defect",
    "window_report",
    "window_run",
    "window_sweep",
]
