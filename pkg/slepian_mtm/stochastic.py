"""
Stationary Gaussian processes given by their power spectral density

A spectrum S on I determines the covariance of N contiguous samples,
E[x(t) conj(x(s))] = r[t - s] with r[tau] = int_I S(xi) e^{2 pi i xi tau} dxi.
Sample paths are a fixed square-root factor of R applied to standard
normal draws; trial i of a run with base seed s always uses the generator
seeded from (s, i), so any subset of trials can be regenerated on its own.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
import scipy.linalg

from .errors import NumericalError, ParameterDomainError, PreconditionError
from .grid import FrequencyGrid, GridFunction, grid_fourier_coefficients
from .models import SpectrumSpec, validated

logger = logging.getLogger(__name__)

JITTER = 1e-10
NEGATIVE_TOL = 1e-12


def multiband_spec(W: float, M_bands: int, occupied: Sequence[int], averaging: bool = True) -> SpectrumSpec:
    """
    The spectrum of x = (1/L) sum_n x_n where x_n has S_n = (1/2W) 1 on
    [-W, W] + 2W j_n (without the 1/L when `averaging` is off).
    """
    return validated(
        SpectrumSpec, kind="band_mixture", W=W, bands=list(occupied), m_bands=M_bands, averaging=averaging
    )


def _tabulated_grid(spec: SpectrumSpec) -> GridFunction:
    values = np.asarray(spec.values, dtype=float)
    return GridFunction(FrequencyGrid(len(values)), values)


def evaluate(spec: SpectrumSpec, grid: FrequencyGrid) -> GridFunction:
    """The true spectrum S on the grid"""
    xi = grid.points
    if spec.kind == "white":
        values = np.full(grid.M, spec.level)
    elif spec.kind == "band_mixture":
        values = np.zeros(grid.M)
        for center, weight in zip(spec.band_centers, spec.band_weights):
            values += weight / (2 * spec.W) * grid.band_mask(spec.W, center)
        values *= spec.prefactor
    elif spec.kind == "smooth_cosine":
        values = np.full(grid.M, spec.coeffs[0], dtype=float)
        for p, c in enumerate(spec.coeffs[1:], start=1):
            values += c * np.cos(2 * np.pi * p * xi)
    else:
        table = np.asarray(spec.values, dtype=float)
        # piecewise constant, nearest tabulated point (periodic)
        index = np.rint((xi + 0.5) * len(table)).astype(int) % len(table)
        values = table[index]
    return GridFunction(grid, values)


def _check_nonnegative(spec: SpectrumSpec) -> None:
    if spec.kind != "smooth_cosine":
        return
    grid = FrequencyGrid(max(4096, 16 * len(spec.coeffs)))
    low = float(evaluate(spec, grid).values.min())
    if low < -NEGATIVE_TOL * max(1.0, sum(abs(c) for c in spec.coeffs)):
        raise ParameterDomainError(f"spectrum {spec.label} is negative (minimum {low:.3g})")


@dataclass(frozen=True)
class CovarianceModel:
    """
    lags[tau] = r[tau] for tau = 0..N-1; R[t, s] = r[t - s] with
    r[-tau] = conj(r[tau]). Lags are real when the spectrum is symmetric.
    """

    N: int
    lags: np.ndarray = field(repr=False)
    symmetric: bool = False

    def __post_init__(self):
        if self.lags.shape != (self.N,):
            raise PreconditionError(f"{self.lags.shape[0]} lags for N={self.N}")
        self.lags.setflags(write=False)

    @property
    def variance(self) -> float:
        return float(self.lags[0].real)

    @property
    def matrix(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.lags, np.conj(self.lags))

    @property
    def trace(self) -> float:
        return self.N * self.variance

    def scaled(self, factor: float) -> "CovarianceModel":
        if factor <= 0:
            raise ParameterDomainError(f"covariance scale must be positive, got {factor}")
        return CovarianceModel(self.N, self.lags * factor, self.symmetric)


def covariance_from_spectrum(spec: SpectrumSpec, N: int) -> CovarianceModel:
    """
    Lags of the covariance of N samples: closed form for white and
    band-mixture spectra, Riemann quadrature on the tabulation grid
    otherwise (exact for cosine series).
    """
    if N < 1:
        raise PreconditionError(f"need at least one sample, got N={N}")
    _check_nonnegative(spec)
    tau = np.arange(N)

    if spec.kind == "white":
        lags = np.zeros(N, dtype=complex)
        lags[0] = spec.level
    elif spec.kind == "band_mixture":
        # sinc_W(tau) = sin(2 pi W tau) / (2 pi W tau)
        sinc = np.sinc(2 * spec.W * tau)
        phases = sum(
            w * np.exp(2j * np.pi * c * tau) for c, w in zip(spec.band_centers, spec.band_weights)
        )
        lags = spec.prefactor * phases * sinc
    elif spec.kind == "smooth_cosine":
        lags = np.zeros(N, dtype=complex)
        lags[0] = spec.coeffs[0]
        for p, c in enumerate(spec.coeffs[1:N], start=1):
            lags[p] = c / 2
    else:
        lags = grid_fourier_coefficients(_tabulated_grid(spec), -tau)

    symmetric = spec.symmetric
    if symmetric:
        lags = np.real(lags).astype(float)
    return CovarianceModel(N, np.array(lags), symmetric)


def covariance_factor(cov: CovarianceModel) -> np.ndarray:
    """
    F with F F^H = R + jitter I (Cholesky), jitter = 1e-10 r[0].

    When Cholesky fails the clipped eigen-square-root is used instead,
    provided every eigenvalue is above -jitter.
    """
    R = cov.matrix
    jitter = JITTER * max(cov.variance, 0.0)
    if cov.variance <= 0:
        if np.any(cov.lags != 0):
            raise NumericalError("covariance with r[0] <= 0 is not positive semidefinite", {"r0": cov.variance})
        return np.zeros_like(R)
    try:
        return scipy.linalg.cholesky(R + jitter * np.eye(cov.N), lower=True)
    except np.linalg.LinAlgError:
        pass

    values, vectors = scipy.linalg.eigh(R)
    low = float(values[0])
    if low < -jitter:
        raise NumericalError(
            "covariance is not positive semidefinite within jitter",
            {"N": cov.N, "min_eigenvalue": low, "jitter": jitter},
        )
    logger.warning(f"Cholesky failed for N={cov.N}; using eigen square root (min eigenvalue {low:.3g})")
    return vectors * np.sqrt(np.clip(values, 0.0, None))


def trial_rng(base_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([base_seed, trial]))


def _standard_draw(rng: np.random.Generator, N: int, real_valued: bool) -> np.ndarray:
    if real_valued:
        return rng.standard_normal(N)
    z = rng.standard_normal((2, N))
    return (z[0] + 1j * z[1]) / np.sqrt(2)


def draw_block(factor: np.ndarray, start: int, stop: int, base_seed: int, real_valued: bool) -> np.ndarray:
    """
    Paths for trials start..stop-1 as rows of a (stop - start) x N array.

    Every row depends on its own trial index only.
    """
    N = factor.shape[0]
    if real_valued and np.iscomplexobj(factor):
        raise ParameterDomainError("real-valued paths need a real covariance factor")
    dtype = float if real_valued else complex
    paths = np.empty((stop - start, N), dtype=dtype)
    for row, trial in enumerate(range(start, stop)):
        paths[row] = factor @ _standard_draw(trial_rng(base_seed, trial), N, real_valued)
    return paths


@dataclass(frozen=True)
class SamplePath:
    values: np.ndarray = field(repr=False)
    base_seed: int = 0
    trial: int = 0

    @property
    def N(self) -> int:
        return len(self.values)


def sample_paths(
    cov: CovarianceModel,
    count: int,
    base_seed: int,
    real_valued: bool = False,
    first_trial: int = 0,
) -> List[SamplePath]:
    """
    Zero-mean Gaussian paths with covariance R: real when `real_valued`
    (symmetric spectra only), circularly-symmetric complex otherwise.
    """
    if real_valued and not cov.symmetric:
        raise ParameterDomainError("real-valued paths need a symmetric spectrum")
    factor = covariance_factor(cov)
    stop = first_trial + count
    rows = draw_block(factor, first_trial, stop, base_seed, real_valued)
    return [SamplePath(row, base_seed, trial) for trial, row in zip(range(first_trial, stop), rows)]


__all__ = [
    "CovarianceModel",
    "SamplePath",
    "covariance_factor",
    "covariance_from_spectrum",
    "draw_block",
    "evaluate",
    "multiband_spec",
    "sample_paths",
    "trial_rng",
]
