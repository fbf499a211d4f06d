"""
Uniform frequency grids on I = [-1/2, 1/2) and functions sampled on them

All integrals in the package are Riemann sums on these grids. Convolutions
are periodic and computed with the FFT.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, PreconditionError


@dataclass(frozen=True)
class FrequencyGrid:
    """xi_m = -1/2 + m/M for m = 0..M-1"""

    M: int

    def __post_init__(self):
        if self.M < 2:
            raise PreconditionError(f"grid needs at least 2 points, got M={self.M}")

    @property
    def step(self) -> float:
        return 1.0 / self.M

    @property
    def points(self) -> np.ndarray:
        return -0.5 + np.arange(self.M) / self.M

    def require_resolution(self, N: int) -> None:
        """Degree-N trigonometric polynomials need M >= 2N"""
        if self.M < 2 * N:
            raise PreconditionError(f"grid too coarse: M={self.M} < 2N={2 * N}")

    def require_even(self) -> None:
        """Periodic convolution on the grid needs xi = 0 among its points, i.e. even M"""
        if self.M % 2:
            raise PreconditionError(f"periodic convolution needs an even grid size, got M={self.M}")

    def band_mask(self, W: float, center: float = 0.0) -> np.ndarray:
        """
        Points of [center - W, center + W], wrapped periodically into I.

        A point belongs to the band iff its distance to the center is at most
        W + 1/(2M) (half-bin rule).
        """
        offset = (self.points - center + 0.5) % 1.0 - 0.5
        return np.abs(offset) <= W + 0.5 / self.M

    def index_of(self, xi: float) -> int:
        """Index of the grid point nearest to xi (periodic)"""
        return int(np.rint((xi + 0.5) * self.M)) % self.M


@dataclass(frozen=True)
class GridFunction:
    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values)
        if values.shape != (self.grid.M,):
            raise PreconditionError(
                f"values of shape {values.shape} do not match grid of {self.grid.M} points"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def integral(self, mask: np.ndarray = None) -> float:
        values = self.values if mask is None else self.values[mask]
        return float(np.sum(values).real) / self.grid.M

    def l1_norm(self, mask: np.ndarray = None) -> float:
        values = np.abs(self.values) if mask is None else np.abs(self.values[mask])
        return float(np.sum(values)) / self.grid.M

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def same_grid(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(
                f"grid mismatch: M={self.grid.M} vs M={other.grid.M}"
            )

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self.same_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def scaled(self, factor: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * factor)


def circular_convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """
    Periodic convolution (f * g)(xi_m) = (1/M) sum_m' f(xi_m') g(xi_m - xi_m').

    The grid is offset by -1/2, so g is re-indexed to put xi = 0 at index 0
    before the FFT product. Odd M is rejected: xi_m - xi_m' is then never a
    grid point.
    """
    f.same_grid(g)
    f.grid.require_even()
    M = f.grid.M
    g_centered = np.roll(g.values, -(M // 2))
    out = np.fft.ifft(np.fft.fft(f.values) * np.fft.fft(g_centered)) / M
    if np.isrealobj(f.values) and np.isrealobj(g.values):
        out = out.real
    return GridFunction(f.grid, out)


def grid_fourier_coefficients(f: GridFunction, lags: np.ndarray) -> np.ndarray:
    """Riemann approximation of  int_I f(xi) e^{-2 pi i xi tau} dxi  for integer lags"""
    xi = f.grid.points
    phases = np.exp(-2j * np.pi * np.outer(lags, xi))
    return phases @ f.values / f.grid.M


def trig_series_on_grid(coefficients: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """
    Evaluate sum_{|tau|<n} c[tau] e^{2 pi i xi tau} on the grid.

    `coefficients` holds c[-(n-1)], ..., c[n-1]; requires M >= 2n - 1.
    """
    n = (len(coefficients) + 1) // 2
    M = grid.M
    if M < 2 * n - 1:
        raise PreconditionError(f"grid too coarse for a degree-{n} series: M={M}")
    taus = np.arange(-(n - 1), n)
    # xi_m = -1/2 + m/M  =>  e^{2 pi i xi_m tau} = (-1)^tau e^{2 pi i m tau / M}
    buffer = np.zeros(M, dtype=complex)
    buffer[taus % M] = coefficients * np.where(taus % 2 == 0, 1.0, -1.0)
    return np.fft.ifft(buffer) * M
