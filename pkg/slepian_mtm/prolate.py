"""
Discrete prolate spheroidal sequences

The sequences v^(k)(N, W) are the eigenvectors of the N x N sinc-Toeplitz
matrix A[t, n] = sin(2 pi W (t - n)) / (pi (t - n)), with eigenvalues
lambda_k in [0, 1] sorted non-increasingly. Their DTFTs U_k(N, W; xi) are the
Slepian functions.

Time is indexed t = 0..N-1 throughout; |U_k|^2 does not depend on this
choice.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import scipy.linalg

from .errors import (
    ConsistencyError,
    DegenerateBandwidthError,
    NumericalError,
    PreconditionError,
)
from .grid import FrequencyGrid, GridFunction
from .models import DpssParams, critical_count, validated

logger = logging.getLogger(__name__)

CLAMP_TOL = 1e-10
RANGE_TOL = 1e-8
SIGN_TOL = 1e-12
ORDER_TOL = 1e-12
CHUNK = 64


def dpss_params(N: int, W: float, K: Optional[int] = None) -> DpssParams:
    return validated(DpssParams, N=N, W=W, K=K)


def critical_K(N: int, W: float, require_positive: bool = False) -> int:
    """
    floor(2NW), the number of well-concentrated tapers.

    A zero result means W <= 1/(2N); it is an error only when the caller
    needs at least one taper.
    """
    params = dpss_params(N, W)
    K = params.critical_K
    if K < 1 and require_positive:
        raise DegenerateBandwidthError(
            f"floor(2NW) = 0 for N={N}, W={W}; need W > 1/(2N)"
        )
    return K


def default_grid(N: int) -> FrequencyGrid:
    return FrequencyGrid(max(4096, 64 * N))


def sinc_lags(W: float, n: int) -> np.ndarray:
    """sin(2 pi W tau) / (pi tau) for tau = 0..n-1, with 2W at tau = 0"""
    tau = np.arange(n, dtype=float)
    lags = np.empty(n)
    lags[0] = 2 * W
    lags[1:] = np.sin(2 * np.pi * W * tau[1:]) / (np.pi * tau[1:])
    return lags


def sinc_toeplitz(params: DpssParams) -> np.ndarray:
    """The symmetric Toeplitz matrix whose eigenvectors are the DPSS"""
    return scipy.linalg.toeplitz(sinc_lags(params.W, params.N))


@dataclass(frozen=True)
class DpssBasis:
    """
    Columns of `sequences` are v^(k), k = 0..num-1, each of unit norm;
    `eigenvalues` are the matching lambda_k, non-increasing.
    """

    params: DpssParams
    sequences: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.sequences.ndim != 2 or self.sequences.shape[0] != self.params.N:
            raise PreconditionError(f"sequences of shape {self.sequences.shape} do not have N={self.params.N} rows")
        if self.eigenvalues.shape != (self.sequences.shape[1],):
            raise PreconditionError("one eigenvalue per sequence is required")
        self.sequences.setflags(write=False)
        self.eigenvalues.setflags(write=False)

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def W(self) -> float:
        return self.params.W

    @property
    def num(self) -> int:
        return self.sequences.shape[1]

    @property
    def complete(self) -> bool:
        return self.num == self.N

    def tapers(self, K: int) -> np.ndarray:
        """The first K sequences as a K x N array"""
        if not 1 <= K <= self.num:
            raise PreconditionError(f"K={K} outside 1..{self.num} computed tapers")
        return self.sequences[:, :K].T

    def with_eigenvalues(self, eigenvalues: np.ndarray) -> "DpssBasis":
        """Same sequences with replaced eigenvalues (for alternative weightings)"""
        return DpssBasis(self.params, self.sequences.copy(), np.array(eigenvalues, dtype=float))


def _tridiagonal(params: DpssParams):
    N, W = params.N, params.W
    t = np.arange(N, dtype=float)
    diag = ((N - 1 - 2 * t) / 2) ** 2 * np.cos(2 * np.pi * W)
    off = t[1:] * (N - t[1:]) / 2
    return diag, off


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """First entry with magnitude above SIGN_TOL is made positive"""
    significant = np.abs(vectors) > SIGN_TOL
    first = np.argmax(significant, axis=0)
    leading = vectors[first, np.arange(vectors.shape[1])]
    return vectors * np.where(leading < 0, -1.0, 1.0)


def _running_minimum(params: DpssParams, eigenvalues: np.ndarray) -> np.ndarray:
    """
    Rayleigh quotients in tridiagonal order, made non-increasing.

    Inside the clusters at 0 and 1 neighbours differ by rounding only. Lowered
    values are logged: at debug level up to ORDER_TOL, as a warning above it,
    where the tridiagonal order itself is suspect.
    """
    adjusted = np.minimum.accumulate(eigenvalues)
    change = eigenvalues - adjusted
    count = np.count_nonzero(change)
    if count:
        largest = float(change.max())
        log = logger.warning if largest > ORDER_TOL else logger.debug
        log(
            f"N={params.N} W={params.W}: lowered {count} Rayleigh quotient(s) to keep the eigenvalues "
            f"non-increasing, largest change {largest:.3g}"
        )
    return adjusted


def _finalize(params: DpssParams, vectors: np.ndarray, eigenvalues: np.ndarray, reorder: bool = True) -> DpssBasis:
    low, high = eigenvalues.min(), eigenvalues.max()
    if low < -RANGE_TOL or high > 1 + RANGE_TOL:
        raise ConsistencyError(
            "DPSS eigenvalues outside [0, 1]",
            {"N": params.N, "W": params.W, "min": low, "max": high},
        )
    eigenvalues = eigenvalues.copy()
    eigenvalues[(eigenvalues < 0) & (eigenvalues >= -CLAMP_TOL)] = 0.0
    eigenvalues[(eigenvalues > 1) & (eigenvalues <= 1 + CLAMP_TOL)] = 1.0
    outside = np.count_nonzero((eigenvalues < 0) | (eigenvalues > 1))
    if outside:
        logger.warning(f"{outside} eigenvalue(s) slightly outside [0, 1] reported unclamped")

    if not reorder:
        return DpssBasis(params, np.ascontiguousarray(_fix_signs(vectors)), _running_minimum(params, eigenvalues))
    order = np.argsort(-eigenvalues, kind="stable")
    vectors = _fix_signs(vectors[:, order])
    return DpssBasis(params, np.ascontiguousarray(vectors), eigenvalues[order])


def compute_dpss(
    params: DpssParams,
    num: Optional[int] = None,
    method: Literal["dense", "tridiagonal"] = "dense",
) -> DpssBasis:
    """
    The top `num` eigenpairs of the sinc-Toeplitz matrix (all N by default).

    The dense symmetric eigensolver is the reference. The tridiagonal path
    uses Slepian's commuting tridiagonal matrix for the vectors and
    recomputes each eigenvalue as the Rayleigh quotient v^T A v; it separates
    tapers whose eigenvalues are equal to 1 in floating point, which the
    dense solver returns as an arbitrary rotation of that cluster.
    """
    N = params.N
    num = N if num is None else num
    if not 1 <= num <= N:
        raise PreconditionError(f"num={num} outside 1..{N}")

    if method not in ("dense", "tridiagonal"):
        raise PreconditionError(f"unknown eigensolver {method!r}")

    A = sinc_toeplitz(params)
    start = time.perf_counter()
    try:
        if method == "dense":
            values, vectors = scipy.linalg.eigh(A, subset_by_index=[N - num, N - 1])
        elif method == "tridiagonal":
            diag, off = _tridiagonal(params)
            _, vectors = scipy.linalg.eigh_tridiagonal(
                diag, off, select="i", select_range=(N - num, N - 1)
            )
            values = np.einsum("ij,ij->j", vectors, A @ vectors)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(
            f"eigensolver failed: {e}", {"N": N, "W": params.W, "num": num, "method": method}
        ) from e

    logger.debug(f"{method} DPSS N={N} W={params.W} num={num} in {time.perf_counter() - start:.3f}s")
    return _finalize(params, vectors[:, ::-1], values[::-1], reorder=method == "dense")


def dpss_tridiagonal(params: DpssParams, num: Optional[int] = None) -> DpssBasis:
    return compute_dpss(params, num, method="tridiagonal")


def charpoly_eigenvalues(params: DpssParams) -> np.ndarray:
    """
    Eigenvalues of the sinc-Toeplitz matrix as roots of its characteristic
    polynomial (Faddeev-LeVerrier), sorted non-increasingly.

    An independent oracle for small N only; the recursion loses accuracy
    quickly beyond N = 8.
    """
    if params.N > 8:
        raise PreconditionError(f"characteristic-polynomial oracle is limited to N <= 8, got N={params.N}")
    A = sinc_toeplitz(params)
    N = params.N
    coefficients = np.zeros(N + 1)
    coefficients[0] = 1.0
    Mk = np.zeros_like(A)
    for k in range(1, N + 1):
        Mk = A @ Mk + coefficients[k - 1] * np.eye(N)
        coefficients[k] = -np.trace(A @ Mk) / k
    roots = np.roots(coefficients).real
    return np.sort(roots)[::-1]


@dataclass(frozen=True)
class SlepianSpectra:
    """values[k, m] = U_k(N, W; xi_m)"""

    basis: DpssBasis
    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    @property
    def num(self) -> int:
        return self.values.shape[0]

    def power(self, k: int) -> GridFunction:
        return GridFunction(self.grid, np.abs(self.values[k]) ** 2)


def dtft_on_grid(tapers: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """
    sum_t D_t e^{-2 pi i xi_m t} for each row D of `tapers`.

    xi_m = -1/2 + m/M, so the transform is the length-M DFT of D_t (-1)^t.
    """
    N = tapers.shape[-1]
    alternating = np.where(np.arange(N) % 2 == 0, 1.0, -1.0)
    return np.fft.fft(tapers * alternating, n=grid.M, axis=-1)


def slepian_eval(basis: DpssBasis, grid: FrequencyGrid, count: Optional[int] = None) -> SlepianSpectra:
    grid.require_resolution(basis.N)
    count = basis.num if count is None else count
    values = dtft_on_grid(basis.tapers(count), grid)
    return SlepianSpectra(basis, grid, values)


def concentration(spectra: SlepianSpectra, W: float) -> np.ndarray:
    """
    Riemann sums of |U_k|^2 over [-W, W]; these match lambda_k to within
    about 10/M.
    """
    if not 0 < W < 0.5:
        raise PreconditionError(f"[-W, W] must lie inside I, got W={W}")
    mask = spectra.grid.band_mask(W)
    return np.sum(np.abs(spectra.values[:, mask]) ** 2, axis=1) / spectra.grid.M


def power_sum(basis: DpssBasis, grid: FrequencyGrid, weights: np.ndarray) -> GridFunction:
    """
    sum_k weights[k] |U_k(xi)|^2 for k < len(weights), accumulated over
    chunks of tapers so large N and M never hold every U_k at once.
    """
    grid.require_resolution(basis.N)
    weights = np.asarray(weights, dtype=float)
    count = len(weights)
    if count > basis.num:
        raise PreconditionError(f"{count} weights for {basis.num} computed tapers")
    total = np.zeros(grid.M)
    sequences = basis.tapers(count)
    for start in range(0, count, CHUNK):
        block = dtft_on_grid(sequences[start:start + CHUNK], grid)
        total += weights[start:start + CHUNK] @ (np.abs(block) ** 2)
    return GridFunction(grid, total)


__all__ = [
    "DpssBasis",
    "SlepianSpectra",
    "charpoly_eigenvalues",
    "compute_dpss",
    "concentration",
    "critical_K",
    "critical_count",
    "default_grid",
    "dpss_params",
    "dpss_tridiagonal",
    "dtft_on_grid",
    "power_sum",
    "sinc_toeplitz",
    "slepian_eval",
]
