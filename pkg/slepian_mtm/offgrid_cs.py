"""
Modulated Slepian dictionaries for multi-band signals

Band j of width 2W is centered at 2Wj. Its atoms are the first K DPSS
modulated to that center, e^{2 pi i (2Wj) t} v_t^(k). For a process whose
spectrum occupies L of the bands, the span of the matching sub-dictionary
captures all but a fraction of order L log N / K of the expected energy.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import ParameterDomainError, PreconditionError
from .models import CsReport, default_band_count
from .multitaper import trial_blocks
from .prolate import DpssBasis, compute_dpss, dpss_params
from .settings import get_settings
from .stochastic import CovarianceModel, covariance_factor, covariance_from_spectrum, draw_block, multiband_spec

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10


@dataclass(frozen=True)
class Dictionary:
    """atoms[:, c] is the atom of (k, j) = index[c]; columns run j outer, k inner"""

    N: int
    W: float
    K: int
    M_bands: int
    bands: Tuple[int, ...]
    atoms: np.ndarray = field(repr=False)
    index: Tuple[Tuple[int, int], ...] = field(repr=False)

    @property
    def columns(self) -> int:
        return self.atoms.shape[1]

    def column_of(self, k: int, j: int) -> int:
        try:
            return self.index.index((k, j))
        except ValueError:
            raise PreconditionError(f"no atom (k={k}, j={j}) in the dictionary") from None


def build_dictionary(
    N: int,
    W: float,
    K: int,
    bands: Sequence[int],
    M_bands: Optional[int] = None,
    basis: Optional[DpssBasis] = None,
    sign: int = 1,
    method: str = "dense",
) -> Dictionary:
    """
    Atoms e^{sign 2 pi i (2Wj) t} v^(k) for k < K and j in `bands`.

    With sign = +1 the atoms of band j are concentrated on the band of the
    process built by `multiband_spec` with the same j.
    """
    params = dpss_params(N, W, K)
    M_bands = default_band_count(W) if M_bands is None else M_bands
    if M_bands < 1 or 2 * W * M_bands > 1 + 1e-9:
        raise ParameterDomainError(f"{M_bands} bands of width {2 * W} do not fit in an interval of length 1")
    bad = [j for j in bands if not 0 <= j < M_bands]
    if bad or len(set(bands)) != len(bands):
        raise ParameterDomainError(f"invalid bands {list(bands)} for {M_bands} slots")
    if sign not in (1, -1):
        raise ParameterDomainError(f"modulation sign must be +1 or -1, got {sign}")

    if basis is None:
        basis = compute_dpss(params, num=K, method=method)
    if basis.N != N or basis.W != W:
        raise PreconditionError(f"basis for N={basis.N}, W={basis.W} used for N={N}, W={W}")
    tapers = basis.tapers(K)

    t = np.arange(N)
    columns, index = [], []
    for j in bands:
        modulation = np.exp(sign * 2j * np.pi * (2 * W * j) * t)
        for k in range(K):
            columns.append(modulation * tapers[k])
            index.append((k, j))
    atoms = np.column_stack(columns) if columns else np.zeros((N, 0), dtype=complex)
    atoms.setflags(write=False)
    return Dictionary(N, W, K, M_bands, tuple(bands), atoms, tuple(index))


def span_basis(dictionary: Dictionary, rank_tol: float = RANK_TOL) -> np.ndarray:
    """
    Orthonormal basis (N x r) of the span of the atoms from a thin SVD;
    singular values at most rank_tol times the largest are dropped.
    """
    if dictionary.columns == 0:
        return np.zeros((dictionary.N, 0), dtype=complex)
    U, s, _ = scipy.linalg.svd(dictionary.atoms, full_matrices=False)
    rank = int(np.count_nonzero(s > rank_tol * s[0]))
    return U[:, :rank]


@dataclass(frozen=True)
class ProjectionResult:
    projected: np.ndarray = field(repr=False)
    residual_norm: float
    rank: int
    rank_tol: float
    residual: np.ndarray = field(repr=False)


def project(x: np.ndarray, dictionary: Dictionary, rank_tol: float = RANK_TOL) -> ProjectionResult:
    """Orthogonal projection of x onto the span of the dictionary"""
    x = np.asarray(x)
    if x.shape != (dictionary.N,):
        raise PreconditionError(f"vector of shape {x.shape} for a dictionary with N={dictionary.N}")
    if dictionary.columns == 0:
        raise PreconditionError("cannot project onto an empty dictionary")
    Q = span_basis(dictionary, rank_tol)
    projected = Q @ (Q.conj().T @ x)
    residual = x - projected
    return ProjectionResult(projected, float(np.linalg.norm(residual)), Q.shape[1], rank_tol, residual)


def analytic_relative_residual(cov: CovarianceModel, dictionary: Dictionary, rank_tol: float = RANK_TOL) -> float:
    """
    trace((Id - P) R) / trace(R), the expected relative residual of the
    process after projection onto the dictionary span. An empty dictionary
    gives 1.
    """
    if cov.N != dictionary.N:
        raise PreconditionError(f"covariance of dimension {cov.N} for a dictionary with N={dictionary.N}")
    total = cov.trace
    if total <= 0:
        raise PreconditionError("relative residual of a zero process is undefined")
    Q = span_basis(dictionary, rank_tol)
    captured = float(np.real(np.sum(Q.conj() * (cov.matrix @ Q))))
    return min(max(1.0 - captured / total, 0.0), 1.0)


def residual_bound(eigenvalues: np.ndarray, K: int, L: int) -> float:
    """(L/K) sum_{k>=K} lambda_k"""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if not 1 <= K <= len(eigenvalues):
        raise PreconditionError(f"K={K} outside 1..{len(eigenvalues)}")
    return L / K * float(np.sum(eigenvalues[K:]))


def single_band_residual(eigenvalues: np.ndarray, N: int, W: float, K: int) -> float:
    """
    sum_{k>=K} lambda_k / (2NW), the exact relative residual of one
    centered band projected onto v^(0..K-1).
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.shape != (N,):
        raise PreconditionError(f"need all {N} eigenvalues, got {eigenvalues.shape[0]}")
    return float(np.sum(eigenvalues[K:])) / (2 * N * W)


def _ratio_estimate(residuals: np.ndarray, energies: np.ndarray) -> Tuple[float, float]:
    """sum(residuals) / sum(energies) and its delta-method standard error"""
    n = len(residuals)
    ratio = float(residuals.sum() / energies.sum())
    centered = residuals - ratio * energies
    se = float(np.sqrt(np.var(centered, ddof=1) / n) / energies.mean())
    return ratio, se


def monte_carlo_residual(
    cov: CovarianceModel,
    dictionary: Dictionary,
    trials: int,
    base_seed: int,
    rank_tol: float = RANK_TOL,
    threads: Optional[int] = None,
) -> Tuple[float, float]:
    """
    E||x - Px||^2 / E||x||^2 over `trials` complex paths, with its
    standard error.
    """
    if trials < 2:
        raise PreconditionError(f"Monte-Carlo residual needs at least 2 trials, got {trials}")
    settings = get_settings()
    factor = covariance_factor(cov)
    Q = span_basis(dictionary, rank_tol)
    blocks = trial_blocks(trials, settings.trial_block)

    def work(block: range) -> Tuple[np.ndarray, np.ndarray]:
        paths = draw_block(factor, block.start, block.stop, base_seed, real_valued=False)
        residual = paths - (paths @ Q.conj()) @ Q.T
        return np.sum(np.abs(residual) ** 2, axis=1), np.sum(np.abs(paths) ** 2, axis=1)

    with ThreadPoolExecutor(max_workers=threads or settings.threads) as pool:
        parts = list(pool.map(work, blocks))
    residuals = np.concatenate([p[0] for p in parts])
    energies = np.concatenate([p[1] for p in parts])
    return _ratio_estimate(residuals, energies)


def cs_experiment(
    N: int,
    W: float,
    M_bands: Optional[int],
    occupied: Sequence[int],
    trials: int,
    base_seed: int,
    K: Optional[int] = None,
    averaging: bool = True,
    method: str = "dense",
    rank_tol: float = RANK_TOL,
    threads: Optional[int] = None,
) -> CsReport:
    """
    Relative residual of the multi-band process projected onto its
    sub-dictionary with K = floor(2NW) atoms per occupied band: analytic,
    Monte-Carlo (skipped when trials = 0) and the bound L log N / K.
    """
    params = dpss_params(N, W)
    critical = params.taper_count
    K = critical if K is None else K
    if not 1 <= K <= critical:
        raise ParameterDomainError(f"K={K} outside 1..floor(2NW)={critical}")
    if trials == 1:
        raise PreconditionError("trials must be 0 (analytic only) or at least 2")

    M_bands = default_band_count(W) if M_bands is None else M_bands
    spec = multiband_spec(W, M_bands, occupied, averaging)
    cov = covariance_from_spectrum(spec, N)
    basis = compute_dpss(params, method=method)
    dictionary = build_dictionary(N, W, K, occupied, M_bands, basis=basis)

    L = len(occupied)
    analytic = analytic_relative_residual(cov, dictionary, rank_tol)
    mc, mc_se = (None, None)
    if trials:
        mc, mc_se = monte_carlo_residual(cov, dictionary, trials, base_seed, rank_tol, threads)

    report = CsReport(
        N=N,
        W=W,
        K=K,
        L=L,
        M_bands=M_bands,
        occupied=list(occupied),
        analytic=analytic,
        mc=mc,
        mc_se=mc_se,
        bound=L * math.log(N) / K,
        residual_bound=residual_bound(basis.eigenvalues, K, L),
    )
    logger.info(
        f"cs N={N} W={W} K={K} bands={list(occupied)}: analytic={analytic:.6g}"
        + (f" mc={mc:.6g} +/- {mc_se:.2g}" if mc is not None else "")
    )
    return report


def cs_sweep(
    sample_counts: Sequence[int],
    W: float,
    M_bands: Optional[int],
    occupied: Sequence[int],
    trials: int,
    base_seed: int,
    K: Optional[int] = None,
    method: str = "dense",
    threads: Optional[int] = None,
) -> List[CsReport]:
    return [
        cs_experiment(N, W, M_bands, occupied, trials, base_seed, K=K, method=method, threads=threads)
        for N in sample_counts
    ]


__all__ = [
    "Dictionary",
    "ProjectionResult",
    "analytic_relative_residual",
    "build_dictionary",
    "cs_experiment",
    "cs_sweep",
    "monte_carlo_residual",
    "project",
    "residual_bound",
    "single_band_residual",
    "span_basis",
]
