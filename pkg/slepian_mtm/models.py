"""
Pydantic models for parameters, spectra, experiment configs and reports
"""

import math
from typing import List, Literal, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import DegenerateBandwidthError, ParameterDomainError

ModelT = TypeVar("ModelT", bound=BaseModel)

# floor(2NW) is taken with this slack so that W = K/(2N) maps back to K
CRITICAL_SLACK = 1e-9


def validated(model: Type[ModelT], **values) -> ModelT:
    """Build a model, reporting invalid input as a ParameterDomainError"""
    try:
        return model(**values)
    except ValidationError as e:
        raise ParameterDomainError(str(e)) from e


def critical_count(N: int, W: float) -> int:
    return int(math.floor(2 * N * W + CRITICAL_SLACK))


def wrap(xi: float) -> float:
    """Representative of xi in [-1/2, 1/2) modulo 1"""
    return ((xi + 0.5) % 1.0) - 0.5


def default_band_count(W: float) -> int:
    """Number of translated copies of [-W, W] that fit in an interval of length 1"""
    return int(math.floor(1.0 / (2 * W) + CRITICAL_SLACK)) if W > 0 else 0


# DPSS parameters
class DpssParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    N: int = Field(..., ge=2, description="Number of samples")
    W: float = Field(..., gt=0.0, lt=0.5, description="Half-bandwidth")
    K: Optional[int] = Field(None, ge=1, description="Taper count (None: critical floor(2NW))")

    @model_validator(mode="after")
    def taper_count_fits(self):
        if self.K is not None and self.K > self.N:
            raise ValueError(f"K={self.K} exceeds N={self.N}")
        return self

    @property
    def critical_K(self) -> int:
        return critical_count(self.N, self.W)

    @property
    def taper_count(self) -> int:
        if self.K is not None:
            return self.K
        K = self.critical_K
        if K < 1:
            raise DegenerateBandwidthError(
                f"floor(2NW) = 0 for N={self.N}, W={self.W}; need W > 1/(2N)"
            )
        return K


# Spectrum models
class SpectrumSpec(BaseModel):
    """
    A power spectral density on I = [-1/2, 1/2].

    JSON fields: kind, W, bands, coeffs, level (plus weights, averaging,
    m_bands and values for the kinds that use them).
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["white", "band_mixture", "smooth_cosine", "tabulated"] = Field(
        ..., description="Family of the spectrum"
    )
    level: float = Field(1.0, ge=0.0, description="Level of a white spectrum")
    W: Optional[float] = Field(None, gt=0.0, lt=0.5, description="Band half-width")
    bands: List[int] = Field(default_factory=list, description="Occupied band indices j_n")
    weights: Optional[List[float]] = Field(None, description="Per-band weights (default 1)")
    averaging: bool = Field(True, description="Model x = (1/L) sum x_n instead of sum x_n")
    m_bands: Optional[int] = Field(None, ge=1, description="Total number of band slots")
    coeffs: List[float] = Field(default_factory=list, description="c_0, c_1, ... of c_0 + sum c_p cos(2 pi p xi)")
    values: Optional[List[float]] = Field(None, description="Tabulated S on the uniform grid")

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind == "band_mixture":
            self._check_bands()
        elif self.kind == "smooth_cosine":
            if not self.coeffs:
                raise ValueError("smooth_cosine needs at least c_0")
            # sufficient and cheap; the exact minimum is checked on a grid
            # when the spectrum is evaluated
            if self.coeffs[0] < 0:
                raise ValueError("c_0 must be non-negative")
        elif self.kind == "tabulated":
            if not self.values or len(self.values) < 2:
                raise ValueError("tabulated spectrum needs at least 2 values")
            if min(self.values) < 0:
                raise ValueError("tabulated spectrum has negative values")
        return self

    def _check_bands(self):
        if self.W is None:
            raise ValueError("band_mixture needs W")
        if not self.bands:
            raise ValueError("band_mixture needs at least one band")
        if len(set(self.bands)) != len(self.bands):
            raise ValueError(f"bands are not distinct: {self.bands}")
        m_bands = self.band_slots
        if m_bands < 1 or 2 * self.W * m_bands > 1 + CRITICAL_SLACK:
            raise ValueError(f"{m_bands} bands of width {2 * self.W} do not fit in an interval of length 1")
        bad = [j for j in self.bands if j < 0 or j >= m_bands]
        if bad:
            raise ValueError(f"band indices {bad} outside 0..{m_bands - 1}")
        if self.weights is not None:
            if len(self.weights) != len(self.bands):
                raise ValueError("weights and bands differ in length")
            if min(self.weights) < 0:
                raise ValueError("band weights must be non-negative")

    @property
    def band_slots(self) -> int:
        return self.m_bands if self.m_bands is not None else default_band_count(self.W)

    @property
    def band_weights(self) -> List[float]:
        return list(self.weights) if self.weights is not None else [1.0] * len(self.bands)

    @property
    def prefactor(self) -> float:
        """1/L^2 for the averaged model x = (1/L) sum x_n, 1 otherwise"""
        L = len(self.bands)
        return 1.0 / L ** 2 if self.averaging else 1.0

    @property
    def band_centers(self) -> List[float]:
        return [2 * self.W * j for j in self.bands]

    @property
    def symmetric(self) -> bool:
        """Whether S(xi) = S(-xi), i.e. a real-valued process is admissible"""
        if self.kind in ("white", "smooth_cosine"):
            return True
        if self.kind == "tabulated":
            values = list(self.values)
            M = len(values)
            return all(
                math.isclose(values[m], values[(M - m) % M], rel_tol=1e-12, abs_tol=1e-15)
                for m in range(M)
            )
        bands = [(wrap(c), w) for c, w in zip(self.band_centers, self.band_weights)]
        return all(
            any(abs(wrap(c + c2)) < 1e-12 and math.isclose(w, w2) for c2, w2 in bands)
            for c, w in bands
        )

    @property
    def label(self) -> str:
        if self.kind == "white":
            return f"white(level={self.level:g})"
        if self.kind == "band_mixture":
            return f"band_mixture(W={self.W:g}, bands={list(self.bands)})"
        if self.kind == "smooth_cosine":
            return "smooth_cosine(" + ",".join(f"{c:g}" for c in self.coeffs) + ")"
        return f"tabulated(M={len(self.values)})"


# Report models
class WindowReport(BaseModel):
    N: int = Field(..., description="Number of samples")
    W: float = Field(..., description="Half-bandwidth")
    K: int = Field(..., description="Taper count used for normalization")
    window: Literal["thomson", "weighted"] = Field("thomson", description="rho_K/K or rho~_K/K")
    l1_deviation: float = Field(..., ge=0.0, description="L1 distance to the ideal band-pass kernel")
    narrowband_part: float = Field(..., ge=0.0, description="Part of the distance over [-W, W]")
    broadband_part: float = Field(..., ge=0.0, description="Part of the distance outside [-W, W]")
    eigen_sum_defect: float = Field(..., ge=0.0, description="|1 - (1/K) sum_{k<K} lambda_k|")
    l1_mass_normalized: Optional[float] = Field(
        None, description="Weighted window only: L1 distance when normalized by 2NW instead of K"
    )

    @model_validator(mode="after")
    def parts_add_up(self):
        if abs(self.l1_deviation - self.narrowband_part - self.broadband_part) > 1e-12:
            raise ValueError("l1_deviation differs from narrowband_part + broadband_part")
        return self


class CsReport(BaseModel):
    N: int = Field(..., description="Number of samples")
    W: float = Field(..., description="Band half-width")
    K: int = Field(..., description="Slepian sequences per band")
    L: int = Field(..., description="Number of occupied bands")
    M_bands: int = Field(..., description="Number of band slots")
    occupied: List[int] = Field(..., description="Occupied band indices")
    analytic: float = Field(..., ge=0.0, le=1.0, description="trace((Id - P) R) / trace(R)")
    mc: Optional[float] = Field(None, description="Monte-Carlo relative residual")
    mc_se: Optional[float] = Field(None, description="Standard error of the Monte-Carlo residual")
    bound: float = Field(..., description="L log N / K")
    residual_bound: float = Field(..., description="(L/K) sum_{k>=K} lambda_k")


# Experiment configuration
class ExperimentConfig(BaseModel):
    subcommand: Literal["dpss", "window", "mse", "cs"] = Field(..., description="Experiment to run")
    n: Optional[int] = Field(None, ge=2, description="Number of samples")
    n_list: Optional[List[int]] = Field(None, description="Sweep over sample counts")
    w: Optional[float] = Field(None, gt=0.0, lt=0.5, description="Half-bandwidth")
    k: Optional[int] = Field(None, ge=1, description="Taper count (default: critical)")
    k_list: Optional[List[int]] = Field(None, description="Sweep over taper counts")
    grid: Optional[int] = Field(None, ge=2, description="Grid size M")
    trials: Optional[int] = Field(None, ge=0, description="Monte-Carlo trials")
    seed: int = Field(0, ge=0, description="Base seed of all randomness")
    spectrum: Optional[SpectrumSpec] = Field(None, description="True spectrum for mse")
    bands: List[int] = Field(default_factory=lambda: [0], description="Occupied band indices")
    m_bands: Optional[int] = Field(None, ge=1, description="Number of band slots")
    weighted: bool = Field(False, description="Use the eigenvalue-weighted window")
    method: Literal["dense", "tridiagonal"] = Field("dense", description="DPSS eigensolver")
    out: Optional[str] = Field(None, description="Output directory")
    spectra: Optional[int] = Field(None, ge=1, description="dpss: also export the spectra of this many sequences")
    export_window: bool = Field(False, description="window: also export each window on the grid")
    export_paths: int = Field(0, ge=0, description="mse: also export this many sample paths per N")
    export_dictionary: bool = Field(False, description="cs: also export the dictionary atoms")

    @model_validator(mode="after")
    def check_subcommand(self):
        if self.n_list is not None and any(n < 2 for n in self.n_list):
            raise ValueError(f"every N must be at least 2: {self.n_list}")
        if self.k_list is not None and any(k < 1 for k in self.k_list):
            raise ValueError(f"every K must be at least 1: {self.k_list}")
        if self.n is None and not self.n_list:
            raise ValueError("either n or n_list is required")
        if self.subcommand in ("dpss", "window", "cs") and self.w is None:
            raise ValueError(f"{self.subcommand} requires w")
        if self.k is not None and self.k > min(self.sample_counts):
            raise ValueError(f"k={self.k} exceeds N")
        if self.grid is not None and self.grid < 2 * max(self.sample_counts):
            raise ValueError(f"grid M={self.grid} is smaller than 2N")
        if self.spectra is not None and self.spectra > min(self.sample_counts):
            raise ValueError(f"spectra={self.spectra} exceeds N")

        if self.subcommand == "mse":
            if self.trials is None:
                self.trials = 256
            if self.trials < 2:
                raise ValueError("mse needs at least 2 trials (variance is undefined otherwise)")
            if self.k is None and not self.k_list:
                raise ValueError("mse requires k or k_list")
            if any(k > n for k in self.taper_counts for n in self.sample_counts):
                raise ValueError("every K must be at most N")
            if self.grid is not None and self.grid % 2:
                raise ValueError(f"mse needs an even grid size M, got {self.grid}")
        elif self.subcommand == "cs":
            if self.trials is None:
                self.trials = 0
            if self.trials == 1:
                raise ValueError("cs needs 0 trials (analytic only) or at least 2")
            slots = self.m_bands if self.m_bands is not None else default_band_count(self.w)
            if 2 * self.w * slots > 1 + CRITICAL_SLACK:
                raise ValueError(f"{slots} bands of width {2 * self.w} do not fit in I")
            bad = [j for j in self.bands if j < 0 or j >= slots]
            if bad or len(set(self.bands)) != len(self.bands):
                raise ValueError(f"invalid occupied bands {self.bands} for {slots} slots")
        if self.subcommand in ("window", "cs"):
            if any(critical_count(n, self.w) < 1 for n in self.sample_counts) and self.k is None:
                raise ValueError("floor(2NW) = 0: W must exceed 1/(2N)")
        return self

    @property
    def sample_counts(self) -> List[int]:
        return list(self.n_list) if self.n_list else [self.n]

    @property
    def taper_counts(self) -> List[int]:
        return list(self.k_list) if self.k_list else [self.k]
