"""
CSV and JSON output

Every table is a pandas DataFrame written with a header, 17 significant
digits, UTF-8 and LF line endings; missing values are empty fields.
"""

import json
import logging
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ParameterDomainError
from .grid import GridFunction
from .models import CsReport, SpectrumSpec, WindowReport, validated
from .multitaper import EstimateReport
from .offgrid_cs import Dictionary
from .prolate import DpssBasis, SlepianSpectra
from .spectral_window import eigen_sum_defect, trace_defect
from .stochastic import SamplePath

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8", na_rep="")
    logger.info(f"wrote {len(frame)} rows to {path}")
    return path


def basis_frame(basis: DpssBasis) -> pd.DataFrame:
    """One row per sequence: k, lambda, v0..v{N-1}"""
    frame = pd.DataFrame(basis.sequences.T, columns=[f"v{t}" for t in range(basis.N)])
    frame.insert(0, "lambda", basis.eigenvalues)
    frame.insert(0, "k", np.arange(basis.num))
    return frame


def dpss_summary_frame(bases: Iterable[DpssBasis]) -> pd.DataFrame:
    """
    N, W, K = floor(2NW), trace = sum lambda_k, the eigenvalue-sum defect at
    K (empty when K = 0) and sum lambda_k (1 - lambda_k).
    """
    rows = []
    for basis in bases:
        K = basis.params.critical_K
        rows.append(
            {
                "N": basis.N,
                "W": basis.W,
                "K": K,
                "trace": float(np.sum(basis.eigenvalues)),
                "defect": eigen_sum_defect(basis.eigenvalues, K) if 1 <= K <= basis.num else None,
                "trace_defect": trace_defect(basis.eigenvalues),
            }
        )
    return pd.DataFrame(rows, columns=["N", "W", "K", "trace", "defect", "trace_defect"])


def spectra_frame(spectra: SlepianSpectra) -> pd.DataFrame:
    """Long format: xi, k, re, im"""
    num, M = spectra.values.shape
    return pd.DataFrame(
        {
            "xi": np.tile(spectra.grid.points, num),
            "k": np.repeat(np.arange(num), M),
            "re": spectra.values.real.ravel(),
            "im": spectra.values.imag.ravel(),
        }
    )


def grid_function_frame(f: GridFunction) -> pd.DataFrame:
    return pd.DataFrame({"xi": f.grid.points, "value": np.real(f.values)})


def window_frame(reports: Sequence[WindowReport]) -> pd.DataFrame:
    columns = ["N", "W", "K", "l1", "narrow", "broad", "defect"]
    weighted = any(r.window == "weighted" for r in reports)
    if weighted:
        columns.append("l1_2nw")
    rows = []
    for r in reports:
        row = {
            "N": r.N,
            "W": r.W,
            "K": r.K,
            "l1": r.l1_deviation,
            "narrow": r.narrowband_part,
            "broad": r.broadband_part,
            "defect": r.eigen_sum_defect,
        }
        if weighted:
            row["l1_2nw"] = r.l1_mass_normalized
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)


def estimate_report_frame(report: EstimateReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "xi": report.grid.points,
            "true_S": report.true_S,
            "mean_est": report.mean,
            "bias": report.bias,
            "var": report.variance,
            "mse": report.mse,
        }
    )


def mse_sweep_frame(reports: Sequence[EstimateReport]) -> pd.DataFrame:
    rows = [
        {
            "N": r.N,
            "W": r.W,
            "K": r.K,
            "trials": r.trials,
            "mean_mse": r.mean_mse,
            "max_bias": r.max_bias,
            "mean_var": r.mean_variance,
        }
        for r in reports
    ]
    return pd.DataFrame(rows, columns=["N", "W", "K", "trials", "mean_mse", "max_bias", "mean_var"])


def cs_frame(reports: Sequence[CsReport]) -> pd.DataFrame:
    rows = [r.model_dump(include={"N", "W", "K", "L", "analytic", "mc", "mc_se", "bound"}) for r in reports]
    return pd.DataFrame(rows, columns=["N", "W", "K", "L", "analytic", "mc", "mc_se", "bound"])


def paths_frame(paths: Sequence[SamplePath]) -> pd.DataFrame:
    """Long format: trial, t, re, im"""
    frames = [
        pd.DataFrame(
            {
                "trial": path.trial,
                "t": np.arange(path.N),
                "re": np.real(path.values),
                "im": np.imag(path.values),
            }
        )
        for path in paths
    ]
    if not frames:
        return pd.DataFrame(columns=["trial", "t", "re", "im"])
    return pd.concat(frames, ignore_index=True)


def dictionary_frame(dictionary: Dictionary) -> pd.DataFrame:
    """Long format: col, k, j, t, re, im"""
    N, columns = dictionary.atoms.shape
    ks = np.array([k for k, _ in dictionary.index], dtype=int)
    js = np.array([j for _, j in dictionary.index], dtype=int)
    atoms = dictionary.atoms.T
    return pd.DataFrame(
        {
            "col": np.repeat(np.arange(columns), N),
            "k": np.repeat(ks, N),
            "j": np.repeat(js, N),
            "t": np.tile(np.arange(N), columns),
            "re": atoms.real.ravel(),
            "im": atoms.imag.ravel(),
        }
    )


def spectrum_to_json(spec: SpectrumSpec) -> str:
    return spec.model_dump_json(exclude_none=True)


def spectrum_from_json(text: str) -> SpectrumSpec:
    """Parse a SpectrumSpec from a JSON document (invalid input raises ParameterDomainError)"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParameterDomainError(f"spectrum is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ParameterDomainError("spectrum JSON must be an object")
    return validated(SpectrumSpec, **data)


__all__ = [
    "basis_frame",
    "cs_frame",
    "dictionary_frame",
    "dpss_summary_frame",
    "estimate_report_frame",
    "grid_function_frame",
    "mse_sweep_frame",
    "paths_frame",
    "spectra_frame",
    "spectrum_from_json",
    "spectrum_to_json",
    "window_frame",
]
