#!/usr/bin/env python3
"""
Command-line driver for the DPSS, spectral window, multitaper MSE and
multi-band dictionary experiments. Every subcommand writes CSV files into
the output directory.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from . import __version__
from .errors import EXIT_OK, EXIT_VALIDATION, SlepianError
from .export import (
    basis_frame,
    cs_frame,
    dictionary_frame,
    dpss_summary_frame,
    estimate_report_frame,
    grid_function_frame,
    mse_sweep_frame,
    paths_frame,
    spectra_frame,
    spectrum_to_json,
    window_frame,
    write_csv,
)
from .grid import FrequencyGrid
from .models import ExperimentConfig, SpectrumSpec
from .multitaper import argmin_K, mse_sweep
from .offgrid_cs import build_dictionary, cs_sweep
from .prolate import compute_dpss, default_grid, dpss_params, slepian_eval
from .settings import configure_logging, get_settings
from .spectral_window import window_run
from .stochastic import covariance_from_spectrum, sample_paths

logger = logging.getLogger(__name__)

DEFAULT_SPECTRUM = SpectrumSpec(kind="smooth_cosine", coeffs=[1.0, 0.5])


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _spectrum(text: str) -> Dict[str, Any]:
    """A JSON document, inline or in a file"""
    path = Path(text)
    if not text.lstrip().startswith("{") and path.is_file():
        text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"--spectrum is not valid JSON: {e}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slepian-mtm",
        description="Slepian multitaper and multi-band dictionary experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  slepian-mtm dpss --n 256 --w 0.1                       # basis and eigenvalue summary
  slepian-mtm window --n-list 64,128,256,512 --w 0.1     # L1 window deviations
  slepian-mtm mse --n 512 --k-list 4,8,16,32,64 --trials 256 --seed 7
  slepian-mtm cs --n 256 --w 0.1 --bands 0,3 --trials 2000 --seed 7
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", type=str, help="Logging level (default: SLEPIAN_MTM_LOG_LEVEL or INFO)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON experiment config; explicit flags override it")
    common.add_argument("--n", type=int, help="Number of samples N")
    common.add_argument("--n-list", type=_int_list, help="Comma-separated sweep over N")
    common.add_argument("--w", type=float, help="Half-bandwidth W")
    common.add_argument("--k", type=int, help="Taper count (default floor(2NW))")
    common.add_argument("--grid", type=int, help="Frequency grid size M (default max(4096, 64N))")
    common.add_argument("--method", choices=["dense", "tridiagonal"], help="DPSS eigensolver")
    common.add_argument("--out", type=str, help="Output directory (default: SLEPIAN_MTM_OUT or results)")

    subparsers = parser.add_subparsers(dest="command", required=True)
    dpss = subparsers.add_parser("dpss", parents=[common], help="Compute DPSS and eigenvalue summary")
    dpss.add_argument("--spectra", type=int, metavar="COUNT", help="Also export U_k on the grid for k < COUNT")

    window = subparsers.add_parser("window", parents=[common], help="Spectral window L1 deviation sweep")
    window.add_argument("--weighted", action="store_true", default=None, help="Eigenvalue-weighted window")
    window.add_argument("--export-window", action="store_true", default=None, help="Also export the windows")

    mse = subparsers.add_parser("mse", parents=[common], help="Monte-Carlo MSE of the multitaper estimate")
    mse.add_argument("--k-list", type=_int_list, help="Comma-separated sweep over K")
    mse.add_argument("--trials", type=int, help="Monte-Carlo trials (default 256)")
    mse.add_argument("--seed", type=int, help="Base seed")
    mse.add_argument("--spectrum", type=_spectrum, help="True spectrum as JSON (inline or file)")
    mse.add_argument("--weighted", action="store_true", default=None, help="Eigenvalue-weighted estimate")
    mse.add_argument("--export-paths", type=int, metavar="COUNT", help="Also export the first COUNT sample paths")

    cs = subparsers.add_parser("cs", parents=[common], help="Multi-band dictionary residual")
    cs.add_argument("--bands", type=_int_list, help="Occupied band indices (default 0)")
    cs.add_argument("--m-bands", type=int, help="Number of band slots (default floor(1/(2W)))")
    cs.add_argument("--trials", type=int, help="Monte-Carlo trials, 0 for analytic only")
    cs.add_argument("--seed", type=int, help="Base seed")
    cs.add_argument("--export-dictionary", action="store_true", default=None, help="Also export the dictionary atoms")
    return parser


CONFIG_FLAGS = (
    "n", "n_list", "w", "k", "k_list", "grid", "trials", "seed",
    "spectrum", "bands", "m_bands", "weighted", "method", "out",
    "spectra", "export_window", "export_paths", "export_dictionary",
)


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """The --config document (if any) overridden by every flag given explicitly"""
    data: Dict[str, Any] = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise SlepianError(f"config {args.config} is not a JSON object")
        if data.get("subcommand", args.command) != args.command:
            raise SlepianError(f"config is for {data['subcommand']!r}, not {args.command!r}")
    for name in CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    data["subcommand"] = args.command
    return ExperimentConfig.model_validate(data)


def _out_dir(config: ExperimentConfig) -> Path:
    return Path(config.out or get_settings().out_dir)


def _grid(config: ExperimentConfig) -> Optional[FrequencyGrid]:
    return FrequencyGrid(config.grid) if config.grid else None


def cmd_dpss(config: ExperimentConfig) -> List[Path]:
    out = _out_dir(config)
    written, bases = [], []
    for N in config.sample_counts:
        basis = compute_dpss(dpss_params(N, config.w, config.k), method=config.method)
        written.append(write_csv(basis_frame(basis), out / f"dpss_basis_N{N}.csv"))
        if config.spectra:
            spectra = slepian_eval(basis, _grid(config) or default_grid(N), config.spectra)
            written.append(write_csv(spectra_frame(spectra), out / f"dpss_spectra_N{N}.csv"))
        bases.append(basis)
    written.append(write_csv(dpss_summary_frame(bases), out / "dpss_summary.csv"))
    return written


def cmd_window(config: ExperimentConfig) -> List[Path]:
    out = _out_dir(config)
    written, reports = [], []
    for N in config.sample_counts:
        report, window = window_run(N, config.w, config.k, config.grid, config.weighted, config.method)
        if config.export_window:
            written.append(write_csv(grid_function_frame(window), out / f"window_N{N}.csv"))
        reports.append(report)
    written.append(write_csv(window_frame(reports), out / "window_sweep.csv"))
    return written


def cmd_mse(config: ExperimentConfig) -> List[Path]:
    out = _out_dir(config)
    spec = config.spectrum or DEFAULT_SPECTRUM
    written, sweep = [], []
    for N in config.sample_counts:
        reports = mse_sweep(
            spec, N, config.taper_counts, config.w, config.trials, config.seed, _grid(config),
            config.weighted, config.method,
        )
        for report in reports:
            written.append(write_csv(estimate_report_frame(report), out / f"mse_report_N{N}_K{report.K}.csv"))
        if config.export_paths:
            paths = sample_paths(
                covariance_from_spectrum(spec, N), config.export_paths, config.seed, real_valued=spec.symmetric
            )
            written.append(write_csv(paths_frame(paths), out / f"paths_N{N}.csv"))
        logger.info(f"N={N}: smallest mean MSE at K={argmin_K(reports)}")
        sweep.extend(reports)
    written.append(write_csv(mse_sweep_frame(sweep), out / "mse_sweep.csv"))
    if config.export_paths:
        spectrum_file = out / "spectrum.json"
        spectrum_file.write_text(spectrum_to_json(spec) + "\n", encoding="utf-8")
        written.append(spectrum_file)
    return written


def cmd_cs(config: ExperimentConfig) -> List[Path]:
    reports = cs_sweep(
        config.sample_counts, config.w, config.m_bands, config.bands, config.trials, config.seed,
        K=config.k, method=config.method,
    )
    out = _out_dir(config)
    written = [write_csv(cs_frame(reports), out / "cs_report.csv")]
    if config.export_dictionary:
        for report in reports:
            dictionary = build_dictionary(
                report.N, report.W, report.K, report.occupied, report.M_bands, method=config.method
            )
            written.append(write_csv(dictionary_frame(dictionary), out / f"dictionary_N{report.N}.csv"))
    return written


COMMANDS = {
    "dpss": cmd_dpss,
    "window": cmd_window,
    "mse": cmd_mse,
    "cs": cmd_cs,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_settings()
        configure_logging(args.log_level.upper() if args.log_level else settings.log_level)
    except (ValidationError, ValueError) as e:
        print(f"slepian-mtm: invalid settings: {e}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        config = load_config(args)
        written = COMMANDS[args.command](config)
    except ValidationError as e:
        logger.error(f"invalid configuration: {e}")
        return EXIT_VALIDATION
    except SlepianError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"cannot read input: {e}")
        return EXIT_VALIDATION

    logger.info(f"{args.command} finished, {len(written)} file(s) in {_out_dir(config)}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
