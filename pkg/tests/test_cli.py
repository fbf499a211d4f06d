"""
Integration tests for the slepian-mtm command line
"""
import json

import pandas as pd
import pytest

from slepian_mtm.cli import build_parser, load_config, main
from slepian_mtm.errors import NumericalError
from slepian_mtm.settings import get_settings


def _run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


@pytest.mark.integration
class TestDpssCommand:
    """Test the dpss subcommand"""

    def test_summary_trace(self, tmp_path):
        assert _run(tmp_path, "dpss", "--n", "256", "--w", "0.1") == 0
        summary = pd.read_csv(tmp_path / "dpss_summary.csv")
        assert summary.loc[0, "K"] == 51
        assert summary.loc[0, "trace"] == pytest.approx(51.2, abs=1e-8)
        basis = pd.read_csv(tmp_path / "dpss_basis_N256.csv")
        assert basis.shape == (256, 258)

    def test_two_by_two_eigenvalues(self, tmp_path):
        assert _run(tmp_path, "dpss", "--n", "2", "--w", "0.25") == 0
        basis = pd.read_csv(tmp_path / "dpss_basis_N2.csv")
        assert basis["lambda"].tolist() == pytest.approx([0.818310, 0.181690], abs=1e-6)

    def test_n_list_writes_one_basis_per_n(self, tmp_path):
        assert _run(tmp_path, "dpss", "--n-list", "16,32", "--w", "0.1", "--method", "tridiagonal") == 0
        assert (tmp_path / "dpss_basis_N16.csv").exists()
        assert (tmp_path / "dpss_basis_N32.csv").exists()
        assert len(pd.read_csv(tmp_path / "dpss_summary.csv")) == 2

    def test_spectra_export(self, tmp_path):
        assert _run(tmp_path, "dpss", "--n", "64", "--w", "0.1", "--grid", "256", "--spectra", "3") == 0
        spectra = pd.read_csv(tmp_path / "dpss_spectra_N64.csv")
        assert list(spectra.columns) == ["xi", "k", "re", "im"]
        assert len(spectra) == 3 * 256
        assert spectra["xi"].iloc[0] == pytest.approx(-0.5)
        energy = (spectra["re"] ** 2 + spectra["im"] ** 2).groupby(spectra["k"]).mean()
        assert energy.tolist() == pytest.approx([1.0, 1.0, 1.0], abs=1e-10)

    def test_spectra_count_above_n(self, tmp_path):
        assert _run(tmp_path, "dpss", "--n", "8", "--w", "0.25", "--spectra", "9") == 2
        assert not (tmp_path / "dpss_spectra_N8.csv").exists()

    def test_w_out_of_range(self, tmp_path):
        assert _run(tmp_path, "dpss", "--n", "2", "--w", "0.6") == 2

    def test_numerical_failure(self, tmp_path, mocker):
        mocker.patch("slepian_mtm.cli.compute_dpss", side_effect=NumericalError("eigensolver failed", {"N": 16}))
        assert _run(tmp_path, "dpss", "--n", "16", "--w", "0.1") == 3

    def test_out_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLEPIAN_MTM_OUT", str(tmp_path / "env_out"))
        assert main(["dpss", "--n", "8", "--w", "0.25"]) == 0
        assert (tmp_path / "env_out" / "dpss_summary.csv").exists()


@pytest.mark.integration
class TestWindowCommand:
    """Test the window subcommand"""

    def test_deviation_decreases(self, tmp_path):
        assert _run(tmp_path, "window", "--n-list", "64,128,256", "--w", "0.1") == 0
        frame = pd.read_csv(tmp_path / "window_sweep.csv")
        assert frame["K"].tolist() == [12, 25, 51]
        l1 = frame["l1"].tolist()
        assert all(b <= 1.1 * a for a, b in zip(l1, l1[1:]))
        assert "l1_2nw" not in frame.columns

    def test_weighted(self, tmp_path):
        assert _run(tmp_path, "window", "--n", "64", "--w", "0.1", "--weighted", "--grid", "1024") == 0
        frame = pd.read_csv(tmp_path / "window_sweep.csv")
        assert frame.loc[0, "l1_2nw"] > 0

    def test_export_window(self, tmp_path):
        assert _run(tmp_path, "window", "--n-list", "64,128", "--w", "0.1", "--grid", "1024", "--export-window") == 0
        for N in (64, 128):
            window = pd.read_csv(tmp_path / f"window_N{N}.csv")
            assert list(window.columns) == ["xi", "value"]
            assert len(window) == 1024
            assert window["value"].mean() == pytest.approx(1.0, abs=1e-10)
        assert len(pd.read_csv(tmp_path / "window_sweep.csv")) == 2

    def test_no_window_export_by_default(self, tmp_path):
        assert _run(tmp_path, "window", "--n", "64", "--w", "0.1", "--grid", "1024") == 0
        assert not (tmp_path / "window_N64.csv").exists()

    def test_degenerate_bandwidth(self, tmp_path):
        assert _run(tmp_path, "window", "--n", "10", "--w", "0.04") == 2


@pytest.mark.integration
class TestMseCommand:
    """Test the mse subcommand"""

    ARGS = ("mse", "--n", "64", "--k-list", "2,4", "--trials", "10", "--seed", "3", "--grid", "256")

    def test_outputs(self, tmp_path):
        assert _run(tmp_path, *self.ARGS) == 0
        sweep = pd.read_csv(tmp_path / "mse_sweep.csv")
        assert sweep["K"].tolist() == [2, 4]
        assert sweep["W"].tolist() == pytest.approx([2 / 128, 4 / 128])
        report = pd.read_csv(tmp_path / "mse_report_N64_K4.csv")
        assert list(report.columns) == ["xi", "true_S", "mean_est", "bias", "var", "mse"]
        assert len(report) == 256

    def test_export_paths(self, tmp_path):
        assert _run(tmp_path, *self.ARGS, "--export-paths", "3") == 0
        paths = pd.read_csv(tmp_path / "paths_N64.csv")
        assert list(paths.columns) == ["trial", "t", "re", "im"]
        assert paths["trial"].unique().tolist() == [0, 1, 2]
        assert len(paths) == 3 * 64
        assert paths["im"].eq(0.0).all()
        spectrum = json.loads((tmp_path / "spectrum.json").read_text(encoding="utf-8"))
        assert spectrum["kind"] == "smooth_cosine"

    def test_odd_grid_rejected(self, tmp_path):
        assert _run(tmp_path, "mse", "--n", "64", "--k", "4", "--trials", "10", "--grid", "257") == 2
        assert not (tmp_path / "mse_sweep.csv").exists()

    def test_one_trial_rejected(self, tmp_path):
        assert _run(tmp_path, "mse", "--n", "64", "--k", "4", "--trials", "1") == 2

    def test_byte_identical_across_thread_counts(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLEPIAN_MTM_TRIAL_BLOCK", "4")
        outputs = []
        for threads in ("1", "4"):
            monkeypatch.setenv("SLEPIAN_MTM_THREADS", threads)
            get_settings.cache_clear()
            out = tmp_path / f"threads_{threads}"
            assert _run(out, *self.ARGS) == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert outputs[0] == outputs[1]

    def test_inline_spectrum(self, tmp_path):
        assert _run(tmp_path, *self.ARGS, "--spectrum", '{"kind": "white", "level": 2.0}') == 0
        report = pd.read_csv(tmp_path / "mse_report_N64_K2.csv")
        assert report["true_S"].eq(2.0).all()

    def test_spectrum_file(self, tmp_path):
        spectrum = tmp_path / "spectrum.json"
        spectrum.write_text(json.dumps({"kind": "band_mixture", "W": 0.1, "bands": [1]}))
        assert _run(tmp_path, *self.ARGS, "--spectrum", str(spectrum)) == 0

    def test_invalid_spectrum_json(self, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            _run(tmp_path, *self.ARGS, "--spectrum", "{not json")
        assert exc_info.value.code == 2

    def test_negative_spectrum(self, tmp_path):
        assert _run(tmp_path, *self.ARGS, "--spectrum", '{"kind": "smooth_cosine", "coeffs": [1, 2]}') == 2


@pytest.mark.integration
class TestCsCommand:
    """Test the cs subcommand"""

    def test_analytic_only(self, tmp_path):
        assert _run(tmp_path, "cs", "--n", "64", "--w", "0.1", "--bands", "0,3") == 0
        text = (tmp_path / "cs_report.csv").read_text(encoding="utf-8")
        header, row = text.splitlines()
        assert header == "N,W,K,L,analytic,mc,mc_se,bound"
        fields = row.split(",")
        assert fields[5] == "" and fields[6] == ""
        assert fields[:4] == ["64", "0.10000000000000001", "12", "2"]

    def test_monte_carlo(self, tmp_path):
        assert _run(tmp_path, "cs", "--n", "64", "--w", "0.1", "--bands", "0,3", "--trials", "50", "--seed", "1") == 0
        frame = pd.read_csv(tmp_path / "cs_report.csv")
        assert frame.loc[0, "mc_se"] > 0

    def test_export_dictionary(self, tmp_path):
        assert _run(tmp_path, "cs", "--n", "64", "--w", "0.1", "--bands", "0,3", "--export-dictionary") == 0
        atoms = pd.read_csv(tmp_path / "dictionary_N64.csv")
        assert list(atoms.columns) == ["col", "k", "j", "t", "re", "im"]
        assert atoms["col"].nunique() == 2 * 12
        assert sorted(atoms["j"].unique()) == [0, 3]
        assert len(atoms) == 2 * 12 * 64
        norms = (atoms["re"] ** 2 + atoms["im"] ** 2).groupby(atoms["col"]).sum()
        assert norms.to_numpy() == pytest.approx(1.0, abs=1e-10)

    def test_band_out_of_range(self, tmp_path):
        assert _run(tmp_path, "cs", "--n", "64", "--w", "0.1", "--bands", "5") == 2

    def test_one_trial_rejected(self, tmp_path):
        assert _run(tmp_path, "cs", "--n", "64", "--w", "0.1", "--trials", "1") == 2


@pytest.mark.integration
class TestConfiguration:
    """Test --config files, flag precedence and global options"""

    def test_flags_override_config(self, tmp_path):
        config = tmp_path / "mse.json"
        config.write_text(json.dumps({"subcommand": "mse", "n": 64, "k_list": [2], "trials": 4, "grid": 256}))
        assert _run(tmp_path, "mse", "--config", str(config), "--trials", "6") == 0
        sweep = pd.read_csv(tmp_path / "mse_sweep.csv")
        assert sweep["trials"].tolist() == [6]
        assert sweep["K"].tolist() == [2]

    def test_load_config_merges(self, tmp_path):
        config = tmp_path / "cs.json"
        config.write_text(json.dumps({"n": 64, "w": 0.1, "bands": [0, 2]}))
        args = build_parser().parse_args(["cs", "--config", str(config), "--n", "128"])
        merged = load_config(args)
        assert merged.n == 128 and merged.bands == [0, 2] and merged.subcommand == "cs"

    def test_config_for_other_subcommand(self, tmp_path):
        config = tmp_path / "window.json"
        config.write_text(json.dumps({"subcommand": "window", "n": 64, "w": 0.1}))
        assert _run(tmp_path, "dpss", "--config", str(config)) == 2

    def test_missing_config_file(self, tmp_path):
        assert _run(tmp_path, "dpss", "--config", str(tmp_path / "missing.json")) == 2

    def test_config_not_an_object(self, tmp_path):
        config = tmp_path / "list.json"
        config.write_text("[1, 2]")
        assert _run(tmp_path, "dpss", "--config", str(config)) == 2

    def test_invalid_log_level(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLEPIAN_MTM_LOG_LEVEL", "LOUD")
        assert _run(tmp_path, "dpss", "--n", "8", "--w", "0.25") == 2

    def test_log_level_flag(self, tmp_path):
        assert main(["--log-level", "debug", "dpss", "--n", "8", "--w", "0.25", "--out", str(tmp_path)]) == 0

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["plot"])
        assert exc_info.value.code == 2

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert "slepian-mtm" in capsys.readouterr().out
