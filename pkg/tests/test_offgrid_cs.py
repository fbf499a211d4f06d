"""
Tests for modulated Slepian dictionaries and multi-band residuals
"""
import math

import numpy as np
import pytest

from slepian_mtm.errors import ParameterDomainError, PreconditionError
from slepian_mtm.offgrid_cs import (
    analytic_relative_residual,
    build_dictionary,
    cs_experiment,
    cs_sweep,
    monte_carlo_residual,
    project,
    residual_bound,
    single_band_residual,
    span_basis,
)
from slepian_mtm.stochastic import covariance_from_spectrum, multiband_spec


@pytest.mark.unit
class TestDictionary:
    """Test construction and indexing of modulated DPSS atoms"""

    def test_shape_and_order(self, basis_64):
        d = build_dictionary(64, 0.1, 4, [0, 3], basis=basis_64)
        assert d.atoms.shape == (64, 8)
        assert d.M_bands == 5
        assert d.column_of(1, 3) == 5
        assert d.index[:4] == ((0, 0), (1, 0), (2, 0), (3, 0))

    def test_band_zero_is_the_basis(self, basis_64):
        d = build_dictionary(64, 0.1, 6, [0], basis=basis_64)
        np.testing.assert_allclose(d.atoms, basis_64.sequences[:, :6])

    def test_modulation(self, basis_64):
        d = build_dictionary(64, 0.1, 3, [2], basis=basis_64)
        t = np.arange(64)
        np.testing.assert_allclose(d.atoms[:, 1], np.exp(2j * np.pi * 0.4 * t) * basis_64.sequences[:, 1])
        flipped = build_dictionary(64, 0.1, 3, [2], basis=basis_64, sign=-1)
        np.testing.assert_allclose(flipped.atoms, d.atoms.conj())

    def test_atoms_orthonormal_within_band(self, basis_64):
        d = build_dictionary(64, 0.1, 12, [4], basis=basis_64)
        np.testing.assert_allclose(d.atoms.conj().T @ d.atoms, np.eye(12), atol=1e-10)

    def test_atoms_read_only(self, basis_64):
        d = build_dictionary(64, 0.1, 2, [0], basis=basis_64)
        with pytest.raises(ValueError):
            d.atoms[0, 0] = 0.0

    def test_missing_atom(self, basis_64):
        d = build_dictionary(64, 0.1, 2, [0], basis=basis_64)
        with pytest.raises(PreconditionError):
            d.column_of(0, 1)

    @pytest.mark.parametrize("bands,M_bands", [([5], None), ([1, 1], None), ([0], 6), ([0], 0)])
    def test_invalid_bands(self, basis_64, bands, M_bands):
        with pytest.raises(ParameterDomainError):
            build_dictionary(64, 0.1, 2, bands, M_bands, basis=basis_64)

    def test_invalid_sign(self, basis_64):
        with pytest.raises(ParameterDomainError):
            build_dictionary(64, 0.1, 2, [0], basis=basis_64, sign=0)

    def test_basis_mismatch(self, basis_64):
        with pytest.raises(PreconditionError):
            build_dictionary(128, 0.1, 2, [0], basis=basis_64)

    def test_empty_dictionary(self):
        d = build_dictionary(32, 0.1, 2, [])
        assert d.columns == 0
        assert span_basis(d).shape == (32, 0)


@pytest.mark.unit
class TestProjection:
    """Test projections onto the dictionary span"""

    def test_vector_in_span(self, basis_64):
        d = build_dictionary(64, 0.1, 5, [0, 2], basis=basis_64)
        x = d.atoms @ np.arange(1.0, 11.0)
        result = project(x, d)
        assert result.rank == 10
        assert result.residual_norm == pytest.approx(0.0, abs=1e-10)
        np.testing.assert_allclose(result.projected, x, atol=1e-10)

    def test_residual_is_orthogonal(self, basis_64):
        d = build_dictionary(64, 0.1, 5, [1], basis=basis_64)
        x = np.random.default_rng(0).standard_normal(64)
        result = project(x, d)
        np.testing.assert_allclose(d.atoms.conj().T @ result.residual, 0.0, atol=1e-10)
        assert result.residual_norm == pytest.approx(np.linalg.norm(result.residual))

    @pytest.mark.parametrize("bands", [[0], [1, 3], [0, 2, 4]])
    def test_pythagoras(self, basis_64, bands):
        """||x||^2 = ||Px||^2 + ||x - Px||^2 and P(Px) = Px on random complex x"""
        d = build_dictionary(64, 0.1, 12, bands, basis=basis_64)
        rng = np.random.default_rng(len(bands))
        x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        result = project(x, d)
        energy = np.linalg.norm(x) ** 2
        parts = np.linalg.norm(result.projected) ** 2 + result.residual_norm ** 2
        assert parts == pytest.approx(energy, abs=1e-8)
        np.testing.assert_allclose(project(result.projected, d).projected, result.projected, atol=1e-8)

    def test_rank_deficient_dictionary(self, basis_64):
        """Full bands of all 64 sequences span C^64 once"""
        d = build_dictionary(64, 0.1, 64, [0, 1], basis=basis_64)
        result = project(np.ones(64), d)
        assert result.rank == 64

    def test_shape_mismatch(self, basis_64):
        d = build_dictionary(64, 0.1, 2, [0], basis=basis_64)
        with pytest.raises(PreconditionError):
            project(np.ones(32), d)

    def test_empty_dictionary(self):
        with pytest.raises(PreconditionError):
            project(np.ones(32), build_dictionary(32, 0.1, 2, []))


@pytest.mark.unit
class TestAnalyticResidual:
    """Test trace((Id - P) R) / trace(R)"""

    def test_single_band_closed_form(self, basis_128):
        """Centered band: sum_{k>=K} lambda_k / (2NW)"""
        report = cs_experiment(128, 0.1, None, [0], 0, 0)
        expected = single_band_residual(basis_128.eigenvalues, 128, 0.1, 25)
        assert report.analytic == pytest.approx(expected, abs=1e-10)

    def test_modulation_invariance(self):
        a = cs_experiment(128, 0.1, None, [0], 0, 0)
        b = cs_experiment(128, 0.1, None, [3], 0, 0)
        assert b.analytic == pytest.approx(a.analytic, abs=1e-10)

    def test_wrong_modulation_misses_the_band(self, basis_128):
        cov = covariance_from_spectrum(multiband_spec(0.1, 5, [1]), 128)
        matched = build_dictionary(128, 0.1, 25, [1], basis=basis_128)
        flipped = build_dictionary(128, 0.1, 25, [1], basis=basis_128, sign=-1)
        assert analytic_relative_residual(cov, matched) < 0.1
        assert analytic_relative_residual(cov, flipped) > 0.95

    def test_monotone_in_k(self, basis_128):
        cov = covariance_from_spectrum(multiband_spec(0.1, 5, [0, 3]), 128)
        residuals = [
            analytic_relative_residual(cov, build_dictionary(128, 0.1, K, [0, 3], basis=basis_128))
            for K in (5, 10, 15, 20, 25)
        ]
        assert all(r2 <= r1 + 1e-12 for r1, r2 in zip(residuals, residuals[1:]))

    def test_below_eigenvalue_bound(self):
        for bands in ([0], [0, 3], [1, 2, 4]):
            report = cs_experiment(128, 0.1, None, bands, 0, 0)
            assert report.analytic <= report.residual_bound + 1e-12
            assert report.analytic <= report.bound

    def test_scale_invariance(self, basis_128):
        d = build_dictionary(128, 0.1, 25, [0, 3], basis=basis_128)
        averaged = covariance_from_spectrum(multiband_spec(0.1, 5, [0, 3]), 128)
        summed = covariance_from_spectrum(multiband_spec(0.1, 5, [0, 3], averaging=False), 128)
        assert analytic_relative_residual(summed, d) == pytest.approx(
            analytic_relative_residual(averaged, d), abs=1e-12
        )

    def test_empty_dictionary_keeps_everything(self):
        cov = covariance_from_spectrum(multiband_spec(0.1, 5, [0]), 32)
        assert analytic_relative_residual(cov, build_dictionary(32, 0.1, 2, [])) == 1.0

    def test_dimension_mismatch(self, basis_64):
        cov = covariance_from_spectrum(multiband_spec(0.1, 5, [0]), 32)
        with pytest.raises(PreconditionError):
            analytic_relative_residual(cov, build_dictionary(64, 0.1, 2, [0], basis=basis_64))

    def test_residual_bound(self):
        assert residual_bound(np.array([1.0, 0.5, 0.25]), 1, 2) == pytest.approx(1.5)
        with pytest.raises(PreconditionError):
            residual_bound(np.ones(3), 4, 1)


@pytest.mark.unit
class TestExperiment:
    """Test the cs experiment driver"""

    def test_report_fields(self):
        report = cs_experiment(64, 0.1, None, [0, 3], 0, 0)
        assert (report.N, report.K, report.L, report.M_bands) == (64, 12, 2, 5)
        assert report.occupied == [0, 3]
        assert report.mc is None and report.mc_se is None
        assert report.bound == pytest.approx(2 * math.log(64) / 12)
        assert 0.0 <= report.analytic <= 1.0

    def test_k_above_critical(self):
        with pytest.raises(ParameterDomainError):
            cs_experiment(64, 0.1, None, [0], 0, 0, K=13)

    def test_one_trial_rejected(self):
        with pytest.raises(PreconditionError):
            cs_experiment(64, 0.1, None, [0], 1, 0)

    def test_monte_carlo_agrees(self):
        report = cs_experiment(64, 0.1, None, [0, 3], 400, 5)
        assert report.mc_se > 0
        assert abs(report.mc - report.analytic) <= 5 * report.mc_se

    def test_monte_carlo_needs_two_trials(self, basis_64):
        cov = covariance_from_spectrum(multiband_spec(0.1, 5, [0]), 64)
        with pytest.raises(PreconditionError):
            monte_carlo_residual(cov, build_dictionary(64, 0.1, 12, [0], basis=basis_64), 1, 0)

    def test_monte_carlo_thread_independent(self, basis_64, monkeypatch):
        monkeypatch.setenv("SLEPIAN_MTM_TRIAL_BLOCK", "8")
        cov = covariance_from_spectrum(multiband_spec(0.1, 5, [2]), 64)
        d = build_dictionary(64, 0.1, 12, [2], basis=basis_64)
        assert monte_carlo_residual(cov, d, 50, 3, threads=1) == monte_carlo_residual(cov, d, 50, 3, threads=4)

    def test_sweep(self):
        reports = cs_sweep([32, 64], 0.1, None, [0], 0, 0)
        assert [r.N for r in reports] == [32, 64]
        assert [r.K for r in reports] == [6, 12]


@pytest.mark.slow
class TestResidualScaling:
    """Residual against L log N / K at realistic sizes"""

    def test_monte_carlo_at_256(self):
        report = cs_experiment(256, 0.1, None, [0, 3], 2000, 13)
        assert abs(report.mc - report.analytic) <= 3 * report.mc_se

    def test_residual_tracks_log_n_over_k(self):
        reports = cs_sweep([128, 256, 512, 1024], 0.1, None, [0, 3], 0, 0)
        ratios = np.array([r.analytic / r.bound for r in reports])
        assert np.all(ratios <= 1.0)
        assert ratios.max() / ratios.min() <= 4
