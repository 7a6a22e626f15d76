"""Schmidt analysis: decomposition, time-bin closed form, fits, dimensionality."""

import math

import numpy as np
import pytest

from bfcsim import (
    DEFAULT_SOURCE,
    FilterSpec,
    bin_counts,
    dimensionality_report,
    dip_visibility_closed_form,
    ideal_jsi,
    jsa_from_jsi,
    scan_correlation_matrix,
    schmidt_decompose,
    time_bin_eigenvalues,
    time_bin_spectrum_from_visibilities,
    window_limited_n_max,
)
from bfcsim.schmidt import SchmidtSpectrum, fit_decay_parameter, ideal_frequency_spectrum


def gram_eigenvalues(matrix):
    """Independent oracle: normalized eigenvalues of the Gram matrix."""
    a = np.asarray(matrix, dtype=float)
    gram = a.T @ a
    w = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    lam = np.sort(w / w.sum())[::-1]
    return lam


class TestJsaFromJsi:
    def test_point_mass(self):
        m = np.zeros((3, 3))
        m[1, 2] = 0.7
        amp = jsa_from_jsi(m)
        assert amp[1, 2] == pytest.approx(1.0, rel=1e-12)
        assert np.count_nonzero(amp) == 1

    def test_uniform_two_by_two(self):
        amp = jsa_from_jsi(np.full((2, 2), 0.25))
        assert np.allclose(amp, 0.5, atol=1e-12)

    def test_entry_ratios_are_sqrt(self, comb_45):
        jsi = ideal_jsi(comb_45)
        amp = jsa_from_jsi(jsi)
        n = jsi.n_max
        got = amp[2 + n, n - 2] / amp[n, n]
        want = math.sqrt(jsi.value_at(2, -2) / jsi.value_at(0, 0))
        assert got == pytest.approx(want, rel=1e-12)

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            jsa_from_jsi(np.zeros((4, 4)))


class TestSchmidtDecompose:
    @pytest.mark.parametrize("d", [2, 5, 19])
    def test_uniform_diagonal_gives_k_equals_d(self, d):
        spec = schmidt_decompose(np.eye(d) / math.sqrt(d))
        assert spec.k_number == pytest.approx(d, abs=1e-10)

    def test_participation_ratio_by_hand(self):
        amp = np.diag(np.sqrt([0.5, 0.3, 0.2]))
        spec = schmidt_decompose(amp)
        assert np.allclose(spec.eigenvalues, [0.5, 0.3, 0.2], atol=1e-12)
        assert spec.k_number == pytest.approx(1.0 / 0.38, rel=1e-12)

    def test_rank_one_is_separable(self):
        amp = np.outer([1.0, 2.0, 3.0], [2.0, 1.0, 1.0])
        assert schmidt_decompose(amp).k_number == pytest.approx(1.0, abs=1e-12)

    def test_scaling_and_permutation_invariance(self):
        rng = np.random.default_rng(5)
        a = rng.random((12, 12))
        k = schmidt_decompose(a).k_number
        assert schmidt_decompose(17.3 * a).k_number == pytest.approx(k, rel=1e-12)
        perm = rng.permutation(12)
        assert schmidt_decompose(a[perm][:, perm]).k_number == pytest.approx(k, rel=1e-12)

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            schmidt_decompose(np.zeros((5, 5)))

    def test_matches_gram_oracle_random_50(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            a = rng.random((50, 50))
            spec = schmidt_decompose(a)
            assert np.max(np.abs(spec.eigenvalues - gram_eigenvalues(a))) < 1e-10

    def test_matches_gram_oracle_301(self, comb_5):
        # production-size matrix: the 5 GHz comb's amplitude is 293x293
        amp = jsa_from_jsi(ideal_jsi(comb_5))
        spec = schmidt_decompose(amp)
        assert np.max(np.abs(spec.eigenvalues - gram_eigenvalues(amp))) < 1e-10
        rng = np.random.default_rng(13)
        a = rng.random((301, 301))
        spec = schmidt_decompose(a)
        assert np.max(np.abs(spec.eigenvalues - gram_eigenvalues(a))) < 1e-10

    def test_ideal_jsi_eigenvalues_are_bin_weights(self, comb_45):
        spec = schmidt_decompose(jsa_from_jsi(ideal_jsi(comb_45)))
        expected = np.sort(comb_45.bin_weights)[::-1]
        assert np.max(np.abs(spec.eigenvalues - expected)) < 1e-10


class TestTimeBinEigenvalues:
    def test_single_bin(self, cavity_45):
        assert time_bin_eigenvalues(cavity_45, 0).k_number == 1.0

    def test_45ghz_schmidt_number(self, cavity_45):
        assert time_bin_eigenvalues(cavity_45, 30).k_number == pytest.approx(18.30, abs=0.05)

    def test_5ghz_schmidt_number(self, cavity_5):
        assert time_bin_eigenvalues(cavity_5, 3).k_number == pytest.approx(5.16, abs=0.05)

    def test_truncated_geometric_closed_form(self, cavity_15):
        q = math.exp(-2 * math.pi / cavity_15.finesse)
        for n_max in (1, 4, 9, 25):
            s1 = sum(q ** abs(n) for n in range(-n_max, n_max + 1))
            s2 = sum(q ** (2 * abs(n)) for n in range(-n_max, n_max + 1))
            got = time_bin_eigenvalues(cavity_15, n_max).k_number
            assert got == pytest.approx(s1 * s1 / s2, rel=1e-12)

    def test_infinite_bin_limit(self, cavity_45):
        q = math.exp(-2 * math.pi / cavity_45.finesse)
        limit = (1 + q) ** 3 / ((1 - q) * (1 + q**2))
        n_max = int(10 * cavity_45.finesse)
        assert time_bin_eigenvalues(cavity_45, n_max).k_number == pytest.approx(limit, abs=1e-6)

    def test_eigenvalues_carry_bin_labels(self, cavity_45):
        spec = time_bin_eigenvalues(cavity_45, 3)
        assert spec.bin_indices is not None
        assert spec.bin_indices[0] == 0  # largest eigenvalue is the central bin


class TestVisibilityFit:
    def test_closed_loop_recovers_theory(self, cavity_45):
        points = [(n, dip_visibility_closed_form(n, cavity_45)) for n in range(1, 31)]
        spec = time_bin_spectrum_from_visibilities(points, 30)
        assert spec.k_number == pytest.approx(18.30, abs=0.01)

    def test_fitted_rate_is_pi_over_finesse(self, cavity_45):
        points = [(n, dip_visibility_closed_form(n, cavity_45)) for n in (1, 5, 12, 30)]
        rate = fit_decay_parameter(points)
        assert rate == pytest.approx(math.pi / cavity_45.finesse, abs=1e-9)

    def test_noisy_visibilities_near_experimental_value(self, cavity_45):
        rng = np.random.default_rng(1)
        points = []
        for n in range(1, 31):
            v = dip_visibility_closed_form(n, cavity_45) + rng.normal(0.0, 0.01)
            points.append((n, float(np.clip(v, 1e-6, 1.0))))
        spec = time_bin_spectrum_from_visibilities(points, 30)
        assert spec.k_number == pytest.approx(18.02, abs=0.75)

    def test_no_decay_gives_uniform_spectrum(self):
        spec = time_bin_spectrum_from_visibilities([(0, 1.0), (1, 1.0)], 30)
        assert spec.k_number == pytest.approx(61.0, rel=1e-12)

    def test_degenerate_fit_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            time_bin_spectrum_from_visibilities([(0, 1.0), (0, 0.9)], 10)
        with pytest.raises(ValueError):
            time_bin_spectrum_from_visibilities([(1, 0.9)], 10)


class TestBinCounts:
    def test_45ghz_counts(self, cavity_45):
        counts = bin_counts(cavity_45, DEFAULT_SOURCE, 340.0)
        assert counts.n_freq_bins == pytest.approx(245.0 / 45.32, rel=1e-12)
        assert counts.n_freq_bins == pytest.approx(5.41, abs=0.01)
        assert counts.n_time_bins == pytest.approx(29.05, abs=0.01)

    def test_product_matches_between_similar_linewidths(self, cavity_45, cavity_15):
        c45 = bin_counts(cavity_45, DEFAULT_SOURCE, 340.0)
        c15 = bin_counts(cavity_15, DEFAULT_SOURCE, 340.0)
        p45 = c45.n_freq_bins * c45.n_time_bins
        p15 = c15.n_freq_bins * c15.n_time_bins
        assert abs(p15 / p45 - 1.0) <= 0.15

    def test_narrow_linewidth_triples_product(self, cavity_45, cavity_5):
        c45 = bin_counts(cavity_45, DEFAULT_SOURCE, 340.0)
        c5 = bin_counts(cavity_5, DEFAULT_SOURCE, 340.0)
        p45 = c45.n_freq_bins * c45.n_time_bins
        p5 = c5.n_freq_bins * c5.n_time_bins
        assert 2.5 <= p5 / p45 <= 4.0

    def test_window_limited_n_max(self, cavity_45, cavity_15, cavity_5):
        assert window_limited_n_max(cavity_45, 340.0) == 30
        assert window_limited_n_max(cavity_15, 340.0) == 10
        assert window_limited_n_max(cavity_5, 340.0) == 3


class TestDimensionality:
    def test_headline_648(self, cavity_45):
        counts = bin_counts(cavity_45, DEFAULT_SOURCE, 340.0)
        report = dimensionality_report(18.02, 4.31, counts)
        assert report.total_dimensionality == 648
        assert report.total_dimensionality // report.polarization_factor == 324

    def test_frequency_dimensionality(self, cavity_5):
        counts = bin_counts(cavity_5, DEFAULT_SOURCE, 340.0)
        report = dimensionality_report(5.16, 11.67, counts)
        assert report.freq_dimensionality == 121

    def test_polarization_only(self, cavity_45):
        counts = bin_counts(cavity_45, DEFAULT_SOURCE, 340.0)
        assert dimensionality_report(1.0, 1.0, counts).total_dimensionality == 2

    def test_rejects_subunit_k(self, cavity_45):
        counts = bin_counts(cavity_45, DEFAULT_SOURCE, 340.0)
        with pytest.raises(ValueError):
            dimensionality_report(0.5, 2.0, counts)


class TestProductAgreement:
    def test_schmidt_product_between_cavities(self, cavity_45, cavity_15, comb_45, comb_15):
        k45 = time_bin_eigenvalues(cavity_45, 30).k_number
        k15 = time_bin_eigenvalues(cavity_15, 10).k_number
        kf45 = ideal_frequency_spectrum(comb_45).k_number
        kf15 = ideal_frequency_spectrum(comb_15).k_number
        assert abs((k15 * kf15) / (k45 * kf45) - 1.0) <= 0.25

    def test_floor_degrades_schmidt_number(self, comb_45):
        delta = FilterSpec(fwhm_hz=0.0)
        k2 = schmidt_decompose(
            jsa_from_jsi(scan_correlation_matrix(comb_45, delta, delta, 2, 2.0))
        ).k_number
        k4 = schmidt_decompose(
            jsa_from_jsi(scan_correlation_matrix(comb_45, delta, delta, 2, 4.0))
        ).k_number
        assert k4 < k2


class TestSchmidtSpectrumType:
    def test_normalization_enforced(self):
        with pytest.raises(ValueError, match="sum to 1"):
            SchmidtSpectrum(np.array([0.6, 0.3]), k_number=2.0, basis="frequency")

    def test_k_consistency_enforced(self):
        with pytest.raises(ValueError, match="k_number"):
            SchmidtSpectrum(np.array([0.5, 0.5]), k_number=3.0, basis="frequency")

    def test_sorted_enforced(self):
        with pytest.raises(ValueError, match="descending"):
            SchmidtSpectrum(np.array([0.3, 0.7]), k_number=1.7241, basis="time")
