"""Joint spectral intensity: ideal structure, filter smearing, accidental floor."""

import math

import numpy as np
import pytest

from bfcsim import (
    AccidentalModel,
    FilterSpec,
    Jsi,
    SourceSpec,
    accidental_floor,
    apply_filters,
    build_comb,
    crosstalk_db,
    filter_bandwidth_hz,
    ideal_jsi,
    scan_correlation_matrix,
)
from bfcsim.jsi import filter_transmission


@pytest.fixture(scope="module")
def flat_comb(cavity_45):
    # Envelope so broad the five bins are uniform to machine precision.
    return build_comb(cavity_45, SourceSpec(phase_matching_fwhm_hz=1e15), n_max=2)


DELTA = FilterSpec(fwhm_hz=0.0)


class TestIdealJsi:
    def test_uniform_three_bin_antidiagonal(self, cavity_45):
        comb = build_comb(cavity_45, SourceSpec(phase_matching_fwhm_hz=1e15), 1)
        jsi = ideal_jsi(comb)
        for n in (-1, 0, 1):
            assert jsi.value_at(n, -n) == pytest.approx(1.0 / 3.0, abs=1e-8)

    def test_gaussian_envelope_ratio(self, cavity_45):
        src = SourceSpec(envelope_shape="gaussian")
        jsi = ideal_jsi(build_comb(cavity_45, src))
        expected = math.exp(-4 * math.log(2) * (2 * 45.32) ** 2 / 245.0**2)
        assert expected == pytest.approx(0.684, abs=1e-3)
        assert jsi.value_at(2, -2) / jsi.value_at(0, 0) == pytest.approx(expected, rel=1e-12)

    def test_off_anticorrelation_exactly_zero(self, comb_45):
        jsi = ideal_jsi(comb_45)
        n = jsi.n_max
        for n_s in range(-n, n + 1):
            for n_i in range(-n, n + 1):
                if n_s + n_i != 0:
                    assert jsi.value_at(n_s, n_i) == 0.0

    def test_normalized(self, comb_15):
        assert ideal_jsi(comb_15).values.sum() == pytest.approx(1.0, abs=1e-12)


class TestFilterTransmission:
    def test_one_bin_leak_100pm_on_5ghz(self):
        fwhm = filter_bandwidth_hz(100.0)
        filt = FilterSpec(fwhm_hz=fwhm)
        expected = math.exp(-4 * math.log(2) * (5.03e9 / fwhm) ** 2)
        assert expected == pytest.approx(0.79, abs=5e-3)
        assert filter_transmission(filt, 1.0, 5.03e9) == pytest.approx(expected, rel=1e-12)

    def test_one_bin_leak_300pm_on_45ghz(self):
        # Transmission evaluated at one bin spacing of the 45.32 GHz comb.
        fwhm = filter_bandwidth_hz(300.0)
        filt = FilterSpec(fwhm_hz=fwhm)
        expected = math.exp(-4 * math.log(2) * (45.32e9 / fwhm) ** 2)
        assert filter_transmission(filt, 1.0, 45.32e9) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.121, abs=2e-3)

    def test_delta_filter_is_indicator(self):
        assert filter_transmission(DELTA, 0.0, 45.32e9) == 1.0
        assert filter_transmission(DELTA, 1.0, 45.32e9) == 0.0

    def test_lorentzian_half_maximum(self):
        filt = FilterSpec(fwhm_hz=10e9, shape="lorentzian")
        assert filter_transmission(filt, 0.5, 10e9) == pytest.approx(0.5, rel=1e-12)

    def test_center_offset_shifts_peak(self):
        filt = FilterSpec(fwhm_hz=10e9, center_offset_bins=1.0)
        assert filter_transmission(filt, 1.0, 45.32e9) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            FilterSpec(fwhm_hz=-1.0)
        with pytest.raises(ValueError):
            FilterSpec(shape="boxcar")


class TestApplyFilters:
    def test_delta_filters_sample_matrix(self, comb_45):
        jsi = ideal_jsi(comb_45)
        got = apply_filters(jsi, comb_45, DELTA, DELTA, 2, -2)
        assert got == jsi.value_at(2, -2)

    def test_delta_filters_mismatch_is_zero(self, comb_45):
        jsi = ideal_jsi(comb_45)
        assert apply_filters(jsi, comb_45, DELTA, DELTA, 1, 0) == 0.0

    def test_finite_filters_suppress_mismatch(self, comb_45):
        filt = FilterSpec(fwhm_hz=filter_bandwidth_hz(300.0))
        jsi = ideal_jsi(comb_45)
        matched = apply_filters(jsi, comb_45, filt, filt, 1, -1)
        mismatched = apply_filters(jsi, comb_45, filt, filt, 1, 0)
        assert 0.0 < mismatched < matched

    def test_out_of_range_target(self, comb_45):
        jsi = ideal_jsi(comb_45)
        with pytest.raises(ValueError):
            apply_filters(jsi, comb_45, DELTA, DELTA, comb_45.n_max + 1, 0)

    def test_smearing_conserves_weight_for_normalized_filters(self, cavity_45):
        # Bin-normalized transmission: summing the filtered signal over a
        # target grid that covers the filter support recovers each inner
        # cell's weight.
        comb = build_comb(cavity_45, SourceSpec(envelope_shape="gaussian"), n_max=10)
        filt = FilterSpec(fwhm_hz=filter_bandwidth_hz(300.0))
        offsets = np.arange(-40, 41)
        norm = float(np.sum(filter_transmission(filt, offsets, cavity_45.fsr_hz)))
        targets = range(-10, 11)
        # weight recovered for cells at least 4 bins from the scan edge
        for m in (-6, -3, 0, 2, 6):
            sig_mass = sum(
                float(filter_transmission(filt, m - a, cavity_45.fsr_hz)) for a in targets
            )
            idl_mass = sum(
                float(filter_transmission(filt, -m - b, cavity_45.fsr_hz)) for b in targets
            )
            recovered = comb.weight(m) * (sig_mass / norm) * (idl_mass / norm)
            assert recovered == pytest.approx(comb.weight(m), abs=1e-9)


class TestAccidentalModel:
    def test_calibration_anchors(self):
        assert accidental_floor(0.0) == 0.0
        assert accidental_floor(2.0) == pytest.approx(10 ** (-11.71 / 10), rel=1e-12)
        assert accidental_floor(4.0) == pytest.approx(10 ** (-6.31 / 10), rel=1e-12)
        assert accidental_floor(2.0) == pytest.approx(0.0674, abs=1e-4)
        assert accidental_floor(4.0) == pytest.approx(0.2339, abs=1e-4)

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            accidental_floor(-1.0)

    def test_custom_calibration(self):
        model = AccidentalModel.calibrate((1.0, 0.1), (2.0, 0.3))
        assert model.floor_fraction(1.0) == pytest.approx(0.1, rel=1e-12)
        assert model.floor_fraction(2.0) == pytest.approx(0.3, rel=1e-12)


class TestCrosstalk:
    def test_ideal_matrix_has_none(self, comb_45):
        assert crosstalk_db(ideal_jsi(comb_45)) is None

    @pytest.mark.parametrize(
        "floor,expected_db", [(0.0674528027697922, -11.71), (0.23388372386593548, -6.31)]
    )
    def test_flat_diagonal_with_floor(self, floor, expected_db):
        size = 5
        values = np.full((size, size), floor)
        idx = np.arange(size)
        values[idx, idx[::-1]] = 1.0
        jsi = Jsi(n_max=2, values=values / values.sum(), normalized=True)
        assert crosstalk_db(jsi) == pytest.approx(expected_db, abs=1e-9)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            crosstalk_db(Jsi(n_max=1, values=np.zeros((3, 3))))

    def test_monotone_in_floor(self, flat_comb):
        levels = [
            crosstalk_db(scan_correlation_matrix(flat_comb, DELTA, DELTA, 2, pump_power_mw=p))
            for p in (0.5, 1.0, 2.0, 3.0, 4.0)
        ]
        assert all(a < b for a, b in zip(levels, levels[1:]))


class TestScanCorrelationMatrix:
    def test_calibration_closure_on_flat_comb(self, flat_comb):
        scan2 = scan_correlation_matrix(flat_comb, DELTA, DELTA, 2, pump_power_mw=2.0)
        scan4 = scan_correlation_matrix(flat_comb, DELTA, DELTA, 2, pump_power_mw=4.0)
        assert crosstalk_db(scan2) == pytest.approx(-11.71, abs=1e-9)
        assert crosstalk_db(scan4) == pytest.approx(-6.31, abs=1e-9)

    def test_45ghz_preset_crosstalk_bound(self, comb_45):
        # Delta-filter scan of the real preset reports the calibrated level.
        scan = scan_correlation_matrix(comb_45, DELTA, DELTA, 2, pump_power_mw=2.0)
        assert crosstalk_db(scan) <= -11.71 + 1e-9

    def test_4mw_crosstalk(self, comb_45):
        scan = scan_correlation_matrix(comb_45, DELTA, DELTA, 2, pump_power_mw=4.0)
        assert crosstalk_db(scan) == pytest.approx(-6.31, abs=0.1)

    def test_5ghz_19x19_diagonal_dominant(self, comb_5):
        filt = FilterSpec(fwhm_hz=filter_bandwidth_hz(100.0))
        scan = scan_correlation_matrix(comb_5, filt, filt, 9, pump_power_mw=2.0)
        assert scan.values.shape == (19, 19)
        size = 19
        for i in range(size):
            assert int(np.argmax(scan.values[i])) == size - 1 - i

    def test_negation_symmetry(self, comb_45):
        filt = FilterSpec(fwhm_hz=filter_bandwidth_hz(300.0))
        scan = scan_correlation_matrix(comb_45, filt, filt, 2, pump_power_mw=2.0)
        flipped = scan.values[::-1, ::-1]
        assert np.max(np.abs(scan.values - flipped)) < 1e-9

    def test_range_validation(self, comb_45):
        with pytest.raises(ValueError):
            scan_correlation_matrix(comb_45, DELTA, DELTA, comb_45.n_max + 1)

    def test_normalized_output(self, comb_45):
        scan = scan_correlation_matrix(comb_45, DELTA, DELTA, 2, pump_power_mw=2.0)
        assert scan.values.sum() == pytest.approx(1.0, abs=1e-12)


class TestJsiType:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            Jsi(n_max=1, values=np.zeros((3, 4)))

    def test_negative_entries_rejected(self):
        values = np.zeros((3, 3))
        values[0, 0] = -0.5
        with pytest.raises(ValueError):
            Jsi(n_max=1, values=values)

    def test_normalized_flag_checked(self):
        with pytest.raises(ValueError):
            Jsi(n_max=1, values=np.full((3, 3), 1.0), normalized=True)
