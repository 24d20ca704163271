"""Codebook construction, calibration, and quantization tests."""

import math

import numpy as np
import pytest

from helpers import (
    arctan_phase,
    bisect_root,
    conversion_crossings,
    differential_phase,
    ideal_book,
    wrap_pi_scalar,
)

from xris.codebook import (
    CalibrationError,
    Channel,
    CodebookConfigError,
    Scheme,
    build_codebook,
    calibrate_frequency,
    conversion_bandwidth,
    quantize_phase,
)
from xris.element import ElementSpec, Incidence, PinConfig

SPEC = ElementSpec()

# Regression values from the brute-force scan oracle at the default spec:
# 2001 samples over (f0, 2.2 f0) for the four-state book, and the PCR-max
# scan for the 1-bit book.
TWO_BIT_F_STAR = 14_176_000_000.0
ONE_BIT_F_STAR = 10_186_000_000.0


class TestBuildOneBit:
    def test_two_states_pi_apart_at_any_frequency(self):
        rng = np.random.default_rng(3)
        for f in rng.uniform(0.4, 2.8, 100) * SPEC.f0:
            book = build_codebook(Scheme.ONE_BIT_B5, SPEC, float(f), Incidence.EDGE)
            assert book.bits == 1
            assert len(book.states) == 2
            gap = wrap_pi_scalar(book.states[0].phase - book.states[1].phase)
            assert abs(abs(gap) - math.pi) < 1e-12

    def test_states_are_cross_pol_opposite_strips(self):
        book = build_codebook(Scheme.ONE_BIT_B5, SPEC, ONE_BIT_F_STAR, Incidence.EDGE)
        assert [s.label for s in book.states] == ["B5+", "B5-"]
        assert all(s.channel is Channel.CROSS_POL for s in book.states)
        assert book.states[0].config == PinConfig.from_string("1010")
        assert book.states[1].config == PinConfig.from_string("0101")

    def test_requires_edge_incidence(self):
        with pytest.raises(CodebookConfigError):
            build_codebook(Scheme.ONE_BIT_B5, SPEC, 1e10, Incidence.DIAGONAL)


class TestBuildTwoBit:
    def test_calibrated_book_spacing(self):
        book = build_codebook(Scheme.TWO_BIT_B5B6, SPEC, TWO_BIT_F_STAR, Incidence.EDGE)
        assert book.bits == 2
        assert len(book.states) == 4
        srt = np.sort(book.phases())
        ideal = srt[0] + np.arange(4) * math.pi / 2
        dev = np.max(np.abs((srt - ideal + math.pi) % (2 * math.pi) - math.pi))
        assert math.degrees(dev) <= 20.0

    def test_magnitudes_in_unit_interval(self):
        book = build_codebook(Scheme.TWO_BIT_B5B6, SPEC, TWO_BIT_F_STAR, Incidence.EDGE)
        mags = np.abs(book.coeffs())
        assert np.all(mags > 0.0) and np.all(mags <= 1.0)

    def test_phase_collision_raises(self):
        # far below both stub resonances the two converting phases coincide
        with pytest.raises(CalibrationError, match="calibrate_frequency"):
            build_codebook(Scheme.TWO_BIT_B5B6, SPEC, 0.3 * SPEC.f0, Incidence.EDGE)


class TestBuildMixed:
    def test_composition_and_channels(self):
        book = build_codebook(Scheme.TWO_BIT_MIXED, SPEC, TWO_BIT_F_STAR, Incidence.EDGE)
        assert [s.label for s in book.states] == ["B1", "B3", "B6+", "B6-"]
        assert [s.channel for s in book.states] == [
            Channel.CO_POL,
            Channel.CO_POL,
            Channel.CROSS_POL,
            Channel.CROSS_POL,
        ]
        assert book.channel_mixed
        assert len(set(np.round(book.phases(), 9))) == 4


class TestBuildCoPol:
    def test_four_resonant_states(self):
        f = 1.3 * SPEC.f0
        book = build_codebook(Scheme.CO_POL_2BIT, SPEC, f, Incidence.DIAGONAL)
        assert [s.label for s in book.states] == ["A1", "A2", "A3", "EXT"]
        assert all(s.channel is Channel.CO_POL for s in book.states)
        assert len(set(np.round(book.phases(), 9))) == 4
        # the extra-switch state has no four-arm diode word
        assert book.states[3].config is None
        # its phase comes from the ext_factor resonant length
        expected = arctan_phase(f, SPEC.f0 / SPEC.ext_factor, SPEC.q_factor) % (2 * math.pi)
        assert book.states[3].phase == pytest.approx(expected, abs=1e-12)

    def test_requires_diagonal_incidence(self):
        with pytest.raises(CodebookConfigError):
            build_codebook(Scheme.CO_POL_2BIT, SPEC, 1e10, Incidence.EDGE)


class TestBuildDualBand:
    def test_two_states_with_config_pairs(self):
        f1, f2 = ONE_BIT_F_STAR, 1.45 * SPEC.f0
        book = build_codebook(Scheme.DUAL_BAND_1BIT, SPEC, f1, Incidence.EDGE, f2=f2)
        assert book.bits == 1
        assert len(book.states) == 2
        assert book.freq2 == f2
        for state in book.states:
            assert isinstance(state.config, tuple) and len(state.config) == 2
            assert state.coeff2 is not None
        # each band keeps the exact pi gap of its mirror pair
        gap1 = wrap_pi_scalar(book.states[0].phase - book.states[1].phase)
        gap2 = wrap_pi_scalar(book.states[0].phase2 - book.states[1].phase2)
        assert abs(abs(gap1) - math.pi) < 1e-12
        assert abs(abs(gap2) - math.pi) < 1e-12

    def test_missing_second_frequency(self):
        with pytest.raises(CodebookConfigError):
            build_codebook(Scheme.DUAL_BAND_1BIT, SPEC, 1e10, Incidence.EDGE)


class TestBitReconfigurable:
    def test_subbook_shares_state_objects(self):
        book = build_codebook(
            Scheme.BIT_RECONFIGURABLE, SPEC, TWO_BIT_F_STAR, Incidence.EDGE
        )
        assert len(book.states) == 4
        sub = book.onebit_subbook()
        assert sub.bits == 1
        assert len(sub.states) == 2
        assert sub.states[0] is book.states[0]
        assert sub.states[1] is book.states[1]
        gap = wrap_pi_scalar(sub.states[0].phase - sub.states[1].phase)
        assert abs(abs(gap) - math.pi) < 1e-12

    def test_subbook_matches_directly_built_onebit(self):
        book = build_codebook(
            Scheme.BIT_RECONFIGURABLE, SPEC, TWO_BIT_F_STAR, Incidence.EDGE
        )
        direct = build_codebook(Scheme.ONE_BIT_B5, SPEC, TWO_BIT_F_STAR, Incidence.EDGE)
        sub = book.onebit_subbook()
        assert sub.states == direct.states


class TestCalibrateFrequency:
    def test_two_bit_regression(self):
        f_star = calibrate_frequency(
            Scheme.TWO_BIT_B5B6, SPEC, SPEC.f0, 2.2 * SPEC.f0, 2001
        )
        assert f_star == TWO_BIT_F_STAR
        book = build_codebook(Scheme.TWO_BIT_B5B6, SPEC, f_star, Incidence.EDGE)
        srt = np.sort(book.phases())
        ideal = srt[0] + np.arange(4) * math.pi / 2
        dev = np.max(np.abs((srt - ideal + math.pi) % (2 * math.pi) - math.pi))
        assert math.degrees(dev) < 20.0

    def test_two_bit_scan_is_true_argmin(self):
        # independent recomputation of the objective from the raw formulas
        freqs = np.linspace(SPEC.f0, 2.2 * SPEC.f0, 2001)

        def oracle_objective(f):
            g_long = np.exp(1j * arctan_phase(f, SPEC.f0, SPEC.q_factor))
            g_s5 = np.exp(1j * arctan_phase(f, SPEC.f0 / 0.45, SPEC.q_factor))
            g_s6 = np.exp(1j * arctan_phase(f, SPEC.f0 / 0.725, SPEC.q_factor))
            b5 = (g_long - g_s5) / 2.0
            b6 = (g_long - g_s6) / 2.0
            coeffs = np.array([b5, -b5, b6, -b6])
            if np.min(np.abs(coeffs)) < 0.3:
                return np.inf
            srt = np.sort(np.angle(coeffs) % (2 * math.pi))
            ideal = srt[0] + np.arange(4) * math.pi / 2
            return np.max(np.abs((srt - ideal + math.pi) % (2 * math.pi) - math.pi))

        objs = np.array([oracle_objective(float(f)) for f in freqs])
        assert freqs[int(np.argmin(objs))] == TWO_BIT_F_STAR

    def test_one_bit_regression_near_crossing(self):
        f_star = calibrate_frequency(
            Scheme.ONE_BIT_B5, SPEC, SPEC.f0, 2.2 * SPEC.f0, 2001
        )
        assert f_star == ONE_BIT_F_STAR
        crossing = bisect_root(
            lambda f: differential_phase(f, SPEC.f0, SPEC.q_factor, 1.0, 0.45) + math.pi,
            SPEC.f0,
            1.5 * SPEC.f0,
        )
        step = (2.2 * SPEC.f0 - SPEC.f0) / 2000
        assert abs(f_star - crossing) <= step

    def test_reproducible(self):
        a = calibrate_frequency(Scheme.TWO_BIT_B5B6, SPEC, SPEC.f0, 2.2 * SPEC.f0, 501)
        b = calibrate_frequency(Scheme.TWO_BIT_B5B6, SPEC, SPEC.f0, 2.2 * SPEC.f0, 501)
        assert a == b

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            calibrate_frequency(Scheme.TWO_BIT_B5B6, SPEC, 2e10, 1e10, 100)
        with pytest.raises(ValueError):
            calibrate_frequency(Scheme.TWO_BIT_B5B6, SPEC, 1e10, 2e10, 1)

    def test_no_usable_frequency(self):
        # far below resonance every converting state is nearly transparent
        with pytest.raises(CalibrationError):
            calibrate_frequency(
                Scheme.TWO_BIT_B5B6, SPEC, 0.05 * SPEC.f0, 0.15 * SPEC.f0, 51
            )


class TestQuantizePhase:
    def test_simple_nearest(self):
        book = ideal_book(1)
        idx, err = quantize_phase(math.radians(10.0), book)
        assert idx == 0
        assert err == pytest.approx(math.radians(10.0), abs=1e-12)

    def test_tie_breaks_to_lower_index(self):
        book = ideal_book(1)
        idx, err = quantize_phase(math.pi / 2, book)
        assert idx == 0
        assert err == pytest.approx(math.pi / 2, abs=1e-12)

    def test_tie_on_four_states(self):
        book = ideal_book(2)  # phases 0, 90, 180, 270 deg
        idx, err = quantize_phase(math.radians(135.0), book)
        assert idx == 1
        assert err == pytest.approx(math.radians(45.0), abs=1e-12)

    def test_brute_force_argmin_property(self):
        rng = np.random.default_rng(11)
        books = [
            ideal_book(1),
            ideal_book(2),
            build_codebook(Scheme.TWO_BIT_B5B6, SPEC, TWO_BIT_F_STAR, Incidence.EDGE),
        ]
        for book in books:
            phases = book.phases()
            srt = np.sort(phases)
            gaps = np.diff(np.concatenate([srt, [srt[0] + 2 * math.pi]]))
            half_max_gap = np.max(gaps) / 2.0
            for desired in rng.uniform(0.0, 2 * math.pi, 10_000):
                idx, err = quantize_phase(float(desired), book)
                dists = [abs(wrap_pi_scalar(desired - p)) for p in phases]
                best = min(range(len(dists)), key=lambda i: (dists[i], i))
                assert idx == best
                assert abs(err) <= half_max_gap + 1e-12

    def test_error_bound_for_onebit(self):
        book = ideal_book(1)
        rng = np.random.default_rng(5)
        for desired in rng.uniform(0, 2 * math.pi, 1000):
            _, err = quantize_phase(float(desired), book)
            assert abs(err) <= math.pi / 2 + 1e-12


class TestConversionBandwidth:
    def test_band_contains_a_crossing(self):
        band = conversion_bandwidth(SPEC, 0.9, 0.8 * SPEC.f0, 2.4 * SPEC.f0, 4001)
        assert band == (21_256_000_000.0, 22_772_000_000.0)
        crossings = conversion_crossings(
            SPEC.f0, SPEC.q_factor, 1.0, 0.45, 0.8 * SPEC.f0, 2.4 * SPEC.f0
        )
        assert any(band[0] < c < band[1] for c in crossings)

    def test_band_collapses_at_extreme_threshold(self):
        # unit conversion happens only exactly at the differential-pi
        # frequencies, which the uniform scan does not hit
        band = conversion_bandwidth(SPEC, 1.0 - 1e-15, 0.8 * SPEC.f0, 2.4 * SPEC.f0, 4001)
        assert band is None

    def test_tiny_threshold_covers_scan(self):
        f_lo, f_hi = 0.8 * SPEC.f0, 2.4 * SPEC.f0
        band = conversion_bandwidth(SPEC, 1e-4, f_lo, f_hi, 1001)
        assert band == (f_lo, f_hi)

    def test_narrower_threshold_narrows_band(self):
        wide = conversion_bandwidth(SPEC, 0.9, 0.8 * SPEC.f0, 2.4 * SPEC.f0, 4001)
        tight = conversion_bandwidth(SPEC, 0.999, 0.8 * SPEC.f0, 2.4 * SPEC.f0, 4001)
        assert tight is not None
        assert tight[1] - tight[0] < wide[1] - wide[0]

    @pytest.mark.parametrize("threshold", [0.0, 1.0, -0.5, 2.0])
    def test_threshold_domain(self, threshold):
        with pytest.raises(ValueError):
            conversion_bandwidth(SPEC, threshold, 1e9, 2e9, 100)


class TestSerialization:
    def test_codebook_json_roundtrip(self):
        from xris.artifacts import codebook_from_json_dict, codebook_to_json_dict

        books = [
            build_codebook(Scheme.ONE_BIT_B5, SPEC, ONE_BIT_F_STAR, Incidence.EDGE),
            build_codebook(Scheme.TWO_BIT_B5B6, SPEC, TWO_BIT_F_STAR, Incidence.EDGE),
            build_codebook(Scheme.TWO_BIT_MIXED, SPEC, TWO_BIT_F_STAR, Incidence.EDGE),
            build_codebook(Scheme.CO_POL_2BIT, SPEC, 1.3 * SPEC.f0, Incidence.DIAGONAL),
            build_codebook(
                Scheme.DUAL_BAND_1BIT, SPEC, ONE_BIT_F_STAR, Incidence.EDGE, f2=1.45 * SPEC.f0
            ),
        ]
        for book in books:
            data = codebook_to_json_dict(book)
            assert codebook_from_json_dict(data) == book

    def test_state_count_matches_bits(self):
        for scheme, f, inc, f2 in [
            (Scheme.ONE_BIT_B5, ONE_BIT_F_STAR, Incidence.EDGE, None),
            (Scheme.TWO_BIT_B5B6, TWO_BIT_F_STAR, Incidence.EDGE, None),
            (Scheme.TWO_BIT_MIXED, TWO_BIT_F_STAR, Incidence.EDGE, None),
            (Scheme.CO_POL_2BIT, 1.3 * SPEC.f0, Incidence.DIAGONAL, None),
        ]:
            book = build_codebook(scheme, SPEC, f, inc, f2=f2)
            assert len(book.states) == 2**book.bits
