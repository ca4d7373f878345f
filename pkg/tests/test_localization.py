#
# Copyright (C) 2022 Intel Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""
Tests for the standing-wave profiles, peak finding and confinement verdicts in loopchi/localization.py
"""

import math

import numpy as np
import pytest

from loopchi.exceptions import DegenerateDenominator, InvalidParameters, ProfileHasGaps, RequiresMetastable
from loopchi.localization import (
    Confinement,
    HalfWavelength,
    LocalizationProfile,
    Peak,
    PhaseCase,
    StandingWaveParams,
    chi_pp_standing,
    classify_confinement,
    coincidence_detunings,
    find_peaks,
    periodic_grid,
    roots_r,
    scan_profile,
    solve_coincidence_detunings,
    standing_chi_pp,
    wrap_angle,
)
from loopchi.susceptibility import DEFAULT_CONVENTION, DriveParams, PhaseConvention

EQ9 = PhaseConvention.EQ9_CONSISTENT


def _coincident_root(params: DriveParams) -> float:
    return -(params.omega2**2) * math.cos(params.phi) / (4 * params.delta * params.omega1)


def _synthetic_profile(values: np.ndarray) -> LocalizationProfile:
    return LocalizationProfile(periodic_grid(len(values)), values, DriveParams(), DEFAULT_CONVENTION)


class TestAngles:
    @pytest.mark.parametrize(
        "angle, expected",
        [
            pytest.param(-math.pi, math.pi, id="minus-pi"),
            pytest.param(math.pi, math.pi, id="pi"),
            pytest.param(1.5 * math.pi, -0.5 * math.pi, id="three-halves-pi"),
            pytest.param(-2.5 * math.pi, -0.5 * math.pi, id="minus-five-halves-pi"),
        ],
    )
    def test_wrap_angle(self, angle: float, expected: float) -> None:
        assert wrap_angle(angle) == pytest.approx(expected)

    def test_periodic_grid_covers_one_period(self) -> None:
        grid = periodic_grid(8)
        assert len(grid) == 8
        assert grid[-1] == math.pi
        assert grid[0] == pytest.approx(-math.pi + math.pi / 4)


class TestStandingWave:
    def test_kx_range(self, fig4_params: DriveParams) -> None:
        with pytest.raises(InvalidParameters):
            StandingWaveParams(fig4_params, -math.pi)
        assert StandingWaveParams(fig4_params, math.pi / 2).effective_omega1 == pytest.approx(30.0)

    def test_scalar_matches_vectorized(self, fig4_params: DriveParams) -> None:
        kx = np.array([-2.0, -1.1, 0.3, 2.9])
        profile = standing_chi_pp(fig4_params, kx, EQ9)
        for x, value in zip(kx, profile):
            assert chi_pp_standing(StandingWaveParams(fig4_params, float(x)), EQ9) == pytest.approx(value, rel=1e-14)

    def test_degenerate_point(self) -> None:
        with pytest.raises(DegenerateDenominator):
            chi_pp_standing(StandingWaveParams(DriveParams(), 0.5))

    def test_scan_needs_enough_points(self, fig4_params: DriveParams) -> None:
        with pytest.raises(InvalidParameters):
            scan_profile(fig4_params, n_points=10)


class TestProfileSymmetries:
    N_POINTS = 10_000

    @pytest.fixture
    def kx(self) -> np.ndarray:
        return np.random.default_rng(9).uniform(-math.pi, math.pi, self.N_POINTS)

    @pytest.fixture(
        params=[
            pytest.param({}, id="fig4"),
            pytest.param({"gamma2": 0.5, "phi": 1.1}, id="decaying-a2"),
            pytest.param({"delta": -7.0, "phi": 2.0}, id="far-detuned"),
        ]
    )
    def base(self, request: pytest.FixtureRequest, fig4_params: DriveParams) -> DriveParams:
        return fig4_params.replace(**request.param)

    def test_mirror_about_quarter_wavelength(self, base: DriveParams, kx: np.ndarray) -> None:
        np.testing.assert_allclose(
            standing_chi_pp(base, math.pi - kx), standing_chi_pp(base, kx), rtol=1e-9, atol=1e-12
        )

    def test_detuning_and_position_parity(self, base: DriveParams, kx: np.ndarray) -> None:
        flipped = standing_chi_pp(base.replace(delta=-base.delta), -kx)
        np.testing.assert_allclose(flipped, standing_chi_pp(base, kx), rtol=1e-12, atol=1e-15)

    def test_phase_and_position_parity(self, base: DriveParams, kx: np.ndarray) -> None:
        flipped = standing_chi_pp(base.replace(phi=math.pi - base.phi), -kx)
        np.testing.assert_allclose(flipped, standing_chi_pp(base, kx), rtol=1e-9, atol=1e-12)

    def test_metastable_profile_is_nonnegative(self, fig4_params: DriveParams, kx: np.ndarray) -> None:
        for phi in (0.0, 1.0, math.pi / 2, math.pi):
            assert np.all(standing_chi_pp(fig4_params.replace(phi=phi), kx, EQ9) >= 0)


class TestFindPeaks:
    def test_single_tone(self) -> None:
        peaks = find_peaks(_synthetic_profile(1 + np.cos(periodic_grid(4096))))
        assert len(peaks) == 1
        assert peaks[0].position == pytest.approx(0.0, abs=1e-9)
        assert peaks[0].height == pytest.approx(2.0)
        assert peaks[0].fwhm == pytest.approx(math.pi, abs=1e-6)

    def test_peak_on_the_boundary_wraps(self) -> None:
        peaks = find_peaks(_synthetic_profile(1 - np.cos(periodic_grid(4096))))
        assert len(peaks) == 1
        assert abs(peaks[0].position) == pytest.approx(math.pi, abs=1e-9)
        assert peaks[0].fwhm == pytest.approx(math.pi, abs=1e-6)
        assert peaks[0].left_edge < peaks[0].position < peaks[0].right_edge

    def test_flat_profile_has_no_peaks(self) -> None:
        assert find_peaks(_synthetic_profile(np.ones(128))) == []

    def test_gaps_are_rejected(self) -> None:
        values = 1 + np.cos(periodic_grid(128))
        values[5] = np.nan
        with pytest.raises(ProfileHasGaps):
            find_peaks(_synthetic_profile(values))

    def test_peak_that_never_halves_spans_the_period(self) -> None:
        peaks = find_peaks(_synthetic_profile(10 + np.cos(periodic_grid(256))))
        assert len(peaks) == 1
        assert peaks[0].fwhm == pytest.approx(2 * math.pi)

    def test_four_peaks_near_coincidence(self, fig4_params: DriveParams) -> None:
        profile = scan_profile(fig4_params.replace(delta=3.65), convention=EQ9)
        peaks = find_peaks(profile, profile.evaluator())
        positions = sorted(p.position for p in peaks)
        assert positions == pytest.approx([-2.1307, -1.7758, -1.3661, -1.0112], abs=2e-3)

    def test_evaluator_refines_the_edges(self, fig4_params: DriveParams) -> None:
        profile = scan_profile(fig4_params, n_points=2000, convention=EQ9)
        refined = find_peaks(profile, profile.evaluator())
        interpolated = find_peaks(profile)
        evaluate = profile.evaluator()
        for peak in refined:
            assert evaluate(peak.left_edge) == pytest.approx(peak.height / 2, rel=1e-6)
            assert evaluate(peak.right_edge) == pytest.approx(peak.height / 2, rel=1e-6)
        assert [p.fwhm for p in interpolated] == pytest.approx([p.fwhm for p in refined], abs=1e-2)


class TestConfinement:
    @pytest.mark.parametrize(
        "phi, sign, classification, half",
        [
            pytest.param(0.0, 1, Confinement.SUB_HALF_WAVELENGTH, HalfWavelength.NEGATIVE, id="a"),
            pytest.param(math.pi / 2, 1, Confinement.BOUNDARY_CENTERED, None, id="b"),
            pytest.param(math.pi, 1, Confinement.SUB_HALF_WAVELENGTH, HalfWavelength.POSITIVE, id="c"),
            pytest.param(0.0, -1, Confinement.SUB_HALF_WAVELENGTH, HalfWavelength.POSITIVE, id="d"),
            pytest.param(math.pi / 2, -1, Confinement.BOUNDARY_CENTERED, None, id="e"),
            pytest.param(math.pi, -1, Confinement.SUB_HALF_WAVELENGTH, HalfWavelength.NEGATIVE, id="f"),
        ],
    )
    def test_localization_boxes(
        self,
        fig4_params: DriveParams,
        phi: float,
        sign: int,
        classification: Confinement,
        half: HalfWavelength,
    ) -> None:
        params = fig4_params.replace(phi=phi, delta=sign * fig4_params.delta)
        profile = scan_profile(params, convention=EQ9)
        report = classify_confinement(find_peaks(profile, profile.evaluator()))
        assert report.classification is classification
        assert report.half is half
        if classification is Confinement.SUB_HALF_WAVELENGTH:
            assert report.peak_count == 2
            root = _coincident_root(params)
            for peak in report.peaks:
                assert abs(math.sin(peak.position) - root) <= 1e-3
        else:
            assert min(abs(p.position) for p in report.peaks) <= 1e-3

    def test_sharper_lines_at_the_outer_detuning(self, fig4_params: DriveParams, fig5_params: DriveParams) -> None:
        fig4 = classify_confinement(find_peaks(scan_profile(fig4_params, convention=EQ9)))
        fig5 = classify_confinement(find_peaks(scan_profile(fig5_params, convention=EQ9)))
        assert fig5.classification is Confinement.SUB_HALF_WAVELENGTH
        assert fig5.peak_count == 2
        assert fig5.mean_fwhm < fig4.mean_fwhm

    @pytest.mark.parametrize(
        "peaks, classification, half",
        [
            pytest.param([], Confinement.NO_PEAKS, None, id="none"),
            pytest.param(
                [Peak(1.0, 1.0, 0.5, 0.75, 1.25)],
                Confinement.SUB_HALF_WAVELENGTH,
                HalfWavelength.POSITIVE,
                id="positive",
            ),
            pytest.param(
                [Peak(-1.0, 1.0, 0.5, -1.25, -0.75)],
                Confinement.SUB_HALF_WAVELENGTH,
                HalfWavelength.NEGATIVE,
                id="negative",
            ),
            pytest.param([Peak(0.05, 1.0, 0.5, -0.2, 0.3)], Confinement.FULL_WAVELENGTH, None, id="straddles-zero"),
            pytest.param([Peak(1e-4, 1.0, 0.5, -0.25, 0.25)], Confinement.BOUNDARY_CENTERED, None, id="at-zero"),
            pytest.param(
                [Peak(1.0, 1.0, 2 * math.pi, 1.0 - math.pi, 1.0 + math.pi)],
                Confinement.FULL_WAVELENGTH,
                None,
                id="never-halves",
            ),
            pytest.param(
                [Peak(1.0, 1.0, 0.5, 0.75, 1.25), Peak(-1.0, 1.0, 0.5, -1.25, -0.75)],
                Confinement.FULL_WAVELENGTH,
                None,
                id="both-halves",
            ),
        ],
    )
    def test_classify(self, peaks: list, classification: Confinement, half: HalfWavelength) -> None:
        report = classify_confinement(peaks)
        assert report.classification is classification
        assert report.half is half
        assert report.peak_count == len(peaks)


class TestRoots:
    def test_coincident_at_the_inner_detuning(self, fig4_params: DriveParams) -> None:
        roots = roots_r(fig4_params)
        assert roots is not None
        assert roots.coincident
        assert roots.values[0] == pytest.approx(_coincident_root(fig4_params), rel=1e-12)
        assert roots.values[0] == pytest.approx(-0.9107, abs=1e-4)

    def test_requires_metastable_level(self, fig4_params: DriveParams) -> None:
        with pytest.raises(RequiresMetastable):
            roots_r(fig4_params.replace(gamma2=0.1))

    def test_distinct_roots_and_reachability(self, fig4_params: DriveParams) -> None:
        roots = roots_r(fig4_params.replace(delta=1.0))
        assert roots is not None
        assert not roots.coincident
        assert len(roots.reachable) == 1
        assert len(roots.unreachable) == 1
        assert roots.values[0] > roots.values[1]
        params = fig4_params.replace(delta=1.0)
        for r in roots.values:
            a = 2 * params.delta * params.omega1**2
            b = params.omega1 * params.omega2 * params.omega3
            c0 = 2 * params.delta * (params.omega2**2 + params.omega3**2) - 8 * params.delta**3
            assert a * r * r + b * r + c0 == pytest.approx(0.0, abs=1e-8 * (a + b + c0))

    def test_no_real_roots(self, fig4_params: DriveParams) -> None:
        assert roots_r(fig4_params.replace(delta=5.0)) is None

    def test_line_center_is_linear(self, fig4_params: DriveParams) -> None:
        roots = roots_r(fig4_params.replace(delta=0.0))
        assert roots is not None
        assert roots.values == (0.0,)

    def test_no_standing_wave_no_roots(self, fig4_params: DriveParams) -> None:
        assert roots_r(fig4_params.replace(omega1=0.0)) is None


class TestCoincidenceDetunings:
    def test_in_phase(self) -> None:
        inner, outer = 5 * (math.sqrt(3) - 1), 5 * (math.sqrt(3) + 1)
        assert coincidence_detunings(20.0, PhaseCase.IN_PHASE) == pytest.approx([-outer, -inner, inner, outer])

    def test_quadrature(self) -> None:
        edge = 20 / math.sqrt(2)
        assert coincidence_detunings(20.0, PhaseCase.QUADRATURE) == pytest.approx([-edge, 0.0, edge])

    def test_literal_convention_degenerates(self) -> None:
        assert coincidence_detunings(20.0, PhaseCase.IN_PHASE, PhaseConvention.EQ6_LITERAL) == pytest.approx(
            [-10.0, 10.0]
        )

    def test_rejects_nonpositive_omega(self) -> None:
        with pytest.raises(InvalidParameters):
            coincidence_detunings(0.0, PhaseCase.IN_PHASE)

    @pytest.mark.parametrize("omega", [1.0, 20.0, 50.0])
    def test_numerical_roots_match_closed_form(self, omega: float) -> None:
        in_phase = solve_coincidence_detunings(omega, 0.0)
        assert in_phase == pytest.approx([omega / 4 * (math.sqrt(3) - 1), omega / 4 * (math.sqrt(3) + 1)], abs=1e-9)
        assert solve_coincidence_detunings(omega, math.pi / 2) == pytest.approx([omega / math.sqrt(2)], abs=1e-9)

    def test_numerical_double_root(self) -> None:
        roots = solve_coincidence_detunings(20.0, 0.0, PhaseConvention.EQ6_LITERAL)
        assert roots == pytest.approx([10.0], abs=1e-6)
