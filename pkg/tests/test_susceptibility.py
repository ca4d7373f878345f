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
Tests for the closed-form susceptibility in loopchi/susceptibility.py
"""

import math

import numpy as np
import pytest

from loopchi.exceptions import DegenerateDenominator, InvalidParameters
from loopchi.susceptibility import (
    DEFAULT_CONVENTION,
    DriveParams,
    PhaseConvention,
    Source,
    chi_from_arrays,
    chi_grid,
    compute_chi,
    compute_y,
    d_chi_d_delta,
    d_chi_from_arrays,
    line_center_chi,
)


def _random_params(rng: np.random.Generator, n: int, low: float = 0.1, high: float = 10.0) -> dict:
    return {
        "omega1": rng.uniform(low, high, n),
        "omega2": rng.uniform(low, high, n),
        "omega3": rng.uniform(low, high, n),
        "phi": rng.uniform(-math.pi, math.pi, n),
        "gamma1": rng.uniform(low, high, n),
        "gamma2": rng.uniform(low, high, n),
        "delta": rng.uniform(-10.0, 10.0, n),
    }


class TestDriveParams:
    @pytest.mark.parametrize(
        "changes",
        [
            pytest.param({"omega1": -1.0}, id="negative-omega"),
            pytest.param({"gamma2": -0.1}, id="negative-gamma"),
            pytest.param({"delta": math.nan}, id="nan-delta"),
            pytest.param({"phi": math.inf}, id="inf-phi"),
            pytest.param({"prefactor": 0.0}, id="zero-prefactor"),
            pytest.param({"omega3": "two"}, id="not-a-number"),
        ],
    )
    def test_rejects_invalid_fields(self, changes: dict) -> None:
        with pytest.raises(InvalidParameters):
            DriveParams(**changes)

    def test_coerces_to_float_and_replaces(self) -> None:
        params = DriveParams(omega1=2, delta=-1)
        assert isinstance(params.omega1, float)
        assert params.replace(delta=3).delta == 3.0
        assert params.delta == -1.0

    def test_default_convention_is_the_adjudicated_one(self) -> None:
        assert DEFAULT_CONVENTION is PhaseConvention.EQ6_LITERAL
        assert PhaseConvention.EQ6_LITERAL.cross_term_coefficient == 2.0
        assert PhaseConvention.EQ9_CONSISTENT.cross_term_coefficient == 1.0


class TestComputeChi:
    @pytest.mark.parametrize(
        "phi, expected",
        [
            pytest.param(0.0, 0.125 + 0.125j, id="phi=0"),
            pytest.param(math.pi / 2, 0.25j, id="phi=pi/2"),
            pytest.param(math.pi, -0.125 + 0.125j, id="phi=pi"),
        ],
    )
    def test_line_center_of_the_absorbing_regime(self, fig2_params: DriveParams, phi: float, expected: complex) -> None:
        chi = compute_chi(fig2_params.replace(phi=phi))
        assert chi.source is Source.ANALYTIC
        assert chi.value == pytest.approx(expected, abs=1e-12)
        assert line_center_chi(fig2_params.replace(phi=phi)) == pytest.approx(expected, abs=1e-12)

    def test_off_resonance_value(self, fig2_params: DriveParams) -> None:
        # A = 40, B = 0 and the numerator is 4i at delta = 1
        assert compute_y(fig2_params.replace(delta=1.0)) == pytest.approx(40.0 + 0.0j)
        assert compute_chi(fig2_params.replace(delta=1.0)).value == pytest.approx(0.1j, abs=1e-12)

    def test_conventions_differ_only_in_the_phase_term(self, fig2_params: DriveParams) -> None:
        eq9 = compute_chi(fig2_params, PhaseConvention.EQ9_CONSISTENT).value
        assert eq9 == pytest.approx(4 / (8 - 16j), abs=1e-12)
        at_quadrature = fig2_params.replace(phi=math.pi / 2, delta=0.7)
        assert compute_chi(at_quadrature, PhaseConvention.EQ9_CONSISTENT).value == pytest.approx(
            compute_chi(at_quadrature, PhaseConvention.EQ6_LITERAL).value, rel=1e-12
        )

    def test_prefactor_scales_linearly(self, fig3_params: DriveParams) -> None:
        base = compute_chi(fig3_params.replace(delta=0.3)).value
        assert compute_chi(fig3_params.replace(delta=0.3, prefactor=2.5)).value == pytest.approx(2.5 * base)

    def test_degenerate_denominator(self) -> None:
        # every field off and delta = 0 leaves Y = 0
        with pytest.raises(DegenerateDenominator):
            compute_chi(DriveParams())
        with pytest.raises(DegenerateDenominator):
            d_chi_d_delta(DriveParams())
        assert np.isnan(chi_from_arrays(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0))

    def test_line_center_matches_general_form(self) -> None:
        rng = np.random.default_rng(7)
        for _ in range(50):
            values = {k: float(v[0]) for k, v in _random_params(rng, 1).items()}
            params = DriveParams(**{**values, "delta": 0.0})
            assert line_center_chi(params) == pytest.approx(compute_chi(params).value, rel=1e-10)


class TestExactIdentities:
    N_POINTS = 10_000

    def test_phase_is_even_and_periodic(self) -> None:
        values = _random_params(np.random.default_rng(1), self.N_POINTS)
        chi = chi_from_arrays(**values)
        mirrored = chi_from_arrays(**{**values, "phi": -values["phi"]})
        shifted = chi_from_arrays(**{**values, "phi": values["phi"] + 2 * math.pi})
        np.testing.assert_allclose(mirrored, chi, rtol=1e-12)
        np.testing.assert_allclose(shifted, chi, rtol=1e-9)

    def test_metastable_transparency_zeros(self) -> None:
        values = _random_params(np.random.default_rng(2), self.N_POINTS)
        values["gamma2"] = np.zeros(self.N_POINTS)
        for sign in (1, -1):
            chi = chi_from_arrays(**{**values, "delta": sign * values["omega2"] / 2})
            finite = chi[np.isfinite(chi)]
            assert len(finite) > 0.99 * self.N_POINTS
            assert np.all(finite == 0)

    def test_metastable_absorption_is_nonnegative(self) -> None:
        values = _random_params(np.random.default_rng(3), self.N_POINTS)
        values["gamma2"] = np.zeros(self.N_POINTS)
        for convention in PhaseConvention:
            chi = chi_from_arrays(**values, convention=convention)
            assert np.all(chi.imag[np.isfinite(chi)] >= 0)


class TestDerivative:
    def test_matches_central_differences(self) -> None:
        rng = np.random.default_rng(11)
        n = 1000
        values = {
            "omega1": rng.uniform(1.0, 3.0, n),
            "omega2": rng.uniform(1.0, 3.0, n),
            "omega3": rng.uniform(1.0, 3.0, n),
            "phi": rng.uniform(0.0, 2 * math.pi, n),
            "gamma1": rng.uniform(1.0, 3.0, n),
            "gamma2": rng.uniform(1.0, 3.0, n),
            "delta": rng.uniform(-3.0, 3.0, n),
        }
        h = 1e-4
        analytic = d_chi_from_arrays(**values)
        upper = chi_from_arrays(**{**values, "delta": values["delta"] + h})
        lower = chi_from_arrays(**{**values, "delta": values["delta"] - h})
        numeric = (upper - lower) / (2 * h)
        scale = np.maximum(np.abs(analytic), np.abs(chi_from_arrays(**values)))
        assert np.all(np.abs(numeric - analytic) <= 1e-6 * scale)

    def test_scalar_form_agrees(self, fig2_params: DriveParams) -> None:
        params = fig2_params.replace(phi=0.4, delta=0.3)
        assert d_chi_d_delta(params) == pytest.approx(complex(d_chi_from_arrays(**params.to_dict())), rel=1e-12)


class TestChiGrid:
    @pytest.mark.parametrize("workers", [pytest.param(1, id="serial"), pytest.param(4, id="threads")])
    def test_grid_matches_pointwise(self, fig2_params: DriveParams, workers: int) -> None:
        deltas = np.linspace(-6, 6, 1201)
        chi = chi_grid(fig2_params, "delta", deltas, workers=workers)
        assert chi.shape == deltas.shape
        for index in (0, 300, 600, 1200):
            assert chi[index] == pytest.approx(compute_chi(fig2_params.replace(delta=deltas[index])).value, rel=1e-14)

    def test_threads_do_not_change_values(self, fig3_params: DriveParams) -> None:
        phis = np.linspace(0, 2 * math.pi, 721)
        serial = chi_grid(fig3_params, "phi", phis)
        np.testing.assert_allclose(chi_grid(fig3_params, "phi", phis, workers=3), serial, rtol=1e-14)
