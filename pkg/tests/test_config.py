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
Option parsing: number and sweep syntax, config files, LOOPCHI_* variables, presets and validation.
"""

import math

import pytest

from loopchi.config import DEFAULT_SWEEPS, RunConfig, build_cli_parser, parse_config
from loopchi.exceptions import ParseError, ValidationError
from loopchi.localization import PhaseCase, coincidence_detunings
from loopchi.loopchi_types import SweepKind, SweepSpec, parse_real, parse_sweep
from loopchi.presets import CHI_SWEEP, PROFILE_SWEEP, UNIT_GAMMA1, get_figures_registry
from loopchi.susceptibility import DEFAULT_CONVENTION, DriveParams, PhaseConvention


class TestNumberSyntax:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("1.5", 1.5),
            ("-2e-3", -2e-3),
            (".5", 0.5),
            ("pi", math.pi),
            ("2pi", 2 * math.pi),
            ("-pi/2", -math.pi / 2),
            ("3*pi/4", 3 * math.pi / 4),
            ("0.5pi", 0.5 * math.pi),
            ("  PI ", math.pi),
        ],
    )
    def test_parse_real(self, text: str, expected: float) -> None:
        assert parse_real(text) == pytest.approx(expected)

    @pytest.mark.parametrize("text", ["", "abc", "/2", "pi/0", "nan", "inf", "1e400", "2 pi"])
    def test_parse_real_rejects(self, text: str) -> None:
        with pytest.raises(ValueError):
            parse_real(text)

    def test_parse_sweep(self) -> None:
        sweep = parse_sweep("phi:0:2pi:721")
        assert sweep == SweepSpec(SweepKind.PHI, 0.0, 2 * math.pi, 721)
        assert len(sweep.grid()) == 721
        assert sweep.grid()[-1] == pytest.approx(2 * math.pi)

    def test_kx_grid_is_periodic(self) -> None:
        grid = parse_sweep("kx:-pi:pi:8").grid()
        assert len(grid) == 8
        assert grid[0] > -math.pi
        assert grid[-1] == math.pi

    @pytest.mark.parametrize("text", ["phi:0:1", "theta:0:1:3", "delta:a:1:3", "delta:0:1:x"])
    def test_parse_sweep_rejects(self, text: str) -> None:
        with pytest.raises(ValueError):
            parse_sweep(text)

    @pytest.mark.parametrize(
        "sweep",
        [
            pytest.param(SweepSpec(SweepKind.DELTA, 0.0, 1.0, 1), id="one-point"),
            pytest.param(SweepSpec(SweepKind.DELTA, 1.0, 1.0, 10), id="empty-range"),
            pytest.param(SweepSpec(SweepKind.KX, 0.0, math.pi, 10), id="half-period"),
        ],
    )
    def test_sweep_validation(self, sweep: SweepSpec) -> None:
        with pytest.raises(ValidationError):
            sweep.validate()


class TestParseConfig:
    def test_defaults(self) -> None:
        config = parse_config()
        assert config.params == DriveParams()
        assert config.convention is DEFAULT_CONVENTION
        assert config.sweep is None
        assert config.nu_p == 1000.0
        assert config.preset is None
        assert config.roots is False

    def test_config_file_syntax(self) -> None:
        text = """
        # loop drives
        omega1=2 omega2=2   omega3=2
        gamma1=2 gamma2=2 phi=pi/2  # quadrature
        nu_p=2000 convention=eq9
        sweep=delta:-3:3:61
        roots=true
        """
        config = parse_config(text)
        assert config.params == DriveParams(omega1=2, omega2=2, omega3=2, gamma1=2, gamma2=2, phi=math.pi / 2)
        assert config.nu_p == 2000.0
        assert config.convention is PhaseConvention.EQ9_CONSISTENT
        assert config.sweep == SweepSpec(SweepKind.DELTA, -3.0, 3.0, 61)
        assert config.roots is True

    def test_flags_win_over_the_file(self) -> None:
        config = parse_config("omega1=3 delta=1", ["--omega1", "4", "--delta", "-0.5"])
        assert config.params.omega1 == 4.0
        assert config.params.delta == -0.5

    def test_environment(self) -> None:
        config = parse_config(env={"LOOPCHI_OMEGA2": "5", "LOOPCHI_NU_P": "20"})
        assert config.params.omega2 == 5.0
        assert config.nu_p == 20.0

    def test_preset_supplies_defaults(self) -> None:
        config = parse_config("preset=fig4c omega1=40")
        assert config.params.omega1 == 40.0
        assert config.params.omega2 == 20.0
        assert config.params.phi == pytest.approx(math.pi)
        assert config.convention is PhaseConvention.EQ9_CONSISTENT
        assert config.unit == UNIT_GAMMA1
        assert config.sweep_for(SweepKind.KX) == PROFILE_SWEEP

    @pytest.mark.parametrize(
        "figure, omega, index, expected",
        [
            pytest.param("fig4", 20.0, 2, 5 * (math.sqrt(3) - 1), id="fig4-inner"),
            pytest.param("fig5", 50.0, 3, 12.5 * (math.sqrt(3) + 1), id="fig5-outer"),
        ],
    )
    def test_localization_presets_use_coincidence_detunings(
        self, figure: str, omega: float, index: int, expected: float
    ) -> None:
        detuning = coincidence_detunings(omega, PhaseCase.IN_PHASE, PhaseConvention.EQ9_CONSISTENT)[index]
        assert detuning == pytest.approx(expected, rel=1e-14)
        panels = get_figures_registry()[figure].panels()
        assert [panel.params.delta for panel in panels] == [detuning] * 3 + [-detuning] * 3

    def test_figure_preset_is_its_first_panel(self) -> None:
        config = parse_config(flags=["--preset", "fig2"])
        assert config.params == DriveParams(omega1=2, omega2=2, omega3=2, gamma1=2, gamma2=2)
        assert config.sweep_for(SweepKind.DELTA) == CHI_SWEEP
        # fig2a is a chi panel; other kinds fall back to the built-in sweeps
        assert config.sweep_for(SweepKind.PHI) == DEFAULT_SWEEPS[SweepKind.PHI]

    @pytest.mark.parametrize(
        "text, line",
        [
            pytest.param("omega1=2\nomega9=1", 2, id="unknown-key"),
            pytest.param("omega1=2\n\nomega1=3", 3, id="duplicate-key"),
            pytest.param("omega1", 1, id="missing-value"),
            pytest.param("phi=0\n=3", 2, id="missing-key"),
        ],
    )
    def test_malformed_file(self, text: str, line: int) -> None:
        with pytest.raises(ParseError) as exc_info:
            parse_config(text)
        assert exc_info.value.line == line
        assert str(exc_info.value).startswith(f"line {line}: ")

    @pytest.mark.parametrize(
        "flags, flag",
        [
            (["--omega1", "fast"], "--omega1"),
            (["--sweep", "theta:0:1:3"], "--sweep"),
            (["--convention", "eq7"], "--convention"),
            (["--preset", "fig9"], "--preset"),
            (["--points", "0"], "--points"),
        ],
    )
    def test_malformed_flag(self, flags: list, flag: str) -> None:
        with pytest.raises(ParseError) as exc_info:
            parse_config(flags=flags)
        assert exc_info.value.flag == flag

    @pytest.mark.parametrize(
        "flags",
        [
            pytest.param(["--omega1", "-1"], id="negative-rabi"),
            pytest.param(["--gamma2", "-0.1"], id="negative-decay"),
            pytest.param(["--prefactor", "0"], id="prefactor"),
            pytest.param(["--nu-p", "0"], id="nu-p"),
            pytest.param(["--probe-rabi", "0"], id="probe"),
            pytest.param(["--sweep", "delta:1:-1:5"], id="reversed-sweep"),
        ],
    )
    def test_invalid_values(self, flags: list) -> None:
        with pytest.raises(ValidationError):
            parse_config(flags=flags)


class TestRunConfig:
    def test_sweep_kind_must_match(self) -> None:
        config = parse_config(flags=["--sweep", "phi:0:pi:11"])
        assert config.sweep_for(SweepKind.PHI).count == 11
        with pytest.raises(ValidationError):
            config.sweep_for(SweepKind.DELTA)

    def test_to_dict(self) -> None:
        config = RunConfig(DriveParams(omega1=1), PhaseConvention.EQ6_LITERAL, CHI_SWEEP, 1000.0, "out")
        data = config.to_dict()
        assert data["params"]["omega1"] == 1.0
        assert data["convention"] == "eq6"
        assert data["sweep"] == str(CHI_SWEEP)


class TestCliParser:
    def test_subcommands(self) -> None:
        parser = build_cli_parser()
        args = parser.parse_args(["repro", "fig4", "--points", "60", "-o", "results"])
        assert args.subcommand == "repro"
        assert args.figure == "fig4"
        assert args.points == 60
        assert args.out == "results"

    def test_unknown_figure(self) -> None:
        with pytest.raises(SystemExit):
            build_cli_parser().parse_args(["repro", "fig7"])
