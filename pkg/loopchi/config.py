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
Run configuration: command-line flags, key=value config files, LOOPCHI_* environment variables and presets.

Precedence is flags > config file > preset > built-in defaults. Config files hold whitespace-separated
key=value entries, '#' starts a comment, and keys may be spelled with '_' or '-':

    preset=fig2  convention=eq6
    omega1=2 omega2=2 omega3=2   # loop drives
    sweep=phi:0:2pi:721
"""

import re
from collections import OrderedDict
from dataclasses import dataclass
from typing import IO, Any, Dict, List, Mapping, NoReturn, Optional, Sequence

import configargparse

from loopchi import __version__
from loopchi.exceptions import InvalidParameters, ParseError, ValidationError
from loopchi.group_velocity import DEFAULT_NU_P
from loopchi.loopchi_types import (
    SweepKind,
    SweepSpec,
    nonnegative_integer,
    parse_sweep,
    positive_integer,
    real_number,
    sweep_spec,
)
from loopchi.oracle import DEFAULT_PROBE_RABI
from loopchi.presets import UNIT_GAMMA, Panel, get_figures_registry, get_preset, preset_names
from loopchi.susceptibility import DEFAULT_CONVENTION, PARAM_NAMES, DriveParams, PhaseConvention

ENV_VAR_PREFIX = "loopchi_"
DEFAULT_OUTPUT_DIR = "loopchi-out"
DEFAULT_SEED = 42
DEFAULT_POINTS = 100
DEFAULT_LOG_MAX_SIZE = 1024 * 1024 * 5
DEFAULT_LOG_BACKUP_COUNT = 1

DEFAULT_SWEEPS = {
    SweepKind.DELTA: parse_sweep("delta:-6:6:1201"),
    SweepKind.PHI: parse_sweep("phi:0:2pi:721"),
    SweepKind.KX: parse_sweep("kx:-pi:pi:10001"),
}

# every key a config file may set, in command-line spelling
CONFIG_KEYS = (
    "preset",
    "convention",
    "out",
    "sweep",
    "nu-p",
    "seed",
    "points",
    *PARAM_NAMES,
    "probe-rabi",
    "workers",
    "roots",
    "verbose",
    "log-file",
    "log-rotate-max-size",
    "log-rotate-backup-count",
    "log-usage",
)


class LoopchiConfigFileParser(configargparse.ConfigFileParser):
    def get_syntax_description(self) -> str:
        return (
            "Config file syntax: key=value entries separated by whitespace or newlines, '#' comments."
            f" Keys: {', '.join(CONFIG_KEYS)}."
        )

    def parse(self, stream: IO[str]) -> "OrderedDict[str, str]":
        items: "OrderedDict[str, str]" = OrderedDict()
        for lineno, raw_line in enumerate(stream, start=1):
            line = raw_line.split("#", 1)[0]
            for token in line.split():
                key, sep, value = token.partition("=")
                key = key.strip().lower().replace("_", "-")
                if not sep or not key or not value:
                    raise configargparse.ConfigFileParserException(
                        f"line {lineno}: expected key=value, got {token!r}"
                    )
                if key not in CONFIG_KEYS:
                    raise configargparse.ConfigFileParserException(f"line {lineno}: unknown key {key!r}")
                if key in items:
                    raise configargparse.ConfigFileParserException(f"line {lineno}: duplicate key {key!r}")
                items[key] = value
        return items

    def serialize(self, items: Mapping[str, Any]) -> str:
        return "".join(f"{key}={value}\n" for key, value in items.items())


_LINE_ERROR_RE = re.compile(r"line (?P<line>\d+): (?P<message>.*)", re.DOTALL)
_FLAG_ERROR_RE = re.compile(r"argument (?P<flag>[^:]+): (?P<message>.*)", re.DOTALL)


class RaisingArgumentParser(configargparse.ArgumentParser):
    """
    Reports malformed input as ParseError instead of printing usage and exiting.
    """

    def error(self, message: Any) -> NoReturn:
        message = str(message)
        line_match = _LINE_ERROR_RE.search(message)
        if line_match is not None:
            raise ParseError(line_match["message"], line=int(line_match["line"]))
        flag_match = _FLAG_ERROR_RE.search(message)
        if flag_match is not None:
            raise ParseError(flag_match["message"], flag=flag_match["flag"].split("/")[-1])
        raise ParseError(message)


def _convention(value_str: str) -> PhaseConvention:
    try:
        return PhaseConvention(value_str.strip().lower())
    except ValueError:
        raise configargparse.ArgumentTypeError(
            f"invalid convention {value_str!r} (allowed: {[c.value for c in PhaseConvention]})"
        )


def _preset(value_str: str) -> str:
    if get_preset(value_str) is None:
        raise configargparse.ArgumentTypeError(f"unknown preset {value_str!r} (allowed: {preset_names()})")
    return value_str.strip().lower()


def add_run_arguments(parser: configargparse.ArgumentParser) -> None:
    parser.add_argument("--config", is_config_file=True, help="Config file path")
    parser.add_argument("--preset", type=_preset, help="Figure or panel preset, e.g. fig2 or fig4c")
    parser.add_argument(
        "--convention",
        type=_convention,
        help=f"Phase-term convention of the closed form (default: {DEFAULT_CONVENTION.value}, or the preset's)",
    )
    parser.add_argument(
        "-o", "--out", dest="out", default=DEFAULT_OUTPUT_DIR, help="Output directory (default: %(default)s)"
    )
    parser.add_argument("--sweep", type=sweep_spec, help="Sweep as kind:start:stop:count, kind in phi|delta|kx")
    parser.add_argument("--nu-p", dest="nu_p", type=real_number, help=f"Probe frequency (default: {DEFAULT_NU_P:g})")
    parser.add_argument(
        "--seed", type=nonnegative_integer, default=DEFAULT_SEED, help="Adjudication seed (default: %(default)s)"
    )
    parser.add_argument(
        "--points",
        type=positive_integer,
        default=DEFAULT_POINTS,
        help="Adjudication sample size (default: %(default)s)",
    )

    params_options = parser.add_argument_group("drive parameters")
    defaults = DriveParams()
    for name in PARAM_NAMES:
        params_options.add_argument(
            f"--{name}", dest=name, type=real_number, help=f"(default: {getattr(defaults, name):g}, or the preset's)"
        )
    params_options.add_argument(
        "--probe-rabi",
        dest="probe_rabi",
        type=real_number,
        default=DEFAULT_PROBE_RABI,
        help="Probe Rabi frequency of the density-matrix oracle (default: %(default)s)",
    )
    params_options.add_argument(
        "--roots",
        action="store_true",
        default=False,
        help="Also analyse the peak roots of the localization profile (requires gamma2=0)",
    )
    parser.add_argument(
        "--workers", type=positive_integer, default=1, help="Threads evaluating sweep grids (default: %(default)s)"
    )

    parser.add_argument("-v", "--verbose", action="store_true", default=False, dest="verbose")
    logging_options = parser.add_argument_group("logging")
    logging_options.add_argument("--log-file", action="store", type=str, dest="log_file", default=None)
    logging_options.add_argument(
        "--log-rotate-max-size",
        action="store",
        type=positive_integer,
        dest="log_rotate_max_size",
        default=DEFAULT_LOG_MAX_SIZE,
    )
    logging_options.add_argument(
        "--log-rotate-backup-count",
        action="store",
        type=positive_integer,
        dest="log_rotate_backup_count",
        default=DEFAULT_LOG_BACKUP_COUNT,
    )
    logging_options.add_argument(
        "--log-usage",
        action="store_true",
        default=False,
        dest="log_usage",
        help="Log CPU and memory usage of every panel",
    )


@dataclass(frozen=True)
class RunConfig:
    params: DriveParams
    convention: PhaseConvention
    # None: the command's default sweep (or the preset's, when its kind matches)
    sweep: Optional[SweepSpec]
    nu_p: float
    out_dir: str
    preset: Optional[str] = None
    preset_sweep: Optional[SweepSpec] = None
    unit: str = UNIT_GAMMA
    seed: int = DEFAULT_SEED
    points: int = DEFAULT_POINTS
    workers: int = 1
    probe_rabi: float = DEFAULT_PROBE_RABI
    roots: bool = False

    def sweep_for(self, kind: SweepKind) -> SweepSpec:
        if self.sweep is not None:
            if self.sweep.kind is not kind:
                raise ValidationError(f"sweep kind is {kind.value}", f"got {self.sweep.kind.value}")
            return self.sweep
        if self.preset_sweep is not None and self.preset_sweep.kind is kind:
            return self.preset_sweep
        return DEFAULT_SWEEPS[kind]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "convention": self.convention.value,
            "sweep": str(self.sweep) if self.sweep is not None else None,
            "nu_p": self.nu_p,
            "preset": self.preset,
            "unit": self.unit,
            "seed": self.seed,
            "points": self.points,
            "probe_rabi": self.probe_rabi,
            "roots": self.roots,
        }


def run_config_from_args(args: configargparse.Namespace) -> RunConfig:
    """
    Resolves parsed arguments against the preset and the defaults, and validates the result.
    """
    panel: Optional[Panel] = get_preset(args.preset) if args.preset is not None else None
    base = panel.params if panel is not None else DriveParams()
    explicit = {name: getattr(args, name) for name in PARAM_NAMES if getattr(args, name) is not None}
    try:
        params = base.replace(**explicit)
    except InvalidParameters as e:
        raise ValidationError(e.invariant, e.detail) from e

    nu_p = args.nu_p if args.nu_p is not None else (panel.nu_p if panel is not None else DEFAULT_NU_P)
    if not nu_p > 0:
        raise ValidationError("nu_p > 0", f"got {nu_p!r}")
    if not args.probe_rabi > 0:
        raise ValidationError("probe_rabi > 0", f"got {args.probe_rabi!r}")
    if args.sweep is not None:
        args.sweep.validate()

    if args.convention is not None:
        convention = args.convention
    else:
        convention = panel.convention if panel is not None else DEFAULT_CONVENTION

    return RunConfig(
        params=params,
        convention=convention,
        sweep=args.sweep,
        nu_p=float(nu_p),
        out_dir=args.out,
        preset=args.preset,
        preset_sweep=panel.sweep if panel is not None else None,
        unit=panel.unit if panel is not None else UNIT_GAMMA,
        seed=args.seed,
        points=args.points,
        workers=args.workers,
        probe_rabi=args.probe_rabi,
        roots=args.roots,
    )


def build_run_parser() -> RaisingArgumentParser:
    parser = RaisingArgumentParser(
        config_file_parser_class=LoopchiConfigFileParser,
        auto_env_var_prefix=ENV_VAR_PREFIX,
        add_env_var_help=False,
    )
    add_run_arguments(parser)
    return parser


def parse_config(
    text: Optional[str] = None, flags: Sequence[str] = (), env: Optional[Mapping[str, str]] = None
) -> RunConfig:
    """
    Programmatic form of the command-line options. 'text' is config file content, 'flags' command-line flags
    (which win over 'text'), 'env' LOOPCHI_* variables; the process environment is not consulted.
    """
    parser = build_run_parser()
    args = parser.parse_args(list(flags), config_file_contents=text, env_vars=dict(env or {}))
    return run_config_from_args(args)


def build_cli_parser() -> configargparse.ArgumentParser:
    parser = configargparse.ArgumentParser(
        prog="loopchi",
        description="Phase-controlled susceptibility, group velocity and atom localization of a four-level loop"
        " atomic medium.",
        auto_env_var_prefix=ENV_VAR_PREFIX,
        add_env_var_help=False,
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    subcommands: List[Dict[str, str]] = [
        {"name": "chi", "help": "chi' and chi'' versus the detuning"},
        {"name": "group-index", "help": "n_g - 1 and chi'' versus the loop phase, with sign crossings"},
        {"name": "localize", "help": "chi'' along the standing wave, with peaks and confinement"},
        {"name": "repro", "help": "Reproduce every panel of a figure"},
        {"name": "adjudicate", "help": "Decide the phase-term convention against the density-matrix oracle"},
    ]
    for subcommand in subcommands:
        subparser = subparsers.add_parser(
            subcommand["name"],
            help=subcommand["help"],
            config_file_parser_class=LoopchiConfigFileParser,
            auto_env_var_prefix=ENV_VAR_PREFIX,
            add_env_var_help=False,
            add_config_file_help=True,
        )
        if subcommand["name"] == "repro":
            subparser.add_argument("figure", choices=sorted(get_figures_registry()), help="Figure to reproduce")
        add_run_arguments(subparser)
    return parser
