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
The commands behind the CLI. Each writes its data files and a manifest.json into the output directory.

Data files are deterministic: identical configuration gives byte-identical CSV/JSON, and the manifest differs only
in its "timings" section.
"""

import math
import platform
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np
import pandas as pd
import scipy
from humanfriendly import format_timespan

from loopchi import __version__
from loopchi.config import RunConfig
from loopchi.exceptions import InconclusiveAdjudication, PanelFailure, ValidationError
from loopchi.group_velocity import SweepSeries, find_sign_crossings, most_superluminal, phase_sweep, sweep_span
from loopchi.kramers_kronig import kramers_kronig_check
from loopchi.localization import (
    Confinement,
    ConfinementReport,
    classify_confinement,
    find_peaks,
    roots_r,
    scan_profile,
)
from loopchi.log import get_logger_adapter
from loopchi.loopchi_types import SweepKind, SweepSpec
from loopchi.oracle import MIN_ADJUDICATION_POINTS, AdjudicationReport, AdjudicationStatus, adjudicate_convention
from loopchi.presets import UNIT_GAMMA1, Panel, PanelKind, get_figures_registry
from loopchi.susceptibility import DEFAULT_CONVENTION, DriveParams, PhaseConvention, chi_grid
from loopchi.usage_loggers import NoopUsageLogger, UsageLoggerInterface
from loopchi.utils import render_csv, sweep_frame
from loopchi.utils.fs import atomic_write_json, atomic_write_text, ensure_directory

logger = get_logger_adapter(__name__)

MANIFEST_NAME = "manifest.json"
SUSCEPTIBILITY_UNIT = "2 N |p_a1c|^2 / (eps0 hbar)"


class OutputBundle:
    """
    Owns one output directory for one command: writes files atomically, remembers them and finally writes the
    manifest that lists them.
    """

    def __init__(
        self,
        out_dir: str,
        command: str,
        config: RunConfig,
        usage_logger: Optional[UsageLoggerInterface] = None,
    ):
        self._dir = ensure_directory(out_dir)
        self._command = command
        self._config = config
        self._usage_logger = usage_logger if usage_logger is not None else NoopUsageLogger()
        self._files: List[str] = []
        self._sections: Dict[str, Any] = {}
        self._timings: Dict[str, float] = {}
        self._usage_logger.init_cycles()

    @property
    def directory(self) -> Path:
        return self._dir

    def _register(self, name: str) -> Path:
        assert name != MANIFEST_NAME and name not in self._files, f"{name} written twice"
        self._files.append(name)
        return self._dir / name

    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
        atomic_write_text(self._register(name), render_csv(sweep_frame(header, rows)))
        logger.debug("Wrote CSV", path=str(self._dir / name), rows=len(rows))
        return name

    def write_json(self, name: str, data: Any) -> str:
        atomic_write_json(self._register(name), data)
        logger.debug("Wrote JSON", path=str(self._dir / name))
        return name

    def record(self, key: str, value: Any) -> None:
        self._sections[key] = value

    @contextmanager
    def timed(self, label: str) -> Iterator[None]:
        start = time.monotonic()
        try:
            yield
        finally:
            elapsed = time.monotonic() - start
            self._timings[label] = elapsed
            logger.info(f"Finished {label} in {format_timespan(elapsed)}")
            self._usage_logger.log_cycle(label)

    def manifest(self, status: str) -> Dict[str, Any]:
        return {
            "tool": {"name": "loopchi", "version": __version__},
            "environment": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "pandas": pd.__version__,
            },
            "command": self._command,
            "status": status,
            "config": self._config.to_dict(),
            "units": _unit_mapping(self._config.unit),
            "files": sorted(self._files),
            **self._sections,
            "timings": {label: round(seconds, 6) for label, seconds in sorted(self._timings.items())},
        }

    def finish(self, status: str = "ok") -> Dict[str, Any]:
        manifest = self.manifest(status)
        atomic_write_json(self._dir / MANIFEST_NAME, manifest)
        logger.info("Wrote manifest", path=str(self._dir / MANIFEST_NAME), status=status, files=len(self._files))
        return manifest


def _unit_mapping(unit: str) -> Dict[str, str]:
    return {
        "rates": unit,
        "delta": unit,
        "nu_p": unit,
        "chi": SUSCEPTIBILITY_UNIT,
        "ng_minus_one": SUSCEPTIBILITY_UNIT,
        "phi": "rad",
        "kx": "rad",
    }


def _convention_section(convention: PhaseConvention) -> Dict[str, str]:
    return {"used": convention.value, "default": DEFAULT_CONVENTION.value}


def _adjudication_summary(report: AdjudicationReport) -> Dict[str, Any]:
    return {
        "status": report.status.value,
        "winning_convention": report.winning_convention.value if report.winning_convention is not None else None,
        "max_relative_error": {c.value: e for c, e in report.max_relative_error.items()},
        "seed": report.seed,
        "grid_size": report.grid_size,
    }


def run_chi_panel(
    bundle: OutputBundle, name: str, params: DriveParams, sweep: SweepSpec, convention: PhaseConvention, workers: int
) -> Dict[str, Any]:
    values = sweep.grid()
    chi = chi_grid(params, "delta", values, convention, workers)
    rows = [(float(d), float(c.real), float(c.imag)) for d, c in zip(values, chi)]
    filename = bundle.write_csv(f"{name}.csv", ("delta", "chi_prime", "chi_double_prime"), rows)
    finite = chi[np.isfinite(chi)]
    return {
        "file": filename,
        "sweep": str(sweep),
        "phi": params.phi,
        "rows": len(rows),
        "gaps": int(len(rows) - len(finite)),
        "min_chi_double_prime": float(finite.imag.min()) if len(finite) else None,
        "max_chi_double_prime": float(finite.imag.max()) if len(finite) else None,
    }


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _point_dict(series: SweepSeries) -> Optional[Dict[str, float]]:
    point = most_superluminal(series)
    if point is None:
        return None
    return {"phi": point.sweep_value, "ng_minus_one": point.ng_minus_one, "chi_double_prime": point.chi_double_prime}


def run_group_index_panel(
    bundle: OutputBundle,
    name: str,
    params: DriveParams,
    sweep: SweepSpec,
    nu_p: float,
    convention: PhaseConvention,
    workers: int,
) -> Dict[str, Any]:
    series = phase_sweep(params, nu_p, sweep.grid(), convention, workers)
    rows = [(p.sweep_value, p.ng_minus_one, p.chi_double_prime) for p in series.points]
    filename = bundle.write_csv(f"{name}.csv", ("phi", "ng_minus_one", "chi_double_prime"), rows)
    crossings = find_sign_crossings(series)
    return {
        "file": filename,
        "sweep": str(sweep),
        "delta": params.delta,
        "nu_p": nu_p,
        "rows": len(rows),
        "gaps": series.gap_count,
        "span": _finite_or_none(sweep_span(series)),
        "most_superluminal": _point_dict(series),
        "sign_crossings": [
            {
                "lower": c.lower,
                "upper": c.upper,
                "root": c.root,
                "residual": c.residual,
                "iterations": c.iterations,
                "below": c.below.value,
                "above": c.above.value,
                "converged": c.converged,
            }
            for c in crossings
        ],
    }


def _root_analysis(params: DriveParams, convention: PhaseConvention, report: ConfinementReport) -> Dict[str, Any]:
    roots = roots_r(params, convention)
    analysis: Dict[str, Any] = {"roots": roots.to_dict() if roots is not None else None}
    if roots is not None and roots.coincident:
        root = roots.values[0]
        analysis["coincident_root_sign"] = "negative" if root < 0 else "positive"
        if report.peaks:
            analysis["max_sin_position_mismatch"] = max(abs(math.sin(p.position) - root) for p in report.peaks)
    return analysis


def run_localize_panel(
    bundle: OutputBundle,
    name: str,
    params: DriveParams,
    sweep: SweepSpec,
    convention: PhaseConvention,
    workers: int,
    roots: bool,
    report_name: Optional[str] = None,
) -> Dict[str, Any]:
    profile = scan_profile(params, sweep.count, convention, workers)
    rows = [(float(x), float(y)) for x, y in zip(profile.kx, profile.chi_double_prime)]
    filename = bundle.write_csv(f"{name}.csv", ("kx", "chi_double_prime"), rows)

    report = classify_confinement(find_peaks(profile, profile.evaluator()))
    peak_report: Dict[str, Any] = {
        "panel": name,
        "params": params.to_dict(),
        "convention": convention.value,
        **report.to_dict(),
        "mean_fwhm": report.mean_fwhm if report.peaks else None,
    }
    if roots:
        peak_report.update(_root_analysis(params, convention, report))
    report_file = bundle.write_json(report_name or f"{name}-peaks.json", peak_report)
    logger.info(
        "Localization profile classified",
        panel=name,
        peaks=report.peak_count,
        classification=report.classification.value,
        half=report.half.value if report.half is not None else None,
    )
    return {"file": filename, "report": report_file, "sweep": str(sweep), **peak_report}


def cmd_chi(config: RunConfig, usage_logger: Optional[UsageLoggerInterface] = None) -> Dict[str, Any]:
    bundle = OutputBundle(config.out_dir, "chi", config, usage_logger)
    bundle.record("convention", _convention_section(config.convention))
    with bundle.timed("chi"):
        panel = run_chi_panel(
            bundle, "chi", config.params, config.sweep_for(SweepKind.DELTA), config.convention, config.workers
        )
    bundle.record("panels", {"chi": panel})
    return bundle.finish()


def cmd_group_index(config: RunConfig, usage_logger: Optional[UsageLoggerInterface] = None) -> Dict[str, Any]:
    bundle = OutputBundle(config.out_dir, "group-index", config, usage_logger)
    bundle.record("convention", _convention_section(config.convention))
    with bundle.timed("group_index"):
        panel = run_group_index_panel(
            bundle,
            "group_index",
            config.params,
            config.sweep_for(SweepKind.PHI),
            config.nu_p,
            config.convention,
            config.workers,
        )
    bundle.record("panels", {"group_index": panel})
    return bundle.finish()


def cmd_localize(config: RunConfig, usage_logger: Optional[UsageLoggerInterface] = None) -> Dict[str, Any]:
    sweep = config.sweep_for(SweepKind.KX)
    sweep.validate()
    bundle = OutputBundle(config.out_dir, "localize", config, usage_logger)
    bundle.record("convention", _convention_section(config.convention))
    with bundle.timed("profile"):
        panel = run_localize_panel(
            bundle,
            "profile",
            config.params,
            sweep,
            config.convention,
            config.workers,
            config.roots,
            report_name="peaks.json",
        )
    bundle.record("panels", {"profile": panel})
    return bundle.finish()


def _run_panel(bundle: OutputBundle, panel: Panel, config: RunConfig) -> Dict[str, Any]:
    if panel.kind is PanelKind.CHI:
        return run_chi_panel(bundle, panel.panel_id, panel.params, panel.sweep, panel.convention, config.workers)
    if panel.kind is PanelKind.GROUP_INDEX:
        return run_group_index_panel(
            bundle, panel.panel_id, panel.params, panel.sweep, panel.nu_p, panel.convention, config.workers
        )
    return run_localize_panel(
        bundle,
        panel.panel_id,
        panel.params,
        panel.sweep,
        panel.convention,
        config.workers,
        roots=panel.params.gamma2 == 0,
    )


def _fig2_comparisons(panels: Dict[str, Dict[str, Any]], figure_panels: List[Panel]) -> Dict[str, Any]:
    check = kramers_kronig_check(figure_panels[0].params, figure_panels[0].convention)
    return {
        "kramers_kronig": check.to_dict(),
        "sign_crossings": len(panels["fig2e"]["sign_crossings"]),
    }


def _fig3_comparisons(panels: Dict[str, Dict[str, Any]], figure_panels: List[Panel]) -> Dict[str, Any]:
    spans = {panel_id: panels[panel_id]["span"] for panel_id in ("fig3a", "fig3b", "fig3c")}
    # the strongly absorbing regime of the previous figure, swept the same way
    reference_panel = get_figures_registry()["fig2"].panels()[-1]
    reference = most_superluminal(
        phase_sweep(
            reference_panel.params, reference_panel.nu_p, reference_panel.sweep.grid(), reference_panel.convention
        )
    )
    assert reference is not None
    absorption = {
        panel_id: panels[panel_id]["most_superluminal"]["chi_double_prime"] for panel_id in ("fig3a", "fig3b", "fig3c")
    }
    return {
        "spans": spans,
        "wider_range_off_resonance": spans["fig3a"] > spans["fig3b"] and spans["fig3c"] > spans["fig3b"],
        "most_superluminal_chi_double_prime": absorption,
        "reference_chi_double_prime": reference.chi_double_prime,
        "less_absorption": all(value < reference.chi_double_prime for value in absorption.values()),
    }


def _opposite(first: Dict[str, Any], second: Dict[str, Any]) -> bool:
    return first["half"] is not None and second["half"] is not None and first["half"] != second["half"]


def _localization_comparisons(figure: str, panels: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    box = {panel_id[len(figure) :]: summary for panel_id, summary in panels.items()}
    localized = [box[label] for label in "acdf"]
    pattern_ok = all(
        b["classification"] == Confinement.SUB_HALF_WAVELENGTH.value and b["peak_count"] == 2 for b in localized
    ) and all(box[label]["classification"] == Confinement.BOUNDARY_CENTERED.value for label in "be")
    fwhms = [p["fwhm"] for b in localized for p in b["peaks"]]
    return {
        "pattern": {label: (b["classification"], b["half"]) for label, b in sorted(box.items())},
        "matches_expected_pattern": pattern_ok
        and _opposite(box["a"], box["c"])
        and _opposite(box["a"], box["d"])
        and _opposite(box["c"], box["f"])
        and _opposite(box["d"], box["f"]),
        "mean_fwhm": sum(fwhms) / len(fwhms) if fwhms else None,
        "coincident_root_sign": {label: box[label].get("coincident_root_sign") for label in "acdf"},
    }


def _fig4_comparisons(panels: Dict[str, Dict[str, Any]], figure_panels: List[Panel]) -> Dict[str, Any]:
    return _localization_comparisons("fig4", panels)


def _reference_mean_fwhm(figure: str) -> float:
    fwhms = []
    for panel in get_figures_registry()[figure].panels():
        if panel.label not in "acdf":
            continue
        profile = scan_profile(panel.params, panel.sweep.count, panel.convention)
        fwhms.extend(p.fwhm for p in find_peaks(profile, profile.evaluator()))
    return sum(fwhms) / len(fwhms)


def _fig5_comparisons(panels: Dict[str, Dict[str, Any]], figure_panels: List[Panel]) -> Dict[str, Any]:
    comparisons = _localization_comparisons("fig5", panels)
    reference = _reference_mean_fwhm("fig4")
    comparisons["reference_mean_fwhm"] = reference
    mean_fwhm = comparisons["mean_fwhm"]
    comparisons["sharper_than_reference"] = mean_fwhm is not None and mean_fwhm < reference
    return comparisons


FIGURE_COMPARISONS = {
    "fig2": _fig2_comparisons,
    "fig3": _fig3_comparisons,
    "fig4": _fig4_comparisons,
    "fig5": _fig5_comparisons,
}


def cmd_repro(
    figure: str, config: RunConfig, usage_logger: Optional[UsageLoggerInterface] = None
) -> Dict[str, Any]:
    """
    Runs every panel of 'figure' with its reference parameters. A failing panel still leaves a manifest behind,
    marked failed and listing what was written before it.
    """
    registry = get_figures_registry()
    if figure not in registry:
        raise ValidationError("figure is one of " + ", ".join(sorted(registry)), f"got {figure!r}")
    figure_config = registry[figure]
    figure_panels = figure_config.panels()

    bundle = OutputBundle(config.out_dir, f"repro {figure}", config, usage_logger)
    bundle.record("figure", {"id": figure, "description": figure_config.description})
    bundle.record("units", _unit_mapping(figure_config.unit))
    convention_section: Dict[str, Any] = _convention_section(DEFAULT_CONVENTION)
    convention_section["used"] = sorted({panel.convention.value for panel in figure_panels})
    if figure_config.unit == UNIT_GAMMA1:
        convention_section["pinned"] = "detunings follow the c = 1 coincidence condition"
    convention_section["adjudication"] = _adjudication_summary(
        adjudicate_convention(config.seed, max(config.points, MIN_ADJUDICATION_POINTS), config.workers)
    )
    bundle.record("convention", convention_section)

    panels: Dict[str, Dict[str, Any]] = {}
    for panel in figure_panels:
        try:
            with bundle.timed(panel.panel_id):
                panels[panel.panel_id] = _run_panel(bundle, panel, config)
        except Exception as e:
            bundle.record("panels", panels)
            bundle.record("failure", {"panel": panel.panel_id, "error": f"{type(e).__name__}: {e}"})
            bundle.finish(status="failed")
            raise PanelFailure(panel.panel_id, e) from e

    bundle.record("panels", panels)
    with bundle.timed(f"{figure} comparisons"):
        bundle.record("comparisons", FIGURE_COMPARISONS[figure](panels, figure_panels))
    return bundle.finish()


def cmd_adjudicate(config: RunConfig, usage_logger: Optional[UsageLoggerInterface] = None) -> AdjudicationReport:
    if config.points < MIN_ADJUDICATION_POINTS:
        raise ValidationError(f"points >= {MIN_ADJUDICATION_POINTS}", f"got {config.points}")
    bundle = OutputBundle(config.out_dir, "adjudicate", config, usage_logger)
    with bundle.timed("adjudication"):
        report = adjudicate_convention(config.seed, config.points, config.workers, config.probe_rabi)
    bundle.write_json("adjudication.json", report.to_dict())
    bundle.record(
        "convention",
        {
            "default": DEFAULT_CONVENTION.value,
            "adjudicated": report.winning_convention.value if report.winning_convention is not None else None,
            "adjudication": _adjudication_summary(report),
        },
    )
    if report.status is AdjudicationStatus.INCONCLUSIVE:
        bundle.finish(status="inconclusive")
        raise InconclusiveAdjudication(
            "the oracle does not single out one phase-term convention", report=report.to_dict()
        )
    bundle.finish()
    return report
