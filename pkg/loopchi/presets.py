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
Figure presets: every panel of the four reproduced figures with its reference parameters.

Figures 2-3 are quoted in units of a common rate gamma; figures 4-5 in units of gamma1.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional

from loopchi.group_velocity import DEFAULT_NU_P
from loopchi.localization import ROOTS_CONVENTION, PhaseCase, coincidence_detunings
from loopchi.loopchi_types import SweepKind, SweepSpec
from loopchi.susceptibility import DEFAULT_CONVENTION, DriveParams, PhaseConvention

UNIT_GAMMA = "gamma"
UNIT_GAMMA1 = "gamma1"

CHI_SWEEP = SweepSpec(SweepKind.DELTA, -6.0, 6.0, 1201)
PHASE_SWEEP = SweepSpec(SweepKind.PHI, 0.0, 2 * math.pi, 721)
PROFILE_SWEEP = SweepSpec(SweepKind.KX, -math.pi, math.pi, 10001)


class PanelKind(str, Enum):
    CHI = "chi"
    GROUP_INDEX = "group-index"
    LOCALIZE = "localize"


SWEEP_KIND_OF_PANEL = {
    PanelKind.CHI: SweepKind.DELTA,
    PanelKind.GROUP_INDEX: SweepKind.PHI,
    PanelKind.LOCALIZE: SweepKind.KX,
}


@dataclass(frozen=True)
class Panel:
    figure: str
    label: str
    kind: PanelKind
    params: DriveParams
    sweep: SweepSpec
    convention: PhaseConvention = DEFAULT_CONVENTION
    nu_p: float = DEFAULT_NU_P
    unit: str = UNIT_GAMMA

    def __post_init__(self) -> None:
        assert self.sweep.kind is SWEEP_KIND_OF_PANEL[self.kind], f"{self.panel_id}: sweep does not match panel kind"

    @property
    def panel_id(self) -> str:
        return f"{self.figure}{self.label}"


PanelsFactory = Callable[[], List[Panel]]


class FigureConfig:
    def __init__(self, description: str, unit: str, panels_factory: PanelsFactory):
        self.description = description
        self.unit = unit
        self._panels_factory = panels_factory

    def panels(self) -> List[Panel]:
        return self._panels_factory()


figures_config: Dict[str, FigureConfig] = {}


def register_figure(figure_name: str, description: str, unit: str) -> Callable[[PanelsFactory], PanelsFactory]:
    def figure_decorator(panels_factory: PanelsFactory) -> PanelsFactory:
        assert figure_name not in figures_config, f"{figure_name} is already registered!"
        figures_config[figure_name] = FigureConfig(description, unit, panels_factory)
        return panels_factory

    return figure_decorator


def get_figures_registry() -> Dict[str, FigureConfig]:
    return figures_config


def in_phase_detuning(omega: float, outer: bool) -> float:
    """
    The positive in-phase coincidence detuning of the localization panels: the inner one, or the outer one.
    """
    inner, outer_detuning = coincidence_detunings(omega, PhaseCase.IN_PHASE, ROOTS_CONVENTION)[2:]
    return outer_detuning if outer else inner


@register_figure("fig2", "Phase variation of group velocity, accompanied by absorption", UNIT_GAMMA)
def _fig2_panels() -> List[Panel]:
    base = DriveParams(omega1=2, omega2=2, omega3=2, gamma1=2, gamma2=2)
    panels = [
        Panel("fig2", label, PanelKind.CHI, base.replace(phi=phi), CHI_SWEEP)
        for label, phi in zip("abcd", (0.0, math.pi / 2, math.pi, 3 * math.pi / 2))
    ]
    panels.append(Panel("fig2", "e", PanelKind.GROUP_INDEX, base, PHASE_SWEEP))
    return panels


@register_figure("fig3", "Phase variation of group velocity, small absorption", UNIT_GAMMA)
def _fig3_panels() -> List[Panel]:
    base = DriveParams(omega1=10, omega2=1, omega3=1, gamma1=0.2, gamma2=0.2)
    panels = [
        Panel("fig3", label, PanelKind.GROUP_INDEX, base.replace(delta=delta), PHASE_SWEEP)
        for label, delta in zip("abc", (0.1, 0.0, -0.1))
    ]
    panels.append(Panel("fig3", "d", PanelKind.CHI, base, SweepSpec(SweepKind.DELTA, -15.0, 15.0, 3001)))
    # the small feature near line center, magnified
    panels.append(Panel("fig3", "e", PanelKind.CHI, base, SweepSpec(SweepKind.DELTA, -0.5, 0.5, 1001)))
    return panels


def _localization_panels(figure: str, omega: float, omega1: float, detuning: float) -> List[Panel]:
    # the detunings come from the c = 1 coincidence condition, so the profile is evaluated with the same coefficient
    base = DriveParams(omega1=omega1, omega2=omega, omega3=omega, gamma1=1, gamma2=0)
    labels = iter("abcdef")
    return [
        Panel(
            figure,
            next(labels),
            PanelKind.LOCALIZE,
            base.replace(phi=phi, delta=sign * detuning),
            PROFILE_SWEEP,
            convention=ROOTS_CONVENTION,
            unit=UNIT_GAMMA1,
        )
        for sign in (1, -1)
        for phi in (0.0, math.pi / 2, math.pi)
    ]


@register_figure("fig4", "Phase dependence of the localization at detuning +-delta1", UNIT_GAMMA1)
def _fig4_panels() -> List[Panel]:
    return _localization_panels("fig4", 20.0, 30.0, in_phase_detuning(20.0, outer=False))


@register_figure("fig5", "Phase dependence of the localization at detuning +-delta2", UNIT_GAMMA1)
def _fig5_panels() -> List[Panel]:
    return _localization_panels("fig5", 50.0, 60.0, in_phase_detuning(50.0, outer=True))


def all_panels() -> Dict[str, Panel]:
    return {panel.panel_id: panel for figure in figures_config.values() for panel in figure.panels()}


def get_preset(name: str) -> Optional[Panel]:
    """
    A figure name resolves to its first panel; a panel id ("fig4c") to that panel.
    """
    name = name.strip().lower()
    if name in figures_config:
        return figures_config[name].panels()[0]
    return all_panels().get(name)


def preset_names() -> List[str]:
    return sorted(figures_config) + sorted(all_panels())
