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
Group index of the probe and its dependence on the loop phase and the detuning.

    n_g - 1 = 2 pi chi' + 2 pi nu_p d(chi')/d(nu_p),    d/d(nu_p) = -d/d(delta)

Positive n_g - 1 is subluminal, negative is superluminal. Output is in units of the susceptibility prefactor.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from loopchi.exceptions import InvalidParameters
from loopchi.log import get_logger_adapter
from loopchi.susceptibility import (
    DEFAULT_CONVENTION,
    DriveParams,
    PhaseConvention,
    chi_grid,
    compute_chi,
    d_chi_d_delta,
    d_chi_grid,
)

logger = get_logger_adapter(__name__)

DEFAULT_NU_P = 1000.0
CROSSING_TOLERANCE = 1e-9
MAX_BISECTION_ITERATIONS = 200


class SweepAxis(str, Enum):
    PHI = "phi"
    DELTA = "delta"


class Propagation(str, Enum):
    SUBLUMINAL = "subluminal"
    SUPERLUMINAL = "superluminal"


def classify_propagation(ng_minus_one: float) -> Optional[Propagation]:
    if ng_minus_one > 0:
        return Propagation.SUBLUMINAL
    if ng_minus_one < 0:
        return Propagation.SUPERLUMINAL
    return None


@dataclass(frozen=True)
class GroupIndexPoint:
    sweep_value: float
    # NaN marks a gap (singular point)
    ng_minus_one: float
    chi_double_prime: float

    @property
    def is_gap(self) -> bool:
        return not (math.isfinite(self.ng_minus_one) and math.isfinite(self.chi_double_prime))


@dataclass(frozen=True)
class SweepSeries:
    axis: SweepAxis
    points: Tuple[GroupIndexPoint, ...]
    params: DriveParams
    nu_p: float
    convention: PhaseConvention

    def __post_init__(self) -> None:
        assert len(self.points) >= 2, "a sweep needs at least 2 points"
        values = [p.sweep_value for p in self.points]
        assert all(a < b for a, b in zip(values, values[1:])), "sweep axis must be strictly increasing"

    @property
    def values(self) -> np.ndarray:
        return np.array([p.sweep_value for p in self.points])

    @property
    def ng_minus_one(self) -> np.ndarray:
        return np.array([p.ng_minus_one for p in self.points])

    @property
    def chi_double_prime(self) -> np.ndarray:
        return np.array([p.chi_double_prime for p in self.points])

    @property
    def gap_count(self) -> int:
        return sum(p.is_gap for p in self.points)

    def valid_points(self) -> List[GroupIndexPoint]:
        return [p for p in self.points if not p.is_gap]

    def evaluator(self) -> Callable[[float], float]:
        axis = self.axis.value

        def evaluate(value: float) -> float:
            return group_index(self.params.replace(**{axis: value}), self.nu_p, self.convention)

        return evaluate


@dataclass(frozen=True)
class SignCrossing:
    lower: float
    upper: float
    root: float
    residual: float
    iterations: int
    below: Propagation
    above: Propagation

    @property
    def converged(self) -> bool:
        return self.residual <= CROSSING_TOLERANCE


def group_index(
    params: DriveParams,
    nu_p: float = DEFAULT_NU_P,
    convention: PhaseConvention = DEFAULT_CONVENTION,
    finite_difference_step: Optional[float] = None,
) -> float:
    if not nu_p > 0:
        raise InvalidParameters("nu_p > 0", f"got {nu_p!r}")
    chi_prime = compute_chi(params, convention).chi_prime
    if finite_difference_step is None:
        d_chi_prime = d_chi_d_delta(params, convention).real
    else:
        h = finite_difference_step
        upper = compute_chi(params.replace(delta=params.delta + h), convention).chi_prime
        lower = compute_chi(params.replace(delta=params.delta - h), convention).chi_prime
        d_chi_prime = (upper - lower) / (2 * h)
    return 2 * math.pi * chi_prime - 2 * math.pi * nu_p * d_chi_prime


def group_index_grid(
    params: DriveParams,
    axis: SweepAxis,
    values: np.ndarray,
    nu_p: float = DEFAULT_NU_P,
    convention: PhaseConvention = DEFAULT_CONVENTION,
    workers: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized (n_g - 1, chi'') along one axis; NaN at singular points.
    """
    if not nu_p > 0:
        raise InvalidParameters("nu_p > 0", f"got {nu_p!r}")
    chi = chi_grid(params, axis.value, values, convention, workers)
    d_chi = d_chi_grid(params, axis.value, values, convention, workers)
    ng_minus_one = 2 * math.pi * chi.real - 2 * math.pi * nu_p * d_chi.real
    return ng_minus_one, chi.imag


def _sweep(
    params: DriveParams,
    axis: SweepAxis,
    grid: Sequence[float],
    nu_p: float,
    convention: PhaseConvention,
    workers: int,
) -> SweepSeries:
    values = np.asarray(grid, dtype=float)
    if values.ndim != 1 or len(values) < 2:
        raise InvalidParameters("sweep grid has at least 2 points", f"got {len(values)}")
    if not np.all(np.diff(values) > 0):
        raise InvalidParameters("sweep grid strictly increasing", f"{axis.value} grid is not")

    ng_minus_one, chi_double_prime = group_index_grid(params, axis, values, nu_p, convention, workers)
    series = SweepSeries(
        axis=axis,
        points=tuple(
            GroupIndexPoint(float(v), float(n), float(c)) for v, n, c in zip(values, ng_minus_one, chi_double_prime)
        ),
        params=params,
        nu_p=nu_p,
        convention=convention,
    )
    if series.gap_count:
        logger.warning("Sweep has singular points, recorded as gaps", axis=axis.value, gaps=series.gap_count)
    return series


def phase_sweep(
    params: DriveParams,
    nu_p: float,
    phi_grid: Sequence[float],
    convention: PhaseConvention = DEFAULT_CONVENTION,
    workers: int = 1,
) -> SweepSeries:
    return _sweep(params, SweepAxis.PHI, phi_grid, nu_p, convention, workers)


def detuning_sweep(
    params: DriveParams,
    nu_p: float,
    delta_grid: Sequence[float],
    convention: PhaseConvention = DEFAULT_CONVENTION,
    workers: int = 1,
) -> SweepSeries:
    return _sweep(params, SweepAxis.DELTA, delta_grid, nu_p, convention, workers)


def find_sign_crossings(
    series: SweepSeries,
    evaluator: Optional[Callable[[float], float]] = None,
    tolerance: float = CROSSING_TOLERANCE,
    max_iterations: int = MAX_BISECTION_ITERATIONS,
) -> List[SignCrossing]:
    """
    Brackets every adjacent pair of samples where n_g - 1 changes sign and refines the root by bisection.
    Pairs touching a gap are skipped.
    """
    f = evaluator if evaluator is not None else series.evaluator()
    crossings = []
    for left, right in zip(series.points, series.points[1:]):
        if left.is_gap or right.is_gap or left.ng_minus_one * right.ng_minus_one >= 0:
            continue
        below = classify_propagation(left.ng_minus_one)
        above = classify_propagation(right.ng_minus_one)
        assert below is not None and above is not None
        try:
            root, result = optimize.bisect(
                f,
                left.sweep_value,
                right.sweep_value,
                xtol=1e-15,
                rtol=4 * np.finfo(float).eps,
                maxiter=max_iterations,
                full_output=True,
                disp=False,
            )
        except (ValueError, ArithmeticError):
            # the evaluator disagrees with the sampled sign at an endpoint, or hits a singular point inside
            logger.warning("Sign change not reproduced by evaluator", lower=left.sweep_value, upper=right.sweep_value)
            continue
        residual = float(abs(f(root)))
        crossing = SignCrossing(
            lower=left.sweep_value,
            upper=right.sweep_value,
            root=float(root),
            residual=residual,
            iterations=int(result.iterations),
            below=below,
            above=above,
        )
        if residual > tolerance:
            logger.warning("Sign crossing did not reach tolerance", root=crossing.root, residual=residual)
        crossings.append(crossing)
    return crossings


def sweep_span(series: SweepSeries) -> float:
    """
    Range of group indices reachable along the sweep: max - min of n_g - 1 over non-gap points.
    """
    values = [p.ng_minus_one for p in series.valid_points()]
    if not values:
        return math.nan
    return max(values) - min(values)


def max_abs_group_index(series: SweepSeries) -> float:
    values = [abs(p.ng_minus_one) for p in series.valid_points()]
    return max(values) if values else math.nan


def most_superluminal(series: SweepSeries) -> Optional[GroupIndexPoint]:
    return min(series.valid_points(), key=lambda p: p.ng_minus_one, default=None)
