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
Probe absorption along a standing-wave drive and the peak structure it produces.

The |a1>-|b> field is a standing wave, omega1 -> omega1 sin(kx), so chi'' becomes a function of s = sin(kx) alone.
With a metastable |a2> (gamma2 = 0) absorption peaks sit where A(s) = 0:

    A(s) = 2 delta omega1^2 s^2 + c omega1 omega2 omega3 cos(phi) s + 2 delta (omega2^2 + omega3^2) - 8 delta^3

Coincident roots of A collapse the four peaks of a period into two, which can then share one half-wavelength.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import optimize, signal

from loopchi.exceptions import DegenerateDenominator, InvalidParameters, ProfileHasGaps, RequiresMetastable
from loopchi.log import get_logger_adapter
from loopchi.susceptibility import (
    DEFAULT_CONVENTION,
    EPSILON_DENOMINATOR,
    DriveParams,
    PhaseConvention,
    chi_from_arrays,
)
from loopchi.utils import chunked_evaluate

logger = get_logger_adapter(__name__)

DEFAULT_SCAN_POINTS = 10001
MIN_SCAN_POINTS = 64
BOUNDARY_TOLERANCE = 1e-3
# discriminants this small relative to their terms are a double root
DISCRIMINANT_RTOL = 1e-12
# the closed-form roots and coincidence detunings assume c = 1
ROOTS_CONVENTION = PhaseConvention.EQ9_CONSISTENT


def wrap_angle(x: float) -> float:
    """
    Maps x into (-pi, pi].
    """
    wrapped = math.remainder(x, 2 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


def periodic_grid(n_points: int) -> np.ndarray:
    """
    n_points uniform samples of (-pi, pi]; -pi is the same point as pi and is not repeated.
    """
    return np.linspace(-math.pi, math.pi, n_points + 1)[1:]


@dataclass(frozen=True)
class StandingWaveParams:
    base: DriveParams
    kx: float

    def __post_init__(self) -> None:
        if not -math.pi < self.kx <= math.pi:
            raise InvalidParameters("kx in (-pi, pi]", f"got {self.kx!r}")

    @property
    def effective_omega1(self) -> float:
        return self.base.omega1 * math.sin(self.kx)


def standing_chi_pp(
    base: DriveParams, kx: np.ndarray, convention: PhaseConvention = DEFAULT_CONVENTION
) -> np.ndarray:
    """
    Vectorized chi''(kx) with omega1 -> omega1 sin(kx) in both A and B. NaN at degenerate points.
    """
    params = base.to_dict()
    params["omega1"] = base.omega1 * np.sin(kx)
    return np.asarray(chi_from_arrays(**params, convention=convention)).imag


def chi_pp_standing(sw: StandingWaveParams, convention: PhaseConvention = DEFAULT_CONVENTION) -> float:
    value = float(standing_chi_pp(sw.base, np.asarray(sw.kx), convention))
    if math.isnan(value):
        raise DegenerateDenominator(0.0, EPSILON_DENOMINATOR)
    return value


@dataclass(frozen=True, eq=False)
class LocalizationProfile:
    kx: np.ndarray
    # NaN marks a gap
    chi_double_prime: np.ndarray
    params: DriveParams
    convention: PhaseConvention

    def __post_init__(self) -> None:
        assert self.kx.shape == self.chi_double_prime.shape and self.kx.ndim == 1
        assert np.all(np.diff(self.kx) > 0), "kx must be strictly increasing"
        assert -math.pi < self.kx[0] and math.isclose(self.kx[-1], math.pi), "profile must cover (-pi, pi] once"

    @property
    def n_points(self) -> int:
        return len(self.kx)

    @property
    def spacing(self) -> float:
        return 2 * math.pi / self.n_points

    @property
    def gap_count(self) -> int:
        return int(np.count_nonzero(~np.isfinite(self.chi_double_prime)))

    def evaluator(self) -> Callable[[float], float]:
        def evaluate(kx: float) -> float:
            return float(standing_chi_pp(self.params, np.asarray(kx), self.convention))

        return evaluate


def scan_profile(
    base: DriveParams,
    n_points: int = DEFAULT_SCAN_POINTS,
    convention: PhaseConvention = DEFAULT_CONVENTION,
    workers: int = 1,
) -> LocalizationProfile:
    if n_points < MIN_SCAN_POINTS:
        raise InvalidParameters(f"n_points >= {MIN_SCAN_POINTS}", f"got {n_points}")
    kx = periodic_grid(n_points)
    values = chunked_evaluate(lambda chunk: standing_chi_pp(base, chunk, convention), kx, workers)
    profile = LocalizationProfile(kx, values, base, convention)
    if profile.gap_count:
        logger.warning("Profile has singular points, recorded as gaps", gaps=profile.gap_count)
    return profile


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float
    # half-maximum crossings, unwrapped around position (may leave (-pi, pi] for peaks near the boundary)
    left_edge: float
    right_edge: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "position": self.position,
            "height": self.height,
            "fwhm": self.fwhm,
            "left_edge": self.left_edge,
            "right_edge": self.right_edge,
        }


def _quadratic_vertex(left: float, center: float, right: float) -> Tuple[float, float]:
    """
    (offset in grid steps, height) of the parabola through three equally spaced samples.
    """
    curvature = left - 2 * center + right
    if curvature >= 0:
        return 0.0, center
    offset = min(max(0.5 * (left - right) / curvature, -0.5), 0.5)
    return offset, center - 0.25 * (left - right) * offset


def _half_height_crossing(
    y: np.ndarray,
    start: int,
    direction: int,
    x0: float,
    spacing: float,
    level: float,
    evaluator: Optional[Callable[[float], float]],
) -> Optional[float]:
    """
    Walks from sample 'start' in 'direction' until the profile drops below 'level' and returns the crossing in the
    unwrapped coordinate x0 + k * spacing. None if the level is never crossed within one period.
    """
    n = len(y)
    for k in range(1, n):
        if y[(start + direction * k) % n] < level:
            inside = x0 + direction * (k - 1) * spacing
            outside = x0 + direction * k * spacing
            y_inside = y[(start + direction * (k - 1)) % n]
            y_outside = y[(start + direction * k) % n]
            if evaluator is not None:
                try:
                    return float(optimize.bisect(lambda x: evaluator(x) - level, inside, outside, xtol=1e-13))
                except ValueError:
                    pass
            return inside + (outside - inside) * (y_inside - level) / (y_inside - y_outside)
    return None


def find_peaks(profile: LocalizationProfile, evaluator: Optional[Callable[[float], float]] = None) -> List[Peak]:
    """
    Periodic maximum detection with 3-point quadratic refinement and wrap-aware FWHM.
    'evaluator' (kx -> chi'') refines the half-maximum crossings on the exact profile.
    """
    if profile.gap_count:
        raise ProfileHasGaps(f"profile has {profile.gap_count} gap(s); peaks are undefined across a pole")

    y = profile.chi_double_prime
    n = profile.n_points
    spacing = profile.spacing
    if np.ptp(y) == 0:
        return []

    # start the padded copy at the global minimum so no maximum plateau straddles the ends
    shift = int(np.argmin(y))
    rolled = np.roll(y, -shift)
    candidates, _ = signal.find_peaks(np.concatenate([rolled[-1:], rolled, rolled[:1]]))
    indices = sorted(int((c - 1 + shift) % n) for c in candidates if 1 <= c <= n)

    peaks: List[Peak] = []
    for index in indices:
        offset, height = _quadratic_vertex(y[(index - 1) % n], y[index], y[(index + 1) % n])
        if height <= 0:
            continue
        unwrapped = profile.kx[index] + offset * spacing
        position = wrap_angle(unwrapped)
        level = height / 2
        right = _half_height_crossing(y, index, 1, profile.kx[index], spacing, level, evaluator)
        left = _half_height_crossing(y, index, -1, profile.kx[index], spacing, level, evaluator)
        if left is None or right is None:
            fwhm = 2 * math.pi
            left, right = unwrapped - math.pi, unwrapped + math.pi
        else:
            fwhm = right - left
        correction = position - unwrapped
        peaks.append(Peak(position, float(height), float(fwhm), float(left + correction), float(right + correction)))

    return _merge_close_peaks(peaks, spacing)


def _circular_distance(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


def _merge_close_peaks(peaks: List[Peak], spacing: float) -> List[Peak]:
    merged: List[Peak] = []
    for peak in sorted(peaks, key=lambda p: p.position):
        if merged and _circular_distance(merged[-1].position, peak.position) < spacing:
            if peak.height > merged[-1].height:
                merged[-1] = peak
            continue
        merged.append(peak)
    if len(merged) > 1 and _circular_distance(merged[0].position, merged[-1].position) < spacing:
        if merged[0].height >= merged[-1].height:
            merged.pop()
        else:
            merged.pop(0)
    return merged


class Confinement(str, Enum):
    SUB_HALF_WAVELENGTH = "sub_half_wavelength"
    FULL_WAVELENGTH = "full_wavelength"
    BOUNDARY_CENTERED = "boundary_centered"
    NO_PEAKS = "no_peaks"


class HalfWavelength(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class ConfinementReport:
    peak_count: int
    classification: Confinement
    half: Optional[HalfWavelength]
    peaks: Tuple[Peak, ...]

    def __post_init__(self) -> None:
        assert (self.half is not None) == (self.classification is Confinement.SUB_HALF_WAVELENGTH)
        assert self.peak_count == len(self.peaks)

    @property
    def mean_fwhm(self) -> float:
        return sum(p.fwhm for p in self.peaks) / len(self.peaks) if self.peaks else math.nan

    def to_dict(self) -> Dict[str, object]:
        return {
            "peak_count": self.peak_count,
            "classification": self.classification.value,
            "half": self.half.value if self.half is not None else None,
            "peaks": [p.to_dict() for p in self.peaks],
        }


def _is_boundary_centered(position: float) -> bool:
    distance_to_zero = abs(wrap_angle(position))
    return min(distance_to_zero, math.pi - distance_to_zero) <= BOUNDARY_TOLERANCE


def classify_confinement(peaks: List[Peak]) -> ConfinementReport:
    """
    The whole half-maximum interval of every peak has to fit in one half-period for sub-half-wavelength confinement.
    """
    peaks_tuple = tuple(peaks)
    if not peaks:
        return ConfinementReport(0, Confinement.NO_PEAKS, None, peaks_tuple)
    if any(_is_boundary_centered(p.position) for p in peaks):
        return ConfinementReport(len(peaks), Confinement.BOUNDARY_CENTERED, None, peaks_tuple)
    if all(0 < p.left_edge and p.right_edge < math.pi for p in peaks):
        return ConfinementReport(len(peaks), Confinement.SUB_HALF_WAVELENGTH, HalfWavelength.POSITIVE, peaks_tuple)
    if all(-math.pi < p.left_edge and p.right_edge < 0 for p in peaks):
        return ConfinementReport(len(peaks), Confinement.SUB_HALF_WAVELENGTH, HalfWavelength.NEGATIVE, peaks_tuple)
    return ConfinementReport(len(peaks), Confinement.FULL_WAVELENGTH, None, peaks_tuple)


@dataclass(frozen=True)
class RootPair:
    """
    Roots in s = sin(kx) of A(s). A single value means A degenerated to a linear function (delta = 0).
    """

    values: Tuple[float, ...]

    @property
    def coincident(self) -> bool:
        return len(self.values) == 2 and self.values[0] == self.values[1]

    @property
    def reachable(self) -> Tuple[float, ...]:
        return tuple(r for r in self.values if abs(r) <= 1)

    @property
    def unreachable(self) -> Tuple[float, ...]:
        return tuple(r for r in self.values if abs(r) > 1)

    def to_dict(self) -> Dict[str, object]:
        return {"values": list(self.values), "coincident": self.coincident, "unreachable": list(self.unreachable)}


def _scaled_discriminant(
    omega2: float, omega3: float, phi: float, delta: float, convention: PhaseConvention
) -> Tuple[float, float]:
    """
    (discriminant / omega1^2, magnitude of its terms) of A(s).
    """
    cross = convention.cross_term_coefficient * omega2 * omega3 * math.cos(phi)
    drive = omega2**2 + omega3**2
    discriminant = cross**2 - 16 * delta**2 * (drive - 4 * delta**2)
    scale = cross**2 + 16 * delta**2 * drive + 64 * delta**4
    return discriminant, scale


def roots_r(base: DriveParams, convention: PhaseConvention = ROOTS_CONVENTION) -> Optional[RootPair]:
    """
    Roots of A(s) = a s^2 + b s + c0 with a = 2 delta omega1^2, b = c omega1 omega2 omega3 cos(phi),
    c0 = 2 delta (omega2^2 + omega3^2) - 8 delta^3. None when A has no real root in s (or does not depend on s).
    """
    if base.gamma2 != 0:
        raise RequiresMetastable(base.gamma2)

    delta = base.delta
    a = 2 * delta * base.omega1**2
    b = convention.cross_term_coefficient * base.omega1 * base.omega2 * base.omega3 * math.cos(base.phi)
    c0 = 2 * delta * (base.omega2**2 + base.omega3**2) - 8 * delta**3

    if a == 0:
        if b == 0:
            return None
        return RootPair((-c0 / b,))

    discriminant, scale = _scaled_discriminant(base.omega2, base.omega3, base.phi, delta, convention)
    if abs(discriminant) <= DISCRIMINANT_RTOL * scale:
        double_root = -b / (2 * a)
        return RootPair((double_root, double_root))
    if discriminant < 0:
        return None

    sqrt_discriminant = base.omega1 * math.sqrt(discriminant)
    if b == 0:
        return RootPair((sqrt_discriminant / (2 * a), -sqrt_discriminant / (2 * a)))
    # numerically stable pair: q = -(b + sign(b) sqrt(disc)) / 2
    q = -0.5 * (b + math.copysign(sqrt_discriminant, b))
    first, second = q / a, c0 / q
    return RootPair((max(first, second), min(first, second)))


class PhaseCase(str, Enum):
    # phi = 0 or pi
    IN_PHASE = "in_phase"
    # phi = pi / 2
    QUADRATURE = "quadrature"


def coincidence_detunings(
    omega: float, phi_case: PhaseCase, convention: PhaseConvention = ROOTS_CONVENTION
) -> List[float]:
    """
    Detunings at which the two roots of A(s) coincide for omega2 = omega3 = omega, ascending.
    In phase: 64 delta^4 - 32 omega^2 delta^2 + c^2 omega^4 = 0, i.e. delta^2 = omega^2 (2 -+ sqrt(4 - c^2)) / 8,
    which for c = 1 is delta = (omega / 4)(sqrt(3) -+ 1). In quadrature: delta = 0 and delta = +-omega / sqrt(2).
    """
    if not omega > 0:
        raise InvalidParameters("omega > 0", f"got {omega!r}")

    if phi_case is PhaseCase.QUADRATURE:
        return [-omega / math.sqrt(2), 0.0, omega / math.sqrt(2)]

    c = convention.cross_term_coefficient
    if c == 1.0:
        inner, outer = omega * (math.sqrt(3) - 1) / 4, omega * (math.sqrt(3) + 1) / 4
    else:
        root = math.sqrt(4 - c**2)
        inner, outer = omega * math.sqrt((2 - root) / 8), omega * math.sqrt((2 + root) / 8)
    positive = sorted({inner, outer})
    return [-d for d in reversed(positive)] + positive


def solve_coincidence_detunings(
    omega: float,
    phi: float = 0.0,
    convention: PhaseConvention = ROOTS_CONVENTION,
    n_grid: int = 4001,
) -> List[float]:
    """
    Numerical counterpart of coincidence_detunings: the delta > 0 at which R1 = R2, found as zeros of the
    discriminant of A(s) on (0, omega]. Sign changes are refined with brentq; touching zeros by bounded
    minimization of the discriminant.
    """
    if not omega > 0:
        raise InvalidParameters("omega > 0", f"got {omega!r}")

    def discriminant(delta: float) -> float:
        return _scaled_discriminant(omega, omega, phi, delta, convention)[0]

    def scale(delta: float) -> float:
        return _scaled_discriminant(omega, omega, phi, delta, convention)[1]

    grid = np.linspace(0.0, omega, n_grid)[1:]
    values = np.array([discriminant(d) for d in grid])
    roots: List[float] = []
    for i in range(len(grid) - 1):
        if values[i] == 0:
            roots.append(float(grid[i]))
        elif values[i] * values[i + 1] < 0:
            roots.append(float(optimize.brentq(discriminant, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15)))
    for i in range(1, len(grid) - 1):
        # a zero the discriminant only touches
        if values[i] > 0 and values[i] <= values[i - 1] and values[i] <= values[i + 1]:
            result = optimize.minimize_scalar(
                discriminant, bounds=(grid[i - 1], grid[i + 1]), method="bounded", options={"xatol": 1e-13}
            )
            if abs(result.fun) <= 1e-9 * scale(result.x):
                roots.append(float(result.x))

    distinct: List[float] = []
    for root in sorted(roots):
        # a double zero can be bracketed from both sides
        if not distinct or root - distinct[-1] > 1e-9 * omega:
            distinct.append(root)
    return distinct
