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
Kramers-Kronig consistency of the closed-form susceptibility.

chi(delta) is analytic in the lower half of the complex delta plane (its poles sit at Im(delta) > 0 for
nonzero decay), so chi' follows from chi'' alone:

    chi'(delta0) = -(1 / pi) P int chi''(delta') / (delta' - delta0) d delta'
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np
from scipy import integrate

from loopchi.exceptions import DegenerateDenominator, InvalidParameters
from loopchi.log import get_logger_adapter
from loopchi.susceptibility import (
    DEFAULT_CONVENTION,
    EPSILON_DENOMINATOR,
    DriveParams,
    PhaseConvention,
    chi_from_arrays,
    compute_chi,
)

logger = get_logger_adapter(__name__)

DEFAULT_HALF_WIDTH = 500.0
# the Cauchy-weighted part of the integral covers delta0 +- CAUCHY_WINDOW
CAUCHY_WINDOW = 50.0
QUAD_LIMIT = 1000
KK_TOLERANCE = 1e-2


def _chi_double_prime(params: DriveParams, convention: PhaseConvention) -> Callable[[float], float]:
    values = params.to_dict()
    del values["delta"]

    def evaluate(delta: float) -> float:
        value = float(np.asarray(chi_from_arrays(**values, delta=delta, convention=convention)).imag)
        if math.isnan(value):
            raise DegenerateDenominator(0.0, EPSILON_DENOMINATOR)
        return value

    return evaluate


def reconstruct_chi_prime(
    params: DriveParams,
    convention: PhaseConvention = DEFAULT_CONVENTION,
    delta0: float = 0.0,
    half_width: float = DEFAULT_HALF_WIDTH,
) -> float:
    """
    chi'(delta0) from chi'' over [delta0 - half_width, delta0 + half_width]. The delta field of 'params' is ignored.
    """
    if not half_width > 0:
        raise InvalidParameters("half_width > 0", f"got {half_width!r}")
    chi_pp = _chi_double_prime(params, convention)
    window = min(CAUCHY_WINDOW, half_width)
    lower, upper = delta0 - half_width, delta0 + half_width

    principal, _ = integrate.quad(
        chi_pp, delta0 - window, delta0 + window, weight="cauchy", wvar=delta0, limit=QUAD_LIMIT
    )
    tails = 0.0
    if half_width > window:

        def kernel(x: float) -> float:
            return chi_pp(x) / (x - delta0)

        left, _ = integrate.quad(kernel, lower, delta0 - window, limit=QUAD_LIMIT)
        right, _ = integrate.quad(kernel, delta0 + window, upper, limit=QUAD_LIMIT)
        tails = left + right
    return -(principal + tails) / math.pi


@dataclass(frozen=True)
class KramersKronigCheck:
    delta0: float
    direct: float
    reconstructed: float
    half_width: float

    @property
    def difference(self) -> float:
        return abs(self.direct - self.reconstructed)

    @property
    def consistent(self) -> bool:
        return self.difference <= KK_TOLERANCE

    def to_dict(self) -> Dict[str, object]:
        return {
            "delta0": self.delta0,
            "direct": self.direct,
            "reconstructed": self.reconstructed,
            "difference": self.difference,
            "half_width": self.half_width,
            "consistent": self.consistent,
        }


def kramers_kronig_check(
    params: DriveParams,
    convention: PhaseConvention = DEFAULT_CONVENTION,
    delta0: float = 0.0,
    half_width: float = DEFAULT_HALF_WIDTH,
) -> KramersKronigCheck:
    """
    Diagnostic only: the truncated window and the quadrature both limit the agreement.
    """
    direct = compute_chi(params.replace(delta=delta0), convention).chi_prime
    reconstructed = reconstruct_chi_prime(params, convention, delta0, half_width)
    check = KramersKronigCheck(delta0, direct, reconstructed, half_width)
    if not check.consistent:
        logger.warning("Kramers-Kronig reconstruction disagrees", delta0=delta0, difference=check.difference)
    else:
        logger.debug("Kramers-Kronig reconstruction agrees", delta0=delta0, difference=check.difference)
    return check
