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
Weak-probe susceptibility of the four-level loop scheme.

Levels |a1>, |a2> decay at gamma1, gamma2; |b> and |c> are stable. The probe drives |a1>-|c>, and the three
loop fields drive |a1>-|b> (omega1), |a2>-|b> (omega2) and |a1>-|a2> (omega3). Only the collective phase phi
of the loop enters. With Y = A + iB:

    chi = K * (omega2^2 - 4 delta^2 + 2i gamma2 delta) / Y
    A   = -8 delta^3 + 2 delta (omega1^2 + omega2^2 + omega3^2 + gamma1 gamma2) + c omega1 omega2 omega3 cos(phi)
    B   = 4 delta^2 (gamma1 + gamma2) - (gamma1 omega2^2 + gamma2 omega1^2)

c is the phase-term coefficient selected by PhaseConvention. All rates are in units of a reference rate.
"""

import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Dict, Tuple, Union

import numpy as np

from loopchi.exceptions import DegenerateDenominator, InvalidParameters
from loopchi.utils import chunked_evaluate

ArrayLike = Union[float, np.ndarray]

# |Y|^2 underflow guard
EPSILON_DENOMINATOR = 1e-30


class PhaseConvention(str, Enum):
    # 2 omega1 omega2 omega3 cos(phi), i.e. (e^{i phi} + e^{-i phi}) as written in the A/B definitions
    EQ6_LITERAL = "eq6"
    # omega1 omega2 omega3 cos(phi), the coefficient the localization roots are derived with
    EQ9_CONSISTENT = "eq9"

    @property
    def cross_term_coefficient(self) -> float:
        return 2.0 if self is PhaseConvention.EQ6_LITERAL else 1.0


# Settled by adjudicate_convention: the density-matrix oracle reproduces c = 2.
DEFAULT_CONVENTION = PhaseConvention.EQ6_LITERAL


class Source(str, Enum):
    ANALYTIC = "analytic"
    ORACLE = "oracle"


PARAM_NAMES = ("omega1", "omega2", "omega3", "phi", "gamma1", "gamma2", "delta", "prefactor")
NONNEGATIVE_PARAMS = ("omega1", "omega2", "omega3", "gamma1", "gamma2")


@dataclass(frozen=True)
class DriveParams:
    omega1: float = 0.0
    omega2: float = 0.0
    omega3: float = 0.0
    phi: float = 0.0
    gamma1: float = 1.0
    gamma2: float = 1.0
    delta: float = 0.0
    prefactor: float = 1.0

    def __post_init__(self) -> None:
        for name in PARAM_NAMES:
            try:
                value = float(getattr(self, name))
            except (TypeError, ValueError):
                raise InvalidParameters(f"{name} is a real number", f"got {getattr(self, name)!r}")
            if not math.isfinite(value):
                raise InvalidParameters(f"{name} is finite", f"got {value!r}")
            object.__setattr__(self, name, value)
        for name in NONNEGATIVE_PARAMS:
            if getattr(self, name) < 0:
                raise InvalidParameters(f"{name} >= 0", f"got {getattr(self, name)!r}")
        if self.prefactor <= 0:
            raise InvalidParameters("prefactor > 0", f"got {self.prefactor!r}")

    def replace(self, **changes: Any) -> "DriveParams":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ComplexSusceptibility:
    chi_prime: float
    chi_double_prime: float
    source: Source

    def __post_init__(self) -> None:
        assert math.isfinite(self.chi_prime) and math.isfinite(self.chi_double_prime), self

    @property
    def value(self) -> complex:
        return complex(self.chi_prime, self.chi_double_prime)

    @classmethod
    def from_complex(cls, chi: complex, source: Source) -> "ComplexSusceptibility":
        return cls(float(chi.real), float(chi.imag), source)


def _y_terms(
    omega1: ArrayLike,
    omega2: ArrayLike,
    omega3: ArrayLike,
    phi: ArrayLike,
    gamma1: ArrayLike,
    gamma2: ArrayLike,
    delta: ArrayLike,
    coefficient: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Returns (A, B, N_re, N_im) where N is the numerator of chi/K.
    4 delta^2 and omega2^2 are shared between N and B so that sign(B) == -sign(N_re) holds exactly at
    gamma2 == 0; omega1 may be negative (standing-wave substitution).
    """
    omega1 = np.asarray(omega1, dtype=float)
    omega2_sq = np.square(omega2, dtype=float)
    four_delta_sq = 4.0 * np.square(delta, dtype=float)
    omega1_sq = np.square(omega1)
    a = (
        -2.0 * delta * four_delta_sq
        + 2.0 * delta * (omega1_sq + omega2_sq + np.square(omega3, dtype=float))
        + 2.0 * gamma1 * gamma2 * delta
        + coefficient * omega1 * omega2 * omega3 * np.cos(phi)
    )
    b = four_delta_sq * (gamma1 + gamma2) - (gamma1 * omega2_sq + gamma2 * omega1_sq)
    numerator_re = omega2_sq - four_delta_sq
    numerator_im = 2.0 * gamma2 * np.asarray(delta, dtype=float)
    return np.asarray(a), np.asarray(b), np.asarray(numerator_re), np.asarray(numerator_im)


def chi_from_arrays(
    omega1: ArrayLike,
    omega2: ArrayLike,
    omega3: ArrayLike,
    phi: ArrayLike,
    gamma1: ArrayLike,
    gamma2: ArrayLike,
    delta: ArrayLike,
    prefactor: ArrayLike = 1.0,
    convention: PhaseConvention = DEFAULT_CONVENTION,
) -> np.ndarray:
    """
    Vectorized chi over broadcast parameter arrays. Degenerate points (|Y|^2 <= EPSILON_DENOMINATOR) are NaN.
    """
    a, b, n_re, n_im = _y_terms(
        omega1, omega2, omega3, phi, gamma1, gamma2, delta, convention.cross_term_coefficient
    )
    z = a * a + b * b
    degenerate = z <= EPSILON_DENOMINATOR
    safe_z = np.where(degenerate, 1.0, z)
    chi_prime = prefactor * (n_re * a + n_im * b) / safe_z
    chi_double_prime = prefactor * (n_im * a - n_re * b) / safe_z
    chi = chi_prime + 1j * chi_double_prime
    return np.where(degenerate, complex(np.nan, np.nan), chi)


def d_chi_from_arrays(
    omega1: ArrayLike,
    omega2: ArrayLike,
    omega3: ArrayLike,
    phi: ArrayLike,
    gamma1: ArrayLike,
    gamma2: ArrayLike,
    delta: ArrayLike,
    prefactor: ArrayLike = 1.0,
    convention: PhaseConvention = DEFAULT_CONVENTION,
) -> np.ndarray:
    """
    Vectorized d(chi)/d(delta) by the quotient rule; NaN where chi itself is degenerate.
    """
    a, b, n_re, n_im = _y_terms(
        omega1, omega2, omega3, phi, gamma1, gamma2, delta, convention.cross_term_coefficient
    )
    delta = np.asarray(delta, dtype=float)
    degenerate = a * a + b * b <= EPSILON_DENOMINATOR
    y = np.where(degenerate, 1.0, a + 1j * b)
    numerator = n_re + 1j * n_im
    d_numerator = -8.0 * delta + 2j * np.asarray(gamma2, dtype=float)
    d_a = (
        -24.0 * np.square(delta)
        + 2.0 * (np.square(omega1) + np.square(omega2) + np.square(omega3))
        + 2.0 * np.asarray(gamma1) * np.asarray(gamma2)
    )
    d_b = 8.0 * delta * (np.asarray(gamma1) + np.asarray(gamma2))
    d_y = d_a + 1j * d_b
    d_chi = prefactor * (d_numerator * y - numerator * d_y) / (y * y)
    return np.where(degenerate, complex(np.nan, np.nan), d_chi)


def _param_arrays(params: DriveParams, **overrides: ArrayLike) -> Dict[str, ArrayLike]:
    values: Dict[str, ArrayLike] = dict(params.to_dict())
    values.update(overrides)
    return values


def compute_y(params: DriveParams, convention: PhaseConvention = DEFAULT_CONVENTION) -> complex:
    a, b, _, _ = _y_terms(
        params.omega1,
        params.omega2,
        params.omega3,
        params.phi,
        params.gamma1,
        params.gamma2,
        params.delta,
        convention.cross_term_coefficient,
    )
    return complex(float(a), float(b))


def _check_denominator(params: DriveParams, convention: PhaseConvention) -> None:
    y = compute_y(params, convention)
    y_squared = y.real * y.real + y.imag * y.imag
    if y_squared <= EPSILON_DENOMINATOR:
        raise DegenerateDenominator(y_squared, EPSILON_DENOMINATOR)


def compute_chi(params: DriveParams, convention: PhaseConvention = DEFAULT_CONVENTION) -> ComplexSusceptibility:
    _check_denominator(params, convention)
    chi = complex(chi_from_arrays(**_param_arrays(params), convention=convention))
    return ComplexSusceptibility.from_complex(chi, Source.ANALYTIC)


def d_chi_d_delta(params: DriveParams, convention: PhaseConvention = DEFAULT_CONVENTION) -> complex:
    _check_denominator(params, convention)
    return complex(d_chi_from_arrays(**_param_arrays(params), convention=convention))


def line_center_chi(params: DriveParams, convention: PhaseConvention = DEFAULT_CONVENTION) -> complex:
    """
    Closed form at delta = 0: K omega2^2 / (c omega1 omega2 omega3 cos(phi) - i (gamma1 omega2^2 + gamma2 omega1^2)).
    """
    denominator = complex(
        convention.cross_term_coefficient * params.omega1 * params.omega2 * params.omega3 * math.cos(params.phi),
        -(params.gamma1 * params.omega2**2 + params.gamma2 * params.omega1**2),
    )
    y_squared = abs(denominator) ** 2
    if y_squared <= EPSILON_DENOMINATOR:
        raise DegenerateDenominator(y_squared, EPSILON_DENOMINATOR)
    return params.prefactor * params.omega2**2 / denominator


def chi_grid(
    params: DriveParams,
    axis: str,
    values: np.ndarray,
    convention: PhaseConvention = DEFAULT_CONVENTION,
    workers: int = 1,
) -> np.ndarray:
    """
    chi along one parameter axis with the other fields of 'params' fixed. Gaps are NaN.
    """
    assert axis in PARAM_NAMES, f"unknown axis {axis!r}"

    def evaluate(chunk: np.ndarray) -> np.ndarray:
        return np.asarray(chi_from_arrays(**_param_arrays(params, **{axis: chunk}), convention=convention))

    return chunked_evaluate(evaluate, np.asarray(values, dtype=float), workers)


def d_chi_grid(
    params: DriveParams,
    axis: str,
    values: np.ndarray,
    convention: PhaseConvention = DEFAULT_CONVENTION,
    workers: int = 1,
) -> np.ndarray:
    assert axis in PARAM_NAMES, f"unknown axis {axis!r}"

    def evaluate(chunk: np.ndarray) -> np.ndarray:
        return np.asarray(d_chi_from_arrays(**_param_arrays(params, **{axis: chunk}), convention=convention))

    return chunked_evaluate(evaluate, np.asarray(values, dtype=float), workers)
