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
import math
import re
from dataclasses import dataclass
from enum import Enum

import configargparse
import numpy as np

from loopchi.exceptions import ValidationError

# "1.5", "-2e-3", "pi", "2pi", "-pi/2", "0.5pi", "3*pi/4"
_REAL_RE = re.compile(
    r"^(?P<sign>[+-])?(?P<coef>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\*?(?P<pi>pi)?(?:/(?P<div>\d+\.?\d*))?$"
)


def parse_real(value_str: str) -> float:
    """
    Parses a real number, allowing multiples and fractions of pi.
    Raises ValueError on anything else, including non-finite values.
    """
    match = _REAL_RE.match(value_str.strip().lower())
    if match is None or (match["coef"] is None and match["pi"] is None):
        raise ValueError(f"not a real number: {value_str!r}")
    value = float(match["coef"]) if match["coef"] is not None else 1.0
    if match["pi"] is not None:
        value *= math.pi
    elif match["div"] is not None and match["coef"] is None:
        raise ValueError(f"not a real number: {value_str!r}")
    if match["div"] is not None:
        divisor = float(match["div"])
        if divisor == 0:
            raise ValueError(f"division by zero in {value_str!r}")
        value /= divisor
    if match["sign"] == "-":
        value = -value
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {value_str!r}")
    return value


def real_number(value_str: str) -> float:
    try:
        return parse_real(value_str)
    except ValueError as e:
        raise configargparse.ArgumentTypeError(str(e))


def positive_integer(value_str: str) -> int:
    value = int(value_str)
    if value <= 0:
        raise configargparse.ArgumentTypeError("invalid positive integer value: {!r}".format(value))
    return value


def nonnegative_integer(value_str: str) -> int:
    value = int(value_str)
    if value < 0:
        raise configargparse.ArgumentTypeError("invalid non-negative integer value: {!r}".format(value))
    return value


class SweepKind(str, Enum):
    PHI = "phi"
    DELTA = "delta"
    KX = "kx"


@dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind
    start: float
    stop: float
    count: int

    def validate(self) -> None:
        if self.count < 2:
            raise ValidationError("sweep count >= 2", f"count is {self.count}")
        if not self.start < self.stop:
            raise ValidationError("sweep start < stop", f"start={self.start!r}, stop={self.stop!r}")
        if self.kind is SweepKind.KX and not (
            math.isclose(self.start, -math.pi, abs_tol=1e-12) and math.isclose(self.stop, math.pi, abs_tol=1e-12)
        ):
            raise ValidationError("kx sweep covers one period (-pi, pi]", f"got ({self.start!r}, {self.stop!r}]")

    def grid(self) -> np.ndarray:
        if self.kind is SweepKind.KX:
            # periodic: -pi is the same point as pi, so only the right end is sampled
            return np.linspace(self.start, self.stop, self.count + 1)[1:]
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.start!r}:{self.stop!r}:{self.count}"


def parse_sweep(value_str: str) -> SweepSpec:
    parts = value_str.split(":")
    if len(parts) != 4:
        raise ValueError(f"sweep must look like kind:start:stop:count, got {value_str!r}")
    kind, start, stop, count = parts
    try:
        sweep_kind = SweepKind(kind.strip().lower())
    except ValueError:
        raise ValueError(f"unknown sweep kind {kind!r} (allowed: {[k.value for k in SweepKind]})")
    return SweepSpec(sweep_kind, parse_real(start), parse_real(stop), int(count))


def sweep_spec(value_str: str) -> SweepSpec:
    try:
        return parse_sweep(value_str)
    except ValueError as e:
        raise configargparse.ArgumentTypeError(str(e))
