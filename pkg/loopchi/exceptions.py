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
from typing import Any, Dict, Optional


class InvalidParameters(ValueError):
    def __init__(self, invariant: str, detail: str):
        super().__init__(f"{invariant} violated: {detail}")
        self.invariant = invariant
        self.detail = detail


class DegenerateDenominator(ArithmeticError):
    def __init__(self, y_squared: float, threshold: float):
        super().__init__(f"|Y|^2 = {y_squared!r} is at or below {threshold!r}, the linear response is singular here")
        self.y_squared = y_squared


class ProbeTooStrong(ValueError):
    def __init__(self, probe_rabi: float, limit: float):
        super().__init__(f"probe Rabi frequency {probe_rabi!r} is outside the weak-probe regime (limit {limit!r})")
        self.probe_rabi = probe_rabi
        self.limit = limit


class SingularSystem(ArithmeticError):
    pass


class NotConverged(ArithmeticError):
    def __init__(self, relative_spread: float, t_max: float):
        super().__init__(
            f"coherence did not settle by t_max={t_max!r}: final-window spread is {relative_spread:.3g} of its mean"
        )
        self.relative_spread = relative_spread


class IntegrationSettingsError(ValueError):
    pass


class RequiresMetastable(ValueError):
    def __init__(self, gamma2: float):
        super().__init__(f"root analysis needs a metastable |a2> (gamma2 == 0), got gamma2={gamma2!r}")


class ProfileHasGaps(ValueError):
    pass


class InconclusiveAdjudication(Exception):
    def __init__(self, message: str, report: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.report = report


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, flag: Optional[str] = None):
        if line is not None:
            message = f"line {line}: {message}"
        elif flag is not None:
            message = f"{flag}: {message}"
        super().__init__(message)
        self.line = line
        self.flag = flag


class ValidationError(ValueError):
    def __init__(self, invariant: str, detail: str):
        super().__init__(f"{invariant} violated: {detail}")
        self.invariant = invariant


class PanelFailure(Exception):
    def __init__(self, panel: str, cause: BaseException):
        super().__init__(f"panel {panel} failed: {cause}")
        self.panel = panel
        self.cause = cause
