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
Shared fixtures: the reference parameter sets of the four reproduced figures.

Makes the repo root importable so ``loopchi.*`` resolves without an editable install.
"""

import sys
from pathlib import Path

import pytest

_REPO_ROOT = Path(__file__).resolve().parents[1]
if str(_REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(_REPO_ROOT))

from loopchi.susceptibility import DriveParams  # noqa: E402
from tests import DELTA_1, DELTA_2  # noqa: E402


@pytest.fixture
def fig2_params() -> DriveParams:
    return DriveParams(omega1=2, omega2=2, omega3=2, gamma1=2, gamma2=2)


@pytest.fixture
def fig3_params() -> DriveParams:
    return DriveParams(omega1=10, omega2=1, omega3=1, gamma1=0.2, gamma2=0.2)


@pytest.fixture
def fig4_params() -> DriveParams:
    return DriveParams(omega1=30, omega2=20, omega3=20, gamma1=1, gamma2=0, delta=DELTA_1)


@pytest.fixture
def fig5_params() -> DriveParams:
    return DriveParams(omega1=60, omega2=50, omega3=50, gamma1=1, gamma2=0, delta=DELTA_2)
