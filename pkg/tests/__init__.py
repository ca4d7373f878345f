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
from pathlib import Path

HERE = Path(__file__).parent
PARENT = HERE.parent

# the in-phase coincidence detunings of the localization figures
DELTA_1 = (20.0 / 4) * (math.sqrt(3) - 1)
DELTA_2 = (50.0 / 4) * (math.sqrt(3) + 1)
