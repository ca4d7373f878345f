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

import logging
import time
from typing import Optional

import psutil
from humanfriendly import format_size, format_timespan


class UsageLoggerInterface:
    """
    Resource accounting for one command run. A "cycle" is one labelled unit of work, usually a panel.
    """

    def init_cycles(self) -> None:
        raise NotImplementedError

    def log_cycle(self, label: str) -> None:
        raise NotImplementedError

    def log_run(self) -> None:
        raise NotImplementedError


class CpuUsageLogger(UsageLoggerInterface):
    def __init__(self, logger: logging.LoggerAdapter, process: Optional[psutil.Process] = None):
        self._logger = logger
        self._process = process if process is not None else psutil.Process()
        self._cycle_start: Optional[float] = None
        self._cycle_cpu: Optional[float] = None

    def _cpu_seconds(self) -> float:
        times = self._process.cpu_times()
        return times.user + times.system

    def init_cycles(self) -> None:
        self._cycle_start = time.monotonic()
        self._cycle_cpu = self._cpu_seconds()

    def log_cycle(self, label: str) -> None:
        assert self._cycle_start is not None and self._cycle_cpu is not None, "didn't call init_cycles()?"
        now, cpu = time.monotonic(), self._cpu_seconds()
        wall = max(now - self._cycle_start, 1e-9)
        used = cpu - self._cycle_cpu
        self._logger.debug(
            "Cycle CPU usage",
            cycle=label,
            cpu_seconds=round(used, 3),
            cpu_percent=round(100 * used / wall, 1),
            wall=format_timespan(wall),
        )
        self._cycle_start, self._cycle_cpu = now, cpu

    def log_run(self) -> None:
        used = self._cpu_seconds()
        uptime = max(time.time() - self._process.create_time(), 1e-9)
        self._logger.debug(
            "Run CPU usage",
            cpu_seconds=round(used, 3),
            cpu_percent=round(100 * used / uptime, 1),
            wall=format_timespan(uptime),
        )


class MemoryUsageLogger(UsageLoggerInterface):
    def __init__(self, logger: logging.LoggerAdapter, process: Optional[psutil.Process] = None):
        self._logger = logger
        self._process = process if process is not None else psutil.Process()
        self._cycle_rss: Optional[int] = None

    def _rss(self) -> int:
        return int(self._process.memory_info().rss)

    def init_cycles(self) -> None:
        self._cycle_rss = self._rss()

    def log_cycle(self, label: str) -> None:
        assert self._cycle_rss is not None, "didn't call init_cycles()?"
        rss = self._rss()
        growth = rss - self._cycle_rss
        sign = "-" if growth < 0 else "+"
        self._logger.debug(
            "Cycle memory usage",
            cycle=label,
            rss=format_size(rss, binary=True),
            growth=sign + format_size(abs(growth), binary=True),
        )
        self._cycle_rss = rss

    def log_run(self) -> None:
        self._logger.debug("Run memory usage", rss=format_size(self._rss(), binary=True))


class ProcessUsageLogger(UsageLoggerInterface):
    """
    CPU seconds and RSS of this process, per cycle and for the whole run.
    """

    def __init__(self, logger: logging.LoggerAdapter):
        process = psutil.Process()
        self._loggers = (CpuUsageLogger(logger, process), MemoryUsageLogger(logger, process))

    def init_cycles(self) -> None:
        for usage_logger in self._loggers:
            usage_logger.init_cycles()

    def log_cycle(self, label: str) -> None:
        for usage_logger in self._loggers:
            usage_logger.log_cycle(label)

    def log_run(self) -> None:
        for usage_logger in self._loggers:
            usage_logger.log_run()


class NoopUsageLogger(UsageLoggerInterface):
    def init_cycles(self) -> None:
        pass

    def log_cycle(self, label: str) -> None:
        pass

    def log_run(self) -> None:
        pass
