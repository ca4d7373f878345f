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
from pathlib import Path
from typing import Iterator, List

import pytest

from loopchi.log import LOGS_FORMAT, LoopchiFormatter, get_logger_adapter, initial_root_logger_setup


class _ListHandler(logging.Handler):
    def __init__(self) -> None:
        super().__init__()
        self.records: List[logging.LogRecord] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.records.append(record)


@pytest.fixture
def captured() -> Iterator[_ListHandler]:
    handler = _ListHandler()
    logger = logging.getLogger("loopchi.tests")
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)
    yield handler
    logger.removeHandler(handler)


@pytest.fixture
def clean_root_logger() -> Iterator[logging.Logger]:
    logger = logging.getLogger("loopchi")
    handlers = list(logger.handlers)
    yield logger
    for handler in logger.handlers[:]:
        if handler not in handlers:
            handler.close()
            logger.removeHandler(handler)


def test_logger_name_must_be_under_loopchi() -> None:
    with pytest.raises(AssertionError):
        get_logger_adapter("somewhere.else")


def test_kwargs_become_extra(captured: _ListHandler) -> None:
    get_logger_adapter("loopchi.tests").info("Panel done", panel="fig4a", peaks=2)
    (record,) = captured.records
    assert record.getMessage() == "Panel done"
    assert record.__dict__["extra"] == {"panel": "fig4a", "peaks": 2}


def test_logging_kwargs_are_kept(captured: _ListHandler) -> None:
    try:
        raise ValueError("bad")
    except ValueError:
        get_logger_adapter("loopchi.tests").error("Failed", exc_info=True, extra={"a": 1}, b=2)
    (record,) = captured.records
    assert record.exc_info is not None
    assert record.__dict__["extra"] == {"a": 1, "b": 2}


def test_formatter_appends_fields(captured: _ListHandler) -> None:
    get_logger_adapter("loopchi.tests").warning("Profile has gaps", gaps=3)
    formatted = LoopchiFormatter(LOGS_FORMAT).format(captured.records[0])
    assert formatted.endswith("WARNING: loopchi.tests: Profile has gaps (gaps=3)")
    # UTC timestamps
    assert formatted.startswith("[")


def test_root_logger_setup_writes_file(tmp_path: Path, clean_root_logger: logging.Logger) -> None:
    log_file = tmp_path / "logs" / "loopchi.log"
    adapter = initial_root_logger_setup(logging.WARNING, str(log_file))
    get_logger_adapter("loopchi.tests").debug("Detail", step=1)
    adapter.info("Started")
    for handler in clean_root_logger.handlers:
        handler.flush()
    lines = log_file.read_text().splitlines()
    assert lines[0].endswith("DEBUG: loopchi.tests: Detail (step=1)")
    assert lines[1].endswith("INFO: loopchi: Started")
