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
import logging.handlers
import os
import re
import sys
import time
from logging import LogRecord
from typing import Any, Mapping, MutableMapping, Optional, Tuple

LOGGER_NAME_RE = re.compile(r"loopchi(?:\..+)?")
LOGS_FORMAT = "[%(asctime)s] %(levelname)s: %(name)s: %(message)s"

# keyword arguments understood by Logger._log itself; everything else becomes "extra"
_LOGGING_KWARGS = ("exc_info", "stack_info", "stacklevel", "extra")


def get_logger_adapter(logger_name: str) -> logging.LoggerAdapter:
    # Validate the name starts with loopchi (the root logger name), so logging parent logger propagation will work.
    assert LOGGER_NAME_RE.match(logger_name) is not None, "logger name must start with 'loopchi'"
    return LoopchiExtraAdapter(logging.getLogger(logger_name), {})


class LoopchiExtraAdapter(logging.LoggerAdapter):
    """
    Lets callers attach structured fields straight on the log call:

        logger.info("Panel done", panel="fig4a", peaks=2)

    The fields land in record.extra and the formatter prints them after the message.
    """

    def get_extra(self, **kwargs: Any) -> Mapping[str, Any]:
        return dict(kwargs)

    def process(self, msg: Any, kwargs: MutableMapping[str, Any]) -> Tuple[Any, MutableMapping[str, Any]]:
        logging_kwargs = {k: kwargs.pop(k) for k in _LOGGING_KWARGS if k in kwargs}
        extra = dict(logging_kwargs.pop("extra", None) or {})
        extra.update(self.get_extra(**kwargs))
        logging_kwargs["extra"] = {"extra": extra}
        return msg, logging_kwargs


class _ExtraFormatter(logging.Formatter):
    def format(self, record: LogRecord) -> str:
        formatted = super().format(record)

        formatted_extra = ", ".join(f"{k}={v}" for k, v in record.__dict__.get("extra", {}).items())
        if formatted_extra:
            formatted = f"{formatted} ({formatted_extra})"

        return formatted


class _UTCFormatter(logging.Formatter):
    # Patch formatTime to be GMT (UTC) for all formatters,
    # see https://docs.python.org/3/library/logging.html?highlight=formattime#logging.Formatter.formatTime
    converter = time.gmtime


class LoopchiFormatter(_ExtraFormatter, _UTCFormatter):
    pass


def initial_root_logger_setup(
    stream_level: int,
    log_file_path: Optional[str] = None,
    rotate_max_bytes: int = 5 * 1024 * 1024,
    rotate_backup_count: int = 1,
) -> logging.LoggerAdapter:
    logger_adapter = get_logger_adapter("loopchi")
    logger_adapter.setLevel(logging.DEBUG)

    # stdout is reserved for command results (the adjudication report is printed there)
    stream_handler = logging.StreamHandler(stream=sys.stderr)
    stream_handler.setLevel(stream_level)
    stream_handler.setFormatter(LoopchiFormatter(LOGS_FORMAT))
    logger_adapter.logger.addHandler(stream_handler)

    if log_file_path is not None:
        log_dir = os.path.dirname(log_file_path)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file_path,
            maxBytes=rotate_max_bytes,
            backupCount=rotate_backup_count,
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(LoopchiFormatter(LOGS_FORMAT))
        logger_adapter.logger.addHandler(file_handler)

    return logger_adapter
