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
import json
import os
from pathlib import Path
from typing import Any, Union


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    """
    Writes 'text' to 'path' safely: the content is written at a temporary location and then moved, making the
    filesystem-level change atomic. Errors are re-raised naming the destination.
    """
    dst_tmp = f"{path}.tmp"
    try:
        with open(dst_tmp, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(dst_tmp, path)
    except OSError as e:
        raise OSError(e.errno, f"failed writing {str(path)!r}: {e.strerror}") from e


def atomic_write_json(path: Union[str, Path], data: Any) -> None:
    atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")


def ensure_directory(path: Union[str, Path]) -> Path:
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(e.errno, f"cannot create output directory {str(directory)!r}: {e.strerror}") from e
    return directory
