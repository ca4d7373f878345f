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
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Sequence, TypeVar

import numpy as np
import pandas as pd

T = TypeVar("T")
R = TypeVar("R")

GAP_TOKEN = "gap"
CSV_FLOAT_FORMAT = "%.12g"


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Maps 'func' over 'items', possibly on a thread pool. Results come back in input order no matter
    which worker finishes first.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        futures: Dict[int, Future] = {index: executor.submit(func, item) for index, item in enumerate(items)}
        return [futures[index].result() for index in range(len(items))]


def chunked_evaluate(func: Callable[[np.ndarray], np.ndarray], values: np.ndarray, workers: int = 1) -> np.ndarray:
    """
    Evaluates a vectorized 'func' over contiguous chunks of 'values', one chunk per worker, and stitches the
    chunks back together in grid order.
    """
    if workers <= 1 or len(values) < 2 * workers:
        return func(values)
    chunks = np.array_split(values, workers)
    return np.concatenate(ordered_map(func, chunks, workers))


def sweep_frame(header: Sequence[str], rows: Iterable[Sequence[float]]) -> pd.DataFrame:
    """
    One panel as a DataFrame: the first column is the swept variable, the rest are values. A row with any
    non-finite value is a gap for all of its value columns.
    """
    data = np.asarray(list(rows), dtype=float).reshape(-1, len(header))
    frame = pd.DataFrame(data, columns=list(header))
    values = list(header[1:])
    frame.loc[~np.isfinite(data[:, 1:]).all(axis=1), values] = np.nan
    # -0.0 + 0.0 is +0.0
    return frame + 0.0


def render_csv(frame: pd.DataFrame) -> str:
    """
    Locale-independent CSV text: at most 12 significant digits, gaps spelled out.
    """
    text: str = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, na_rep=GAP_TOKEN, lineterminator="\n")
    return text
