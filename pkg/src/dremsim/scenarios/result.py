"""Shared container for scenario simulation output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SimResult:
    """Strided sample table plus run-level audits from one simulation.

    columns names the data columns (time excluded); data is (N, len(columns))
    with NaN marking truncated law traces. streams_meta holds delta-monitor
    results keyed by stream name ("" for a single shared stream, the law name
    when each law drives its own loop). audit holds per-sample consistency
    residuals that are not part of the exported row schema.
    """

    scenario: str
    laws: tuple[str, ...]
    times: np.ndarray
    columns: list[str]
    data: np.ndarray
    streams_meta: dict
    law_meta: dict
    audit: dict[str, np.ndarray]
    wall_time: float
    params: dict

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def merged_with(self, other: "SimResult") -> "SimResult":
        """Join two runs recorded on the identical time grid into one table."""
        if len(self.times) != len(other.times) or not np.array_equal(
            self.times, other.times
        ):
            raise ValueError("cannot merge results on different time grids")
        dup = set(self.columns) & set(other.columns)
        if dup:
            raise ValueError(f"duplicate columns in merge: {sorted(dup)}")
        return SimResult(
            scenario=self.scenario,
            laws=self.laws + other.laws,
            times=self.times,
            columns=self.columns + other.columns,
            data=np.hstack([self.data, other.data]),
            streams_meta={**self.streams_meta, **other.streams_meta},
            law_meta={**self.law_meta, **other.law_meta},
            audit={
                **{k: v for k, v in self.audit.items()},
                **{k: v for k, v in other.audit.items()},
            },
            wall_time=self.wall_time + other.wall_time,
            params={**self.params, **other.params},
        )
