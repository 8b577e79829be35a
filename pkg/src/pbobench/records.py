"""Run-level records shared by the algorithms, experimenter and analyzer."""

from __future__ import annotations

from collections import namedtuple
from dataclasses import asdict, dataclass

LOG_COLUMNS = ("evaluations", "raw_y", "raw_y_best", "trans_y", "trans_y_best")

LogEvent = namedtuple("LogEvent", list(LOG_COLUMNS) + ["params"], defaults=[()])


@dataclass
class RunRecord:
    alg: str
    fid: int
    dim: int
    iid: int
    seed: int
    budget: int
    evals_used: int
    final_best_raw: float
    final_best_transformed: float
    hit: bool
    hitting_time: int | None
    rep: int = 0
    dat_path: str | None = None

    def __post_init__(self):
        if self.hit != (self.hitting_time is not None):
            raise ValueError("hitting_time must be set exactly when the run hit")

    def to_dict(self) -> dict:
        return asdict(self)
