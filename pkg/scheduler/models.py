"""
Scheduler value types: timed entries, per-node schedules, deadline verdicts.

Times are seconds from the start of the frame (the first uplink slot).
Symbol 0 is the pilot; uplink symbols are numbered 1..N_UL in frame
order and downlink symbols 1..N_DL.
"""

from dataclasses import dataclass, field
from typing import Optional

from django.db import models

from baseband.models import Task
from dimensioning.models import DEADLINE_TOL


class Granularity(models.TextChoices):
    VALUE = 'value', 'Pipelined per value'
    TASK = 'task', 'Whole task'


@dataclass(frozen=True)
class ScheduleEntry:
    node: int
    task: str
    symbol: int
    start: float
    end: float
    ops: float

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def busy(self) -> bool:
        return self.task != Task.WAIT_INV


@dataclass(frozen=True)
class DeadlineVerdict:
    symbol: int
    node: int
    completion: float
    deadline: float

    @property
    def slack(self) -> float:
        return self.deadline - self.completion

    @property
    def met(self) -> bool:
        return self.slack >= -DEADLINE_TOL * max(1.0, abs(self.deadline))


@dataclass(frozen=True)
class Schedule:
    """One node's timed task list for one frame (tail may run into the next)."""
    node: int
    params: object
    n_hat: int
    n_ul_pb: int
    granularity: str
    t_inv: float
    entries: tuple
    verdicts: tuple
    horizon: float
    skew: float = 0.0

    @property
    def busy_time(self) -> float:
        return sum(e.duration for e in self.entries if e.busy)

    @property
    def utilization(self) -> float:
        return self.busy_time / self.params.T_frame

    @property
    def buffered_symbols(self) -> int:
        return self.params.N_UL - self.n_ul_pb

    @property
    def tail_end(self) -> float:
        return max((e.end for e in self.entries), default=0.0)

    @property
    def backlog_ok(self) -> bool:
        return self.tail_end <= self.horizon + DEADLINE_TOL * max(1.0, self.horizon)

    @property
    def feasible(self) -> bool:
        return self.backlog_ok and all(v.met for v in self.verdicts)

    def entries_for(self, task: str, symbol: Optional[int] = None) -> list:
        return [e for e in self.entries if e.task == task and (symbol is None or e.symbol == symbol)]


@dataclass(frozen=True)
class TreeSchedule:
    """Skewed schedules of every node plus the CCU inversion window."""
    topology: object
    schedules: tuple
    granularity: str
    inversion_start: Optional[float] = None
    inversion_end: Optional[float] = None
    notes: tuple = field(default=())

    def __getitem__(self, node: int) -> Schedule:
        return self.schedules[node]

    def __iter__(self):
        return iter(self.schedules)

    def __len__(self):
        return len(self.schedules)

    @property
    def params(self):
        return self.schedules[0].params

    @property
    def feasible(self) -> bool:
        return all(s.feasible for s in self.schedules)
