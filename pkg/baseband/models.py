"""
Baseband value types: packed Hermitian matrices, pilot config, PE-op tallies.
"""

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from django.db import models


class Task(models.TextChoices):
    """Per-node computational tasks of one frame."""
    FFT = 'FFT', 'Pilot FFT'
    CE = 'CE', 'Channel estimation'
    GRAM = 'B_i', 'Local Gram accumulation'
    WAIT_INV = 'WAIT_INV', 'Waiting for the inverse'
    WEIGHTS = 'W_i', 'Local weights'
    UL_FFT = 'UL_FFT', 'Uplink FFT'
    UL_DECODE = 'UL_decode', 'Uplink decode'
    DL_PRECODE = 'DL_precode', 'Downlink precode'
    IFFT = 'IFFT', 'Downlink IFFT'


@lru_cache(maxsize=32)
def packed_indices(order: int) -> tuple:
    """Row/column indices of the packed lower triangle, row-major."""
    rows, cols = np.tril_indices(order)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def packed_length(order: int) -> int:
    return order * (order + 1) // 2


@dataclass(frozen=True, eq=False)
class PackedHermitian:
    """
    Lower triangle of a K×K Hermitian matrix, K(K+1)/2 entries.

    ``data`` may carry leading batch dimensions (one matrix per subcarrier).
    Entry (r, c), r >= c, lives at index r(r+1)/2 + c.
    """
    order: int
    data: np.ndarray

    @classmethod
    def zeros(cls, order: int, batch_shape: tuple = ()) -> 'PackedHermitian':
        return cls(order, np.zeros(batch_shape + (packed_length(order),), dtype=complex))

    @classmethod
    def from_dense(cls, matrix) -> 'PackedHermitian':
        matrix = np.asarray(matrix, dtype=complex)
        order = matrix.shape[-1]
        rows, cols = packed_indices(order)
        return cls(order, matrix[..., rows, cols].copy())

    @property
    def batch_shape(self) -> tuple:
        return self.data.shape[:-1]

    def to_dense(self) -> np.ndarray:
        rows, cols = packed_indices(self.order)
        dense = np.zeros(self.batch_shape + (self.order, self.order), dtype=complex)
        dense[..., rows, cols] = self.data
        dense[..., cols, rows] = np.conj(self.data)
        # keep the stored diagonal as-is
        diag = np.arange(self.order)
        dense[..., diag, diag] = self.data[..., diag * (diag + 1) // 2 + diag]
        return dense

    def diagonal(self) -> np.ndarray:
        diag = np.arange(self.order)
        return self.data[..., diag * (diag + 1) // 2 + diag]


class OpTally:
    """PE operations charged per task. Tallies of several nodes can be summed."""

    def __init__(self, counts=None):
        self._counts = Counter({str(task): int(ops) for task, ops in (counts or {}).items()})

    def charge(self, task: str, ops: int):
        self._counts[str(task)] += int(ops)

    def __getitem__(self, task) -> int:
        return self._counts.get(str(task), 0)

    def __add__(self, other: 'OpTally') -> 'OpTally':
        return OpTally(self._counts + other._counts)

    def __eq__(self, other):
        if not isinstance(other, OpTally):
            return NotImplemented
        return +self._counts == +other._counts

    def __repr__(self):
        return f'OpTally({dict(self._counts)})'

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def as_dict(self) -> dict:
        return {task: self._counts[task] for task in Task.values if self._counts.get(task)}
