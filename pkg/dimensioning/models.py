"""
Dimensioning value types. Every field name follows the symbol it holds.
"""

from dataclasses import dataclass, field
from typing import Optional

from django.db import models

# Relative amount a finished downlink symbol may overrun its deadline by.
DEADLINE_TOL = 1e-12


class Limiter(models.TextChoices):
    AVERAGE = 'avg', 'Frame average'
    CRITICAL = 'critical', 'Critical path'
    DEADLINE = 'deadline', 'Unmeetable deadline'
    ASYMPTOTIC = 'asymptotic', 'Per-symbol rate'


@dataclass(frozen=True)
class OpCounts:
    """PE operations per task for one node and one frame."""
    mode: str
    CE: int
    B_i: int
    W_i: int
    FFT: float
    decode: float
    precode: float
    N_op_weights: float
    N_op_OFDM: float

    @property
    def N_op_UL(self) -> float:
        return self.N_op_OFDM

    @property
    def N_op_DL(self) -> float:
        return self.N_op_OFDM


@dataclass(frozen=True)
class CriticalPathRow:
    i: int
    N_op_CP_i: float
    T_CP_i: float
    T_available: float
    N_OPS_CP_i: float


@dataclass(frozen=True)
class CriticalPathTable:
    rows: tuple
    n_ul_pb: int = 0

    @property
    def max(self) -> float:
        return max((row.N_OPS_CP_i for row in self.rows), default=0.0)

    @property
    def argmax(self) -> Optional[int]:
        if not self.rows:
            return None
        return max(self.rows, key=lambda row: row.N_OPS_CP_i).i


@dataclass(frozen=True)
class NopsSweepPoint:
    """Operations per sample at one inversion time."""
    T_inv: float
    N_OPS_avg: float
    N_OPS_CP: tuple   # per downlink symbol; inf once its deadline leaves no time
    N_OPS: float
    limiter: str


@dataclass(frozen=True)
class PEClock:
    N_PE: int
    multiple: int
    f_clk: float
    N_OPS_hat: int
    N_OPS: float


@dataclass(frozen=True)
class SlackReport:
    N_OPS_hat: int
    max_T_inv: Optional[float]
    max_K: int
    max_N_hops: Optional[int]
    N_UL_PB: int
    N_UL_buffered: int


@dataclass(frozen=True)
class MemoryReport:
    N_UL_buffered: int
    Mem_input: int
    Mem_processing: int
    Mem_output: int
    Mem_channel_estimates: int
    Mem_weights: int
    twiddle_rom_words: int
    twiddle_rom_bits: int

    @property
    def buffers_total(self) -> int:
        return self.Mem_input + self.Mem_processing + self.Mem_output

    @property
    def vectors_total(self) -> int:
        return self.Mem_channel_estimates + self.Mem_weights


@dataclass(frozen=True)
class LinkReport:
    N_bits_up: int
    N_bits_down: int
    N_bits_up_exact: int
    N_bits_down_exact: int
    R_up_min: float
    R_down_min: float
    R_up_matched: float
    R_down_matched: float
    throughput_up: float
    throughput_down: float


@dataclass(frozen=True)
class DimensioningReport:
    params: object
    N_hops: int
    op_counts: OpCounts
    N_op_total: float
    N_OPS_avg: float
    critical: CriticalPathTable
    N_OPS: float
    N_OPS_asymptotic: float
    T_inv_A: float
    T_inv_B: float
    pe_clock: PEClock
    slack: SlackReport
    memory: MemoryReport
    link: LinkReport
    notes: tuple = field(default=())

    @property
    def N_OPS_critical(self) -> float:
        return self.critical.max
