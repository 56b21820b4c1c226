"""
Simulator value types: scenarios, engine events, per-frame results.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from django.db import models


class EventKind(models.TextChoices):
    # ordering of simultaneous events follows the declaration order
    RECEIVE = 'receive', 'Value received'
    COMPUTE_END = 'compute_end', 'Task finished'
    INVERT_END = 'invert_end', 'Inversion finished'
    SEND = 'send', 'Value sent'
    INVERT_START = 'invert_start', 'Inversion started'
    COMPUTE_START = 'compute_start', 'Task started'


EVENT_PRIORITY = {kind: rank for rank, kind in enumerate(EventKind.values)}


class PayloadClass(models.TextChoices):
    GRAM = 'gram', 'Gram entries'
    INVERSE = 'inverse', 'Inverted Gram entries'
    DECODED = 'decoded', 'Decoded uplink partial sums'
    PRECODE_INPUT = 'precode_input', 'Downlink symbols to precode'


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Ground truth for a run. H is (M, K) for a flat channel or
    (N_SC, M, K) per subcarrier; frame data is drawn on demand from
    (seed, frame index).
    """
    seed: int
    params: object
    topology: object
    H: np.ndarray

    @property
    def per_subcarrier(self) -> bool:
        return self.H.ndim == 3

    def node_channel(self, node: int) -> np.ndarray:
        return self.H[..., node, :]


@dataclass(frozen=True, eq=False)
class FrameData:
    """Per-frame transmitted symbols and noise realisations."""
    frame: int
    uplink: np.ndarray    # (N_UL, N_SC, K) terminal symbols
    downlink: np.ndarray  # (N_DL, N_SC, K) symbols to precode
    pilot_noise: np.ndarray   # (M, K)
    uplink_noise: np.ndarray  # (N_UL, N_SC, M)


@dataclass(frozen=True)
class Event:
    time: float
    node: int
    kind: str
    payload_class: str = ''
    symbol: Optional[int] = None
    subcarrier_block: str = ''

    def sort_key(self, seq: int = 0) -> tuple:
        return (self.time, EVENT_PRIORITY[self.kind], self.node, seq)


@dataclass(frozen=True)
class ErrorMetrics:
    direction: str  # 'uplink' | 'downlink' | 'ifft'
    symbol: int
    max_abs: float
    rel_fro: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.rel_fro <= self.tolerance


@dataclass(frozen=True)
class ValueTally:
    """
    Values crossing one node's links in one frame. ``values`` count one word
    per Gram entry and one per subcarrier of every symbol vector; ``scalars``
    count every complex entry.
    """
    up_values: int = 0
    down_values: int = 0
    up_scalars: int = 0
    down_scalars: int = 0

    def __add__(self, other: 'ValueTally') -> 'ValueTally':
        return ValueTally(
            self.up_values + other.up_values,
            self.down_values + other.down_values,
            self.up_scalars + other.up_scalars,
            self.down_scalars + other.down_scalars,
        )


@dataclass(eq=False)
class FrameResult:
    frame: int
    decoded: dict = field(default_factory=dict)      # uplink symbol -> (N_SC, K) at the CCU
    transmitted: dict = field(default_factory=dict)  # downlink symbol -> (N_SC, M)
    waveforms: dict = field(default_factory=dict)    # downlink symbol -> (M, N_FFT + CP) samples
    metrics: list = field(default_factory=list)
    tallies: dict = field(default_factory=dict)      # node -> OpTally
    values: dict = field(default_factory=dict)       # node -> ValueTally
    events: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    max_delay: float = 0.0
    peak_buffered: int = 0
    inversion_start: Optional[float] = None
    inversion_end: Optional[float] = None

    @property
    def oracle_ok(self) -> bool:
        return all(m.ok for m in self.metrics)

    @property
    def deadlines_met(self) -> bool:
        return all(v.met for v in self.verdicts)

    @property
    def ok(self) -> bool:
        return self.oracle_ok and self.deadlines_met


@dataclass(frozen=True)
class SweepReport:
    results: tuple
    backlog_ok: bool

    @property
    def frames(self) -> int:
        return len(self.results)

    @property
    def violations(self) -> list:
        """(frame, downlink symbol) of every missed deadline."""
        return [(r.frame, v.symbol) for r in self.results for v in r.verdicts if not v.met]

    @property
    def peak_buffered(self) -> list:
        return [r.peak_buffered for r in self.results]

    @property
    def ok(self) -> bool:
        return self.backlog_ok and all(r.ok for r in self.results)
