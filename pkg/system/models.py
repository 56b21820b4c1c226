"""
System value types: parameters, frame timing, tree topology, run config.

Nothing here is persisted. The enumerations use Django ``TextChoices`` so
they render the same way in serializers, CLI flags and CSV files.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

from django.db import models


# =============================================================================
# ENUMERATIONS
# =============================================================================

class ProcessingMode(models.TextChoices):
    CB = 'CB', 'Conjugate beamforming'
    ZF = 'ZF', 'Zero forcing'
    MMSE = 'MMSE', 'Regularized zero forcing'


class ChannelModel(models.TextChoices):
    FLAT = 'flat', 'Frequency flat'
    PER_SUBCARRIER = 'per_subcarrier', 'Independent per subcarrier'


class OutputFormat(models.TextChoices):
    TEXT = 'text', 'Key: value text'
    CSV = 'csv', 'CSV'
    JSON = 'json', 'JSON'


# Frame slots that carry neither uplink nor downlink data: pilot + two guards
OVERHEAD_SLOTS = 3


# =============================================================================
# SYSTEM PARAMETERS
# =============================================================================

@dataclass(frozen=True)
class SystemParams:
    """
    Every symbol of the system table plus processing options.

    Times are seconds, rates Hz, word lengths bits (real and imaginary
    parts combined). ``N_hops`` is an override; when None the hop count
    comes from the binary tree built on ``M`` nodes.
    """
    K: int
    M: int
    N_FFT: int
    N_SC: int
    N_UL1: int
    N_UL2: int
    N_DL: int
    f_sample: float
    T_OFDM: float
    T_link: float = 0.0
    T_inv: float = 0.0
    W_comp: int = 24
    W_symbol: int = 4
    W_ADC: int = 12
    W_DAC: int = 12
    W_TF: Optional[int] = None
    mode: str = ProcessingMode.ZF
    mmse_reg: float = 0.0
    tree_arity: int = 2
    cp_len: Optional[int] = None
    N_hops: Optional[int] = None
    N_PE: int = 1
    pilot_amplitude: float = 1.0
    noise_var: float = 0.0
    channel_model: str = ChannelModel.FLAT

    @property
    def N_UL(self) -> int:
        return self.N_UL1 + self.N_UL2

    @property
    def T_frame(self) -> float:
        return (self.N_UL + self.N_DL + OVERHEAD_SLOTS) * self.T_OFDM

    @property
    def cyclic_prefix(self) -> int:
        if self.cp_len is not None:
            return self.cp_len
        return int(self.N_FFT) // 16

    @property
    def twiddle_width(self) -> int:
        return self.W_TF if self.W_TF is not None else self.W_comp

    @property
    def is_cb(self) -> bool:
        return self.mode == ProcessingMode.CB

    @property
    def regularization(self) -> float:
        """Diagonal loading applied before inversion (0 for ZF)."""
        return self.mmse_reg if self.mode == ProcessingMode.MMSE else 0.0

    def with_changes(self, **changes) -> 'SystemParams':
        return replace(self, **changes)


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str

    def __str__(self):
        return f'{self.field}: {self.rule}'


@dataclass(frozen=True)
class DerivedTiming:
    T_OFDM: float
    T_frame: float
    N_UL: int


# =============================================================================
# TOPOLOGY
# =============================================================================

CCU = -1


@dataclass(frozen=True)
class TreeTopology:
    """
    Antenna-node tree. ``parents[n]`` is the parent id of node ``n``; the
    root's parent is ``CCU``. Instances come from topology_service, which
    checks the structure before constructing them.
    """
    parents: tuple
    arity: int
    children: tuple = field(compare=False)
    depth: tuple = field(compare=False)

    @property
    def M(self) -> int:
        return len(self.parents)

    @property
    def root(self) -> int:
        return self.parents.index(CCU)

    @property
    def max_depth(self) -> int:
        return max(self.depth)

    @property
    def N_hops(self) -> int:
        """Hops from the furthest node to the CCU, root link included."""
        return 1 + self.max_depth

    @cached_property
    def breadth_first(self) -> tuple:
        order = [self.root]
        for node in order:
            order.extend(self.children[node])
        return tuple(order)

    @cached_property
    def post_order(self) -> tuple:
        """Children before parents (reverse breadth-first)."""
        return tuple(reversed(self.breadth_first))

    @cached_property
    def heights(self) -> tuple:
        """Per node: number of tree levels below it (0 for a leaf)."""
        height = [0] * self.M
        for node in self.post_order:
            kids = self.children[node]
            if kids:
                height[node] = 1 + max(height[c] for c in kids)
        return tuple(height)


# =============================================================================
# CLI RUN CONFIG
# =============================================================================

@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    config_path: Optional[str] = None
    preset: Optional[str] = None
    output_dir: str = ''
    seed: int = 0
    output_format: str = OutputFormat.TEXT
    mode: Optional[str] = None
    frames: int = 1
    t_inv: Optional[float] = None
