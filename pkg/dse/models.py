"""
Design-space exploration value types: grid axes and evaluated cells.
"""

from dataclasses import dataclass
from functools import cached_property

from django.db import models


class DseMode(models.TextChoices):
    ASYMPTOTIC = 'asymptotic', 'One OFDM symbol per symbol time'
    FRAMED = 'framed', 'Frame average and critical paths, cubic T_inv'
    AVERAGE = 'average', 'Frame average only'


@dataclass(frozen=True)
class GridSpec:
    bandwidths: tuple
    ks: tuple
    f_clks: tuple
    n_pe: int = 1
    mode: str = DseMode.FRAMED
    base_bandwidth_hz: float = 20e6

    @property
    def size(self) -> int:
        return len(self.bandwidths) * len(self.ks) * len(self.f_clks)


@dataclass(frozen=True)
class FeasibilityCell:
    bandwidth_hz: float
    K: int
    f_clk_hz: float
    nops_required: float  # inf when a deadline cannot be met at all
    capacity: float       # N_PE·f_clk/f_sample
    feasible: bool
    limiter: str


@dataclass(frozen=True)
class FeasibilityGrid:
    spec: GridSpec
    cells: tuple

    @cached_property
    def index(self) -> dict:
        return {(c.bandwidth_hz, c.K, c.f_clk_hz): c for c in self.cells}

    def cell(self, bandwidth_hz: float, K: int, f_clk_hz: float) -> FeasibilityCell:
        return self.index[(bandwidth_hz, K, f_clk_hz)]

    def max_k(self, bandwidth_hz: float, f_clk_hz: float) -> int:
        """Largest K of the grid that is feasible, 0 if none is."""
        feasible = [k for k in self.spec.ks if self.cell(bandwidth_hz, k, f_clk_hz).feasible]
        return max(feasible, default=0)
