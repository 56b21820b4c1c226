"""
Explore Service — feasibility over bandwidth, terminal count and clock.

Bandwidth scales f_sample, N_FFT and N_SC linearly from the base point
(N_FFT may leave the powers of two; the FFT count then uses a real log2).
A cell is feasible when its required N_OPS fits the N_PE·f_clk/f_sample
operations per sample the node can execute.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from itertools import product

from django.conf import settings

from dimensioning.models import Limiter
from dimensioning.services.complexity_service import (
    UnmeetableDeadline,
    cubic_t_inv,
    nops_asymptotic,
    nops_avg,
    nops_critical,
)
from dimensioning.services.slack_service import K_SEARCH_LIMIT, anchor_k, fits
from dse.models import DseMode, FeasibilityCell, FeasibilityGrid, GridSpec
from system.models import SystemParams
from system.services.topology_service import hop_count

logger = logging.getLogger(__name__)

GRID_COLUMNS = ('bandwidth_hz', 'K', 'f_clk_hz', 'nops_required', 'feasible', 'limiter')


def _scaled(value, factor):
    scaled = value * factor
    return int(round(scaled)) if math.isclose(scaled, round(scaled), rel_tol=0, abs_tol=1e-9) else scaled


def scale_bandwidth(params: SystemParams, bandwidth_hz: float, base_bandwidth_hz: float = 20e6) -> SystemParams:
    factor = bandwidth_hz / base_bandwidth_hz
    return params.with_changes(
        N_FFT=_scaled(params.N_FFT, factor),
        N_SC=_scaled(params.N_SC, factor),
        f_sample=params.f_sample * factor,
    )


def capacity(params: SystemParams, f_clk: float, n_pe: int = 1) -> float:
    """Operations per sample a node with n_pe PEs at f_clk can execute."""
    return n_pe * f_clk / params.f_sample


def requirement(params: SystemParams, mode: str, n_hops: int) -> tuple:
    """(N_OPS required, limiting constraint) of one parameter point."""
    if mode == DseMode.ASYMPTOTIC:
        return nops_asymptotic(params), Limiter.ASYMPTOTIC
    avg = nops_avg(params)
    if mode == DseMode.AVERAGE:
        return avg, Limiter.AVERAGE
    try:
        critical = nops_critical(params, n_hops).max
    except UnmeetableDeadline:
        return math.inf, Limiter.DEADLINE
    if critical > avg:
        return critical, Limiter.CRITICAL
    return avg, Limiter.AVERAGE


def evaluate_cell(base: SystemParams, spec: GridSpec, bandwidth_hz: float, K: int, f_clk: float,
                  n_hops: int, anchor_K: int) -> FeasibilityCell:
    params = scale_bandwidth(base, bandwidth_hz, spec.base_bandwidth_hz)
    # T_inv grows with K³ from the base point's inversion time
    anchored = params.with_changes(K=K, T_inv=cubic_t_inv(base, K, anchor_K))
    required, limiter = requirement(anchored, spec.mode, n_hops)
    available = capacity(params, f_clk, spec.n_pe)
    return FeasibilityCell(
        bandwidth_hz=bandwidth_hz,
        K=K,
        f_clk_hz=f_clk,
        nops_required=required,
        capacity=available,
        feasible=fits(required, available),
        limiter=limiter,
    )


def explore(base: SystemParams, spec: GridSpec, workers: int = None) -> FeasibilityGrid:
    """
    Evaluate every (bandwidth, K, f_clk) cell of ``spec``.

    Cells run in a thread pool of ``workers`` threads (MIMO_DSE_WORKERS by
    default), or inline when that is below 1. The grid keeps bandwidth-major,
    then K, then f_clk order regardless of completion order.
    """
    if not spec.size:
        raise ValueError('Grid is empty.')
    workers = settings.MIMO_DSE_WORKERS if workers is None else workers
    n_hops = hop_count(base)
    anchor = anchor_k(base)
    axes = list(product(spec.bandwidths, spec.ks, spec.f_clks))

    def evaluate(point):
        bandwidth_hz, K, f_clk = point
        return evaluate_cell(base, spec, bandwidth_hz, K, f_clk, n_hops, anchor)

    if workers < 1:
        cells = tuple(map(evaluate, axes))
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            cells = tuple(executor.map(evaluate, axes))
    grid = FeasibilityGrid(spec=spec, cells=cells)
    logger.info('Explored %d cells (%s mode), %d feasible', len(cells), spec.mode,
                sum(c.feasible for c in cells))
    return grid


def max_terminals(params: SystemParams, f_clk: float, n_pe: int = 1, mode: str = DseMode.FRAMED,
                  n_hops: int = None) -> int:
    """Largest K whose requirement fits N_PE·f_clk/f_sample; 0 if K=1 already fails."""
    n_hops = hop_count(params) if n_hops is None else n_hops
    anchor = anchor_k(params)
    available = capacity(params, f_clk, n_pe)
    best = 0
    for K in range(1, K_SEARCH_LIMIT + 1):
        candidate = params.with_changes(K=K, T_inv=cubic_t_inv(params, K, anchor))
        required, _limiter = requirement(candidate, mode, n_hops)
        if not fits(required, available):
            break
        best = K
    else:
        logger.warning('Terminal search stopped at the limit K=%d', K_SEARCH_LIMIT)
    return best


def check_monotone(grid: FeasibilityGrid) -> list:
    """
    Cells that are feasible although a neighbour with fewer terminals or
    less bandwidth (same f_clk) is not. Empty for a consistent grid.
    """
    spec = grid.spec
    bandwidths = sorted(spec.bandwidths)
    ks = sorted(spec.ks)
    violations = []
    for f_clk in spec.f_clks:
        for b_index, bandwidth in enumerate(bandwidths):
            for k_index, K in enumerate(ks):
                cell = grid.cell(bandwidth, K, f_clk)
                if not cell.feasible:
                    continue
                smaller = []
                if k_index:
                    smaller.append(grid.cell(bandwidth, ks[k_index - 1], f_clk))
                if b_index:
                    smaller.append(grid.cell(bandwidths[b_index - 1], K, f_clk))
                violations.extend((cell, other) for other in smaller if not other.feasible)
    if violations:
        logger.warning('Feasibility grid is not monotone in %d places', len(violations))
    return violations


def grid_rows(grid: FeasibilityGrid) -> list:
    return [
        (c.bandwidth_hz, c.K, c.f_clk_hz, c.nops_required, 'yes' if c.feasible else 'no', c.limiter)
        for c in grid.cells
    ]
