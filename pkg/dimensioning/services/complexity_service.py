"""
Complexity Service — operation counts and operations-per-sample figures.

One "operation" is one PE invocation (a complex multiply with its
accumulate/butterfly adds). N_OPS figures are operations per received
sample, so a node needs a processing rate of N_OPS·f_sample.
"""

import math
from typing import Optional

from dimensioning.models import CriticalPathRow, CriticalPathTable, Limiter, NopsSweepPoint, OpCounts, PEClock
from system.models import ProcessingMode, SystemParams

# relative slack when rounding an ops figure up to an integer
ROUNDING_RTOL = 1e-9


class UnmeetableDeadline(ValueError):
    def __init__(self, symbol: int, available: float):
        self.symbol = symbol
        self.available = available
        super().__init__(
            f'Downlink symbol {symbol} has no processing time left '
            f'({available * 1e6:.3f} µs after inversion and hop transit).'
        )


def ceil_ops(value: float) -> int:
    """Smallest integer >= value, treating values within rounding noise of an integer as that integer."""
    return math.ceil(value - ROUNDING_RTOL * max(1.0, abs(value)))


def fft_ops(n_fft) -> float:
    """(N/2)·log2(N); exact integer for powers of two, real-valued otherwise."""
    n = float(n_fft)
    if n <= 1:
        return 0
    if n == int(n) and (int(n) & (int(n) - 1)) == 0:
        n = int(n)
        return (n // 2) * (n.bit_length() - 1)
    return n / 2 * math.log2(n)


def op_counts(params: SystemParams) -> OpCounts:
    K = params.K
    fft = fft_ops(params.N_FFT)
    per_symbol = params.N_SC * K
    if params.mode == ProcessingMode.CB:
        gram, weights_product = 0, 0
    else:
        gram, weights_product = K * (K + 1) // 2, K * K
    return OpCounts(
        mode=params.mode,
        CE=K,
        B_i=gram,
        W_i=weights_product,
        FFT=fft,
        decode=per_symbol,
        precode=per_symbol,
        N_op_weights=fft + K + gram + weights_product,
        N_op_OFDM=fft + per_symbol,
    )


def n_op_total(params: SystemParams) -> float:
    counts = op_counts(params)
    return counts.N_op_weights + (params.N_UL + params.N_DL) * counts.N_op_OFDM


def nops_avg(params: SystemParams) -> float:
    """Operations per sample averaged over the frame."""
    return n_op_total(params) / (params.T_frame * params.f_sample)


def nops_asymptotic(params: SystemParams) -> float:
    """One OFDM symbol processed per OFDM symbol time."""
    return op_counts(params).N_op_OFDM / (params.T_OFDM * params.f_sample)


def _critical_paths(params: SystemParams, n_hops: int, n_ul_pb: int, t_inv: Optional[float]):
    """(i, N_op_CP_i, T_CP_i, time left after the inverse stall) per downlink symbol."""
    counts = op_counts(params)
    t_inv = params.T_inv if t_inv is None else t_inv
    if params.mode == ProcessingMode.CB:
        stall = 0.0
    else:
        stall = t_inv + 2 * n_hops * params.T_link
    for i in range(1, params.N_DL + 1):
        t_cp = params.T_OFDM * (params.N_UL2 + i)
        yield i, counts.N_op_weights + (i + n_ul_pb) * counts.N_op_OFDM, t_cp, t_cp - stall


def nops_critical(
    params: SystemParams,
    n_hops: int,
    n_ul_pb: int = 0,
    t_inv: Optional[float] = None,
) -> CriticalPathTable:
    """
    Per-downlink-symbol critical-path requirement.

    Symbol i must be precoded and transformed within T_CP,i = T_OFDM·(N_UL2 + i)
    of the pilot, minus the inversion time and the round trip through the
    tree (ZF/MMSE only). ``n_ul_pb`` uplink symbols processed before the
    downlink burst lengthen every path.

    Raises:
        UnmeetableDeadline: no time left for some symbol
    """
    rows = []
    for i, n_op, t_cp, available in _critical_paths(params, n_hops, n_ul_pb, t_inv):
        if available <= 0:
            raise UnmeetableDeadline(i, available)
        rows.append(CriticalPathRow(
            i=i,
            N_op_CP_i=n_op,
            T_CP_i=t_cp,
            T_available=available,
            N_OPS_CP_i=n_op / (available * params.f_sample),
        ))
    return CriticalPathTable(rows=tuple(rows), n_ul_pb=n_ul_pb)


def nops_required(
    params: SystemParams,
    n_hops: int,
    n_ul_pb: int = 0,
    t_inv: Optional[float] = None,
) -> float:
    """N_OPS = max(frame average, critical path)."""
    return max(nops_avg(params), nops_critical(params, n_hops, n_ul_pb, t_inv).max)


def required_ops_hat(
    params: SystemParams,
    n_hops: int,
    n_ul_pb: int = 0,
    t_inv: Optional[float] = None,
) -> int:
    """Integer operations per sample that meet nops_required."""
    return ceil_ops(nops_required(params, n_hops, n_ul_pb, t_inv))


def t_inv_a(params: SystemParams, n_hops: int) -> float:
    """
    Inversion time at which the last downlink symbol's critical path
    starts to exceed the frame average. Infinite without downlink symbols.
    """
    if params.N_DL == 0:
        return math.inf
    counts = op_counts(params)
    n_op_cp = counts.N_op_weights + params.N_DL * counts.N_op_OFDM
    t_cp = params.T_OFDM * (params.N_UL2 + params.N_DL)
    return t_cp - (n_op_cp / n_op_total(params)) * params.T_frame - 2 * n_hops * params.T_link


def t_inv_b(params: SystemParams, n_hops: int) -> float:
    """
    Inversion time at which every critical path needs exactly the
    per-symbol rate. Negative means the inverse would be due before the pilot.
    """
    counts = op_counts(params)
    return (params.T_OFDM * (params.N_UL2 - counts.N_op_weights / counts.N_op_OFDM)
            - 2 * n_hops * params.T_link)


def t_inv_range(params: SystemParams, n_hops: int, count: int = 41) -> list:
    """
    ``count`` evenly spaced inversion times from 0 up to (excluding) the
    point where the first downlink symbol has no time left.
    """
    limit = params.T_OFDM * (params.N_UL2 + 1) - 2 * n_hops * params.T_link
    if limit <= 0:
        raise UnmeetableDeadline(1, limit)
    return [limit * j / count for j in range(count)]


def nops_sweep(params: SystemParams, n_hops: int, t_inv_values) -> list:
    """
    N_OPS against the inversion time: the frame average, every critical
    path and their maximum. Flat at the average up to T_inv,A, then
    growing, and steeper than the per-symbol rate past T_inv,B.
    """
    avg = nops_avg(params)
    points = []
    for t_inv in t_inv_values:
        paths = tuple(
            n_op / (available * params.f_sample) if available > 0 else math.inf
            for _i, n_op, _t_cp, available in _critical_paths(params, n_hops, 0, t_inv)
        )
        critical = max(paths, default=0.0)
        if math.isinf(critical):
            limiter = Limiter.DEADLINE
        elif critical > avg:
            limiter = Limiter.CRITICAL
        else:
            limiter = Limiter.AVERAGE
        points.append(NopsSweepPoint(
            T_inv=float(t_inv), N_OPS_avg=avg, N_OPS_CP=paths, N_OPS=max(avg, critical), limiter=limiter,
        ))
    return points


def select_pe_clock(
    params: SystemParams,
    n_hops: int,
    n_pe: int = 1,
    n_ul_pb: int = 0,
    t_inv: Optional[float] = None,
) -> PEClock:
    """
    Clock as an integer multiple m of f_sample, smallest m with N_PE·m >= N_OPS.
    """
    if n_pe < 1:
        raise ValueError(f'N_PE must be >= 1 (got {n_pe}).')
    n_ops = nops_required(params, n_hops, n_ul_pb, t_inv)
    multiple = max(ceil_ops(n_ops / n_pe), 1)
    return PEClock(
        N_PE=n_pe,
        multiple=multiple,
        f_clk=multiple * params.f_sample,
        N_OPS_hat=n_pe * multiple,
        N_OPS=n_ops,
    )


def cubic_t_inv(params: SystemParams, K: int, anchor_K: Optional[int] = None,
                anchor_t_inv: Optional[float] = None) -> float:
    """Inversion time at K terminals, growing with K³ from an anchor point."""
    anchor_K = params.K if anchor_K is None else anchor_K
    anchor_t_inv = params.T_inv if anchor_t_inv is None else anchor_t_inv
    return anchor_t_inv * (K / anchor_K) ** 3
