"""
Slack Service — how far a chosen N̂_OPS stretches.

Given the integer processing rate, find the largest inversion time, tree
depth and terminal count it still supports, and how many uplink symbols
fit before the downlink burst.
"""

import logging
import math
from typing import Optional

from django.conf import settings

from dimensioning.models import DEADLINE_TOL, SlackReport
from dimensioning.services.complexity_service import (
    ROUNDING_RTOL,
    UnmeetableDeadline,
    cubic_t_inv,
    nops_avg,
    nops_required,
    op_counts,
)
from system.models import ProcessingMode, SystemParams

logger = logging.getLogger(__name__)

K_SEARCH_LIMIT = 4096


def anchor_k(params: SystemParams) -> int:
    """Terminal count the configured T_inv belongs to."""
    configured = str(getattr(settings, 'MIMO_CUBIC_TINV_ANCHOR_K', '') or '').strip()
    return int(configured) if configured else params.K


def fits(required: float, n_hat: float) -> bool:
    return required <= n_hat * (1 + ROUNDING_RTOL)


def _path_slack(params: SystemParams, n_hat: float, n_ul_pb: int = 0) -> list:
    """Per downlink symbol: T_CP,i minus the processing time of its path."""
    counts = op_counts(params)
    rate = n_hat * params.f_sample
    return [
        params.T_OFDM * (params.N_UL2 + i) - (counts.N_op_weights + (i + n_ul_pb) * counts.N_op_OFDM) / rate
        for i in range(1, params.N_DL + 1)
    ]


def max_t_inv(params: SystemParams, n_hops: int, n_hat: float) -> Optional[float]:
    """
    Largest inversion time keeping every critical path within n_hat.
    Infinite when nothing depends on it (CB or no downlink), None when
    the frame average alone already exceeds n_hat.
    """
    if not fits(nops_avg(params), n_hat):
        return None
    if params.mode == ProcessingMode.CB or params.N_DL == 0:
        return math.inf
    return min(_path_slack(params, n_hat)) - 2 * n_hops * params.T_link


def max_n_hops(params: SystemParams, n_hat: float) -> Optional[int]:
    """Deepest tree (in hops) the critical paths tolerate; None if unbounded."""
    if params.mode == ProcessingMode.CB or params.N_DL == 0 or params.T_link == 0:
        return None
    budget = min(_path_slack(params, n_hat)) - params.T_inv
    return max(math.floor(budget / (2 * params.T_link) + ROUNDING_RTOL), 0)


def supports(params: SystemParams, n_hops: int, n_hat: float, n_ul_pb: int = 0,
             t_inv: Optional[float] = None) -> bool:
    try:
        return fits(nops_required(params, n_hops, n_ul_pb, t_inv), n_hat)
    except UnmeetableDeadline:
        return False


def downlink_completions(params: SystemParams, n_hops: int, n_hat: float, n_ul_pb: int = 0,
                         t_inv: Optional[float] = None) -> list:
    """
    Finish time of every downlink symbol on the worst-case node.

    Unlike the critical-path formula, an uplink symbol processed before the
    burst cannot start before it has been received.
    """
    counts = op_counts(params)
    rate = n_hat * params.f_sample
    T = params.T_OFDM
    t_inv = params.T_inv if t_inv is None else t_inv
    pilot_end = (params.N_UL1 + 1) * T

    cursor = pilot_end + counts.FFT / rate
    cursor = cursor + counts.CE / rate
    if not params.is_cb:
        gram_end = cursor + counts.B_i / rate
        inverse_back = (pilot_end + (counts.FFT + counts.CE + counts.B_i) / rate
                        + t_inv + 2 * n_hops * params.T_link)
        cursor = max(gram_end, inverse_back) + counts.W_i / rate

    arrivals = [(j + 1) * T for j in range(params.N_UL1)]
    arrivals += [pilot_end + (j + 1) * T for j in range(params.N_UL2)]
    for arrival in arrivals[:n_ul_pb]:
        cursor = max(cursor, arrival) + counts.FFT / rate
        cursor = cursor + counts.decode / rate

    completions = []
    for _ in range(params.N_DL):
        cursor = max(cursor, n_hops * params.T_link) + counts.precode / rate
        cursor = cursor + counts.FFT / rate
        completions.append(cursor)
    return completions


def meets_deadlines(params: SystemParams, n_hops: int, n_hat: float, n_ul_pb: int = 0,
                    t_inv: Optional[float] = None) -> bool:
    pilot_end = (params.N_UL1 + 1) * params.T_OFDM
    for i, completion in enumerate(downlink_completions(params, n_hops, n_hat, n_ul_pb, t_inv), start=1):
        deadline = pilot_end + params.T_OFDM * (params.N_UL2 + i)
        if deadline - completion < -DEADLINE_TOL * max(1.0, abs(deadline)):
            return False
    return True


def max_terminals_at(params: SystemParams, n_hops: int, n_hat: float,
                     anchor_K: Optional[int] = None) -> int:
    """
    Largest K supported at n_hat with T_inv scaled cubically in K.
    0 when even a single terminal does not fit.
    """
    anchor_K = anchor_k(params) if anchor_K is None else anchor_K
    best = 0
    for K in range(1, K_SEARCH_LIMIT + 1):
        scaled = params.with_changes(K=K, T_inv=cubic_t_inv(params, K, anchor_K))
        if not supports(scaled, n_hops, n_hat):
            break
        best = K
    else:
        logger.warning('Terminal search stopped at the limit K=%d', K_SEARCH_LIMIT)
    return best


def largest_pb(params: SystemParams, n_hops: int, n_hat: float, t_inv: Optional[float] = None) -> int:
    """
    Uplink symbols that can be processed before the downlink burst.

    A count is kept only if the critical paths allow it and every downlink
    symbol still meets its deadline once uplink arrivals are waited for.
    Both checks only get harder as the count grows. Without downlink
    symbols nothing is gained, so everything is buffered.
    """
    if params.N_DL == 0:
        return 0
    best = 0
    for n_ul_pb in range(1, params.N_UL + 1):
        if not (supports(params, n_hops, n_hat, n_ul_pb, t_inv)
                and meets_deadlines(params, n_hops, n_hat, n_ul_pb, t_inv)):
            break
        best = n_ul_pb
    return best


def slack_analysis(params: SystemParams, n_hops: int, n_hat: int,
                   anchor_K: Optional[int] = None) -> SlackReport:
    n_ul_pb = largest_pb(params, n_hops, n_hat)
    report = SlackReport(
        N_OPS_hat=n_hat,
        max_T_inv=max_t_inv(params, n_hops, n_hat),
        max_K=max_terminals_at(params, n_hops, n_hat, anchor_K),
        max_N_hops=max_n_hops(params, n_hat),
        N_UL_PB=n_ul_pb,
        N_UL_buffered=params.N_UL - n_ul_pb,
    )
    logger.info('Slack at N_OPS_hat=%d: max T_inv=%s, max K=%d, max N_hops=%s, N_UL_PB=%d',
                n_hat, report.max_T_inv, report.max_K, report.max_N_hops, n_ul_pb)
    return report
