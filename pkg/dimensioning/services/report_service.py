"""
Report Service — the full dimensioning report and its text/CSV forms.

build_report() chains every formula for one parameter point: op counts,
N_OPS figures, inversion-time thresholds, PE/clock choice, slack, memory
and links.
"""

import csv
import io
import logging
import math
from typing import Optional

from dimensioning.models import DimensioningReport
from dimensioning.services.complexity_service import (
    n_op_total,
    nops_asymptotic,
    nops_avg,
    nops_critical,
    op_counts,
    select_pe_clock,
    t_inv_a,
    t_inv_b,
)
from dimensioning.services.resources_service import link_report, memory_report
from dimensioning.services.slack_service import slack_analysis
from system.models import SystemParams
from system.services.topology_service import hop_count

logger = logging.getLogger(__name__)

CRITICAL_PATH_COLUMNS = ('i', 'N_op_CP_i', 'T_CP_i_s', 'T_available_s', 'N_OPS_CP_i')


def build_report(
    params: SystemParams,
    n_hops: Optional[int] = None,
    n_pe: Optional[int] = None,
    n_ul_pb: Optional[int] = None,
) -> DimensioningReport:
    """
    Dimension one parameter point.

    Args:
        params: system parameters (T_inv is the design inversion time)
        n_hops: hop count; defaults to params.N_hops or the binary tree on M nodes
        n_pe: processing elements per node; defaults to params.N_PE
        n_ul_pb: force this many uplink symbols before the downlink burst;
                 by default the largest count the chosen N̂_OPS allows

    Raises:
        UnmeetableDeadline: some downlink deadline leaves no processing time
    """
    n_hops = hop_count(params) if n_hops is None else n_hops
    n_pe = params.N_PE if n_pe is None else n_pe
    notes = []

    forced_pb = n_ul_pb if n_ul_pb is not None else 0
    critical = nops_critical(params, n_hops, forced_pb)
    pe_clock = select_pe_clock(params, n_hops, n_pe, forced_pb)
    slack = slack_analysis(params, n_hops, pe_clock.N_OPS_hat)

    pb = slack.N_UL_PB if n_ul_pb is None else n_ul_pb
    if n_ul_pb is not None:
        notes.append(f'N_UL_PB forced to {n_ul_pb}')
    if params.N_hops is None:
        notes.append(f'N_hops={n_hops} from a {params.tree_arity}-ary tree on M={params.M} nodes')

    tia = t_inv_a(params, n_hops)
    if params.T_inv > tia:
        notes.append('T_inv above T_inv_A: the critical path sets N_OPS')

    report = DimensioningReport(
        params=params,
        N_hops=n_hops,
        op_counts=op_counts(params),
        N_op_total=n_op_total(params),
        N_OPS_avg=nops_avg(params),
        critical=critical,
        N_OPS=pe_clock.N_OPS,
        N_OPS_asymptotic=nops_asymptotic(params),
        T_inv_A=tia,
        T_inv_B=t_inv_b(params, n_hops),
        pe_clock=pe_clock,
        slack=slack,
        memory=memory_report(params, pb),
        link=link_report(params, pe_clock.N_OPS_hat),
        notes=tuple(notes),
    )
    logger.info('Dimensioned %s K=%d M=%d: N_OPS=%.4f, N_OPS_hat=%d, f_clk=%.6g Hz',
                params.mode, params.K, params.M, report.N_OPS,
                pe_clock.N_OPS_hat, pe_clock.f_clk)
    return report


# =============================================================================
# TEXT / CSV
# =============================================================================

def _fmt(value) -> str:
    if value is None:
        return 'unbounded'
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf'
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return format(value, '.10g')
    return str(value)


def report_items(report: DimensioningReport) -> list:
    """Ordered (key, value) pairs of the report."""
    p = report.params
    c = report.op_counts
    pe = report.pe_clock
    s = report.slack
    m = report.memory
    link = report.link
    items = [
        ('mode', p.mode),
        ('K', p.K),
        ('M', p.M),
        ('N_FFT', p.N_FFT),
        ('N_SC', p.N_SC),
        ('N_UL1', p.N_UL1),
        ('N_UL2', p.N_UL2),
        ('N_DL', p.N_DL),
        ('f_sample_hz', p.f_sample),
        ('T_OFDM_s', p.T_OFDM),
        ('T_frame_s', p.T_frame),
        ('T_inv_s', p.T_inv),
        ('T_link_s', p.T_link),
        ('N_hops', report.N_hops),
        ('N_op_FFT', c.FFT),
        ('N_op_CE', c.CE),
        ('N_op_B_i', c.B_i),
        ('N_op_W_i', c.W_i),
        ('N_op_weights', c.N_op_weights),
        ('N_op_OFDM', c.N_op_OFDM),
        ('N_op_total', report.N_op_total),
        ('N_OPS_avg', report.N_OPS_avg),
    ]
    items.extend((f'N_OPS_CP_{row.i}', row.N_OPS_CP_i) for row in report.critical.rows)
    items.extend([
        ('N_OPS_critical', report.N_OPS_critical),
        ('N_OPS', report.N_OPS),
        ('N_OPS_asymptotic', report.N_OPS_asymptotic),
        ('T_inv_A_s', report.T_inv_A),
        ('T_inv_B_s', report.T_inv_B),
        ('N_PE', pe.N_PE),
        ('f_clk_hz', pe.f_clk),
        ('N_OPS_hat', pe.N_OPS_hat),
        ('max_T_inv_s', s.max_T_inv),
        ('max_K', s.max_K),
        ('max_N_hops', s.max_N_hops),
        ('N_UL_PB', p.N_UL - m.N_UL_buffered),
        ('N_UL_buffered', m.N_UL_buffered),
        ('Mem_input_bits', m.Mem_input),
        ('Mem_processing_bits', m.Mem_processing),
        ('Mem_output_bits', m.Mem_output),
        ('Mem_buffers_total_bits', m.buffers_total),
        ('Mem_channel_estimates_bits', m.Mem_channel_estimates),
        ('Mem_weights_bits', m.Mem_weights),
        ('twiddle_rom_words', m.twiddle_rom_words),
        ('twiddle_rom_bits', m.twiddle_rom_bits),
        ('N_bits_up', link.N_bits_up),
        ('N_bits_down', link.N_bits_down),
        ('N_bits_up_exact', link.N_bits_up_exact),
        ('N_bits_down_exact', link.N_bits_down_exact),
        ('R_up_min_bps', link.R_up_min),
        ('R_down_min_bps', link.R_down_min),
        ('R_up_matched_bps', link.R_up_matched),
        ('R_down_matched_bps', link.R_down_matched),
        ('throughput_up_bps', link.throughput_up),
        ('throughput_down_bps', link.throughput_down),
    ])
    return items


def report_to_text(report: DimensioningReport) -> str:
    lines = [f'{key}: {_fmt(value)}' for key, value in report_items(report)]
    lines.extend(f'# {note}' for note in report.notes)
    return '\n'.join(lines) + '\n'


def critical_path_csv(report: DimensioningReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CRITICAL_PATH_COLUMNS)
    for row in report.critical.rows:
        writer.writerow([row.i, _fmt(row.N_op_CP_i), _fmt(row.T_CP_i),
                         _fmt(row.T_available), _fmt(row.N_OPS_CP_i)])
    return buffer.getvalue()


def sweep_columns(params: SystemParams) -> tuple:
    paths = tuple(f'N_OPS_CP_{i}' for i in range(1, params.N_DL + 1))
    return ('T_inv_s', 'N_OPS_avg') + paths + ('N_OPS', 'limiter')


def nops_sweep_csv(params: SystemParams, points) -> str:
    """One row per inversion time; a path with no time left reads inf."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(sweep_columns(params))
    for point in points:
        writer.writerow([_fmt(point.T_inv), _fmt(point.N_OPS_avg), *map(_fmt, point.N_OPS_CP),
                         _fmt(point.N_OPS), point.limiter])
    return buffer.getvalue()
