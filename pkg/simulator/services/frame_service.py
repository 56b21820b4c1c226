"""
Frame Service — run frames end to end and check them against the
centralized reference.

    scenario = generate_scenario(7, preset('lte'))
    result = run_frame(scenario)
    assert result.oracle_ok and result.deadlines_met
"""

import csv
import io
import logging
from typing import Optional

import numpy as np
from django.conf import settings

from baseband.models import Task
from baseband.services.ofdm_service import extract_subcarriers, strip_cyclic_prefix
from baseband.services.reference_service import centralized_reference
from dimensioning.services.complexity_service import required_ops_hat
from scheduler.models import Granularity, Schedule, TreeSchedule
from scheduler.services.schedule_service import build_node_schedule, skew_schedules
from simulator.models import ErrorMetrics, FrameData, FrameResult, Scenario, SweepReport
from simulator.services.engine_service import run_engine
from simulator.services.scenario_service import frame_data, pilot_observation, uplink_observation

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ('time_s', 'node', 'event', 'payload_class', 'symbol', 'subcarrier_block')
IFFT_RTOL = 1e-10


# =============================================================================
# SCHEDULES
# =============================================================================

def plan_frame(
    scenario: Scenario,
    n_hat: Optional[int] = None,
    t_inv: Optional[float] = None,
    n_ul_pb: Optional[int] = None,
    granularity: str = Granularity.VALUE,
) -> TreeSchedule:
    """
    Skewed schedules for every node of the scenario's tree. ``n_hat`` is
    dimensioned from the configured T_inv when omitted; ``t_inv`` is the
    inversion time the frame actually sees.
    """
    params = scenario.params
    n_hops = scenario.topology.N_hops if params.N_hops is None else params.N_hops
    if n_hat is None:
        n_hat = required_ops_hat(params, n_hops)
    schedule = build_node_schedule(params, n_hat, n_ul_pb=n_ul_pb, t_inv=t_inv,
                                   granularity=granularity, n_hops=n_hops)
    return skew_schedules(schedule, scenario.topology)


def _as_tree(scenario: Scenario, schedule) -> TreeSchedule:
    if schedule is None:
        return plan_frame(scenario)
    if isinstance(schedule, Schedule):
        return skew_schedules(schedule, scenario.topology)
    if len(schedule) != scenario.topology.M:
        raise ValueError(f'Schedule covers {len(schedule)} nodes, the tree has {scenario.topology.M}.')
    return schedule


# =============================================================================
# ORACLE
# =============================================================================

def error_metrics(actual, expected, tolerance: float, direction: str = '', symbol: int = 0) -> ErrorMetrics:
    """Max absolute and relative Frobenius error of ``actual`` against ``expected``."""
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    diff = actual - expected
    max_abs = float(np.max(np.abs(diff), initial=0.0))
    norm = float(np.linalg.norm(expected))
    rel = float(np.linalg.norm(diff)) / norm if norm > 0 else max_abs
    return ErrorMetrics(direction=direction, symbol=symbol, max_abs=max_abs, rel_fro=rel, tolerance=tolerance)


def oracle_tolerance(params) -> float:
    if params.is_cb:
        return settings.MIMO_CB_ATOL_PER_NODE * params.M
    return settings.MIMO_ORACLE_RTOL


def compare_to_oracle(scenario: Scenario, data: FrameData, result: FrameResult) -> list:
    """
    Decoded and transmitted values against A·y and W·q built centrally from
    the same channel estimate, plus the IFFT round trip of every waveform.
    """
    p = scenario.params
    tolerance = oracle_tolerance(p)
    estimate = pilot_observation(scenario, data) / p.pilot_amplitude
    reference = centralized_reference(estimate, p.mode, p.mmse_reg)

    metrics = []
    for symbol in sorted(result.decoded):
        y = uplink_observation(scenario, data, symbol)
        if scenario.per_subcarrier:
            expected = np.einsum('nkm,nm->nk', reference.A, y)
        else:
            expected = y @ reference.A.T
        metrics.append(error_metrics(result.decoded[symbol], expected, tolerance, 'uplink', symbol))

    for symbol in sorted(result.transmitted):
        q = data.downlink[symbol - 1]
        if scenario.per_subcarrier:
            expected = np.einsum('nmk,nk->nm', reference.W, q)
        else:
            expected = q @ reference.W.T
        metrics.append(error_metrics(result.transmitted[symbol], expected, tolerance, 'downlink', symbol))

        spectrum = np.fft.fft(strip_cyclic_prefix(result.waveforms[symbol], p.cyclic_prefix), axis=-1)
        recovered = extract_subcarriers(spectrum, p.N_SC).T
        metrics.append(error_metrics(recovered, result.transmitted[symbol], IFFT_RTOL, 'ifft', symbol))

    for m in metrics:
        if not m.ok:
            logger.warning('Frame %d %s symbol %d: relative error %.3g above %.3g',
                           result.frame, m.direction, m.symbol, m.rel_fro, m.tolerance)
    return metrics


# =============================================================================
# FRAMES
# =============================================================================

def run_frame(scenario: Scenario, schedule=None, frame: int = 0) -> FrameResult:
    """
    Execute frame ``frame`` of the scenario.

    Args:
        scenario: channel, parameters and tree
        schedule: TreeSchedule, a single-node Schedule to skew, or None to
                  dimension one from the parameters
        frame: frame index; data is drawn from (seed, frame) and event
               times are offset by frame·T_frame

    Raises:
        SingularGramAbort: the accumulated Gram matrix cannot be inverted
    """
    tree = _as_tree(scenario, schedule)
    data = frame_data(scenario, frame)
    result = run_engine(scenario, tree, data, offset=frame * scenario.params.T_frame)
    result.metrics = compare_to_oracle(scenario, data, result)
    logger.info('Frame %d: %d events, oracle %s, deadlines %s', frame, len(result.events),
                'ok' if result.oracle_ok else 'MISMATCH', 'met' if result.deadlines_met else 'MISSED')
    return result


def sweep_frames(scenario: Scenario, n_frames: int, schedule=None) -> SweepReport:
    """Back-to-back frames on one channel realisation."""
    if n_frames < 1:
        raise ValueError('n_frames must be >= 1')
    tree = _as_tree(scenario, schedule)
    results = tuple(run_frame(scenario, tree, frame) for frame in range(n_frames))
    backlog_ok = all(node_schedule.backlog_ok for node_schedule in tree)
    report = SweepReport(results=results, backlog_ok=backlog_ok)
    if report.violations:
        logger.warning('%d deadline violations over %d frames', len(report.violations), n_frames)
    return report


# =============================================================================
# EXPORT
# =============================================================================

def events_csv(events) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(EVENT_COLUMNS)
    for e in events:
        writer.writerow([repr(e.time), e.node, e.kind, e.payload_class,
                         '' if e.symbol is None else e.symbol, e.subcarrier_block])
    return buffer.getvalue()


def tallies_csv(results) -> str:
    """Per frame and node: PE operations per task and values on the links."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    tasks = [t for t in Task.values if t != Task.WAIT_INV]
    writer.writerow(['frame', 'node', *tasks, 'total_ops', 'up_values', 'down_values', 'up_scalars', 'down_scalars'])
    for result in results:
        for node in sorted(result.tallies):
            tally = result.tallies[node]
            values = result.values[node]
            writer.writerow([result.frame, node, *(tally[t] for t in tasks), tally.total,
                             values.up_values, values.down_values, values.up_scalars, values.down_scalars])
    return buffer.getvalue()
