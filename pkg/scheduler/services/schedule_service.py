"""
Schedule Service — deterministic per-node task schedules.

Phase order of one frame on one node:

    1. pilot FFT, channel estimate, local Gram  (after the pilot symbol)
    2. wait for the inverse, then local weights (ZF/MMSE only)
    3. N_UL,PB uplink symbols                   (FFT then decode)
    4. every downlink symbol                    (precode then IFFT, deadline-checked)
    5. remaining uplink symbols                 (preemptible, around the next
                                                 frame's phases 1-4)

build_node_schedule() plans the worst-case node (deepest leaf, longest
round trip). skew_schedules() replans every node of a tree with the
release times its position implies.
"""

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Optional

from baseband.models import Task
from dimensioning.services.complexity_service import op_counts
from dimensioning.services.slack_service import largest_pb
from scheduler.models import DeadlineVerdict, Granularity, Schedule, ScheduleEntry, TreeSchedule
from system.models import SystemParams, TreeTopology
from system.services.topology_service import hop_count

logger = logging.getLogger(__name__)

SCHEDULE_COLUMNS = ('node', 'task', 'symbol', 'start_s', 'end_s')
VERDICT_COLUMNS = ('symbol', 'node', 'completion_s', 'deadline_s', 'slack_s', 'met')


class ScheduleInfeasible(Exception):
    def __init__(self, message: str, symbol: Optional[int] = None, verdict=None):
        self.symbol = symbol
        self.verdict = verdict
        super().__init__(message)


@dataclass(frozen=True)
class NodeReleases:
    """Earliest times at which a node's inputs are available."""
    gram: float = 0.0
    gram_end: float = 0.0
    weights: float = 0.0
    precode: float = 0.0
    # uplink symbol -> (earliest decode start, earliest decode end)
    decode: dict = field(default_factory=dict)


# =============================================================================
# FRAME GEOMETRY
# =============================================================================

def pilot_end(params: SystemParams) -> float:
    return (params.N_UL1 + 1) * params.T_OFDM


def uplink_arrivals(params: SystemParams) -> list:
    """(symbol, time the whole symbol has been received), in frame order."""
    T = params.T_OFDM
    P = pilot_end(params)
    arrivals = [(j + 1, (j + 1) * T) for j in range(params.N_UL1)]
    arrivals += [(params.N_UL1 + j + 1, P + (j + 1) * T) for j in range(params.N_UL2)]
    return arrivals


def downlink_deadline(params: SystemParams, i: int) -> float:
    """Start of downlink symbol i's transmit slot."""
    return pilot_end(params) + params.T_OFDM * (params.N_UL2 + i)


# =============================================================================
# PLACEMENT
# =============================================================================

def fill_gaps(start: float, duration: float, reserved: list) -> list:
    """
    Preemptible placement: split ``duration`` over the free time from
    ``start`` on, skipping the sorted ``reserved`` intervals.

    Returns:
        list of (start, end) fragments
    """
    t = start
    remaining = duration
    fragments = []
    for res_start, res_end in reserved:
        if res_end <= t:
            continue
        if res_start <= t:
            t = res_end
            continue
        gap = res_start - t
        if gap >= remaining:
            break
        fragments.append((t, res_start))
        remaining -= gap
        t = res_end
    fragments.append((t, t + remaining))
    return fragments


class _NodePlanner:
    """Places one node's frame on a single-PE timeline."""

    def __init__(self, params: SystemParams, n_hat: int, node: int):
        self.params = params
        self.node = node
        self.rate = n_hat * params.f_sample
        self.entries = []

    def duration(self, ops: float) -> float:
        return ops / self.rate

    def put(self, task: str, symbol: int, start: float, ops: float) -> float:
        end = start + self.duration(ops)
        self.entries.append(ScheduleEntry(self.node, task, symbol, start, end, ops))
        return end

    def put_preemptible(self, task: str, symbol: int, start: float, ops: float, reserved: list) -> float:
        total = self.duration(ops)
        fragments = fill_gaps(start, total, reserved)
        for frag_start, frag_end in fragments:
            share = ops * (frag_end - frag_start) / total if total else ops
            self.entries.append(ScheduleEntry(self.node, task, symbol, frag_start, frag_end, share))
        return fragments[-1][1]


def _place_frame(params: SystemParams, n_hat: int, n_ul_pb: int, node: int,
                 releases: NodeReleases) -> tuple:
    counts = op_counts(params)
    planner = _NodePlanner(params, n_hat, node)
    decode_time = planner.duration(counts.decode)

    def decode_start(cursor: float, symbol: int) -> float:
        earliest, earliest_end = releases.decode.get(symbol, (0.0, 0.0))
        return max(cursor, earliest, earliest_end - decode_time)

    # 1. pilot processing
    cursor = planner.put(Task.FFT, 0, pilot_end(params), counts.FFT)
    cursor = planner.put(Task.CE, 0, cursor, counts.CE)

    # 2. Gram, inverse wait, weights
    if not params.is_cb:
        start = max(cursor, releases.gram, releases.gram_end - planner.duration(counts.B_i))
        gram_end = planner.put(Task.GRAM, 0, start, counts.B_i)
        weights_start = max(gram_end, releases.weights)
        if weights_start > gram_end:
            planner.entries.append(ScheduleEntry(node, Task.WAIT_INV, 0, gram_end, weights_start, 0))
        cursor = planner.put(Task.WEIGHTS, 0, weights_start, counts.W_i)

    # 3. uplink symbols before the downlink burst
    arrivals = uplink_arrivals(params)
    for symbol, arrival in arrivals[:n_ul_pb]:
        cursor = planner.put(Task.UL_FFT, symbol, max(cursor, arrival), counts.FFT)
        cursor = planner.put(Task.UL_DECODE, symbol, decode_start(cursor, symbol), counts.decode)

    # 4. downlink burst
    verdicts = []
    for i in range(1, params.N_DL + 1):
        cursor = planner.put(Task.DL_PRECODE, i, max(cursor, releases.precode), counts.precode)
        cursor = planner.put(Task.IFFT, i, cursor, counts.FFT)
        verdicts.append(DeadlineVerdict(i, node, cursor, downlink_deadline(params, i)))

    # 5. buffered uplink symbols, around the next frame's phases 1-4
    horizon = cursor + params.T_frame
    reserved = sorted(
        (e.start + params.T_frame, e.end + params.T_frame)
        for e in planner.entries if e.busy and e.end > e.start
    )
    for symbol, arrival in arrivals[n_ul_pb:]:
        cursor = planner.put_preemptible(Task.UL_FFT, symbol, max(cursor, arrival), counts.FFT, reserved)
        cursor = planner.put_preemptible(Task.UL_DECODE, symbol, decode_start(cursor, symbol),
                                         counts.decode, reserved)

    return tuple(planner.entries), tuple(verdicts), horizon


def _raise_first_violation(schedule: Schedule):
    for verdict in schedule.verdicts:
        if not verdict.met:
            raise ScheduleInfeasible(
                f'Downlink symbol {verdict.symbol} misses its deadline by '
                f'{-verdict.slack * 1e6:.3f} µs on node {verdict.node}.',
                symbol=verdict.symbol, verdict=verdict,
            )
    if not schedule.backlog_ok:
        raise ScheduleInfeasible(
            f'Buffered uplink work on node {schedule.node} overruns the next frame '
            f'by {(schedule.tail_end - schedule.horizon) * 1e6:.3f} µs.'
        )


def build_node_schedule(
    params: SystemParams,
    n_hat: int,
    n_ul_pb: Optional[int] = None,
    t_inv: Optional[float] = None,
    granularity: str = Granularity.VALUE,
    strict: bool = False,
    n_hops: Optional[int] = None,
) -> Schedule:
    """
    Worst-case single-node schedule.

    Args:
        params: system parameters
        n_hat: integer operations per sample the node can execute
        n_ul_pb: uplink symbols before the downlink burst; default is the
                 largest count that keeps every downlink deadline at n_hat
        t_inv: actual inversion time; default params.T_inv
        granularity: carried to skew_schedules
        strict: raise ScheduleInfeasible instead of returning violations
        n_hops: round-trip depth; default from params/tree

    Raises:
        ScheduleInfeasible: strict and some deadline or the backlog fails
    """
    n_hops = hop_count(params) if n_hops is None else n_hops
    t_inv = params.T_inv if t_inv is None else t_inv
    if n_ul_pb is None:
        n_ul_pb = largest_pb(params, n_hops, n_hat, t_inv)
    n_ul_pb = min(max(n_ul_pb, 0), params.N_UL)

    counts = op_counts(params)
    rate = n_hat * params.f_sample
    gram_end = pilot_end(params) + (counts.FFT + counts.CE + counts.B_i) / rate
    releases = NodeReleases(
        weights=gram_end + t_inv + 2 * n_hops * params.T_link,
        precode=n_hops * params.T_link,
    )
    entries, verdicts, horizon = _place_frame(params, n_hat, n_ul_pb, 0, releases)
    schedule = Schedule(
        node=0, params=params, n_hat=n_hat, n_ul_pb=n_ul_pb, granularity=granularity,
        t_inv=t_inv, entries=entries, verdicts=verdicts, horizon=horizon,
    )
    if not schedule.feasible:
        logger.warning('Schedule at N_OPS_hat=%d is infeasible (T_inv=%.3g s)', n_hat, t_inv)
        if strict:
            _raise_first_violation(schedule)
    return schedule


# =============================================================================
# TREE SKEW
# =============================================================================

def _decode_window(schedule: Schedule, symbol: int) -> tuple:
    parts = schedule.entries_for(Task.UL_DECODE, symbol)
    return parts[0].start, parts[-1].end


def skew_schedules(
    schedule: Schedule,
    topology: TreeTopology,
    T_link: Optional[float] = None,
    granularity: Optional[str] = None,
    strict: bool = False,
) -> TreeSchedule:
    """
    Per-node schedules on ``topology``.

    Accumulations (Gram, uplink decode) wait for their children: in value
    granularity a parent starts T_link after its children start and ends
    at least T_link after they end; in task granularity it starts T_link
    after they end. The CCU inverts after the root's last Gram value
    arrives, and the inverse reaches depth d after (d+1)·T_link.
    """
    params = schedule.params
    T_link = params.T_link if T_link is None else T_link
    granularity = granularity or schedule.granularity
    pipelined = granularity == Granularity.VALUE
    counts = op_counts(params)
    rate = schedule.n_hat * params.f_sample
    ce_end = pilot_end(params) + (counts.FFT + counts.CE) / rate
    gram_time = counts.B_i / rate

    # Gram accumulation, children first
    gram_start, gram_end = {}, {}
    for node in topology.post_order:
        start = ce_end
        for child in topology.children[node]:
            if pipelined:
                start = max(start, gram_start[child] + T_link, gram_end[child] + T_link - gram_time)
            else:
                start = max(start, gram_end[child] + T_link)
        gram_start[node] = start
        gram_end[node] = start + gram_time

    root = topology.root
    if params.is_cb:
        inversion_start = inversion_end = None
        weights_release = {node: 0.0 for node in range(topology.M)}
    else:
        inversion_start = gram_end[root] + T_link
        inversion_end = inversion_start + schedule.t_inv
        weights_release = {node: inversion_end + (topology.depth[node] + 1) * T_link
                           for node in range(topology.M)}

    placed = {}
    for node in topology.post_order:
        decode = {}
        for symbol, _arrival in uplink_arrivals(params):
            earliest, earliest_end = 0.0, 0.0
            for child in topology.children[node]:
                child_start, child_end = _decode_window(placed[child], symbol)
                if pipelined:
                    earliest = max(earliest, child_start + T_link)
                    earliest_end = max(earliest_end, child_end + T_link)
                else:
                    earliest = max(earliest, child_end + T_link)
            decode[symbol] = (earliest, earliest_end)

        releases = NodeReleases(
            gram=gram_start[node],
            weights=weights_release[node],
            precode=(topology.depth[node] + 1) * T_link,
            decode=decode,
        )
        entries, verdicts, horizon = _place_frame(params, schedule.n_hat, schedule.n_ul_pb, node, releases)
        placed[node] = Schedule(
            node=node, params=params, n_hat=schedule.n_hat, n_ul_pb=schedule.n_ul_pb,
            granularity=granularity, t_inv=schedule.t_inv, entries=entries,
            verdicts=verdicts, horizon=horizon,
            skew=gram_start[node] - ce_end if not params.is_cb else 0.0,
        )

    tree = TreeSchedule(
        topology=topology,
        schedules=tuple(placed[node] for node in range(topology.M)),
        granularity=granularity,
        inversion_start=inversion_start,
        inversion_end=inversion_end,
    )
    if not tree.feasible:
        logger.warning('Skewed schedule on %d nodes is infeasible', topology.M)
        if strict:
            for node_schedule in tree:
                if not node_schedule.feasible:
                    _raise_first_violation(node_schedule)
    return tree


# =============================================================================
# VERDICTS / EXPORT
# =============================================================================

def _as_schedules(schedules) -> list:
    if isinstance(schedules, Schedule):
        return [schedules]
    return list(schedules)


def check_deadlines(schedules, params: SystemParams = None) -> list:
    """
    Worst completion over all nodes for every downlink symbol.

    Returns:
        list of DeadlineVerdict, one per downlink symbol (empty without downlink)
    """
    nodes = _as_schedules(schedules)
    params = params or nodes[0].params
    verdicts = []
    for i in range(1, params.N_DL + 1):
        worst = None
        for node_schedule in nodes:
            ifft = node_schedule.entries_for(Task.IFFT, i)
            if not ifft:
                continue
            if worst is None or ifft[-1].end > worst.completion:
                worst = DeadlineVerdict(i, node_schedule.node, ifft[-1].end, downlink_deadline(params, i))
        if worst is not None:
            verdicts.append(worst)
    return verdicts


def schedule_rows(schedules) -> list:
    rows = []
    for node_schedule in _as_schedules(schedules):
        for entry in sorted(node_schedule.entries, key=lambda e: (e.start, e.end)):
            rows.append((entry.node, str(entry.task), entry.symbol, entry.start, entry.end))
    return rows


def schedule_csv(schedules) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(SCHEDULE_COLUMNS)
    for node, task, symbol, start, end in schedule_rows(schedules):
        writer.writerow([node, task, symbol, repr(start), repr(end)])
    return buffer.getvalue()


def verdicts_csv(verdicts) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(VERDICT_COLUMNS)
    for v in verdicts:
        writer.writerow([v.symbol, v.node, repr(v.completion), repr(v.deadline), repr(v.slack),
                         'yes' if v.met else 'no'])
    return buffer.getvalue()
