"""
Engine Service — discrete-event execution of one frame over the tree.

Every node walks its planned task list. A task starts at the latest of
its planned start, the end of the node's previous task and the arrival of
its inputs (child partial sums, the inverse, the downlink symbols); a
start later than planned is logged as a delay. Kernels run at the end of
their task, so a parent only ever consumes values its children finished.

Attempts are popped from one heap ordered by (time, event priority,
deeper node first, node id, sequence), which makes traces reproducible.
"""

import heapq
import itertools
import logging
from collections import defaultdict

import numpy as np

from baseband.models import OpTally, Task
from baseband.services.estimation_service import estimate_channel
from baseband.services.fft_service import fft_dit
from baseband.services.gram_service import accumulate_gram, local_gram
from baseband.services.inversion_service import GramNotPositiveDefinite, invert_gram
from baseband.services.ofdm_service import add_cyclic_prefix, extract_subcarriers, map_to_grid, strip_cyclic_prefix
from baseband.services.weights_service import conjugate_weights, decode_local, local_weights, precode_local
from dimensioning.services.complexity_service import op_counts
from scheduler.models import DeadlineVerdict, Granularity, TreeSchedule
from scheduler.services.schedule_service import downlink_deadline, uplink_arrivals
from simulator.models import EVENT_PRIORITY, Event, EventKind, FrameData, FrameResult, PayloadClass, Scenario, ValueTally
from simulator.services.scenario_service import pilot_observation, pilot_waveform, uplink_waveform
from system.models import CCU

logger = logging.getLogger(__name__)

# starts later than planned by more than this (relative to T_frame) count as delays
DELAY_RTOL = 1e-12

_INVERSE = ('ccu', 'inverse')


class SingularGramAbort(Exception):
    def __init__(self, frame: int, pivot: int, value: float):
        self.frame = frame
        self.pivot = pivot
        self.value = value
        super().__init__(f'Frame {frame} aborted: accumulated Gram matrix is singular '
                         f'(pivot {pivot} = {value:.3e}).')


class FrameEngine:
    """Runs one frame of ``scenario`` against a skewed tree schedule."""

    def __init__(self, scenario: Scenario, tree: TreeSchedule, data: FrameData, offset: float = 0.0):
        self.scenario = scenario
        self.params = scenario.params
        self.topology = scenario.topology
        self.tree = tree
        self.data = data
        self.offset = offset
        self.pipelined = tree.granularity == Granularity.VALUE
        self.T_link = self.params.T_link

        schedule = tree[0]
        counts = op_counts(self.params)
        rate = schedule.n_hat * self.params.f_sample
        self.group_time = {Task.GRAM: counts.B_i / rate, Task.UL_DECODE: counts.decode / rate}
        self.model_ops = {
            Task.FFT: counts.FFT, Task.CE: counts.CE, Task.GRAM: counts.B_i, Task.WEIGHTS: counts.W_i,
            Task.UL_FFT: counts.FFT, Task.UL_DECODE: counts.decode,
            Task.DL_PRECODE: counts.precode, Task.IFFT: counts.FFT,
        }
        self.t_inv = schedule.t_inv

        self.result = FrameResult(frame=data.frame)
        self.tallies = {node: OpTally() for node in range(self.topology.M)}
        self.values = {node: ValueTally() for node in range(self.topology.M)}

        self._heap = []
        self._seq = itertools.count()
        self._cursor = defaultdict(int)
        self._free = defaultdict(float)
        self._first_start = {}
        self._done = {}
        self._waiting = defaultdict(list)

        # node state
        self._y_pilot = {}
        self._estimate = {}
        self._gram = {}
        self._weights = {}
        self._samples = {}
        self._partial = {}
        self._precoded = {}
        self._inverse = None

        self._pilot_samples = pilot_waveform(scenario, data)
        self._pilot_observed = pilot_observation(scenario, data)
        self._uplink_samples = {s: uplink_waveform(scenario, data, s)
                                for s, _ in uplink_arrivals(self.params)}
        self._block = f'0-{self.params.N_SC - 1}'

    # ── Event plumbing ───────────────────────────────────────────────────────

    def _log(self, time: float, node: int, kind: str, payload_class: str = '', symbol=None, block: str = ''):
        self.result.events.append(Event(self.offset + time, node, kind, payload_class, symbol, block))

    def _push(self, time: float, node: int):
        depth = self.topology.depth[node]
        heapq.heappush(self._heap, (time, EVENT_PRIORITY[EventKind.COMPUTE_START], -depth, node,
                                    next(self._seq)))

    def _wake(self, key):
        for node in self._waiting.pop(key, []):
            entry = self._entry(node)
            self._push(max(entry.start, self._free[node]), node)

    def _entry(self, node: int):
        return self.tree[node].entries[self._cursor[node]]

    # ── Dependencies ─────────────────────────────────────────────────────────

    def _child_window(self, child: int, task: str, symbol: int):
        key = (child, task, symbol)
        if key not in self._done:
            return key, None
        return key, (self._first_start[key], self._done[key])

    def _dependencies(self, node: int, entry):
        """(ready, min_end) for the first fragment of ``entry``'s task, or (wait_key, None)."""
        depth = self.topology.depth[node]
        if entry.task in (Task.GRAM, Task.UL_DECODE):
            ready, min_end = 0.0, 0.0
            for child in self.topology.children[node]:
                key, window = self._child_window(child, entry.task, entry.symbol)
                if window is None:
                    return key, None
                start, end = window
                if self.pipelined:
                    ready = max(ready, start + self.T_link)
                    min_end = max(min_end, end + self.T_link)
                else:
                    ready = max(ready, end + self.T_link)
            return None, (ready, min_end)
        if entry.task == Task.WEIGHTS:
            if _INVERSE not in self._done:
                return _INVERSE, None
            return None, (self._done[_INVERSE] + (depth + 1) * self.T_link, 0.0)
        if entry.task == Task.DL_PRECODE:
            return None, ((depth + 1) * self.T_link, 0.0)
        return None, (0.0, 0.0)

    # ── Main loop ────────────────────────────────────────────────────────────

    def run(self) -> FrameResult:
        for node in range(self.topology.M):
            if self.tree[node].entries:
                self._push(self.tree[node].entries[0].start, node)
        while self._heap:
            _time, _priority, _depth, node, _seq = heapq.heappop(self._heap)
            self._attempt(node)

        unfinished = [n for n in range(self.topology.M) if self._cursor[n] < len(self.tree[n].entries)]
        if unfinished:
            raise RuntimeError(f'Engine stalled with unfinished nodes {unfinished[:5]}')

        self.result.tallies = self.tallies
        self.result.values = self.values
        self.result.events.sort(key=lambda e: (e.time, EVENT_PRIORITY[e.kind], e.node))
        self.result.verdicts = self._verdicts()
        self.result.peak_buffered = self._peak_buffered()
        return self.result

    def _attempt(self, node: int):
        entry = self._entry(node)
        key = (node, entry.task, entry.symbol)
        first = key not in self._first_start
        if entry.busy:
            start = max(entry.start, self._free[node])
            if first:
                wait_key, deps = self._dependencies(node, entry)
                if deps is None:
                    self._waiting[wait_key].append(node)
                    return
                ready, min_end = deps
                start = max(start, ready)
                if min_end:
                    start = max(start, min_end - self.group_time[entry.task])
                self._first_start[key] = start
            end = entry.end if start == entry.start else start + entry.duration
            self._free[node] = end
        else:
            # WAIT_INV only marks idle time
            start, end = entry.start, entry.end
            self._first_start.setdefault(key, start)

        delay = start - entry.start
        if delay > DELAY_RTOL * self.params.T_frame:
            logger.warning('Node %d %s[%d] delayed by %.3g s', node, entry.task, entry.symbol, delay)
            self.result.max_delay = max(self.result.max_delay, delay)

        if entry.busy:
            self._log(start, node, EventKind.COMPUTE_START, entry.task, entry.symbol)
            self._log(end, node, EventKind.COMPUTE_END, entry.task, entry.symbol)

        self._cursor[node] += 1
        entries = self.tree[node].entries
        group_done = (self._cursor[node] >= len(entries)
                      or (entries[self._cursor[node]].task, entries[self._cursor[node]].symbol)
                      != (entry.task, entry.symbol))
        if group_done and entry.busy:
            self._done[key] = end
            self._execute(node, entry.task, entry.symbol, end)
            self._wake(key)
        if self._cursor[node] < len(entries):
            nxt = entries[self._cursor[node]]
            self._push(max(nxt.start, self._free[node]), node)

    # ── Kernels ──────────────────────────────────────────────────────────────

    def _tally(self, node: int):
        """Kernel tally, or None when the per-subcarrier model charges instead."""
        return None if self.scenario.per_subcarrier else self.tallies[node]

    def _execute(self, node: int, task: str, symbol: int, end: float):
        p = self.params
        tally = self._tally(node)
        if tally is None:
            self.tallies[node].charge(task, self.model_ops[task])

        if task == Task.FFT:
            samples = strip_cyclic_prefix(self._pilot_samples[node], p.cyclic_prefix)
            spectrum = fft_dit(samples, tally=tally, task=Task.FFT)
            if self.scenario.per_subcarrier:
                self._y_pilot[node] = self._pilot_observed[:, node, :]
            else:
                self._y_pilot[node] = extract_subcarriers(spectrum, p.N_SC)[:p.K]

        elif task == Task.CE:
            self._estimate[node] = estimate_channel(self._y_pilot[node], p.pilot_amplitude, tally)
            if p.is_cb:
                self._weights[node] = conjugate_weights(self._estimate[node])

        elif task == Task.GRAM:
            own = local_gram(self._estimate[node], tally)
            children = [self._gram[c] for c in self.topology.children[node]]
            self._gram[node] = accumulate_gram(own, children)
            self._send_up(node, end, PayloadClass.GRAM, 0, self._gram[node].data)
            if self.topology.parents[node] == CCU:
                self._invert(end)

        elif task == Task.WEIGHTS:
            self._weights[node] = local_weights(self._inverse, self._estimate[node], tally)

        elif task == Task.UL_FFT:
            samples = strip_cyclic_prefix(self._uplink_samples[symbol][node], p.cyclic_prefix)
            self._samples[(node, symbol)] = extract_subcarriers(
                fft_dit(samples, tally=tally, task=Task.UL_FFT), p.N_SC)

        elif task == Task.UL_DECODE:
            children = [self._partial.pop((c, symbol)) for c in self.topology.children[node]]
            partial = decode_local(self._weights[node], self._samples.pop((node, symbol)), children, tally)
            self._send_up(node, end, PayloadClass.DECODED, symbol, partial, per_subcarrier=True)
            if self.topology.parents[node] == CCU:
                self.result.decoded[symbol] = partial
            else:
                self._partial[(node, symbol)] = partial

        elif task == Task.DL_PRECODE:
            q = self.data.downlink[symbol - 1]
            depth = self.topology.depth[node]
            self._log((depth + 1) * self.T_link, node, EventKind.RECEIVE, PayloadClass.PRECODE_INPUT,
                      symbol, self._block)
            self._count_down(node, q, per_subcarrier=True)
            self._precoded[(node, symbol)] = precode_local(self._weights[node], q, tally)

        elif task == Task.IFFT:
            x_i = self._precoded.pop((node, symbol))
            samples = fft_dit(map_to_grid(x_i, p.N_FFT), inverse=True, tally=tally, task=Task.IFFT)
            if symbol not in self.result.transmitted:
                self.result.transmitted[symbol] = np.zeros((p.N_SC, p.M), dtype=complex)
                self.result.waveforms[symbol] = np.zeros((p.M, p.N_FFT + p.cyclic_prefix), dtype=complex)
            self.result.transmitted[symbol][:, node] = x_i
            self.result.waveforms[symbol][node] = add_cyclic_prefix(samples, p.cyclic_prefix)

    def _send_up(self, node: int, time: float, payload: str, symbol: int, value, per_subcarrier: bool = False):
        parent = self.topology.parents[node]
        block = self._block if per_subcarrier else ''
        self._log(time, node, EventKind.SEND, payload, symbol, block)
        self._log(time + self.T_link, parent, EventKind.RECEIVE, payload, symbol, block)
        value = np.asarray(value)
        words = value.shape[0] if per_subcarrier else value.size
        self.values[node] += ValueTally(up_values=words, up_scalars=value.size)

    def _count_down(self, node: int, value, per_subcarrier: bool = False):
        value = np.asarray(value)
        words = value.shape[0] if per_subcarrier else value.size
        self.values[node] += ValueTally(down_values=words, down_scalars=value.size)

    def _invert(self, root_end: float):
        start = root_end + self.T_link
        end = start + self.t_inv
        self._log(start, CCU, EventKind.INVERT_START, PayloadClass.GRAM)
        root = self.topology.root
        try:
            self._inverse = invert_gram(self._gram[root], self.params.mode, self.params.mmse_reg)
        except GramNotPositiveDefinite as exc:
            raise SingularGramAbort(self.data.frame, exc.pivot, exc.value) from exc
        self._log(end, CCU, EventKind.INVERT_END, PayloadClass.INVERSE)
        self._log(end, CCU, EventKind.SEND, PayloadClass.INVERSE)
        for node in range(self.topology.M):
            arrival = end + (self.topology.depth[node] + 1) * self.T_link
            self._log(arrival, node, EventKind.RECEIVE, PayloadClass.INVERSE)
            self._count_down(node, self._inverse.data)
        self.result.inversion_start = self.offset + start
        self.result.inversion_end = self.offset + end
        self._done[_INVERSE] = end
        self._wake(_INVERSE)

    # ── Frame summary ────────────────────────────────────────────────────────

    def _verdicts(self) -> list:
        verdicts = []
        for i in range(1, self.params.N_DL + 1):
            worst = None
            for node in range(self.topology.M):
                end = self._done.get((node, Task.IFFT, i))
                if end is not None and (worst is None or end > worst.completion):
                    worst = DeadlineVerdict(i, node, end, downlink_deadline(self.params, i))
            if worst is not None:
                if not worst.met:
                    logger.warning('Frame %d: downlink symbol %d late by %.3g s on node %d',
                                   self.data.frame, i, -worst.slack, worst.node)
                verdicts.append(worst)
        return verdicts

    def _peak_buffered(self) -> int:
        """Largest number of uplink symbols held as raw samples at any node."""
        peak = 0
        arrivals = uplink_arrivals(self.params)
        for node in range(self.topology.M):
            changes = []
            for symbol, arrival in arrivals:
                changes.append((arrival, 1))
                changes.append((self._done[(node, Task.UL_FFT, symbol)], -1))
            level = 0
            for _time, delta in sorted(changes, key=lambda c: (c[0], c[1])):
                level += delta
                peak = max(peak, level)
        return peak


def run_engine(scenario: Scenario, tree: TreeSchedule, data: FrameData, offset: float = 0.0) -> FrameResult:
    return FrameEngine(scenario, tree, data, offset).run()
