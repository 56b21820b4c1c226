"""
Scheduler Tests — single-node placement, tree skew, deadline verdicts.

Covers:
1. Gap filling for preemptible uplink work
2. Worst-case node schedule on the LTE preset
3. Skewed schedules across a tree
4. Deadline feasibility as the rate and inversion time change
5. The schedule management command
"""

import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from baseband.models import Task
from dimensioning.services.complexity_service import nops_avg, required_ops_hat
from dimensioning.services.slack_service import downlink_completions
from scheduler.models import Granularity
from scheduler.services.schedule_service import (
    ScheduleInfeasible,
    build_node_schedule,
    check_deadlines,
    downlink_deadline,
    fill_gaps,
    pilot_end,
    schedule_csv,
    skew_schedules,
    uplink_arrivals,
    verdicts_csv,
)
from system.models import ProcessingMode
from system.services.config_service import preset
from system.services.topology_service import build_tree, hop_count


# ═════════════════════════════════════════════════════════════════════════════
# 1. GAP FILLING
# ═════════════════════════════════════════════════════════════════════════════

class FillGapsTests(SimpleTestCase):

    def test_no_reservation_runs_contiguously(self):
        self.assertEqual(fill_gaps(1.0, 2.0, []), [(1.0, 3.0)])

    def test_fits_before_reservation(self):
        self.assertEqual(fill_gaps(0.0, 1.0, [(2.0, 3.0)]), [(0.0, 1.0)])

    def test_split_around_reservation(self):
        self.assertEqual(fill_gaps(0.0, 5.0, [(2.0, 3.0)]), [(0.0, 2.0), (3.0, 6.0)])

    def test_start_inside_reservation_waits(self):
        self.assertEqual(fill_gaps(2.5, 1.0, [(2.0, 3.0)]), [(3.0, 4.0)])

    def test_past_reservations_ignored(self):
        self.assertEqual(fill_gaps(5.0, 1.0, [(0.0, 1.0), (2.0, 3.0)]), [(5.0, 6.0)])


# ═════════════════════════════════════════════════════════════════════════════
# 2. NODE SCHEDULE
# ═════════════════════════════════════════════════════════════════════════════

class NodeScheduleTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')
        self.schedule = build_node_schedule(self.lte, 12)

    def test_frame_geometry(self):
        T = self.lte.T_OFDM
        self.assertAlmostEqual(pilot_end(self.lte), T)
        self.assertEqual([s for s, _ in uplink_arrivals(self.lte)], [1, 2])
        self.assertAlmostEqual(uplink_arrivals(self.lte)[0][1], 2 * T)
        self.assertAlmostEqual(downlink_deadline(self.lte, 2), 5 * T)

    def test_lte_meets_deadlines_at_twelve(self):
        self.assertTrue(self.schedule.feasible)
        self.assertEqual(self.schedule.n_ul_pb, 0)
        last = self.schedule.verdicts[-1]
        P = pilot_end(self.lte)
        self.assertAlmostEqual((last.completion - P) * 1e6, 271.59, places=1)
        self.assertAlmostEqual((last.deadline - P) * 1e6, 285.71, places=1)

    def test_task_order(self):
        tasks = [e.task for e in self.schedule.entries]
        self.assertEqual(tasks[:6], [Task.FFT, Task.CE, Task.GRAM, Task.WAIT_INV, Task.WEIGHTS, Task.DL_PRECODE])
        self.assertEqual(tasks[-2:], [Task.UL_FFT, Task.UL_DECODE])

    def test_entries_do_not_overlap(self):
        busy = sorted((e for e in self.schedule.entries if e.busy), key=lambda e: e.start)
        for earlier, later in zip(busy, busy[1:]):
            self.assertLessEqual(earlier.end, later.start + 1e-15)

    def test_utilization_matches_average_rate(self):
        self.assertAlmostEqual(self.schedule.utilization, nops_avg(self.lte) / 12, places=9)

    def test_weights_wait_for_inverse_round_trip(self):
        gram = self.schedule.entries_for(Task.GRAM)[0]
        weights = self.schedule.entries_for(Task.WEIGHTS)[0]
        n_hops = hop_count(self.lte)
        self.assertAlmostEqual(weights.start, gram.end + self.lte.T_inv + 2 * n_hops * self.lte.T_link)

    def test_slow_inversion_misses_second_symbol(self):
        schedule = build_node_schedule(self.lte, 12, t_inv=55e-6)
        self.assertFalse(schedule.feasible)
        self.assertTrue(schedule.verdicts[0].met)
        self.assertFalse(schedule.verdicts[1].met)

    def test_strict_raises_with_symbol(self):
        with self.assertRaises(ScheduleInfeasible) as ctx:
            build_node_schedule(self.lte, 12, t_inv=55e-6, strict=True)
        self.assertEqual(ctx.exception.symbol, 2)

    def test_cb_has_no_inversion_phase(self):
        schedule = build_node_schedule(self.lte.with_changes(mode=ProcessingMode.CB), 12)
        tasks = {e.task for e in schedule.entries}
        self.assertNotIn(Task.GRAM, tasks)
        self.assertNotIn(Task.WAIT_INV, tasks)
        self.assertNotIn(Task.WEIGHTS, tasks)

    def test_no_downlink_buffers_everything(self):
        params = self.lte.with_changes(N_DL=0)
        schedule = build_node_schedule(params, 8)
        self.assertEqual(schedule.n_ul_pb, 0)
        self.assertTrue(schedule.feasible)
        self.assertEqual(check_deadlines(schedule), [])
        self.assertEqual(verdicts_csv([]), 'symbol,node,completion_s,deadline_s,slack_s,met\n')

    def test_preempted_tail_keeps_total_ops(self):
        params = self.lte.with_changes(N_DL=0)
        schedule = build_node_schedule(params, 8)
        decode = schedule.entries_for(Task.UL_DECODE, 2)
        self.assertGreater(len(decode), 1)
        self.assertAlmostEqual(sum(e.ops for e in decode), params.N_SC * params.K)

    def test_uplink_before_downlink(self):
        schedule = build_node_schedule(self.lte, 17, n_ul_pb=1)
        first_precode = schedule.entries_for(Task.DL_PRECODE, 1)[0]
        self.assertLessEqual(schedule.entries_for(Task.UL_DECODE, 1)[-1].end, first_precode.start)

    def test_schedule_csv_header(self):
        text = schedule_csv(self.schedule)
        self.assertTrue(text.startswith('node,task,symbol,start_s,end_s\n'))
        self.assertIn(',FFT,0,', text)


# ═════════════════════════════════════════════════════════════════════════════
# 3. TREE SKEW
# ═════════════════════════════════════════════════════════════════════════════

class SkewScheduleTests(SimpleTestCase):

    def setUp(self):
        self.tiny = preset('tiny')
        self.topology = build_tree(self.tiny.M, self.tiny.tree_arity)
        self.n_hat = required_ops_hat(self.tiny, hop_count(self.tiny))
        self.schedule = build_node_schedule(self.tiny, self.n_hat)

    def test_zero_link_latency_gives_identical_nodes(self):
        tree = skew_schedules(self.schedule, self.topology, T_link=0.0)
        reference = [(e.task, e.symbol, e.start, e.end) for e in tree[0].entries]
        for node_schedule in tree:
            timing = [(e.task, e.symbol, e.start, e.end) for e in node_schedule.entries]
            self.assertEqual(len(timing), len(reference))
            for (task, symbol, start, end), (ref_task, ref_symbol, ref_start, ref_end) in zip(timing, reference):
                self.assertEqual((task, symbol), (ref_task, ref_symbol))
                self.assertAlmostEqual(start, ref_start, places=15)
                self.assertAlmostEqual(end, ref_end, places=15)

    def test_value_granularity_offsets_by_link(self):
        tree = skew_schedules(self.schedule, self.topology, granularity=Granularity.VALUE)
        root_gram = tree[0].entries_for(Task.GRAM)[0]
        for child in self.topology.children[0]:
            child_gram = tree[child].entries_for(Task.GRAM)[0]
            self.assertGreaterEqual(root_gram.start, child_gram.start + self.tiny.T_link - 1e-15)
            self.assertGreaterEqual(root_gram.end, child_gram.end + self.tiny.T_link - 1e-15)
        self.assertGreater(tree[0].skew, 0)
        self.assertEqual(tree[1].skew, 0)

    def test_task_granularity_waits_for_children(self):
        tree = skew_schedules(self.schedule, self.topology, granularity=Granularity.TASK)
        root_gram = tree[0].entries_for(Task.GRAM)[0]
        child_gram = tree[1].entries_for(Task.GRAM)[0]
        self.assertGreaterEqual(root_gram.start, child_gram.end + self.tiny.T_link - 1e-15)

    def test_inversion_window(self):
        tree = skew_schedules(self.schedule, self.topology)
        root_gram = tree[0].entries_for(Task.GRAM)[0]
        self.assertAlmostEqual(tree.inversion_start, root_gram.end + self.tiny.T_link)
        self.assertAlmostEqual(tree.inversion_end - tree.inversion_start, self.tiny.T_inv)
        leaf_weights = tree[1].entries_for(Task.WEIGHTS)[0]
        self.assertAlmostEqual(leaf_weights.start, tree.inversion_end + 2 * self.tiny.T_link)

    def test_worst_verdict_per_symbol(self):
        tree = skew_schedules(self.schedule, self.topology)
        verdicts = check_deadlines(tree)
        self.assertEqual([v.symbol for v in verdicts], [1, 2])
        for v in verdicts:
            for node_schedule in tree:
                self.assertGreaterEqual(v.completion, node_schedule.entries_for(Task.IFFT, v.symbol)[-1].end)


# ═════════════════════════════════════════════════════════════════════════════
# 4. FEASIBILITY PROPERTIES
# ═════════════════════════════════════════════════════════════════════════════

def _deadlines_met(schedule) -> bool:
    return all(v.met for v in schedule.verdicts)


frame_points = st.fixed_dictionaries({
    'K': st.integers(1, 24),
    'N_UL1': st.integers(0, 2),
    'N_UL2': st.integers(0, 4),
    'N_DL': st.integers(1, 3),
    'T_link': st.floats(0, 3e-6),
    'T_inv': st.floats(0, 120e-6),
})


class FeasibilityPropertyTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')

    def test_arrival_limited_frame_stays_feasible(self):
        params = self.lte.with_changes(K=1, N_UL1=0, N_UL2=3, N_DL=1, T_link=1.938e-6, T_inv=2.68e-6)
        at_seven = build_node_schedule(params, 7)
        at_eight = build_node_schedule(params, 8)
        self.assertTrue(at_seven.feasible)
        self.assertTrue(at_eight.feasible)
        self.assertEqual(at_eight.n_ul_pb, 2)
        self.assertGreater(at_eight.verdicts[0].slack, 0)

    def test_worst_node_matches_dimensioning_timeline(self):
        params = self.lte.with_changes(K=4, N_UL1=1, N_UL2=2, T_inv=10e-6)
        schedule = build_node_schedule(params, 9, n_ul_pb=2)
        expected = downlink_completions(params, hop_count(params), 9, n_ul_pb=2)
        self.assertEqual(len(expected), params.N_DL)
        for verdict, completion in zip(schedule.verdicts, expected):
            self.assertAlmostEqual(verdict.completion, completion, places=15)

    @settings(max_examples=100, deadline=None)
    @given(point=frame_points, n_hat=st.integers(1, 30))
    def test_faster_nodes_keep_deadlines(self, point, n_hat):
        params = self.lte.with_changes(**point)
        if _deadlines_met(build_node_schedule(params, n_hat)):
            self.assertTrue(_deadlines_met(build_node_schedule(params, n_hat + 1)))

    @settings(max_examples=100, deadline=None)
    @given(point=frame_points, n_hat=st.integers(1, 30), extra=st.floats(0, 100e-6))
    def test_slower_inversion_never_recovers(self, point, n_hat, extra):
        params = self.lte.with_changes(**point)
        if not _deadlines_met(build_node_schedule(params, n_hat)):
            slower = build_node_schedule(params, n_hat, t_inv=params.T_inv + extra)
            self.assertFalse(_deadlines_met(slower))


# ═════════════════════════════════════════════════════════════════════════════
# 5. COMMAND
# ═════════════════════════════════════════════════════════════════════════════

class ScheduleCommandTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def test_lte_writes_schedule_and_deadlines(self):
        call_command('schedule', preset='lte', output_dir=str(self.out), stdout=StringIO())
        self.assertTrue((self.out / 'schedule.csv').exists())
        deadlines = (self.out / 'deadlines.csv').read_text().splitlines()
        self.assertEqual(len(deadlines), 3)
        self.assertTrue(deadlines[2].endswith(',yes'))

    def test_slow_inversion_exits_one(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('schedule', preset='lte', t_inv=60e-6, output_dir=str(self.out),
                         stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertTrue((self.out / 'deadlines.csv').read_text().splitlines()[2].endswith(',no'))

    def test_tree_json(self):
        call_command('schedule', preset='tiny', tree=True, output_format='json',
                     output_dir=str(self.out), stdout=StringIO())
        self.assertIn('"inversion_start"', (self.out / 'schedule.json').read_text())
