"""
Simulator Tests — scenarios, frame execution and oracle agreement.

Covers:
1. Scenario reproducibility
2. Small frames with closed-form results
3. The LTE preset end to end
4. Randomised agreement with the centralized reference
5. Sweeps and exports
6. The simulate management command
"""

import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from baseband.models import Task
from dimensioning.services.complexity_service import n_op_total
from scheduler.services.schedule_service import build_node_schedule
from simulator.models import EventKind, Scenario
from simulator.services.engine_service import SingularGramAbort
from simulator.services.frame_service import (
    EVENT_COLUMNS,
    error_metrics,
    events_csv,
    plan_frame,
    run_frame,
    sweep_frames,
)
from simulator.services.scenario_service import frame_data, generate_scenario, pilot_observation
from system.models import CCU, ChannelModel, ProcessingMode
from system.services.config_service import preset
from system.services.topology_service import build_tree, tree_from_parents


def tiny(**changes):
    return preset('tiny').with_changes(**changes)


# ═════════════════════════════════════════════════════════════════════════════
# 1. SCENARIOS
# ═════════════════════════════════════════════════════════════════════════════

class ScenarioTests(SimpleTestCase):

    def test_same_seed_same_scenario(self):
        a = generate_scenario(1, tiny())
        b = generate_scenario(1, tiny())
        self.assertTrue(np.array_equal(a.H, b.H))
        self.assertTrue(np.array_equal(frame_data(a, 3).uplink, frame_data(b, 3).uplink))

    def test_frames_differ(self):
        scenario = generate_scenario(1, tiny())
        self.assertFalse(np.array_equal(frame_data(scenario, 0).uplink, frame_data(scenario, 1).uplink))

    def test_noiseless_pilot_is_scaled_channel(self):
        scenario = generate_scenario(4, tiny(pilot_amplitude=2.0))
        y = pilot_observation(scenario, frame_data(scenario))
        self.assertTrue(np.array_equal(y, scenario.H * 2.0))

    def test_channel_shape(self):
        scenario = generate_scenario(0, tiny(M=7, K=2))
        self.assertEqual(scenario.H.shape, (7, 2))
        self.assertTrue(np.all(np.isfinite(scenario.H)))

    def test_per_subcarrier_shape(self):
        scenario = generate_scenario(0, tiny(channel_model=ChannelModel.PER_SUBCARRIER))
        self.assertEqual(scenario.H.shape, (8, 3, 2))

    def test_symbols_have_unit_power(self):
        data = frame_data(generate_scenario(0, preset('lte').with_changes(M=31)))
        self.assertAlmostEqual(float(np.mean(np.abs(data.uplink) ** 2)), 1.0, delta=0.05)


# ═════════════════════════════════════════════════════════════════════════════
# 2. SMALL FRAMES
# ═════════════════════════════════════════════════════════════════════════════

class SmallFrameTests(SimpleTestCase):

    def test_single_antenna_cb(self):
        scenario = generate_scenario(2, tiny(M=1, K=1, mode=ProcessingMode.CB))
        result = run_frame(scenario)
        data = frame_data(scenario)
        gain = np.abs(scenario.H[0, 0]) ** 2
        for symbol, decoded in result.decoded.items():
            np.testing.assert_allclose(decoded, gain * data.uplink[symbol - 1], rtol=1e-12)

    def test_noiseless_zf_recovers_symbols(self):
        scenario = generate_scenario(3, tiny(M=7, K=2))
        result = run_frame(scenario)
        data = frame_data(scenario)
        self.assertTrue(result.oracle_ok)
        for symbol, decoded in result.decoded.items():
            error = error_metrics(decoded, data.uplink[symbol - 1], 1e-9)
            self.assertTrue(error.ok, error)

    def test_every_uplink_symbol_reaches_ccu(self):
        result = run_frame(generate_scenario(0, tiny()))
        self.assertEqual(sorted(result.decoded), [1, 2, 3])
        self.assertEqual(sorted(result.transmitted), [1, 2])
        self.assertEqual(result.transmitted[1].shape, (8, 3))

    def test_singular_gram_aborts(self):
        params = tiny()
        H = np.ones((3, 2), dtype=complex)
        H[:, 1] = 0
        scenario = Scenario(seed=0, params=params, topology=build_tree(3), H=H)
        with self.assertRaises(SingularGramAbort) as ctx:
            run_frame(scenario)
        self.assertEqual(ctx.exception.pivot, 1)

    def test_per_subcarrier_channel(self):
        scenario = generate_scenario(5, tiny(channel_model=ChannelModel.PER_SUBCARRIER))
        result = run_frame(scenario)
        self.assertTrue(result.oracle_ok)
        for tally in result.tallies.values():
            self.assertEqual(tally.total, n_op_total(scenario.params))

    def test_mmse_matches_reference(self):
        scenario = generate_scenario(6, tiny(M=7, K=2, mode=ProcessingMode.MMSE, mmse_reg=0.3, noise_var=0.01))
        self.assertTrue(run_frame(scenario).oracle_ok)

    def test_topology_invariance(self):
        params = tiny(M=7, K=2)
        balanced = generate_scenario(9, params)
        chain = Scenario(seed=9, params=params, H=balanced.H,
                         topology=tree_from_parents((CCU, 0, 1, 2, 3, 4, 5), arity=1))
        a, b = run_frame(balanced), run_frame(chain)
        for symbol in a.decoded:
            self.assertLessEqual(error_metrics(b.decoded[symbol], a.decoded[symbol], 1e-12).rel_fro, 1e-12)
        for symbol in a.transmitted:
            self.assertLessEqual(error_metrics(b.transmitted[symbol], a.transmitted[symbol], 1e-12).rel_fro, 1e-12)

    def test_engine_reproduces_planned_times(self):
        scenario = generate_scenario(0, tiny(M=7, K=2))
        tree = plan_frame(scenario)
        result = run_frame(scenario, tree)
        self.assertLess(result.max_delay, 1e-15)
        planned_last = max(s.entries_for(Task.IFFT, 2)[-1].end for s in tree)
        self.assertAlmostEqual(result.verdicts[-1].completion, planned_last, places=15)


# ═════════════════════════════════════════════════════════════════════════════
# 3. LTE PRESET
# ═════════════════════════════════════════════════════════════════════════════

class LteFrameTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.scenario = generate_scenario(7, preset('lte'))
        cls.tree = plan_frame(cls.scenario)
        cls.result = run_frame(cls.scenario, cls.tree)

    def test_dimensioned_at_twelve(self):
        self.assertEqual(self.tree[0].n_hat, 12)

    def test_deadlines_met(self):
        self.assertTrue(self.result.deadlines_met)
        self.assertEqual([v.symbol for v in self.result.verdicts], [1, 2])

    def test_oracle_agreement(self):
        self.assertTrue(self.result.oracle_ok)
        for m in self.result.metrics:
            self.assertLessEqual(m.rel_fro, 1e-9)

    def test_op_tally_per_node(self):
        for tally in self.result.tallies.values():
            self.assertEqual(tally.total, 152950)

    def test_values_on_links(self):
        for values in self.result.values.values():
            self.assertEqual(values.up_values, 210 + 2 * 1200)
            self.assertEqual(values.down_values, 210 + 2 * 1200)
            self.assertEqual(values.up_scalars, 210 + 2 * 1200 * 20)

    def test_buffer_peak_matches_buffered_count(self):
        self.assertEqual(self.result.peak_buffered, self.tree[0].buffered_symbols)
        self.assertEqual(self.result.peak_buffered, 2)

    def test_inversion_waits_for_last_gram_value(self):
        root_gram = self.tree[0].entries_for(Task.GRAM)[0]
        self.assertAlmostEqual(self.result.inversion_start, root_gram.end + 0.5e-6)
        self.assertAlmostEqual(self.result.inversion_end - self.result.inversion_start, 40e-6)

    def test_simulated_equals_planned(self):
        self.assertLess(self.result.max_delay, 1e-15)


# ═════════════════════════════════════════════════════════════════════════════
# 4. RANDOMISED ORACLE AGREEMENT
# ═════════════════════════════════════════════════════════════════════════════

class OraclePropertyTests(SimpleTestCase):

    def _assert_matches(self, seed, M, K, mode):
        params = tiny(M=M, K=K, mode=mode, mmse_reg=0.1 if mode == ProcessingMode.MMSE else 0.0)
        result = run_frame(generate_scenario(seed, params))
        self.assertTrue(result.metrics)
        for m in result.metrics:
            self.assertTrue(m.ok, m)

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2 ** 31),
        M=st.sampled_from([1, 3, 7, 15, 31, 63, 127, 255]),
        K=st.integers(min_value=1, max_value=20),
        mode=st.sampled_from(ProcessingMode.values),
    )
    def test_distributed_matches_centralized(self, seed, M, K, mode):
        # ZF/MMSE keep at least two antennas per terminal so the Gram stays well conditioned
        if mode != ProcessingMode.CB:
            K = min(K, max(1, M // 2))
        self._assert_matches(seed, M, K, mode)

    def test_largest_array_every_mode(self):
        for mode in ProcessingMode.values:
            with self.subTest(mode=mode):
                self._assert_matches(2024, 255, 20, mode)


# ═════════════════════════════════════════════════════════════════════════════
# 5. SWEEPS AND EXPORT
# ═════════════════════════════════════════════════════════════════════════════

class SweepTests(SimpleTestCase):

    def test_single_frame_sweep_equals_run_frame(self):
        scenario = generate_scenario(11, tiny())
        sweep = sweep_frames(scenario, 1)
        single = run_frame(scenario)
        self.assertEqual(sweep.frames, 1)
        for symbol in single.decoded:
            self.assertTrue(np.array_equal(sweep.results[0].decoded[symbol], single.decoded[symbol]))
        self.assertEqual(len(sweep.results[0].events), len(single.events))

    def test_steady_state_is_periodic(self):
        scenario = generate_scenario(12, tiny())
        sweep = sweep_frames(scenario, 3)
        self.assertTrue(sweep.ok)
        self.assertEqual(len(set(sweep.peak_buffered)), 1)
        T_frame = scenario.params.T_frame
        first, later = sweep.results[0].events, sweep.results[2].events
        self.assertEqual(len(first), len(later))
        for a, b in zip(first, later):
            self.assertAlmostEqual(b.time - a.time, 2 * T_frame, places=12)

    def test_slow_inversion_misses_every_frame(self):
        scenario = generate_scenario(13, preset('lte').with_changes(M=31))
        schedule = build_node_schedule(scenario.params, 12, t_inv=70e-6, n_hops=scenario.topology.N_hops)
        sweep = sweep_frames(scenario, 3, schedule)
        self.assertEqual(sweep.violations, [(0, 2), (1, 2), (2, 2)])
        self.assertFalse(sweep.ok)

    def test_event_csv(self):
        result = run_frame(generate_scenario(0, tiny()))
        text = events_csv(result.events)
        lines = text.splitlines()
        self.assertEqual(lines[0], ','.join(EVENT_COLUMNS))
        self.assertEqual(len(lines), len(result.events) + 1)
        times = [e.time for e in result.events]
        self.assertEqual(times, sorted(times))
        kinds = {e.kind for e in result.events}
        self.assertIn(EventKind.INVERT_START, kinds)
        self.assertIn(EventKind.RECEIVE, kinds)


# ═════════════════════════════════════════════════════════════════════════════
# 6. COMMAND
# ═════════════════════════════════════════════════════════════════════════════

class SimulateCommandTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def test_writes_artifacts(self):
        call_command('simulate', preset='tiny', frames=2, seed=7, output_dir=str(self.out), stdout=StringIO())
        for name in ('simulation.txt', 'events.csv', 'tallies.csv', 'deadlines.csv'):
            self.assertTrue((self.out / name).exists(), name)
        self.assertIn('frame 1:', (self.out / 'simulation.txt').read_text())

    def test_identical_runs_identical_output(self):
        other = Path(self.tmp.name) / 'again'
        call_command('simulate', preset='tiny', seed=3, output_dir=str(self.out), stdout=StringIO())
        call_command('simulate', preset='tiny', seed=3, output_dir=str(other), stdout=StringIO())
        self.assertEqual((self.out / 'events.csv').read_text(), (other / 'events.csv').read_text())
        self.assertEqual((self.out / 'simulation.txt').read_text(), (other / 'simulation.txt').read_text())

    def test_json_format(self):
        call_command('simulate', preset='tiny', output_format='json', output_dir=str(self.out), stdout=StringIO())
        self.assertIn('"backlog_ok"', (self.out / 'simulation.json').read_text())

    def test_slow_inversion_exits_one(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('simulate', preset='tiny', t_inv=40e-6, output_dir=str(self.out), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
