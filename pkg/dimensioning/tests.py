"""
Dimensioning Tests — op counts, N_OPS figures, slack, resources, API, CLI.

Covers:
1. Op counts and per-sample figures on the LTE preset
2. Inversion-time thresholds
3. Clock selection and slack variants
4. Memory and link figures
5. Report text/CSV and the dimension command
6. REST endpoints
"""

import math
import tempfile
from io import StringIO
from pathlib import Path

from django.core.cache import cache
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from rest_framework import status
from rest_framework.test import APIClient

from dimensioning.services.complexity_service import (
    UnmeetableDeadline,
    ceil_ops,
    cubic_t_inv,
    fft_ops,
    n_op_total,
    nops_asymptotic,
    nops_avg,
    nops_critical,
    nops_required,
    nops_sweep,
    op_counts,
    required_ops_hat,
    select_pe_clock,
    t_inv_a,
    t_inv_b,
    t_inv_range,
)
from dimensioning.models import Limiter
from dimensioning.services.report_service import build_report, critical_path_csv, nops_sweep_csv, report_to_text
from dimensioning.services.resources_service import link_report, memory_report
from dimensioning.services.slack_service import (
    downlink_completions,
    largest_pb,
    max_n_hops,
    max_t_inv,
    max_terminals_at,
    meets_deadlines,
    slack_analysis,
    supports,
)
from system.models import ProcessingMode
from system.services.config_service import preset

N_HOPS = 8


# ═════════════════════════════════════════════════════════════════════════════
# 1. OP COUNTS AND N_OPS
# ═════════════════════════════════════════════════════════════════════════════

class ComplexityTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')

    def test_fft_ops(self):
        self.assertEqual(fft_ops(2048), 11264)
        self.assertEqual(fft_ops(1), 0)
        self.assertAlmostEqual(fft_ops(1536), 768 * math.log2(1536))

    def test_lte_op_counts(self):
        counts = op_counts(self.lte)
        self.assertEqual((counts.CE, counts.B_i, counts.W_i), (20, 210, 400))
        self.assertEqual(counts.N_op_weights, 11894)
        self.assertEqual(counts.N_op_OFDM, 35264)
        self.assertEqual(n_op_total(self.lte), 152950)

    def test_conjugate_beamforming_skips_gram_and_weights(self):
        counts = op_counts(self.lte.with_changes(mode=ProcessingMode.CB))
        self.assertEqual((counts.B_i, counts.W_i), (0, 0))
        self.assertEqual(counts.N_op_weights, 11284)

    def test_frame_average(self):
        self.assertAlmostEqual(nops_avg(self.lte), 9.9577, places=4)

    def test_critical_paths(self):
        table = nops_critical(self.lte, N_HOPS)
        self.assertEqual([row.i for row in table.rows], [1, 2])
        self.assertAlmostEqual(table.rows[0].N_OPS_CP_i, 9.2317, places=4)
        self.assertAlmostEqual(table.rows[1].N_OPS_CP_i, 11.2867, places=4)
        self.assertEqual(table.argmax, 2)
        self.assertAlmostEqual(nops_required(self.lte, N_HOPS), 11.2867, places=4)
        self.assertEqual(required_ops_hat(self.lte, N_HOPS), 12)

    def test_asymptotic(self):
        samples = self.lte.T_OFDM * self.lte.f_sample
        self.assertAlmostEqual(nops_asymptotic(self.lte), 35264 / samples)

    def test_no_downlink_leaves_average(self):
        params = self.lte.with_changes(N_DL=0)
        self.assertEqual(nops_critical(params, N_HOPS).rows, ())
        self.assertEqual(nops_required(params, N_HOPS), nops_avg(params))

    def test_unmeetable_deadline_names_symbol(self):
        with self.assertRaises(UnmeetableDeadline) as ctx:
            nops_critical(self.lte, N_HOPS, t_inv=300e-6)
        self.assertEqual(ctx.exception.symbol, 1)

    def test_conjugate_beamforming_ignores_inversion_time(self):
        cb = self.lte.with_changes(mode=ProcessingMode.CB)
        fast = nops_critical(cb, N_HOPS, t_inv=0.0)
        slow = nops_critical(cb, N_HOPS, t_inv=1e-3)
        self.assertEqual(fast, slow)

    def test_ceil_ops_tolerates_rounding_noise(self):
        self.assertEqual(ceil_ops(12.000000000001), 12)
        self.assertEqual(ceil_ops(12.01), 13)
        self.assertEqual(ceil_ops(11.2867), 12)

    @settings(max_examples=100, deadline=None)
    @given(
        K=st.integers(1, 40),
        t_inv=st.floats(0, 60e-6),
        n_ul2=st.integers(1, 4),
        n_dl=st.integers(0, 4),
    )
    def test_required_never_below_average(self, K, t_inv, n_ul2, n_dl):
        params = self.lte.with_changes(K=K, T_inv=t_inv, N_UL2=n_ul2, N_DL=n_dl)
        try:
            required = nops_required(params, N_HOPS)
        except UnmeetableDeadline:
            return
        self.assertGreaterEqual(required, nops_avg(params))

    @settings(max_examples=100, deadline=None)
    @given(
        K=st.integers(1, 64),
        n_sc=st.integers(12, 2048),
        n_ul1=st.integers(0, 3),
        n_ul2=st.integers(0, 4),
        n_dl=st.integers(0, 4),
    )
    def test_conjugate_beamforming_never_costs_more(self, K, n_sc, n_ul1, n_ul2, n_dl):
        zf = self.lte.with_changes(K=K, N_SC=n_sc, N_UL1=n_ul1, N_UL2=n_ul2, N_DL=n_dl)
        cb = zf.with_changes(mode=ProcessingMode.CB)
        zf_counts, cb_counts = op_counts(zf), op_counts(cb)
        for name in ('CE', 'B_i', 'W_i', 'FFT', 'decode', 'precode', 'N_op_weights', 'N_op_OFDM'):
            self.assertLessEqual(getattr(cb_counts, name), getattr(zf_counts, name), name)
        self.assertLessEqual(n_op_total(cb), n_op_total(zf))
        self.assertLessEqual(nops_avg(cb), nops_avg(zf))


# ═════════════════════════════════════════════════════════════════════════════
# 2. INVERSION-TIME THRESHOLDS
# ═════════════════════════════════════════════════════════════════════════════

class InversionThresholdTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')

    def test_lte_thresholds(self):
        self.assertAlmostEqual(t_inv_a(self.lte, N_HOPS) * 1e6, 8.27, delta=0.05)
        self.assertAlmostEqual(t_inv_b(self.lte, N_HOPS) * 1e6, 110.77, delta=0.01)

    def test_critical_meets_average_at_first_threshold(self):
        params = self.lte.with_changes(T_inv=t_inv_a(self.lte, N_HOPS))
        critical = nops_critical(params, N_HOPS).max
        self.assertTrue(math.isclose(critical, nops_avg(params), rel_tol=1e-9))

    def test_paths_equal_at_second_threshold(self):
        params = self.lte.with_changes(T_inv=t_inv_b(self.lte, N_HOPS))
        values = [row.N_OPS_CP_i for row in nops_critical(params, N_HOPS).rows]
        for value in values[1:]:
            self.assertTrue(math.isclose(value, values[0], rel_tol=1e-9))
        self.assertTrue(math.isclose(values[0], nops_asymptotic(params), rel_tol=1e-9))

    @settings(max_examples=100, deadline=None)
    @given(K=st.integers(4, 30), n_dl=st.integers(2, 4), frac=st.floats(0.05, 0.95), above=st.booleans())
    def test_limiting_symbol_switches_at_second_threshold(self, K, n_dl, frac, above):
        params = self.lte.with_changes(K=K, N_DL=n_dl)
        threshold = t_inv_b(params, N_HOPS)
        first_symbol_limit = params.T_OFDM * (params.N_UL2 + 1) - 2 * N_HOPS * params.T_link
        assume(0 < threshold < first_symbol_limit)
        if above:
            t_inv, expected = threshold + frac * (first_symbol_limit - threshold), 1
        else:
            t_inv, expected = threshold * (1 - frac), n_dl
        self.assertEqual(nops_critical(params, N_HOPS, t_inv=t_inv).argmax, expected)

    def test_limiting_symbol_on_lte(self):
        self.assertEqual(nops_critical(self.lte, N_HOPS, t_inv=100e-6).argmax, 2)
        self.assertEqual(nops_critical(self.lte, N_HOPS, t_inv=120e-6).argmax, 1)

    def test_sweep_shape_on_lte(self):
        tia, tib = t_inv_a(self.lte, N_HOPS), t_inv_b(self.lte, N_HOPS)
        points = nops_sweep(self.lte, N_HOPS, t_inv_range(self.lte, N_HOPS))
        self.assertEqual(len(points), 41)
        required = [p.N_OPS for p in points]
        self.assertEqual(required, sorted(required))
        asymptotic = nops_asymptotic(self.lte)
        for point in points:
            with self.subTest(t_inv=point.T_inv):
                self.assertEqual(len(point.N_OPS_CP), 2)
                if point.T_inv < tia:
                    self.assertEqual(point.N_OPS, point.N_OPS_avg)
                    self.assertEqual(point.limiter, Limiter.AVERAGE)
                else:
                    self.assertGreater(point.N_OPS, point.N_OPS_avg)
                    self.assertEqual(point.limiter, Limiter.CRITICAL)
                if point.T_inv > tib:
                    self.assertGreater(point.N_OPS, asymptotic)
                    self.assertEqual(point.N_OPS, point.N_OPS_CP[0])

    def test_sweep_matches_single_point(self):
        point = nops_sweep(self.lte, N_HOPS, [self.lte.T_inv])[0]
        self.assertAlmostEqual(point.N_OPS, nops_required(self.lte, N_HOPS), places=12)

    def test_sweep_for_conjugate_beamforming_is_flat(self):
        cb = self.lte.with_changes(mode=ProcessingMode.CB)
        points = nops_sweep(cb, N_HOPS, [0.0, 50e-6, 150e-6, 1e-3])
        self.assertEqual(len({p.N_OPS for p in points}), 1)

    def test_sweep_past_first_deadline_is_infinite(self):
        point = nops_sweep(self.lte, N_HOPS, [300e-6])[0]
        self.assertEqual(point.N_OPS, math.inf)
        self.assertEqual(point.limiter, Limiter.DEADLINE)
        lines = nops_sweep_csv(self.lte, [point]).splitlines()
        self.assertEqual(lines[0], 'T_inv_s,N_OPS_avg,N_OPS_CP_1,N_OPS_CP_2,N_OPS,limiter')
        self.assertTrue(lines[1].endswith(',inf,inf,inf,deadline'))

    def test_no_downlink_has_no_first_threshold(self):
        self.assertEqual(t_inv_a(self.lte.with_changes(N_DL=0), N_HOPS), math.inf)

    def test_cubic_scaling(self):
        self.assertAlmostEqual(cubic_t_inv(self.lte, 30), 135e-6)
        self.assertAlmostEqual(cubic_t_inv(self.lte, 10), 5e-6)
        self.assertEqual(cubic_t_inv(self.lte, 20), self.lte.T_inv)


# ═════════════════════════════════════════════════════════════════════════════
# 3. CLOCK AND SLACK
# ═════════════════════════════════════════════════════════════════════════════

class SlackTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')

    def test_lte_clock(self):
        clock = select_pe_clock(self.lte, N_HOPS)
        self.assertEqual((clock.N_PE, clock.multiple, clock.N_OPS_hat), (1, 12, 12))
        self.assertAlmostEqual(clock.f_clk, 368.64e6)

    def test_thirty_terminals(self):
        params = self.lte.with_changes(K=30, T_inv=cubic_t_inv(self.lte, 30))
        one = select_pe_clock(params, N_HOPS)
        two = select_pe_clock(params, N_HOPS, n_pe=2)
        self.assertEqual(one.N_OPS_hat, 28)
        self.assertAlmostEqual(one.f_clk, 860.16e6)
        self.assertEqual(two.multiple, 14)
        self.assertAlmostEqual(two.f_clk, 430.08e6)

    def test_invalid_pe_count(self):
        with self.assertRaises(ValueError):
            select_pe_clock(self.lte, N_HOPS, n_pe=0)

    def test_lte_slack(self):
        report = slack_analysis(self.lte, N_HOPS, 12)
        self.assertAlmostEqual(report.max_T_inv * 1e6, 54.2, delta=0.1)
        self.assertEqual(report.max_K, 21)
        self.assertEqual(report.max_N_hops, 22)
        self.assertEqual(report.N_UL_PB, 0)
        self.assertEqual(report.N_UL_buffered, 2)

    def test_uplink_before_downlink_variants(self):
        self.assertEqual(required_ops_hat(self.lte, N_HOPS, n_ul_pb=1), 17)
        split = self.lte.with_changes(N_UL1=1, N_UL2=1)
        self.assertEqual(required_ops_hat(split, N_HOPS), 17)

    def test_halved_inversion_time_variants(self):
        fast = self.lte.with_changes(T_inv=20e-6)
        self.assertEqual(required_ops_hat(fast, N_HOPS, n_ul_pb=1), 15)
        self.assertEqual(required_ops_hat(fast.with_changes(N_UL1=1, N_UL2=1), N_HOPS), 15)

    def test_largest_pb(self):
        self.assertEqual(largest_pb(self.lte, N_HOPS, 12), 0)
        self.assertEqual(largest_pb(self.lte, N_HOPS, 17), 1)
        self.assertEqual(largest_pb(self.lte.with_changes(N_DL=0), N_HOPS, 100), 0)

    def test_pre_burst_uplink_waits_for_reception(self):
        params = self.lte.with_changes(K=1, N_UL1=0, N_UL2=3, N_DL=1, T_link=1.938e-6, T_inv=2.68e-6)
        self.assertTrue(supports(params, N_HOPS, 8, n_ul_pb=3))
        self.assertFalse(meets_deadlines(params, N_HOPS, 8, n_ul_pb=3))
        deadline = params.T_OFDM * (1 + params.N_UL2 + 1)
        late = downlink_completions(params, N_HOPS, 8, n_ul_pb=3)[0] - deadline
        self.assertAlmostEqual(late * 1e6, 30.0, delta=0.1)
        self.assertEqual(largest_pb(params, N_HOPS, 8), 2)
        self.assertEqual(slack_analysis(params, N_HOPS, 8).N_UL_PB, 2)

    def test_pre_burst_count_never_shrinks_with_rate(self):
        params = self.lte.with_changes(K=1, N_UL1=0, N_UL2=3, N_DL=1, T_link=1.938e-6, T_inv=2.68e-6)
        counts = [largest_pb(params, N_HOPS, n_hat) for n_hat in range(1, 40)]
        self.assertEqual(counts, sorted(counts))
        self.assertEqual(counts[-1], 3)

    def test_supports_boundaries(self):
        self.assertTrue(supports(self.lte, N_HOPS, 12))
        self.assertFalse(supports(self.lte, N_HOPS, 11))
        self.assertFalse(supports(self.lte.with_changes(T_inv=300e-6), N_HOPS, 1000))

    def test_unbounded_figures(self):
        cb = self.lte.with_changes(mode=ProcessingMode.CB)
        self.assertEqual(max_t_inv(cb, N_HOPS, 12), math.inf)
        self.assertIsNone(max_n_hops(cb, 12))
        self.assertIsNone(max_t_inv(self.lte, N_HOPS, 9))

    def test_max_terminals_without_anchor_override(self):
        self.assertEqual(max_terminals_at(self.lte, N_HOPS, 12, anchor_K=20), 21)


# ═════════════════════════════════════════════════════════════════════════════
# 4. MEMORY AND LINKS
# ═════════════════════════════════════════════════════════════════════════════

class ResourcesTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')

    def test_lte_memory(self):
        memory = memory_report(self.lte, n_ul_pb=0)
        self.assertEqual((memory.Mem_input, memory.Mem_processing, memory.Mem_output), (49152, 49152, 24576))
        self.assertEqual(memory.buffers_total, 122880)
        self.assertEqual(memory.vectors_total, 960)
        self.assertEqual((memory.twiddle_rom_words, memory.twiddle_rom_bits), (1024, 24576))

    def test_processed_symbols_leave_the_input_buffer(self):
        self.assertEqual(memory_report(self.lte, n_ul_pb=1).Mem_input, 24576)
        self.assertEqual(memory_report(self.lte, n_ul_pb=5).Mem_input, 0)

    def test_lte_links(self):
        link = link_report(self.lte, 12)
        self.assertEqual(link.R_up_matched, 8.84736e9)
        self.assertEqual(link.R_down_matched, 1.47456e9)
        self.assertTrue(math.isclose(link.throughput_up, 384e6, rel_tol=1e-12))
        self.assertTrue(math.isclose(link.throughput_down, 384e6, rel_tol=1e-12))
        self.assertEqual(link.N_bits_up, (210 + 2400) * 24)
        self.assertEqual(link.N_bits_down_exact, 210 * 24 + 2400 * 20 * 4)

    def test_conjugate_beamforming_sends_no_gram(self):
        link = link_report(self.lte.with_changes(mode=ProcessingMode.CB), 12)
        self.assertEqual(link.N_bits_up, 2400 * 24)


# ═════════════════════════════════════════════════════════════════════════════
# 5. REPORT AND DIMENSION COMMAND
# ═════════════════════════════════════════════════════════════════════════════

class ReportTests(SimpleTestCase):

    def test_lte_report(self):
        report = build_report(preset('lte'))
        self.assertEqual(report.N_hops, 8)
        self.assertEqual(report.pe_clock.N_OPS_hat, 12)
        self.assertAlmostEqual(report.N_OPS, 11.2867, places=4)
        self.assertEqual(report.memory.N_UL_buffered, 2)
        text = report_to_text(report)
        self.assertIn('N_OPS_hat: 12\n', text)
        self.assertIn('f_clk_hz: 368640000\n', text)
        self.assertIn('Mem_input_bits: 49152\n', text)
        self.assertIn('# N_hops=8 from a 2-ary tree on M=255 nodes', text)

    def test_forced_pb(self):
        report = build_report(preset('lte'), n_ul_pb=1)
        self.assertEqual(report.pe_clock.N_OPS_hat, 17)
        self.assertEqual(report.memory.Mem_input, 24576)
        self.assertIn('N_UL_PB forced to 1', report.notes)

    def test_critical_path_csv(self):
        lines = critical_path_csv(build_report(preset('lte'))).splitlines()
        self.assertEqual(lines[0], 'i,N_op_CP_i,T_CP_i_s,T_available_s,N_OPS_CP_i')
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[2].startswith('2,82422,'))


class DimensionCommandTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def _run(self, **options):
        stdout = StringIO()
        call_command('dimension', output_dir=str(self.out), stdout=stdout, **options)
        return stdout.getvalue()

    def test_lte_preset(self):
        text = self._run(preset='lte')
        self.assertIn('N_OPS_avg: 9.957', text)
        self.assertIn('N_OPS_hat: 12', text)
        self.assertEqual((self.out / 'report.txt').read_text(), text)
        self.assertTrue((self.out / 'critical_paths.csv').exists())

    def test_conjugate_beamforming_ignores_tinv(self):
        self._run(preset='lte', mode='cb', t_inv=1e-6)
        fast = (self.out / 'critical_paths.csv').read_text()
        self._run(preset='lte', mode='cb', t_inv=100e-6)
        self.assertEqual((self.out / 'critical_paths.csv').read_text(), fast)

    def test_json_output(self):
        self._run(preset='lte', output_format='json')
        text = (self.out / 'report.json').read_text()
        self.assertIn('"N_OPS_hat": 12', text)
        self.assertIn('"T_inv_A"', text)

    def test_config_file(self):
        path = self.out / 'tiny.env'
        path.write_text('K=2\nM=3\nN_FFT=16\nN_SC=8\nN_UL1=1\nN_UL2=2\nN_DL=2\n'
                        'f_sample_hz=1.6e6\nT_OFDM_s=10e-6\nT_inv_s=2e-6\nT_link_s=0.1e-6\n')
        self.assertIn('N_OPS_hat: 3', self._run(config_path=str(path)))

    def test_missing_config_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            self._run(config_path=str(self.out / 'absent.env'))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('not found', str(ctx.exception))

    def test_tinv_sweep(self):
        self._run(preset='lte', tinv_sweep='0:100e-6:11')
        lines = (self.out / 'nops_sweep.csv').read_text().splitlines()
        self.assertEqual(len(lines), 12)
        self.assertTrue(lines[1].startswith('0,9.957'))
        self.assertTrue(lines[1].endswith(',avg'))
        self.assertTrue(lines[-1].startswith('0.0001,'))

    def test_default_tinv_sweep(self):
        self._run(preset='lte', tinv_sweep='auto')
        self.assertEqual(len((self.out / 'nops_sweep.csv').read_text().splitlines()), 42)

    def test_bad_tinv_sweep_is_usage_error(self):
        for raw in ('fast', '1e-6:0:5', '0:1e-4:1'):
            with self.subTest(raw=raw), self.assertRaises(CommandError) as ctx:
                self._run(preset='lte', tinv_sweep=raw)
            self.assertEqual(ctx.exception.returncode, 2)

    def test_needs_preset_or_config(self):
        with self.assertRaises(CommandError) as ctx:
            self._run()
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unmeetable_deadline_fails(self):
        with self.assertRaises(CommandError) as ctx:
            self._run(preset='lte', t_inv=300e-6)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('symbol 1', str(ctx.exception))


# ═════════════════════════════════════════════════════════════════════════════
# 6. REST ENDPOINTS
# ═════════════════════════════════════════════════════════════════════════════

class DimensionApiTests(SimpleTestCase):

    def setUp(self):
        cache.clear()
        self.client = APIClient()

    def test_lte_endpoint(self):
        response = self.client.get('/api/dimension/lte/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['pe_clock']['N_OPS_hat'], 12)
        self.assertEqual(response.data['memory']['Mem_input'], 49152)
        self.assertEqual(len(response.data['critical_paths']), 2)

    def test_post_preset_with_overrides(self):
        response = self.client.post('/api/dimension/', {
            'preset': 'lte', 'params': {'K': '30', 'T_inv_s': '135e-6'}, 'n_pe': 2,
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['pe_clock']['N_OPS_hat'], 28)
        self.assertAlmostEqual(response.data['pe_clock']['f_clk'], 430.08e6)

    def test_post_mode_override(self):
        response = self.client.post('/api/dimension/', {'preset': 'lte', 'mode': 'CB'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['op_counts']['B_i'], 0)
        self.assertIsNone(response.data['slack']['max_T_inv'])

    def test_repeated_request_served_from_cache(self):
        first = self.client.post('/api/dimension/', {'preset': 'tiny'}, format='json')
        second = self.client.post('/api/dimension/', {'preset': 'tiny'}, format='json')
        self.assertEqual(first.data, second.data)

    def test_empty_request(self):
        response = self.client.post('/api/dimension/', {}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_invalid_params(self):
        response = self.client.post('/api/dimension/', {'preset': 'lte', 'params': {'M': '10'}}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('params', response.data)

    def test_unmeetable_deadline(self):
        response = self.client.post('/api/dimension/', {'preset': 'lte', 'params': {'T_inv_s': '300e-6'}},
                                    format='json')
        self.assertEqual(response.status_code, status.HTTP_422_UNPROCESSABLE_ENTITY)
        self.assertEqual(response.data['symbol'], 1)
