"""
DSE Tests — bandwidth scaling, single cells, grids and the explore command.

Covers:
1. Bandwidth scaling and capacity
2. Single cells against the dimensioning figures
3. Terminal limits and grid consistency
4. The explore management command
"""

import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from dimensioning.models import Limiter
from dimensioning.services.complexity_service import fft_ops, nops_required
from dse.management.commands.explore import Command
from dse.models import DseMode, GridSpec
from dse.services.explore_service import (
    capacity,
    check_monotone,
    evaluate_cell,
    explore,
    grid_rows,
    max_terminals,
    scale_bandwidth,
)
from system.services.config_service import preset
from system.services.topology_service import hop_count

LTE_CLOCK = 368.64e6


# ═════════════════════════════════════════════════════════════════════════════
# 1. SCALING
# ═════════════════════════════════════════════════════════════════════════════

class ScalingTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')

    def test_base_bandwidth_is_identity(self):
        self.assertEqual(scale_bandwidth(self.lte, 20e6), self.lte)

    def test_doubling_bandwidth(self):
        wide = scale_bandwidth(self.lte, 40e6)
        self.assertEqual(wide.N_FFT, 4096)
        self.assertEqual(wide.N_SC, 2400)
        self.assertAlmostEqual(wide.f_sample, 61.44e6)
        self.assertIsInstance(wide.N_FFT, int)

    def test_odd_scale_leaves_powers_of_two(self):
        params = scale_bandwidth(self.lte, 15e6)
        self.assertEqual(params.N_FFT, 1536)
        self.assertAlmostEqual(fft_ops(params.N_FFT), 768 * 10.584962500721156)

    def test_capacity(self):
        self.assertAlmostEqual(capacity(self.lte, LTE_CLOCK), 12.0)
        self.assertAlmostEqual(capacity(self.lte, LTE_CLOCK, n_pe=2), 24.0)


# ═════════════════════════════════════════════════════════════════════════════
# 2. SINGLE CELLS
# ═════════════════════════════════════════════════════════════════════════════

class CellTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')
        self.n_hops = hop_count(self.lte)

    def _cell(self, K=20, bandwidth=20e6, f_clk=LTE_CLOCK, mode=DseMode.FRAMED):
        spec = GridSpec(bandwidths=(bandwidth,), ks=(K,), f_clks=(f_clk,), mode=mode)
        return evaluate_cell(self.lte, spec, bandwidth, K, f_clk, self.n_hops, anchor_K=self.lte.K)

    def test_base_point_matches_dimensioning(self):
        cell = self._cell()
        self.assertAlmostEqual(cell.nops_required, nops_required(self.lte, self.n_hops), places=9)
        self.assertAlmostEqual(cell.nops_required, 11.2867, places=3)
        self.assertEqual(cell.limiter, Limiter.CRITICAL)
        self.assertTrue(cell.feasible)

    def test_thirty_terminals_do_not_fit(self):
        cell = self._cell(K=30)
        self.assertFalse(cell.feasible)
        self.assertGreater(cell.nops_required, 12)

    def test_average_mode(self):
        cell = self._cell(mode=DseMode.AVERAGE)
        self.assertEqual(cell.limiter, Limiter.AVERAGE)
        self.assertAlmostEqual(cell.nops_required, 9.9577, places=3)

    def test_zero_terminals_counts_transforms_only(self):
        cell = self._cell(K=0, mode=DseMode.ASYMPTOTIC)
        samples = self.lte.T_OFDM * self.lte.f_sample
        self.assertAlmostEqual(cell.nops_required, fft_ops(2048) / samples)
        self.assertTrue(cell.feasible)


# ═════════════════════════════════════════════════════════════════════════════
# 3. TERMINAL LIMITS AND GRIDS
# ═════════════════════════════════════════════════════════════════════════════

class GridTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.lte = preset('lte')
        cls.asymptotic = explore(cls.lte, GridSpec(
            bandwidths=(10e6, 20e6, 40e6),
            ks=tuple(range(0, 129)),
            f_clks=(LTE_CLOCK, 1e9),
            mode=DseMode.ASYMPTOTIC,
        ))

    def test_framed_max_terminals_at_lte_clock(self):
        self.assertEqual(max_terminals(self.lte, LTE_CLOCK), 21)

    def test_slow_clock_supports_nobody(self):
        self.assertEqual(max_terminals(self.lte, 100e6), 0)

    def test_second_pe_adds_terminals(self):
        self.assertGreater(max_terminals(self.lte, LTE_CLOCK, n_pe=2), 21)

    def test_asymptotic_max_terminals_at_one_ghz(self):
        self.assertEqual(max_terminals(self.lte, 1e9, mode=DseMode.ASYMPTOTIC), 50)

    def test_asymptotic_grid_limits(self):
        self.assertEqual(
            [self.asymptotic.max_k(b, LTE_CLOCK) for b in (10e6, 20e6, 40e6)], [35, 12, 0])
        self.assertEqual(
            [self.asymptotic.max_k(b, 1e9) for b in (10e6, 20e6, 40e6)], [110, 50, 19])

    def test_doubling_bandwidth_roughly_halves_terminals(self):
        for f_clk in (LTE_CLOCK, 1e9):
            for narrow, wide in ((10e6, 20e6), (20e6, 40e6)):
                with self.subTest(f_clk=f_clk, narrow=narrow):
                    self.assertLessEqual(
                        self.asymptotic.max_k(wide, f_clk),
                        self.asymptotic.max_k(narrow, f_clk) // 2 + 1,
                    )

    def test_asymptotic_grid_is_monotone(self):
        self.assertEqual(check_monotone(self.asymptotic), [])

    def test_framed_grid(self):
        grid = explore(self.lte, GridSpec(bandwidths=(20e6,), ks=tuple(range(0, 31)), f_clks=(LTE_CLOCK,)))
        self.assertEqual(grid.max_k(20e6, LTE_CLOCK), 21)
        self.assertEqual(check_monotone(grid), [])
        self.assertTrue(grid.cell(20e6, 0, LTE_CLOCK).feasible)

    def test_grid_keeps_axis_order(self):
        rows = grid_rows(self.asymptotic)
        self.assertEqual(len(rows), self.asymptotic.spec.size)
        self.assertEqual(rows[0][:3], (10e6, 0, LTE_CLOCK))
        self.assertEqual(rows[1][:3], (10e6, 0, 1e9))
        self.assertEqual(rows[-1][:3], (40e6, 128, 1e9))

    def test_average_mode_never_supports_fewer_terminals(self):
        for f_clk in (LTE_CLOCK, 1e9):
            with self.subTest(f_clk=f_clk):
                self.assertGreaterEqual(
                    max_terminals(self.lte, f_clk, mode=DseMode.AVERAGE),
                    max_terminals(self.lte, f_clk),
                )

    def test_zero_workers_evaluates_inline(self):
        spec = GridSpec(bandwidths=(20e6,), ks=(0, 10, 20, 30), f_clks=(LTE_CLOCK,))
        with override_settings(MIMO_DSE_WORKERS=0):
            inline = explore(self.lte, spec)
        self.assertEqual(inline, explore(self.lte, spec, workers=2))
        self.assertEqual(explore(self.lte, spec, workers=-1).cells, inline.cells)

    def test_empty_grid_rejected(self):
        with self.assertRaises(ValueError):
            explore(self.lte, GridSpec(bandwidths=(), ks=(1,), f_clks=(LTE_CLOCK,)))


# ═════════════════════════════════════════════════════════════════════════════
# 4. EXPLORE COMMAND
# ═════════════════════════════════════════════════════════════════════════════

class ExploreCommandTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def test_writes_grid_csv(self):
        stdout = StringIO()
        call_command('explore', preset='lte', bandwidths='20e6', fclk='368.64e6', k_max=30,
                     output_dir=str(self.out), stdout=stdout)
        lines = (self.out / 'grid.csv').read_text().splitlines()
        self.assertEqual(lines[0], 'bandwidth_hz,K,f_clk_hz,nops_required,feasible,limiter')
        self.assertEqual(len(lines), 32)
        self.assertIn('max_K[bandwidth_hz=2e+07, f_clk_hz=3.6864e+08]: 21', stdout.getvalue())
        self.assertIn('monotone: yes', stdout.getvalue())

    def test_json_output(self):
        call_command('explore', preset='lte', bandwidths='20e6', fclk='1e9', k_max=60,
                     dse_mode='asymptotic', output_format='json', output_dir=str(self.out), stdout=StringIO())
        text = (self.out / 'explore.json').read_text()
        self.assertIn('"max_terminals"', text)
        self.assertIn('"K": 50', text)

    def test_bad_list_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('explore', preset='lte', fclk='fast', output_dir=str(self.out), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_mode_help_names_frame_average_figure(self):
        text = ' '.join(Command().create_parser('manage.py', 'explore').format_help().split())
        self.assertIn('average: frame average only', text)
        self.assertIn('framed (default)', text)

    def test_inverted_k_range_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('explore', preset='lte', k_min=10, k_max=5, output_dir=str(self.out),
                         stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)
