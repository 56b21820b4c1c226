"""
System Tests — parameters, frame timing, config files and trees.

Covers:
1. Parameter validation
2. Frame timing
3. Config files and presets
4. Tree construction and hop counts
5. Edge lists and arbitrary trees
6. Health endpoint
"""

import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from system.models import CCU, ProcessingMode
from system.services.config_service import (
    ConfigError,
    MissingConfigFile,
    dump_params,
    load_params,
    params_from_mapping,
    preset,
    preset_mapping,
)
from system.services.params_service import InvalidTiming, derive_timing, frame_slots, validate
from system.services.topology_service import (
    InvalidTopology,
    build_tree,
    from_edge_list,
    hop_count,
    hops_comparison,
    to_edge_list,
    tree_from_parents,
)


# ═════════════════════════════════════════════════════════════════════════════
# 1. VALIDATION
# ═════════════════════════════════════════════════════════════════════════════

class ValidateTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')

    def _fields(self, params):
        return [v.field for v in validate(params)]

    def test_lte_is_valid(self):
        self.assertEqual(validate(self.lte), [])

    def test_zero_forcing_needs_enough_antennas(self):
        violations = validate(self.lte.with_changes(M=10))
        self.assertEqual([str(v) for v in violations], ['M: M >= K required for ZF'])

    def test_conjugate_beamforming_allows_few_antennas(self):
        self.assertEqual(validate(self.lte.with_changes(M=10, mode=ProcessingMode.CB)), [])

    def test_subcarriers_bounded_by_fft(self):
        self.assertIn('N_SC', self._fields(self.lte.with_changes(N_SC=4096)))

    def test_fft_must_be_power_of_two(self):
        self.assertIn('N_FFT', self._fields(self.lte.with_changes(N_FFT=1536)))

    def test_several_problems_reported_together(self):
        fields = self._fields(self.lte.with_changes(K=0, f_sample=0.0, T_link=-1.0, mode='QR'))
        self.assertEqual(fields, ['K', 'mode', 'f_sample', 'T_link'])

    def test_mmse_without_regularization_is_valid(self):
        self.assertEqual(validate(self.lte.with_changes(mode=ProcessingMode.MMSE, mmse_reg=0.0)), [])


# ═════════════════════════════════════════════════════════════════════════════
# 2. FRAME TIMING
# ═════════════════════════════════════════════════════════════════════════════

class TimingTests(SimpleTestCase):

    def setUp(self):
        self.lte = preset('lte')

    def test_lte_symbol_time_from_frame(self):
        timing = derive_timing(self.lte, t_frame=0.5e-3)
        self.assertAlmostEqual(timing.T_OFDM * 1e6, 500 / 7, places=9)
        self.assertEqual(timing.N_UL, 2)

    def test_frame_from_symbol_time(self):
        timing = derive_timing(self.lte, t_ofdm=71.43e-6)
        self.assertAlmostEqual(timing.T_frame, 0.5e-3, delta=1e-7)

    def test_empty_frame_is_overhead_only(self):
        params = self.lte.with_changes(N_UL1=0, N_UL2=0, N_DL=0)
        self.assertEqual(derive_timing(params, t_ofdm=1.0).T_frame, 3.0)
        self.assertEqual(frame_slots(params), 3)

    def test_defaults_to_params_symbol_time(self):
        self.assertAlmostEqual(derive_timing(self.lte).T_frame, self.lte.T_frame, places=15)

    def test_rejects_nonpositive_and_double_input(self):
        with self.assertRaises(InvalidTiming):
            derive_timing(self.lte, t_ofdm=0.0)
        with self.assertRaises(InvalidTiming):
            derive_timing(self.lte, t_frame=-1.0)
        with self.assertRaises(InvalidTiming):
            derive_timing(self.lte, t_ofdm=1.0, t_frame=7.0)

    @settings(max_examples=50, deadline=None)
    @given(
        t_ofdm=st.floats(min_value=1e-7, max_value=1e-2),
        n_ul1=st.integers(0, 8), n_ul2=st.integers(0, 8), n_dl=st.integers(0, 8),
    )
    def test_round_trip(self, t_ofdm, n_ul1, n_ul2, n_dl):
        params = preset('tiny').with_changes(N_UL1=n_ul1, N_UL2=n_ul2, N_DL=n_dl)
        forward = derive_timing(params, t_ofdm=t_ofdm)
        back = derive_timing(params, t_frame=forward.T_frame)
        self.assertTrue(math.isclose(back.T_OFDM, t_ofdm, rel_tol=1e-12))

    @given(n_ul1=st.integers(0, 8), n_ul2=st.integers(0, 8), n_dl=st.integers(0, 8),
           field=st.sampled_from(['N_UL1', 'N_UL2', 'N_DL']))
    def test_frame_grows_with_every_count(self, n_ul1, n_ul2, n_dl, field):
        params = preset('tiny').with_changes(N_UL1=n_ul1, N_UL2=n_ul2, N_DL=n_dl)
        bigger = params.with_changes(**{field: getattr(params, field) + 1})
        self.assertGreater(bigger.T_frame, params.T_frame)


# ═════════════════════════════════════════════════════════════════════════════
# 3. CONFIG FILES AND PRESETS
# ═════════════════════════════════════════════════════════════════════════════

class ConfigTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def _write(self, text):
        path = self.dir / 'params.env'
        path.write_text(text)
        return path

    def test_lte_preset_values(self):
        lte = preset('lte')
        self.assertEqual((lte.K, lte.M, lte.N_FFT, lte.N_SC), (20, 255, 2048, 1200))
        self.assertAlmostEqual(lte.T_frame, 0.5e-3, places=15)
        self.assertEqual(hop_count(lte), 8)
        self.assertEqual(lte.mode, ProcessingMode.ZF)

    def test_preset_names_are_case_insensitive(self):
        self.assertEqual(preset('LTE'), preset('lte'))

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError):
            preset('wifi')

    def test_file_with_comments(self):
        path = self._write(
            '# small system\n'
            'K=2\nM=3\nN_FFT=16\nN_SC=8\n\n'
            'N_UL1=1\nN_UL2=2\nN_DL=2\n'
            'f_sample_hz=1.6e6\nT_OFDM_s=10e-6  # ten microseconds\n'
            'mode=mmse\nmmse_reg=0.1\n'
        )
        params = load_params(path)
        self.assertEqual(params.mode, ProcessingMode.MMSE)
        self.assertAlmostEqual(params.mmse_reg, 0.1)
        self.assertAlmostEqual(params.T_frame, 80e-6)

    def test_dump_and_load(self):
        lte = preset('lte')
        self.assertEqual(load_params(self._write(dump_params(lte))), lte)

    def test_missing_file(self):
        with self.assertRaises(MissingConfigFile):
            load_params(self.dir / 'absent.env')

    def test_unknown_key(self):
        mapping = preset_mapping('tiny') | {'K_max': '4'}
        with self.assertRaisesMessage(ConfigError, 'K_max'):
            params_from_mapping(mapping)

    def test_needs_exactly_one_duration(self):
        mapping = preset_mapping('tiny') | {'T_frame_s': '80e-6'}
        with self.assertRaises(ConfigError):
            params_from_mapping(mapping)
        mapping = preset_mapping('tiny')
        del mapping['T_OFDM_s']
        with self.assertRaises(ConfigError):
            params_from_mapping(mapping)

    def test_fractional_count_rejected(self):
        with self.assertRaisesMessage(ConfigError, 'K'):
            params_from_mapping(preset_mapping('tiny') | {'K': '2.5'})

    def test_invalid_parameter_set_rejected(self):
        with self.assertRaisesMessage(ConfigError, 'M >= K'):
            params_from_mapping(preset_mapping('tiny') | {'K': '4'})


# ═════════════════════════════════════════════════════════════════════════════
# 4. TREES AND HOP COUNTS
# ═════════════════════════════════════════════════════════════════════════════

class TreeTests(SimpleTestCase):

    def test_three_node_tree(self):
        tree = build_tree(3, 2)
        self.assertEqual(tree.parents, (CCU, 0, 0))
        self.assertEqual(tree.children[0], (1, 2))
        self.assertEqual(tree.N_hops, 2)

    def test_single_node(self):
        tree = build_tree(1)
        self.assertEqual(tree.N_hops, 1)
        self.assertEqual(tree.heights, (0,))

    def test_lte_tree_depth(self):
        tree = build_tree(255, 2)
        self.assertEqual(tree.N_hops, 8)
        self.assertEqual(tree.heights[0], 7)

    def test_traversal_orders(self):
        tree = build_tree(7, 2)
        self.assertEqual(tree.breadth_first, tuple(range(7)))
        self.assertEqual(tree.post_order[-1], 0)

    def test_invalid_sizes(self):
        with self.assertRaises(InvalidTopology):
            build_tree(0)
        with self.assertRaises(InvalidTopology):
            build_tree(4, 0)

    def test_hops_comparison(self):
        self.assertEqual(hops_comparison(64).__dict__, {'tree': 7, 'array_corner': 12, 'array_center': 8})
        self.assertEqual(hops_comparison(1).__dict__, {'tree': 1, 'array_corner': 2, 'array_center': 1})
        self.assertEqual(hops_comparison(255).tree, 8)

    def test_hop_override(self):
        self.assertEqual(hop_count(preset('lte').with_changes(N_hops=3)), 3)

    @given(M=st.integers(1, 600), arity=st.integers(1, 4))
    def test_complete_tree_invariants(self, M, arity):
        tree = build_tree(M, arity)
        self.assertEqual(sum(len(c) for c in tree.children), M - 1)
        self.assertTrue(all(len(c) <= arity for c in tree.children))
        self.assertEqual(tree.N_hops, 1 + tree.max_depth)
        if arity == 2:
            self.assertEqual(tree.N_hops, math.ceil(math.log2(M + 1)))
            self.assertLessEqual(tree.N_hops, build_tree(M + 1, 2).N_hops)


# ═════════════════════════════════════════════════════════════════════════════
# 5. EDGE LISTS AND ARBITRARY TREES
# ═════════════════════════════════════════════════════════════════════════════

class ArbitraryTreeTests(SimpleTestCase):

    def test_chain(self):
        chain = tree_from_parents((CCU, 0, 1, 2), arity=1)
        self.assertEqual(chain.N_hops, 4)
        self.assertEqual(chain.depth, (0, 1, 2, 3))

    def test_root_need_not_be_node_zero(self):
        tree = tree_from_parents((2, 2, CCU))
        self.assertEqual(tree.root, 2)
        self.assertEqual(tree.arity, 2)

    def test_rejects_bad_shapes(self):
        for parents in [(), (CCU, CCU), (0, 1), (CCU, 5), (CCU, 1)]:
            with self.subTest(parents=parents), self.assertRaises(InvalidTopology):
                tree_from_parents(parents)

    def test_rejects_cycle_off_the_root(self):
        with self.assertRaises(InvalidTopology):
            tree_from_parents((CCU, 2, 1))

    def test_arity_enforced(self):
        with self.assertRaises(InvalidTopology):
            tree_from_parents((CCU, 0, 0, 0), arity=2)

    def test_edge_list(self):
        tree = build_tree(3, 2)
        text = to_edge_list(tree)
        self.assertEqual(text, '0 CCU\n1 0\n2 0\n')
        self.assertEqual(from_edge_list(text, arity=2), tree)

    def test_edge_list_ignores_comments(self):
        tree = from_edge_list('# chain\n0 ccu\n\n1 0\n')
        self.assertEqual(tree.parents, (CCU, 0))

    def test_edge_list_errors(self):
        with self.assertRaises(InvalidTopology):
            from_edge_list('0 CCU\n1\n')
        with self.assertRaises(InvalidTopology):
            from_edge_list('0 CCU\n2 0\n')


# ═════════════════════════════════════════════════════════════════════════════
# 6. HEALTH CHECK
# ═════════════════════════════════════════════════════════════════════════════

class HealthCheckTests(SimpleTestCase):

    def test_reports_kernels_and_cache(self):
        response = self.client.get('/api/health/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()['kernels'], 'ok')
        self.assertEqual(response.json()['cache'], 'connected')
