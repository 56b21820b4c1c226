"""
Baseband Tests — numerical kernels against numpy and the centralized oracle.

Covers:
1. Radix-2 FFT
2. Subcarrier mapping and constellations
3. Channel estimation, Gram accumulation and inversion
4. Local weights, decode and precode
5. Centralized reference
6. Matrix CSV files and op tallies
7. Tree-distributed pipeline against the reference
"""

from io import StringIO
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from baseband.models import OpTally, PackedHermitian, Task, packed_length
from baseband.services.estimation_service import InvalidPilot, estimate_channel
from baseband.services.fft_service import NonPowerOfTwoLength, butterfly_count, fft_dit
from baseband.services.gram_service import GramOrderMismatch, accumulate_gram, local_gram
from baseband.services.inversion_service import GramNotPositiveDefinite, InversionNotApplicable, invert_gram
from baseband.services.ofdm_service import (
    add_cyclic_prefix,
    extract_subcarriers,
    map_to_grid,
    qam_constellation,
    strip_cyclic_prefix,
    utilized_bins,
)
from baseband.services.reference_service import RankDeficientChannel, centralized_reference
from baseband.services.serialization_service import MatrixFormatError, matrix_from_csv, matrix_to_csv, read_matrix_csv
from baseband.services.weights_service import (
    DimensionMismatch,
    conjugate_weights,
    decode_local,
    local_weights,
    precode_local,
)
from system.models import ProcessingMode
from system.services.topology_service import build_tree

FIXTURES = Path(__file__).resolve().parent / 'fixtures'


def load_fixture(name: str) -> np.ndarray:
    with open(FIXTURES / name, newline='') as stream:
        return read_matrix_csv(stream)


def random_channel(seed: int, M: int, K: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) / np.sqrt(2)


def rel_error(actual, expected) -> float:
    return float(np.linalg.norm(actual - expected) / np.linalg.norm(expected))


# ═════════════════════════════════════════════════════════════════════════════
# 1. FFT
# ═════════════════════════════════════════════════════════════════════════════

class FftTests(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(11)

    def _signal(self, *shape):
        return self.rng.standard_normal(shape) + 1j * self.rng.standard_normal(shape)

    def test_matches_numpy(self):
        for n in (1, 2, 4, 16, 256):
            with self.subTest(n=n):
                x = self._signal(n)
                np.testing.assert_allclose(fft_dit(x), np.fft.fft(x), atol=1e-10)
                np.testing.assert_allclose(fft_dit(x, inverse=True), np.fft.ifft(x), atol=1e-12)

    def test_round_trip_and_parseval_at_2048(self):
        x = self._signal(2048)
        X = fft_dit(x)
        self.assertLessEqual(np.max(np.abs(fft_dit(X, inverse=True) - x)), 1e-10)
        energy = np.sum(np.abs(x) ** 2)
        self.assertLessEqual(abs(np.sum(np.abs(X) ** 2) / 2048 - energy) / energy, 1e-9)

    def test_batched_rows_are_independent(self):
        x = self._signal(3, 32)
        np.testing.assert_allclose(fft_dit(x), np.fft.fft(x, axis=-1), atol=1e-10)

    def test_butterflies_are_charged(self):
        tally = OpTally()
        fft_dit(self._signal(2048), tally=tally)
        self.assertEqual(tally[Task.FFT], 11264)
        self.assertEqual(butterfly_count(2048), 11264)

        fft_dit(self._signal(3, 16), inverse=True, tally=tally)
        self.assertEqual(tally[Task.IFFT], 3 * 32)

        fft_dit(self._signal(16), tally=tally, task=Task.UL_FFT)
        self.assertEqual(tally[Task.UL_FFT], 32)

    def test_impulse_is_flat(self):
        x = np.zeros(8)
        x[0] = 1
        np.testing.assert_allclose(fft_dit(x), np.ones(8))

    def test_rejects_other_lengths(self):
        for n in (0, 3, 12, 1536):
            with self.subTest(n=n), self.assertRaises(NonPowerOfTwoLength):
                fft_dit(np.ones(n))


# ═════════════════════════════════════════════════════════════════════════════
# 2. SUBCARRIERS AND CONSTELLATIONS
# ═════════════════════════════════════════════════════════════════════════════

class OfdmTests(SimpleTestCase):

    def test_bins_straddle_dc(self):
        self.assertEqual(list(utilized_bins(16, 8)), [12, 13, 14, 15, 1, 2, 3, 4])
        self.assertNotIn(0, utilized_bins(2048, 1200))
        self.assertEqual(list(utilized_bins(4, 4)), [0, 1, 2, 3])

    def test_odd_count_puts_extra_carrier_above_dc(self):
        self.assertEqual(list(utilized_bins(8, 3)), [7, 1, 2])

    def test_too_many_subcarriers(self):
        with self.assertRaises(ValueError):
            utilized_bins(8, 9)

    def test_grid_mapping(self):
        values = np.arange(1, 9) * (1 + 1j)
        grid = map_to_grid(values, 16)
        self.assertEqual(grid[0], 0)
        self.assertEqual(np.count_nonzero(grid), 8)
        np.testing.assert_array_equal(extract_subcarriers(grid, 8), values)

    def test_cyclic_prefix(self):
        samples = np.arange(8)
        with_cp = add_cyclic_prefix(samples, 2)
        self.assertEqual(list(with_cp), [6, 7, 0, 1, 2, 3, 4, 5, 6, 7])
        np.testing.assert_array_equal(strip_cyclic_prefix(with_cp, 2), samples)
        self.assertEqual(len(add_cyclic_prefix(samples, 0)), 8)

    def test_constellations_have_unit_power(self):
        for bits, size in ((1, 2), (2, 4), (3, 8), (4, 16), (6, 64)):
            with self.subTest(bits=bits):
                points = qam_constellation(bits)
                self.assertEqual(points.size, size)
                self.assertAlmostEqual(np.mean(np.abs(points) ** 2), 1.0)
                self.assertEqual(len(set(np.round(points, 12))), size)

    def test_constellation_needs_a_bit(self):
        with self.assertRaises(ValueError):
            qam_constellation(0)


# ═════════════════════════════════════════════════════════════════════════════
# 3. ESTIMATION, GRAM AND INVERSION
# ═════════════════════════════════════════════════════════════════════════════

class GramTests(SimpleTestCase):

    def setUp(self):
        self.H = load_fixture('channel_m3_k2.csv')
        self.B = load_fixture('gram_m3_k2.csv')

    def test_fixture_shapes(self):
        self.assertEqual(self.H.shape, (3, 2))
        self.assertEqual(self.B.shape, (2, 2))

    def test_estimate_divides_by_pilot(self):
        tally = OpTally()
        np.testing.assert_allclose(estimate_channel(2 * self.H[0], 2.0, tally), self.H[0])
        self.assertEqual(tally[Task.CE], 2)

    def test_zero_pilot(self):
        with self.assertRaises(InvalidPilot):
            estimate_channel(self.H[0], 0)

    def test_local_gram_entries(self):
        gram = local_gram(self.H[0]).to_dense()
        # h = (1, i): entry (1, 0) = conj(i)·1
        self.assertEqual(gram[1, 0], -1j)
        self.assertEqual(gram[0, 1], 1j)
        self.assertEqual(gram[1, 1], 1)

    def test_accumulated_gram_matches_fixture(self):
        tally = OpTally()
        leaves = [local_gram(self.H[n], tally) for n in (1, 2)]
        total = accumulate_gram(local_gram(self.H[0], tally), leaves)
        np.testing.assert_allclose(total.to_dense(), self.B)
        self.assertEqual(tally[Task.GRAM], 3 * packed_length(2))

    def test_packed_round_trip_keeps_lower_triangle(self):
        packed = PackedHermitian.from_dense(self.B)
        self.assertEqual(packed.data.shape, (3,))
        np.testing.assert_allclose(packed.data, [5, 2 - 1j, 4])
        np.testing.assert_allclose(packed.diagonal(), [5, 4])

    def test_order_mismatch(self):
        with self.assertRaises(GramOrderMismatch):
            accumulate_gram(PackedHermitian.zeros(2), [PackedHermitian.zeros(3)])

    def test_zero_forcing_inverse(self):
        D = invert_gram(PackedHermitian.from_dense(self.B), ProcessingMode.ZF)
        np.testing.assert_allclose(D.to_dense(), np.linalg.inv(self.B), atol=1e-12)
        np.testing.assert_allclose(D.to_dense() * 15, [[4, -2 - 1j], [-2 + 1j, 5]], atol=1e-12)

    def test_regularized_inverse(self):
        D = invert_gram(PackedHermitian.from_dense(self.B), ProcessingMode.MMSE, mmse_reg=1.0)
        np.testing.assert_allclose(D.to_dense(), np.linalg.inv(self.B + np.eye(2)), atol=1e-12)

    def test_batched_inverse(self):
        stack = np.stack([self.B, 2 * self.B, self.B + np.eye(2)])
        D = invert_gram(PackedHermitian.from_dense(stack), ProcessingMode.ZF)
        self.assertEqual(D.batch_shape, (3,))
        np.testing.assert_allclose(D.to_dense(), np.linalg.inv(stack), atol=1e-12)

    def test_singular_gram_reports_pivot(self):
        H = self.H.copy()
        H[:, 1] = 0
        B = accumulate_gram(local_gram(H[0]), [local_gram(H[1]), local_gram(H[2])])
        with self.assertRaises(GramNotPositiveDefinite) as ctx:
            invert_gram(B, ProcessingMode.ZF)
        self.assertEqual(ctx.exception.pivot, 1)

    def test_regularization_rescues_singular_gram(self):
        H = self.H.copy()
        H[:, 1] = 0
        B = PackedHermitian.from_dense(H.conj().T @ H)
        D = invert_gram(B, ProcessingMode.MMSE, mmse_reg=0.5)
        self.assertAlmostEqual(D.to_dense()[1, 1].real, 2.0)

    def test_no_inverse_for_conjugate_beamforming(self):
        with self.assertRaises(InversionNotApplicable):
            invert_gram(PackedHermitian.from_dense(self.B), ProcessingMode.CB)


# ═════════════════════════════════════════════════════════════════════════════
# 4. WEIGHTS, DECODE, PRECODE
# ═════════════════════════════════════════════════════════════════════════════

class WeightsTests(SimpleTestCase):

    def setUp(self):
        self.H = load_fixture('channel_m3_k2.csv')
        self.D = invert_gram(PackedHermitian.from_dense(self.H.conj().T @ self.H), ProcessingMode.ZF)
        self.reference = centralized_reference(self.H, ProcessingMode.ZF)

    def test_local_columns_form_decoding_matrix(self):
        tally = OpTally()
        columns = np.stack([local_weights(self.D, h, tally) for h in self.H], axis=-1)
        np.testing.assert_allclose(columns, self.reference.A, atol=1e-12)
        np.testing.assert_allclose(columns.T, self.reference.W, atol=1e-12)
        self.assertEqual(tally[Task.WEIGHTS], 3 * 4)

    def test_weights_dimension_check(self):
        with self.assertRaises(DimensionMismatch):
            local_weights(self.D, np.ones(3))

    def test_conjugate_weights(self):
        np.testing.assert_array_equal(conjugate_weights(self.H[0]), [1, -1j])

    def test_decode_sums_children(self):
        s = np.array([1 + 1j, -1 + 1j])
        y = self.H @ s
        A = [local_weights(self.D, h) for h in self.H]
        leaves = [decode_local(A[n], y[n]) for n in (1, 2)]
        tally = OpTally()
        root = decode_local(A[0], y[0], leaves, tally)
        np.testing.assert_allclose(root, s, atol=1e-12)
        self.assertEqual(tally[Task.UL_DECODE], 2)

    def test_decode_over_subcarriers(self):
        A_i = np.ones((4, 2))
        out = decode_local(A_i, np.arange(4))
        self.assertEqual(out.shape, (4, 2))
        with self.assertRaises(DimensionMismatch):
            decode_local(A_i, np.arange(4), [np.zeros((3, 2))])

    def test_precode_matches_reference(self):
        q = np.array([[1, 1j], [-1, 2]])
        tally = OpTally()
        x = np.stack([precode_local(self.reference.W[n], q, tally) for n in range(3)], axis=-1)
        np.testing.assert_allclose(x, q @ self.reference.W.T, atol=1e-12)
        self.assertEqual(tally[Task.DL_PRECODE], 3 * 2 * 2)

    def test_precode_dimension_check(self):
        with self.assertRaises(DimensionMismatch):
            precode_local(np.ones(2), np.ones(3))


# ═════════════════════════════════════════════════════════════════════════════
# 5. CENTRALIZED REFERENCE
# ═════════════════════════════════════════════════════════════════════════════

class ReferenceTests(SimpleTestCase):

    def setUp(self):
        self.H = load_fixture('channel_m3_k2.csv')

    def test_zero_forcing_is_left_inverse(self):
        ref = centralized_reference(self.H, ProcessingMode.ZF)
        np.testing.assert_allclose(ref.A @ self.H, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(self.H.T @ ref.W, np.eye(2), atol=1e-12)

    def test_conjugate_beamforming(self):
        ref = centralized_reference(self.H, ProcessingMode.CB)
        np.testing.assert_array_equal(ref.A, self.H.conj().T)

    def test_mmse_without_regularization_is_zero_forcing(self):
        zf = centralized_reference(self.H, ProcessingMode.ZF)
        mmse = centralized_reference(self.H, ProcessingMode.MMSE, mmse_reg=0.0)
        np.testing.assert_allclose(mmse.A, zf.A, atol=1e-12)

    def test_rank_deficient(self):
        with self.assertRaises(RankDeficientChannel):
            centralized_reference(np.ones((3, 2)), ProcessingMode.ZF)
        centralized_reference(np.ones((3, 2)), ProcessingMode.MMSE, mmse_reg=0.1)


# ═════════════════════════════════════════════════════════════════════════════
# 6. MATRIX FILES AND TALLIES
# ═════════════════════════════════════════════════════════════════════════════

class SerializationTests(SimpleTestCase):

    def test_fixture_text(self):
        text = (FIXTURES / 'gram_m3_k2.csv').read_text()
        self.assertEqual(matrix_to_csv(matrix_from_csv(text)), text)

    def test_vector_written_as_one_row(self):
        self.assertEqual(matrix_to_csv(np.array([1, 2j])), '1.0,0.0,0.0,2.0\n')

    def test_empty_text(self):
        self.assertEqual(matrix_from_csv('').shape, (0, 0))

    def test_format_errors(self):
        for text in ('1.0,2.0,3.0\n', '1.0,x\n', '1.0,0.0\n1.0,0.0,2.0,0.0\n'):
            with self.subTest(text=text), self.assertRaises(MatrixFormatError):
                matrix_from_csv(text)
        with self.assertRaises(MatrixFormatError):
            matrix_to_csv(np.zeros((2, 2, 2)))
        with self.assertRaises(MatrixFormatError):
            read_matrix_csv(StringIO('1,2,3\n'))


class OpTallyTests(SimpleTestCase):

    def test_sum_and_order(self):
        a = OpTally({Task.IFFT: 4})
        a.charge(Task.FFT, 2)
        b = OpTally({Task.FFT: 3})
        total = a + b
        self.assertEqual(total.total, 9)
        self.assertEqual(list(total.as_dict()), ['FFT', 'IFFT'])
        self.assertEqual(total, OpTally({'FFT': 5, 'IFFT': 4, 'CE': 0}))


# ═════════════════════════════════════════════════════════════════════════════
# 7. DISTRIBUTED PIPELINE
# ═════════════════════════════════════════════════════════════════════════════

class DistributedPipelineTests(SimpleTestCase):

    def _distributed(self, H, mode, reg, s):
        tree = build_tree(H.shape[0], 2)
        partial = {}
        for node in tree.post_order:
            partial[node] = accumulate_gram(local_gram(H[node]), [partial[c] for c in tree.children[node]])
        if mode == ProcessingMode.CB:
            A = [conjugate_weights(h) for h in H]
        else:
            D = invert_gram(partial[tree.root], mode, reg)
            A = [local_weights(D, h) for h in H]
        y = H @ s
        decoded = {}
        for node in tree.post_order:
            decoded[node] = decode_local(A[node], y[node], [decoded[c] for c in tree.children[node]])
        return np.stack(A, axis=-1), decoded[tree.root]

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 2 ** 32 - 1),
        M=st.sampled_from([1, 3, 7, 15, 31]),
        K=st.sampled_from([1, 2, 4, 8]),
        mode=st.sampled_from(ProcessingMode.values),
        reg=st.floats(0.01, 2.0),
    )
    def test_matches_centralized_reference(self, seed, M, K, mode, reg):
        assume(K <= M or mode == ProcessingMode.CB)
        H = random_channel(seed, M, K)
        assume(mode == ProcessingMode.CB or np.linalg.cond(H) < 1e4)
        s = qam_constellation(4)[np.arange(K) % 16]

        ref = centralized_reference(H, mode, reg)
        A, decoded = self._distributed(H, mode, reg, s)
        if mode == ProcessingMode.CB:
            self.assertLessEqual(np.max(np.abs(A - ref.A)), 1e-12 * M)
        else:
            self.assertLessEqual(rel_error(A, ref.A), 1e-9)
            self.assertLessEqual(rel_error(decoded, ref.A @ (H @ s)), 1e-9)
        if mode == ProcessingMode.ZF:
            self.assertLessEqual(np.max(np.abs(decoded - s)), 1e-9)
