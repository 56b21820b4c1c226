"""
OFDM Service — subcarrier mapping, cyclic prefix and symbol constellations.

Utilized subcarriers sit around DC: the lower half on negative-frequency
bins, the upper half on bins 1.., with DC left empty whenever N_SC < N_FFT.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def utilized_bins(n_fft: int, n_sc: int) -> np.ndarray:
    """FFT bin index of each utilized subcarrier, in subcarrier order."""
    if n_sc > n_fft:
        raise ValueError(f'Cannot place {n_sc} subcarriers in a {n_fft}-point FFT.')
    if n_sc == n_fft:
        bins = np.arange(n_fft)
    else:
        lower = n_sc // 2
        upper = n_sc - lower
        bins = np.concatenate((np.arange(n_fft - lower, n_fft), np.arange(1, upper + 1)))
    bins.setflags(write=False)
    return bins


def map_to_grid(values, n_fft: int) -> np.ndarray:
    """Place (..., N_SC) subcarrier values on an (..., N_FFT) bin grid."""
    values = np.asarray(values, dtype=complex)
    grid = np.zeros(values.shape[:-1] + (n_fft,), dtype=complex)
    grid[..., utilized_bins(n_fft, values.shape[-1])] = values
    return grid


def extract_subcarriers(grid, n_sc: int) -> np.ndarray:
    grid = np.asarray(grid)
    return grid[..., utilized_bins(grid.shape[-1], n_sc)]


def add_cyclic_prefix(samples, cp_len: int) -> np.ndarray:
    samples = np.asarray(samples)
    if cp_len == 0:
        return samples.copy()
    return np.concatenate((samples[..., -cp_len:], samples), axis=-1)


def strip_cyclic_prefix(samples, cp_len: int) -> np.ndarray:
    return np.asarray(samples)[..., cp_len:]


@lru_cache(maxsize=16)
def qam_constellation(bits: int) -> np.ndarray:
    """
    Unit average power QAM with 2**bits points.

    Odd widths give a rectangular grid with one more bit on the in-phase axis.
    """
    if bits < 1:
        raise ValueError('A constellation needs at least one bit per symbol.')
    levels_i = 2 ** ((bits + 1) // 2)
    levels_q = 2 ** (bits // 2)
    axis_i = 2 * np.arange(levels_i) - (levels_i - 1)
    axis_q = 2 * np.arange(levels_q) - (levels_q - 1)
    points = (axis_i[:, None] + 1j * axis_q[None, :]).ravel()
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    points.setflags(write=False)
    return points


def random_symbols(rng: np.random.Generator, shape: tuple, bits: int) -> np.ndarray:
    constellation = qam_constellation(bits)
    return constellation[rng.integers(0, constellation.size, size=shape)]
