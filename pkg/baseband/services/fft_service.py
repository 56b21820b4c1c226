"""
FFT Service — iterative radix-2 decimation-in-time FFT/IFFT.

Every butterfly multiplies the lower input by its twiddle and then forms
the sum and difference, one PE operation per butterfly: (N/2)·log2(N)
per transform. Twiddle tables are computed once per length (ROM).
"""

from functools import lru_cache

import numpy as np

from baseband.models import Task


class NonPowerOfTwoLength(ValueError):
    pass


def _check_length(n: int):
    if n < 1 or n & (n - 1):
        raise NonPowerOfTwoLength(f'FFT length must be a power of two (got {n}).')


@lru_cache(maxsize=16)
def twiddle_table(n: int) -> np.ndarray:
    """exp(-2πik/n) for k < n/2, read-only."""
    _check_length(n)
    table = np.exp(-2j * np.pi * np.arange(n // 2) / n)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=16)
def bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    index = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        index |= ((np.arange(n) >> b) & 1) << (bits - 1 - b)
    index.setflags(write=False)
    return index


def butterfly_count(n: int) -> int:
    _check_length(n)
    return (n // 2) * (n.bit_length() - 1)


def fft_dit(x, inverse: bool = False, tally=None, task: str = None) -> np.ndarray:
    """
    Radix-2 DIT transform along the last axis.

    Args:
        x: samples, shape (..., N) with N a power of two
        inverse: inverse transform, scaled by 1/N
        tally: optional OpTally charged one op per executed butterfly
        task: task name to charge (defaults to FFT / IFFT)

    Raises:
        NonPowerOfTwoLength: N is not a power of two
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    _check_length(n)
    batch = x.shape[:-1]

    table = twiddle_table(n)
    if inverse:
        table = np.conj(table)

    data = x[..., bit_reversal(n)]
    butterflies = 0
    span = 2
    while span <= n:
        half = span // 2
        twiddles = table[:: n // span][:half]
        groups = data.reshape(batch + (n // span, span))
        upper = groups[..., :half]
        lower = groups[..., half:] * twiddles
        data = np.concatenate((upper + lower, upper - lower), axis=-1).reshape(batch + (n,))
        butterflies += half * (n // span)
        span *= 2

    if tally is not None:
        tally.charge(task or (Task.IFFT if inverse else Task.FFT),
                     butterflies * int(np.prod(batch, dtype=int)))
    if inverse:
        data = data / n
    return data
