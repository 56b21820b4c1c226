"""
Weights Service — local decoding/precoding vectors and the per-node
uplink decode and downlink precode kernels.

A node's decoding column A_i and precoding row W_i are the same K values
(A = Wᵀ), so one vector serves both directions.
"""

import numpy as np

from baseband.models import PackedHermitian, Task


class DimensionMismatch(ValueError):
    pass


def _batch(shape) -> int:
    return int(np.prod(shape, dtype=int))


def local_weights(D: PackedHermitian, h_i, tally=None) -> np.ndarray:
    """
    A_i = D · conj(ĥ_i), node i's column of A = D·Ĥᴴ.

    Args:
        D: inverted Gram (packed), shape (..., K(K+1)/2)
        h_i: local channel estimate, shape (..., K)
        tally: charged K² per vector
    """
    h_i = np.asarray(h_i, dtype=complex)
    if h_i.shape[-1] != D.order:
        raise DimensionMismatch(f'D has order {D.order}, estimate has length {h_i.shape[-1]}.')
    weights = np.einsum('...ij,...j->...i', D.to_dense(), np.conj(h_i))
    if tally is not None:
        tally.charge(Task.WEIGHTS, D.order ** 2 * _batch(weights.shape[:-1]))
    return weights


def conjugate_weights(h_i) -> np.ndarray:
    """Conjugate beamforming: A_i = conj(ĥ_i), no operations charged."""
    return np.conj(np.asarray(h_i, dtype=complex))


def decode_local(A_i, y_i, children=(), tally=None) -> np.ndarray:
    """
    ỹ_i = Σ children + A_i · y_i for every subcarrier.

    Args:
        A_i: decoding vector, shape (K,) or (N_SC, K)
        y_i: received value(s), scalar or shape (N_SC,)
        children: partial sums from child nodes, each shaped like the result
        tally: charged K per subcarrier

    Returns:
        array of shape (..., K)
    """
    A_i = np.asarray(A_i, dtype=complex)
    y_i = np.asarray(y_i, dtype=complex)
    own = A_i * y_i[..., None]
    total = np.zeros_like(own)
    for child in children:
        child = np.asarray(child, dtype=complex)
        if child.shape != own.shape:
            raise DimensionMismatch(f'Child partial sum has shape {child.shape}, expected {own.shape}.')
        total = total + child
    if tally is not None:
        tally.charge(Task.UL_DECODE, own.size)
    return total + own


def precode_local(W_i, q, tally=None):
    """
    x_i = Σ_j W_i[j]·q[j] per subcarrier (no conjugation).

    Args:
        W_i: precoding vector, shape (K,) or (N_SC, K)
        q: downlink symbols, shape (K,) or (N_SC, K)
        tally: charged K per subcarrier
    """
    W_i = np.asarray(W_i, dtype=complex)
    q = np.asarray(q, dtype=complex)
    if W_i.shape[-1] != q.shape[-1]:
        raise DimensionMismatch(f'W_i has length {W_i.shape[-1]}, q has length {q.shape[-1]}.')
    x = np.sum(W_i * q, axis=-1)
    if tally is not None:
        tally.charge(Task.DL_PRECODE, W_i.shape[-1] * _batch(np.shape(x)))
    return x
