"""
Reference Service — centralized decoding/precoding matrices.

This is the oracle the distributed pipeline is checked against.
"""

from dataclasses import dataclass

import numpy as np

from system.models import ProcessingMode


class RankDeficientChannel(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ReferenceWeights:
    A: np.ndarray  # (..., K, M) decoding matrix
    W: np.ndarray  # (..., M, K) precoding matrix


def _hermitian(matrix: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(matrix, -1, -2))


def centralized_reference(H, mode: str, mmse_reg: float = 0.0) -> ReferenceWeights:
    """
    A = Hᴴ (CB) or (HᴴH + r·I)⁻¹Hᴴ (ZF/MMSE); W = H* (CB) or H*·((HᴴH + r·I)⁻¹)*.

    Args:
        H: channel (estimate), shape (..., M, K)
        mode: ProcessingMode value
        mmse_reg: r for MMSE (ignored for ZF)

    Raises:
        RankDeficientChannel: rank(H) < K where an unregularized inverse is needed
    """
    H = np.asarray(H, dtype=complex)
    K = H.shape[-1]

    if mode == ProcessingMode.CB:
        return ReferenceWeights(A=_hermitian(H), W=np.conj(H))

    reg = mmse_reg if mode == ProcessingMode.MMSE else 0.0
    if reg == 0.0 and np.any(np.linalg.matrix_rank(H) < K):
        raise RankDeficientChannel(f'Channel has rank below K={K}; the Gram matrix is singular.')

    gram = _hermitian(H) @ H + reg * np.eye(K)
    gram_inv = np.linalg.inv(gram)
    return ReferenceWeights(A=gram_inv @ _hermitian(H), W=np.conj(H) @ np.conj(gram_inv))
