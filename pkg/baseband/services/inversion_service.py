"""
Inversion Service — central Gram inverse D = (B + r·I)⁻¹ at the CCU.

Column-by-column Cholesky factorization B = L·Lᴴ, vectorized over any
leading batch dimensions, then D = L⁻ᴴ·L⁻¹. A non-positive pivot is
reported with its index.
"""

import logging

import numpy as np

from baseband.models import PackedHermitian
from system.models import ProcessingMode

logger = logging.getLogger(__name__)


class GramNotPositiveDefinite(ValueError):
    def __init__(self, pivot: int, value: float):
        self.pivot = pivot
        self.value = value
        super().__init__(f'Gram matrix is not positive definite: pivot {pivot} is {value:.3e}.')


class InversionNotApplicable(ValueError):
    pass


def cholesky_lower(matrix) -> np.ndarray:
    """
    Lower Cholesky factor of a batch of Hermitian matrices.

    Raises:
        GramNotPositiveDefinite: first pivot (0-based) whose value is not > 0
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[-1]
    lower = np.zeros_like(a)
    scale = max(float(np.max(np.abs(a), initial=0.0)), np.finfo(float).tiny)

    for j in range(n):
        row = lower[..., j, :j]
        pivot = a[..., j, j].real - np.sum(np.abs(row) ** 2, axis=-1)
        bad = ~(pivot > n * np.finfo(float).eps * scale)
        if np.any(bad):
            raise GramNotPositiveDefinite(j, float(np.min(pivot)))
        diag = np.sqrt(pivot)
        lower[..., j, j] = diag
        if j + 1 < n:
            below = a[..., j + 1:, j] - np.einsum('...ik,...k->...i', lower[..., j + 1:, :j], np.conj(row))
            lower[..., j + 1:, j] = below / diag[..., None]
    return lower


def invert_gram(B: PackedHermitian, mode: str, mmse_reg: float = 0.0) -> PackedHermitian:
    """
    D = (B + r·I)⁻¹ with r = 0 for ZF and r = mmse_reg for MMSE.

    Raises:
        InversionNotApplicable: mode is CB (no inverse is formed)
        GramNotPositiveDefinite: the loaded matrix has a non-positive pivot
    """
    if mode == ProcessingMode.CB:
        raise InversionNotApplicable('Conjugate beamforming does not invert the Gram matrix.')
    reg = mmse_reg if mode == ProcessingMode.MMSE else 0.0

    dense = B.to_dense()
    if reg:
        dense = dense + reg * np.eye(B.order)

    lower = cholesky_lower(dense)
    identity = np.broadcast_to(np.eye(B.order, dtype=complex), dense.shape)
    lower_inv = np.linalg.solve(lower, identity)
    inverse = np.conj(np.swapaxes(lower_inv, -1, -2)) @ lower_inv
    result = PackedHermitian.from_dense(inverse)
    # exact zero imaginary part on the diagonal
    diag = np.arange(B.order)
    result.data[..., diag * (diag + 1) // 2 + diag] = result.diagonal().real
    logger.debug('Inverted %s Gram of order %d (r=%g)', mode, B.order, reg)
    return result
