"""
Gram Service — local Gram contributions and their accumulation up the tree.
"""

import numpy as np

from baseband.models import PackedHermitian, Task, packed_indices, packed_length


class GramOrderMismatch(ValueError):
    pass


def local_gram(h_i, tally=None) -> PackedHermitian:
    """
    h_iᴴ h_i in packed form: entry (r, c) = conj(h_i[r]) · h_i[c].

    Args:
        h_i: local channel estimate, shape (..., K)
        tally: charged K(K+1)/2 per matrix
    """
    h_i = np.asarray(h_i, dtype=complex)
    order = h_i.shape[-1]
    rows, cols = packed_indices(order)
    data = np.conj(h_i[..., rows]) * h_i[..., cols]
    if tally is not None:
        tally.charge(Task.GRAM, packed_length(order) * int(np.prod(h_i.shape[:-1], dtype=int)))
    return PackedHermitian(order, data)


def accumulate_gram(own: PackedHermitian, children=()) -> PackedHermitian:
    """
    B_i = Σ children + own, children summed in the order given.

    Raises:
        GramOrderMismatch: matrices of different order
    """
    total = np.zeros_like(own.data)
    for child in children:
        if child.order != own.order:
            raise GramOrderMismatch(f'Cannot add order-{child.order} Gram to order-{own.order}.')
        total = total + child.data
    return PackedHermitian(own.order, total + own.data)
