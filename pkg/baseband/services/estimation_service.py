"""
Estimation Service — local channel estimates from pilot observations.

With the pilot matrix p·I, terminal k's pilot lands on its own slot, so the
estimate is a plain elementwise division.
"""

import numpy as np

from baseband.models import Task


class InvalidPilot(ValueError):
    pass


def estimate_channel(y_pilot, p: float, tally=None) -> np.ndarray:
    """
    Local channel estimate ĥ_i = y_pilot / p.

    Args:
        y_pilot: received pilot values, shape (..., K)
        p: pilot amplitude
        tally: optional OpTally charged one op per estimated entry

    Raises:
        InvalidPilot: p == 0
    """
    if p == 0:
        raise InvalidPilot('Pilot amplitude must be nonzero.')
    y_pilot = np.asarray(y_pilot, dtype=complex)
    if tally is not None:
        tally.charge(Task.CE, y_pilot.size)
    return y_pilot / p
