"""
Scenario Service — reproducible channels, frame data and the air interface.

The channel is drawn once from the scenario seed (block fading); symbols
and noise are drawn per frame from (seed, frame), so frame f of a sweep is
identical to a single run of frame f.

Pilots are orthogonal in frequency: terminal k transmits amplitude p on
utilized subcarrier k, so under a flat channel the pilot symbol observed at
antenna i carries h_ik·p on that subcarrier.
"""

import logging

import numpy as np

from baseband.services.ofdm_service import add_cyclic_prefix, map_to_grid, random_symbols
from simulator.models import FrameData, Scenario
from system.models import ChannelModel, SystemParams
from system.services.topology_service import build_tree

logger = logging.getLogger(__name__)


def _complex_normal(rng: np.random.Generator, shape: tuple, variance: float = 1.0) -> np.ndarray:
    scale = np.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_scenario(seed: int, params: SystemParams, topology=None) -> Scenario:
    """
    Draw an i.i.d. unit-variance Rayleigh channel for ``params``.

    Same seed and parameters give a bit-identical scenario.
    """
    topology = topology or build_tree(params.M, params.tree_arity)
    if topology.M != params.M:
        raise ValueError(f'Topology has {topology.M} nodes but M={params.M}.')
    rng = np.random.default_rng(seed)
    if params.channel_model == ChannelModel.PER_SUBCARRIER:
        shape = (params.N_SC, params.M, params.K)
    else:
        shape = (params.M, params.K)
    H = _complex_normal(rng, shape)
    H.setflags(write=False)
    logger.debug('Scenario seed=%d: H%s', seed, shape)
    return Scenario(seed=seed, params=params, topology=topology, H=H)


def frame_data(scenario: Scenario, frame: int = 0) -> FrameData:
    p = scenario.params
    rng = np.random.default_rng([scenario.seed, frame])
    uplink = random_symbols(rng, (p.N_UL, p.N_SC, p.K), p.W_symbol)
    downlink = random_symbols(rng, (p.N_DL, p.N_SC, p.K), p.W_symbol)
    pilot_noise = _complex_normal(rng, scenario.H.shape, p.noise_var)
    uplink_noise = _complex_normal(rng, (p.N_UL, p.N_SC, p.M), p.noise_var)
    return FrameData(frame=frame, uplink=uplink, downlink=downlink,
                     pilot_noise=pilot_noise, uplink_noise=uplink_noise)


# =============================================================================
# AIR INTERFACE
# =============================================================================

def pilot_observation(scenario: Scenario, data: FrameData) -> np.ndarray:
    """Y_p = H·p + N_p, shaped like H."""
    return scenario.H * scenario.params.pilot_amplitude + data.pilot_noise


def uplink_observation(scenario: Scenario, data: FrameData, symbol: int) -> np.ndarray:
    """
    Frequency-domain samples of uplink symbol ``symbol`` (1-based), (N_SC, M).
    """
    s = data.uplink[symbol - 1]
    if scenario.per_subcarrier:
        received = np.einsum('nmk,nk->nm', scenario.H, s)
    else:
        received = s @ scenario.H.T
    return received + data.uplink_noise[symbol - 1]


def to_waveform(values, params: SystemParams) -> np.ndarray:
    """(..., N_SC) subcarrier values -> (..., N_FFT + CP) time samples."""
    grid = map_to_grid(values, params.N_FFT)
    return add_cyclic_prefix(np.fft.ifft(grid, axis=-1), params.cyclic_prefix)


def pilot_waveform(scenario: Scenario, data: FrameData) -> np.ndarray:
    """
    Time samples of the pilot symbol at every antenna, (M, N_FFT + CP).
    Per-subcarrier channels are sounded on each terminal's pilot subcarrier.
    """
    p = scenario.params
    observed = pilot_observation(scenario, data)
    if scenario.per_subcarrier:
        observed = observed[np.arange(p.K), :, np.arange(p.K)].T
    values = np.zeros((p.M, p.N_SC), dtype=complex)
    values[:, :p.K] = observed
    return to_waveform(values, p)


def uplink_waveform(scenario: Scenario, data: FrameData, symbol: int) -> np.ndarray:
    """Time samples of an uplink symbol at every antenna, (M, N_FFT + CP)."""
    return to_waveform(uplink_observation(scenario, data, symbol).T, scenario.params)
