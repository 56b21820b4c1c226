"""
Params Service — parameter validation and frame timing.

validate() reports problems as data; derive_timing() converts between the
OFDM symbol time and the frame duration.
"""

from typing import Optional

from system.models import (
    OVERHEAD_SLOTS,
    ChannelModel,
    DerivedTiming,
    ProcessingMode,
    SystemParams,
    Violation,
)


class InvalidTiming(ValueError):
    pass


_COUNT_FIELDS = ('K', 'M', 'N_FFT', 'N_SC', 'N_UL1', 'N_UL2', 'N_DL')
_WORD_FIELDS = ('W_comp', 'W_symbol', 'W_ADC', 'W_DAC')


def validate(params: SystemParams) -> list:
    """
    Check every parameter invariant.

    Returns:
        list of Violation (empty iff the parameter set is usable)
    """
    violations = []

    for name in _COUNT_FIELDS:
        if getattr(params, name) < 0:
            violations.append(Violation(name, f'{name} >= 0 required'))

    if params.K < 1:
        violations.append(Violation('K', 'K >= 1 required'))
    if params.M < 1:
        violations.append(Violation('M', 'M >= 1 required'))
    if params.mode not in ProcessingMode.values:
        violations.append(Violation('mode', f'mode must be one of {", ".join(ProcessingMode.values)}'))
    elif params.mode != ProcessingMode.CB and params.M < params.K:
        violations.append(Violation('M', f'M >= K required for {params.mode}'))

    if params.N_SC > params.N_FFT:
        violations.append(Violation('N_SC', 'N_SC <= N_FFT required'))
    if params.N_FFT < 2 or params.N_FFT & (params.N_FFT - 1):
        violations.append(Violation('N_FFT', 'N_FFT must be a power of two >= 2'))
    if params.K > params.N_SC:
        # one pilot subcarrier per terminal
        violations.append(Violation('N_SC', 'N_SC >= K required for orthogonal pilots'))

    if params.f_sample <= 0:
        violations.append(Violation('f_sample', 'f_sample > 0 required'))
    if params.T_OFDM <= 0:
        violations.append(Violation('T_OFDM', 'T_OFDM > 0 required'))
    if params.T_link < 0:
        violations.append(Violation('T_link', 'T_link >= 0 required'))
    if params.T_inv < 0:
        violations.append(Violation('T_inv', 'T_inv >= 0 required'))

    for name in _WORD_FIELDS:
        if getattr(params, name) < 1:
            violations.append(Violation(name, f'{name} >= 1 required'))
    if params.W_TF is not None and params.W_TF < 1:
        violations.append(Violation('W_TF', 'W_TF >= 1 required'))

    if params.mmse_reg < 0:
        violations.append(Violation('mmse_reg', 'mmse_reg >= 0 required'))
    if params.tree_arity < 1:
        violations.append(Violation('tree_arity', 'tree_arity >= 1 required'))
    if params.cp_len is not None and not 0 <= params.cp_len <= params.N_FFT:
        violations.append(Violation('cp_len', '0 <= cp_len <= N_FFT required'))
    if params.N_hops is not None and params.N_hops < 1:
        violations.append(Violation('N_hops', 'N_hops >= 1 required'))
    if params.N_PE < 1:
        violations.append(Violation('N_PE', 'N_PE >= 1 required'))
    if params.pilot_amplitude <= 0:
        violations.append(Violation('pilot_amplitude', 'pilot_amplitude > 0 required'))
    if params.noise_var < 0:
        violations.append(Violation('noise_var', 'noise_var >= 0 required'))
    if params.channel_model not in ChannelModel.values:
        violations.append(Violation('channel_model', f'channel_model must be one of {", ".join(ChannelModel.values)}'))

    return violations


def frame_slots(params: SystemParams) -> int:
    """OFDM symbol slots in one frame (data symbols + pilot + two guards)."""
    return params.N_UL + params.N_DL + OVERHEAD_SLOTS


def derive_timing(
    params: SystemParams,
    t_ofdm: Optional[float] = None,
    t_frame: Optional[float] = None,
) -> DerivedTiming:
    """
    Frame timing from one of the two durations.

    Args:
        params: symbol counts are taken from here
        t_ofdm: OFDM symbol duration (seconds)
        t_frame: frame duration (seconds), the inverse direction

    Passing neither uses ``params.T_OFDM``.

    Raises:
        InvalidTiming: both durations given, or a nonpositive duration
    """
    if t_ofdm is not None and t_frame is not None:
        raise InvalidTiming('Give either t_ofdm or t_frame, not both.')

    slots = frame_slots(params)
    if t_frame is not None:
        if t_frame <= 0:
            raise InvalidTiming(f't_frame must be positive (got {t_frame}).')
        return DerivedTiming(T_OFDM=t_frame / slots, T_frame=t_frame, N_UL=params.N_UL)

    if t_ofdm is None:
        t_ofdm = params.T_OFDM
    if t_ofdm <= 0:
        raise InvalidTiming(f't_ofdm must be positive (got {t_ofdm}).')
    return DerivedTiming(T_OFDM=t_ofdm, T_frame=slots * t_ofdm, N_UL=params.N_UL)
