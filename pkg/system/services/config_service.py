"""
Config Service — flat ``KEY=value`` parameter files and embedded presets.

Files are read with python-dotenv, so comments, blank lines, quoting and
``export`` prefixes behave exactly as in a ``.env`` file. Keys are the
ASCII names of the system symbols.
"""

import logging
from pathlib import Path

from dotenv import dotenv_values

from system.models import ChannelModel, ProcessingMode, SystemParams
from system.services.params_service import InvalidTiming, derive_timing, frame_slots, validate

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class MissingConfigFile(ConfigError):
    pass


# key -> (SystemParams field, parser)
_INT_KEYS = {
    'K': 'K', 'M': 'M', 'N_FFT': 'N_FFT', 'N_SC': 'N_SC',
    'N_UL1': 'N_UL1', 'N_UL2': 'N_UL2', 'N_DL': 'N_DL',
    'W_comp': 'W_comp', 'W_symbol': 'W_symbol', 'W_ADC': 'W_ADC', 'W_DAC': 'W_DAC',
    'W_TF': 'W_TF', 'tree_arity': 'tree_arity', 'cp_len': 'cp_len',
    'N_hops': 'N_hops', 'N_PE': 'N_PE',
}
_FLOAT_KEYS = {
    'f_sample_hz': 'f_sample', 'T_link_s': 'T_link', 'T_inv_s': 'T_inv',
    'mmse_reg': 'mmse_reg', 'pilot_amplitude': 'pilot_amplitude',
    'noise_var': 'noise_var',
}
_TIME_KEYS = ('T_OFDM_s', 'T_frame_s')
_REQUIRED_KEYS = ('K', 'M', 'N_FFT', 'N_SC', 'N_UL1', 'N_UL2', 'N_DL', 'f_sample_hz')

KNOWN_KEYS = frozenset(_INT_KEYS) | frozenset(_FLOAT_KEYS) | frozenset(_TIME_KEYS) | {'mode', 'channel_model'}


# =============================================================================
# PRESETS
# =============================================================================

PRESETS = {
    # 20 MHz LTE-like system. M=255 makes the binary tree 8 levels deep,
    # so N_hops=8 and 2·N_hops·T_link = 8 µs.
    'lte': {
        'K': '20', 'M': '255', 'N_FFT': '2048', 'N_SC': '1200',
        'N_UL1': '0', 'N_UL2': '2', 'N_DL': '2',
        'f_sample_hz': '30.72e6', 'T_frame_s': '0.5e-3',
        'T_inv_s': '40e-6', 'T_link_s': '0.5e-6',
        'W_comp': '24', 'W_symbol': '4', 'W_ADC': '12', 'W_DAC': '12',
        'mode': 'ZF', 'tree_arity': '2',
    },
    # Three-node example tree used for walkthroughs
    'tiny': {
        'K': '2', 'M': '3', 'N_FFT': '16', 'N_SC': '8',
        'N_UL1': '1', 'N_UL2': '2', 'N_DL': '2',
        'f_sample_hz': '1.6e6', 'T_OFDM_s': '10e-6',
        'T_inv_s': '2e-6', 'T_link_s': '0.1e-6',
        'W_comp': '24', 'W_symbol': '4', 'W_ADC': '12', 'W_DAC': '12',
        'mode': 'ZF', 'tree_arity': '2',
    },
}


def preset_names() -> list:
    return sorted(PRESETS)


def preset_mapping(name: str) -> dict:
    try:
        return dict(PRESETS[name.lower()])
    except KeyError:
        raise ConfigError(f'Unknown preset "{name}" (available: {", ".join(preset_names())}).')


def preset(name: str) -> SystemParams:
    """SystemParams of an embedded preset."""
    return params_from_mapping(preset_mapping(name))


# =============================================================================
# PARSING
# =============================================================================

def _parse(key: str, raw, cast):
    try:
        return cast(str(raw).strip())
    except (TypeError, ValueError):
        raise ConfigError(f'{key}: cannot parse "{raw}" as {cast.__name__}.')


def _parse_int(key: str, raw) -> int:
    value = _parse(key, raw, float)
    if value != int(value):
        raise ConfigError(f'{key}: expected an integer, got "{raw}".')
    return int(value)


def params_from_mapping(mapping: dict) -> SystemParams:
    """
    Build SystemParams from string (or already typed) values.

    Exactly one of T_OFDM_s / T_frame_s must be present.

    Raises:
        ConfigError: unknown key, missing key, unparsable value,
                     or a parameter set that fails validation
    """
    unknown = sorted(set(mapping) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f'Unknown config keys: {", ".join(unknown)}.')
    missing = [k for k in _REQUIRED_KEYS if mapping.get(k) in (None, '')]
    if missing:
        raise ConfigError(f'Missing config keys: {", ".join(missing)}.')

    given_times = [k for k in _TIME_KEYS if mapping.get(k) not in (None, '')]
    if len(given_times) != 1:
        raise ConfigError('Exactly one of T_OFDM_s or T_frame_s must be set.')

    kwargs = {}
    for key, attr in _INT_KEYS.items():
        if mapping.get(key) not in (None, ''):
            kwargs[attr] = _parse_int(key, mapping[key])
    for key, attr in _FLOAT_KEYS.items():
        if mapping.get(key) not in (None, ''):
            kwargs[attr] = _parse(key, mapping[key], float)

    if mapping.get('mode') not in (None, ''):
        mode = str(mapping['mode']).strip().upper()
        if mode not in ProcessingMode.values:
            raise ConfigError(f'mode: expected one of {", ".join(ProcessingMode.values)}, got "{mapping["mode"]}".')
        kwargs['mode'] = mode
    if mapping.get('channel_model') not in (None, ''):
        model = str(mapping['channel_model']).strip().lower()
        if model not in ChannelModel.values:
            raise ConfigError(f'channel_model: expected one of {", ".join(ChannelModel.values)}.')
        kwargs['channel_model'] = model

    time_key = given_times[0]
    duration = _parse(time_key, mapping[time_key], float)
    candidate = SystemParams(T_OFDM=1.0, **kwargs)
    try:
        if time_key == 'T_frame_s':
            timing = derive_timing(candidate, t_frame=duration)
        else:
            timing = derive_timing(candidate, t_ofdm=duration)
    except InvalidTiming as exc:
        raise ConfigError(f'{time_key}: {exc}')

    params = SystemParams(T_OFDM=timing.T_OFDM, **kwargs)
    violations = validate(params)
    if violations:
        raise ConfigError('Invalid parameters: ' + '; '.join(str(v) for v in violations))
    return params


def load_params(path) -> SystemParams:
    """
    Read a flat ``KEY=value`` file.

    Raises:
        MissingConfigFile: the path does not exist
        ConfigError: any parse or validation problem
    """
    path = Path(path)
    if not path.is_file():
        raise MissingConfigFile(f'Config file not found: {path}')
    values = dotenv_values(path)
    logger.debug('Loaded %d keys from %s', len(values), path)
    return params_from_mapping(values)


def params_to_mapping(params: SystemParams) -> dict:
    """Inverse of params_from_mapping (T_OFDM_s form), values as strings."""
    mapping = {}
    for key, attr in _INT_KEYS.items():
        value = getattr(params, attr)
        if value is not None:
            mapping[key] = str(value)
    for key, attr in _FLOAT_KEYS.items():
        mapping[key] = repr(float(getattr(params, attr)))
    mapping['T_OFDM_s'] = repr(float(params.T_OFDM))
    mapping['mode'] = str(params.mode)
    mapping['channel_model'] = str(params.channel_model)
    return mapping


def dump_params(params: SystemParams) -> str:
    """Config-file text for ``params``; load_params reads it back."""
    lines = [f'# {frame_slots(params)} slots per frame']
    lines.extend(f'{key}={value}' for key, value in params_to_mapping(params).items())
    return '\n'.join(lines) + '\n'
