"""
Dimensioning Serializers — request parsing and report rendering.

The same serializers back the REST endpoint and the ``--format json``
output of the CLI.
"""

import math

from rest_framework import serializers

from system.models import ProcessingMode
from system.services.config_service import (
    ConfigError,
    params_from_mapping,
    preset_mapping,
    preset_names,
)


class FiniteFloatField(serializers.FloatField):
    """Float that renders infinities (unbounded figures) as null."""

    def to_representation(self, value):
        if value is None:
            return None
        value = float(value)
        return value if math.isfinite(value) else None


# ─── System Parameters ──────────────────────────────────────────────────────

class SystemParamsSerializer(serializers.Serializer):
    K = serializers.IntegerField()
    M = serializers.IntegerField()
    N_FFT = serializers.IntegerField()
    N_SC = serializers.IntegerField()
    N_UL1 = serializers.IntegerField()
    N_UL2 = serializers.IntegerField()
    N_DL = serializers.IntegerField()
    f_sample = serializers.FloatField()
    T_OFDM = serializers.FloatField()
    T_frame = serializers.FloatField()
    T_link = serializers.FloatField()
    T_inv = serializers.FloatField()
    W_comp = serializers.IntegerField()
    W_symbol = serializers.IntegerField()
    W_ADC = serializers.IntegerField()
    W_DAC = serializers.IntegerField()
    mode = serializers.CharField()
    mmse_reg = serializers.FloatField()
    tree_arity = serializers.IntegerField()


class DimensionRequestSerializer(serializers.Serializer):
    """
    Either a preset, explicit config keys, or a preset with keys overriding it.
    """
    preset = serializers.ChoiceField(choices=preset_names(), required=False)
    params = serializers.DictField(child=serializers.CharField(), required=False)
    mode = serializers.ChoiceField(choices=ProcessingMode.choices, required=False)
    n_hops = serializers.IntegerField(min_value=1, required=False)
    n_pe = serializers.IntegerField(min_value=1, required=False)
    n_ul_pb = serializers.IntegerField(min_value=0, required=False)

    def validate(self, attrs):
        if not attrs.get('preset') and not attrs.get('params'):
            raise serializers.ValidationError('Provide a preset, params, or both.')
        mapping = preset_mapping(attrs['preset']) if attrs.get('preset') else {}
        mapping.update(attrs.get('params') or {})
        if attrs.get('mode'):
            mapping['mode'] = attrs['mode']
        if 'T_OFDM_s' in (attrs.get('params') or {}):
            mapping.pop('T_frame_s', None)
        elif 'T_frame_s' in (attrs.get('params') or {}):
            mapping.pop('T_OFDM_s', None)
        try:
            attrs['system_params'] = params_from_mapping(mapping)
        except ConfigError as exc:
            raise serializers.ValidationError({'params': str(exc)})
        attrs['mapping'] = mapping
        return attrs


# ─── Report sections ────────────────────────────────────────────────────────

class OpCountsSerializer(serializers.Serializer):
    mode = serializers.CharField()
    CE = serializers.IntegerField()
    B_i = serializers.IntegerField()
    W_i = serializers.IntegerField()
    FFT = serializers.FloatField()
    decode = serializers.FloatField()
    precode = serializers.FloatField()
    N_op_weights = serializers.FloatField()
    N_op_OFDM = serializers.FloatField()


class CriticalPathRowSerializer(serializers.Serializer):
    i = serializers.IntegerField()
    N_op_CP_i = serializers.FloatField()
    T_CP_i = serializers.FloatField()
    T_available = serializers.FloatField()
    N_OPS_CP_i = serializers.FloatField()


class PEClockSerializer(serializers.Serializer):
    N_PE = serializers.IntegerField()
    multiple = serializers.IntegerField()
    f_clk = serializers.FloatField()
    N_OPS_hat = serializers.IntegerField()
    N_OPS = serializers.FloatField()


class SlackReportSerializer(serializers.Serializer):
    N_OPS_hat = serializers.IntegerField()
    max_T_inv = FiniteFloatField(allow_null=True)
    max_K = serializers.IntegerField()
    max_N_hops = serializers.IntegerField(allow_null=True)
    N_UL_PB = serializers.IntegerField()
    N_UL_buffered = serializers.IntegerField()


class MemoryReportSerializer(serializers.Serializer):
    N_UL_buffered = serializers.IntegerField()
    Mem_input = serializers.IntegerField()
    Mem_processing = serializers.IntegerField()
    Mem_output = serializers.IntegerField()
    Mem_channel_estimates = serializers.IntegerField()
    Mem_weights = serializers.IntegerField()
    twiddle_rom_words = serializers.IntegerField()
    twiddle_rom_bits = serializers.IntegerField()
    buffers_total = serializers.IntegerField()
    vectors_total = serializers.IntegerField()


class LinkReportSerializer(serializers.Serializer):
    N_bits_up = serializers.IntegerField()
    N_bits_down = serializers.IntegerField()
    N_bits_up_exact = serializers.IntegerField()
    N_bits_down_exact = serializers.IntegerField()
    R_up_min = serializers.FloatField()
    R_down_min = serializers.FloatField()
    R_up_matched = serializers.FloatField()
    R_down_matched = serializers.FloatField()
    throughput_up = serializers.FloatField()
    throughput_down = serializers.FloatField()


class DimensioningReportSerializer(serializers.Serializer):
    params = SystemParamsSerializer()
    N_hops = serializers.IntegerField()
    op_counts = OpCountsSerializer()
    N_op_total = serializers.FloatField()
    N_OPS_avg = serializers.FloatField()
    critical_paths = CriticalPathRowSerializer(source='critical.rows', many=True)
    N_OPS_critical = serializers.FloatField()
    N_OPS = serializers.FloatField()
    N_OPS_asymptotic = serializers.FloatField()
    T_inv_A = FiniteFloatField(allow_null=True)
    T_inv_B = serializers.FloatField()
    pe_clock = PEClockSerializer()
    slack = SlackReportSerializer()
    memory = MemoryReportSerializer()
    link = LinkReportSerializer()
    notes = serializers.ListField(child=serializers.CharField())
