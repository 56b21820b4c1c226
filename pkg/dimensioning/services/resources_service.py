"""
Resources Service — node memory sizes and inter-node link figures.

All memory sizes are exact integers in bits.
"""

from dimensioning.models import LinkReport, MemoryReport
from system.models import ProcessingMode, SystemParams


def memory_report(params: SystemParams, n_ul_pb: int) -> MemoryReport:
    """
    Input buffer holds the N_UL − N_UL,PB uplink symbols that wait for the
    tail, as ADC samples. Processing and output buffers hold one symbol.
    """
    n_ul_pb = min(max(n_ul_pb, 0), params.N_UL)
    buffered = params.N_UL - n_ul_pb
    rom_words = params.N_FFT // 2
    return MemoryReport(
        N_UL_buffered=buffered,
        Mem_input=buffered * params.N_FFT * params.W_ADC,
        Mem_processing=params.N_FFT * params.W_comp,
        Mem_output=params.N_FFT * params.W_DAC,
        Mem_channel_estimates=params.K * params.W_comp,
        Mem_weights=params.K * params.W_comp,
        twiddle_rom_words=rom_words,
        twiddle_rom_bits=rom_words * params.twiddle_width,
    )


def link_report(params: SystemParams, n_hat: int) -> LinkReport:
    """
    Bits per frame on the busiest link (root → CCU and back) and the rates.

    The closed-form counts carry one value per subcarrier and symbol; the
    ``_exact`` counts carry the K entries of every decoded/precoding vector.
    Conjugate beamforming exchanges no Gram or inverse.
    """
    K = params.K
    gram_values = 0 if params.mode == ProcessingMode.CB else K * (K + 1) // 2
    ul_values = params.N_UL * params.N_SC
    dl_values = params.N_DL * params.N_SC

    bits_up = (gram_values + ul_values) * params.W_comp
    bits_down = gram_values * params.W_comp + dl_values * params.W_symbol
    bits_up_exact = (gram_values + ul_values * K) * params.W_comp
    bits_down_exact = gram_values * params.W_comp + dl_values * K * params.W_symbol

    T_frame = params.T_frame
    payload = params.N_SC * K * params.W_symbol
    return LinkReport(
        N_bits_up=bits_up,
        N_bits_down=bits_down,
        N_bits_up_exact=bits_up_exact,
        N_bits_down_exact=bits_down_exact,
        R_up_min=bits_up / T_frame,
        R_down_min=bits_down / T_frame,
        R_up_matched=n_hat * params.f_sample * params.W_comp,
        R_down_matched=n_hat * params.f_sample * params.W_symbol,
        throughput_up=payload * params.N_UL / T_frame,
        throughput_down=payload * params.N_DL / T_frame,
    )
