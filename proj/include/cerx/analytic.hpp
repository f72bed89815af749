#pragma once

#include "cerx/circuit.hpp"

#include <cstddef>
#include <vector>

namespace cerx::analytic {

/// Constants of the closed-form steady-state waveforms, as published
/// (rounded to three significant figures).
struct WaveformConstants {
    static constexpr double k_amp = 2.26;   ///< ring amplitude factor in v_Cf
    static constexpr double k_freq = 8.11;  ///< ring phase rate (rad per cycle)
    static constexpr double k_gain = 0.795; ///< output-current law gain
    static constexpr double k_res = 1.29;   ///< resonance placement (multiple of fs)
};

/// Closed-form switch-node voltage at normalized time u = t/Ts in [0,1),
/// gate-relative (Mode 1 occupies [0, 0.5)). Throws OutOfRange.
double vcf_analytic(double u, double vo);

/// Closed-form rectifier inductor current at normalized time u. Uses
/// params.vo_nominal as the operating output voltage and params.ils_amp as
/// the coil amplitude. D in [0, 0.25]. Throws OutOfRange.
double ilf_analytic(double u, const CircuitParams& params, double d);

/// Real power received, P = k_gain * |I_Ls| * v_o * sin(2*pi*D).
double real_power(double ils_amp, double vo, double d);

struct OperatingPoint {
    double io = 0.0;
    double vo = 0.0;
};

/// Load-independent output current law: io = k_gain*|I_Ls|*sin(2*pi*D),
/// vo = io*R.
OperatingPoint operating_point(double ils_amp, double r, double d);

/// Fourier magnitude coefficients c_0..c_n_max of a uniformly sampled
/// periodic signal (c_0 is the mean, c_n the peak amplitude of harmonic n).
std::vector<double> fourier_magnitudes(const std::vector<double>& samples, std::size_t n_max);

/// THD in dB of a sampled waveform: 20*log10(rms(harmonics 2..50)/fundamental),
/// DC excluded. Returns -infinity when there is no harmonic content.
double thd_of_samples(const std::vector<double>& samples);

/// THD of the closed-form v_Cf waveform, evaluated by quadrature with
/// at least 4096 samples per cycle.
double thd_vcf();

/// Mean of the closed-form v_Cf waveform over one cycle, per unit vo.
double vcf_cycle_mean_per_vo();

/// Internal-consistency residuals of the published constants.
struct ConstantsReport {
    double resonance_residual = 0.0;   ///< |k_freq - 2*pi*k_res|
    double zvs_boundary_residual = 0.0;///< |1 + k_amp*cos(k_freq/4)|
    double gain_residual = 0.0;        ///< |5 - k_gain*2*pi|
    bool resonance_ok = false;         ///< residual within 0.1% of k_freq
    bool zvs_boundary_ok = false;      ///< residual within 1e-3
    bool gain_ok = false;              ///< residual within 0.2% of 5
};

ConstantsReport constants_report();

} // namespace cerx::analytic
