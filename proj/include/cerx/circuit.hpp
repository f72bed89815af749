#pragma once

#include <optional>

namespace cerx {

/// Physical parameters of the single-switch resonant receiver.
/// All component values in SI base units. Ls/Cs describe the compensated
/// receiver coil and are carried as metadata only; the coil is modelled as
/// an ideal sinusoidal current source.
struct CircuitParams {
    double lf = 0.0;          ///< rectifier inductor (H)
    double cf = 0.0;          ///< switch-node capacitor (F)
    double co = 0.0;          ///< output capacitor (F)
    double r = 0.0;           ///< load resistance (ohm)
    double fs = 0.0;          ///< switching frequency (Hz)
    double ils_amp = 0.0;     ///< coil current amplitude, peak (A)
    double ls = 164e-6;       ///< coil inductance, metadata (H)
    double cs = 3.86e-9;      ///< coil series capacitor, metadata (F)
    double vo_nominal = 24.0; ///< nominal output voltage (V)

    double period() const { return 1.0 / fs; }
};

/// Throws NonPositiveValue naming the first offending field; returns params
/// unchanged when every field is finite and strictly positive.
CircuitParams validate(const CircuitParams& params);

/// Step applied to the coil-current amplitude (line disturbance).
struct AmplitudeStep {
    double time = 0.0;      ///< step instant (s)
    double amplitude = 0.0; ///< amplitude for t >= time (A, peak)
};

/// Ideal sinusoidal receiver-coil current source. Amplitude and phase are
/// load independent; phase_origin marks a rising zero crossing.
struct CoilSource {
    double amplitude = 0.0;    ///< peak current (A)
    double phase_origin = 0.0; ///< time of a rising zero crossing (s)
    std::optional<AmplitudeStep> amplitude_step;
};

/// i_Ls(t) = amplitude * sin(2*pi*fs*(t - phase_origin)), with the
/// amplitude step applied for t past its instant (phase is continuous).
double ils_at(const CoilSource& src, double fs, double t);

/// Instantaneous circuit state.
struct ReceiverState {
    double t = 0.0;   ///< time (s)
    double vcf = 0.0; ///< switch-node capacitor voltage (V)
    double ilf = 0.0; ///< rectifier inductor current (A)
    double vo = 0.0;  ///< output voltage (V)
};

/// Mode 1: switch on, v_Cf clamped to zero. Mode 2: switch off, LC ring.
enum class SwitchMode { Mode1, Mode2 };

} // namespace cerx
