#pragma once

#include "cerx/circuit.hpp"
#include "cerx/simulator.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace cerx::control {

/// First-order small-signal plant from phase-shift ratio to output voltage:
/// vo~/D~ = gain*R / (1 + s*R*Co), gain = 5*|I_Ls|*cos(2*pi*D0).
struct PlantModel {
    double gain = 0.0;    ///< A per unit D
    double r = 0.0;       ///< ohm
    double co = 0.0;      ///< F
    double pole_rc = 0.0; ///< R*Co (s)

    double dc_gain() const { return gain * r; }
    double pole_hz() const;
    std::complex<double> at(double f_hz) const;
};

struct PiGains {
    double kp = 0.0; ///< unit D per V
    double ki = 0.0; ///< unit D per (V*s)
    double d_min = 0.0;
    double d_max = 0.25;
};

struct FrequencyPoint {
    double f_hz = 0.0;
    double mag_db = 0.0;
    double phase_deg = 0.0;
};

using FrequencyResponse = std::vector<FrequencyPoint>;

/// Any scalar transfer function evaluated at a real frequency in Hz.
using TransferFn = std::function<std::complex<double>(double f_hz)>;

/// Throws DegenerateOperatingPoint at D0 = 0.25 where the gain vanishes.
PlantModel plant_tf(const CircuitParams& params, double ils_amp, double d0);

/// kp = 2*pi*fc*Co/(5*|I_Ls|*cos(2*pi*D0)), ki = kp/(R*Co).
PiGains pi_gains(double fc, const CircuitParams& params, double ils_amp, double d0, double r);

/// PI compensator kp + ki/s.
TransferFn pi_tf(const PiGains& gains);

/// Loop transfer plant*PI; with gains from pi_gains the pole cancels and the
/// loop reduces to 2*pi*fc/s.
TransferFn loop_tf(const PlantModel& plant, const PiGains& gains);

/// The reduced closed-form loop 2*pi*fc/s.
TransferFn ideal_loop_tf(double fc);

FrequencyResponse bode(const TransferFn& tf, const std::vector<double>& f_grid);

std::vector<double> log_grid(double f_min, double f_max, int n_points);

/// Small-signal response measured on the switched simulator: a sinusoidal
/// perturbation of amplitude `amplitude` rides on D0, one D update per
/// switching cycle; the vo component at each frequency is extracted by
/// correlation over an integer number of perturbation periods. Frequencies
/// snap to integer cycle counts (fs / round(fs/f)).
FrequencyResponse numeric_frequency_response(const CircuitParams& params, const CoilSource& src,
                                             double d0, const std::vector<double>& f_grid,
                                             double amplitude = 0.005,
                                             const sim::SimConfig& cfg = {});

/// Discrete PI state with conditional-integration anti-windup.
struct PiState {
    double integrator = 0.0;
    double last_d = 0.0;
    bool saturated = false;
};

struct PiOutput {
    double d = 0.0;
    PiState state;
};

/// One controller update: candidate D = kp*e + integrator; the integrator
/// accumulates only while the previous output was unsaturated or the error
/// drives it out of saturation; the output is clamped to [d_min, d_max].
PiOutput pi_step(const PiState& state, const PiGains& gains, double vref, double vo_meas,
                 double dt_ctrl);

enum class ScenarioKind { LoadStep, SourceStep, ReferenceStep, OpenLoop };

/// Closed-loop experiment description. Steps are applied at the first cycle
/// boundary at or after t_step.
struct Scenario {
    ScenarioKind kind = ScenarioKind::LoadStep;
    double vref = 24.0;
    double t_step = 30e-3;
    double duration = 0.43;   ///< total simulated time (s)
    double r2 = 600.0;        ///< post-step load (LoadStep)
    double amp1 = 0.5;        ///< pre-step coil amplitude (SourceStep)
    double amp2 = 0.8;        ///< post-step coil amplitude (SourceStep)
    double vref2 = 22.0;      ///< post-step reference (ReferenceStep)
    double d_open_loop = 0.2; ///< fixed D (OpenLoop)
};

struct StepReport {
    double overshoot_v = 0.0;   ///< max |vo - vref| after the step
    double overshoot_pct = 0.0; ///< ... as percent of vref
    double tail_error_v = 0.0;  ///< max |vo - vref| over the final 5% window
    double tail_error_pct = 0.0;
    double pre_step_error_v = 0.0; ///< max |vo - vref| just before the step
};

struct ClosedLoopResult {
    sim::TimeSeries series;
    std::vector<double> d; ///< phase-shift ratio per recorded sample
    StepReport report;
};

/// Runs the switched simulator with the PI regulator updating D once per
/// cycle (vo sampled at the sync edge). The run starts from the regulated
/// operating point. Throws NonFinite on divergence.
ClosedLoopResult simulate_closed_loop(const CircuitParams& params, const CoilSource& src,
                                      const PiGains& gains, const Scenario& scenario,
                                      const sim::SimConfig& cfg = {});

} // namespace cerx::control
