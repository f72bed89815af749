#pragma once

#include "cerx/circuit.hpp"
#include "cerx/modulator.hpp"

#include <vector>

namespace cerx::sim {

/// Fixed-step integration settings. dt = 0 selects the default Ts/1000.
struct SimConfig {
    double dt = 0.0;
    long n_cycles_max = 20000;
    double ss_tolerance = 1e-6;
    long record_stride = 1;
};

/// Uniformly sampled waveform record.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> vcf;
    std::vector<double> ilf;
    std::vector<double> vo;
    std::vector<double> ils;
    std::vector<int> gate;

    std::size_t size() const { return t.size(); }
};

/// Instantaneous state rates for the two switch modes.
struct StateRates {
    double dvcf = 0.0;
    double dilf = 0.0;
    double dvo = 0.0;
};

/// Mode 1: v_Cf clamped, L_f discharges into the output. Mode 2: the coil
/// current rings the L_f C_f tank. ils is the coil current at the evaluation
/// instant.
StateRates derivatives(const ReceiverState& state, SwitchMode mode, const CircuitParams& params,
                       double ils);

/// One converged steady-state cycle, anchored at a gate rising edge so that
/// normalized time (t - t_on)/Ts runs Mode 1 over [0, 0.5) and Mode 2 over
/// [0.5, 1). The final row holds the pre-clamp state; its v_Cf is the ZVS
/// turn-on residual.
struct PeriodicOrbit {
    TimeSeries series;
    double t_on = 0.0;  ///< anchor instant (s)
    double ts = 0.0;    ///< cycle length (s)
    double d = 0.0;     ///< phase-shift ratio of the schedule
    double io_avg = 0.0;
    double vo_avg = 0.0;
    double p_avg = 0.0;
    double zvs_on_voltage = 0.0;  ///< |v_Cf| discarded at turn-on
    double zvs_off_voltage = 0.0; ///< v_Cf at turn-off (zero by clamping)
    double vcf_peak = 0.0;
    double vo_ripple_pp = 0.0;
    long cycles = 0; ///< cycles integrated before convergence
    double state_mismatch = 0.0; ///< post-clamp start/end relative difference
};

/// Fixed-step RK4 over [init.t, t_end], split exactly at gate edges and at
/// the source amplitude step. Samples land on the master grid
/// init.t + k*dt, thinned by record_stride. t_end < 0 derives the horizon
/// from the schedule. Throws NonFinite on divergence.
TimeSeries run_transient(const CircuitParams& params, const CoilSource& src,
                         const modulator::GateSchedule& gate, const SimConfig& cfg,
                         const ReceiverState& init, double t_end = -1.0);

/// Iterates whole switching cycles until the cycle-boundary states agree to
/// within ss_tolerance, with the cycle-to-cycle difference scaled by the
/// R*Co slow-pole gain so the tolerance bounds the estimated distance to the
/// orbit (Aitken-accelerated; the convergence test always runs on
/// unaccelerated cycles). Starts from a cold (all-zero) state unless an
/// initial state is supplied. Throws NoConvergence or NonFinite.
PeriodicOrbit find_steady_state(const CircuitParams& params, const CoilSource& src,
                                const modulator::GateSchedule& gate, const SimConfig& cfg,
                                std::optional<ReceiverState> init = std::nullopt);

struct ZvsReport {
    double turn_on_voltage = 0.0;
    double turn_off_voltage = 0.0;
    double vcf_peak = 0.0;
    bool zvs_ok = false; ///< both residuals below 2% of the waveform peak
};

ZvsReport zvs_report(const PeriodicOrbit& orbit, const CircuitParams& params);

struct CycleAverages {
    double io_avg = 0.0;
    double vo_avg = 0.0;
    double p_avg = 0.0;
};

/// Trapezoidal averages over the recorded cycle; p_avg integrates the
/// received power v_Cf * i_Ls.
CycleAverages cycle_averages(const PeriodicOrbit& orbit);

} // namespace cerx::sim
