#pragma once

#include "cerx/circuit.hpp"

#include <vector>

namespace cerx::modulator {

/// Rising zero crossing of the coil current.
struct SyncEvent {
    double t = 0.0;
};

/// Counter-based PWM timing. counter_max = 0 selects the exact
/// (unquantized) mode; otherwise gate instants snap to counter ticks.
struct CounterModel {
    long counter_max = 0;    ///< ticks per switching period (0 = exact)
    double prop_delay = 0.0; ///< comparator/driver propagation delay (s)
};

/// Default tick count for a 150 MHz timer clock.
long default_counter_max(double fs);

struct GateInterval {
    double t_on = 0.0;
    double t_off = 0.0;
};

/// Switch-on intervals, one per sync event, all with exactly 50% duty.
///
/// The gate rising edge leads the next rising zero crossing of the coil
/// current by (0.25 + D)*Ts, i.e. t_on = sync.t + (0.75 - D)*Ts. With that
/// placement the Mode-2 coil current in gate-relative time is
/// -|I_Ls|*cos(2*pi*fs*t - 2*pi*D).
struct GateSchedule {
    std::vector<GateInterval> intervals;
    double d = 0.0;  ///< phase-shift ratio
    double ts = 0.0; ///< switching period (s)

    /// true while the switch is on (half-open intervals [t_on, t_off)).
    bool gate_at(double t) const;
};

/// Gate-on fraction of the sync cycle for a given phase-shift ratio.
inline double gate_delay_fraction(double d) { return 0.75 - d; }

/// Every rising zero crossing of ils_at in [0, horizon), located
/// analytically from phase_origin. Amplitude steps preserve phase, so the
/// event times are amplitude-invariant.
std::vector<SyncEvent> detect_zero_crossings(const CoilSource& src, double fs, double horizon);

/// Builds the gate schedule for the given sync events. Throws
/// PhaseOutOfRange unless D lies in [0, 0.25].
GateSchedule gate_schedule(const std::vector<SyncEvent>& events, double d, double ts,
                           const CounterModel& counter = {});

struct ClampedPhase {
    double d = 0.0;
    bool clamped = false;
};

/// min(max(d_raw, 0), 0.25); reports whether clamping occurred.
ClampedPhase clamp_phase_ratio(double d_raw);

} // namespace cerx::modulator
