#include "cerx/modulator.hpp"

#include "cerx/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cerx::modulator {

namespace {
constexpr double kTimerClockHz = 150e6;
} // namespace

long default_counter_max(double fs) {
    return std::lround(kTimerClockHz / fs);
}

bool GateSchedule::gate_at(double t) const {
    // intervals are ordered; binary search for the candidate interval
    auto it = std::upper_bound(intervals.begin(), intervals.end(), t,
                               [](double value, const GateInterval& iv) { return value < iv.t_on; });
    if (it == intervals.begin()) {
        return false;
    }
    --it;
    return t >= it->t_on && t < it->t_off;
}

std::vector<SyncEvent> detect_zero_crossings(const CoilSource& src, double fs, double horizon) {
    std::vector<SyncEvent> events;
    if (!(horizon > 0.0)) {
        return events;
    }
    const double ts = 1.0 / fs;
    // first rising crossing at or after t = 0
    const double n0 = std::ceil((0.0 - src.phase_origin) / ts - 1e-12);
    for (double n = n0;; n += 1.0) {
        const double t = src.phase_origin + n * ts;
        if (t >= horizon) {
            break;
        }
        if (t >= 0.0) {
            events.push_back({t});
        }
    }
    return events;
}

GateSchedule gate_schedule(const std::vector<SyncEvent>& events, double d, double ts,
                           const CounterModel& counter) {
    if (!(d >= 0.0 && d <= 0.25)) {
        throw PhaseOutOfRange(d);
    }
    GateSchedule schedule;
    schedule.d = d;
    schedule.ts = ts;
    schedule.intervals.reserve(events.size());
    double on_offset = gate_delay_fraction(d) * ts;
    double off_offset = on_offset + 0.5 * ts;
    if (counter.counter_max > 0) {
        const double tick = ts / static_cast<double>(counter.counter_max);
        const long cmp_on = std::lround(gate_delay_fraction(d) * static_cast<double>(counter.counter_max));
        const long cmp_off = cmp_on + std::lround(0.5 * static_cast<double>(counter.counter_max));
        on_offset = static_cast<double>(cmp_on) * tick;
        off_offset = static_cast<double>(cmp_off) * tick;
    }
    for (const SyncEvent& ev : events) {
        schedule.intervals.push_back(
            {ev.t + on_offset + counter.prop_delay, ev.t + off_offset + counter.prop_delay});
    }
    return schedule;
}

ClampedPhase clamp_phase_ratio(double d_raw) {
    ClampedPhase out;
    out.d = std::min(std::max(d_raw, 0.0), 0.25);
    out.clamped = (out.d != d_raw);
    return out;
}

} // namespace cerx::modulator
