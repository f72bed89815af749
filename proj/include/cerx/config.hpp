#pragma once

#include "cerx/circuit.hpp"
#include "cerx/simulator.hpp"

#include <optional>
#include <string>

namespace cerx {

/// Everything a run needs, merged from the key=value config file and any
/// command-line overrides (overrides win). Validated before use.
struct RunConfig {
    CircuitParams params;
    sim::SimConfig sim;
    double fc = 100.0;                ///< controller crossover (Hz)
    std::optional<double> kp;         ///< explicit PI gains; computed when absent
    std::optional<double> ki;
    std::optional<double> d0;         ///< nominal phase-shift ratio for linearization
};

/// Parses a plain-text config: one `name = value` per line, SI units,
/// `#` starts a comment. Unknown keys raise ConfigError. Recognised keys:
/// lf, cf, co, r, fs, ils_amp, ls, cs, vo_nominal, dt, ss_tol, fc, kp, ki, d0.
RunConfig load_config(const std::string& path);

/// Parses config text (same grammar as load_config).
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Nominal phase-shift ratio: the explicit d0 when present, otherwise the
/// output-law inversion at vo_nominal, falling back to 0.125 when
/// vo_nominal is unreachable.
double nominal_phase_ratio(const RunConfig& cfg);

} // namespace cerx
