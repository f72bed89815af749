#include "cerx/circuit.hpp"

#include "cerx/errors.hpp"

#include <cmath>

namespace cerx {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_positive(double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
        throw NonPositiveValue(name);
    }
}
} // namespace

CircuitParams validate(const CircuitParams& params) {
    require_positive(params.lf, "lf");
    require_positive(params.cf, "cf");
    require_positive(params.co, "co");
    require_positive(params.r, "r");
    require_positive(params.fs, "fs");
    require_positive(params.ils_amp, "ils_amp");
    require_positive(params.ls, "ls");
    require_positive(params.cs, "cs");
    require_positive(params.vo_nominal, "vo_nominal");
    return params;
}

double ils_at(const CoilSource& src, double fs, double t) {
    double amp = src.amplitude;
    if (src.amplitude_step && t >= src.amplitude_step->time) {
        amp = src.amplitude_step->amplitude;
    }
    return amp * std::sin(kTwoPi * fs * (t - src.phase_origin));
}

} // namespace cerx
