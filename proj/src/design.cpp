#include "cerx/design.hpp"

#include "cerx/analytic.hpp"
#include "cerx/errors.hpp"

#include <cmath>
#include <tuple>

namespace cerx::design {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kBandLow = 2.5;
constexpr double kBandHigh = 5.0;
constexpr double kRippleCharge = 5.41; ///< ripple-charge factor in the Co rule

double resonance_omega(double fs) {
    return kTwoPi * analytic::WaveformConstants::k_res * fs;
}
} // namespace

void validate_spec(const DesignSpec& spec) {
    if (!(std::isfinite(spec.ils_max) && spec.ils_max > 0.0)) {
        throw NonPositiveValue("ils_max");
    }
    if (!(std::isfinite(spec.vo_min) && spec.vo_min > 0.0)) {
        throw NonPositiveValue("vo_min");
    }
    if (!(std::isfinite(spec.fs) && spec.fs > 0.0)) {
        throw NonPositiveValue("fs");
    }
    if (!(std::isfinite(spec.ripple_pct) && spec.ripple_pct > 0.0 && spec.ripple_pct < 100.0)) {
        throw OutOfRange("ripple_pct must lie in (0, 100)");
    }
}

std::pair<double, double> admittance_band(const DesignSpec& spec) {
    validate_spec(spec);
    return {kBandLow * spec.ils_max / spec.vo_min, kBandHigh * spec.ils_max / spec.vo_min};
}

std::pair<double, double> solve_lf_cf(double y, double fs) {
    if (!(y > 0.0)) {
        throw NonPositiveValue("Y");
    }
    if (!(fs > 0.0)) {
        throw NonPositiveValue("fs");
    }
    const double w = resonance_omega(fs);
    return {1.0 / (y * w), y / w};
}

double min_output_cap(double cf, double ripple_pct) {
    if (!(cf > 0.0)) {
        throw NonPositiveValue("cf");
    }
    if (!(ripple_pct > 0.0 && ripple_pct < 100.0)) {
        throw OutOfRange("ripple_pct must lie in (0, 100)");
    }
    return kRippleCharge * cf / (ripple_pct / 100.0);
}

std::vector<DesignResult> feasible_region(const DesignSpec& spec, int n_points) {
    if (n_points < 2) {
        throw OutOfRange("feasible_region needs at least 2 points");
    }
    const auto [y_min, y_max] = admittance_band(spec);
    std::vector<DesignResult> region;
    region.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n_points - 1);
        const double y = y_min + frac * (y_max - y_min);
        DesignResult res;
        res.y = y;
        res.y_min = y_min;
        res.y_max = y_max;
        std::tie(res.lf, res.cf) = solve_lf_cf(y, spec.fs);
        res.co_min = min_output_cap(res.cf, spec.ripple_pct);
        region.push_back(res);
    }
    return region;
}

DesignResult pick_design(const DesignSpec& spec, double band_fraction) {
    if (!(band_fraction >= 0.0 && band_fraction <= 1.0)) {
        throw OutOfRange("band fraction must lie in [0, 1]");
    }
    const auto [y_min, y_max] = admittance_band(spec);
    DesignResult res;
    res.y = y_min + band_fraction * (y_max - y_min);
    res.y_min = y_min;
    res.y_max = y_max;
    std::tie(res.lf, res.cf) = solve_lf_cf(res.y, spec.fs);
    // recommended Co comes from the band's largest Cf, reached at y_max
    const auto [lf_hi, cf_hi] = solve_lf_cf(y_max, spec.fs);
    (void)lf_hi;
    res.co_min = min_output_cap(cf_hi, spec.ripple_pct);
    return res;
}

} // namespace cerx::design
