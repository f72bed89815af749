#pragma once

#include <utility>
#include <vector>

namespace cerx::design {

/// Inputs to the component-sizing rules.
struct DesignSpec {
    double ils_max = 0.0;   ///< max coil current amplitude, peak (A)
    double vo_min = 0.0;    ///< minimum operating output voltage (V)
    double fs = 0.0;        ///< switching frequency (Hz)
    double ripple_pct = 0.0;///< output ripple budget, percent (1 means 1%)
};

/// One sized operating point of the feasible region.
struct DesignResult {
    double y = 0.0;      ///< characteristic admittance sqrt(Cf/Lf) (S)
    double lf = 0.0;     ///< (H)
    double cf = 0.0;     ///< (F)
    double co_min = 0.0; ///< minimum output capacitance for the ripple budget (F)
    double y_min = 0.0;  ///< admittance band lower edge (S)
    double y_max = 0.0;  ///< admittance band upper edge (S)
};

/// Throws NonPositiveValue / OutOfRange on invalid spec fields.
void validate_spec(const DesignSpec& spec);

/// Admittance band: [2.5, 5] * ils_max / vo_min.
std::pair<double, double> admittance_band(const DesignSpec& spec);

/// Solves the resonance placement 1/(2*pi*sqrt(Lf*Cf)) = 1.29*fs for the
/// given characteristic admittance: Cf = Y/w, Lf = 1/(Y*w), w = 2*pi*1.29*fs.
std::pair<double, double> solve_lf_cf(double y, double fs);

/// Co >= 5.41*Cf/(x/100) for a ripple budget of x percent.
double min_output_cap(double cf, double ripple_pct);

/// Samples the admittance band uniformly; each point satisfies both the band
/// rule and the resonance placement exactly. The largest Cf in the list sets
/// the recommended Co.
std::vector<DesignResult> feasible_region(const DesignSpec& spec, int n_points);

/// Design at a fractional position in the admittance band (0 = lower edge,
/// 1 = upper edge; 0.5 is the default midpoint choice).
DesignResult pick_design(const DesignSpec& spec, double band_fraction);

} // namespace cerx::design
