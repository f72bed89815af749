#include "cerx/analytic.hpp"

#include "cerx/errors.hpp"

#include <cmath>
#include <limits>

namespace cerx::analytic {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr std::size_t kThdSamples = 8192;
constexpr std::size_t kThdHarmonics = 50;
} // namespace

double vcf_analytic(double u, double vo) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw OutOfRange("vcf_analytic: u must lie in [0, 1)");
    }
    if (!(vo > 0.0)) {
        throw OutOfRange("vcf_analytic: vo must be positive");
    }
    if (u < 0.5) {
        return 0.0;
    }
    return vo * (1.0 + WaveformConstants::k_amp *
                           std::cos(WaveformConstants::k_freq * (u - 0.75)));
}

double ilf_analytic(double u, const CircuitParams& params, double d) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw OutOfRange("ilf_analytic: u must lie in [0, 1)");
    }
    if (!(d >= 0.0 && d <= 0.25)) {
        throw OutOfRange("ilf_analytic: D must lie in [0, 0.25]");
    }
    const double y = std::sqrt(params.cf / params.lf);
    const double vo = params.vo_nominal;
    const double base = WaveformConstants::k_gain * params.ils_amp * std::sin(kTwoPi * d);
    if (u < 0.5) {
        return base - WaveformConstants::k_freq * vo * y * (u - 0.25);
    }
    return base + WaveformConstants::k_amp * vo * y *
                      std::sin(WaveformConstants::k_freq * (u - 0.75));
}

double real_power(double ils_amp, double vo, double d) {
    return WaveformConstants::k_gain * ils_amp * vo * std::sin(kTwoPi * d);
}

OperatingPoint operating_point(double ils_amp, double r, double d) {
    OperatingPoint op;
    op.io = WaveformConstants::k_gain * ils_amp * std::sin(kTwoPi * d);
    op.vo = op.io * r;
    return op;
}

std::vector<double> fourier_magnitudes(const std::vector<double>& samples, std::size_t n_max) {
    const std::size_t n = samples.size();
    std::vector<double> mags(n_max + 1, 0.0);
    if (n == 0) {
        return mags;
    }
    double mean = 0.0;
    for (double v : samples) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    mags[0] = mean;
    for (std::size_t h = 1; h <= n_max; ++h) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double phase = kTwoPi * static_cast<double>(h) * static_cast<double>(k) /
                                 static_cast<double>(n);
            re += samples[k] * std::cos(phase);
            im += samples[k] * std::sin(phase);
        }
        mags[h] = 2.0 * std::hypot(re, im) / static_cast<double>(n);
    }
    return mags;
}

double thd_of_samples(const std::vector<double>& samples) {
    const auto mags = fourier_magnitudes(samples, kThdHarmonics);
    const double c1 = mags[1];
    double sum_sq = 0.0;
    for (std::size_t h = 2; h <= kThdHarmonics; ++h) {
        sum_sq += mags[h] * mags[h];
    }
    if (c1 <= 0.0 || sum_sq <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 20.0 * std::log10(std::sqrt(sum_sq) / c1);
}

double thd_vcf() {
    std::vector<double> samples(kThdSamples);
    for (std::size_t k = 0; k < kThdSamples; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(kThdSamples);
        samples[k] = vcf_analytic(u, 1.0);
    }
    return thd_of_samples(samples);
}

double vcf_cycle_mean_per_vo() {
    std::vector<double> samples(kThdSamples);
    double sum = 0.0;
    for (std::size_t k = 0; k < kThdSamples; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(kThdSamples);
        sum += vcf_analytic(u, 1.0);
    }
    return sum / static_cast<double>(kThdSamples);
}

ConstantsReport constants_report() {
    ConstantsReport rep;
    rep.resonance_residual = std::abs(WaveformConstants::k_freq - kTwoPi * WaveformConstants::k_res);
    rep.zvs_boundary_residual =
        std::abs(1.0 + WaveformConstants::k_amp * std::cos(WaveformConstants::k_freq / 4.0));
    rep.gain_residual = std::abs(5.0 - WaveformConstants::k_gain * kTwoPi);
    rep.resonance_ok = rep.resonance_residual < 1e-3 * WaveformConstants::k_freq;
    rep.zvs_boundary_ok = rep.zvs_boundary_residual < 1e-3;
    rep.gain_ok = rep.gain_residual < 2e-3 * 5.0;
    return rep;
}

} // namespace cerx::analytic
