#include "cerx/control.hpp"

#include "cerx/analytic.hpp"
#include "cerx/errors.hpp"
#include "cerx/modulator.hpp"

#include <algorithm>
#include <cmath>

namespace cerx::control {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kTimeEps = 1e-16;

double wrap_deg(std::complex<double> h) { return std::atan2(h.imag(), h.real()) * 180.0 / 3.14159265358979323846; }

/// Per-cycle switched integration shared by the closed-loop and the
/// perturbation-response runs. The cycle [t_n, t_n + Ts) consists of the
/// tail of the previous gate interval (Mode 1), the off span (Mode 2,
/// ended by the turn-on clamp), and the head of this cycle's interval.
class CycleSim {
public:
    CycleSim(const CircuitParams& params, const CoilSource& src, double dt)
        : params_(params), src_(src), dt_(dt), ts_(params.period()) {}

    CircuitParams& params() { return params_; }
    CoilSource& source() { return src_; }

    ReceiverState run_cycle(ReceiverState x, double t_n, double d_now, double d_prev) {
        const double head_end = t_n + (0.25 - d_prev) * ts_;
        const double t_on = t_n + modulator::gate_delay_fraction(d_now) * ts_;
        const double t_end = t_n + ts_;
        if (head_end > t_n + kTimeEps) {
            x = span(x, t_n, head_end, SwitchMode::Mode1);
        }
        x = span(x, head_end, t_on, SwitchMode::Mode2);
        last_clamp_ = x.vcf;
        x.vcf = 0.0;
        x = span(x, t_on, t_end, SwitchMode::Mode1);
        if (!(std::isfinite(x.vcf) && std::isfinite(x.ilf) && std::isfinite(x.vo))) {
            throw NonFinite(x.t);
        }
        return x;
    }

    double last_clamp() const { return last_clamp_; }

private:
    ReceiverState span(ReceiverState x, double ta, double tb, SwitchMode m) const {
        double t = ta;
        while (t < tb - kTimeEps) {
            const double h = std::min(dt_, tb - t);
            if (h <= 0.0) {
                break;
            }
            x = rk4(x, t, h, m);
            t += h;
        }
        x.t = tb;
        return x;
    }

    ReceiverState rk4(const ReceiverState& x, double t, double h, SwitchMode m) const {
        const auto f = [&](double tt, double vcf, double ilf, double vo) {
            ReceiverState s{tt, vcf, ilf, vo};
            return sim::derivatives(s, m, params_, ils_at(src_, params_.fs, tt));
        };
        const sim::StateRates k1 = f(t, x.vcf, x.ilf, x.vo);
        const double h2 = 0.5 * h;
        const sim::StateRates k2 =
            f(t + h2, x.vcf + h2 * k1.dvcf, x.ilf + h2 * k1.dilf, x.vo + h2 * k1.dvo);
        const sim::StateRates k3 =
            f(t + h2, x.vcf + h2 * k2.dvcf, x.ilf + h2 * k2.dilf, x.vo + h2 * k2.dvo);
        const sim::StateRates k4 = f(t + h, x.vcf + h * k3.dvcf, x.ilf + h * k3.dilf, x.vo + h * k3.dvo);
        ReceiverState out;
        out.t = t + h;
        out.vcf = x.vcf + h / 6.0 * (k1.dvcf + 2.0 * k2.dvcf + 2.0 * k3.dvcf + k4.dvcf);
        out.ilf = x.ilf + h / 6.0 * (k1.dilf + 2.0 * k2.dilf + 2.0 * k3.dilf + k4.dilf);
        out.vo = x.vo + h / 6.0 * (k1.dvo + 2.0 * k2.dvo + 2.0 * k3.dvo + k4.dvo);
        if (m == SwitchMode::Mode1) {
            out.vcf = 0.0;
        }
        return out;
    }

    CircuitParams params_;
    CoilSource src_;
    double dt_;
    double ts_;
    double last_clamp_ = 0.0;
};

/// Phase-shift ratio that places the Eq.-10 operating point at vo; clamped
/// into the controllable range when the target is unreachable.
double invert_output_law(double vo, double ils_amp, double r) {
    const double arg = vo / (analytic::WaveformConstants::k_gain * ils_amp * r);
    if (arg >= 1.0) {
        return 0.25;
    }
    if (arg <= 0.0) {
        return 0.0;
    }
    return std::min(std::asin(arg) / kTwoPi, 0.25);
}

sim::PeriodicOrbit settle(const CircuitParams& params, const CoilSource& src, double d0,
                          const sim::SimConfig& cfg) {
    const double ts = params.period();
    const double horizon = (static_cast<double>(cfg.n_cycles_max) + 16.0) * ts;
    const auto events = modulator::detect_zero_crossings(src, params.fs, horizon);
    const auto schedule = modulator::gate_schedule(events, d0, ts);
    return sim::find_steady_state(params, src, schedule, cfg);
}

} // namespace

double PlantModel::pole_hz() const { return 1.0 / (kTwoPi * pole_rc); }

std::complex<double> PlantModel::at(double f_hz) const {
    const std::complex<double> s(0.0, kTwoPi * f_hz);
    return gain * r / (1.0 + s * pole_rc);
}

PlantModel plant_tf(const CircuitParams& params, double ils_amp, double d0) {
    if (!(d0 >= 0.0 && d0 < 0.25)) {
        throw DegenerateOperatingPoint("plant gain vanishes at D = 0.25 (and D must be >= 0)");
    }
    PlantModel plant;
    plant.gain = 5.0 * ils_amp * std::cos(kTwoPi * d0);
    plant.r = params.r;
    plant.co = params.co;
    plant.pole_rc = params.r * params.co;
    return plant;
}

PiGains pi_gains(double fc, const CircuitParams& params, double ils_amp, double d0, double r) {
    if (!(fc > 0.0)) {
        throw NonPositiveValue("fc");
    }
    if (!(d0 >= 0.0 && d0 < 0.25)) {
        throw DegenerateOperatingPoint("PI gains are undefined at D = 0.25");
    }
    PiGains g;
    g.kp = kTwoPi * fc * params.co / (5.0 * ils_amp * std::cos(kTwoPi * d0));
    g.ki = g.kp / (r * params.co);
    return g;
}

TransferFn pi_tf(const PiGains& gains) {
    return [gains](double f_hz) {
        const std::complex<double> s(0.0, kTwoPi * f_hz);
        return gains.kp + gains.ki / s;
    };
}

TransferFn loop_tf(const PlantModel& plant, const PiGains& gains) {
    const TransferFn pi = pi_tf(gains);
    return [plant, pi](double f_hz) { return plant.at(f_hz) * pi(f_hz); };
}

TransferFn ideal_loop_tf(double fc) {
    return [fc](double f_hz) {
        const std::complex<double> s(0.0, kTwoPi * f_hz);
        return kTwoPi * fc / s;
    };
}

FrequencyResponse bode(const TransferFn& tf, const std::vector<double>& f_grid) {
    FrequencyResponse out;
    out.reserve(f_grid.size());
    for (double f : f_grid) {
        const std::complex<double> h = tf(f);
        out.push_back({f, 20.0 * std::log10(std::abs(h)), wrap_deg(h)});
    }
    return out;
}

std::vector<double> log_grid(double f_min, double f_max, int n_points) {
    if (!(f_min > 0.0 && f_max > f_min) || n_points < 2) {
        throw OutOfRange("log_grid: need 0 < f_min < f_max and at least 2 points");
    }
    std::vector<double> grid(static_cast<std::size_t>(n_points));
    const double l0 = std::log10(f_min);
    const double l1 = std::log10(f_max);
    for (int i = 0; i < n_points; ++i) {
        grid[static_cast<std::size_t>(i)] =
            std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(n_points - 1));
    }
    return grid;
}

FrequencyResponse numeric_frequency_response(const CircuitParams& params, const CoilSource& src,
                                             double d0, const std::vector<double>& f_grid,
                                             double amplitude, const sim::SimConfig& cfg) {
    validate(params);
    const PlantModel plant = plant_tf(params, src.amplitude, d0);
    const double ts = params.period();
    const double dt = cfg.dt > 0.0 ? cfg.dt : ts / 1000.0;

    const sim::PeriodicOrbit base = settle(params, src, d0, cfg);
    const double vo_ss = base.vo_avg;
    // state at a cycle boundary: take the recorded sample nearest to the sync
    // phase inside the orbit (t_on + (0.25+D)*Ts)
    const double t_sync = base.t_on + (0.25 + d0) * ts;
    std::size_t idx = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < base.series.size(); ++i) {
        const double dist = std::abs(base.series.t[i] - t_sync);
        if (dist < best) {
            best = dist;
            idx = i;
        }
    }
    const ReceiverState boundary_state{0.0, base.series.vcf[idx], base.series.ilf[idx],
                                       base.series.vo[idx]};

    FrequencyResponse out;
    out.reserve(f_grid.size());
    for (double f_req : f_grid) {
        const long n_per = std::max<long>(1, std::llround(params.fs / f_req));
        const double f = params.fs / static_cast<double>(n_per);
        const long n_warm = 2 * n_per;
        const long n_meas = 6 * n_per;

        CycleSim cs(params, src, dt);
        ReceiverState x = boundary_state;
        // start on the predicted perturbed orbit to suppress the turn-on transient
        const std::complex<double> h_pred = plant.at(f);
        x.vo += amplitude * h_pred.imag();
        double re = 0.0;
        double im = 0.0;
        double d_prev = d0;
        for (long n = 0; n < n_warm + n_meas; ++n) {
            const double t = static_cast<double>(n) * ts;
            const double d_now =
                modulator::clamp_phase_ratio(d0 + amplitude * std::sin(kTwoPi * f * t)).d;
            x = cs.run_cycle(x, t, d_now, d_prev);
            d_prev = d_now;
            if (n >= n_warm) {
                const double te = t + ts;
                re += (x.vo - vo_ss) * std::cos(kTwoPi * f * te) * ts;
                im += (x.vo - vo_ss) * std::sin(kTwoPi * f * te) * ts;
            }
        }
        const double t_total = static_cast<double>(n_meas) * ts;
        const double pr = 2.0 / t_total * re;
        const double pi = -2.0 / t_total * im;
        const std::complex<double> h(-pi / amplitude, pr / amplitude);
        out.push_back({f, 20.0 * std::log10(std::abs(h)), wrap_deg(h)});
    }
    return out;
}

PiOutput pi_step(const PiState& state, const PiGains& gains, double vref, double vo_meas,
                 double dt_ctrl) {
    PiOutput out;
    out.state = state;
    const double e = vref - vo_meas;
    const double candidate = gains.kp * e + state.integrator;
    const auto clamped = modulator::clamp_phase_ratio(candidate);
    const bool drives_out = state.saturated && ((state.last_d >= gains.d_max && e < 0.0) ||
                                                (state.last_d <= gains.d_min && e > 0.0));
    if (!state.saturated || drives_out) {
        out.state.integrator += gains.ki * e * dt_ctrl;
    }
    out.state.saturated = clamped.clamped;
    out.state.last_d = clamped.d;
    out.d = clamped.d;
    return out;
}

ClosedLoopResult simulate_closed_loop(const CircuitParams& params, const CoilSource& src,
                                      const PiGains& gains, const Scenario& scenario,
                                      const sim::SimConfig& cfg) {
    validate(params);
    const double ts = params.period();
    const double dt = cfg.dt > 0.0 ? cfg.dt : ts / 1000.0;
    const long n_cycles = std::max<long>(2, std::llround(scenario.duration / ts));
    const long step_cycle =
        std::clamp<long>(std::llround(scenario.t_step / ts), 0, n_cycles - 1);

    CircuitParams p = params;
    CoilSource source = src;
    double vref = scenario.vref;
    if (scenario.kind == ScenarioKind::SourceStep) {
        source.amplitude = scenario.amp1;
        source.amplitude_step = AmplitudeStep{static_cast<double>(step_cycle) * ts, scenario.amp2};
    }

    CycleSim cs(p, source, dt);
    const double amp0 = source.amplitude;
    const double d_init = scenario.kind == ScenarioKind::OpenLoop
                              ? scenario.d_open_loop
                              : invert_output_law(vref, amp0, p.r);

    ReceiverState x{0.0, 0.0, vref / p.r, vref};
    if (scenario.kind == ScenarioKind::OpenLoop) {
        x = ReceiverState{0.0, 0.0, 0.0, 0.0};
    }
    PiState pi_state;
    pi_state.integrator = d_init;
    pi_state.last_d = d_init;

    ClosedLoopResult result;
    const long stride = std::max<long>(cfg.record_stride, 1);
    result.series.t.reserve(static_cast<std::size_t>(n_cycles / stride + 2));

    double pre_err = 0.0;
    double overshoot = 0.0;
    double tail_err = 0.0;
    const long tail_begin = n_cycles - std::max<long>(n_cycles / 20, 1);

    double d_prev = 0.25; // cold start: no gate tail in the first cycle
    for (long n = 0; n < n_cycles; ++n) {
        const double t = static_cast<double>(n) * ts;
        if (scenario.kind == ScenarioKind::LoadStep && n == step_cycle) {
            cs.params().r = scenario.r2;
        }
        if (scenario.kind == ScenarioKind::ReferenceStep && n == step_cycle) {
            vref = scenario.vref2;
        }
        double d_now = scenario.d_open_loop;
        if (scenario.kind != ScenarioKind::OpenLoop) {
            const PiOutput out = pi_step(pi_state, gains, vref, x.vo, ts);
            pi_state = out.state;
            d_now = out.d;
        }
        x = cs.run_cycle(x, t, d_now, d_prev);
        d_prev = d_now;

        const double err = std::abs(x.vo - vref);
        if (n >= step_cycle) {
            overshoot = std::max(overshoot, err);
        } else if (n >= step_cycle - std::max<long>(step_cycle / 10, 1)) {
            pre_err = std::max(pre_err, err);
        }
        if (n >= tail_begin) {
            tail_err = std::max(tail_err, err);
        }

        if (n % stride == 0 || n + 1 == n_cycles) {
            result.series.t.push_back(x.t);
            result.series.vcf.push_back(x.vcf);
            result.series.ilf.push_back(x.ilf);
            result.series.vo.push_back(x.vo);
            result.series.ils.push_back(ils_at(source, p.fs, x.t));
            result.series.gate.push_back(d_now < 0.25 ? 1 : 0); // boundary sits in the gate tail
            result.d.push_back(d_now);
        }
    }

    result.report.overshoot_v = overshoot;
    result.report.overshoot_pct = 100.0 * overshoot / vref;
    result.report.tail_error_v = tail_err;
    result.report.tail_error_pct = 100.0 * tail_err / vref;
    result.report.pre_step_error_v = pre_err;
    return result;
}

} // namespace cerx::control
