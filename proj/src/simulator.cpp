#include "cerx/simulator.hpp"

#include "cerx/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace cerx::sim {

namespace {

constexpr double kTimeEps = 1e-16;
constexpr long kAitkenStride = 16; ///< cycles between extrapolation attempts

struct Integrator {
    const CircuitParams& p;
    const CoilSource& src;
    double dt;

    /// One RK4 step of width h from (t, x) in a fixed mode.
    ReceiverState step(const ReceiverState& x, double t, double h, SwitchMode m) const {
        const auto f = [&](double tt, double vcf, double ilf, double vo) {
            ReceiverState s{tt, vcf, ilf, vo};
            return derivatives(s, m, p, ils_at(src, p.fs, tt));
        };
        const StateRates k1 = f(t, x.vcf, x.ilf, x.vo);
        const double h2 = 0.5 * h;
        const StateRates k2 = f(t + h2, x.vcf + h2 * k1.dvcf, x.ilf + h2 * k1.dilf, x.vo + h2 * k1.dvo);
        const StateRates k3 = f(t + h2, x.vcf + h2 * k2.dvcf, x.ilf + h2 * k2.dilf, x.vo + h2 * k2.dvo);
        const StateRates k4 = f(t + h, x.vcf + h * k3.dvcf, x.ilf + h * k3.dilf, x.vo + h * k3.dvo);
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

    /// Fixed steps of dt from ta to tb (final partial) in a constant mode.
    ReceiverState span(ReceiverState x, double ta, double tb, SwitchMode m) const {
        double t = ta;
        while (t < tb - kTimeEps) {
            const double h = std::min(dt, tb - t);
            if (h <= 0.0) {
                break;
            }
            x = step(x, t, h, m);
            t += h;
        }
        x.t = tb;
        return x;
    }
};

void check_finite(const ReceiverState& x) {
    if (!(std::isfinite(x.vcf) && std::isfinite(x.ilf) && std::isfinite(x.vo))) {
        throw NonFinite(x.t);
    }
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        acc += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    }
    return acc;
}

/// Walks the state through gate edges in time order, toggling the switch
/// mode and clamping v_Cf at every turn-on instant. Edges that coincide
/// with a span boundary are applied exactly once, at the start of the next
/// span.
class CycleWalker {
public:
    CycleWalker(const Integrator& integ, const modulator::GateSchedule& gate)
        : integ_(integ), gate_(gate) {}

    // The mode must follow the consumed edge stream, not a fresh interval
    // query: a start instant within the time tolerance of an edge counts as
    // past it.
    void prime(double t) {
        cursor_ = 0;
        while (cursor_ < edge_count() && edge_time(cursor_) <= t + kTimeEps) {
            ++cursor_;
        }
        if (cursor_ == 0) {
            mode_ = SwitchMode::Mode2;
        } else {
            mode_ = (cursor_ % 2 == 1) ? SwitchMode::Mode1 : SwitchMode::Mode2;
        }
    }

    SwitchMode mode() const { return mode_; }

    ReceiverState advance(ReceiverState x, double t_a, double t_b) {
        while (cursor_ < edge_count() && edge_time(cursor_) <= t_a + kTimeEps) {
            apply_edge(x, cursor_);
            ++cursor_;
        }
        double t = t_a;
        while (cursor_ < edge_count() && edge_time(cursor_) < t_b - kTimeEps) {
            const double te = edge_time(cursor_);
            x = integ_.span(x, t, te, mode_);
            apply_edge(x, cursor_);
            t = te;
            ++cursor_;
        }
        x = integ_.span(x, t, t_b, mode_);
        check_finite(x);
        return x;
    }

    bool exhausted(double t) const {
        return gate_.intervals.empty() || t > gate_.intervals.back().t_on + gate_.ts + kTimeEps;
    }

private:
    std::size_t edge_count() const { return gate_.intervals.size() * 2; }
    double edge_time(std::size_t i) const {
        const auto& iv = gate_.intervals[i / 2];
        return (i % 2 == 0) ? iv.t_on : iv.t_off;
    }
    void apply_edge(ReceiverState& x, std::size_t i) {
        if (i % 2 == 0) {
            x.vcf = 0.0;
            mode_ = SwitchMode::Mode1;
        } else {
            mode_ = SwitchMode::Mode2;
        }
    }

    const Integrator& integ_;
    const modulator::GateSchedule& gate_;
    std::size_t cursor_ = 0;
    SwitchMode mode_ = SwitchMode::Mode2;
};

double effective_dt(const CircuitParams& params, const SimConfig& cfg) {
    return cfg.dt > 0.0 ? cfg.dt : params.period() / 1000.0;
}

} // namespace

StateRates derivatives(const ReceiverState& state, SwitchMode mode, const CircuitParams& params,
                       double ils) {
    StateRates r;
    if (mode == SwitchMode::Mode1) {
        r.dvcf = 0.0;
        r.dilf = -state.vo / params.lf;
    } else {
        r.dvcf = (ils - state.ilf) / params.cf;
        r.dilf = (state.vcf - state.vo) / params.lf;
    }
    r.dvo = (state.ilf - state.vo / params.r) / params.co;
    return r;
}

TimeSeries run_transient(const CircuitParams& params, const CoilSource& src,
                         const modulator::GateSchedule& gate, const SimConfig& cfg,
                         const ReceiverState& init, double t_end) {
    validate(params);
    const double dt = effective_dt(params, cfg);
    const double t0 = init.t;
    if (t_end < 0.0) {
        if (gate.intervals.empty()) {
            throw OutOfRange("run_transient: empty gate schedule and no explicit horizon");
        }
        t_end = gate.intervals.back().t_on + gate.ts;
    }

    std::vector<double> splits;
    if (src.amplitude_step && src.amplitude_step->time > t0 && src.amplitude_step->time < t_end) {
        splits.push_back(src.amplitude_step->time);
    }

    Integrator integ{params, src, dt};
    CycleWalker walker(integ, gate);
    walker.prime(t0);

    TimeSeries out;
    const long stride = std::max<long>(cfg.record_stride, 1);
    const long n_steps = static_cast<long>(std::ceil((t_end - t0) / dt - 1e-9));
    out.t.reserve(static_cast<std::size_t>(n_steps / stride + 2));

    ReceiverState x = init;
    if (walker.mode() == SwitchMode::Mode1) {
        x.vcf = 0.0;
    }
    std::size_t split_cursor = 0;

    const auto record = [&](const ReceiverState& s) {
        out.t.push_back(s.t);
        out.vcf.push_back(s.vcf);
        out.ilf.push_back(s.ilf);
        out.vo.push_back(s.vo);
        out.ils.push_back(ils_at(src, params.fs, s.t));
        out.gate.push_back(gate.gate_at(s.t) ? 1 : 0);
    };
    record(x);

    for (long k = 0; k < n_steps; ++k) {
        const double ta = t0 + static_cast<double>(k) * dt;
        const double tb = (k + 1 == n_steps) ? t_end
                                             : std::min(t0 + static_cast<double>(k + 1) * dt, t_end);
        if (split_cursor < splits.size() && splits[split_cursor] > ta + kTimeEps &&
            splits[split_cursor] < tb - kTimeEps) {
            x = walker.advance(x, ta, splits[split_cursor]);
            x = walker.advance(x, splits[split_cursor], tb);
            ++split_cursor;
        } else {
            x = walker.advance(x, ta, tb);
        }
        if ((k + 1) % stride == 0 || k + 1 == n_steps) {
            record(x);
        }
    }
    return out;
}

PeriodicOrbit find_steady_state(const CircuitParams& params, const CoilSource& src,
                                const modulator::GateSchedule& gate, const SimConfig& cfg,
                                std::optional<ReceiverState> init) {
    validate(params);
    const double ts = params.period();
    const double dt = effective_dt(params, cfg);
    Integrator integ{params, src, dt};
    CycleWalker walker(integ, gate);

    // cycle boundaries sit at the sync phase: e0 + n*Ts
    const double e0 = src.phase_origin - std::floor(src.phase_origin / ts + 1e-12) * ts;

    ReceiverState x = init.value_or(ReceiverState{0.0, 0.0, 0.0, 0.0});
    walker.prime(x.t);
    const double n_first = std::ceil((x.t - e0) / ts - 1e-9);
    const double e_start = e0 + n_first * ts;
    x = walker.advance(x, x.t, e_start);

    // The output pole R*Co spans up to ~1e5 cycles, so the raw cycle-to-cycle
    // change understates the remaining distance to the orbit by that factor.
    // Scale the test so ss_tolerance bounds the estimated distance itself.
    const double slow_gain = 1.0 / (1.0 - std::exp(-ts / (params.r * params.co)));

    std::array<std::array<double, 3>, 3> hist{};
    int hist_len = 0;
    long n = 0;
    bool converged = false;
    while (n < cfg.n_cycles_max) {
        const double ta = e_start + static_cast<double>(n) * ts;
        if (walker.exhausted(ta + ts)) {
            throw OutOfRange("find_steady_state: gate schedule shorter than the iteration horizon");
        }
        const ReceiverState prev = x;
        x = walker.advance(x, ta, ta + ts);
        ++n;
        const double norm = std::sqrt(prev.vcf * prev.vcf + prev.ilf * prev.ilf + prev.vo * prev.vo);
        const double diff = std::hypot(x.vcf - prev.vcf, std::hypot(x.ilf - prev.ilf, x.vo - prev.vo));
        if (norm > 1e-12) {
            if (diff * slow_gain / norm < cfg.ss_tolerance) {
                converged = true;
                break;
            }
        } else if (diff <= 1e-15) {
            converged = true; // identically zero orbit (zero source)
            break;
        }
        if (n % kAitkenStride == 0) {
            hist[hist_len % 3] = {x.vcf, x.ilf, x.vo};
            ++hist_len;
            if (hist_len >= 3) {
                const auto& x0 = hist[(hist_len - 3) % 3];
                const auto& x1 = hist[(hist_len - 2) % 3];
                const auto& x2 = hist[(hist_len - 1) % 3];
                double* fields[3] = {&x.vcf, &x.ilf, &x.vo};
                for (int c = 0; c < 3; ++c) {
                    const double d1 = x1[c] - x0[c];
                    const double d2 = x2[c] - x1[c];
                    const double den = d2 - d1;
                    if (std::abs(den) > 1e-14 * (std::abs(x2[c]) + 1e-12)) {
                        *fields[c] = x2[c] - d2 * d2 / den;
                    }
                }
                check_finite(x);
                hist_len = 0;
            }
        }
    }
    if (!converged) {
        throw NoConvergence(cfg.n_cycles_max);
    }

    // advance to the next gate rising edge and record one full cycle there
    const double t_now = e_start + static_cast<double>(n) * ts;
    auto next_on =
        std::find_if(gate.intervals.begin(), gate.intervals.end(),
                     [&](const modulator::GateInterval& iv) { return iv.t_on >= t_now - kTimeEps; });
    if (next_on == gate.intervals.end()) {
        throw OutOfRange("find_steady_state: gate schedule does not cover the recording cycle");
    }
    const double t_on = next_on->t_on;
    const double t_off = next_on->t_off;
    x = walker.advance(x, t_now, t_on);
    x.vcf = 0.0; // ZVS turn-on clamp at the recording anchor
    x.t = t_on;

    PeriodicOrbit orbit;
    orbit.t_on = t_on;
    orbit.ts = ts;
    orbit.d = gate.d;
    orbit.cycles = n;
    orbit.zvs_off_voltage = 0.0;

    const long stride = std::max<long>(cfg.record_stride, 1);
    const long n_steps = std::max<long>(static_cast<long>(std::llround(ts / dt)), 1);
    TimeSeries& s = orbit.series;
    double vcf_peak = 0.0;
    SwitchMode mode = SwitchMode::Mode1;
    const auto record = [&](const ReceiverState& st, SwitchMode m) {
        s.t.push_back(st.t);
        s.vcf.push_back(st.vcf);
        s.ilf.push_back(st.ilf);
        s.vo.push_back(st.vo);
        s.ils.push_back(ils_at(src, params.fs, st.t));
        s.gate.push_back(m == SwitchMode::Mode1 ? 1 : 0);
    };
    record(x, mode);
    for (long k = 0; k < n_steps; ++k) {
        const double ta = t_on + static_cast<double>(k) * dt;
        const double tb = (k + 1 == n_steps) ? t_on + ts : t_on + static_cast<double>(k + 1) * dt;
        if (mode == SwitchMode::Mode1 && std::abs(t_off - ta) <= kTimeEps) {
            orbit.zvs_off_voltage = x.vcf;
            mode = SwitchMode::Mode2;
            x = integ.span(x, ta, tb, mode);
        } else if (mode == SwitchMode::Mode1 && t_off > ta + kTimeEps && t_off < tb - kTimeEps) {
            x = integ.span(x, ta, t_off, mode);
            orbit.zvs_off_voltage = x.vcf;
            mode = SwitchMode::Mode2;
            x = integ.span(x, t_off, tb, mode);
        } else {
            x = integ.span(x, ta, tb, mode);
        }
        vcf_peak = std::max(vcf_peak, x.vcf);
        if ((k + 1) % stride == 0 || k + 1 == n_steps) {
            record(x, mode);
        }
    }
    check_finite(x);
    orbit.zvs_on_voltage = x.vcf; // residual the clamp would discard
    orbit.vcf_peak = vcf_peak;

    const double vo_max = *std::max_element(s.vo.begin(), s.vo.end());
    const double vo_min = *std::min_element(s.vo.begin(), s.vo.end());
    orbit.vo_ripple_pp = vo_max - vo_min;

    const CycleAverages avg = cycle_averages(orbit);
    orbit.io_avg = avg.io_avg;
    orbit.vo_avg = avg.vo_avg;
    orbit.p_avg = avg.p_avg;

    const double start_norm = std::hypot(s.ilf.front(), s.vo.front());
    orbit.state_mismatch =
        std::hypot(x.ilf - s.ilf.front(), x.vo - s.vo.front()) / std::max(start_norm, 1e-12);
    return orbit;
}

ZvsReport zvs_report(const PeriodicOrbit& orbit, const CircuitParams& params) {
    (void)params;
    ZvsReport rep;
    rep.turn_on_voltage = orbit.zvs_on_voltage;
    rep.turn_off_voltage = orbit.zvs_off_voltage;
    rep.vcf_peak = orbit.vcf_peak;
    const double limit = 0.02 * orbit.vcf_peak;
    rep.zvs_ok = std::abs(rep.turn_on_voltage) < limit && std::abs(rep.turn_off_voltage) < limit;
    return rep;
}

CycleAverages cycle_averages(const PeriodicOrbit& orbit) {
    const TimeSeries& s = orbit.series;
    CycleAverages avg;
    if (s.size() < 2) {
        return avg;
    }
    const double span = s.t.back() - s.t.front();
    avg.io_avg = trapezoid(s.t, s.ilf) / span;
    avg.vo_avg = trapezoid(s.t, s.vo) / span;
    std::vector<double> pw(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        pw[i] = s.vcf[i] * s.ils[i];
    }
    avg.p_avg = trapezoid(s.t, pw) / span;
    return avg;
}

} // namespace cerx::sim
