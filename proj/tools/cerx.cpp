#include "cerx/analytic.hpp"
#include "cerx/config.hpp"
#include "cerx/control.hpp"
#include "cerx/csv.hpp"
#include "cerx/design.hpp"
#include "cerx/errors.hpp"
#include "cerx/modulator.hpp"
#include "cerx/simulator.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

using namespace cerx;

std::string with_suffix(const std::string& path, const std::string& suffix) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || dot == 0) {
        return path + suffix;
    }
    return path.substr(0, dot) + suffix + path.substr(dot);
}

modulator::GateSchedule schedule_for(const CircuitParams& params, const CoilSource& src, double d,
                                     double horizon) {
    const auto events = modulator::detect_zero_crossings(src, params.fs, horizon);
    return modulator::gate_schedule(events, d, params.period());
}

control::PiGains gains_for(const RunConfig& cfg) {
    if (cfg.kp && cfg.ki) {
        control::PiGains g;
        g.kp = *cfg.kp;
        g.ki = *cfg.ki;
        return g;
    }
    const double d0 = nominal_phase_ratio(cfg);
    return control::pi_gains(cfg.fc, cfg.params, cfg.params.ils_amp, d0, cfg.params.r);
}

int cmd_design(double fs, double ils_max, double vo_min, double ripple, double y_fraction,
               int points, const std::string& out) {
    design::DesignSpec spec{ils_max, vo_min, fs, ripple};
    const auto region = design::feasible_region(spec, points);
    const auto chosen = design::pick_design(spec, y_fraction);
    csv::write_design_table(out, region);
    std::printf("admittance band: [%.6g, %.6g] S\n", chosen.y_min, chosen.y_max);
    std::printf("chosen Y = %.6g S (band fraction %.3g)\n", chosen.y, y_fraction);
    std::printf("Lf = %.6g H\nCf = %.6g F\nCo_min = %.6g F (from the band's largest Cf)\n",
                chosen.lf, chosen.cf, chosen.co_min);
    std::printf("feasible region written to %s (%d rows)\n", out.c_str(), points);
    return kExitOk;
}

int cmd_steady(const RunConfig& cfg, double d, const std::string& out) {
    validate(cfg.params);
    const auto clamped = modulator::clamp_phase_ratio(d);
    if (clamped.clamped) {
        throw PhaseOutOfRange(d);
    }
    CoilSource src{cfg.params.ils_amp, 0.0, std::nullopt};
    const double horizon = (static_cast<double>(cfg.sim.n_cycles_max) + 16.0) * cfg.params.period();
    const auto schedule = schedule_for(cfg.params, src, d, horizon);
    const auto orbit = sim::find_steady_state(cfg.params, src, schedule, cfg.sim);
    const auto zvs = sim::zvs_report(orbit, cfg.params);

    std::vector<double> vcf_cycle(orbit.series.vcf.begin(), orbit.series.vcf.end() - 1);
    const double thd = analytic::thd_of_samples(vcf_cycle);

    std::printf("converged after %ld cycles\n", orbit.cycles);
    std::printf("vo_avg      = %.6g V\n", orbit.vo_avg);
    std::printf("io_avg      = %.6g A\n", orbit.io_avg);
    std::printf("p_avg       = %.6g W\n", orbit.p_avg);
    std::printf("vcf_peak    = %.6g V (%.3g x vo_avg)\n", orbit.vcf_peak,
                orbit.vo_avg > 0 ? orbit.vcf_peak / orbit.vo_avg : 0.0);
    std::printf("zvs turn-on  residual = %.6g V\n", zvs.turn_on_voltage);
    std::printf("zvs turn-off residual = %.6g V\n", zvs.turn_off_voltage);
    std::printf("zvs_ok      = %s\n", zvs.zvs_ok ? "true" : "false");
    std::printf("vo ripple   = %.6g V peak-to-peak (%.4g %% of vo_avg)\n", orbit.vo_ripple_pp,
                orbit.vo_avg > 0 ? 100.0 * orbit.vo_ripple_pp / orbit.vo_avg : 0.0);
    std::printf("THD(vcf)    = %.4g dB\n", thd);
    if (!out.empty()) {
        csv::write_timeseries(out, orbit.series);
        std::printf("one-cycle series written to %s\n", out.c_str());
    }
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const std::string& scenario_name, double d_open,
                 double r2, double amp1, double amp2, double vref2, double t_step,
                 double duration, long stride, const std::string& out) {
    validate(cfg.params);
    sim::SimConfig sim_cfg = cfg.sim;
    const double ts = cfg.params.period();
    const double dt = sim_cfg.dt > 0.0 ? sim_cfg.dt : ts / 1000.0;

    if (scenario_name == "open_loop") {
        CoilSource src{cfg.params.ils_amp, 0.0, std::nullopt};
        const auto schedule = schedule_for(cfg.params, src, d_open, duration + 2.0 * ts);
        sim_cfg.record_stride = stride > 0 ? stride : 1;
        const auto series = sim::run_transient(cfg.params, src, schedule, sim_cfg,
                                               ReceiverState{}, duration);
        if (!out.empty()) {
            csv::write_timeseries(out, series);
        }
        std::printf("open-loop run: %zu samples over %.6g s at D = %.4g\n", series.size(), duration,
                    d_open);
        return kExitOk;
    }

    control::Scenario sc;
    sc.vref = cfg.params.vo_nominal;
    sc.t_step = t_step;
    sc.duration = duration;
    sc.r2 = r2;
    sc.amp1 = amp1;
    sc.amp2 = amp2;
    sc.vref2 = vref2;
    if (scenario_name == "load_step") {
        sc.kind = control::ScenarioKind::LoadStep;
    } else if (scenario_name == "source_step") {
        sc.kind = control::ScenarioKind::SourceStep;
    } else if (scenario_name == "reference_step") {
        sc.kind = control::ScenarioKind::ReferenceStep;
    } else {
        throw ConfigError("unknown scenario: " + scenario_name);
    }

    // one row per cycle; --stride thins further
    sim_cfg.record_stride = stride > 0 ? stride : 1;
    (void)dt;
    CoilSource src{cfg.params.ils_amp, 0.0, std::nullopt};
    const auto gains = gains_for(cfg);
    const auto result = control::simulate_closed_loop(cfg.params, src, gains, sc, sim_cfg);
    if (!out.empty()) {
        csv::write_timeseries_with_d(out, result.series, result.d);
    }
    std::printf("scenario %s: kp = %.6g, ki = %.6g\n", scenario_name.c_str(), gains.kp, gains.ki);
    std::printf("pre-step regulation error = %.6g V\n", result.report.pre_step_error_v);
    std::printf("overshoot = %.6g V (%.3g %% of vref)\n", result.report.overshoot_v,
                result.report.overshoot_pct);
    std::printf("settled error = %.6g V (%.3g %% of vref)\n", result.report.tail_error_v,
                result.report.tail_error_pct);
    return kExitOk;
}

int cmd_bode(const RunConfig& cfg, double fmin, double fmax, int points, bool numeric,
             int numeric_points, std::optional<double> d0_flag, const std::string& out) {
    validate(cfg.params);
    if (!(fmin > 0.0 && fmax > fmin)) {
        throw OutOfRange("bode: need 0 < fmin < fmax");
    }
    RunConfig merged = cfg;
    if (d0_flag) {
        merged.d0 = *d0_flag;
    }
    const double d0 = nominal_phase_ratio(merged);
    const auto plant = control::plant_tf(cfg.params, cfg.params.ils_amp, d0);
    const auto gains = gains_for(merged);
    const auto grid = control::log_grid(fmin, fmax, points);

    const auto plant_resp = control::bode([&](double f) { return plant.at(f); }, grid);
    csv::write_frequency_response(out, plant_resp);
    const auto loop_resp = control::bode(control::loop_tf(plant, gains), grid);
    const std::string loop_path = with_suffix(out, "_loop");
    csv::write_frequency_response(loop_path, loop_resp);
    std::printf("plant: DC gain %.6g V/unit-D, pole %.6g Hz, D0 = %.4g\n", plant.dc_gain(),
                plant.pole_hz(), d0);
    std::printf("analytic Bode written to %s and %s (%d rows each)\n", out.c_str(),
                loop_path.c_str(), points);

    if (numeric) {
        const double lo = std::max(fmin, 10.0);
        const double hi = std::min(fmax, 1000.0);
        if (!(lo < hi)) {
            throw OutOfRange("bode --numeric: grid must intersect [10, 1000] Hz");
        }
        const auto ngrid = control::log_grid(lo, hi, numeric_points);
        CoilSource src{cfg.params.ils_amp, 0.0, std::nullopt};
        const auto nresp =
            control::numeric_frequency_response(cfg.params, src, d0, ngrid, 0.005, cfg.sim);
        const std::string npath = with_suffix(out, "_numeric");
        csv::write_frequency_response(npath, nresp);
        std::printf("numeric response written to %s (%d rows)\n", npath.c_str(), numeric_points);
    }
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param, double from, double to, int steps,
              double d_fixed, bool closed_loop, const std::string& out) {
    validate(cfg.params);
    if (steps < 1) {
        throw OutOfRange("sweep: steps must be >= 1");
    }
    if (param != "R" && param != "D" && param != "ils") {
        throw ConfigError("sweep: --param must be one of R | D | ils");
    }
    std::FILE* f = std::fopen(out.c_str(), "w");
    if (!f) {
        throw ConfigError("cannot open output file: " + out);
    }
    std::fprintf(f, "param,vo_avg,io_avg,zvs_ok,reg_err,ok\n");
    bool any_failed = false;
    for (int i = 0; i < steps; ++i) {
        const double value =
            steps == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
        CircuitParams p = cfg.params;
        CoilSource src{cfg.params.ils_amp, 0.0, std::nullopt};
        double d = d_fixed;
        if (param == "R") {
            p.r = value;
        } else if (param == "ils") {
            src.amplitude = value;
            p.ils_amp = value;
        } else {
            d = value;
        }
        try {
            if (closed_loop) {
                control::Scenario sc;
                sc.kind = control::ScenarioKind::LoadStep;
                sc.vref = cfg.params.vo_nominal;
                sc.r2 = p.r;
                sc.t_step = 0.0;
                sc.duration = 0.25;
                const auto gains = gains_for(cfg);
                const auto res = control::simulate_closed_loop(p, src, gains, sc, cfg.sim);
                const auto& sr = res.series;
                const double vo_end = sr.vo.back();
                std::fprintf(f, "%s,%s,%s,,%s,1\n", csv::format_double(value).c_str(),
                             csv::format_double(vo_end).c_str(),
                             csv::format_double(vo_end / p.r).c_str(),
                             csv::format_double(res.report.tail_error_v).c_str());
            } else {
                const double horizon =
                    (static_cast<double>(cfg.sim.n_cycles_max) + 16.0) * p.period();
                const auto schedule = schedule_for(p, src, d, horizon);
                const auto orbit = sim::find_steady_state(p, src, schedule, cfg.sim);
                const auto zvs = sim::zvs_report(orbit, p);
                std::fprintf(f, "%s,%s,%s,%d,,1\n", csv::format_double(value).c_str(),
                             csv::format_double(orbit.vo_avg).c_str(),
                             csv::format_double(orbit.io_avg).c_str(), zvs.zvs_ok ? 1 : 0);
            }
        } catch (const NoConvergence&) {
            any_failed = true;
            std::fprintf(f, "%s,,,,,0\n", csv::format_double(value).c_str());
        } catch (const NonFinite&) {
            any_failed = true;
            std::fprintf(f, "%s,,,,,0\n", csv::format_double(value).c_str());
        }
    }
    std::fclose(f);
    std::printf("sweep table written to %s (%d rows)\n", out.c_str(), steps);
    if (any_failed) {
        std::fprintf(stderr, "sweep: one or more points failed to converge (flagged ok=0)\n");
        return kExitNumeric;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"class-E regulated WPT receiver: design, simulation, and control tool"};
    app.require_subcommand(1);

    // design
    auto* design_cmd = app.add_subcommand("design", "size Lf, Cf and Co from the design rules");
    double fs = 200e3, ils_max = 0.8, vo_min = 24.0, ripple = 1.0, y_fraction = 0.5;
    int points = 25;
    std::string design_out = "feasible_region.csv";
    design_cmd->add_option("--fs", fs, "switching frequency (Hz)")->required();
    design_cmd->add_option("--ils-max", ils_max, "max coil current amplitude, peak (A)")->required();
    design_cmd->add_option("--vo-min", vo_min, "minimum output voltage (V)")->required();
    design_cmd->add_option("--ripple", ripple, "output ripple budget in percent")->required();
    design_cmd->add_option("--y-fraction", y_fraction, "position in the admittance band [0,1]");
    design_cmd->add_option("--points", points, "feasible-region sample count");
    design_cmd->add_option("--out", design_out, "feasible-region CSV path");

    // steady
    auto* steady_cmd = app.add_subcommand("steady", "steady-state orbit and ZVS report");
    std::string steady_config, steady_out;
    double steady_d = 0.2;
    std::optional<double> steady_r, steady_ils, steady_co;
    steady_cmd->add_option("--config", steady_config, "key=value config file")->required();
    steady_cmd->add_option("--D", steady_d, "phase-shift ratio [0, 0.25]")->required();
    steady_cmd->add_option("--R", steady_r, "load resistance override (ohm)");
    steady_cmd->add_option("--ils", steady_ils, "coil amplitude override (A)");
    steady_cmd->add_option("--co", steady_co, "output capacitance override (F)");
    steady_cmd->add_option("--out", steady_out, "one-cycle CSV path");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "closed-loop scenario or open-loop run");
    std::string sim_config, scenario, sim_out;
    double d_open = 0.2, r2 = 600.0, amp1 = 0.5, amp2 = 0.8, vref2 = -1.0;
    double t_step = 30e-3, duration = 0.43;
    long sim_stride = 0;
    sim_cmd->add_option("--config", sim_config, "key=value config file")->required();
    sim_cmd->add_option("--scenario", scenario, "load_step | source_step | reference_step | open_loop")
        ->required();
    sim_cmd->add_option("--D", d_open, "fixed phase-shift ratio (open_loop)");
    sim_cmd->add_option("--r2", r2, "post-step load (ohm, load_step)");
    sim_cmd->add_option("--amp1", amp1, "pre-step coil amplitude (A, source_step)");
    sim_cmd->add_option("--amp2", amp2, "post-step coil amplitude (A, source_step)");
    sim_cmd->add_option("--vref2", vref2, "post-step reference (V, reference_step)");
    sim_cmd->add_option("--t-step", t_step, "step instant (s)");
    sim_cmd->add_option("--duration", duration, "total simulated time (s)");
    sim_cmd->add_option("--stride", sim_stride, "record every Nth sample");
    sim_cmd->add_option("--out", sim_out, "output CSV path");

    // bode
    auto* bode_cmd = app.add_subcommand("bode", "plant/loop Bode tables, optional numeric check");
    std::string bode_config, bode_out = "bode.csv";
    double fmin = 0.1, fmax = 10e3;
    int bode_points = 50, numeric_points = 5;
    bool numeric = false;
    std::optional<double> d0_flag;
    bode_cmd->add_option("--config", bode_config, "key=value config file")->required();
    bode_cmd->add_option("--fmin", fmin, "grid start (Hz)");
    bode_cmd->add_option("--fmax", fmax, "grid end (Hz)");
    bode_cmd->add_option("--points", bode_points, "grid size");
    bode_cmd->add_flag("--numeric", numeric, "also extract the response from simulation");
    bode_cmd->add_option("--numeric-points", numeric_points, "numeric grid size");
    bode_cmd->add_option("--D0", d0_flag, "nominal phase-shift ratio override");
    bode_cmd->add_option("--out", bode_out, "CSV path (suffixes _loop/_numeric added)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "steady-state table over R, D or ils");
    std::string sweep_config, sweep_param, sweep_out = "sweep.csv";
    double sweep_from = 18.0, sweep_to = 144.0, sweep_d = 0.25;
    int sweep_steps = 4;
    bool sweep_closed = false;
    sweep_cmd->add_option("--config", sweep_config, "key=value config file")->required();
    sweep_cmd->add_option("--param", sweep_param, "R | D | ils")->required();
    sweep_cmd->add_option("--from", sweep_from, "range start")->required();
    sweep_cmd->add_option("--to", sweep_to, "range end")->required();
    sweep_cmd->add_option("--steps", sweep_steps, "point count")->required();
    sweep_cmd->add_option("--D", sweep_d, "fixed phase-shift ratio (open-loop sweeps)");
    sweep_cmd->add_flag("--closed-loop", sweep_closed, "regulate to vo_nominal at each point");
    sweep_cmd->add_option("--out", sweep_out, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(design_cmd)) {
            return cmd_design(fs, ils_max, vo_min, ripple, y_fraction, points, design_out);
        }
        if (app.got_subcommand(steady_cmd)) {
            RunConfig cfg = load_config(steady_config);
            if (steady_r) {
                cfg.params.r = *steady_r;
            }
            if (steady_ils) {
                cfg.params.ils_amp = *steady_ils;
            }
            if (steady_co) {
                cfg.params.co = *steady_co;
            }
            return cmd_steady(cfg, steady_d, steady_out);
        }
        if (app.got_subcommand(sim_cmd)) {
            RunConfig cfg = load_config(sim_config);
            if (vref2 < 0.0) {
                vref2 = cfg.params.vo_nominal - 2.0;
            }
            return cmd_simulate(cfg, scenario, d_open, r2, amp1, amp2, vref2, t_step, duration,
                                sim_stride, sim_out);
        }
        if (app.got_subcommand(bode_cmd)) {
            RunConfig cfg = load_config(bode_config);
            return cmd_bode(cfg, fmin, fmax, bode_points, numeric, numeric_points, d0_flag, bode_out);
        }
        if (app.got_subcommand(sweep_cmd)) {
            RunConfig cfg = load_config(sweep_config);
            return cmd_sweep(cfg, sweep_param, sweep_from, sweep_to, sweep_steps, sweep_d,
                             sweep_closed, sweep_out);
        }
    } catch (const NoConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const NonFinite& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
