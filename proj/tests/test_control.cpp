#include "cerx/analytic.hpp"
#include "cerx/control.hpp"
#include "cerx/errors.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace cerx;
using namespace cerx::control;

namespace {

constexpr double kTwoPi = 6.283185307179586;

/// Cycle-averaged output model: Co dvo/dt = 0.795*|I|*sin(2*pi*D) - vo/R,
/// integrated with RK4. Serves as the independent route for the closed-loop
/// contracts — no switching involved.
struct AveragedLoop {
    CircuitParams p;
    double amp;
    PiGains gains;
    PiState state;
    double vo = 0.0;

    double step(double vref, double dt) {
        const auto out = pi_step(state, gains, vref, vo, dt);
        state = out.state;
        const double io = analytic::WaveformConstants::k_gain * amp * std::sin(kTwoPi * out.d);
        const auto f = [&](double v) { return (io - v / p.r) / p.co; };
        const double k1 = f(vo);
        const double k2 = f(vo + 0.5 * dt * k1);
        const double k3 = f(vo + 0.5 * dt * k2);
        const double k4 = f(vo + dt * k3);
        vo += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        return out.d;
    }
};

} // namespace

TEST_CASE("plant linearization at the prototype point") {
    const auto p = test::prototype_params();
    const auto plant = plant_tf(p, 0.8, 0.125);
    CHECK(plant.dc_gain() == doctest::Approx(101.82).epsilon(1e-3));
    CHECK(plant.pole_hz() == doctest::Approx(1.3397).epsilon(1e-3));

    const auto max_gain = plant_tf(p, 0.8, 0.0);
    CHECK(max_gain.dc_gain() == doctest::Approx(5.0 * 0.8 * 36.0));

    CHECK_THROWS_AS(plant_tf(p, 0.8, 0.25), DegenerateOperatingPoint);
}

TEST_CASE("plant gain tracks the output-law derivative") {
    const auto p = test::prototype_params();
    for (double d0 : {0.0, 0.05, 0.125, 0.2}) {
        const auto plant = plant_tf(p, 0.8, d0);
        const double h = 1e-4;
        const double up = analytic::operating_point(0.8, p.r, d0 + h).vo;
        const double dn = analytic::operating_point(0.8, p.r, d0 - h).vo;
        const double fd = (up - dn) / (2.0 * h);
        CHECK(std::abs(plant.dc_gain() - fd) / fd < 0.002);
    }
}

TEST_CASE("pi gains from the crossover rule") {
    const auto p = test::prototype_params();
    const auto g = pi_gains(100.0, p, 0.8, 0.125, 36.0);
    CHECK(g.kp == doctest::Approx(0.7331).epsilon(1e-3));
    CHECK(g.ki == doctest::Approx(6.171).epsilon(1e-3));
    CHECK(g.ki * 36.0 * p.co == doctest::Approx(g.kp).epsilon(1e-12));

    const auto g2 = pi_gains(200.0, p, 0.8, 0.125, 36.0);
    CHECK(g2.kp == doctest::Approx(2.0 * g.kp));
    CHECK(g2.ki == doctest::Approx(2.0 * g.ki));
}

TEST_CASE("the compensated loop is a pure integrator") {
    const auto p = test::prototype_params();
    const double fc = 100.0;
    const auto plant = plant_tf(p, 0.8, 0.125);
    const auto gains = pi_gains(fc, p, 0.8, 0.125, p.r);
    const auto loop = loop_tf(plant, gains);
    const auto ideal = ideal_loop_tf(fc);

    for (double f : log_grid(0.2, 1000.0, 40)) {
        const auto h = loop(f);
        const auto h0 = ideal(f);
        const double dmag = 20.0 * std::log10(std::abs(h) / std::abs(h0));
        const double dphase = std::abs(std::arg(h) - std::arg(h0)) * 180.0 / 3.14159265358979;
        CHECK(std::abs(dmag) < 0.1);
        CHECK(dphase < 0.5);
    }
    // unity gain at the crossover, -90 degrees everywhere
    CHECK(std::abs(loop(fc)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::arg(loop(fc)) * 180.0 / 3.14159265358979 == doctest::Approx(-90.0).epsilon(1e-9));
    CHECK(std::abs(loop(fc / 10.0)) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("bode asymptotes of the first-order plant") {
    const auto p = test::prototype_params();
    const auto plant = plant_tf(p, 0.8, 0.125);
    const auto resp = bode([&](double f) { return plant.at(f); },
                           {plant.pole_hz() / 1000.0, plant.pole_hz(), 100.0});
    CHECK(resp[0].mag_db == doctest::Approx(20.0 * std::log10(plant.dc_gain())).epsilon(1e-5));
    CHECK(resp[0].phase_deg == doctest::Approx(0.0).epsilon(1e-1));
    CHECK(resp[1].mag_db ==
          doctest::Approx(20.0 * std::log10(plant.dc_gain()) - 3.0103).epsilon(1e-3));
    CHECK(resp[1].phase_deg == doctest::Approx(-45.0).epsilon(1e-6));
}

TEST_CASE("pi_step contract") {
    PiGains g;
    g.kp = 0.5;
    g.ki = 10.0;

    // zero error leaves the state untouched
    PiState s;
    s.integrator = 0.1;
    s.last_d = 0.1;
    const auto out = pi_step(s, g, 24.0, 24.0, 5e-6);
    CHECK(out.d == doctest::Approx(0.1));
    CHECK(out.state.integrator == doctest::Approx(0.1));
    CHECK_FALSE(out.state.saturated);

    // deep saturation freezes the integrator
    PiState sat;
    double max_int = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const auto o = pi_step(sat, g, 40.0, 10.0, 5e-6);
        sat = o.state;
        CHECK(o.d == 0.25);
        max_int = std::max(max_int, std::abs(sat.integrator));
    }
    CHECK(max_int < 0.01); // bounded: one pre-saturation increment only

    // an error reversal drives it back out
    const auto rec = pi_step(sat, g, 40.0, 45.0, 5e-6);
    CHECK(rec.state.integrator < sat.integrator);
}

TEST_CASE("averaged-model closed loop settles at the crossover rate") {
    const auto p = test::prototype_params();
    const double fc = 100.0;
    AveragedLoop loop;
    loop.p = p;
    loop.amp = 1.0;
    loop.gains = pi_gains(fc, p, loop.amp, 0.158, p.r);
    loop.vo = 0.0;

    const double dt = p.period();
    const double vref = 24.0;
    // the 0 -> 24 V start-up saturates the actuator (plant slew dominates);
    // the loop still lands on the reference with no integrator windup
    for (long n = 0; n < 300000; ++n) {
        loop.step(vref, dt);
    }
    CHECK(loop.vo == doctest::Approx(vref).epsilon(2e-4));

    // a small reference step stays linear: first-order response at ~fc
    const double tau = 1.0 / (kTwoPi * fc);
    const double vref2 = vref + 0.1;
    double t63 = -1.0;
    for (long n = 0; n < 40000; ++n) {
        loop.step(vref2, dt);
        const double t = static_cast<double>(n + 1) * dt;
        if (t63 < 0.0 && loop.vo >= vref + 0.06321) {
            t63 = t;
        }
    }
    CHECK(loop.vo == doctest::Approx(vref2).epsilon(2e-4));
    CHECK(t63 > 0.3 * tau);
    CHECK(t63 < 3.0 * tau);

    // anti-windup: unreachable reference keeps the integrator bounded
    AveragedLoop pinned = loop;
    pinned.vo = 0.0;
    pinned.state = PiState{};
    double max_int = 0.0;
    for (long n = 0; n < 400000; ++n) {
        pinned.step(100.0, dt);
        max_int = std::max(max_int, std::abs(pinned.state.integrator));
    }
    CHECK(max_int < 0.5);
    CHECK(pinned.state.last_d == 0.25);
}

TEST_CASE("numeric frequency response follows the small-signal model") {
    const auto p = test::prototype_params();
    CoilSource src{0.8, 0.0, std::nullopt};
    const double d0 = 0.125;
    const auto plant = plant_tf(p, 0.8, d0);

    sim::SimConfig cfg;
    const auto resp = numeric_frequency_response(p, src, d0, {100.0, 1000.0}, 0.005, cfg);
    REQUIRE(resp.size() == 2);
    for (const auto& pt : resp) {
        const auto ana = plant.at(pt.f_hz);
        const double dmag = pt.mag_db - 20.0 * std::log10(std::abs(ana));
        const double dphase = pt.phase_deg - std::arg(ana) * 180.0 / 3.14159265358979;
        CAPTURE(pt.f_hz);
        CHECK(std::abs(dmag) < 2.0);
        CHECK(std::abs(dphase) < 5.0);
    }

    // linearity: halving the perturbation moves the extracted gain < 2%
    const auto small =
        numeric_frequency_response(p, src, d0, {100.0}, 0.0025, cfg);
    const double ratio = std::pow(10.0, (small[0].mag_db - resp[0].mag_db) / 20.0);
    CHECK(std::abs(ratio - 1.0) < 0.02);
}

TEST_CASE("closed-loop scenarios regulate within the published bounds") {
    auto p = test::prototype_params();
    p.ils_amp = 1.0; // full power at 24 V / 36 ohm needs more coil current
    CoilSource src{p.ils_amp, 0.0, std::nullopt};
    const double d0 = std::asin(24.0 / (0.795 * 1.0 * 36.0)) / kTwoPi;
    const auto gains = pi_gains(100.0, p, p.ils_amp, d0, p.r);

    Scenario sc;
    sc.kind = ScenarioKind::LoadStep;
    sc.vref = 24.0;
    sc.t_step = 20e-3;
    sc.duration = 0.12; // short window: overshoot check only
    sc.r2 = 600.0;
    sim::SimConfig cfg;
    const auto res = simulate_closed_loop(p, src, gains, sc, cfg);
    CHECK(res.report.pre_step_error_v < 0.1);
    CHECK(res.report.overshoot_pct < 5.0);
}
