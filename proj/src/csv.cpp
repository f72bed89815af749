#include "cerx/csv.hpp"

#include "cerx/errors.hpp"

#include <cstdio>
#include <fstream>

namespace cerx::csv {

namespace {

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open output file: " + path);
    }
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_timeseries(const std::string& path, const sim::TimeSeries& ts) {
    auto out = open_or_throw(path);
    out << "t,vcf,ilf,vo,ils,gate\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << format_double(ts.t[i]) << ',' << format_double(ts.vcf[i]) << ','
            << format_double(ts.ilf[i]) << ',' << format_double(ts.vo[i]) << ','
            << format_double(ts.ils[i]) << ',' << ts.gate[i] << '\n';
    }
}

void write_timeseries_with_d(const std::string& path, const sim::TimeSeries& ts,
                             const std::vector<double>& d) {
    auto out = open_or_throw(path);
    out << "t,vcf,ilf,vo,ils,gate,D\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << format_double(ts.t[i]) << ',' << format_double(ts.vcf[i]) << ','
            << format_double(ts.ilf[i]) << ',' << format_double(ts.vo[i]) << ','
            << format_double(ts.ils[i]) << ',' << ts.gate[i] << ',' << format_double(d[i]) << '\n';
    }
}

void write_design_table(const std::string& path, const std::vector<design::DesignResult>& rows) {
    auto out = open_or_throw(path);
    out << "Y,Lf,Cf,Co_min\n";
    for (const auto& r : rows) {
        out << format_double(r.y) << ',' << format_double(r.lf) << ',' << format_double(r.cf) << ','
            << format_double(r.co_min) << '\n';
    }
}

void write_frequency_response(const std::string& path, const control::FrequencyResponse& rows) {
    auto out = open_or_throw(path);
    out << "f_hz,mag_db,phase_deg\n";
    for (const auto& r : rows) {
        out << format_double(r.f_hz) << ',' << format_double(r.mag_db) << ','
            << format_double(r.phase_deg) << '\n';
    }
}

void write_gate_schedule(const std::string& path, const modulator::GateSchedule& schedule) {
    auto out = open_or_throw(path);
    out << "t_on,t_off\n";
    for (const auto& iv : schedule.intervals) {
        out << format_double(iv.t_on) << ',' << format_double(iv.t_off) << '\n';
    }
}

} // namespace cerx::csv
