#pragma once

#include "cerx/control.hpp"
#include "cerx/design.hpp"
#include "cerx/modulator.hpp"
#include "cerx/simulator.hpp"

#include <string>
#include <vector>

namespace cerx::csv {

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

/// Header `t,vcf,ilf,vo,ils,gate`, one row per sample.
void write_timeseries(const std::string& path, const sim::TimeSeries& ts);

/// Same schema plus a trailing `D` column.
void write_timeseries_with_d(const std::string& path, const sim::TimeSeries& ts,
                             const std::vector<double>& d);

/// Header `Y,Lf,Cf,Co_min`.
void write_design_table(const std::string& path, const std::vector<design::DesignResult>& rows);

/// Header `f_hz,mag_db,phase_deg`.
void write_frequency_response(const std::string& path, const control::FrequencyResponse& rows);

/// Header `t_on,t_off`.
void write_gate_schedule(const std::string& path, const modulator::GateSchedule& schedule);

} // namespace cerx::csv
