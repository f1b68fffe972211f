#pragma once

#include "irbl/sim.hpp"

#include <filesystem>
#include <string>

namespace irbl::report {

/// Rounds to 9 significant digits, the precision of every emitted float.
double round9(double x);

/// "%.9g", or empty for non-finite values.
std::string format9(double x);

/// report.json text; non-finite and missing values become null.
std::string report_json(const sim::RunReport& r);

std::string trajectory_csv(const sim::Trajectory& tr);

/// Writes report.json and traj_<i>.csv into `dir`, creating it.
void write_run(const std::filesystem::path& dir, const sim::RunReport& r);

struct SummaryKey {
    std::string scenario;
    std::string fov;
    double delta;
    std::uint64_t seed;
};

std::string summary_header();

/// One row per agent. A failed run (`r == nullptr`) yields `n_agents` blank rows.
std::string summary_rows(const SummaryKey& key, const sim::RunReport* r, std::size_t n_agents);

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace irbl::report
