#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "poscon/sim.hpp"

namespace poscon {

// Trace CSV schema, one row per (step, agent) plus one "leader" row per step:
//
//   k, sigma, agent, nx, x_1..x_P, w_1..w_n0, eta_1..eta_P, u_1..u_M, y_1..y_l, e_1..e_l
//
// P and M are the largest state and input widths over the followers; shorter
// vectors leave trailing cells empty and nx gives the row's own state width.
// Leader rows carry x0 in the x columns and y0 in the y columns. Numbers are
// written with 17 significant digits so the file reproduces the trace exactly.
void write_trace_csv(const Scenario& s, const SimulationTrace& t, std::ostream& out);

/// Machine-readable run summary: checks, graph constants, regulator
/// solutions, gains, positivity and convergence diagnostics.
std::string summary_json(const Scenario& s, const AssumptionReport& report, const SimulationTrace& t);

/// Per-figure plot data: observer.csv (leader state vs. estimates and their
/// errors), outputs.csv (y0 and every y_i), states.csv (x_i and eta_i).
void write_plot_data(const Scenario& s, const SimulationTrace& t, const std::filesystem::path& dir);

/// Human-readable listing of every check with its supporting numbers.
std::string format_check_report(const AssumptionReport& report);

/// JSON form of the check report.
std::string check_report_json(const AssumptionReport& report);

}  // namespace poscon
