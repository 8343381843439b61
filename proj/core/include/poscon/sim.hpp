#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "poscon/graph.hpp"
#include "poscon/linalg.hpp"
#include "poscon/regulator.hpp"
#include "poscon/systems.hpp"

namespace poscon {

enum class Mode { StateFeedback, OutputFeedback, ObserverOnly };

const char* to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);

struct InitialConditions {
  Vector x0;
  std::vector<Vector> x;
  // Observer and compensator states start at zero unless overridden; any
  // nonzero value puts the run outside the convergence guarantees.
  std::optional<std::vector<Vector>> w;
  std::optional<std::vector<Vector>> eta;
};

struct Scenario {
  std::string name;
  LeaderModel leader;
  std::vector<AgentModel> agents;
  GraphSchedule schedule;
  GainSet gains;
  Mode mode = Mode::StateFeedback;
  std::size_t horizon = 500;
  InitialConditions initial;
  bool override_assumptions = false;
  std::vector<std::string> notes;  // resolution messages (synthesis, auto mu, warnings)
};

struct CheckItem {
  std::string name;
  bool ok = true;
  bool warning_only = false;  // failure is reported but does not block a run
  std::string detail;
};

/// Everything the simulator needs to hold before it may step.
struct AssumptionReport {
  std::vector<CheckItem> items;
  std::optional<GraphConstants> constants;
  std::vector<std::optional<RegulatorSolution>> regulators;

  [[nodiscard]] bool ok() const;
  [[nodiscard]] const CheckItem* first_failure() const;
};

/// Runs the model, graph, mu, regulator and gain checks that apply to the
/// scenario's mode. With all_checks set every check runs regardless of mode
/// (output-injection gains are checked whenever present).
AssumptionReport check_scenario(const Scenario& s, bool all_checks = false);

/// Raised when a scenario violates a standing assumption and no override is set.
class AssumptionError : public std::runtime_error {
 public:
  AssumptionError(std::string check, const std::string& detail);
  [[nodiscard]] const std::string& check() const noexcept { return check_; }

 private:
  std::string check_;
};

struct AgentRecord {
  Vector x;
  Vector w;
  Vector eta;  // empty unless output feedback
  Vector u;    // empty on the final step and in observer-only mode
  Vector y;
  Vector e;    // y - y0
};

struct StepRecord {
  std::size_t k = 0;
  std::size_t sigma = 1;
  Vector x0;
  Vector y0;
  std::vector<AgentRecord> agents;
};

struct TraceSummary {
  double min_entry = 0.0;
  std::size_t positivity_violations = 0;
  std::optional<std::size_t> first_converged_step;
  double tail_error = 0.0;
  double threshold = 1e-3;
};

struct SimulationTrace {
  Mode mode = Mode::StateFeedback;
  std::vector<StepRecord> steps;  // horizon + 1 entries
  bool outside_hypotheses = false;
  TraceSummary summary;
};

/// Synchronous round engine. Per step: read sigma(k), compute every u_i from
/// time-k values, advance leader, plants, observers and compensators, record.
/// Throws AssumptionError before stepping if a blocking check fails and the
/// scenario does not set override_assumptions.
SimulationTrace run_scenario(const Scenario& s);

struct Violation {
  std::size_t step = 0;
  std::size_t agent = 0;  // 1-based follower index
  char quantity = 'x';    // 'x', 'w' or 'e' (eta bound)
  std::size_t component = 0;
  double value = 0.0;
};

inline constexpr double kPositivityTol = 1e-12;

struct PositivityReport {
  double min_entry = 0.0;             // over all x_i and w_i
  std::vector<Violation> violations;  // entries below -1e-12
  /// eta_i <= x_i + 1e-12 (equivalently x_i - eta_i >= -1e-12); output mode only.
  std::vector<Violation> eta_bound_violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
};

PositivityReport positivity_report(const SimulationTrace& t);

struct ConvergenceReport {
  bool converged = false;
  std::optional<std::size_t> first_step;
  double tail_error = 0.0;  // max over the last 10% of steps
};

/// Tracking error max_i ||e_i(k)||_inf per step, or the observer error
/// max_i ||x0(k) - w_i(k)||_inf in observer-only runs.
Vector tracking_error_series(const SimulationTrace& t);

ConvergenceReport convergence_report(const SimulationTrace& t, double threshold);

}  // namespace poscon
