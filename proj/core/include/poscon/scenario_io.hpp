#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "poscon/graph.hpp"
#include "poscon/sim.hpp"
#include "poscon/systems.hpp"

namespace poscon {

/// Malformed scenario document. `where` is "line N" for syntax errors or the
/// JSON path of the offending field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, const std::string& what);
  [[nodiscard]] const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Well-formed scenario that violates a model, graph or gain requirement.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AgentConfig {
  AgentModel model;
  std::optional<Matrix> K1;
  std::optional<Matrix> K2;
  std::optional<Matrix> K3;

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

struct RandomInitial {
  std::uint64_t seed = 1;
  double low = 0.0;
  double high = 10.0;

  friend bool operator==(const RandomInitial&, const RandomInitial&) = default;
};

struct ExplicitInitial {
  Vector x0;
  std::vector<Vector> x;
  std::optional<std::vector<Vector>> w;
  std::optional<std::vector<Vector>> eta;

  friend bool operator==(const ExplicitInitial&, const ExplicitInitial&) = default;
};

using InitialConfig = std::variant<RandomInitial, ExplicitInitial>;

/// In-memory form of a scenario file, before gains are synthesized and
/// random initial conditions drawn.
struct ScenarioConfig {
  std::string name;
  LeaderModel leader;
  std::vector<AgentConfig> agents;
  GraphSchedule schedule;
  std::optional<double> mu;  // nullopt means "auto"
  Mode mode = Mode::StateFeedback;
  std::size_t horizon = 500;
  InitialConfig initial = RandomInitial{};
  bool override_assumptions = false;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Fraction of mu_max used when the file says "mu": "auto".
inline constexpr double kAutoMuFraction = 0.9;

ScenarioConfig parse_scenario_config(std::string_view text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Canonical JSON text; parse_scenario_config(emit_scenario_config(c)) == c.
std::string emit_scenario_config(const ScenarioConfig& config);

struct ResolveOptions {
  std::optional<Mode> mode;
  std::optional<std::size_t> horizon;
  std::optional<std::uint64_t> seed;
  bool override_assumptions = false;
  /// When false, blocking problems are recorded in Scenario::notes instead of
  /// raising ValidationError (used by the check command to report everything).
  bool validate = true;
  /// Synthesize K3 even when the mode does not need it.
  bool fill_observer_gains = false;
};

/// Builds a runnable Scenario: resolves "auto" mu, synthesizes missing K1/K3,
/// derives missing K2 = U - K1 X from the regulator solution, and draws
/// seeded random initial conditions.
Scenario resolve_scenario(const ScenarioConfig& config, const ResolveOptions& opts = {});

/// load_scenario_config + resolve_scenario with validation.
Scenario parse_scenario(const std::filesystem::path& path, const ResolveOptions& opts = {});

/// Copy of config with every gain filled in from a resolved scenario.
ScenarioConfig with_resolved_gains(const ScenarioConfig& config, const Scenario& resolved);

/// The bundled reproduction scenario (three positive followers, ramp leader,
/// two switching graphs), as JSON text.
std::string_view bundled_example_scenario();

}  // namespace poscon
