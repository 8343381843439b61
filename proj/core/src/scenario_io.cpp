#include "poscon/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "poscon/regulator.hpp"

namespace poscon {

using nlohmann::json;

ParseError::ParseError(std::string where, const std::string& what)
    : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

namespace {

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

void reject_unknown_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(path + "." + key, "unknown key");
    }
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ParseError(path + "." + key, "missing required field");
  return obj.at(key);
}

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path, "number is not finite");
  return d;
}

std::size_t read_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ParseError(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

Vector read_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected a list of numbers");
  Vector out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Vector> read_vector_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected a list of vectors");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_vector(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix read_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ParseError(path, "expected a non-empty list of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].empty()) throw ParseError(rp, "expected a non-empty row of numbers");
    rows.push_back(read_vector(v[r], rp));
    if (rows.back().size() != rows.front().size()) throw ParseError(rp, "row length differs from row 0");
  }
  return Matrix::from_rows(rows);
}

Digraph read_graph(const json& v, const std::string& path, std::size_t n_followers) {
  reject_unknown_keys(v, path, {"edges", "undirected"});
  std::vector<Digraph::Edge> edges;
  auto read_pair = [&](const json& e, const std::string& ep) -> Digraph::Edge {
    if (!e.is_array() || (e.size() != 2 && e.size() != 3)) throw ParseError(ep, "expected [from, to]");
    if (e.size() == 3 && read_number(e[2], ep + "[2]") != 1.0) {
      throw ParseError(ep, "weighted edges are not supported; adjacency weights are 0 or 1");
    }
    return {read_count(e[0], ep + "[0]"), read_count(e[1], ep + "[1]")};
  };
  if (v.contains("edges")) {
    const auto& list = v.at("edges");
    if (!list.is_array()) throw ParseError(path + ".edges", "expected a list of [from, to] pairs");
    for (std::size_t i = 0; i < list.size(); ++i)
      edges.push_back(read_pair(list[i], path + ".edges[" + std::to_string(i) + "]"));
  }
  if (v.contains("undirected")) {
    const auto& list = v.at("undirected");
    if (!list.is_array()) throw ParseError(path + ".undirected", "expected a list of [a, b] pairs");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto [a, b] = read_pair(list[i], path + ".undirected[" + std::to_string(i) + "]");
      edges.emplace_back(a, b);
      edges.emplace_back(b, a);
    }
  }
  try {
    return {n_followers, std::move(edges)};
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, e.what());
  }
}

SwitchingSignal read_signal(const json& v, const std::string& path) {
  reject_unknown_keys(v, path, {"kind", "block", "order", "index", "sequence"});
  const json& kind = require(v, path, "kind");
  if (!kind.is_string()) throw ParseError(path + ".kind", "expected a string");
  const auto k = kind.get<std::string>();
  auto indices = [&](const char* key) {
    std::vector<std::size_t> out;
    const auto& list = v.at(key);
    if (!list.is_array()) throw ParseError(path + "." + key, "expected a list of graph indices");
    for (std::size_t i = 0; i < list.size(); ++i)
      out.push_back(read_count(list[i], path + "." + key + "[" + std::to_string(i) + "]"));
    return out;
  };
  if (k == "constant") {
    return ConstantSignal{v.contains("index") ? read_count(v.at("index"), path + ".index") : 1};
  }
  if (k == "periodic") {
    PeriodicBlockSignal sig;
    sig.block = read_count(require(v, path, "block"), path + ".block");
    if (v.contains("order")) sig.order = indices("order");
    return sig;
  }
  if (k == "list") {
    return ExplicitSignal{indices("sequence")};
  }
  throw ParseError(path + ".kind", "unknown schedule kind '" + k + "' (expected constant, periodic or list)");
}

InitialConfig read_initial(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "random-nonnegative") return RandomInitial{};
    throw ParseError(path, "expected \"random-nonnegative\" or an object");
  }
  reject_unknown_keys(v, path, {"kind", "seed", "range", "x0", "x", "w", "eta"});
  const json& kind = require(v, path, "kind");
  if (!kind.is_string()) throw ParseError(path + ".kind", "expected a string");
  if (kind == "random-nonnegative") {
    RandomInitial r;
    if (v.contains("seed")) {
      if (!v.at("seed").is_number_unsigned()) throw ParseError(path + ".seed", "expected a nonnegative integer");
      r.seed = v.at("seed").get<std::uint64_t>();
    }
    if (v.contains("range")) {
      const Vector range = read_vector(v.at("range"), path + ".range");
      if (range.size() != 2 || range[0] < 0.0 || range[1] < range[0]) {
        throw ParseError(path + ".range", "expected [low, high] with 0 <= low <= high");
      }
      r.low = range[0];
      r.high = range[1];
    }
    return r;
  }
  if (kind == "explicit") {
    ExplicitInitial e;
    e.x0 = read_vector(require(v, path, "x0"), path + ".x0");
    if (v.contains("x")) e.x = read_vector_list(v.at("x"), path + ".x");
    if (v.contains("w")) e.w = read_vector_list(v.at("w"), path + ".w");
    if (v.contains("eta")) e.eta = read_vector_list(v.at("eta"), path + ".eta");
    return e;
  }
  throw ParseError(path + ".kind", "unknown initial-condition kind (expected random-nonnegative or explicit)");
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

json to_json(const Matrix& m) { return m.to_rows(); }

json to_json(const SwitchingSignal& s) {
  return std::visit(
      [](const auto& sig) -> json {
        using T = std::decay_t<decltype(sig)>;
        if constexpr (std::is_same_v<T, ConstantSignal>) {
          return {{"kind", "constant"}, {"index", sig.index}};
        } else if constexpr (std::is_same_v<T, PeriodicBlockSignal>) {
          json j{{"kind", "periodic"}, {"block", sig.block}};
          if (!sig.order.empty()) j["order"] = sig.order;
          return j;
        } else {
          return {{"kind", "list"}, {"sequence", sig.sequence}};
        }
      },
      s);
}

json to_json(const InitialConfig& init) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RandomInitial>) {
          return {{"kind", "random-nonnegative"}, {"seed", v.seed}, {"range", {v.low, v.high}}};
        } else {
          json j{{"kind", "explicit"}, {"x0", v.x0}, {"x", v.x}};
          if (v.w) j["w"] = *v.w;
          if (v.eta) j["eta"] = *v.eta;
          return j;
        }
      },
      init);
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)), e.what());
  }

  const std::string root = "$";
  reject_unknown_keys(doc, root,
                      {"name", "leader", "agents", "graphs", "schedule", "mu", "mode", "horizon", "initial",
                       "override_assumptions"});

  const json& leader_j = require(doc, root, "leader");
  reject_unknown_keys(leader_j, "$.leader", {"A0", "C0"});
  LeaderModel leader{read_matrix(require(leader_j, "$.leader", "A0"), "$.leader.A0"),
                     read_matrix(require(leader_j, "$.leader", "C0"), "$.leader.C0")};
  if (!leader.A0.is_square()) throw ParseError("$.leader.A0", "must be square");
  if (leader.C0.cols() != leader.n()) throw ParseError("$.leader.C0", "column count must equal the size of A0");

  const json& agents_j = require(doc, root, "agents");
  if (!agents_j.is_array() || agents_j.empty()) throw ParseError("$.agents", "expected a non-empty list");
  std::vector<AgentConfig> agents;
  for (std::size_t i = 0; i < agents_j.size(); ++i) {
    const std::string p = "$.agents[" + std::to_string(i) + "]";
    const json& a = agents_j[i];
    reject_unknown_keys(a, p, {"A", "B", "C", "K1", "K2", "K3"});
    AgentConfig cfg{AgentModel{read_matrix(require(a, p, "A"), p + ".A"), read_matrix(require(a, p, "B"), p + ".B"),
                               read_matrix(require(a, p, "C"), p + ".C"), i + 1}};
    try {
      cfg.model.validate_shapes();
    } catch (const DimensionError& e) {
      throw ParseError(p, e.what());
    }
    if (cfg.model.l() != leader.l()) throw ParseError(p + ".C", "output dimension must match the leader's C0");
    auto gain = [&](const char* key, std::size_t rows, std::size_t cols) -> std::optional<Matrix> {
      if (!a.contains(key)) return std::nullopt;
      Matrix k = read_matrix(a.at(key), p + "." + key);
      if (k.rows() != rows || k.cols() != cols) {
        throw ParseError(p + "." + key, "expected shape " + std::to_string(rows) + "x" + std::to_string(cols));
      }
      return k;
    };
    cfg.K1 = gain("K1", cfg.model.m(), cfg.model.n());
    cfg.K2 = gain("K2", cfg.model.m(), leader.n());
    cfg.K3 = gain("K3", cfg.model.n(), cfg.model.l());
    agents.push_back(std::move(cfg));
  }

  const json& graphs_j = require(doc, root, "graphs");
  if (!graphs_j.is_array() || graphs_j.empty()) throw ParseError("$.graphs", "expected a non-empty list");
  std::vector<Digraph> family;
  for (std::size_t p = 0; p < graphs_j.size(); ++p)
    family.push_back(read_graph(graphs_j[p], "$.graphs[" + std::to_string(p) + "]", agents.size()));

  SwitchingSignal signal = ConstantSignal{1};
  if (doc.contains("schedule")) signal = read_signal(doc.at("schedule"), "$.schedule");
  std::optional<GraphSchedule> schedule;
  try {
    schedule.emplace(std::move(family), std::move(signal));
  } catch (const std::invalid_argument& e) {
    throw ParseError("$.schedule", e.what());
  }

  ScenarioConfig cfg{.name = "", .leader = std::move(leader), .agents = std::move(agents), .schedule = std::move(*schedule)};
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ParseError("$.name", "expected a string");
    cfg.name = doc.at("name").get<std::string>();
  }
  if (doc.contains("mu")) {
    const json& mu = doc.at("mu");
    if (mu.is_string()) {
      if (mu.get<std::string>() != "auto") throw ParseError("$.mu", "expected a number or \"auto\"");
      cfg.mu = std::nullopt;
    } else {
      cfg.mu = read_number(mu, "$.mu");
    }
  }
  if (doc.contains("mode")) {
    const json& mode = doc.at("mode");
    const auto parsed = mode.is_string() ? mode_from_string(mode.get<std::string>()) : std::nullopt;
    if (!parsed) throw ParseError("$.mode", "expected \"state\", \"output\" or \"observer\"");
    cfg.mode = *parsed;
  }
  if (doc.contains("horizon")) cfg.horizon = read_count(doc.at("horizon"), "$.horizon");
  if (doc.contains("initial")) cfg.initial = read_initial(doc.at("initial"), "$.initial");
  if (doc.contains("override_assumptions")) {
    if (!doc.at("override_assumptions").is_boolean()) throw ParseError("$.override_assumptions", "expected a boolean");
    cfg.override_assumptions = doc.at("override_assumptions").get<bool>();
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

std::string emit_scenario_config(const ScenarioConfig& config) {
  json doc;
  doc["name"] = config.name;
  doc["leader"] = {{"A0", to_json(config.leader.A0)}, {"C0", to_json(config.leader.C0)}};
  json agents = json::array();
  for (const auto& a : config.agents) {
    json j{{"A", to_json(a.model.A)}, {"B", to_json(a.model.B)}, {"C", to_json(a.model.C)}};
    if (a.K1) j["K1"] = to_json(*a.K1);
    if (a.K2) j["K2"] = to_json(*a.K2);
    if (a.K3) j["K3"] = to_json(*a.K3);
    agents.push_back(std::move(j));
  }
  doc["agents"] = std::move(agents);
  json graphs = json::array();
  for (const auto& g : config.schedule.family()) {
    json edges = json::array();
    for (const auto& [from, to] : g.edges()) edges.push_back({from, to});
    graphs.push_back({{"edges", std::move(edges)}});
  }
  doc["graphs"] = std::move(graphs);
  doc["schedule"] = to_json(config.schedule.signal());
  if (config.mu) {
    doc["mu"] = *config.mu;
  } else {
    doc["mu"] = "auto";
  }
  doc["mode"] = to_string(config.mode);
  doc["horizon"] = config.horizon;
  doc["initial"] = to_json(config.initial);
  doc["override_assumptions"] = config.override_assumptions;
  return doc.dump(2) + "\n";
}

Scenario resolve_scenario(const ScenarioConfig& config, const ResolveOptions& opts) {
  const bool override_flag = opts.override_assumptions || config.override_assumptions;
  const bool strict = opts.validate && !override_flag;

  Scenario s{.name = config.name, .leader = config.leader, .agents = {}, .schedule = config.schedule};
  s.mode = opts.mode.value_or(config.mode);
  s.horizon = opts.horizon.value_or(config.horizon);
  s.override_assumptions = override_flag;
  for (const auto& a : config.agents) s.agents.push_back(a.model);

  auto problem = [&](const std::string& msg) {
    if (strict) throw ValidationError(msg);
    s.notes.push_back(msg);
  };

  if (const auto lead = check_leader(s.leader); !lead.ok) problem("leader: " + lead.reason);

  // mu
  std::optional<GraphConstants> constants;
  try {
    constants = graph_constants(s.schedule);
  } catch (const GraphAssumptionError& e) {
    problem(e.what());
  }
  if (config.mu) {
    s.gains.mu = *config.mu;
  } else if (constants) {
    s.gains.mu = kAutoMuFraction * constants->mu_max;
    s.gains.mu_auto = true;
    std::ostringstream os;
    os.precision(12);
    os << "mu resolved to " << s.gains.mu << " (0.9 x mu_max " << constants->mu_max << ")";
    s.notes.push_back(os.str());
  } else {
    s.gains.mu_auto = true;
    s.gains.mu = 0.0;
  }
  if (constants && !validate_mu(s.gains.mu, *constants)) {
    std::ostringstream os;
    os.precision(12);
    os << "observer gain mu=" << s.gains.mu << " violates 0 < mu < min(1/Delta, 2/lambda_max) = " << constants->mu_max;
    problem(os.str());
  }

  // Gains
  const bool need_plants = s.mode != Mode::ObserverOnly;
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    const auto& cfg = config.agents[i];
    const auto& agent = cfg.model;
    const std::string tag = "agent " + std::to_string(agent.id);
    AgentGains g{Matrix(agent.m(), agent.n()), Matrix(agent.m(), config.leader.n())};

    const bool positive = check_positive_system(agent.A, agent.B, agent.C);
    if (!positive && need_plants) {
      problem(tag + ": not a positive system (A, B and C must be entrywise nonnegative)");
    }

    if (cfg.K1) {
      g.K1 = *cfg.K1;
      g.k1_origin = GainOrigin::User;
    } else if (positive) {
      const auto syn = synthesize_state_gain(agent.A, agent.B);
      g.k1_origin = GainOrigin::Synthesized;
      if (syn.feasible) {
        g.K1 = syn.gain;
        s.notes.push_back(tag + ": synthesized K1 (" + syn.report + ")");
      } else if (need_plants || opts.validate) {
        problem(tag + ": state-gain synthesis infeasible: " + syn.report);
      }
    }

    if (cfg.K2) {
      g.K2 = *cfg.K2;
      g.k2_origin = GainOrigin::User;
    } else if (agent.l() == config.leader.l()) {
      const auto reg = solve_regulator(agent, config.leader);
      g.k2_origin = GainOrigin::Derived;
      if (reg.accepted()) {
        const auto ff = compute_feedforward_gain(reg, g.K1);
        g.K2 = ff.K2;
        if (!ff.nonnegative) s.notes.push_back(tag + ": " + ff.warning);
      } else if (need_plants) {
        std::ostringstream os;
        os << tag << ": regulator equations have no nonnegative solution (residual " << reg.residual << ")";
        problem(os.str());
      }
    }

    if (cfg.K3) {
      g.K3 = *cfg.K3;
      g.k3_origin = GainOrigin::User;
    } else if ((s.mode == Mode::OutputFeedback || opts.fill_observer_gains) && positive) {
      const auto syn = synthesize_observer_gain(agent.A, agent.C);
      g.k3_origin = GainOrigin::Synthesized;
      if (syn.feasible) {
        g.K3 = syn.gain;
        s.notes.push_back(tag + ": synthesized K3 (" + syn.report + ")");
      } else {
        problem(tag + ": output-injection gain synthesis infeasible: " + syn.report);
      }
    }
    s.gains.agents.push_back(std::move(g));
  }

  // Initial conditions
  std::visit(
      [&](const auto& init) {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, RandomInitial>) {
          std::mt19937_64 rng(opts.seed.value_or(init.seed));
          std::uniform_real_distribution<double> dist(init.low, init.high);
          s.initial.x0.resize(s.leader.n());
          for (double& v : s.initial.x0) v = dist(rng);
          for (const auto& a : s.agents) {
            Vector x(a.n());
            for (double& v : x) v = dist(rng);
            s.initial.x.push_back(std::move(x));
          }
        } else {
          s.initial.x0 = init.x0;
          s.initial.x = init.x;
          s.initial.w = init.w;
          s.initial.eta = init.eta;
          if (s.initial.x.empty() && s.mode != Mode::ObserverOnly) {
            throw ParseError("$.initial.x", "explicit initial conditions must list x for every agent");
          }
        }
      },
      config.initial);

  if (strict) {
    const auto report = check_scenario(s);
    if (const CheckItem* bad = report.first_failure()) throw ValidationError(bad->name + ": " + bad->detail);
  }
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path, const ResolveOptions& opts) {
  return resolve_scenario(load_scenario_config(path), opts);
}

ScenarioConfig with_resolved_gains(const ScenarioConfig& config, const Scenario& resolved) {
  ScenarioConfig out = config;
  for (std::size_t i = 0; i < out.agents.size() && i < resolved.gains.agents.size(); ++i) {
    const auto& g = resolved.gains.agents[i];
    out.agents[i].K1 = g.K1;
    out.agents[i].K2 = g.K2;
    if (g.K3) out.agents[i].K3 = *g.K3;
  }
  if (!out.mu) out.mu = resolved.gains.mu;
  return out;
}

}  // namespace poscon
