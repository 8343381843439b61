#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "poscon/scenario_io.hpp"
#include "support.hpp"

using namespace poscon;
using poscon::testing::Rng;
using poscon::testing::uniform;
using poscon::testing::uniform_int;

namespace {

std::string example_text() { return std::string(bundled_example_scenario()); }

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos == std::string::npos) throw std::logic_error("pattern not found: " + from);
  return text.replace(pos, from.size(), to);
}

template <class E>
std::string error_of(const std::string& text, const ResolveOptions& opts = {}) {
  try {
    resolve_scenario(parse_scenario_config(text), opts);
  } catch (const E& e) {
    return e.what();
  }
  return "";
}

ScenarioConfig random_config(Rng& rng) {
  const std::size_t n = uniform_int(rng, 1, 4);
  const std::size_t n0 = uniform_int(rng, 1, 3);
  const std::size_t l = uniform_int(rng, 1, 2);
  ScenarioConfig c{.name = "random " + std::to_string(uniform_int(rng, 0, 999)),
                   .leader = {poscon::testing::random_matrix(rng, n0, n0, 0, 1),
                              poscon::testing::random_matrix(rng, l, n0, 0, 1)},
                   .agents = {},
                   .schedule = GraphSchedule({Digraph(1, {{0, 1}})}, ConstantSignal{1})};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ni = uniform_int(rng, 1, 3);
    const std::size_t mi = uniform_int(rng, 1, 2);
    AgentConfig a{{poscon::testing::random_matrix(rng, ni, ni, 0, 1), poscon::testing::random_matrix(rng, ni, mi, 0, 1),
                   poscon::testing::random_matrix(rng, l, ni, 0, 1), i + 1}};
    if (uniform(rng, 0, 1) < 0.5) a.K1 = poscon::testing::random_matrix(rng, mi, ni, -1, 0);
    if (uniform(rng, 0, 1) < 0.5) a.K2 = poscon::testing::random_matrix(rng, mi, n0, 0, 1);
    if (uniform(rng, 0, 1) < 0.5) a.K3 = poscon::testing::random_matrix(rng, ni, l, 0, 1);
    c.agents.push_back(std::move(a));
  }
  const std::size_t p = uniform_int(rng, 1, 3);
  SwitchingSignal sig = ConstantSignal{uniform_int(rng, 1, p)};
  switch (uniform_int(rng, 0, 2)) {
    case 0:
      break;
    case 1:
      sig = PeriodicBlockSignal{uniform_int(rng, 1, 30), {}};
      break;
    default: {
      std::vector<std::size_t> seq(uniform_int(rng, 1, 5));
      for (auto& s : seq) s = uniform_int(rng, 1, p);
      sig = ExplicitSignal{seq};
    }
  }
  c.schedule = GraphSchedule(poscon::testing::random_admissible_family(rng, n, p), sig);
  if (uniform(rng, 0, 1) < 0.7) c.mu = uniform(rng, 0.01, 0.4);
  c.mode = static_cast<Mode>(uniform_int(rng, 0, 2));
  c.horizon = uniform_int(rng, 0, 1000);
  if (uniform(rng, 0, 1) < 0.5) {
    c.initial = RandomInitial{uniform_int(rng, 0, 1u << 20), uniform(rng, 0, 1), uniform(rng, 2, 10)};
  } else {
    ExplicitInitial e{poscon::testing::random_vector(rng, n0, 0, 5), {}};
    for (const auto& a : c.agents) e.x.push_back(poscon::testing::random_vector(rng, a.model.n(), 0, 5));
    if (uniform(rng, 0, 1) < 0.3) e.w = std::vector<Vector>(n, Vector(n0, 0.0));
    c.initial = e;
  }
  c.override_assumptions = uniform(rng, 0, 1) < 0.2;
  return c;
}

}  // namespace

TEST(ScenarioFile, BundledExampleContents) {
  const auto c = poscon::testing::example_config();
  EXPECT_EQ(c.leader, poscon::testing::ramp_leader());
  ASSERT_EQ(c.agents.size(), 3u);
  for (std::size_t i = 1; i <= 3; ++i) {
    EXPECT_EQ(c.agents[i - 1].model, poscon::testing::follower(i));
    EXPECT_EQ(c.agents[i - 1].K1, poscon::testing::example_K1(i));
    EXPECT_EQ(c.agents[i - 1].K3, poscon::testing::example_K3(i));
    EXPECT_FALSE(c.agents[i - 1].K2);
  }
  EXPECT_EQ(c.schedule, poscon::testing::example_schedule());
  EXPECT_EQ(c.mu, 0.3);
  EXPECT_EQ(c.horizon, 500u);
  EXPECT_EQ(std::get<RandomInitial>(c.initial), (RandomInitial{1, 0.0, 10.0}));
}

TEST(ScenarioFile, BundledMatchesFileOnDisk) {
  std::ifstream f(std::string(POSCON_SCENARIO_DIR) + "/paper_example.json");
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(parse_scenario_config(ss.str()), poscon::testing::example_config());
}

TEST(ScenarioFile, ResolveDerivesFeedforward) {
  const auto s = poscon::testing::example_scenario(Mode::StateFeedback);
  ASSERT_EQ(s.gains.agents.size(), 3u);
  EXPECT_NEAR(s.gains.agents[0].K2(0, 0), 0.25, 1e-9);
  EXPECT_NEAR(s.gains.agents[0].K2(0, 1), 0.5, 1e-9);
  EXPECT_EQ(s.gains.agents[0].k2_origin, GainOrigin::Derived);
  EXPECT_EQ(s.gains.agents[0].k1_origin, GainOrigin::User);
  EXPECT_EQ(s.gains.mu, 0.3);
}

TEST(ScenarioFile, SeededInitialConditions) {
  const auto a = poscon::testing::example_scenario(Mode::StateFeedback, 9);
  const auto b = poscon::testing::example_scenario(Mode::StateFeedback, 9);
  const auto c = poscon::testing::example_scenario(Mode::StateFeedback, 10);
  EXPECT_EQ(a.initial.x0, b.initial.x0);
  EXPECT_EQ(a.initial.x, b.initial.x);
  EXPECT_NE(a.initial.x0, c.initial.x0);
  for (double v : a.initial.x0) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 10.0);
  }
}

TEST(ScenarioFile, AutoMu) {
  const auto text = replace(example_text(), "\"mu\": 0.3", "\"mu\": \"auto\"");
  const auto s = resolve_scenario(parse_scenario_config(text));
  EXPECT_TRUE(s.gains.mu_auto);
  EXPECT_NEAR(s.gains.mu, 0.9 / 3.0, 1e-12);
}

TEST(ScenarioFile, MissingGainsSynthesized) {
  std::ifstream f(std::string(POSCON_SCENARIO_DIR) + "/paper_example_nogains.json");
  std::stringstream ss;
  ss << f.rdbuf();
  ResolveOptions opts;
  opts.mode = Mode::OutputFeedback;
  const auto s = resolve_scenario(parse_scenario_config(ss.str()), opts);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& g = s.gains.agents[i];
    EXPECT_EQ(g.k1_origin, GainOrigin::Synthesized);
    EXPECT_EQ(g.k3_origin, GainOrigin::Synthesized);
    EXPECT_TRUE(verify_state_gain(s.agents[i].A, s.agents[i].B, g.K1).ok);
    EXPECT_TRUE(verify_observer_gain(s.agents[i].A, s.agents[i].C, *g.K3).ok);
  }
}

TEST(ScenarioFile, NegativeInputMatrixRejected) {
  const auto text = replace(example_text(), "\"B\": [[1.0], [1.0]]", "\"B\": [[1.0], [-1.0]]");
  const auto msg = error_of<ValidationError>(text);
  EXPECT_NE(msg.find("agent 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("positive"), std::string::npos) << msg;
}

TEST(ScenarioFile, MuAboveBoundRejected) {
  const auto text = replace(example_text(), "\"mu\": 0.3", "\"mu\": 0.4");
  const auto msg = error_of<ValidationError>(text);
  EXPECT_NE(msg.find("mu=0.4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("0.3333"), std::string::npos) << msg;
}

TEST(ScenarioFile, OverrideDowngradesToNotes) {
  const auto text = replace(example_text(), "\"mu\": 0.3", "\"mu\": 0.4");
  ResolveOptions opts;
  opts.override_assumptions = true;
  const auto s = resolve_scenario(parse_scenario_config(text), opts);
  EXPECT_TRUE(s.override_assumptions);
  EXPECT_FALSE(s.notes.empty());
}

TEST(ScenarioFile, ParseErrorsCarryLocation) {
  try {
    parse_scenario_config("{\n\"name\": \"x\",\n\"leader\": [1,,2]\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.where(), "line 3");
  }
  try {
    parse_scenario_config(replace(example_text(), "\"horizon\": 500", "\"horizon\": 500, \"colour\": 1"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.where(), "$.colour");
  }
  try {
    parse_scenario_config(replace(example_text(), "\"C\": [[4.0, 0.0]]", "\"C\": [[4.0, 0.0, 1.0]]"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.where().find("$.agents[2]"), std::string::npos) << e.where();
  }
  try {
    parse_scenario_config(replace(example_text(), "[0, 2]", "[0, 2, 0.5]"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.where().find("$.graphs[0].edges[0]"), std::string::npos) << e.where();
  }
}

TEST(ScenarioFile, RoundTripExample) {
  const auto c = poscon::testing::example_config();
  EXPECT_EQ(parse_scenario_config(emit_scenario_config(c)), c);
}

TEST(ScenarioFile, RoundTripRandomConfigs) {
  Rng rng(81);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_config(rng);
    const auto text = emit_scenario_config(c);
    EXPECT_EQ(parse_scenario_config(text), c) << text;
  }
}
