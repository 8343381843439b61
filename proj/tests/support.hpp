#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "poscon/graph.hpp"
#include "poscon/linalg.hpp"
#include "poscon/scenario_io.hpp"
#include "poscon/sim.hpp"
#include "poscon/systems.hpp"

namespace poscon::testing {

// Example data: ramp leader, three followers, two switching graphs.

inline LeaderModel ramp_leader() { return {Matrix{{1.0, 0.5}, {0.0, 1.0}}, Matrix{{1.0, 1.0}}}; }

inline AgentModel follower(std::size_t i) {
  switch (i) {
    case 1:
      return {Matrix{{1.0, 0.0}, {1.0, 0.0}}, Matrix{{1.0}, {0.0}}, Matrix{{2.0, 0.0}}, 1};
    case 2:
      return {Matrix{{1.0, 0.0}, {0.3, 0.7}}, Matrix{{1.0}, {1.0}}, Matrix{{2.0, 0.0}}, 2};
    default:
      return {Matrix{{1.0, 0.0}, {0.5, 0.8}}, Matrix{{1.0}, {2.5}}, Matrix{{4.0, 0.0}}, 3};
  }
}

inline Matrix example_K1(std::size_t i) {
  const double v[] = {-0.5, -0.3, -0.2};
  return Matrix{{v[i - 1], 0.0}};
}

inline Matrix example_K3(std::size_t i) {
  const double v[][2] = {{0.3, 0.3}, {0.5, 0.1}, {0.1, 0.1}};
  return Matrix{{v[i - 1][0]}, {v[i - 1][1]}};
}

inline Digraph graph_one() { return Digraph::from_links(3, {2}, {{1, 2}, {2, 3}}); }
inline Digraph graph_two() { return Digraph::from_links(3, {3}, {{1, 2}, {2, 3}, {1, 3}}); }

inline GraphSchedule example_schedule(std::size_t block = 20) {
  return GraphSchedule({graph_one(), graph_two()}, PeriodicBlockSignal{block, {}});
}

inline ScenarioConfig example_config() { return parse_scenario_config(bundled_example_scenario()); }

inline Scenario example_scenario(Mode mode, std::uint64_t seed = 1, std::size_t horizon = 500) {
  ResolveOptions opts;
  opts.mode = mode;
  opts.seed = seed;
  opts.horizon = horizon;
  return resolve_scenario(example_config(), opts);
}

// Generators.

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (double& v : m.data()) v = uniform(rng, lo, hi);
  return m;
}

/// Nonnegative matrix with roughly `density` of its entries nonzero.
inline Matrix random_sparse_nonneg(Rng& rng, std::size_t r, std::size_t c, double density, double hi = 1.0) {
  Matrix m(r, c);
  for (double& v : m.data()) v = uniform(rng, 0.0, 1.0) < density ? uniform(rng, 0.0, hi) : 0.0;
  return m;
}

inline Vector random_vector(Rng& rng, std::size_t n, double lo, double hi) {
  Vector v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

/// Random graph passing the graph assumption: a random spanning tree over the
/// followers, a few extra undirected edges, and a nonempty pinned set.
inline Digraph random_admissible_graph(Rng& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t i = 1; i < n; ++i) links.emplace_back(order[i], order[uniform_int(rng, 0, i - 1)]);
  for (std::size_t a = 1; a <= n; ++a)
    for (std::size_t b = a + 1; b <= n; ++b)
      if (uniform(rng, 0.0, 1.0) < 0.3) links.emplace_back(a, b);
  std::vector<std::size_t> pinned;
  for (std::size_t i = 1; i <= n; ++i)
    if (uniform(rng, 0.0, 1.0) < 0.3) pinned.push_back(i);
  if (pinned.empty()) pinned.push_back(uniform_int(rng, 1, n));
  return Digraph::from_links(n, pinned, links);
}

inline std::vector<Digraph> random_admissible_family(Rng& rng, std::size_t n, std::size_t p) {
  std::vector<Digraph> family;
  for (std::size_t i = 0; i < p; ++i) family.push_back(random_admissible_graph(rng, n));
  return family;
}

/// Nonnegative leader matrix with spectral radius exactly 1 (scaled) or a
/// Jordan-like upper-triangular block with unit diagonal.
inline Matrix random_leader_matrix(Rng& rng, std::size_t n0) {
  if (uniform(rng, 0.0, 1.0) < 0.5) {
    Matrix a(n0, n0);
    for (std::size_t r = 0; r < n0; ++r) {
      a(r, r) = 1.0;
      for (std::size_t c = r + 1; c < n0; ++c) a(r, c) = uniform(rng, 0.0, 1.0) < 0.5 ? uniform(rng, 0.0, 1.0) : 0.0;
    }
    return a;
  }
  Matrix a = random_matrix(rng, n0, n0, 0.05, 1.0);
  return a * (1.0 / spectral_radius(a));
}

/// A positively stabilizable pair (A, B) built from a known answer: draw a
/// nonnegative Schur closed loop M and a nonpositive K, then set A = M - B K.
struct StabilizableInstance {
  Matrix A;
  Matrix B;
  Matrix K;
};

inline StabilizableInstance random_stabilizable(Rng& rng) {
  const std::size_t n = uniform_int(rng, 1, 4);
  const std::size_t m = uniform_int(rng, 1, 3);
  Matrix M = random_sparse_nonneg(rng, n, n, 0.7);
  const double rho = spectral_radius(M);
  const double target = uniform(rng, 0.2, 0.9);
  if (rho > 1e-12) M = M * (target / rho);
  const Matrix B = random_sparse_nonneg(rng, n, m, 0.7, 2.0);
  const Matrix K = -random_sparse_nonneg(rng, m, n, 0.7, 1.0);
  return {M - B * K, B, K};
}

inline Scenario random_observer_scenario(Rng& rng, std::size_t horizon) {
  const std::size_t n = uniform_int(rng, 1, 5);
  const std::size_t n0 = uniform_int(rng, 1, 3);
  const std::size_t p = uniform_int(rng, 1, 3);
  GraphSchedule schedule(random_admissible_family(rng, n, p),
                         PeriodicBlockSignal{uniform_int(rng, 1, 10), {}});
  const GraphConstants c = graph_constants(schedule);

  Scenario s{.name = "random", .leader = {random_leader_matrix(rng, n0), Matrix(1, n0, 1.0)}, .agents = {},
             .schedule = std::move(schedule)};
  s.mode = Mode::ObserverOnly;
  s.horizon = horizon;
  s.gains.mu = uniform(rng, 0.05, 0.95) * c.mu_max;
  for (std::size_t i = 0; i < n; ++i) {
    s.agents.push_back({Matrix(1, 1, 0.5), Matrix(1, 1, 1.0), Matrix(1, 1, 1.0), i + 1});
    s.gains.agents.push_back({Matrix(1, 1), Matrix(1, n0)});
    s.initial.x.push_back(Vector{0.0});
  }
  s.initial.x0 = random_vector(rng, n0, 0.0, 10.0);
  return s;
}

}  // namespace poscon::testing
