#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "poscon/linalg.hpp"

namespace poscon {

/// Leader-rooted communication digraph over nodes {0..N}; node 0 is the leader.
///
/// An edge (j, i) means information flows from j to i, i.e. a_ij = 1. Edge
/// weights are implicitly 1. Construction rejects self-loops, edges into the
/// leader and out-of-range nodes.
class Digraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;  // (from, to)

  Digraph(std::size_t n_followers, std::vector<Edge> edges);

  /// Adds both (a, b) and (b, a) for each listed follower pair, plus one-way
  /// leader links 0 -> i.
  static Digraph from_links(std::size_t n_followers,
                            const std::vector<std::size_t>& pinned,
                            const std::vector<std::pair<std::size_t, std::size_t>>& undirected);

  [[nodiscard]] std::size_t n_followers() const noexcept { return n_; }
  [[nodiscard]] std::size_t n_nodes() const noexcept { return n_ + 1; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// a_ij: 1 if j sends to i.
  [[nodiscard]] double weight(std::size_t i, std::size_t j) const;

  friend bool operator==(const Digraph&, const Digraph&) = default;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;  // sorted, unique
  std::vector<std::vector<double>> adj_;
};

/// (N+1)x(N+1) Laplacian: l_ii = sum_j a_ij, l_ij = -a_ij.
Matrix laplacian(const Digraph& g);

/// H_p: the Laplacian with the leader row and column removed (N x N).
Matrix follower_submatrix(const Digraph& g);

/// diag(a_10, ..., a_N0): which followers hear the leader directly.
Matrix leader_pinning(const Digraph& g);

struct GraphDiagnosis {
  bool ok = true;
  std::string reason;  // empty when ok
};

/// Leader-rooted spanning tree and undirected, connected follower subgraph.
GraphDiagnosis check_assumption_graph(const Digraph& g);

// Switching rules for sigma(k). Indices are 1-based into the family.
struct ConstantSignal {
  std::size_t index = 1;
  friend bool operator==(const ConstantSignal&, const ConstantSignal&) = default;
};
struct PeriodicBlockSignal {
  std::size_t block = 1;
  std::vector<std::size_t> order;  // empty means 1..p
  friend bool operator==(const PeriodicBlockSignal&, const PeriodicBlockSignal&) = default;
};
struct ExplicitSignal {
  std::vector<std::size_t> sequence;  // last entry held forever
  friend bool operator==(const ExplicitSignal&, const ExplicitSignal&) = default;
};
using SwitchingSignal = std::variant<ConstantSignal, PeriodicBlockSignal, ExplicitSignal>;

class GraphSchedule {
 public:
  GraphSchedule(std::vector<Digraph> family, SwitchingSignal signal);

  [[nodiscard]] const std::vector<Digraph>& family() const noexcept { return family_; }
  [[nodiscard]] const SwitchingSignal& signal() const noexcept { return signal_; }
  [[nodiscard]] std::size_t n_followers() const noexcept { return family_.front().n_followers(); }

  /// sigma(k) in {1..p}.
  [[nodiscard]] std::size_t index_at(std::size_t k) const;
  [[nodiscard]] const Digraph& graph_at(std::size_t k) const { return family_[index_at(k) - 1]; }

  friend bool operator==(const GraphSchedule&, const GraphSchedule&) = default;

 private:
  std::vector<Digraph> family_;
  SwitchingSignal signal_;
};

/// sigma(k) for the schedule's rule; periodic blocks give (floor(k/b) mod p) + 1.
std::size_t switching_index(const GraphSchedule& s, std::size_t k);

struct GraphConstants {
  double delta = 0.0;       // max in-degree over the family
  double lambda_max = 0.0;  // max eigenvalue of any H_p
  double lambda_min = 0.0;  // min eigenvalue of any H_p
  double mu_max = 0.0;      // min(1/delta, 2/lambda_max)
};

/// Thrown by graph_constants when a family member fails the graph assumption.
class GraphAssumptionError : public std::runtime_error {
 public:
  GraphAssumptionError(std::size_t graph_index, const std::string& reason);
  [[nodiscard]] std::size_t graph_index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

GraphConstants graph_constants(const GraphSchedule& s);

/// 0 < mu < mu_max, strict on both sides.
bool validate_mu(double mu, const GraphConstants& c);

}  // namespace poscon
