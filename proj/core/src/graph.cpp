#include "poscon/graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <sstream>

namespace poscon {

Digraph::Digraph(std::size_t n_followers, std::vector<Edge> edges)
    : n_(n_followers), edges_(std::move(edges)), adj_(n_followers + 1, std::vector<double>(n_followers + 1, 0.0)) {
  if (n_ == 0) throw std::invalid_argument("Digraph: at least one follower required");
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (const auto& [from, to] : edges_) {
    if (from > n_ || to > n_) {
      throw std::invalid_argument("Digraph: edge (" + std::to_string(from) + "," + std::to_string(to) +
                                  ") references a node outside 0.." + std::to_string(n_));
    }
    if (from == to) throw std::invalid_argument("Digraph: self-loop at node " + std::to_string(from));
    if (to == 0) throw std::invalid_argument("Digraph: the leader (node 0) cannot receive edges");
    adj_[to][from] = 1.0;
  }
}

Digraph Digraph::from_links(std::size_t n_followers, const std::vector<std::size_t>& pinned,
                            const std::vector<std::pair<std::size_t, std::size_t>>& undirected) {
  std::vector<Edge> edges;
  for (std::size_t i : pinned) edges.emplace_back(0, i);
  for (const auto& [a, b] : undirected) {
    edges.emplace_back(a, b);
    edges.emplace_back(b, a);
  }
  return {n_followers, std::move(edges)};
}

double Digraph::weight(std::size_t i, std::size_t j) const { return adj_.at(i).at(j); }

Matrix laplacian(const Digraph& g) {
  const std::size_t n = g.n_nodes();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = g.weight(i, j);
      l(i, j) = -a;
      l(i, i) += a;
    }
  }
  return l;
}

Matrix follower_submatrix(const Digraph& g) {
  const Matrix l = laplacian(g);
  const std::size_t n = g.n_followers();
  Matrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = l(i + 1, j + 1);
  return h;
}

Matrix leader_pinning(const Digraph& g) {
  const std::size_t n = g.n_followers();
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) p(i, i) = g.weight(i + 1, 0);
  return p;
}

GraphDiagnosis check_assumption_graph(const Digraph& g) {
  const std::size_t n = g.n_nodes();

  // Reachability from the leader along directed edges.
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  seen[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v = 1; v < n; ++v) {
      if (!seen[v] && g.weight(v, u) != 0.0) {
        seen[v] = true;
        frontier.push(v);
      }
    }
  }

  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (g.weight(i, j) != g.weight(j, i)) {
        std::ostringstream os;
        os << "follower subgraph not undirected: edge between " << i << " and " << j << " is one-way";
        return {false, os.str()};
      }
    }
  }

  // Connectivity of the follower subgraph (symmetric by now).
  std::vector<bool> comp(n, false);
  comp[1] = true;
  frontier.push(1);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v = 1; v < n; ++v) {
      if (!comp[v] && g.weight(v, u) != 0.0) {
        comp[v] = true;
        frontier.push(v);
      }
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!comp[i]) {
      return {false, "follower subgraph disconnected: node " + std::to_string(i) +
                         " is not connected to node 1"};
    }
  }

  for (std::size_t i = 1; i < n; ++i) {
    if (!seen[i]) {
      return {false, "no spanning tree rooted at the leader: node " + std::to_string(i) +
                         " is unreachable from node 0"};
    }
  }
  return {};
}

GraphSchedule::GraphSchedule(std::vector<Digraph> family, SwitchingSignal signal)
    : family_(std::move(family)), signal_(std::move(signal)) {
  if (family_.empty()) throw std::invalid_argument("GraphSchedule: empty graph family");
  const std::size_t n = family_.front().n_followers();
  for (const auto& g : family_) {
    if (g.n_followers() != n) {
      throw std::invalid_argument("GraphSchedule: graphs disagree on the number of followers");
    }
  }
  const std::size_t p = family_.size();
  auto check_index = [p](std::size_t idx) {
    if (idx < 1 || idx > p) {
      throw std::invalid_argument("GraphSchedule: graph index " + std::to_string(idx) +
                                  " outside 1.." + std::to_string(p));
    }
  };
  std::visit(
      [&](const auto& sig) {
        using T = std::decay_t<decltype(sig)>;
        if constexpr (std::is_same_v<T, ConstantSignal>) {
          check_index(sig.index);
        } else if constexpr (std::is_same_v<T, PeriodicBlockSignal>) {
          if (sig.block == 0) throw std::invalid_argument("GraphSchedule: block length must be >= 1");
          for (std::size_t idx : sig.order) check_index(idx);
        } else {
          if (sig.sequence.empty()) throw std::invalid_argument("GraphSchedule: explicit sequence is empty");
          for (std::size_t idx : sig.sequence) check_index(idx);
        }
      },
      signal_);
}

std::size_t GraphSchedule::index_at(std::size_t k) const {
  return std::visit(
      [&](const auto& sig) -> std::size_t {
        using T = std::decay_t<decltype(sig)>;
        if constexpr (std::is_same_v<T, ConstantSignal>) {
          return sig.index;
        } else if constexpr (std::is_same_v<T, PeriodicBlockSignal>) {
          const std::size_t slot = k / sig.block;
          if (sig.order.empty()) return slot % family_.size() + 1;
          return sig.order[slot % sig.order.size()];
        } else {
          return sig.sequence[std::min(k, sig.sequence.size() - 1)];
        }
      },
      signal_);
}

std::size_t switching_index(const GraphSchedule& s, std::size_t k) { return s.index_at(k); }

GraphAssumptionError::GraphAssumptionError(std::size_t graph_index, const std::string& reason)
    : std::runtime_error("graph " + std::to_string(graph_index) + " fails the graph assumption: " + reason),
      index_(graph_index) {}

GraphConstants graph_constants(const GraphSchedule& s) {
  GraphConstants c;
  c.lambda_min = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < s.family().size(); ++p) {
    const Digraph& g = s.family()[p];
    if (const auto diag = check_assumption_graph(g); !diag.ok) {
      throw GraphAssumptionError(p + 1, diag.reason);
    }
    const Matrix l = laplacian(g);
    for (std::size_t i = 0; i < l.rows(); ++i) c.delta = std::max(c.delta, l(i, i));
    const Vector ev = symmetric_eigenvalues(follower_submatrix(g));
    c.lambda_min = std::min(c.lambda_min, ev.front());
    c.lambda_max = std::max(c.lambda_max, ev.back());
  }
  c.mu_max = std::min(1.0 / c.delta, 2.0 / c.lambda_max);
  return c;
}

bool validate_mu(double mu, const GraphConstants& c) { return mu > 0.0 && mu < c.mu_max; }

}  // namespace poscon
