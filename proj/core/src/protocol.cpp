#include "poscon/protocol.hpp"

namespace poscon {

Vector observer_step(std::span<const double> w_i, std::span<const WeightedEstimate> neighbors,
                     std::optional<WeightedEstimate> leader, double mu, const Matrix& A0) {
  const std::size_t n0 = A0.rows();
  if (w_i.size() != n0) throw DimensionError("observer_step: estimate length does not match A0");

  Vector diffusion(n0, 0.0);
  auto accumulate = [&](const WeightedEstimate& nb) {
    if (nb.w.size() != n0) throw DimensionError("observer_step: neighbor estimate length does not match A0");
    for (std::size_t c = 0; c < n0; ++c) diffusion[c] += nb.weight * (nb.w[c] - w_i[c]);
  };
  for (const auto& nb : neighbors) accumulate(nb);
  if (leader) accumulate(*leader);

  Vector pre(n0);
  for (std::size_t c = 0; c < n0; ++c) pre[c] = w_i[c] + mu * diffusion[c];
  return A0 * pre;
}

Matrix compact_observer_matrix(const Matrix& H, double mu, const Matrix& A0) {
  if (!H.is_square()) throw DimensionError("compact_observer_matrix: H must be square");
  return kron(Matrix::identity(H.rows()) - mu * H, A0);
}

Vector compact_observer_input(const Matrix& pinning, double mu, const Matrix& A0, std::span<const double> w0) {
  const std::size_t n = pinning.rows();
  Vector stacked;
  stacked.reserve(n * w0.size());
  for (std::size_t i = 0; i < n; ++i) stacked.insert(stacked.end(), w0.begin(), w0.end());
  return kron(mu * pinning, A0) * stacked;
}

Vector observer_round(const Digraph& g, std::span<const double> w, std::span<const double> x0, double mu,
                      const Matrix& A0) {
  const std::size_t n0 = A0.rows();
  const std::size_t n = g.n_followers();
  if (w.size() != n * n0) throw DimensionError("observer_round: stacked estimate has wrong length");

  Vector next;
  next.reserve(w.size());
  std::vector<WeightedEstimate> neighbors;
  for (std::size_t i = 1; i <= n; ++i) {
    neighbors.clear();
    for (std::size_t j = 1; j <= n; ++j) {
      if (j != i && g.weight(i, j) != 0.0) neighbors.push_back({w.subspan((j - 1) * n0, n0), g.weight(i, j)});
    }
    std::optional<WeightedEstimate> leader;
    if (g.weight(i, 0) != 0.0) leader = WeightedEstimate{x0, g.weight(i, 0)};
    const Vector wi = observer_step(w.subspan((i - 1) * n0, n0), neighbors, leader, mu, A0);
    next.insert(next.end(), wi.begin(), wi.end());
  }
  return next;
}

Vector state_feedback_control(const Matrix& K1, const Matrix& K2, std::span<const double> x_i,
                              std::span<const double> w_i) {
  if (K1.rows() != K2.rows()) throw DimensionError("state_feedback_control: K1 and K2 row counts differ");
  return add(K1 * x_i, K2 * w_i);
}

OutputFeedbackStep output_feedback_step(const Matrix& K1, const Matrix& K2, const Matrix& K3, const AgentModel& agent,
                                        std::span<const double> eta_i, std::span<const double> w_i,
                                        std::span<const double> y_i) {
  if (K3.rows() != agent.n() || K3.cols() != agent.l()) {
    throw DimensionError("output_feedback_step: K3 shape does not match the agent");
  }
  OutputFeedbackStep out;
  out.u = state_feedback_control(K1, K2, eta_i, w_i);
  const Matrix observer_matrix = agent.A - K3 * agent.C;
  out.eta_next = add(add(observer_matrix * eta_i, agent.B * out.u), K3 * y_i);
  return out;
}

}  // namespace poscon
