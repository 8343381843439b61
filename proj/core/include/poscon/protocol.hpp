#pragma once

#include <optional>
#include <span>
#include <vector>

#include "poscon/graph.hpp"
#include "poscon/linalg.hpp"
#include "poscon/systems.hpp"

namespace poscon {

/// A neighbor's time-k estimate together with its link weight a_ij(k).
struct WeightedEstimate {
  std::span<const double> w;
  double weight = 1.0;
};

/// One step of the distributed positive observer at agent i:
///   w_i(k+1) = A0 (w_i + mu * sum_j a_ij (w_j - w_i)),
/// where the optional leader term uses w_0(k) = x0(k).
Vector observer_step(std::span<const double> w_i, std::span<const WeightedEstimate> neighbors,
                     std::optional<WeightedEstimate> leader, double mu, const Matrix& A0);

/// (I_N - mu H) (x) A0, the switched system matrix of the stacked observer.
Matrix compact_observer_matrix(const Matrix& H, double mu, const Matrix& A0);

/// mu (Lambda (x) A0)(1_N (x) w0): the stacked leader-injection term.
Vector compact_observer_input(const Matrix& pinning, double mu, const Matrix& A0, std::span<const double> w0);

/// Synchronous observer update for all followers on graph g. `w` is the
/// stacked estimate col(w_1, ..., w_N).
Vector observer_round(const Digraph& g, std::span<const double> w, std::span<const double> x0, double mu,
                      const Matrix& A0);

/// u_i = K1 x_i + K2 w_i.
Vector state_feedback_control(const Matrix& K1, const Matrix& K2, std::span<const double> x_i,
                              std::span<const double> w_i);

struct OutputFeedbackStep {
  Vector u;
  Vector eta_next;
};

/// u_i = K1 eta_i + K2 w_i;
/// eta_i(k+1) = (A - K3 C) eta_i + B u_i + K3 y_i, using the u_i just computed.
OutputFeedbackStep output_feedback_step(const Matrix& K1, const Matrix& K2, const Matrix& K3, const AgentModel& agent,
                                        std::span<const double> eta_i, std::span<const double> w_i,
                                        std::span<const double> y_i);

}  // namespace poscon
