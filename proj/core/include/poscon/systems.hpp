#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "poscon/linalg.hpp"

namespace poscon {

/// Follower i: x(k+1) = A x(k) + B u(k), y(k) = C x(k).
struct AgentModel {
  Matrix A;
  Matrix B;
  Matrix C;
  std::size_t id = 0;

  [[nodiscard]] std::size_t n() const noexcept { return A.rows(); }
  [[nodiscard]] std::size_t m() const noexcept { return B.cols(); }
  [[nodiscard]] std::size_t l() const noexcept { return C.rows(); }

  /// Throws DimensionError unless A is n x n, B is n x m and C is l x n.
  void validate_shapes() const;

  friend bool operator==(const AgentModel&, const AgentModel&) = default;
};

/// Autonomous leader: x0(k+1) = A0 x0(k), y0(k) = C0 x0(k).
struct LeaderModel {
  Matrix A0;
  Matrix C0;

  [[nodiscard]] std::size_t n() const noexcept { return A0.rows(); }
  [[nodiscard]] std::size_t l() const noexcept { return C0.rows(); }

  friend bool operator==(const LeaderModel&, const LeaderModel&) = default;
};

enum class GainOrigin { User, Synthesized, Derived };

const char* to_string(GainOrigin origin);

/// Controller gains for one follower.
struct AgentGains {
  Matrix K1;                // m x n, state feedback, nonpositive
  Matrix K2;                // m x n0, feedforward from the observer
  std::optional<Matrix> K3; // n x l, output injection (output-feedback mode)
  GainOrigin k1_origin = GainOrigin::User;
  GainOrigin k2_origin = GainOrigin::Derived;
  GainOrigin k3_origin = GainOrigin::User;
};

struct GainSet {
  std::vector<AgentGains> agents;
  double mu = 0.0;
  bool mu_auto = false;
};

struct Diagnosis {
  bool ok = true;
  std::string reason;
};

/// Positivity of the triple: every entry of A, B, C is >= -tol.
/// Throws DimensionError if the shapes are inconsistent.
bool check_positive_system(const Matrix& A, const Matrix& B, const Matrix& C, double tol = 0.0);

struct LeaderDiagnosis : Diagnosis {
  double spectral_radius = 0.0;
};

/// A0 >= 0, C0 >= 0 and |rho(A0) - 1| <= 1e-8.
LeaderDiagnosis check_leader(const LeaderModel& leader);

struct GainCheck {
  bool ok = false;
  Matrix closed_loop;
  double min_entry = 0.0;
  double spectral_radius = 0.0;
  std::string reason;
};

/// A + B K1 entrywise >= -1e-9 and rho(A + B K1) < 1 - 1e-9.
GainCheck verify_state_gain(const Matrix& A, const Matrix& B, const Matrix& K1);

/// A - K3 C entrywise >= -1e-9 and rho(A - K3 C) < 1 - 1e-9.
GainCheck verify_observer_gain(const Matrix& A, const Matrix& C, const Matrix& K3);

struct SynthesisOptions {
  double target_margin = 0.05;  // shortcut: accept K = 0 if A already has this margin
  double margin_cap = 0.5;      // largest margin the search asks for
  int bisection_steps = 40;
};

struct SynthesisResult {
  bool feasible = false;
  Matrix gain;
  /// Largest t found with a certificate (A + B K) v <= (1 - t) v, v >> 0.
  double certified_margin = 0.0;
  GainCheck check;
  std::string report;
};

/// Nonpositive K1 with A + B K1 nonnegative and Schur.
///
/// For fixed margin t the problem is linear after the diagonal change of
/// variables z_j = K(:, j) v_j: with v >= 1 and z <= 0,
///   A_rj v_j + (B z_j)_r >= 0          (closed loop nonnegative)
///   A v + B sum_j z_j <= (1 - t) v     (weighted row sums contract)
/// The largest feasible t is located by bisection over LP feasibility and the
/// gain is recovered as K(:, j) = z_j / v_j. Every returned gain has already
/// passed verify_state_gain; infeasibility is reported, not thrown.
SynthesisResult synthesize_state_gain(const Matrix& A, const Matrix& B, const SynthesisOptions& opts = {});

/// Nonnegative K3 with A - K3 C nonnegative and Schur, by duality with
/// synthesize_state_gain(A^T, C^T).
SynthesisResult synthesize_observer_gain(const Matrix& A, const Matrix& C, const SynthesisOptions& opts = {});

}  // namespace poscon
