#pragma once

#include <string>
#include <vector>

#include "poscon/linalg.hpp"
#include "poscon/systems.hpp"

namespace poscon {

// Acceptance thresholds for regulator solutions.
inline constexpr double kRegulatorResidualTol = 1e-10;
inline constexpr double kRegulatorNonnegTol = 1e-9;

/// Solution (X, U) of the regulator equations
///   A X + B U - X A0 = 0,   C X - C0 = 0.
struct RegulatorSolution {
  Matrix X;               // n x n0
  Matrix U;               // m x n0
  double residual = 0.0;  // 2-norm of the stacked, vectorized residual
  bool solvable = false;  // residual < kRegulatorResidualTol
  bool nonneg_ok = false; // min entry of X and U >= -kRegulatorNonnegTol
  bool used_nonnegative_pass = false;

  [[nodiscard]] bool accepted() const noexcept { return solvable && nonneg_ok; }
};

/// Residual of the regulator equations at a given (X, U).
double regulator_residual(const AgentModel& agent, const LeaderModel& leader, const Matrix& X, const Matrix& U);

/// Solves the vectorized system
///   [I (x) A - A0^T (x) I,  I (x) B] [vec X]   [   0   ]
///   [I (x) C,               0     ] [vec U] = [vec C0 ]
/// by minimum-norm least squares. If that point is not nonnegative, a
/// nonnegative least-squares pass searches the solution set for one that is.
/// Unsolvable systems come back flagged, not thrown.
RegulatorSolution solve_regulator(const AgentModel& agent, const LeaderModel& leader);

struct FeedforwardGain {
  Matrix K2;
  bool nonnegative = true;
  std::string warning;  // set when some entry < -1e-9
};

/// K2 = U - K1 X.
FeedforwardGain compute_feedforward_gain(const RegulatorSolution& sol, const Matrix& K1);

}  // namespace poscon
