#pragma once

#include "poscon/linalg.hpp"

namespace poscon::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::Infeasible;
  Vector x;
  double objective = 0.0;
};

/// maximize c^T x  subject to  A x <= b, x >= 0.
///
/// Dense two-phase tableau simplex with Bland's anti-cycling rule. Intended for
/// the small programs that arise in gain synthesis (tens of variables); b may
/// have entries of either sign.
Solution maximize(const Matrix& a, std::span<const double> b, std::span<const double> c);

}  // namespace poscon::lp
