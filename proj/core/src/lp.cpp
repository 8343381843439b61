#include "poscon/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace poscon::lp {

namespace {

constexpr double kPivotTol = 1e-11;

class Tableau {
 public:
  // Columns: [x (n) | slack (m) | artificial (k) | rhs]. Row 0..m-1 are
  // constraints, row m is the objective row holding reduced costs.
  Tableau(const Matrix& a, std::span<const double> b)
      : m_(a.rows()), n_(a.cols()), basis_(m_) {
    for (std::size_t i = 0; i < m_; ++i)
      if (b[i] < 0) ++k_;
    width_ = n_ + m_ + k_ + 1;
    t_.assign((m_ + 1) * width_, 0.0);

    std::size_t art = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = b[i] < 0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * a(i, j);
      at(i, n_ + i) = sign;
      at(i, width_ - 1) = sign * b[i];
      if (b[i] < 0) {
        const std::size_t col = n_ + m_ + art++;
        at(i, col) = 1.0;
        basis_[i] = col;
      } else {
        basis_[i] = n_ + i;
      }
    }
  }

  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }

  bool has_artificials() const { return k_ > 0; }
  bool is_artificial(std::size_t col) const { return col >= n_ + m_ && col < n_ + m_ + k_; }

  // Load objective "maximize sum cost_j x_j" over all structural columns and
  // express it in terms of the current basis.
  void set_objective(const Vector& cost) {
    for (std::size_t j = 0; j < width_; ++j) at(m_, j) = 0.0;
    for (std::size_t j = 0; j + 1 < width_; ++j) at(m_, j) = -cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(m_, j) += cb * at(i, j);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row, col);
    for (std::size_t j = 0; j < width_; ++j) at(row, j) /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = at(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(i, j) -= f * at(row, j);
    }
    basis_[row] = col;
  }

  // Runs the primal simplex on the loaded objective. Columns flagged in
  // `blocked` never enter.
  Status optimize(const std::vector<bool>& blocked, std::size_t max_iter) {
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
      std::size_t enter = width_;
      for (std::size_t j = 0; j + 1 < width_; ++j) {
        if (!blocked[j] && at(m_, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter == width_) return Status::Optimal;

      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double aij = at(i, enter);
        if (aij <= kPivotTol) continue;
        const double ratio = at(i, width_ - 1) / aij;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave < m_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return Status::Unbounded;
      pivot(leave, enter);
    }
    return Status::IterationLimit;
  }

  // After phase 1: pivot any artificial still basic (at zero level) out.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (std::abs(at(i, j)) > kPivotTol) {
          pivot(i, j);
          break;
        }
      }
      // If no pivot exists the row is redundant; the artificial stays basic at 0
      // and is blocked from re-entering phase 2 so it cannot grow.
    }
  }

  Vector primal() const {
    Vector x(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = at(i, width_ - 1);
    return x;
  }

  double objective_value() const { return at(m_, width_ - 1); }

  std::size_t width() const { return width_; }
  std::size_t structural() const { return n_; }
  std::size_t constraints() const { return m_; }

 private:
  std::size_t m_;
  std::size_t n_;
  std::size_t k_ = 0;
  std::size_t width_ = 0;
  std::vector<std::size_t> basis_;
  std::vector<double> t_;
};

}  // namespace

Solution maximize(const Matrix& a, std::span<const double> b, std::span<const double> c) {
  if (b.size() != a.rows() || c.size() != a.cols()) {
    throw DimensionError("lp::maximize: inconsistent problem dimensions");
  }
  Tableau tab(a, b);
  const std::size_t cols = tab.width() - 1;
  const std::size_t max_iter = 50 * (cols + tab.constraints()) + 1000;
  std::vector<bool> blocked(cols, false);

  if (tab.has_artificials()) {
    Vector phase1(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j)
      if (tab.is_artificial(j)) phase1[j] = -1.0;
    tab.set_objective(phase1);
    const Status s = tab.optimize(blocked, max_iter);
    if (s == Status::IterationLimit) return {Status::IterationLimit, {}, 0.0};
    if (tab.objective_value() < -1e-9) return {Status::Infeasible, {}, 0.0};
    tab.expel_artificials();
    for (std::size_t j = 0; j < cols; ++j)
      if (tab.is_artificial(j)) blocked[j] = true;
  }

  Vector cost(cols, 0.0);
  std::copy(c.begin(), c.end(), cost.begin());
  tab.set_objective(cost);
  const Status s = tab.optimize(blocked, max_iter);
  if (s != Status::Optimal) return {s, {}, 0.0};

  Solution out;
  out.status = Status::Optimal;
  out.x = tab.primal();
  out.objective = 0.0;
  for (std::size_t j = 0; j < out.x.size(); ++j) out.objective += c[j] * out.x[j];
  return out;
}

}  // namespace poscon::lp
