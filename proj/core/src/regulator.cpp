#include "poscon/regulator.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace poscon {

namespace {

void check_dimensions(const AgentModel& agent, const LeaderModel& leader) {
  agent.validate_shapes();
  if (!leader.A0.is_square()) throw DimensionError("regulator: A0 must be square");
  if (leader.C0.cols() != leader.n()) throw DimensionError("regulator: C0 column count must match A0");
  if (agent.l() != leader.l()) {
    throw DimensionError("regulator: agent " + std::to_string(agent.id) + " has " + std::to_string(agent.l()) +
                         " outputs, leader has " + std::to_string(leader.l()));
  }
}

Matrix regulator_system(const AgentModel& agent, const LeaderModel& leader) {
  const std::size_t n = agent.n();
  const std::size_t m = agent.m();
  const std::size_t n0 = leader.n();
  const std::size_t l = agent.l();
  const Matrix i_n0 = Matrix::identity(n0);

  const Matrix top_left = kron(i_n0, agent.A) - kron(leader.A0.transpose(), Matrix::identity(n));
  const Matrix top_right = kron(i_n0, agent.B);
  const Matrix bottom_left = kron(i_n0, agent.C);
  const Matrix bottom_right(l * n0, m * n0);

  const std::array top{top_left, top_right};
  const std::array bottom{bottom_left, bottom_right};
  const std::array rows{hstack(top), hstack(bottom)};
  return vstack(rows);
}

Vector regulator_rhs(const AgentModel& agent, const LeaderModel& leader) {
  Vector rhs(agent.n() * leader.n(), 0.0);
  const Vector c0 = leader.C0.vec();
  rhs.insert(rhs.end(), c0.begin(), c0.end());
  return rhs;
}

RegulatorSolution unpack(const AgentModel& agent, const LeaderModel& leader, const Vector& z, double residual) {
  const std::size_t nx = agent.n() * leader.n();
  const std::span<const double> zs(z);
  RegulatorSolution sol{Matrix::unvec(zs.subspan(0, nx), agent.n(), leader.n()),
                        Matrix::unvec(zs.subspan(nx), agent.m(), leader.n())};
  sol.residual = residual;
  sol.solvable = residual < kRegulatorResidualTol;
  sol.nonneg_ok = sol.X.min_entry() >= -kRegulatorNonnegTol && sol.U.min_entry() >= -kRegulatorNonnegTol;
  return sol;
}

}  // namespace

double regulator_residual(const AgentModel& agent, const LeaderModel& leader, const Matrix& X, const Matrix& U) {
  check_dimensions(agent, leader);
  const Matrix r1 = agent.A * X + agent.B * U - X * leader.A0;
  const Matrix r2 = agent.C * X - leader.C0;
  double ss = 0.0;
  for (double v : r1.data()) ss += v * v;
  for (double v : r2.data()) ss += v * v;
  return std::sqrt(ss);
}

RegulatorSolution solve_regulator(const AgentModel& agent, const LeaderModel& leader) {
  check_dimensions(agent, leader);
  const Matrix sys = regulator_system(agent, leader);
  const Vector rhs = regulator_rhs(agent, leader);

  const auto ls = solve_linear_least_squares(sys, rhs);
  RegulatorSolution sol = unpack(agent, leader, ls.x, ls.residual);
  if (sol.nonneg_ok || !sol.solvable) return sol;

  // Minimum norm landed outside the orthant; look for a nonnegative point of
  // the same solution set.
  const auto nn = solve_nonnegative_least_squares(sys, rhs);
  RegulatorSolution alt = unpack(agent, leader, nn.x, nn.residual);
  alt.used_nonnegative_pass = true;
  if (alt.accepted()) return alt;
  sol.used_nonnegative_pass = true;
  return sol;
}

FeedforwardGain compute_feedforward_gain(const RegulatorSolution& sol, const Matrix& K1) {
  if (K1.rows() != sol.U.rows() || K1.cols() != sol.X.rows()) {
    throw DimensionError("compute_feedforward_gain: K1 is " + std::to_string(K1.rows()) + "x" +
                         std::to_string(K1.cols()) + ", expected " + std::to_string(sol.U.rows()) + "x" +
                         std::to_string(sol.X.rows()));
  }
  FeedforwardGain out{sol.U - K1 * sol.X};
  const double lowest = out.K2.min_entry();
  if (lowest < -kDefaultTol) {
    out.nonnegative = false;
    std::ostringstream os;
    os << "K2 has negative entry " << lowest << "; observer-driven input may leave the positive orthant";
    out.warning = os.str();
  }
  return out;
}

}  // namespace poscon
