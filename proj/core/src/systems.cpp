#include "poscon/systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "poscon/lp.hpp"

namespace poscon {

namespace {

constexpr double kSchurMargin = 1e-9;
constexpr double kLeaderRadiusTol = 1e-8;

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

GainCheck check_closed_loop(Matrix closed_loop) {
  GainCheck out;
  out.min_entry = closed_loop.min_entry();
  out.spectral_radius = spectral_radius(closed_loop);
  const bool nonneg = out.min_entry >= -kDefaultTol;
  const bool schur = out.spectral_radius < 1.0 - kSchurMargin;
  out.ok = nonneg && schur;
  std::ostringstream os;
  if (!nonneg) os << "closed loop has negative entry " << out.min_entry;
  if (!schur) {
    if (!nonneg) os << "; ";
    os << "closed loop not Schur (spectral radius " << out.spectral_radius << ")";
  }
  out.reason = os.str();
  out.closed_loop = std::move(closed_loop);
  return out;
}

// Feasibility LP for a fixed margin t. Returns (v, z) packed, or nothing.
struct CertificateSolution {
  Vector v;    // n
  Matrix gain; // m x n
};

std::optional<CertificateSolution> solve_certificate(const Matrix& A, const Matrix& B, double t) {
  const std::size_t n = A.rows();
  const std::size_t m = B.cols();
  const std::size_t nvar = n + m * n;
  // Variable layout: v'_j (v_j = 1 + v'_j) at j, p_qj = -z_qj at n + j*m + q.
  auto pidx = [n, m](std::size_t q, std::size_t j) { return n + j * m + q; };

  const std::size_t ncons = n * n + n;
  Matrix lhs(ncons, nvar);
  Vector rhs(ncons, 0.0);

  std::size_t row = 0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < n; ++j, ++row) {
      for (std::size_t q = 0; q < m; ++q) lhs(row, pidx(q, j)) = B(r, q);
      lhs(row, j) = -A(r, j);
      rhs[row] = A(r, j);
    }
  }
  for (std::size_t r = 0; r < n; ++r, ++row) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      lhs(row, j) += A(r, j);
      row_sum += A(r, j);
      for (std::size_t q = 0; q < m; ++q) lhs(row, pidx(q, j)) -= B(r, q);
    }
    lhs(row, r) -= (1.0 - t);
    rhs[row] = (1.0 - t) - row_sum;
  }

  const Vector cost(nvar, -1.0);
  const auto sol = lp::maximize(lhs, rhs, cost);
  if (sol.status != lp::Status::Optimal) return std::nullopt;

  CertificateSolution out{Vector(n), Matrix(m, n)};
  for (std::size_t j = 0; j < n; ++j) out.v[j] = 1.0 + sol.x[j];
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t q = 0; q < m; ++q) out.gain(q, j) = -sol.x[pidx(q, j)] / out.v[j];
  return out;
}

// Scales columns of K (<= 0) down until A + B K is entrywise nonnegative.
void shrink_to_nonnegative(const Matrix& A, const Matrix& B, Matrix& K) {
  const Matrix bk = B * K;
  for (std::size_t j = 0; j < K.cols(); ++j) {
    double alpha = 1.0;
    for (std::size_t r = 0; r < A.rows(); ++r) {
      if (bk(r, j) < 0.0 && A(r, j) + bk(r, j) < 0.0) alpha = std::min(alpha, A(r, j) / -bk(r, j));
    }
    if (alpha < 1.0) {
      for (std::size_t q = 0; q < K.rows(); ++q) K(q, j) *= alpha;
    }
  }
}

double max_row_sum(const Matrix& a) {
  double best = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

void AgentModel::validate_shapes() const {
  if (!A.is_square()) throw DimensionError("agent " + std::to_string(id) + ": A must be square, got " + shape(A));
  if (B.rows() != A.rows()) {
    throw DimensionError("agent " + std::to_string(id) + ": B has " + std::to_string(B.rows()) +
                         " rows, expected " + std::to_string(A.rows()));
  }
  if (C.cols() != A.rows()) {
    throw DimensionError("agent " + std::to_string(id) + ": C has " + std::to_string(C.cols()) +
                         " columns, expected " + std::to_string(A.rows()));
  }
}

const char* to_string(GainOrigin origin) {
  switch (origin) {
    case GainOrigin::User:
      return "user";
    case GainOrigin::Synthesized:
      return "synthesized";
    case GainOrigin::Derived:
      return "derived";
  }
  return "unknown";
}

bool check_positive_system(const Matrix& A, const Matrix& B, const Matrix& C, double tol) {
  AgentModel{A, B, C, 0}.validate_shapes();
  return is_nonnegative(A, tol) && is_nonnegative(B, tol) && is_nonnegative(C, tol);
}

LeaderDiagnosis check_leader(const LeaderModel& leader) {
  if (!leader.A0.is_square()) throw DimensionError("leader: A0 must be square, got " + shape(leader.A0));
  if (leader.C0.cols() != leader.A0.rows()) throw DimensionError("leader: C0 column count must match A0");

  LeaderDiagnosis out;
  out.spectral_radius = spectral_radius(leader.A0);
  std::ostringstream os;
  if (!is_nonnegative(leader.A0)) {
    out.ok = false;
    os << "A0 has negative entry " << leader.A0.min_entry();
  }
  if (!is_nonnegative(leader.C0)) {
    if (!out.ok) os << "; ";
    out.ok = false;
    os << "C0 has negative entry " << leader.C0.min_entry();
  }
  if (std::abs(out.spectral_radius - 1.0) > kLeaderRadiusTol) {
    if (!out.ok) os << "; ";
    out.ok = false;
    os << "spectral radius of A0 is " << out.spectral_radius << ", expected 1";
  }
  out.reason = os.str();
  return out;
}

GainCheck verify_state_gain(const Matrix& A, const Matrix& B, const Matrix& K1) {
  if (K1.rows() != B.cols() || K1.cols() != A.cols()) {
    throw DimensionError("verify_state_gain: K1 is " + shape(K1) + ", expected " + std::to_string(B.cols()) + "x" +
                         std::to_string(A.cols()));
  }
  return check_closed_loop(A + B * K1);
}

GainCheck verify_observer_gain(const Matrix& A, const Matrix& C, const Matrix& K3) {
  if (K3.rows() != A.rows() || K3.cols() != C.rows()) {
    throw DimensionError("verify_observer_gain: K3 is " + shape(K3) + ", expected " + std::to_string(A.rows()) +
                         "x" + std::to_string(C.rows()));
  }
  return check_closed_loop(A - K3 * C);
}

SynthesisResult synthesize_state_gain(const Matrix& A, const Matrix& B, const SynthesisOptions& opts) {
  if (!A.is_square() || B.rows() != A.rows()) {
    throw DimensionError("synthesize_state_gain: A is " + shape(A) + ", B is " + shape(B));
  }
  if (!is_nonnegative(A) || !is_nonnegative(B)) {
    throw std::invalid_argument("synthesize_state_gain: A and B must be nonnegative");
  }
  const std::size_t n = A.rows();
  const std::size_t m = B.cols();

  SynthesisResult out;
  out.gain = Matrix(m, n);

  const double open_loop_radius = spectral_radius(A);
  if (open_loop_radius <= 1.0 - opts.target_margin) {
    out.check = verify_state_gain(A, B, out.gain);
    out.feasible = out.check.ok;
    out.certified_margin = 1.0 - open_loop_radius;
    out.report = "open loop already nonnegative and Schur; zero gain";
    return out;
  }

  // With z = 0 and v = 1 the certificate holds for t = 1 - max row sum.
  double lo = 1.0 - max_row_sum(A);
  auto best = solve_certificate(A, B, lo);
  double hi = opts.margin_cap;
  if (auto top = solve_certificate(A, B, hi)) {
    best = std::move(top);
    lo = hi;
  } else {
    for (int step = 0; step < opts.bisection_steps; ++step) {
      const double mid = 0.5 * (lo + hi);
      if (auto sol = solve_certificate(A, B, mid)) {
        lo = mid;
        best = std::move(sol);
      } else {
        hi = mid;
      }
    }
  }
  out.certified_margin = lo;

  std::ostringstream os;
  if (!best || lo <= kSchurMargin) {
    os << "no nonpositive gain found: best certified contraction bound " << (1.0 - lo)
       << " (>= 1); the pair may not be positively stabilizable";
    out.report = os.str();
    out.check = verify_state_gain(A, B, out.gain);
    out.feasible = false;
    return out;
  }

  out.gain = best->gain;
  for (double& v : out.gain.data()) v = std::min(v, 0.0);
  shrink_to_nonnegative(A, B, out.gain);
  out.check = verify_state_gain(A, B, out.gain);
  out.feasible = out.check.ok;
  if (out.feasible) {
    os << "certified margin " << lo << ", closed-loop spectral radius " << out.check.spectral_radius;
  } else {
    os << "candidate gain failed verification: " << out.check.reason;
  }
  out.report = os.str();
  return out;
}

SynthesisResult synthesize_observer_gain(const Matrix& A, const Matrix& C, const SynthesisOptions& opts) {
  if (!A.is_square() || C.cols() != A.rows()) {
    throw DimensionError("synthesize_observer_gain: A is " + shape(A) + ", C is " + shape(C));
  }
  SynthesisResult dual = synthesize_state_gain(A.transpose(), C.transpose(), opts);
  SynthesisResult out;
  out.gain = -dual.gain.transpose();
  for (double& v : out.gain.data()) v = std::max(v, 0.0);
  out.certified_margin = dual.certified_margin;
  out.check = verify_observer_gain(A, C, out.gain);
  out.feasible = dual.feasible && out.check.ok;
  out.report = dual.report;
  return out;
}

}  // namespace poscon
