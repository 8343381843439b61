#include <gtest/gtest.h>

#include <cmath>

#include "poscon/protocol.hpp"
#include "poscon/regulator.hpp"
#include "support.hpp"

using namespace poscon;
using poscon::testing::follower;
using poscon::testing::ramp_leader;

namespace {

void expect_vec_near(const Vector& a, const Vector& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

const Matrix kA0{{1.0, 0.5}, {0.0, 1.0}};

}  // namespace

TEST(ObserverStep, NoNeighbors) {
  const Vector v{2, 3};
  expect_vec_near(observer_step(v, {}, std::nullopt, 0.3, kA0), kA0 * v, 0);
}

TEST(ObserverStep, SingleLeaderLink) {
  const Vector v{2, 3};
  const Vector zero{0, 0};
  const auto got = observer_step(zero, {}, WeightedEstimate{v, 1.0}, 0.5, kA0);
  expect_vec_near(got, scale(kA0 * v, 0.5), 1e-15);
}

TEST(ObserverStep, ConsensusInvariant) {
  const Vector v{1.5, 0.25};
  const std::vector<WeightedEstimate> nb{{v, 1.0}, {v, 1.0}};
  expect_vec_near(observer_step(v, nb, WeightedEstimate{v, 1.0}, 0.3, kA0), kA0 * v, 1e-15);
}

TEST(CompactObserver, Examples) {
  expect_vec_near(compact_observer_matrix(Matrix{{1}}, 0.5, kA0).vec(), (kA0 * 0.5).vec(), 1e-15);
  EXPECT_EQ(compact_observer_matrix(Matrix{{1, -1}, {-1, 1}}, 0.0, kA0), kron(Matrix::identity(2), kA0));
  const Matrix h1 = follower_submatrix(poscon::testing::graph_one());
  // Eigenvalues of H1 are 2 - sqrt(3), 1, 2 + sqrt(3); the smallest one dominates.
  EXPECT_NEAR(spectral_radius(compact_observer_matrix(h1, 0.3, kA0)), 1 - 0.3 * (2 - std::sqrt(3.0)), 1e-8);
}

TEST(CompactObserver, RoundMatchesStackedForm) {
  poscon::testing::Rng rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = poscon::testing::uniform_int(rng, 1, 5);
    const std::size_t n0 = poscon::testing::uniform_int(rng, 1, 3);
    const Digraph g = poscon::testing::random_admissible_graph(rng, n);
    const Matrix a0 = poscon::testing::random_leader_matrix(rng, n0);
    const double mu = poscon::testing::uniform(rng, 0.01, 0.5);
    const Vector w = poscon::testing::random_vector(rng, n * n0, 0, 10);
    const Vector x0 = poscon::testing::random_vector(rng, n0, 0, 10);
    const Vector stacked = add(compact_observer_matrix(follower_submatrix(g), mu, a0) * w,
                               compact_observer_input(leader_pinning(g), mu, a0, x0));
    expect_vec_near(observer_round(g, w, x0, mu, a0), stacked, 1e-12);
  }
}

TEST(StateFeedback, Examples) {
  expect_vec_near(state_feedback_control(Matrix{{-0.5, 0}}, Matrix{{0.25, 0.5}}, Vector{0, 0}, Vector{0, 0}),
                  Vector{0}, 0);
  expect_vec_near(state_feedback_control(Matrix{{-0.5, 0}}, Matrix{{0.25, 0.5}}, Vector{2, 0}, Vector{1, 1}),
                  Vector{-0.25}, 1e-15);
}

TEST(StateFeedback, SteadyStateFeedforwardIdentity) {
  const auto leader = ramp_leader();
  for (std::size_t i = 1; i <= 3; ++i) {
    const auto agent = follower(i);
    const auto reg = solve_regulator(agent, leader);
    const Matrix k1 = poscon::testing::example_K1(i);
    const Matrix k2 = compute_feedforward_gain(reg, k1).K2;
    const Vector x0{3.0, 1.5};
    const Vector x = reg.X * x0;
    const Vector u = state_feedback_control(k1, k2, x, x0);
    expect_vec_near(u, reg.U * x0, 1e-12);
    // Tracking manifold is invariant under one closed-loop step.
    expect_vec_near(add(agent.A * x, agent.B * u), reg.X * (leader.A0 * x0), 1e-12);
  }
}

TEST(OutputFeedback, RestState) {
  const auto agent = follower(1);
  const auto r = output_feedback_step(Matrix{{-0.5, 0}}, Matrix{{0.25, 0.5}}, Matrix{{0.3}, {0.3}}, agent,
                                      Vector{0, 0}, Vector{0, 0}, Vector{0});
  expect_vec_near(r.u, Vector{0}, 0);
  expect_vec_near(r.eta_next, Vector{0, 0}, 0);
}

TEST(OutputFeedback, ExampleStep) {
  const auto agent = follower(1);
  const auto r = output_feedback_step(Matrix{{-0.5, 0}}, Matrix{{0.25, 0.5}}, Matrix{{0.3}, {0.3}}, agent,
                                      Vector{0, 0}, Vector{1, 1}, Vector{0});
  expect_vec_near(r.u, Vector{0.75}, 1e-15);
  expect_vec_near(r.eta_next, Vector{0.75, 0}, 1e-15);
}

TEST(OutputFeedback, ConvergedCompensatorMatchesStateLaw) {
  const auto agent = follower(2);
  const Matrix k1 = poscon::testing::example_K1(2);
  const Matrix k2{{0.15, 0.4}};
  const Vector x{1.25, 4.0};
  const Vector w{2.0, 0.5};
  const auto r = output_feedback_step(k1, k2, poscon::testing::example_K3(2), agent, x, w, agent.C * x);
  expect_vec_near(r.u, state_feedback_control(k1, k2, x, w), 1e-15);
  expect_vec_near(r.eta_next, add(agent.A * x, agent.B * r.u), 1e-12);
}
