#include <gtest/gtest.h>

#include "debias/transport.hpp"

using namespace debias;

namespace {

Matrix random_cost(Eigen::Index m, Eigen::Index n, RandomStream& s) {
  Matrix c(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) c(i, j) = s.uniform() * 10.0;
  return c;
}

std::vector<double> random_weights(std::size_t n, RandomStream& s, bool with_zeros) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) {
    x = (with_zeros && s.uniform() < 0.3) ? 0.0 : s.uniform() + 0.05;
    total += x;
  }
  if (total == 0.0) {
    w[0] = 1.0;
    total = 1.0;
  }
  for (auto& x : w) x /= total;
  return w;
}

// Primal feasibility, dual feasibility and a zero duality gap together
// certify optimality without reference to the solver's internals.
void expect_optimal(const TransportProblem& p, const TransportPlan& plan, double tol) {
  const auto m = p.cost.rows(), n = p.cost.cols();
  ASSERT_GE(plan.coupling.minCoeff(), 0.0);
  for (Eigen::Index i = 0; i < m; ++i) EXPECT_NEAR(plan.coupling.row(i).sum(), p.supply[i], tol);
  for (Eigen::Index j = 0; j < n; ++j) EXPECT_NEAR(plan.coupling.col(j).sum(), p.demand[j], tol);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      EXPECT_LE(plan.row_potential[i] + plan.col_potential[j], p.cost(i, j) + tol);
  EXPECT_NEAR(plan.value, (plan.coupling.array() * p.cost.array()).sum(), tol);
  EXPECT_NEAR(plan.value, dual_value(p, plan), tol);
}

}  // namespace

TEST(Transport, SingleCell) {
  Matrix c(1, 1);
  c << 3.25;
  const auto plan = solve_transport(TransportProblem::uniform(c));
  EXPECT_EQ(plan.value, 3.25);
  EXPECT_EQ(plan.coupling(0, 0), 1.0);
}

TEST(Transport, MatchesPermutationOracle) {
  RandomStream s(1);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = 2 + t % 5;
    const auto p = TransportProblem::uniform(random_cost(n, n, s));
    const auto plan = solve_transport(p);
    EXPECT_NEAR(plan.value, brute_force_transport(p), 1e-9);
    expect_optimal(p, plan, 1e-8);
  }
}

TEST(Transport, DualCertificateOnRectangularProblems) {
  RandomStream s(2);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + t % 7, n = 1 + (t / 7) % 6;
    TransportProblem p{random_cost(m, n, s), random_weights(m, s, t % 3 == 0), random_weights(n, s, t % 4 == 0)};
    const auto plan = solve_transport(p);
    expect_optimal(p, plan, 1e-9);
    EXPECT_LE(plan.positive_entries(), m + n - 1);
  }
}

TEST(Transport, DegenerateCosts) {
  // ties everywhere: every feasible plan is optimal
  const auto p = TransportProblem::uniform(Matrix::Constant(5, 5, 2.0));
  const auto plan = solve_transport(p);
  EXPECT_NEAR(plan.value, 2.0, 1e-12);
  expect_optimal(p, plan, 1e-12);
  // integer costs with many equal assignments
  Matrix c(4, 4);
  c << 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0;
  EXPECT_NEAR(solve_transport(TransportProblem::uniform(c)).value, 0.0, 1e-15);
}

TEST(Transport, RejectsInvalidProblems) {
  Matrix c = Matrix::Ones(2, 2);
  EXPECT_THROW(solve_transport({c, {0.5, 0.6}, {0.5, 0.5}}), Error);
  EXPECT_THROW(solve_transport({c, {0.5, 0.5}, {1.0}}), Error);
  EXPECT_THROW(solve_transport({-c, {0.5, 0.5}, {0.5, 0.5}}), Error);
  EXPECT_THROW(brute_force_transport(TransportProblem::uniform(Matrix::Ones(8, 8))), Error);
}

TEST(Wasserstein, ShiftedDiracsAndIdentity) {
  RandomStream s(3);
  WeightedEmpirical p, q;
  Vector shift(2);
  shift << 0.3, -1.2;
  for (int i = 0; i < 6; ++i) {
    Vector x(2);
    x << s.gaussian() * 0.01, s.gaussian() * 0.01;
    p.support.push_back(x);
    q.support.push_back(x + shift);
    p.weights.push_back(1.0 / 6);
    q.weights.push_back(1.0 / 6);
  }
  EXPECT_NEAR(wasserstein2_squared(p, p), 0.0, 1e-15);
  EXPECT_NEAR(wasserstein2_squared(p, q), shift.squaredNorm(), 1e-12);
}
