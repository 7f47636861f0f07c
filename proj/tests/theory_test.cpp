#include <gtest/gtest.h>

#include "debias/problems.hpp"
#include "debias/theory.hpp"

using namespace debias;

namespace {

Objective square_1d() {
  Objective f;
  f.name = "x^2";
  f.evaluate = on_coords([](const Vector& x) { return x[0] * x[0]; });
  f.gradient = [](const Vector& x) -> Vector { return 2.0 * x; };
  f.hessian = [](const Vector&) -> Matrix { return Matrix::Constant(1, 1, 2.0); };
  f.third_derivative = [](const Vector&) { return SymmetricTensor3(1); };
  f.sign = SignConstraint::positive;
  return f;
}

Vector scalar_vec(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST(SigmaSet, OneDimensionalSquare) {
  for (double xs : {0.0, 0.7, -2.0})
    for (double sigma : {0.5, 1.0, 3.0}) {
      const auto s = sigma_set(square_1d(), scalar_vec(xs), moments_gaussian(sigma, 1), 1.0);
      const double s2 = sigma * sigma;
      EXPECT_NEAR(s.sigma1, 4.0 * xs * xs * s2, 1e-12);
      EXPECT_NEAR(s.sigma2, 2.0 * s2, 1e-12);
      EXPECT_EQ(s.sigma3, 0.0);
      EXPECT_NEAR(s.sigma4, 12.0 * s2 * s2, 1e-10);
    }
}

TEST(SigmaSet, ZeroMeanSquareMarginIsQuarterSigma2Squared) {
  const auto s = sigma_set(square_1d(), scalar_vec(0.0), moments_gaussian(1.0, 1), 1.0);
  EXPECT_NEAR(s.margin_shift, 1.0, 1e-14);
  EXPECT_NEAR(s.margin_shift_alt, 1.0 - std::sqrt(2.0 * 12.0), 1e-12);
  EXPECT_FALSE(s.margin_scale.has_value());  // F(x*) = 0
  EXPECT_THROW(sigma_set(square_1d(), scalar_vec(0.0), moments_gaussian(1.0, 1), 1.0, ScaleMargin::required), Error);
}

TEST(SigmaSet, ZeroMomentsGiveZeroSigmas) {
  MomentTensors zero{2, Matrix::Zero(2, 2), std::vector<double>(16, 0.0)};
  Vector x(2);
  x << 1.0, -1.0;
  const auto s = sigma_set(p2_quartic(Matrix::Identity(2, 2)), x, zero, 3.0);
  EXPECT_EQ(s.sigma1, 0.0);
  EXPECT_EQ(s.sigma2, 0.0);
  EXPECT_EQ(s.sigma3, 0.0);
  EXPECT_EQ(s.sigma4, 0.0);
  EXPECT_EQ(s.margin_shift, 0.0);
}

TEST(SigmaSet, ScaleMarginFormula) {
  const auto s = sigma_set(square_1d(), scalar_vec(1.5), moments_gaussian(0.8, 1), 2.0);
  ASSERT_TRUE(s.margin_scale && s.sigma4_prime);
  // G = H + 2∇F∇Fᵀ/F = 2 + 2·9/2.25 = 10; σ′₄ = G² · 3σ⁴
  EXPECT_NEAR(*s.sigma4_prime, 100.0 * 3.0 * std::pow(0.8, 4), 1e-10);
  const double fs = 2.25;
  const double want = s.sigma2 * s.sigma2 / 4.0 -
                      (s.sigma1 / 2.0 + std::sqrt(s.sigma1 * *s.sigma4_prime) - s.sigma3 -
                       4.0 * s.sigma1 * s.sigma2 / fs + 3.0 * s.sigma1 * s.sigma1 / (fs * fs));
  EXPECT_NEAR(*s.margin_scale, want, 1e-10);
}

TEST(SigmaSet, MarginNondecreasingInCk) {
  RandomStream r(1);
  const Matrix a = spd_with_condition(3, 2.0, r);
  const auto f = p1_quadratic(a);
  Vector x(3);
  x << 0.3, -0.4, 1.0;
  double prev = -std::numeric_limits<double>::infinity();
  for (double ck : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
    const auto s = sigma_set(f, x, moments_gaussian(1.0, 3), ck);
    EXPECT_GE(s.margin_shift, prev);
    prev = s.margin_shift;
  }
}

TEST(SigmaSet, MissingOraclesAreRejected) {
  auto f = square_1d();
  f.hessian = nullptr;
  EXPECT_THROW(sigma_set(f, scalar_vec(0.0), moments_gaussian(1.0, 1), 1.0), Error);
  EXPECT_THROW(sigma_set(square_1d(), Vector::Zero(2), moments_gaussian(1.0, 1), 1.0), Error);
  EXPECT_THROW(moments_gaussian(1.0, 21), Error);
}

TEST(ThirdDerivative, FiniteDifferenceMatchesQuarticAnalytic) {
  RandomStream r(2);
  const Matrix a = spd_with_condition(3, 2.0, r);
  const auto f = p2_quartic(a);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector x = sample(dist::Gaussian{3}, r);
    const auto exact = f.third_derivative(x);
    const auto fd = third_derivative_fd(f.hessian, x);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < exact.data().size(); ++i) {
      num += (exact.data()[i] - fd.data()[i]) * (exact.data()[i] - fd.data()[i]);
      den += exact.data()[i] * exact.data()[i];
    }
    EXPECT_LT(std::sqrt(num) / std::max(1.0, std::sqrt(den)), 1e-4);
  }
}

TEST(ThirdDerivative, FallbackMatchesAnalyticSigma3) {
  RandomStream r(3);
  const Matrix a = spd_with_condition(2, 2.0, r);
  auto f = p2_quartic(a);
  Vector x(2);
  x << 0.5, 1.0;
  const auto with = sigma_set(f, x, moments_gaussian(0.5, 2), 1.0);
  f.third_derivative = nullptr;
  const auto without = sigma_set(f, x, moments_gaussian(0.5, 2), 1.0);
  EXPECT_NEAR(without.sigma3, with.sigma3, 1e-5 * std::fabs(with.sigma3));
}

TEST(Moments, SampledMatchGaussianWithinMonteCarloError) {
  // 10⁶ Gaussian draws in d = 2: every σ from sampled moments within 4
  // Monte Carlo standard errors of the Isserlis values. Standard errors are
  // estimated from per-sample contributions.
  const std::size_t d = 2, n = 1000000;
  const double sigma = 0.7;
  RandomStream r(4);
  Matrix samples(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vector xs(2);
  xs << 0.4, -0.9;
  for (Eigen::Index i = 0; i < samples.rows(); ++i)
    for (Eigen::Index j = 0; j < samples.cols(); ++j) samples(i, j) = xs[j] + sigma * r.gaussian();
  Matrix a(2, 2);
  a << 2.0, 0.3, 0.3, 1.0;
  const auto f = p2_quartic(a);
  const auto exact = sigma_set(f, xs, moments_gaussian(sigma, d), 1.0);
  const auto sampled = sigma_set(f, xs, moments_from_samples(samples, xs), 1.0);

  const Vector g = f.gradient(xs);
  const Matrix h = f.hessian(xs);
  double v1 = 0, v2 = 0, v4 = 0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Vector y = samples.row(i).transpose() - xs;
    const double q1 = std::pow(g.dot(y), 2), q2 = y.dot(h * y), q4 = q2 * q2;
    v1 += std::pow(q1 - exact.sigma1, 2);
    v2 += std::pow(q2 - exact.sigma2, 2);
    v4 += std::pow(q4 - exact.sigma4, 2);
  }
  const double nn = static_cast<double>(n);
  EXPECT_NEAR(sampled.sigma1, exact.sigma1, 4.0 * std::sqrt(v1 / nn / nn));
  EXPECT_NEAR(sampled.sigma2, exact.sigma2, 4.0 * std::sqrt(v2 / nn / nn));
  EXPECT_NEAR(sampled.sigma4, exact.sigma4, 4.0 * std::sqrt(v4 / nn / nn));
}

TEST(Moments, SignInvariantsOnGeneratedProblems) {
  for (ProblemId id : {ProblemId::P1, ProblemId::P2, ProblemId::P3, ProblemId::P5}) {
    const auto inst = generate_instance(id, {{"d", 4}}, RandomStream(5));
    const auto& f = std::get<Objective>(inst.objective);
    const Vector xs = coords_of(std::get<Observation>(inst.truth_input));
    const auto s = sigma_set(f, xs, moments_gaussian(0.5, static_cast<std::size_t>(xs.size())), 1.0);
    EXPECT_GE(s.sigma1, 0.0);
    EXPECT_GE(s.sigma2, 0.0);
    EXPECT_GE(s.sigma4, 0.0);
    if (s.sigma4_prime) {
      EXPECT_GE(*s.sigma4_prime, 0.0);
    }
  }
}
