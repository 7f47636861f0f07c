#pragma once

// Moment tensors and the σ-quantities behind the sufficient conditions for
// the shifting and scaling corrections to reduce the expected squared error.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "debias/error.hpp"
#include "debias/linalg.hpp"
#include "debias/numeric.hpp"
#include "debias/objective.hpp"

namespace debias {

inline constexpr std::size_t kMaxMomentDimension = 20;

/// Centered second and fourth moments; m4 stored dense (d⁴ entries).
struct MomentTensors {
  std::size_t dim = 0;
  Matrix m2;
  std::vector<double> m4;

  double fourth(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    return m4[((a * dim + b) * dim + c) * dim + d];
  }

  /// G_ab G_cd (M₄)^{abcd}
  double contract4(const Matrix& g) const {
    double s = 0.0;
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) {
        const double gab = g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (gab == 0.0) continue;
        for (std::size_t c = 0; c < dim; ++c)
          for (std::size_t d = 0; d < dim; ++d)
            s += gab * g(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) * fourth(a, b, c, d);
      }
    return s;
  }
};

/// Empirical moments of `samples` (one per row) about `center`.
inline MomentTensors moments_from_samples(const Matrix& samples, const Vector& center) {
  const auto d = static_cast<std::size_t>(samples.cols());
  require(d >= 1 && d <= kMaxMomentDimension, ErrorKind::contract, "moments_from_samples: need 1 <= d <= 20");
  require(center.size() == samples.cols(), ErrorKind::contract, "moments_from_samples: center has the wrong size");
  require(samples.rows() >= 1, ErrorKind::contract, "moments_from_samples: no samples");
  MomentTensors out{d, Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)),
                    std::vector<double>(d * d * d * d, 0.0)};
  std::vector<double> outer(d * d);
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    const Vector y = samples.row(r).transpose() - center;
    out.m2 += y * y.transpose();
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) outer[a * d + b] = y[static_cast<Eigen::Index>(a)] * y[static_cast<Eigen::Index>(b)];
    for (std::size_t ab = 0; ab < d * d; ++ab)
      for (std::size_t cd = 0; cd < d * d; ++cd) out.m4[ab * d * d + cd] += outer[ab] * outer[cd];
  }
  const double inv = 1.0 / static_cast<double>(samples.rows());
  out.m2 *= inv;
  for (double& v : out.m4) v *= inv;
  return out;
}

/// N(x*, σ²I): M₂ = σ²I, (M₄)_abcd = σ⁴(δ_ab δ_cd + δ_ac δ_bd + δ_ad δ_bc).
inline MomentTensors moments_gaussian(double sigma, std::size_t d) {
  require(d >= 1 && d <= kMaxMomentDimension, ErrorKind::contract, "moments_gaussian: need 1 <= d <= 20");
  const double s2 = sigma * sigma, s4 = s2 * s2;
  MomentTensors out{d, s2 * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)),
                    std::vector<double>(d * d * d * d, 0.0)};
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t e = 0; e < d; ++e)
          out.m4[((a * d + b) * d + c) * d + e] =
              s4 * ((a == b && c == e) + (a == c && b == e) + (a == e && b == c));
  return out;
}

struct SigmaSet {
  double sigma1 = 0.0;  // ∇Fᵀ M₂ ∇F
  double sigma2 = 0.0;  // tr(M₂ ∇²F)
  double sigma3 = 0.0;  // ∂ₐF (M₂)^{ab} ∂³_{bcd}F (M₂)^{cd}
  double sigma4 = 0.0;  // ∂²_{ab}F ∂²_{cd}F (M₄)^{abcd}
  std::optional<double> sigma4_prime;  // needs F(x*) != 0
  double f_star = 0.0;
  double c_k = 1.0;
  // σ₂²/4 - (σ₁/C_K + √(σ₁σ₄) - σ₃); positive means the condition holds
  double margin_shift = 0.0;
  // same with √(σ₂σ₄) in place of √(σ₁σ₄)
  double margin_shift_alt = 0.0;
  std::optional<double> margin_scale;
  std::optional<double> margin_scale_alt;
};

/// Third-derivative tensor by central differences of the Hessian,
/// step h = cbrt(eps) max(1, ‖x‖).
inline SymmetricTensor3 third_derivative_fd(const std::function<Matrix(const Vector&)>& hessian, const Vector& x) {
  const auto d = static_cast<std::size_t>(x.size());
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.norm());
  SymmetricTensor3 t(d);
  for (std::size_t c = 0; c < d; ++c) {
    Vector xp = x, xm = x;
    xp[static_cast<Eigen::Index>(c)] += h;
    xm[static_cast<Eigen::Index>(c)] -= h;
    const Matrix diff = (hessian(xp) - hessian(xm)) / (2.0 * h);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) t(a, b, c) = diff(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  t.symmetrize();
  return t;
}

namespace detail {

inline void check_nonnegative(double v, double scale, const char* what) {
  if (v < -1e-9 * std::max(1.0, scale))
    throw Error(ErrorKind::numeric, std::string(what) + " is negative (" + format_double(v) + ")");
}

inline double safe_sqrt(double v) { return std::sqrt(std::max(0.0, v)); }

}  // namespace detail

enum class ScaleMargin { if_positive, required };

inline SigmaSet sigma_set(const Objective& f, const Vector& x_star, const MomentTensors& moments, double c_k,
                          ScaleMargin scale_mode = ScaleMargin::if_positive) {
  if (!f.has_gradient() || !f.has_hessian())
    throw Error(ErrorKind::unsupported, f.name + ": sigma quantities need gradient and Hessian oracles");
  require(static_cast<std::size_t>(x_star.size()) == moments.dim, ErrorKind::contract,
          "sigma_set: x* and moment tensors differ in dimension");
  require(c_k > 0.0, ErrorKind::contract, "sigma_set: C_K must be positive");
  const Observation xo = EuclideanPoint{x_star};
  SigmaSet out;
  out.c_k = c_k;
  out.f_star = f(xo);
  const Vector g = f.gradient(x_star);
  const Matrix h = f.hessian(x_star);
  const SymmetricTensor3 t = f.has_third_derivative() ? f.third_derivative(x_star) : third_derivative_fd(f.hessian, x_star);
  const Matrix& m2 = moments.m2;
  const auto d = moments.dim;

  out.sigma1 = g.dot(m2 * g);
  out.sigma2 = (m2 * h).trace();
  const Vector m2g = m2 * g;
  CompensatedSum s3;
  for (std::size_t b = 0; b < d; ++b) {
    double w = 0.0;
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t e = 0; e < d; ++e) w += t(b, c, e) * m2(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(e));
    s3 += m2g[static_cast<Eigen::Index>(b)] * w;
  }
  out.sigma3 = s3.value();
  out.sigma4 = moments.contract4(h);

  const double magnitude = std::fabs(out.sigma1) + std::fabs(out.sigma2) + std::fabs(out.sigma4);
  detail::check_nonnegative(out.sigma1, magnitude, "sigma1");
  detail::check_nonnegative(out.sigma4, magnitude, "sigma4");
  if (f.curvature == Curvature::convex) detail::check_nonnegative(out.sigma2, magnitude, "sigma2");

  const double s22 = out.sigma2 * out.sigma2 / 4.0;
  out.margin_shift = s22 - (out.sigma1 / c_k + detail::safe_sqrt(out.sigma1 * out.sigma4) - out.sigma3);
  out.margin_shift_alt = s22 - (out.sigma1 / c_k + detail::safe_sqrt(out.sigma2 * out.sigma4) - out.sigma3);

  const bool positive = f.sign == SignConstraint::positive && out.f_star > 0.0;
  if (scale_mode == ScaleMargin::required && !positive)
    throw Error(ErrorKind::unsupported, f.name + ": scale margin needs a positive objective with F(x*) > 0");
  if (positive) {
    const Matrix gp = h + 2.0 * g * g.transpose() / out.f_star;
    out.sigma4_prime = moments.contract4(gp);
    detail::check_nonnegative(*out.sigma4_prime, magnitude + std::fabs(*out.sigma4_prime), "sigma4_prime");
    const double tail = -4.0 * out.sigma1 * out.sigma2 / out.f_star + 3.0 * out.sigma1 * out.sigma1 / (out.f_star * out.f_star);
    out.margin_scale = s22 - (out.sigma1 / c_k + detail::safe_sqrt(out.sigma1 * *out.sigma4_prime) - out.sigma3 + tail);
    out.margin_scale_alt =
        s22 - (out.sigma1 / c_k + detail::safe_sqrt(out.sigma2 * *out.sigma4_prime) - out.sigma3 + tail);
  }
  return out;
}

}  // namespace debias
