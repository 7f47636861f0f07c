#pragma once

// Shifting, scaling and covariance-estimate debiasing of plug-in estimates F(x̄).

#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "debias/error.hpp"
#include "debias/numeric.hpp"
#include "debias/objective.hpp"
#include "debias/observation.hpp"
#include "debias/random.hpp"

namespace debias {

enum class Method { shift_bootstrap, scale_bootstrap, covariance };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::shift_bootstrap: return "shift";
    case Method::scale_bootstrap: return "scale";
    case Method::covariance: return "cov";
  }
  return "?";
}

struct BootstrapPlan {
  std::size_t resample_rounds = 10;  // K
  std::size_t resample_size = 0;     // m; 0 means m = n
  std::uint64_t seed = 0;

  void validate() const {
    require(resample_rounds >= 1, ErrorKind::contract, "bootstrap plan: K must be at least 1");
  }
};

template <class Point>
struct BasicDebiasEstimate {
  double naive_value = 0.0;
  Method method = Method::shift_bootstrap;
  double correction = 0.0;  // ĉ (shift, covariance) or ŝ (scale)
  double debiased_value = 0.0;
  std::optional<std::vector<double>> bootstrap_values;
  Point mean_observation;
};

using DebiasEstimate = BasicDebiasEstimate<Observation>;

/// Anything that can produce its mean and bootstrap resample means.
template <class S>
concept ResampleSource = requires(const S& s, RandomStream& r, std::size_t m) {
  typename S::point_type;
  { s.mean() } -> std::convertible_to<typename S::point_type>;
  { s.resample_mean(r, m) } -> std::convertible_to<typename S::point_type>;
  { s.size() } -> std::convertible_to<std::size_t>;
};

/// The K resample means; the k-th is drawn from stream.split(k).
template <ResampleSource Source>
std::vector<typename Source::point_type> bootstrap_means(const Source& source, const BootstrapPlan& plan,
                                                         const RandomStream& stream) {
  plan.validate();
  std::vector<typename Source::point_type> out;
  out.reserve(plan.resample_rounds);
  for (std::size_t k = 0; k < plan.resample_rounds; ++k) {
    RandomStream child = stream.split(k);
    out.push_back(source.resample_mean(child, plan.resample_size));
  }
  return out;
}

namespace detail {

template <class Point>
double checked_eval(const BasicObjective<Point>& f, const Point& x, const std::string& where) {
  if (!f.in_domain(x)) throw Error(ErrorKind::domain, f.name + ": " + where + " is outside the domain");
  const double v = f.evaluate(x);
  if (!std::isfinite(v)) throw Error(ErrorKind::numeric, f.name + ": non-finite value at " + where);
  return v;
}

template <class Point, ResampleSource Source>
std::vector<double> bootstrap_values(const BasicObjective<Point>& f, const Source& source, const BootstrapPlan& plan,
                                     const RandomStream& stream) {
  plan.validate();
  std::vector<double> values;
  values.reserve(plan.resample_rounds);
  for (std::size_t k = 0; k < plan.resample_rounds; ++k) {
    RandomStream child = stream.split(k);
    const auto xk = source.resample_mean(child, plan.resample_size);
    values.push_back(checked_eval(f, xk, "bootstrap resample " + std::to_string(k)));
  }
  return values;
}

inline double scale_factor(double naive_g, double sum_g, double sum_g2) {
  if (!(sum_g2 >= 1e-300)) throw Error(ErrorKind::numeric, "scale debias: degenerate denominator sum F(x_k)^2");
  return naive_g * sum_g / sum_g2;
}

}  // namespace detail

/// Additive bootstrap correction ĉ = F(x̄) - (1/K) Σ F(x̃ₖ).
template <class Point, ResampleSource Source>
BasicDebiasEstimate<Point> shift_debias(const BasicObjective<Point>& f, const Source& source,
                                        const BootstrapPlan& plan, const RandomStream& stream) {
  BasicDebiasEstimate<Point> est;
  est.method = Method::shift_bootstrap;
  est.mean_observation = source.mean();
  est.naive_value = detail::checked_eval(f, est.mean_observation, "sample mean");
  auto values = detail::bootstrap_values(f, source, plan, stream);
  CompensatedSum sum;
  for (double v : values) sum += v;
  est.correction = est.naive_value - sum.value() / static_cast<double>(values.size());
  est.debiased_value = est.naive_value + est.correction;
  est.bootstrap_values = std::move(values);
  return est;
}

template <class Point, ResampleSource Source>
BasicDebiasEstimate<Point> shift_debias(const BasicObjective<Point>& f, const Source& source,
                                        const BootstrapPlan& plan) {
  return shift_debias(f, source, plan, RandomStream(plan.seed));
}

/// Multiplicative bootstrap correction ŝ = F(x̄) Σ F(x̃ₖ) / Σ F(x̃ₖ)².
/// Negative objectives are handled through -F; ŝ is invariant under the flip.
template <class Point, ResampleSource Source>
BasicDebiasEstimate<Point> scale_debias(const BasicObjective<Point>& f, const Source& source,
                                        const BootstrapPlan& plan, const RandomStream& stream) {
  if (f.sign == SignConstraint::none)
    throw Error(ErrorKind::unsupported, f.name + ": scaling requires a sign-definite objective");
  const double flip = f.sign == SignConstraint::negative ? -1.0 : 1.0;
  BasicDebiasEstimate<Point> est;
  est.method = Method::scale_bootstrap;
  est.mean_observation = source.mean();
  est.naive_value = detail::checked_eval(f, est.mean_observation, "sample mean");
  auto values = detail::bootstrap_values(f, source, plan, stream);
  CompensatedSum sum, sum_sq;
  for (double v : values) {
    const double g = flip * v;
    sum += g;
    sum_sq += g * g;
  }
  est.correction = detail::scale_factor(flip * est.naive_value, sum.value(), sum_sq.value());
  est.debiased_value = est.correction * est.naive_value;
  est.bootstrap_values = std::move(values);
  return est;
}

template <class Point, ResampleSource Source>
BasicDebiasEstimate<Point> scale_debias(const BasicObjective<Point>& f, const Source& source,
                                        const BootstrapPlan& plan) {
  return scale_debias(f, source, plan, RandomStream(plan.seed));
}

enum class CovarianceDenominator {
  sample,   // 1/(n-1)
  plug_in,  // 1/n
};

/// ĉ = -(1/(2n)) tr(Ĉ H) with H the analytic Hessian at x̄.
inline DebiasEstimate covariance_debias(const Objective& f, const ObservationSet& set,
                                        CovarianceDenominator denom = CovarianceDenominator::sample) {
  require(set.kind() == ObservationKind::euclidean, ErrorKind::unsupported,
          f.name + ": covariance debiasing needs Euclidean observations");
  if (!f.has_hessian()) throw Error(ErrorKind::unsupported, f.name + ": covariance debiasing needs a Hessian oracle");
  const std::size_t n = set.size();
  if (denom == CovarianceDenominator::sample && n < 2)
    throw Error(ErrorKind::contract, "covariance debias: sample covariance needs n >= 2");

  DebiasEstimate est;
  est.method = Method::covariance;
  est.mean_observation = set.mean();
  est.naive_value = detail::checked_eval(f, est.mean_observation, "sample mean");
  const Vector& xbar = coords_of(est.mean_observation);
  const Matrix h = f.hessian(xbar);
  require(h.allFinite(), ErrorKind::numeric, f.name + ": non-finite Hessian at the sample mean");

  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector dev = coords_of(set[i]) - xbar;
    acc += dev.dot(h * dev);
  }
  const double nn = static_cast<double>(n);
  const double cov_scale = denom == CovarianceDenominator::sample ? nn - 1.0 : nn;
  est.correction = -acc.value() / (2.0 * nn * cov_scale);
  est.debiased_value = est.naive_value + est.correction;
  return est;
}

inline constexpr std::uint64_t kMaxEnumeratedResamples = 1000000;

/// Visits every distinct resample mean of m draws with replacement together
/// with its exact probability (multinomial coefficient / n^m).
template <class Visitor>
void for_each_resample(const ObservationSet& set, std::size_t m, Visitor&& visit) {
  const std::size_t n = set.size();
  if (m == 0) m = n;
  double total = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    total *= static_cast<double>(n);
    if (total > static_cast<double>(kMaxEnumeratedResamples))
      throw Error(ErrorKind::contract, "exact enumeration: n^m exceeds 1e6 resample draws");
  }
  require(m <= 20, ErrorKind::contract, "exact enumeration: m must be at most 20");

  std::vector<std::uint32_t> counts(n, 0);
  // counts[0..i) are fixed; `remaining` draws left; `coef` is the multinomial
  // coefficient of the fixed prefix.
  auto recurse = [&](auto&& self, std::size_t i, std::size_t remaining, std::uint64_t coef) -> void {
    if (i + 1 == n) {
      counts[i] = static_cast<std::uint32_t>(remaining);
      visit(set.weighted_mean(counts), static_cast<double>(coef) / total);
      return;
    }
    std::uint64_t binom = 1;  // C(remaining, c)
    for (std::size_t c = 0; c <= remaining; ++c) {
      counts[i] = static_cast<std::uint32_t>(c);
      self(self, i + 1, remaining - c, coef * binom);
      binom = binom * (remaining - c) / (c + 1);
    }
  };
  recurse(recurse, 0, m, 1);
}

/// E over the resampling distribution of fn(x̃).
template <class Fn>
double exact_resample_expectation(const ObservationSet& set, std::size_t m, Fn&& fn) {
  CompensatedSum acc;
  for_each_resample(set, m, [&](const Observation& mean, double prob) { acc += prob * fn(mean); });
  return acc.value();
}

enum class ExactMode { shift, scale };

/// Shift or scale correction with the bootstrap average replaced by the
/// exact expectation over all n^m resample draws.
inline DebiasEstimate exact_expectation_debias(const Objective& f, const ObservationSet& set, ExactMode mode,
                                               std::size_t m = 0) {
  if (mode == ExactMode::scale && f.sign == SignConstraint::none)
    throw Error(ErrorKind::unsupported, f.name + ": scaling requires a sign-definite objective");
  DebiasEstimate est;
  est.method = mode == ExactMode::shift ? Method::shift_bootstrap : Method::scale_bootstrap;
  est.mean_observation = set.mean();
  est.naive_value = detail::checked_eval(f, est.mean_observation, "sample mean");
  const double flip = f.sign == SignConstraint::negative ? -1.0 : 1.0;
  CompensatedSum ef, ef2;
  std::size_t index = 0;
  for_each_resample(set, m, [&](const Observation& mean, double prob) {
    const double v = flip * detail::checked_eval(f, mean, "enumerated resample " + std::to_string(index++));
    ef += prob * v;
    ef2 += prob * v * v;
  });
  if (mode == ExactMode::shift) {
    est.correction = est.naive_value - flip * ef.value();
    est.debiased_value = est.naive_value + est.correction;
  } else {
    est.correction = detail::scale_factor(flip * est.naive_value, ef.value(), ef2.value());
    est.debiased_value = est.correction * est.naive_value;
  }
  return est;
}

}  // namespace debias
