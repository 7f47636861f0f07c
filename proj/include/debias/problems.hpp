#pragma once

// The seven benchmark families: objectives, ground-truth generators and
// noise models.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "debias/debias.hpp"
#include "debias/error.hpp"
#include "debias/linalg.hpp"
#include "debias/objective.hpp"
#include "debias/observation.hpp"
#include "debias/random.hpp"
#include "debias/transport.hpp"

namespace debias {

enum class ProblemId { P1 = 1, P2, P3, P4, P5, P6, P7 };

inline const std::vector<ProblemId>& all_problems() {
  static const std::vector<ProblemId> ids{ProblemId::P1, ProblemId::P2, ProblemId::P3, ProblemId::P4,
                                          ProblemId::P5, ProblemId::P6, ProblemId::P7};
  return ids;
}

inline std::string to_string(ProblemId id) { return "P" + std::to_string(static_cast<int>(id)); }

inline ProblemId parse_problem_id(const std::string& s) {
  for (auto id : all_problems())
    if (s == to_string(id)) return id;
  throw Error(ErrorKind::config, "unknown problem '" + s + "' (expected one of P1, P2, P3, P4, P5, P6, P7)");
}

using ParamMap = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// Objectives

/// F(x) = xᵀAx
inline Objective p1_quadratic(const Matrix& a) {
  require(is_spd(a), ErrorKind::contract, "p1_quadratic: A must be SPD");
  Objective f;
  f.name = "quadratic";
  f.evaluate = on_coords([a](const Vector& x) { return x.dot(a * x); });
  f.gradient = [a](const Vector& x) -> Vector { return 2.0 * (a * x); };
  f.hessian = [a](const Vector&) -> Matrix { return 2.0 * a; };
  f.third_derivative = [d = static_cast<std::size_t>(a.rows())](const Vector&) { return SymmetricTensor3(d); };
  f.sign = SignConstraint::positive;
  return f;
}

/// F(x) = (xᵀAx)²
inline Objective p2_quartic(const Matrix& a) {
  require(is_spd(a), ErrorKind::contract, "p2_quartic: A must be SPD");
  Objective f;
  f.name = "quartic";
  f.evaluate = on_coords([a](const Vector& x) {
    const double q = x.dot(a * x);
    return q * q;
  });
  f.gradient = [a](const Vector& x) -> Vector {
    const Vector ax = a * x;
    return 4.0 * x.dot(ax) * ax;
  };
  f.hessian = [a](const Vector& x) -> Matrix {
    const Vector ax = a * x;
    return 8.0 * ax * ax.transpose() + 4.0 * x.dot(ax) * a;
  };
  // ∂³F_abc = 8 (A_ab (Ax)_c + A_ac (Ax)_b + A_bc (Ax)_a)
  f.third_derivative = [a](const Vector& x) {
    const Vector ax = a * x;
    const auto d = static_cast<std::size_t>(a.rows());
    SymmetricTensor3 t(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k) {
          const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j),
                     K = static_cast<Eigen::Index>(k);
          t(i, j, k) = 8.0 * (a(I, J) * ax[K] + a(I, K) * ax[J] + a(J, K) * ax[I]);
        }
    return t;
  };
  f.sign = SignConstraint::positive;
  return f;
}

/// F(x) = Σ (bᵢxᵢ + cᵢ/xᵢ) on the open positive orthant.
inline Objective p3_rational(const Vector& b, const Vector& c) {
  require(b.size() == c.size() && b.size() >= 1, ErrorKind::contract, "p3_rational: b and c must match in size");
  require(b.minCoeff() > 0.0 && c.minCoeff() > 0.0, ErrorKind::contract, "p3_rational: b and c must be positive");
  Objective f;
  f.name = "rational";
  auto in_domain = [d = b.size()](const Vector& x) {
    if (x.size() != d) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x[i] >= std::numeric_limits<double>::min()) || !std::isfinite(x[i])) return false;
    return true;
  };
  f.domain_check = [in_domain](const Observation& o) {
    return std::holds_alternative<EuclideanPoint>(o) && in_domain(std::get<EuclideanPoint>(o).coords);
  };
  f.evaluate = on_coords([b, c, in_domain](const Vector& x) {
    require(in_domain(x), ErrorKind::domain, "rational: x must be positive componentwise");
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += b[i] * x[i] + c[i] / x[i];
    return s;
  });
  f.gradient = [b, c](const Vector& x) -> Vector { return b - c.cwiseQuotient(x.cwiseProduct(x)); };
  f.hessian = [c](const Vector& x) -> Matrix {
    return (2.0 * c.cwiseQuotient(x.cwiseProduct(x).cwiseProduct(x))).asDiagonal();
  };
  f.third_derivative = [c](const Vector& x) {
    const auto d = static_cast<std::size_t>(x.size());
    SymmetricTensor3 t(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = x[static_cast<Eigen::Index>(i)];
      t(i, i, i) = -6.0 * c[static_cast<Eigen::Index>(i)] / (xi * xi * xi * xi);
    }
    return t;
  };
  f.sign = SignConstraint::positive;
  return f;
}

/// Reads a d²-vector as a d x d matrix (column-major).
inline Matrix unflatten_square(const Vector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  require(d * d == v.size(), ErrorKind::contract, "matrix observation: length is not a perfect square");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

inline Vector flatten_square(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

/// F(A) = min_x ½xᵀAx + bᵀx = -½ bᵀA⁻¹b over SPD matrices flattened to d² vectors.
inline Objective p4_opt_value(const Vector& b) {
  Objective f;
  f.name = "opt_value";
  const auto d = b.size();
  f.domain_check = [d](const Observation& o) {
    if (!std::holds_alternative<EuclideanPoint>(o)) return false;
    const Vector& v = std::get<EuclideanPoint>(o).coords;
    if (v.size() != d * d) return false;
    return is_spd(unflatten_square(v));
  };
  f.evaluate = on_coords([b](const Vector& v) { return -0.5 * b.dot(cholesky_solve(unflatten_square(v), b)); });
  f.sign = SignConstraint::negative;
  f.curvature = Curvature::concave;
  return f;
}

/// F(b) = min xᵀBx s.t. Ax = b.
inline Objective p5_constraint_value(const Matrix& bmat, const Matrix& a) {
  auto system = std::make_shared<const KktSystem>(bmat, a);
  const Matrix curvature = system->value_curvature();
  Objective f;
  f.name = "constraint_value";
  f.evaluate = on_coords([system](const Vector& b) { return system->solve(b).value; });
  f.gradient = [curvature](const Vector& b) -> Vector { return 2.0 * (curvature * b); };
  f.hessian = [curvature](const Vector&) -> Matrix { return 2.0 * curvature; };
  f.third_derivative = [d = static_cast<std::size_t>(a.rows())](const Vector&) { return SymmetricTensor3(d); };
  f.sign = SignConstraint::positive;
  return f;
}

inline double entropy(const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

/// H(p) = -Σ pᵢ ln pᵢ on the probability simplex (0 ln 0 = 0).
inline Objective p6_entropy(std::size_t d) {
  require(d >= 2, ErrorKind::contract, "p6_entropy: d must be at least 2");
  Objective f;
  f.name = "entropy";
  auto on_simplex = [d](const Vector& p) {
    if (static_cast<std::size_t>(p.size()) != d || !p.allFinite()) return false;
    return p.minCoeff() >= -1e-9 && std::fabs(p.sum() - 1.0) <= 1e-9;
  };
  f.domain_check = [on_simplex](const Observation& o) {
    return std::holds_alternative<EuclideanPoint>(o) && on_simplex(std::get<EuclideanPoint>(o).coords);
  };
  f.evaluate = on_coords([on_simplex](const Vector& p) {
    require(on_simplex(p), ErrorKind::domain, "entropy: p is not a probability vector");
    return entropy(p);
  });
  // diag(-1/pᵢ) on the support; coordinates without mass carry no curvature
  f.hessian = [](const Vector& p) -> Matrix {
    Vector diag = Vector::Zero(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) diag[i] = -1.0 / p[i];
    return diag.asDiagonal();
  };
  f.sign = SignConstraint::positive;
  f.curvature = Curvature::concave;
  return f;
}

/// W₂²(p, q) as the value of the discrete transport LP.
inline PairObjective p7_wasserstein() {
  PairObjective f;
  f.name = "wasserstein2";
  f.domain_check = [](const EmpiricalPair& pq) { return !pq.p.support.empty() && !pq.q.support.empty(); };
  f.evaluate = [](const EmpiricalPair& pq) { return wasserstein2_squared(pq.p, pq.q); };
  f.sign = SignConstraint::positive;
  return f;
}

// ---------------------------------------------------------------------------
// Noise models

namespace noise {
struct IsotropicGaussian {
  Vector mean;
  double sigma = 1.0;
};
/// Independent exponentials with the given means (rates 1/meanᵢ).
struct CoordinateExponential {
  Vector means;
};
/// U diag(ξ λ) Uᵀ with ξᵢ ~ Gamma(k, 1/k), flattened.
struct GammaEigen {
  double k_shape = 1.0;
  Matrix u;
  Vector lambda;
};
/// One-hot vectors eᵢ with probability pᵢ.
struct CategoricalOneHot {
  Vector p;
};
/// Independent Gaussian Dirac samples of two distributions.
struct IidDiracPair {
  Vector mean_p, mean_q;
  double sigma = 1.0;
  std::size_t n = 10, m = 10;
};
}  // namespace noise

using NoiseModel = std::variant<noise::IsotropicGaussian, noise::CoordinateExponential, noise::GammaEigen,
                                noise::CategoricalOneHot, noise::IidDiracPair>;

/// Analytic mean of a single-observation noise model.
inline Vector noise_mean(const NoiseModel& model) {
  struct Visitor {
    Vector operator()(const noise::IsotropicGaussian& g) const { return g.mean; }
    Vector operator()(const noise::CoordinateExponential& e) const { return e.means; }
    Vector operator()(const noise::GammaEigen& g) const { return flatten_square(compose_spectral(g.u, g.lambda)); }
    Vector operator()(const noise::CategoricalOneHot& c) const { return c.p; }
    Vector operator()(const noise::IidDiracPair&) const {
      throw Error(ErrorKind::contract, "noise_mean: paired model has no single mean vector");
    }
  };
  return std::visit(Visitor{}, model);
}

/// One observation from a single-observation noise model.
inline Vector draw_noisy(const NoiseModel& model, RandomStream& s) {
  struct Visitor {
    RandomStream& s;
    Vector operator()(const noise::IsotropicGaussian& g) const {
      Vector z = sample(dist::Gaussian{static_cast<std::size_t>(g.mean.size())}, s);
      return g.mean + g.sigma * z;
    }
    Vector operator()(const noise::CoordinateExponential& e) const {
      Vector v(e.means.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = s.exponential(1.0 / e.means[i]);
      return v;
    }
    Vector operator()(const noise::GammaEigen& g) const {
      Vector scaled(g.lambda.size());
      for (Eigen::Index i = 0; i < scaled.size(); ++i) scaled[i] = s.gamma(g.k_shape, 1.0 / g.k_shape) * g.lambda[i];
      return flatten_square(compose_spectral(g.u, scaled));
    }
    Vector operator()(const noise::CategoricalOneHot& c) const {
      Vector v = Vector::Zero(c.p.size());
      v[static_cast<Eigen::Index>(s.categorical(std::span<const double>(c.p.data(), static_cast<std::size_t>(c.p.size()))))] = 1.0;
      return v;
    }
    Vector operator()(const noise::IidDiracPair&) const {
      throw Error(ErrorKind::contract, "draw_noisy: paired model draws whole sets");
    }
  };
  return std::visit(Visitor{s}, model);
}

// ---------------------------------------------------------------------------
// Instances

/// Two isotropic Gaussians N(mean_p, σ²I), N(mean_q, σ²I).
struct GaussianPair {
  Vector mean_p, mean_q;
  double sigma = 1.0;
};

using Dataset = std::variant<ObservationSet, PairedDiracSet>;
using AnyObjective = std::variant<Objective, PairObjective>;

struct ProblemInstance {
  ProblemId id = ProblemId::P1;
  ParamMap params;
  AnyObjective objective;
  std::variant<Observation, GaussianPair> truth_input;
  double truth_value = 0.0;
  NoiseModel noise;
  std::vector<Method> methods;  // applicable built-in methods
  CovarianceDenominator covariance_denominator = CovarianceDenominator::sample;

  bool supports(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }
};

struct ProblemPreset {
  ParamMap params;
  std::size_t n = 10;
  std::size_t k = 10;
};

/// Parameter names accepted by each family.
inline const std::vector<std::string>& parameter_names(ProblemId id) {
  static const std::map<ProblemId, std::vector<std::string>> names{
      {ProblemId::P1, {"d", "kappa", "sigma", "xstar_norm2"}},
      {ProblemId::P2, {"d", "kappa", "sigma", "xstar_norm2"}},
      {ProblemId::P3, {"d", "xstar_norm2", "b_norm", "c_norm"}},
      {ProblemId::P4, {"d", "kappa", "k_shape"}},
      {ProblemId::P5, {"d", "p_dim", "ratio_dp", "sigma", "kappa"}},
      {ProblemId::P6, {"d", "alpha", "n_ratio"}},
      {ProblemId::P7, {"d", "mu2_norm", "sigma", "m_samples"}},
  };
  return names.at(id);
}

/// Desk-scale defaults (dimensions shrunk from the figure settings; n and K kept).
inline ProblemPreset default_preset(ProblemId id) {
  switch (id) {
    case ProblemId::P1:
    case ProblemId::P2:
      return {{{"d", 20}, {"kappa", 2}, {"sigma", 1}, {"xstar_norm2", 2}}, 10, 10};
    case ProblemId::P3:
      return {{{"d", 20}, {"xstar_norm2", 2}, {"b_norm", 1}, {"c_norm", 1}}, 10, 10};
    case ProblemId::P4:
      return {{{"d", 10}, {"kappa", 2}, {"k_shape", 1}}, 10, 100};
    case ProblemId::P5:
      return {{{"d", 20}, {"p_dim", 0}, {"ratio_dp", 0.5}, {"sigma", 1}, {"kappa", 2}}, 10, 100};
    case ProblemId::P6:
      return {{{"d", 30}, {"alpha", 1}, {"n_ratio", 5}}, 150, 100};
    case ProblemId::P7:
      return {{{"d", 5}, {"mu2_norm", 1}, {"sigma", 1}, {"m_samples", 0}}, 10, 50};
  }
  throw Error(ErrorKind::config, "unknown problem");
}

inline bool is_parameter(ProblemId id, const std::string& name) {
  const auto& names = parameter_names(id);
  return std::find(names.begin(), names.end(), name) != names.end();
}

/// Sets one parameter, rejecting names outside the family schema. Sweeping
/// ratio_dp with a fixed p_dim moves d instead of p.
inline void apply_param(ProblemId id, ParamMap& params, const std::string& name, double value) {
  if (!is_parameter(id, name)) {
    std::string valid;
    for (const auto& n : parameter_names(id)) valid += (valid.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::config, "parameter '" + name + "' is not valid for " + to_string(id) + " (valid: " + valid + ")");
  }
  params[name] = value;
  if (id == ProblemId::P5 && name == "ratio_dp" && params.count("p_dim") && params.at("p_dim") > 0)
    params["d"] = std::max(1.0, std::round(value * params.at("p_dim")));
}

/// Observation count implied by the parameters (P6 ties n to n_ratio * d).
inline std::size_t implied_n(ProblemId id, const ParamMap& params, std::size_t fallback) {
  if (id == ProblemId::P6 && params.count("n_ratio") && params.count("d"))
    return static_cast<std::size_t>(std::max(1.0, std::round(params.at("n_ratio") * params.at("d"))));
  return fallback;
}

namespace detail {

inline double param(const ParamMap& p, const std::string& name) {
  auto it = p.find(name);
  require(it != p.end(), ErrorKind::config, "missing parameter '" + name + "'");
  return it->second;
}

inline std::size_t int_param(const ParamMap& p, const std::string& name, double lo) {
  const double v = param(p, name);
  require(v >= lo && std::floor(v) == v, ErrorKind::config,
          "parameter '" + name + "' must be an integer >= " + format_double(lo));
  return static_cast<std::size_t>(v);
}

inline double positive_param(const ParamMap& p, const std::string& name) {
  const double v = param(p, name);
  require(v > 0.0 && std::isfinite(v), ErrorKind::config, "parameter '" + name + "' must be positive");
  return v;
}

inline Vector random_direction(std::size_t d, RandomStream& s) {
  for (;;) {
    Vector g = sample(dist::Gaussian{d}, s);
    const double norm = g.norm();
    if (norm > 1e-12) return g / norm;
  }
}

// Entries uniform in [0.5, 1.5], normalized to unit length.
inline Vector positive_direction(std::size_t d, RandomStream& s) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 0.5 + s.uniform();
  return v / v.norm();
}

}  // namespace detail

/// Builds an instance of family `id`; missing parameters come from the preset.
inline ProblemInstance generate_instance(ProblemId id, ParamMap params, const RandomStream& stream) {
  for (const auto& [name, value] : default_preset(id).params) params.try_emplace(name, value);
  for (const auto& [name, value] : params)
    require(is_parameter(id, name), ErrorKind::config, "parameter '" + name + "' is not valid for " + to_string(id));
  using namespace detail;
  ProblemInstance inst;
  inst.id = id;
  inst.params = params;
  RandomStream s_matrix = stream.split(0);
  RandomStream s_truth = stream.split(1);
  RandomStream s_extra = stream.split(2);

  switch (id) {
    case ProblemId::P1:
    case ProblemId::P2: {
      const std::size_t d = int_param(params, "d", 1);
      const Matrix a = spd_with_condition(d, param(params, "kappa"), s_matrix);
      const Vector xstar = std::sqrt(std::max(0.0, param(params, "xstar_norm2"))) * random_direction(d, s_truth);
      inst.objective = id == ProblemId::P1 ? p1_quadratic(a) : p2_quartic(a);
      inst.truth_input = Observation{EuclideanPoint{xstar}};
      inst.noise = noise::IsotropicGaussian{xstar, positive_param(params, "sigma")};
      inst.methods = {Method::shift_bootstrap, Method::scale_bootstrap, Method::covariance};
      break;
    }
    case ProblemId::P3: {
      const std::size_t d = int_param(params, "d", 1);
      const Vector b = positive_param(params, "b_norm") * positive_direction(d, s_matrix);
      const Vector c = positive_param(params, "c_norm") * positive_direction(d, s_extra);
      const Vector xstar = std::sqrt(positive_param(params, "xstar_norm2")) * positive_direction(d, s_truth);
      inst.objective = p3_rational(b, c);
      inst.truth_input = Observation{EuclideanPoint{xstar}};
      inst.noise = noise::CoordinateExponential{xstar};
      inst.methods = {Method::shift_bootstrap, Method::scale_bootstrap, Method::covariance};
      break;
    }
    case ProblemId::P4: {
      const std::size_t d = int_param(params, "d", 1);
      const auto spectral = spd_with_condition_spectral(d, param(params, "kappa"), s_matrix);
      const Vector b = random_direction(d, s_truth);
      inst.objective = p4_opt_value(b);
      inst.truth_input = Observation{EuclideanPoint{flatten_square(spectral.matrix)}};
      inst.noise = noise::GammaEigen{positive_param(params, "k_shape"), spectral.q, spectral.lambda};
      inst.methods = {Method::shift_bootstrap, Method::scale_bootstrap};
      break;
    }
    case ProblemId::P5: {
      const std::size_t d = int_param(params, "d", 1);
      std::size_t p = int_param(params, "p_dim", 0);
      if (p == 0) p = static_cast<std::size_t>(std::max(1.0, std::round(static_cast<double>(d) / positive_param(params, "ratio_dp"))));
      require(d <= p, ErrorKind::config, "P5: need d <= p (got d=" + std::to_string(d) + ", p=" + std::to_string(p) + ")");
      inst.params["p_dim"] = static_cast<double>(p);
      const Matrix bmat = spd_with_condition(p, param(params, "kappa"), s_matrix);
      Matrix a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(p));
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = s_extra.gaussian();
      const Vector bstar = random_direction(d, s_truth);
      inst.objective = p5_constraint_value(bmat, a);
      inst.truth_input = Observation{EuclideanPoint{bstar}};
      inst.noise = noise::IsotropicGaussian{bstar, positive_param(params, "sigma")};
      inst.methods = {Method::shift_bootstrap, Method::scale_bootstrap, Method::covariance};
      break;
    }
    case ProblemId::P6: {
      const std::size_t d = int_param(params, "d", 2);
      const Vector pstar = s_truth.dirichlet(positive_param(params, "alpha"), d);
      positive_param(params, "n_ratio");
      inst.objective = p6_entropy(d);
      inst.truth_input = Observation{EuclideanPoint{pstar}};
      inst.noise = noise::CategoricalOneHot{pstar};
      inst.methods = {Method::shift_bootstrap, Method::scale_bootstrap, Method::covariance};
      inst.covariance_denominator = CovarianceDenominator::plug_in;
      break;
    }
    case ProblemId::P7: {
      const std::size_t d = int_param(params, "d", 1);
      require(d <= 32, ErrorKind::config, "P7: d is capped at 32");
      int_param(params, "m_samples", 0);
      const Vector mu1 = Vector::Zero(static_cast<Eigen::Index>(d));
      const Vector mu2 = std::max(0.0, param(params, "mu2_norm")) * random_direction(d, s_truth);
      const double sigma = positive_param(params, "sigma");
      inst.objective = p7_wasserstein();
      inst.truth_input = GaussianPair{mu1, mu2, sigma};
      // equal isotropic covariances: W₂² reduces to the squared mean gap
      inst.truth_value = (mu1 - mu2).squaredNorm();
      inst.noise = noise::IidDiracPair{mu1, mu2, sigma, 0, 0};
      inst.methods = {Method::shift_bootstrap, Method::scale_bootstrap};
      return inst;
    }
  }
  inst.truth_value = std::get<Objective>(inst.objective)(std::get<Observation>(inst.truth_input));
  return inst;
}

/// n i.i.d. observations from the instance noise model. For P7, n is the
/// size of the first sample and m_samples (0: same as n) of the second.
inline Dataset sample_observations(const ProblemInstance& inst, std::size_t n, const RandomStream& stream) {
  require(n >= 1, ErrorKind::contract, "sample_observations: n must be positive");
  if (const auto* pair = std::get_if<noise::IidDiracPair>(&inst.noise)) {
    std::size_t m = n;
    if (auto it = inst.params.find("m_samples"); it != inst.params.end() && it->second > 0)
      m = static_cast<std::size_t>(it->second);
    const auto d = static_cast<std::size_t>(pair->mean_p.size());
    RandomStream sx = stream.split(0), sy = stream.split(1);
    std::vector<Vector> xs, ys;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(pair->mean_p + pair->sigma * sample(dist::Gaussian{d}, sx));
    for (std::size_t j = 0; j < m; ++j) ys.push_back(pair->mean_q + pair->sigma * sample(dist::Gaussian{d}, sy));
    return PairedDiracSet(ObservationSet::diracs(xs), ObservationSet::diracs(ys));
  }
  std::vector<Vector> points;
  points.reserve(n);
  RandomStream s = stream;
  for (std::size_t i = 0; i < n; ++i) points.push_back(draw_noisy(inst.noise, s));
  return ObservationSet::from_points(points);
}

}  // namespace debias
