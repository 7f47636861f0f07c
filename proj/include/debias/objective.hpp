#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "debias/error.hpp"
#include "debias/linalg.hpp"
#include "debias/observation.hpp"

namespace debias {

enum class SignConstraint { none, positive, negative };
enum class Curvature { convex, concave };

/// An evaluatable F with optional derivative oracles.
///
/// Derivative oracles act on Euclidean coordinates only. Concave objectives
/// are debiased through G = -F; every reported quantity stays in F's frame.
template <class Point>
struct BasicObjective {
  using point_type = Point;

  std::string name;
  std::function<double(const Point&)> evaluate;
  std::function<bool(const Point&)> domain_check;  // empty: whole space
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  std::function<SymmetricTensor3(const Vector&)> third_derivative;
  SignConstraint sign = SignConstraint::none;
  Curvature curvature = Curvature::convex;

  bool has_gradient() const noexcept { return static_cast<bool>(gradient); }
  bool has_hessian() const noexcept { return static_cast<bool>(hessian); }
  bool has_third_derivative() const noexcept { return static_cast<bool>(third_derivative); }

  bool in_domain(const Point& x) const { return !domain_check || domain_check(x); }

  /// Evaluates with the domain guard and a finiteness check.
  double operator()(const Point& x) const {
    require(in_domain(x), ErrorKind::domain, name + ": point outside the domain");
    const double v = evaluate(x);
    require(std::isfinite(v), ErrorKind::numeric, name + ": non-finite value");
    return v;
  }
};

using Objective = BasicObjective<Observation>;
using PairObjective = BasicObjective<EmpiricalPair>;

/// Lifts a function of Euclidean coordinates to an Objective.
inline std::function<double(const Observation&)> on_coords(std::function<double(const Vector&)> f) {
  return [f = std::move(f)](const Observation& o) { return f(coords_of(o)); };
}

}  // namespace debias
