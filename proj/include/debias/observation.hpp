#pragma once

// Averageable observations: Euclidean points and weighted empirical
// distributions (Dirac observations are the one-atom case).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "debias/error.hpp"
#include "debias/linalg.hpp"
#include "debias/random.hpp"

namespace debias {

struct EuclideanPoint {
  Vector coords;
};

struct WeightedEmpirical {
  std::vector<Vector> support;
  std::vector<double> weights;

  static WeightedEmpirical dirac(Vector point) { return {{std::move(point)}, {1.0}}; }

  std::size_t dimension() const { return support.empty() ? 0 : static_cast<std::size_t>(support.front().size()); }

  void validate() const {
    require(!support.empty(), ErrorKind::contract, "empirical distribution: empty support");
    require(support.size() == weights.size(), ErrorKind::contract, "empirical distribution: weights/support size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      require(weights[i] >= 0.0 && std::isfinite(weights[i]), ErrorKind::contract,
              "empirical distribution: negative or non-finite weight");
      require(support[i].size() == support.front().size(), ErrorKind::contract,
              "empirical distribution: support points differ in dimension");
      require(support[i].allFinite(), ErrorKind::contract, "empirical distribution: non-finite support point");
      total += weights[i];
    }
    require(std::fabs(total - 1.0) <= 1e-12, ErrorKind::contract, "empirical distribution: weights do not sum to 1");
  }
};

using Observation = std::variant<EuclideanPoint, WeightedEmpirical>;

enum class ObservationKind { euclidean, empirical };

inline ObservationKind kind_of(const Observation& o) {
  return std::holds_alternative<EuclideanPoint>(o) ? ObservationKind::euclidean : ObservationKind::empirical;
}

inline std::size_t dimension_of(const Observation& o) {
  if (const auto* e = std::get_if<EuclideanPoint>(&o)) return static_cast<std::size_t>(e->coords.size());
  return std::get<WeightedEmpirical>(o).dimension();
}

/// Coordinates of a Euclidean observation; contract error otherwise.
inline const Vector& coords_of(const Observation& o) {
  const auto* e = std::get_if<EuclideanPoint>(&o);
  require(e != nullptr, ErrorKind::contract, "expected a Euclidean observation");
  return e->coords;
}

namespace detail {

struct LexLess {
  bool operator()(const Vector& a, const Vector& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  }
};

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

// Mixture sum_i coeff_i * p_i, merging identical support points in first-seen order.
inline WeightedEmpirical mix(std::span<const WeightedEmpirical* const> parts, std::span<const double> coeff) {
  WeightedEmpirical out;
  std::map<Vector, std::size_t, LexLess> index;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (coeff[i] == 0.0) continue;
    const auto& p = *parts[i];
    for (std::size_t j = 0; j < p.support.size(); ++j) {
      const double w = coeff[i] * p.weights[j];
      auto [it, inserted] = index.try_emplace(p.support[j], out.support.size());
      if (inserted) {
        out.support.push_back(p.support[j]);
        out.weights.push_back(w);
      } else {
        out.weights[it->second] += w;
      }
    }
  }
  return out;
}

}  // namespace detail

/// A nonempty, homogeneous list of observations.
class ObservationSet {
 public:
  using point_type = Observation;

  explicit ObservationSet(std::vector<Observation> observations) : obs_(std::move(observations)) {
    require(!obs_.empty(), ErrorKind::contract, "observation set must be nonempty");
    kind_ = kind_of(obs_.front());
    dim_ = dimension_of(obs_.front());
    require(dim_ >= 1, ErrorKind::contract, "observation dimension must be positive");
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const auto& o = obs_[i];
      require(kind_of(o) == kind_ && dimension_of(o) == dim_, ErrorKind::contract,
              "observation set is heterogeneous at index " + std::to_string(i));
      if (const auto* e = std::get_if<EuclideanPoint>(&o)) {
        require(e->coords.allFinite(), ErrorKind::contract, "non-finite coordinates at index " + std::to_string(i));
      } else {
        std::get<WeightedEmpirical>(o).validate();
      }
    }
  }

  static ObservationSet from_points(const std::vector<Vector>& points) {
    std::vector<Observation> obs;
    obs.reserve(points.size());
    for (const auto& p : points) obs.emplace_back(EuclideanPoint{p});
    return ObservationSet(std::move(obs));
  }

  static ObservationSet diracs(const std::vector<Vector>& points) {
    std::vector<Observation> obs;
    obs.reserve(points.size());
    for (const auto& p : points) obs.emplace_back(WeightedEmpirical::dirac(p));
    return ObservationSet(std::move(obs));
  }

  std::size_t size() const noexcept { return obs_.size(); }
  std::size_t dimension() const noexcept { return dim_; }
  ObservationKind kind() const noexcept { return kind_; }
  const Observation& operator[](std::size_t i) const { return obs_[i]; }
  const std::vector<Observation>& observations() const noexcept { return obs_; }

  /// Euclidean coordinates as an n x d matrix (one row per observation).
  Matrix as_matrix() const {
    require(kind_ == ObservationKind::euclidean, ErrorKind::contract, "as_matrix: set is not Euclidean");
    Matrix m(static_cast<Eigen::Index>(obs_.size()), static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < obs_.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = coords_of(obs_[i]).transpose();
    return m;
  }

  Observation mean() const {
    std::vector<double> coeff(obs_.size(), 1.0 / static_cast<double>(obs_.size()));
    return combine(coeff);
  }

  /// sum_i (counts_i / sum counts) x_i
  Observation weighted_mean(std::span<const std::uint32_t> counts) const {
    require(counts.size() == obs_.size(), ErrorKind::contract, "weighted_mean: counts length mismatch");
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    require(total > 0, ErrorKind::contract, "weighted_mean: counts sum to zero");
    std::vector<double> coeff(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      coeff[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return combine(coeff);
  }

  /// Mean of m draws with replacement (m = 0 means m = n).
  Observation resample_mean(RandomStream& stream, std::size_t m = 0) const {
    const auto rc = draw_counts(obs_.size(), m == 0 ? obs_.size() : m, stream);
    return weighted_mean(rc.counts);
  }

  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const auto& o : obs_) {
      if (const auto* e = std::get_if<EuclideanPoint>(&o)) {
        h = detail::fnv1a(h, e->coords.data(), sizeof(double) * static_cast<std::size_t>(e->coords.size()));
      } else {
        const auto& w = std::get<WeightedEmpirical>(o);
        for (std::size_t j = 0; j < w.support.size(); ++j) {
          h = detail::fnv1a(h, w.support[j].data(), sizeof(double) * static_cast<std::size_t>(w.support[j].size()));
          h = detail::fnv1a(h, &w.weights[j], sizeof(double));
        }
      }
    }
    return h;
  }

 private:
  Observation combine(std::span<const double> coeff) const {
    if (kind_ == ObservationKind::euclidean) {
      Vector acc = Vector::Zero(static_cast<Eigen::Index>(dim_));
      for (std::size_t i = 0; i < obs_.size(); ++i)
        if (coeff[i] != 0.0) acc += coeff[i] * std::get<EuclideanPoint>(obs_[i]).coords;
      return EuclideanPoint{std::move(acc)};
    }
    std::vector<const WeightedEmpirical*> parts;
    parts.reserve(obs_.size());
    for (const auto& o : obs_) parts.push_back(&std::get<WeightedEmpirical>(o));
    return detail::mix(parts, coeff);
  }

  std::vector<Observation> obs_;
  ObservationKind kind_ = ObservationKind::euclidean;
  std::size_t dim_ = 0;
};

inline Observation mean_observation(const ObservationSet& set) { return set.mean(); }

/// A pair of empirical distributions (p, q) on the same space.
struct EmpiricalPair {
  WeightedEmpirical p;
  WeightedEmpirical q;
};

/// Two independent Dirac samples; bootstrap resamples each side on its own.
class PairedDiracSet {
 public:
  using point_type = EmpiricalPair;

  PairedDiracSet(ObservationSet xs, ObservationSet ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
    require(xs_.kind() == ObservationKind::empirical && ys_.kind() == ObservationKind::empirical,
            ErrorKind::contract, "paired set: both sides must be empirical observations");
    require(xs_.dimension() == ys_.dimension(), ErrorKind::contract, "paired set: dimension mismatch");
  }

  const ObservationSet& first() const noexcept { return xs_; }
  const ObservationSet& second() const noexcept { return ys_; }
  std::size_t size() const noexcept { return xs_.size(); }
  std::size_t dimension() const noexcept { return xs_.dimension(); }

  EmpiricalPair mean() const {
    return {std::get<WeightedEmpirical>(xs_.mean()), std::get<WeightedEmpirical>(ys_.mean())};
  }

  /// Each side is resampled at its own size; `m` is ignored.
  EmpiricalPair resample_mean(RandomStream& stream, std::size_t /*m*/ = 0) const {
    RandomStream sx = stream.split(0);
    RandomStream sy = stream.split(1);
    return {std::get<WeightedEmpirical>(xs_.resample_mean(sx)), std::get<WeightedEmpirical>(ys_.resample_mean(sy))};
  }

  std::uint64_t fingerprint() const { return xs_.fingerprint() ^ (ys_.fingerprint() * 0x9E3779B97F4A7C15ull); }

 private:
  ObservationSet xs_;
  ObservationSet ys_;
};

}  // namespace debias
