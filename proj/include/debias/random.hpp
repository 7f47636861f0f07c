#pragma once

// Splittable counter-based random streams.
//
// A stream is identified by (origin_seed, path). Its draws are the outputs of
// Philox4x32-10 keyed by the seed, with a 128-bit counter whose upper 64 bits
// hold a hash of the split path and whose lower 64 bits count blocks. Every
// transform below is fixed so sequences are portable:
//   uniform()        (u64 >> 11) * 2^-53, in [0, 1)
//   uniform_open()   ((u64 >> 11) + 0.5) * 2^-53, in (0, 1)
//   uniform_index(n) Lemire multiply-shift with rejection on the low word
//   gaussian()       Box-Muller cosine branch, two uniform_open() per draw
//   exponential(r)   -log(uniform_open()) / r
//   gamma(k, s)      Marsaglia-Tsang squeeze, boosted by u^(1/k) when k < 1
//   dirichlet(a, d)  d gamma(a, 1) draws, normalized
//   categorical(p)   inverse CDF on a single uniform()

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "debias/error.hpp"

namespace debias {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t kRootPathHash = 0x6A09E667F3BCC909ull;

inline constexpr std::uint64_t extend_path_hash(std::uint64_t h, std::uint64_t index) noexcept {
  return splitmix64(h ^ splitmix64(index ^ 0xA5A5A5A5A5A5A5A5ull));
}

using PhiloxBlock = std::array<std::uint32_t, 4>;

inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

}  // namespace detail

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : seed_(seed), path_hash_(detail::kRootPathHash) {}

  std::uint64_t origin_seed() const noexcept { return seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  /// Child stream for `index`. Depends only on (origin_seed, path), never on
  /// how many draws this stream has produced.
  RandomStream split(std::uint64_t index) const {
    RandomStream child(seed_);
    child.path_ = path_;
    child.path_.push_back(index);
    child.path_hash_ = detail::extend_path_hash(path_hash_, index);
    return child;
  }

  std::uint64_t next_u64() noexcept {
    if (buffered_ == 0) refill();
    --buffered_;
    return buffer_[buffered_];
  }

  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    require(n >= 1, ErrorKind::contract, "uniform_index: n must be positive");
    unsigned __int128 prod = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        prod = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

  double gaussian() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential(double rate) {
    require(rate > 0.0 && std::isfinite(rate), ErrorKind::contract, "exponential: rate must be positive");
    return -std::log(uniform_open()) / rate;
  }

  double gamma(double shape, double scale) {
    require(shape > 0.0 && std::isfinite(shape), ErrorKind::contract, "gamma: shape must be positive");
    require(scale > 0.0 && std::isfinite(scale), ErrorKind::contract, "gamma: scale must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(uniform_open(), 1.0 / shape);
      return gamma(shape + 1.0, scale) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double z, v;
      do {
        z = gaussian();
        v = 1.0 + c * z;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * z * z * z * z) return d * v * scale;
      if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  /// Index drawn with probabilities proportional to `weights`.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      require(w >= 0.0 && std::isfinite(w), ErrorKind::contract, "categorical: weights must be nonnegative");
      total += w;
    }
    require(total > 0.0, ErrorKind::contract, "categorical: weights sum to zero");
    const double target = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      acc += weights[i];
      if (target < acc) return i;
    }
    return last_positive;
  }

  Eigen::VectorXd dirichlet(double alpha, std::size_t dim) {
    require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::contract, "dirichlet: alpha must be positive");
    require(dim >= 1, ErrorKind::contract, "dirichlet: dimension must be positive");
    Eigen::VectorXd g(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = gamma(alpha, 1.0);
    const double total = g.sum();
    if (!(total > 0.0)) {
      // every gamma draw underflowed (tiny alpha): collapse onto one vertex
      g.setZero();
      g[static_cast<Eigen::Index>(uniform_index(dim))] = 1.0;
      return g;
    }
    return g / total;
  }

 private:
  void refill() noexcept {
    const detail::PhiloxBlock ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(path_hash_),
                                  static_cast<std::uint32_t>(path_hash_ >> 32)};
    const auto out = detail::philox4x32_10(
        ctr, {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    ++block_;
    // consumed back to front by next_u64
    buffer_[1] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[0] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
  }

  std::uint64_t seed_;
  std::uint64_t path_hash_;
  std::vector<std::uint64_t> path_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Multinomial(m; 1/n, ..., 1/n) counts.
struct ResampleCounts {
  std::vector<std::uint32_t> counts;

  std::uint64_t total() const noexcept {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

inline ResampleCounts draw_counts(std::size_t n, std::size_t m, RandomStream& stream) {
  require(n >= 1 && m >= 1, ErrorKind::contract, "draw_counts: n and m must be positive");
  ResampleCounts out{std::vector<std::uint32_t>(n, 0)};
  for (std::size_t i = 0; i < m; ++i) ++out.counts[stream.uniform_index(n)];
  return out;
}

// Standard distributions accepted by sample().
namespace dist {
struct Gaussian {
  std::size_t dim = 1;
};
struct Exponential {
  double rate = 1.0;
  std::size_t dim = 1;
};
struct Gamma {
  double shape = 1.0;
  double scale = 1.0;
  std::size_t dim = 1;
};
struct Dirichlet {
  double alpha = 1.0;
  std::size_t dim = 2;
};
/// Draws are returned one-hot.
struct Categorical {
  std::vector<double> probs;
};
}  // namespace dist

using StandardDistribution =
    std::variant<dist::Gaussian, dist::Exponential, dist::Gamma, dist::Dirichlet, dist::Categorical>;

inline Eigen::VectorXd sample(const StandardDistribution& d, RandomStream& stream) {
  struct Visitor {
    RandomStream& s;
    Eigen::VectorXd operator()(const dist::Gaussian& g) const {
      Eigen::VectorXd v(static_cast<Eigen::Index>(g.dim));
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = s.gaussian();
      return v;
    }
    Eigen::VectorXd operator()(const dist::Exponential& e) const {
      Eigen::VectorXd v(static_cast<Eigen::Index>(e.dim));
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = s.exponential(e.rate);
      return v;
    }
    Eigen::VectorXd operator()(const dist::Gamma& g) const {
      Eigen::VectorXd v(static_cast<Eigen::Index>(g.dim));
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = s.gamma(g.shape, g.scale);
      return v;
    }
    Eigen::VectorXd operator()(const dist::Dirichlet& d) const { return s.dirichlet(d.alpha, d.dim); }
    Eigen::VectorXd operator()(const dist::Categorical& c) const {
      double total = 0.0;
      for (double p : c.probs) total += p;
      require(std::fabs(total - 1.0) <= 1e-9, ErrorKind::contract, "categorical: probabilities must sum to 1");
      Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.probs.size()));
      v[static_cast<Eigen::Index>(s.categorical(c.probs))] = 1.0;
      return v;
    }
  };
  return std::visit(Visitor{stream}, d);
}

}  // namespace debias
