#pragma once

// Exact discrete optimal transport by the transportation simplex
// (north-west corner start, MODI potentials, cycle pivoting).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "debias/error.hpp"
#include "debias/linalg.hpp"
#include "debias/numeric.hpp"
#include "debias/observation.hpp"

namespace debias {

struct TransportProblem {
  Matrix cost;                 // m x n, nonnegative
  std::vector<double> supply;  // length m
  std::vector<double> demand;  // length n

  static TransportProblem uniform(Matrix cost) {
    const auto m = static_cast<std::size_t>(cost.rows());
    const auto n = static_cast<std::size_t>(cost.cols());
    require(m >= 1 && n >= 1, ErrorKind::contract, "transport: empty cost matrix");
    return {std::move(cost), std::vector<double>(m, 1.0 / static_cast<double>(m)),
            std::vector<double>(n, 1.0 / static_cast<double>(n))};
  }

  void validate() const {
    require(cost.rows() >= 1 && cost.cols() >= 1, ErrorKind::contract, "transport: empty cost matrix");
    require(static_cast<std::size_t>(cost.rows()) == supply.size() &&
                static_cast<std::size_t>(cost.cols()) == demand.size(),
            ErrorKind::contract, "transport: cost/weights shape mismatch");
    require(cost.allFinite() && cost.minCoeff() >= 0.0, ErrorKind::contract,
            "transport: costs must be finite and nonnegative");
    CompensatedSum s, d;
    for (double w : supply) {
      require(w >= 0.0 && std::isfinite(w), ErrorKind::contract, "transport: negative supply");
      s += w;
    }
    for (double w : demand) {
      require(w >= 0.0 && std::isfinite(w), ErrorKind::contract, "transport: negative demand");
      d += w;
    }
    require(std::fabs(s.value() - 1.0) <= 1e-10 && std::fabs(d.value() - 1.0) <= 1e-10, ErrorKind::contract,
            "transport: unbalanced problem (supply and demand must each sum to 1)");
  }
};

struct TransportPlan {
  Matrix coupling;
  double value = 0.0;
  Vector row_potential;  // u
  Vector col_potential;  // v
  std::size_t pivots = 0;

  std::size_t positive_entries() const { return static_cast<std::size_t>((coupling.array() > 0.0).count()); }
};

/// Σ supplyᵢ uᵢ + Σ demandⱼ vⱼ
inline double dual_value(const TransportProblem& problem, const TransportPlan& plan) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < problem.supply.size(); ++i)
    acc += problem.supply[i] * plan.row_potential[static_cast<Eigen::Index>(i)];
  for (std::size_t j = 0; j < problem.demand.size(); ++j)
    acc += problem.demand[j] * plan.col_potential[static_cast<Eigen::Index>(j)];
  return acc.value();
}

namespace detail {

class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, std::vector<double> supply, std::vector<double> demand)
      : cost_(cost), s_(std::move(supply)), d_(std::move(demand)), m_(s_.size()), n_(d_.size()) {
    double scale = 1.0;
    if (cost_.size() > 0) scale = std::max(1.0, cost_.maxCoeff());
    tol_ = 1e-12 * scale;
  }

  void solve() {
    north_west_corner();
    const std::size_t max_pivots = 50 * (m_ + n_) * (m_ + n_) + 1000;
    std::size_t degenerate_streak = 0;
    bool bland = false;
    for (;;) {
      compute_potentials();
      const auto entering = choose_entering(bland);
      if (!entering) break;
      const double theta = pivot(entering->first, entering->second);
      if (theta == 0.0) {
        if (++degenerate_streak > 2 * (m_ + n_)) bland = true;
      } else {
        degenerate_streak = 0;
      }
      require(++pivots_ <= max_pivots, ErrorKind::numeric, "transport: pivot limit exceeded");
    }
  }

  double flow(std::size_t b) const { return flow_[b]; }
  const std::vector<std::pair<std::size_t, std::size_t>>& basis() const { return basis_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }
  std::size_t pivots() const { return pivots_; }

 private:
  void north_west_corner() {
    std::vector<double> rs = s_, rd = d_;
    std::size_t i = 0, j = 0;
    for (;;) {
      const double x = std::min(rs[i], rd[j]);
      basis_.emplace_back(i, j);
      flow_.push_back(x);
      const bool row_done = rs[i] <= rd[j];
      rs[i] -= x;
      rd[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1)
        ++j;
      else if (j == n_ - 1)
        ++i;
      else if (row_done)
        ++i;
      else
        ++j;
    }
  }

  // Tree nodes: rows 0..m-1, columns m..m+n-1.
  void build_adjacency() {
    adj_.assign(m_ + n_, {});
    for (std::size_t b = 0; b < basis_.size(); ++b) {
      const auto [i, j] = basis_[b];
      adj_[i].push_back(b);
      adj_[m_ + j].push_back(b);
    }
  }

  void compute_potentials() {
    build_adjacency();
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t b : adj_[node]) {
        const auto [i, j] = basis_[b];
        const double c = cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (node < m_) {
          if (seen[m_ + j]) continue;
          v_[j] = c - u_[i];
          seen[m_ + j] = 1;
          stack.push_back(m_ + j);
        } else {
          if (seen[i]) continue;
          u_[i] = c - v_[j];
          seen[i] = 1;
          stack.push_back(i);
        }
      }
    }
    for (char s : seen) require(s != 0, ErrorKind::numeric, "transport: basis is not a spanning tree");
  }

  std::optional<std::pair<std::size_t, std::size_t>> choose_entering(bool bland) const {
    std::vector<char> is_basic(m_ * n_, 0);
    for (const auto& [i, j] : basis_) is_basic[i * n_ + j] = 1;
    std::optional<std::pair<std::size_t, std::size_t>> best;
    double best_r = -tol_;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic[i * n_ + j]) continue;
        const double r = cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - u_[i] - v_[j];
        if (r < best_r) {
          best = std::make_pair(i, j);
          if (bland) return best;
          best_r = r;
        }
      }
    return best;
  }

  // Returns the basis cells on the tree path from row node `i` to column node `j`.
  std::vector<std::size_t> tree_path(std::size_t i, std::size_t j) const {
    const std::size_t target = m_ + j;
    std::vector<std::size_t> parent_edge(m_ + n_, kNone), parent(m_ + n_, kNone);
    std::vector<std::size_t> queue{i};
    std::vector<char> seen(m_ + n_, 0);
    seen[i] = 1;
    for (std::size_t h = 0; h < queue.size() && !seen[target]; ++h) {
      const std::size_t node = queue[h];
      for (std::size_t b : adj_[node]) {
        const auto [bi, bj] = basis_[b];
        const std::size_t other = node < m_ ? m_ + bj : bi;
        if (seen[other]) continue;
        seen[other] = 1;
        parent[other] = node;
        parent_edge[other] = b;
        queue.push_back(other);
      }
    }
    require(seen[target] != 0, ErrorKind::numeric, "transport: no tree path for entering cell");
    std::vector<std::size_t> path;
    for (std::size_t node = target; node != i; node = parent[node]) path.push_back(parent_edge[node]);
    std::reverse(path.begin(), path.end());  // from row i towards column j
    return path;
  }

  double pivot(std::size_t i, std::size_t j) {
    const auto path = tree_path(i, j);
    // Along the cycle: entering cell +, then path cells alternate -, +, ...
    std::size_t leave = kNone;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const std::size_t b = path[k];
      const double f = flow_[b];
      // lowest cell index among ties (Bland's leaving rule)
      if (f < theta || (f == theta && cell_index(b) < cell_index(leave))) {
        theta = f;
        leave = b;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      const std::size_t b = path[k];
      flow_[b] += (k % 2 == 0) ? -theta : theta;
    }
    basis_[leave] = {i, j};
    flow_[leave] = theta;
    return theta;
  }

  std::size_t cell_index(std::size_t b) const { return basis_[b].first * n_ + basis_[b].second; }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  const Matrix& cost_;
  std::vector<double> s_, d_;
  std::size_t m_, n_;
  double tol_;
  std::vector<std::pair<std::size_t, std::size_t>> basis_;
  std::vector<double> flow_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> u_, v_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Optimal coupling and dual potentials. Zero-weight rows and columns are
/// pruned before solving; their potentials are set to the tightest feasible
/// values afterwards.
inline TransportPlan solve_transport(const TransportProblem& problem) {
  problem.validate();
  const auto m = problem.supply.size();
  const auto n = problem.demand.size();
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < m; ++i)
    if (problem.supply[i] > 0.0) rows.push_back(i);
  for (std::size_t j = 0; j < n; ++j)
    if (problem.demand[j] > 0.0) cols.push_back(j);

  Matrix reduced(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  std::vector<double> s, d;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    s.push_back(problem.supply[rows[a]]);
    for (std::size_t b = 0; b < cols.size(); ++b)
      reduced(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          problem.cost(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b]));
  }
  for (std::size_t j : cols) d.push_back(problem.demand[j]);

  detail::TransportSimplex simplex(reduced, s, d);
  simplex.solve();

  TransportPlan plan;
  plan.pivots = simplex.pivots();
  plan.coupling = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t b = 0; b < simplex.basis().size(); ++b) {
    const auto [a, c] = simplex.basis()[b];
    plan.coupling(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[c])) =
        std::max(0.0, simplex.flow(b));
  }
  CompensatedSum value;
  for (Eigen::Index i = 0; i < plan.coupling.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.coupling.cols(); ++j)
      if (plan.coupling(i, j) > 0.0) value += plan.coupling(i, j) * problem.cost(i, j);
  plan.value = value.value();

  constexpr double kUnset = std::numeric_limits<double>::infinity();
  plan.row_potential = Vector::Constant(static_cast<Eigen::Index>(m), kUnset);
  plan.col_potential = Vector::Constant(static_cast<Eigen::Index>(n), kUnset);
  for (std::size_t a = 0; a < rows.size(); ++a)
    plan.row_potential[static_cast<Eigen::Index>(rows[a])] = simplex.u()[a];
  for (std::size_t b = 0; b < cols.size(); ++b)
    plan.col_potential[static_cast<Eigen::Index>(cols[b])] = simplex.v()[b];
  for (std::size_t i = 0; i < m; ++i) {
    if (problem.supply[i] > 0.0) continue;
    double best = kUnset;
    for (std::size_t j : cols)
      best = std::min(best, problem.cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                plan.col_potential[static_cast<Eigen::Index>(j)]);
    plan.row_potential[static_cast<Eigen::Index>(i)] = best;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (problem.demand[j] > 0.0) continue;
    double best = kUnset;
    for (std::size_t i = 0; i < m; ++i)
      best = std::min(best, problem.cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                plan.row_potential[static_cast<Eigen::Index>(i)]);
    plan.col_potential[static_cast<Eigen::Index>(j)] = best;
  }
  return plan;
}

/// Minimum over all n! permutation couplings; uniform square problems only.
inline double brute_force_transport(const TransportProblem& problem) {
  const auto n = problem.supply.size();
  require(n >= 1 && n <= 7 && problem.demand.size() == n && problem.cost.rows() == static_cast<Eigen::Index>(n) &&
              problem.cost.cols() == static_cast<Eigen::Index>(n),
          ErrorKind::contract, "brute_force_transport: needs a square problem with n <= 7");
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    require(std::fabs(problem.supply[i] - w) <= 1e-12 && std::fabs(problem.demand[i] - w) <= 1e-12,
            ErrorKind::contract, "brute_force_transport: weights must be uniform");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += problem.cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    best = std::min(best, s * w);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Squared-Euclidean transport problem between two empirical distributions.
inline TransportProblem squared_distance_problem(const WeightedEmpirical& p, const WeightedEmpirical& q) {
  require(!p.support.empty() && !q.support.empty(), ErrorKind::contract, "transport: empty support");
  Matrix cost(static_cast<Eigen::Index>(p.support.size()), static_cast<Eigen::Index>(q.support.size()));
  for (std::size_t i = 0; i < p.support.size(); ++i)
    for (std::size_t j = 0; j < q.support.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (p.support[i] - q.support[j]).squaredNorm();
  return {std::move(cost), p.weights, q.weights};
}

/// W₂² between two empirical distributions (the LP value, not its root).
inline double wasserstein2_squared(const WeightedEmpirical& p, const WeightedEmpirical& q) {
  return solve_transport(squared_distance_problem(p, q)).value;
}

}  // namespace debias
