#pragma once

// Dense small-scale linear algebra on top of Eigen.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "debias/error.hpp"
#include "debias/random.hpp"

namespace debias {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense rank-3 tensor, symmetric when produced by the objectives.
class SymmetricTensor3 {
 public:
  SymmetricTensor3() = default;
  explicit SymmetricTensor3(std::size_t dim) : dim_(dim), data_(dim * dim * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }

  double& operator()(std::size_t a, std::size_t b, std::size_t c) { return data_[(a * dim_ + b) * dim_ + c]; }
  double operator()(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[(a * dim_ + b) * dim_ + c];
  }

  /// T_abc y^a y^b y^c
  double contract(const Vector& y) const {
    require(static_cast<std::size_t>(y.size()) == dim_, ErrorKind::contract, "tensor contraction: size mismatch");
    double s = 0.0;
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = 0; b < dim_; ++b)
        for (std::size_t c = 0; c < dim_; ++c) s += (*this)(a, b, c) * y[a] * y[b] * y[c];
    return s;
  }

  /// Replace every entry by the mean over its index permutations.
  void symmetrize() {
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = a; b < dim_; ++b)
        for (std::size_t c = b; c < dim_; ++c) {
          double& e0 = (*this)(a, b, c);
          double& e1 = (*this)(a, c, b);
          double& e2 = (*this)(b, a, c);
          double& e3 = (*this)(b, c, a);
          double& e4 = (*this)(c, a, b);
          double& e5 = (*this)(c, b, a);
          const double m = (e0 + e1 + e2 + e3 + e4 + e5) / 6.0;
          e0 = e1 = e2 = e3 = e4 = e5 = m;
        }
  }

  double max_asymmetry() const {
    double worst = 0.0;
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = 0; b < dim_; ++b)
        for (std::size_t c = 0; c < dim_; ++c) {
          const double v = (*this)(a, b, c);
          worst = std::max({worst, std::fabs(v - (*this)(b, a, c)), std::fabs(v - (*this)(a, c, b)),
                            std::fabs(v - (*this)(c, b, a))});
        }
    return worst;
  }

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Solves Ax = b for symmetric positive definite A.
inline Vector cholesky_solve(const Matrix& a, const Vector& b) {
  require(a.rows() == a.cols() && a.rows() == b.size(), ErrorKind::contract, "cholesky_solve: dimension mismatch");
  Eigen::LLT<Matrix> llt(a);
  require(llt.info() == Eigen::Success, ErrorKind::numeric, "cholesky_solve: matrix is not positive definite");
  return llt.solve(b);
}

inline bool is_spd(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  if (!a.allFinite()) return false;
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

struct KktSolution {
  Vector x;
  double value = 0.0;
};

/// min xᵀBx s.t. Ax = b for fixed (B, A) and varying b, via the Schur
/// complement S = A B⁻¹ Aᵀ: x = B⁻¹Aᵀ S⁻¹ b and value = bᵀ S⁻¹ b.
class KktSystem {
 public:
  KktSystem(const Matrix& bmat, const Matrix& a) {
    require(bmat.rows() == bmat.cols() && a.cols() == bmat.rows(), ErrorKind::contract,
            "kkt_solve: dimension mismatch");
    require(a.rows() >= 1 && a.rows() <= a.cols(), ErrorKind::contract, "kkt_solve: A must be d x p with d <= p");
    Eigen::LLT<Matrix> bllt(bmat);
    require(bllt.info() == Eigen::Success, ErrorKind::numeric, "kkt_solve: B is not positive definite");
    binv_at_ = bllt.solve(a.transpose());
    const Matrix schur = a * binv_at_;
    schur_llt_.compute(0.5 * (schur + schur.transpose()));
    require(schur_llt_.info() == Eigen::Success, ErrorKind::numeric,
            "kkt_solve: A B^-1 A^T is singular (A rank deficient)");
    // reject numerically rank-deficient A whose Schur complement is barely PD
    const Vector diag = schur_llt_.matrixL().toDenseMatrix().diagonal();
    require(diag.minCoeff() > 1e-10 * std::max(1.0, diag.maxCoeff()), ErrorKind::numeric,
            "kkt_solve: A B^-1 A^T is singular (A rank deficient)");
  }

  std::size_t constraints() const noexcept { return static_cast<std::size_t>(binv_at_.cols()); }

  KktSolution solve(const Vector& b) const {
    require(b.size() == binv_at_.cols(), ErrorKind::contract, "kkt_solve: right-hand side has the wrong size");
    const Vector lambda = schur_llt_.solve(b);
    return {binv_at_ * lambda, b.dot(lambda)};
  }

  double value(const Vector& b) const {
    require(b.size() == binv_at_.cols(), ErrorKind::contract, "kkt_solve: right-hand side has the wrong size");
    return b.dot(schur_llt_.solve(b));
  }

  /// (A B⁻¹ Aᵀ)⁻¹, so that value(b) = bᵀ M b.
  Matrix value_curvature() const {
    const auto d = binv_at_.cols();
    Matrix inv = schur_llt_.solve(Matrix::Identity(d, d));
    return 0.5 * (inv + inv.transpose());
  }

 private:
  Matrix binv_at_;
  Eigen::LLT<Matrix> schur_llt_;
};

inline KktSolution kkt_solve(const Matrix& bmat, const Matrix& a, const Vector& b) {
  return KktSystem(bmat, a).solve(b);
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of R's diagonal folded into Q.
inline Matrix random_orthogonal(std::size_t d, RandomStream& stream) {
  require(d >= 1, ErrorKind::contract, "random_orthogonal: d must be positive");
  const auto n = static_cast<Eigen::Index>(d);
  for (;;) {
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) g(i, j) = stream.gaussian();
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    bool degenerate = false;
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::fabs(r(i, i)) < 1e-12) degenerate = true;
    if (degenerate) continue;
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
  }
}

struct SpectralMatrix {
  Matrix q;        // orthogonal eigenvectors
  Vector lambda;   // eigenvalues
  Matrix matrix;   // Q diag(lambda) Qᵀ, exactly symmetric
};

inline Matrix compose_spectral(const Matrix& q, const Vector& lambda) {
  Matrix a = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

/// SPD matrix with spectrum in [1, kappa]: smallest eigenvalue 1, largest
/// kappa, the rest log-uniform in between.
inline SpectralMatrix spd_with_condition_spectral(std::size_t d, double kappa, RandomStream& stream) {
  require(d >= 1, ErrorKind::contract, "spd_with_condition: d must be positive");
  require(kappa >= 1.0 && std::isfinite(kappa), ErrorKind::contract, "spd_with_condition: kappa must be >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  SpectralMatrix out;
  out.lambda = Vector::Ones(n);
  if (n >= 2) {
    out.lambda[n - 1] = kappa;
    const double log_k = std::log(kappa);
    for (Eigen::Index i = 1; i + 1 < n; ++i) out.lambda[i] = std::exp(stream.uniform() * log_k);
  }
  out.q = random_orthogonal(d, stream);
  out.matrix = compose_spectral(out.q, out.lambda);
  return out;
}

inline Matrix spd_with_condition(std::size_t d, double kappa, RandomStream& stream) {
  if (d == 1) return Matrix::Ones(1, 1);
  return spd_with_condition_spectral(d, kappa, stream).matrix;
}

/// yᵀAy
inline double quadratic_form(const Matrix& a, const Vector& y) {
  require(a.rows() == a.cols() && a.rows() == y.size(), ErrorKind::contract, "quadratic_form: dimension mismatch");
  return y.dot(a * y);
}

}  // namespace debias
