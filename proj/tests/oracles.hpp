#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <Eigen/Dense>
#include <functional>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& g, const Vector& x, double h = 1e-5) {
  Matrix j(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (g(xp) - g(xm)) / (2.0 * h);
  }
  return j;
}

inline double relative_error(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

/// Conjugate gradient on the SPD system Ax = b.
inline Vector conjugate_gradient(const Matrix& a, const Vector& b, double tol = 1e-14, int max_iter = 10000) {
  Vector x = Vector::Zero(b.size());
  Vector r = b, p = r;
  double rr = r.dot(r);
  const double stop = tol * tol * std::max(1.0, b.squaredNorm());
  for (int it = 0; it < max_iter && rr > stop; ++it) {
    const Vector ap = a * p;
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.dot(r);
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return x;
}

/// min_x ½xᵀAx - bᵀx by conjugate gradient.
inline double min_quadratic(const Matrix& a, const Vector& b) {
  const Vector x = conjugate_gradient(a, b);
  return 0.5 * x.dot(a * x) - b.dot(x);
}

/// min xᵀBx s.t. Ax = b: particular solution by SVD least squares, then
/// conjugate gradient over the null space of A.
inline double min_constrained(const Matrix& bmat, const Matrix& a, const Vector& b) {
  const Vector x0 = a.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(b);
  Eigen::FullPivLU<Matrix> lu(a);
  const Matrix n = lu.kernel();
  if (n.cols() == 0 || n.isZero()) return x0.dot(bmat * x0);
  const Matrix h = n.transpose() * bmat * n;
  const Vector z = conjugate_gradient(h, -(n.transpose() * bmat * x0));
  const Vector x = x0 + n * z;
  return x.dot(bmat * x);
}

}  // namespace oracle
