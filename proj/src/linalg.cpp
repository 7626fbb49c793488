#include "abc/linalg.hpp"

#include <cmath>

namespace abc {

LeastSquaresResult solve_least_squares(const Matrix& x, const Matrix& y,
                                       const Vector& weights,
                                       double ridge_fallback) {
  if (y.rows() != x.rows()) {
    throw DimensionError("least squares: row mismatch");
  }
  if (weights.size() != 0 && weights.size() != x.rows()) {
    throw DimensionError("least squares: weight length mismatch");
  }

  Matrix gram;
  Matrix rhs;
  if (weights.size() == 0) {
    gram = x.transpose() * x;
    rhs = x.transpose() * y;
  } else {
    const Matrix xw = weights.asDiagonal() * x;
    gram = x.transpose() * xw;
    rhs = xw.transpose() * y;
  }

  auto near_singular = [&](const Eigen::LDLT<Matrix>& ldlt) {
    if (ldlt.info() != Eigen::Success) return true;
    const Vector d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0)) return true;
    return d.minCoeff() <= 1e-12 * dmax;
  };

  LeastSquaresResult result;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (near_singular(ldlt)) {
    Matrix ridged = gram;
    const double lambda =
        ridge_fallback > 0.0 ? ridge_fallback
                             : 1e-10 * std::max(1.0, gram.trace());
    ridged.diagonal().array() += lambda;
    ldlt.compute(ridged);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("least squares: factorization failed");
    }
    result.ridge_used = true;
  }
  result.coefficients = ldlt.solve(rhs);
  return result;
}

double logsumexp(const Vector& logs) {
  const double m = logs.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((logs.array() - m).exp().sum());
}

Vector minimize_bfgs(const ObjectiveFn& fn, Vector x0, int max_iter,
                     double grad_tol) {
  const int d = static_cast<int>(x0.size());
  Vector x = std::move(x0);
  Vector grad(d);
  double f = fn(x, grad);
  Matrix h_inv = Matrix::Identity(d, d);

  for (int iter = 0; iter < max_iter; ++iter) {
    if (grad.norm() <= grad_tol) break;
    Vector direction = -(h_inv * grad);
    double slope = grad.dot(direction);
    if (slope >= 0.0) {
      h_inv = Matrix::Identity(d, d);
      direction = -grad;
      slope = grad.dot(direction);
    }

    double step = 1.0;
    Vector x_new(d);
    Vector grad_new(d);
    double f_new = f;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      x_new = x + step * direction;
      f_new = fn(x_new, grad_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Vector s = x_new - x;
    const Vector y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Matrix identity = Matrix::Identity(d, d);
      const Matrix left = identity - rho * s * y.transpose();
      h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
    }
    x = std::move(x_new);
    grad = grad_new;
    const double improvement = f - f_new;
    f = f_new;
    if (improvement <= 1e-14 * (std::fabs(f) + 1e-14)) break;
  }
  return x;
}

}  // namespace abc
