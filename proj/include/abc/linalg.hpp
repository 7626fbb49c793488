#pragma once

#include <functional>

#include "abc/types.hpp"

namespace abc {

struct LeastSquaresResult {
  Matrix coefficients;  // X.cols() x Y.cols()
  bool ridge_used = false;
};

// Solves argmin ||sqrt(W)(Y - X B)||^2 via the normal equations. An empty
// weight vector means unweighted. Near-singular Gram matrices fall back to
// ridge regularization with the supplied strength.
LeastSquaresResult solve_least_squares(const Matrix& x, const Matrix& y,
                                       const Vector& weights,
                                       double ridge_fallback);

double logsumexp(const Vector& logs);

// BFGS with Armijo backtracking for smooth low-dimensional objectives.
// The callable returns the objective value and fills the gradient.
using ObjectiveFn = std::function<double(const Vector&, Vector&)>;
Vector minimize_bfgs(const ObjectiveFn& fn, Vector x0, int max_iter = 500,
                     double grad_tol = 1e-10);

}  // namespace abc
