#include "abc/grid.hpp"

#include <cmath>

namespace abc {

GridDensity2D::GridDensity2D(Vector xs_in, Vector ys_in, Matrix density_in,
                             bool normalized)
    : xs(std::move(xs_in)), ys(std::move(ys_in)), density(std::move(density_in)) {
  if (xs.size() < 2 || ys.size() < 2) {
    throw DimensionError("grid density: axes need at least two points");
  }
  if (density.rows() != xs.size() || density.cols() != ys.size()) {
    throw DimensionError("grid density: density shape mismatch");
  }
  for (std::int64_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw NumericalError("grid density: x axis must be strictly increasing");
    }
  }
  for (std::int64_t i = 1; i < ys.size(); ++i) {
    if (!(ys[i] > ys[i - 1])) {
      throw NumericalError("grid density: y axis must be strictly increasing");
    }
  }
  if (!density.allFinite() || (density.array() < 0.0).any()) {
    throw NumericalError("grid density: density must be finite and >= 0");
  }
  if (!normalized) normalize();
}

double GridDensity2D::trapezoid_weight(const Vector& grid, std::int64_t i) {
  const std::int64_t n = grid.size();
  if (i == 0) return 0.5 * (grid[1] - grid[0]);
  if (i == n - 1) return 0.5 * (grid[n - 1] - grid[n - 2]);
  return 0.5 * (grid[i + 1] - grid[i - 1]);
}

double GridDensity2D::integral() const {
  double total = 0.0;
  for (std::int64_t i = 0; i < xs.size(); ++i) {
    const double wx = trapezoid_weight(xs, i);
    double row = 0.0;
    for (std::int64_t j = 0; j < ys.size(); ++j) {
      row += trapezoid_weight(ys, j) * density(i, j);
    }
    total += wx * row;
  }
  return total;
}

void GridDensity2D::normalize() {
  const double total = integral();
  if (!(total > 0.0)) {
    throw NumericalError("grid density: zero total mass");
  }
  density /= total;
}

bool GridDensity2D::same_grid(const GridDensity2D& other, double tol) const {
  if (xs.size() != other.xs.size() || ys.size() != other.ys.size()) return false;
  for (std::int64_t i = 0; i < xs.size(); ++i) {
    if (std::fabs(xs[i] - other.xs[i]) > tol) return false;
  }
  for (std::int64_t j = 0; j < ys.size(); ++j) {
    if (std::fabs(ys[j] - other.ys[j]) > tol) return false;
  }
  return true;
}

Vector linspace(double lo, double hi, int n) {
  if (n < 2) throw DimensionError("linspace: n must be >= 2");
  if (!(hi > lo)) throw NumericalError("linspace: hi must exceed lo");
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace abc
