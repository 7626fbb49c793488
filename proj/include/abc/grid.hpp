#pragma once

#include "abc/types.hpp"

namespace abc {

// Nonnegative density tabulated on a rectangular grid, normalized so the
// trapezoid integral equals one.
struct GridDensity2D {
  Vector xs;
  Vector ys;
  Matrix density;  // xs.size() x ys.size()

  GridDensity2D() = default;
  GridDensity2D(Vector xs, Vector ys, Matrix density, bool normalized = false);

  double integral() const;
  void normalize();
  bool same_grid(const GridDensity2D& other, double tol = 0.0) const;

  // Trapezoid quadrature weight for axis point i.
  static double trapezoid_weight(const Vector& grid, std::int64_t i);
};

Vector linspace(double lo, double hi, int n);

}  // namespace abc
