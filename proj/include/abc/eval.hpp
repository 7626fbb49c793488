#pragma once

#include <map>

#include <nlohmann/json_fwd.hpp>

#include "abc/grid.hpp"
#include "abc/parallel.hpp"
#include "abc/rng.hpp"
#include "abc/types.hpp"

namespace abc::eval {

using abc::Matrix;
using abc::Vector;

// Product-Gaussian KDE of a weighted 2-D sample evaluated on the supplied
// (uniform) grid, linear-binned and renormalized. Bandwidths default to the
// per-axis Silverman rule for two dimensions.
GridDensity2D kde2d(const Matrix& samples, const Vector& weights,
                    const Vector& xs, const Vector& ys,
                    Exec policy = Exec::Par);

// sum truth * log(truth / approx) * cell_area over cells with truth above
// 1e-12; the approximation is floored at 1e-12. Grids must match.
double kl_divergence(const GridDensity2D& truth, const GridDensity2D& approx);

enum class Method {
  Rejection,
  Marginal,
  Regression,
  RegressionMarginal,
  Copula,
};

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct BenchmarkConfig {
  std::vector<int> dims{2, 5, 10, 20, 50};
  std::vector<Method> methods{Method::Rejection, Method::Marginal,
                              Method::Regression, Method::RegressionMarginal,
                              Method::Copula};
  int replications = 20;
  std::int64_t pool_size = 100000;
  double accept_quantile = 0.01;
  double twist = 0.1;
  int grid_n = 400;
  std::int64_t copula_draws = 10000;
};

struct BenchmarkCell {
  Method method;
  int p = 0;
  double mean_kl = 0.0;
  double se = 0.0;
  int replications = 0;
  int failures = 0;
};

struct TrendChecks {
  bool copula_small = false;       // mean KL < 0.15 at every p
  bool copula_flat = false;        // max/min mean KL ratio < 2 across p
  bool rejection_monotone = false; // mean KL strictly increasing in p
  bool rejection_large = false;    // mean KL > 2.5 at the largest p
  bool ordering = false;           // copula < regression+marginal < rejection
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::uint64_t seed = 0;
  std::vector<BenchmarkCell> cells;
  TrendChecks trends;

  const BenchmarkCell* find(Method method, int p) const;
};

// Twisted-normal benchmark: for each dimension and replication, run every
// requested method off one shared prior-predictive pool, KDE the
// (theta_1, theta_2) margin, and score it against the exact margin by KL.
BenchmarkReport run_table1_benchmark(const BenchmarkConfig& config,
                                     const RngStream& rng,
                                     Exec policy = Exec::Par);

// One row per dimension, mean and standard-error columns per method.
void write_report_csv(const std::string& path, const BenchmarkReport& report);
void to_json(nlohmann::json& j, const BenchmarkReport& report);

}  // namespace abc::eval
