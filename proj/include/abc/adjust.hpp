#pragma once

#include "abc/parallel.hpp"
#include "abc/types.hpp"

namespace abc {

// Fitted linear shift theta_i - B (s_i - s_obs), weighted least squares on
// the particle set's active summary selection.
struct RegressionAdjustment {
  Matrix slopes;  // p x (selection size)
  Vector intercepts;
  SummarySelection fitted_on;
  bool ridge_used = false;
};

RegressionAdjustment fit_regression_adjustment(const ParticleSet& particles,
                                               const Vector& s_obs);

// Shifts every particle toward the observed summary; summaries and weights
// are unchanged.
ParticleSet regression_adjust(const ParticleSet& particles,
                              const Vector& s_obs);

using RankMatrix =
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Columnwise ranks 1..r, ties broken by original particle index.
RankMatrix rank_matrix(const ParticleSet& particles);
std::vector<std::int64_t> column_ranks(const Vector& column);

// Sorted univariate samples, one vector per parameter.
struct MarginalSamples {
  std::vector<Vector> sorted;

  static MarginalSamples from_columns(const Matrix& thetas);
  static MarginalSamples from_particles(const ParticleSet& particles);
  int param_dim() const { return static_cast<int>(sorted.size()); }
};

// Replaces each joint column's order statistics with quantiles of the
// matching marginal sample, preserving componentwise ranks exactly. With
// equal sample sizes the k-th order statistic maps to the k-th order
// statistic; otherwise positions interpolate at rank/(r+1).
ParticleSet marginal_adjust(const ParticleSet& joint,
                            const MarginalSamples& marginals,
                            Exec policy = Exec::Par);

}  // namespace abc
