#pragma once

#include <optional>

#include "abc/model.hpp"
#include "abc/parallel.hpp"
#include "abc/types.hpp"

namespace abc {

enum class KernelKind { Uniform, Epanechnikov, Gaussian };

KernelKind kernel_kind_from_string(const std::string& name);
std::string to_string(KernelKind kind);

// Kernel weighting with either an explicit bandwidth or a distance-quantile
// rule (h = lower empirical alpha-quantile of the run's distances).
struct KernelConfig {
  KernelKind kind = KernelKind::Uniform;
  std::optional<double> bandwidth;
  std::optional<double> quantile;

  static KernelConfig with_bandwidth(KernelKind kind, double h);
  static KernelConfig with_quantile(KernelKind kind, double alpha);
  void validate() const;
};

// Per-coordinate scaling applied before the Euclidean distance.
struct DistanceConfig {
  Vector scales;
  std::vector<int> constant_columns;  // spread was zero; scale forced to 1

  static DistanceConfig unit(int q);
};

// scales[j] = 1 / sd(column j), sample standard deviation (n-1 denominator).
DistanceConfig standardize(const ParticleSet& particles);

// Scaled Euclidean distances restricted to the selection, one per particle.
Vector scaled_distances(const ParticleSet& particles, const Vector& s_obs,
                        const SummarySelection& selection,
                        const DistanceConfig& dist, Exec policy = Exec::Par);

// Lower-interpolated empirical quantile: the ceil(alpha*n)-th smallest
// distance, so the acceptance set is never empty.
double select_bandwidth(const Vector& distances, double alpha);

double kernel_weight(KernelKind kind, double distance, double h);

// Kernel-weighted rejection. Output weights are input weight times
// K_h(distance); for the uniform kernel, zero-weight particles are dropped.
ParticleSet rejection_abc(const ParticleSet& particles, const Vector& s_obs,
                          const SummarySelection& selection,
                          const KernelConfig& kernel,
                          const DistanceConfig& dist, Exec policy = Exec::Par);

// Linear map from raw summaries to one constructed statistic per parameter
// (posterior-mean regression on a pilot run). Column 0 is the intercept.
struct SemiAutoMap {
  Matrix coefficients;  // p x (q + 1)
  bool ridge_used = false;

  int param_dim() const { return static_cast<int>(coefficients.rows()); }
  int summary_dim() const { return static_cast<int>(coefficients.cols()) - 1; }
  Vector apply(const Vector& summaries) const;
  Matrix apply_rows(const Matrix& summaries) const;
};

SemiAutoMap fit_semi_auto(const ParticleSet& pilot);

}  // namespace abc
