#include "abc/rejection.hpp"

#include <algorithm>
#include <cmath>

#include "abc/linalg.hpp"

namespace abc {

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "uniform") return KernelKind::Uniform;
  if (name == "epanechnikov") return KernelKind::Epanechnikov;
  if (name == "gaussian") return KernelKind::Gaussian;
  throw ConfigError("unknown kernel '" + name + "'");
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Uniform: return "uniform";
    case KernelKind::Epanechnikov: return "epanechnikov";
    case KernelKind::Gaussian: return "gaussian";
  }
  return "uniform";
}

KernelConfig KernelConfig::with_bandwidth(KernelKind kind, double h) {
  KernelConfig cfg;
  cfg.kind = kind;
  cfg.bandwidth = h;
  cfg.validate();
  return cfg;
}

KernelConfig KernelConfig::with_quantile(KernelKind kind, double alpha) {
  KernelConfig cfg;
  cfg.kind = kind;
  cfg.quantile = alpha;
  cfg.validate();
  return cfg;
}

void KernelConfig::validate() const {
  if (bandwidth.has_value() == quantile.has_value()) {
    throw ConfigError("kernel: set exactly one of bandwidth or quantile");
  }
  if (bandwidth && *bandwidth <= 0.0) {
    throw ConfigError("kernel: bandwidth must be > 0");
  }
  if (quantile && (*quantile <= 0.0 || *quantile >= 1.0)) {
    throw ConfigError("kernel: quantile must lie in (0,1)");
  }
}

DistanceConfig DistanceConfig::unit(int q) {
  return DistanceConfig{Vector::Ones(q), {}};
}

DistanceConfig standardize(const ParticleSet& particles) {
  const std::int64_t r = particles.size();
  if (r < 2) throw DimensionError("standardize: needs at least two particles");
  const Matrix& s = particles.summaries();
  const int q = particles.summary_dim();

  DistanceConfig cfg;
  cfg.scales = Vector::Ones(q);
  for (int j = 0; j < q; ++j) {
    const double mean = s.col(j).mean();
    const double ss = (s.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(r - 1));
    if (sd > 0.0) {
      cfg.scales[j] = 1.0 / sd;
    } else {
      cfg.constant_columns.push_back(j);
    }
  }
  return cfg;
}

Vector scaled_distances(const ParticleSet& particles, const Vector& s_obs,
                        const SummarySelection& selection,
                        const DistanceConfig& dist, Exec policy) {
  const int q = particles.summary_dim();
  selection.check_bounds(q);
  if (s_obs.size() != q) {
    throw DimensionError("scaled_distances: s_obs has wrong length");
  }
  if (dist.scales.size() != q) {
    throw DimensionError("scaled_distances: scales have wrong length");
  }
  if (!s_obs.allFinite()) {
    throw NumericalError("scaled_distances: s_obs must be finite");
  }
  const SummarySelection sel =
      selection.empty() ? SummarySelection::all(q) : selection;

  const Matrix& s = particles.summaries();
  const std::int64_t r = particles.size();
  Vector out(r);
  const int m = sel.size();
  parallel_for(
      r,
      [&](std::int64_t i) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) {
          const int c = sel[k];
          const double d = (s(i, c) - s_obs[c]) * dist.scales[c];
          acc += d * d;
        }
        out[i] = std::sqrt(acc);
      },
      policy);
  return out;
}

double select_bandwidth(const Vector& distances, double alpha) {
  const std::int64_t n = distances.size();
  if (n < 1) throw DimensionError("select_bandwidth: empty distances");
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw ConfigError("select_bandwidth: alpha must lie in (0,1)");
  }
  std::vector<double> d(distances.data(), distances.data() + n);
  std::int64_t k = static_cast<std::int64_t>(
      std::ceil(alpha * static_cast<double>(n)));
  k = std::clamp<std::int64_t>(k, 1, n);
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
  return d[static_cast<std::size_t>(k - 1)];
}

double kernel_weight(KernelKind kind, double distance, double h) {
  switch (kind) {
    case KernelKind::Uniform:
      return distance <= h ? 1.0 : 0.0;
    case KernelKind::Epanechnikov: {
      const double t = distance / h;
      return std::max(0.0, 1.0 - t * t);
    }
    case KernelKind::Gaussian: {
      const double t = distance / h;
      return std::exp(-0.5 * t * t);
    }
  }
  return 0.0;
}

ParticleSet rejection_abc(const ParticleSet& particles, const Vector& s_obs,
                          const SummarySelection& selection,
                          const KernelConfig& kernel,
                          const DistanceConfig& dist, Exec policy) {
  kernel.validate();
  const Vector d = scaled_distances(particles, s_obs, selection, dist, policy);
  const double h =
      kernel.bandwidth ? *kernel.bandwidth : select_bandwidth(d, *kernel.quantile);

  const std::int64_t r = particles.size();
  Vector w(r);
  for (std::int64_t i = 0; i < r; ++i) {
    w[i] = particles.weights()[i] * kernel_weight(kernel.kind, d[i], h);
  }
  if ((w.array() <= 0.0).all()) {
    throw NoAcceptancesError(h, d.minCoeff());
  }

  const bool drop_zero = kernel.kind == KernelKind::Uniform;
  std::vector<std::int64_t> keep;
  keep.reserve(static_cast<std::size_t>(r));
  for (std::int64_t i = 0; i < r; ++i) {
    if (!drop_zero || w[i] > 0.0) keep.push_back(i);
  }

  const std::int64_t m = static_cast<std::int64_t>(keep.size());
  Matrix thetas(m, particles.param_dim());
  Matrix summaries(m, particles.summary_dim());
  Vector weights(m);
  for (std::int64_t i = 0; i < m; ++i) {
    thetas.row(i) = particles.thetas().row(keep[static_cast<std::size_t>(i)]);
    summaries.row(i) =
        particles.summaries().row(keep[static_cast<std::size_t>(i)]);
    weights[i] = w[keep[static_cast<std::size_t>(i)]];
  }

  ParticleMeta meta = particles.meta();
  meta.selection = selection.empty()
                       ? SummarySelection::all(particles.summary_dim())
                       : selection;
  meta.s_obs = s_obs;
  meta.adjustments.push_back("rejection(kernel=" + to_string(kernel.kind) +
                             ",h=" + std::to_string(h) + ")");
  return ParticleSet(std::move(thetas), std::move(summaries),
                     std::move(weights), std::move(meta));
}

Vector SemiAutoMap::apply(const Vector& summaries) const {
  if (summaries.size() != summary_dim()) {
    throw DimensionError("semi-auto map: summary length mismatch");
  }
  Vector x(summaries.size() + 1);
  x[0] = 1.0;
  x.tail(summaries.size()) = summaries;
  return coefficients * x;
}

Matrix SemiAutoMap::apply_rows(const Matrix& summaries) const {
  if (summaries.cols() != summary_dim()) {
    throw DimensionError("semi-auto map: summary width mismatch");
  }
  Matrix x(summaries.rows(), summaries.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(summaries.cols()) = summaries;
  return x * coefficients.transpose();
}

SemiAutoMap fit_semi_auto(const ParticleSet& pilot) {
  const std::int64_t r = pilot.size();
  const int q = pilot.summary_dim();
  const int p = pilot.param_dim();
  if (r <= q + 1) {
    throw DimensionError("fit_semi_auto: needs more particles than q+1");
  }

  Matrix x(r, q + 1);
  x.col(0).setOnes();
  x.rightCols(q) = pilot.summaries();

  const double ridge =
      1e-8 * pilot.summaries().squaredNorm() / static_cast<double>(q);
  LeastSquaresResult fit =
      solve_least_squares(x, pilot.thetas(), Vector(), ridge);

  SemiAutoMap map;
  map.coefficients = fit.coefficients.transpose();
  map.ridge_used = fit.ridge_used;
  return map;
}

}  // namespace abc
