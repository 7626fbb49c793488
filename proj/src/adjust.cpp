#include "abc/adjust.hpp"

#include <algorithm>
#include <numeric>

#include "abc/linalg.hpp"

namespace abc {

RegressionAdjustment fit_regression_adjustment(const ParticleSet& particles,
                                               const Vector& s_obs) {
  const int q = particles.summary_dim();
  if (s_obs.size() != q) {
    throw DimensionError("regression adjust: s_obs has wrong length");
  }
  const SummarySelection sel = particles.meta().selection.has_value()
                                   ? *particles.meta().selection
                                   : SummarySelection::all(q);
  sel.check_bounds(q);

  const std::int64_t r = particles.size();
  const int m = sel.size();
  if (r <= m + 1) {
    throw DimensionError(
        "regression adjust: needs more particles than selected summaries");
  }

  Matrix x(r, m + 1);
  x.col(0).setOnes();
  x.rightCols(m) = sel.gather_columns(particles.summaries());

  const double ridge =
      1e-8 * x.rightCols(m).squaredNorm() / static_cast<double>(std::max(1, m));
  LeastSquaresResult fit =
      solve_least_squares(x, particles.thetas(), particles.weights(), ridge);

  RegressionAdjustment adj;
  adj.intercepts = fit.coefficients.row(0).transpose();
  adj.slopes = fit.coefficients.bottomRows(m).transpose();
  adj.fitted_on = sel;
  adj.ridge_used = fit.ridge_used;
  return adj;
}

ParticleSet regression_adjust(const ParticleSet& particles,
                              const Vector& s_obs) {
  RegressionAdjustment adj = fit_regression_adjustment(particles, s_obs);

  const Matrix s_sel = adj.fitted_on.gather_columns(particles.summaries());
  const Vector s_obs_sel = adj.fitted_on.gather(s_obs);
  const Matrix residual = s_sel.rowwise() - s_obs_sel.transpose();
  Matrix adjusted = particles.thetas() - residual * adj.slopes.transpose();

  ParticleSet out = particles.with_thetas(std::move(adjusted));
  out.meta().adjustments.push_back("regression");
  if (adj.ridge_used) {
    out.meta().warnings.push_back("regression adjustment used ridge fallback");
  }
  return out;
}

std::vector<std::int64_t> column_ranks(const Vector& column) {
  const std::int64_t r = column.size();
  std::vector<std::int64_t> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t b) {
                     return column[a] < column[b];
                   });
  std::vector<std::int64_t> ranks(static_cast<std::size_t>(r));
  for (std::int64_t pos = 0; pos < r; ++pos) {
    ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] =
        pos + 1;
  }
  return ranks;
}

RankMatrix rank_matrix(const ParticleSet& particles) {
  const std::int64_t r = particles.size();
  const int p = particles.param_dim();
  RankMatrix ranks(r, p);
  for (int j = 0; j < p; ++j) {
    const std::vector<std::int64_t> col =
        column_ranks(particles.thetas().col(j));
    for (std::int64_t i = 0; i < r; ++i) ranks(i, j) = col[static_cast<std::size_t>(i)];
  }
  return ranks;
}

MarginalSamples MarginalSamples::from_columns(const Matrix& thetas) {
  MarginalSamples out;
  out.sorted.reserve(static_cast<std::size_t>(thetas.cols()));
  for (int j = 0; j < thetas.cols(); ++j) {
    Vector col = thetas.col(j);
    std::sort(col.data(), col.data() + col.size());
    out.sorted.push_back(std::move(col));
  }
  return out;
}

MarginalSamples MarginalSamples::from_particles(const ParticleSet& particles) {
  return from_columns(particles.thetas());
}

namespace {

// Quantile of a sorted sample at position rank/(r+1), interpolating between
// the marginal sample's own plotting positions i/(m+1). Position arithmetic
// stays in integers so the r' == r case reproduces the marginal order
// statistics exactly. Positions outside the plotting range extrapolate
// linearly with the edge gap, keeping the map strictly monotone in rank
// (flat clamping would introduce ties and change output ranks).
double marginal_quantile(const Vector& sorted, std::int64_t rank,
                         std::int64_t r) {
  const std::int64_t m = sorted.size();
  // Position rank/(r+1) measured in units of 1/(m+1) is x/(r+1).
  const std::int64_t x = rank * (m + 1);
  const std::int64_t lo = x / (r + 1);
  const std::int64_t rem = x - lo * (r + 1);
  const double t = static_cast<double>(rem) / static_cast<double>(r + 1);
  if (lo < 1) {
    const double deficit = static_cast<double>(lo) + t - 1.0;
    return sorted[0] + deficit * (sorted[1] - sorted[0]);
  }
  if (lo > m || (lo == m && rem > 0)) {
    const double excess = static_cast<double>(lo) + t - static_cast<double>(m);
    return sorted[m - 1] + excess * (sorted[m - 1] - sorted[m - 2]);
  }
  if (rem == 0) return sorted[lo - 1];
  return sorted[lo - 1] + t * (sorted[lo] - sorted[lo - 1]);
}

}  // namespace

ParticleSet marginal_adjust(const ParticleSet& joint,
                            const MarginalSamples& marginals, Exec policy) {
  const int p = joint.param_dim();
  if (marginals.param_dim() != p) {
    throw DimensionError("marginal adjust: parameter dimension mismatch");
  }
  for (const Vector& m : marginals.sorted) {
    if (m.size() < 2) {
      throw DimensionError("marginal adjust: marginal samples need r' >= 2");
    }
  }

  const std::int64_t r = joint.size();
  Matrix adjusted(r, p);
  parallel_for(
      static_cast<std::int64_t>(p),
      [&](std::int64_t j) {
        const std::vector<std::int64_t> ranks =
            column_ranks(joint.thetas().col(j));
        const Vector& sorted = marginals.sorted[static_cast<std::size_t>(j)];
        for (std::int64_t i = 0; i < r; ++i) {
          adjusted(i, j) =
              marginal_quantile(sorted, ranks[static_cast<std::size_t>(i)], r);
        }
      },
      policy);

  ParticleSet out = joint.with_thetas(std::move(adjusted));
  out.meta().adjustments.push_back("marginal");
  return out;
}

}  // namespace abc
