#include <cmath>

#include "abc/models.hpp"

namespace abc::models {

TwistedNormalParams TwistedNormalParams::with_dim(int p, double twist) {
  TwistedNormalParams params;
  params.p = p;
  params.twist = twist;
  params.y_obs = Vector::Zero(p);
  params.y_obs[0] = 10.0;
  params.validate();
  return params;
}

void TwistedNormalParams::validate() const {
  if (p < 2) throw ConfigError("twisted normal: p must be >= 2");
  if (y_obs.size() != p) {
    throw ConfigError("twisted normal: y_obs must have length p");
  }
  if (!y_obs.allFinite()) {
    throw ConfigError("twisted normal: y_obs must be finite");
  }
}

double twisted_prior_logdensity(const TwistedNormalParams& params,
                                const Vector& theta) {
  if (theta.size() != params.p) {
    throw DimensionError("twisted prior: theta has wrong length");
  }
  const double b = params.twist;
  const double ridge = theta[1] - b * theta[0] * theta[0] + 100.0 * b;
  double lp = -theta[0] * theta[0] / 200.0 - 0.5 * ridge * ridge;
  for (int j = 2; j < params.p; ++j) lp -= theta[j] * theta[j];
  return lp;
}

GridDensity2D twisted_true_bivariate_margin(const TwistedNormalParams& params,
                                            int grid_n) {
  params.validate();
  if (grid_n < 2) throw DimensionError("twisted margin: grid_n must be >= 2");
  const double b = params.twist;
  const double y1 = params.y_obs[0];
  const double y2 = params.y_obs[1];

  // theta_1 margin combines the N(0,100) prior factor with the N(y1,1)
  // likelihood factor.
  const double mean1 = 100.0 * y1 / 101.0;
  const double sd1 = std::sqrt(100.0 / 101.0);
  const double lo1 = mean1 - 6.0 * sd1;
  const double hi1 = mean1 + 6.0 * sd1;

  // theta_2 | theta_1 has prior mean b theta_1^2 - 100 b and unit variance;
  // with the unit-variance likelihood the conditional posterior sd is
  // 1/sqrt(2). Bound the conditional means over the theta_1 range.
  const double sd2 = std::sqrt(0.5);
  double mu_lo = std::numeric_limits<double>::infinity();
  double mu_hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 64; ++i) {
    const double t1 = lo1 + (hi1 - lo1) * static_cast<double>(i) / 63.0;
    const double mu = 0.5 * (b * t1 * t1 - 100.0 * b + y2);
    mu_lo = std::min(mu_lo, mu);
    mu_hi = std::max(mu_hi, mu);
  }
  const double lo2 = mu_lo - 6.0 * sd2;
  const double hi2 = mu_hi + 6.0 * sd2;

  Vector xs = linspace(lo1, hi1, grid_n);
  Vector ys = linspace(lo2, hi2, grid_n);

  TwistedNormalParams flat;
  flat.p = 2;
  flat.twist = b;
  flat.y_obs = Vector(2);
  flat.y_obs << y1, y2;

  Matrix logpost(grid_n, grid_n);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      Vector theta(2);
      theta << xs[i], ys[j];
      const double d1 = y1 - xs[i];
      const double d2 = y2 - ys[j];
      logpost(i, j) = twisted_prior_logdensity(flat, theta) -
                      0.5 * (d1 * d1 + d2 * d2);
    }
  }
  const double shift = logpost.maxCoeff();
  Matrix density = (logpost.array() - shift).exp();
  return GridDensity2D(std::move(xs), std::move(ys), std::move(density));
}

TwistedNormalModel::TwistedNormalModel(TwistedNormalParams params)
    : params_(std::move(params)) {
  params_.validate();
}

Vector TwistedNormalModel::sample_prior(RngStream& rng) const {
  // The prior factorizes: theta_1 ~ N(0, 100),
  // theta_2 | theta_1 ~ N(b theta_1^2 - 100 b, 1), theta_j ~ N(0, 1/2).
  Vector theta(params_.p);
  theta[0] = 10.0 * rng.normal();
  theta[1] =
      params_.twist * theta[0] * theta[0] - 100.0 * params_.twist + rng.normal();
  const double sd_rest = std::sqrt(0.5);
  for (int j = 2; j < params_.p; ++j) theta[j] = sd_rest * rng.normal();
  return theta;
}

double TwistedNormalModel::prior_logdensity(const Vector& theta) const {
  return twisted_prior_logdensity(params_, theta);
}

Vector TwistedNormalModel::simulate_summaries(const Vector& theta,
                                              RngStream& rng) const {
  if (theta.size() != params_.p) {
    throw DimensionError("twisted normal: theta has wrong length");
  }
  Vector s(params_.p);
  for (int j = 0; j < params_.p; ++j) s[j] = theta[j] + rng.normal();
  return s;
}

SummarySelection TwistedNormalModel::marginal_selection(int j) const {
  if (j < 0 || j >= params_.p) {
    throw DimensionError("twisted normal: parameter index out of range");
  }
  // The posterior factorizes as (theta_1, theta_2 | y_1, y_2) times
  // independent (theta_j | y_j) blocks, so (y_1, y_2) is exactly marginally
  // sufficient for each of the two twisted coordinates.
  if (j < 2) return SummarySelection({0, 1});
  return SummarySelection({j});
}

std::pair<Vector, Vector> TwistedNormalModel::pilot_box() const {
  Vector lo(params_.p);
  Vector hi(params_.p);
  lo[0] = -50.0;
  hi[0] = 50.0;
  lo[1] = -50.0;
  hi[1] = 50.0;
  for (int j = 2; j < params_.p; ++j) {
    lo[j] = -4.0;
    hi[j] = 4.0;
  }
  return {lo, hi};
}

}  // namespace abc::models
