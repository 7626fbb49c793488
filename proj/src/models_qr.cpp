#include <algorithm>
#include <cmath>

#include "abc/linalg.hpp"
#include "abc/models.hpp"

namespace abc::models {

void QuantileCurveParams::validate() const {
  const int m = level_count();
  if (m < 2) throw ConfigError("quantile curves: need at least two levels");
  for (int i = 0; i < m; ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      throw ConfigError("quantile curves: levels must lie in (0,1)");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw ConfigError("quantile curves: levels must be strictly increasing");
    }
  }
  if (coef.rows() != m || coef.cols() != 3) {
    throw ConfigError("quantile curves: coefficient matrix must be m x 3");
  }
  if (!coef.allFinite()) {
    throw ConfigError("quantile curves: non-finite coefficients");
  }
}

double QuantileCurveParams::curve(int level, double x) const {
  return coef(level, 0) + coef(level, 1) * x + coef(level, 2) * x * x;
}

bool QuantileCurveParams::monotone_at(const Vector& xs) const {
  for (std::int64_t i = 0; i < xs.size(); ++i) {
    for (int l = 1; l < level_count(); ++l) {
      if (!(curve(l, xs[i]) > curve(l - 1, xs[i]))) return false;
    }
  }
  return true;
}

Vector simulate_quantile_regression(const QuantileCurveParams& params,
                                    const Vector& x_obs, double y_obs_mean,
                                    double y_obs_sd, RngStream& rng) {
  params.validate();
  if (!params.monotone_at(x_obs)) {
    throw SimulationError("quantile curves cross at an observed covariate");
  }
  if (!(y_obs_sd > 0.0)) {
    throw SimulationError("quantile simulator: response spread must be > 0");
  }
  const int m = params.level_count();
  const double tail_sd = 3.0 * y_obs_sd;

  Vector y(x_obs.size());
  for (std::int64_t i = 0; i < x_obs.size(); ++i) {
    const double u = rng.uniform_oo();
    const double x = x_obs[i];
    if (u < params.levels[0]) {
      // Tail draw below the lowest curve: inverse-CDF truncated normal.
      const double cap =
          standard_normal_cdf((params.curve(0, x) - y_obs_mean) / tail_sd);
      const double w = std::max(1e-300, cap * rng.uniform_oo());
      y[i] = y_obs_mean + tail_sd * standard_normal_quantile(w);
    } else if (u > params.levels[m - 1]) {
      const double floor_u = standard_normal_cdf(
          (params.curve(m - 1, x) - y_obs_mean) / tail_sd);
      const double w = std::min(1.0 - 1e-16,
                                floor_u + (1.0 - floor_u) * rng.uniform_oo());
      y[i] = y_obs_mean + tail_sd * standard_normal_quantile(w);
    } else {
      const double* begin = params.levels.data();
      const double* end = begin + m;
      const std::int64_t j =
          std::min<std::int64_t>(std::upper_bound(begin, end, u) - begin - 1,
                                 m - 2);
      const double lo = params.curve(static_cast<int>(j), x);
      const double hi = params.curve(static_cast<int>(j) + 1, x);
      const double span = params.levels[j + 1] - params.levels[j];
      y[i] = lo + (hi - lo) / span * (u - params.levels[j]);
    }
  }
  return y;
}

namespace {

double sample_sd(const Vector& v) {
  const double mean = v.mean();
  if (v.size() < 2) return 0.0;
  return std::sqrt((v.array() - mean).square().sum() /
                   static_cast<double>(v.size() - 1));
}

}  // namespace

Vector fit_pinball_curve(const Vector& y, const Vector& x, double tau) {
  const std::int64_t n = y.size();
  if (x.size() != n || n < 4) {
    throw DimensionError("pinball fit: needs matching x, y with n >= 4");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError("pinball fit: tau must lie in (0,1)");
  }

  Matrix basis(n, 3);
  basis.col(0).setOnes();
  basis.col(1) = x;
  basis.col(2) = x.array().square();

  const double sd_y = sample_sd(y);
  const double width = std::max(1e-4 * sd_y, 1e-12);

  // Smoothed check loss: rho(u) = (tau - 1/2) u + huber(u)/2 with quadratic
  // zone |u| <= width. Convex and C^1.
  auto objective = [&](const Vector& beta, Vector& grad) {
    const Vector fitted = basis * beta;
    double value = 0.0;
    grad.setZero();
    for (std::int64_t i = 0; i < n; ++i) {
      const double u = y[i] - fitted[i];
      double huber, dhuber;
      if (std::fabs(u) <= width) {
        huber = u * u / (2.0 * width);
        dhuber = u / width;
      } else {
        huber = std::fabs(u) - 0.5 * width;
        dhuber = u > 0.0 ? 1.0 : -1.0;
      }
      value += (tau - 0.5) * u + 0.5 * huber;
      const double dvalue_du = (tau - 0.5) + 0.5 * dhuber;
      grad -= dvalue_du * basis.row(i).transpose();
    }
    return value;
  };

  // Least-squares start shifted to the requested quantile of its residuals.
  LeastSquaresResult ls = solve_least_squares(basis, y, Vector(), 1e-10);
  Vector beta0 = ls.coefficients.col(0);
  Vector residuals = y - basis * beta0;
  std::sort(residuals.data(), residuals.data() + residuals.size());
  beta0[0] += empirical_quantile(residuals, tau);

  return minimize_bfgs(objective, std::move(beta0), 500,
                       1e-10 * std::max(1.0, sd_y) * static_cast<double>(n));
}

Vector qr_summaries(const Vector& y, const Vector& x, const Vector& levels) {
  const std::int64_t n = y.size();
  const int m = static_cast<int>(levels.size());
  if (x.size() != n) throw DimensionError("qr summaries: x, y length mismatch");
  if (n < 30) throw DimensionError("qr summaries: needs n >= 30");

  std::vector<double> distinct(x.data(), x.data() + n);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) {
    throw DimensionError("qr summaries: quadratic fit needs >= 3 distinct x");
  }

  Vector s(5 * m + 100);
  for (int l = 0; l < m; ++l) {
    const Vector beta = fit_pinball_curve(y, x, levels[l]);
    s[l] = beta[0];
    s[m + l] = beta[1];
    s[2 * m + l] = beta[2];

    std::int64_t above = 0;
    std::int64_t below = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double fitted = beta[0] + beta[1] * x[i] + beta[2] * x[i] * x[i];
      if (y[i] > fitted) ++above;
      if (y[i] < fitted) ++below;
    }
    s[3 * m + l] = static_cast<double>(above) / static_cast<double>(n);
    s[4 * m + l] = static_cast<double>(below) / static_cast<double>(n);
  }

  Vector sorted = y;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  for (int t = 1; t <= 100; ++t) {
    s[5 * m + t - 1] =
        empirical_quantile(sorted, static_cast<double>(t) / 101.0);
  }
  return s;
}

QuantileRegressionModel::QuantileRegressionModel(QuantileRegressionConfig config)
    : config_(std::move(config)) {
  const int m = static_cast<int>(config_.levels.size());
  if (m < 2) throw ConfigError("qr model: need at least two levels");
  if (config_.x_obs.size() < 30 || config_.y_obs.size() != config_.x_obs.size()) {
    throw ConfigError("qr model: x_obs and y_obs must match with n >= 30");
  }
  if (config_.prior_mean.rows() != m || config_.prior_mean.cols() != 3 ||
      config_.prior_sd.rows() != m || config_.prior_sd.cols() != 3) {
    throw ConfigError("qr model: prior mean/sd must be m x 3");
  }
  if ((config_.prior_sd.array() <= 0.0).any()) {
    throw ConfigError("qr model: prior sd must be > 0");
  }
  y_obs_mean_ = config_.y_obs.mean();
  y_obs_sd_ = sample_sd(config_.y_obs);
  if (!(y_obs_sd_ > 0.0)) {
    throw ConfigError("qr model: observed responses are constant");
  }
}

Matrix QuantileRegressionModel::unpack_matrix(const Vector& theta) const {
  const int m = level_count();
  if (theta.size() != 3 * m) {
    throw DimensionError("qr model: theta has wrong length");
  }
  Matrix coef(m, 3);
  for (int c = 0; c < 3; ++c) {
    for (int l = 0; l < m; ++l) coef(l, c) = theta[c * m + l];
  }
  return coef;
}

QuantileCurveParams QuantileRegressionModel::unpack(const Vector& theta) const {
  QuantileCurveParams params;
  params.levels = config_.levels;
  params.coef = unpack_matrix(theta);
  params.validate();
  return params;
}

Vector QuantileRegressionModel::sample_prior(RngStream& rng) const {
  const int m = level_count();
  // Independent normal coefficients, rejected until the curves are ordered
  // at every observed covariate.
  for (int attempt = 0; attempt < config_.prior_retry_cap; ++attempt) {
    Vector theta(3 * m);
    for (int c = 0; c < 3; ++c) {
      for (int l = 0; l < m; ++l) {
        theta[c * m + l] =
            config_.prior_mean(l, c) + config_.prior_sd(l, c) * rng.normal();
      }
    }
    const QuantileCurveParams params = unpack(theta);
    if (params.monotone_at(config_.x_obs)) return theta;
  }
  throw SimulationError("qr model: prior rejection cap hit (curves cross)");
}

double QuantileRegressionModel::prior_logdensity(const Vector& theta) const {
  const QuantileCurveParams params = unpack(theta);
  if (!params.monotone_at(config_.x_obs)) {
    return -std::numeric_limits<double>::infinity();
  }
  const int m = level_count();
  double lp = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int l = 0; l < m; ++l) {
      const double z =
          (theta[c * m + l] - config_.prior_mean(l, c)) / config_.prior_sd(l, c);
      lp += log_standard_normal_pdf(z) - std::log(config_.prior_sd(l, c));
    }
  }
  return lp;
}

Vector QuantileRegressionModel::simulate_summaries(const Vector& theta,
                                                   RngStream& rng) const {
  const QuantileCurveParams params = unpack(theta);
  const Vector y = simulate_quantile_regression(params, config_.x_obs,
                                                y_obs_mean_, y_obs_sd_, rng);
  return qr_summaries(y, config_.x_obs, config_.levels);
}

SummarySelection QuantileRegressionModel::marginal_selection(int j) const {
  const int m = level_count();
  if (j < 0 || j >= 3 * m) {
    throw DimensionError("qr model: parameter index out of range");
  }
  const int level = j % m;
  const double tau = config_.levels[level];

  std::vector<int> idx;
  idx.push_back(j);           // the matching coefficient estimate
  idx.push_back(3 * m + level);  // proportion above the curve
  idx.push_back(4 * m + level);  // proportion below the curve

  // The 20 data quantiles closest in level to tau.
  std::vector<int> ts(100);
  for (int t = 1; t <= 100; ++t) ts[static_cast<std::size_t>(t - 1)] = t;
  std::stable_sort(ts.begin(), ts.end(), [&](int a, int b) {
    return std::fabs(static_cast<double>(a) / 101.0 - tau) <
           std::fabs(static_cast<double>(b) / 101.0 - tau);
  });
  std::vector<int> nearest(ts.begin(), ts.begin() + 20);
  std::sort(nearest.begin(), nearest.end());
  for (int t : nearest) idx.push_back(5 * m + t - 1);
  return SummarySelection(std::move(idx));
}

}  // namespace abc::models
