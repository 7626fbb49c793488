#pragma once

#include <memory>

#include <nlohmann/json_fwd.hpp>

#include "abc/copula.hpp"
#include "abc/grid.hpp"
#include "abc/model.hpp"

namespace abc::models {

// ---------------------------------------------------------------------------
// Twisted normal: N(theta, I_p) data model under a banana-shaped prior whose
// (theta_1, theta_2) dependence flips direction between the tails.
// ---------------------------------------------------------------------------

struct TwistedNormalParams {
  int p = 2;
  double twist = 0.1;  // b
  Vector y_obs;        // defaults to (10, 0, ..., 0)

  static TwistedNormalParams with_dim(int p, double twist = 0.1);
  void validate() const;
};

// Unnormalized log prior:
//   -theta_1^2/200 - (theta_2 - b theta_1^2 + 100 b)^2/2 - sum_{j>=3} theta_j^2
double twisted_prior_logdensity(const TwistedNormalParams& params,
                                const Vector& theta);

// Exact (theta_1, theta_2) posterior margin on a grid; coordinates j >= 3
// factor out of the posterior and drop on normalization.
GridDensity2D twisted_true_bivariate_margin(const TwistedNormalParams& params,
                                            int grid_n = 400);

class TwistedNormalModel : public SimulatorModel {
 public:
  explicit TwistedNormalModel(TwistedNormalParams params);

  std::string id() const override { return "twisted"; }
  int param_dim() const override { return params_.p; }
  int summary_dim() const override { return params_.p; }
  Vector sample_prior(RngStream& rng) const override;
  double prior_logdensity(const Vector& theta) const override;
  Vector simulate_summaries(const Vector& theta, RngStream& rng) const override;
  SummarySelection marginal_selection(int j) const override;
  std::pair<Vector, Vector> pilot_box() const override;

  const TwistedNormalParams& params() const { return params_; }

 private:
  TwistedNormalParams params_;
};

// ---------------------------------------------------------------------------
// g-and-k distribution: defined by its quantile function, trivial to
// simulate, density-free.
// ---------------------------------------------------------------------------

struct GkParams {
  double loc = 0.0;    // A
  double scale = 1.0;  // B > 0
  double skew = 0.0;   // g
  double kurt = 0.0;   // k > -0.5
  static constexpr double kAsymmetry = 0.8;  // c

  void validate() const;
};

// Q(u) = A + B [1 + c tanh(g z/2)] (1 + z^2)^k z with z = Phi^{-1}(u).
double gk_quantile(const GkParams& params, double u);

// Interpolated quantile of a sorted sample at level u (index u*(n-1)).
double empirical_quantile(const Vector& sorted, double u);

// Four summaries of a univariate sample: median, interquartile range,
// quartile skewness, and the octile tail-weight ratio.
Vector gk_summaries(const Vector& data);

struct GkModelConfig {
  int n_obs = 1000;
  Vector box_lo;  // uniform prior box; defaults to the narrow returns box
  Vector box_hi;
};

class GkModel : public SimulatorModel {
 public:
  explicit GkModel(GkModelConfig config);

  std::string id() const override { return "gk"; }
  int param_dim() const override { return 4; }
  int summary_dim() const override { return 4; }
  Vector sample_prior(RngStream& rng) const override;
  double prior_logdensity(const Vector& theta) const override;
  Vector simulate_summaries(const Vector& theta, RngStream& rng) const override;
  SummarySelection marginal_selection(int j) const override;
  std::pair<Vector, Vector> pilot_box() const override;

 private:
  GkModelConfig config_;
};

// ---------------------------------------------------------------------------
// Multivariate g-and-k: one g-and-k margin per data column, Gaussian copula
// across columns, correlation prior by rescaled Wishart.
// ---------------------------------------------------------------------------

// V ~ Wishart(I_q, q) by Bartlett construction, rescaled to unit diagonal.
CorrelationMatrix sample_wishart_correlation(int q, RngStream& rng);

Matrix simulate_multi_gk(const std::vector<GkParams>& margins,
                         const CorrelationMatrix& correlation, int n_obs,
                         RngStream& rng);

// Per-column g-and-k summaries followed by pairwise normal-scores
// correlations (pairs in row-major upper-triangle order).
Vector multi_gk_summaries(const Matrix& data);

struct MultiGkConfig {
  int margins = 2;
  int n_obs = 1000;
  Vector box_lo;  // shared per-margin box
  Vector box_hi;
};

class MultiGkModel : public SimulatorModel {
 public:
  explicit MultiGkModel(MultiGkConfig config);

  // Theta layout: (A_j, B_j, g_j, k_j) blocks for each margin, then the
  // correlation upper triangle in row-major order.
  std::string id() const override { return "multigk"; }
  int param_dim() const override;
  int summary_dim() const override;
  Vector sample_prior(RngStream& rng) const override;
  double prior_logdensity(const Vector& theta) const override;
  Vector simulate_summaries(const Vector& theta, RngStream& rng) const override;
  SummarySelection marginal_selection(int j) const override;

  int data_columns() const { return config_.margins; }
  std::vector<GkParams> unpack_margins(const Vector& theta) const;
  Matrix unpack_correlation(const Vector& theta) const;

 private:
  MultiGkConfig config_;
};

// ---------------------------------------------------------------------------
// Multiple quantile regression with an interpolated likelihood simulator.
// ---------------------------------------------------------------------------

struct QuantileCurveParams {
  Vector levels;  // strictly increasing, inside (0,1)
  Matrix coef;    // m x 3: intercept, slope, quadratic per level

  void validate() const;
  int level_count() const { return static_cast<int>(levels.size()); }
  double curve(int level, double x) const;
  // Curves ordered Q(tau_i | x) < Q(tau_{i+1} | x) at every x.
  bool monotone_at(const Vector& xs) const;
};

// Synthetic responses: linear interpolation between neighbouring quantile
// curves for interior u, and a wide truncated normal in the tails (below
// the lowest curve / above the highest).
Vector simulate_quantile_regression(const QuantileCurveParams& params,
                                    const Vector& x_obs, double y_obs_mean,
                                    double y_obs_sd, RngStream& rng);

// Quadratic quantile-curve fit (intercept, slope, quadratic) minimizing a
// Huber-smoothed check loss, width 1e-4 * sd(y).
Vector fit_pinball_curve(const Vector& y, const Vector& x, double tau);

// Summary vector: fitted coefficients per level, above/below-curve
// proportions per level, then 100 equally spaced data quantiles.
Vector qr_summaries(const Vector& y, const Vector& x, const Vector& levels);

struct QuantileRegressionConfig {
  Vector levels;
  Vector x_obs;
  Vector y_obs;
  Matrix prior_mean;  // m x 3
  Matrix prior_sd;    // m x 3
  int prior_retry_cap = 100000;
};

class QuantileRegressionModel : public SimulatorModel {
 public:
  explicit QuantileRegressionModel(QuantileRegressionConfig config);

  // Theta layout: all intercepts, then all slopes, then all quadratics.
  std::string id() const override { return "qr"; }
  int param_dim() const override { return 3 * level_count(); }
  int summary_dim() const override { return 5 * level_count() + 100; }
  Vector sample_prior(RngStream& rng) const override;
  double prior_logdensity(const Vector& theta) const override;
  Vector simulate_summaries(const Vector& theta, RngStream& rng) const override;
  SummarySelection marginal_selection(int j) const override;

  int level_count() const { return static_cast<int>(config_.levels.size()); }
  QuantileCurveParams unpack(const Vector& theta) const;
  const QuantileRegressionConfig& config() const { return config_; }

 private:
  Matrix unpack_matrix(const Vector& theta) const;

  QuantileRegressionConfig config_;
  double y_obs_mean_ = 0.0;
  double y_obs_sd_ = 1.0;
};

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct ModelSpec {
  std::shared_ptr<SimulatorModel> model;
  Vector s_obs;
};

// Builds a registered model ("twisted", "gk", "multigk", "qr") from a JSON
// parameter object; unknown keys are rejected.
ModelSpec make_model(const std::string& id, const nlohmann::json& params);
std::vector<std::string> registered_models();

}  // namespace abc::models
