#pragma once

#include <functional>
#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "abc/model.hpp"
#include "abc/parallel.hpp"
#include "abc/types.hpp"

namespace abc::rde {

using abc::Matrix;
using abc::Vector;

// Heteroscedastic Gaussian regression of one summary on theta: quadratic
// mean (intercept, linear, squares, pairwise interactions) and log-linear
// variance, fitted by alternating weighted least squares / Fisher scoring.
struct MarginalConditionalModel {
  int theta_dim = 0;
  Vector mean_coef;    // on mean_basis(theta)
  Vector logvar_coef;  // on [1, theta]
  bool converged = true;
  bool degenerate = false;
  double loglik = 0.0;

  static constexpr double kVarianceFloor = 1e-12;
  static int mean_basis_dim(int p) { return 1 + 2 * p + p * (p - 1) / 2; }
  static Vector mean_basis(const Vector& theta);

  double mean(const Vector& theta) const;
  double variance(const Vector& theta) const;  // >= kVarianceFloor
  double cdf(double s, const Vector& theta) const;
  double log_density(double s, const Vector& theta) const;
};

std::vector<MarginalConditionalModel> fit_marginal_conditionals(
    const ParticleSet& particles, Exec policy = Exec::Par);

// U(i,k) = Phi^{-1}(F_k(s_ik | theta_i)), probabilities clamped to
// [1e-12, 1 - 1e-12]. With exact marginal models each column is standard
// normal regardless of theta.
Matrix transform_to_scores(const ParticleSet& particles,
                           const std::vector<MarginalConditionalModel>& marginals,
                           Exec policy = Exec::Par);

struct GaussianMixture {
  Vector weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;

  // fit diagnostics
  double loglik = 0.0;
  double bic = 0.0;
  bool em_monotone = true;
  std::int64_t n_train = 0;

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
  double log_density(const Vector& z) const;
  void validate() const;
};

struct MixtureFitConfig {
  int k_max = 5;
  int restarts = 10;
  int max_iter = 300;
  double tol = 1e-8;
  int kmeans_sample = 5000;
  int kmeans_iter = 20;
};

// EM over the concatenated rows [U theta]; the component count is chosen by
// BIC over 1..k_max with k-means++-seeded restarts.
GaussianMixture fit_joint_mixture(const Matrix& scores, const Matrix& thetas,
                                  const MixtureFitConfig& config,
                                  const RngStream& rng, Exec policy = Exec::Par);

struct ConditionalGMM {
  Vector weights;  // sums to one
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
  double log_density(const Vector& u) const;
};

// Conditions the leading block on the trailing theta block: weights
// reweight by the theta-marginal component densities, moments are the
// Gaussian conditionals.
ConditionalGMM condition_mixture(const GaussianMixture& gmm,
                                 const Vector& theta, int theta_dim);

// Fitted likelihood estimator: marginal conditionals plus the joint score
// mixture.
struct RdeBundle {
  std::vector<MarginalConditionalModel> marginals;
  GaussianMixture mixture;
  int summary_dim = 0;
  int theta_dim = 0;
};

RdeBundle fit_rde(const ParticleSet& particles, const MixtureFitConfig& config,
                  const RngStream& rng, Exec policy = Exec::Par);

// log L(s | theta): conditional mixture density of the scores times the
// change-of-variables product over the summary coordinates.
double likelihood_approx(const RdeBundle& bundle, const Vector& s,
                         const Vector& theta);

// Truncated-normal proposal over the high-likelihood region: N(mean, cov)
// restricted to squared Mahalanobis distance < radius2.
struct PilotProposal {
  Vector mean;
  Matrix covariance;
  double radius2 = 9.0;

  Vector sample(RngStream& rng) const;
  ProposalSampler sampler() const;
};

// Uniform sweep over the model's pilot box; moments of the thetas whose
// scaled summary distance to s_obs is within the threshold.
PilotProposal build_pilot(const SimulatorModel& model, std::int64_t n,
                          double threshold, const Vector& s_obs,
                          const RngStream& rng, Exec policy = Exec::Par);

struct McmcConfig {
  std::int64_t steps = 10000;
  std::int64_t burnin = 2000;
  double initial_step = 0.1;
};

struct McmcResult {
  Matrix chain;  // steps x p, post burn-in
  double acceptance_rate = 0.0;
  Matrix proposal_covariance;
};

// Random-walk Metropolis with covariance adapted during burn-in
// (2.38^2 / p scaling of the running chain covariance) and frozen after.
McmcResult mcmc_sample(const std::function<double(const Vector&)>& loglik,
                       const std::function<double(const Vector&)>& logprior,
                       const Vector& init, const McmcConfig& config,
                       const RngStream& rng);

void to_json(nlohmann::json& j, const RdeBundle& bundle);
RdeBundle rde_bundle_from_json(const nlohmann::json& j);

}  // namespace abc::rde
