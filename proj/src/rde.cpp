#include "abc/rde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "abc/linalg.hpp"
#include "abc/rejection.hpp"

namespace abc::rde {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kProbClamp = 1e-12;
}  // namespace

Vector MarginalConditionalModel::mean_basis(const Vector& theta) {
  const int p = static_cast<int>(theta.size());
  Vector basis(mean_basis_dim(p));
  basis[0] = 1.0;
  int idx = 1;
  for (int i = 0; i < p; ++i) basis[idx++] = theta[i];
  for (int i = 0; i < p; ++i) basis[idx++] = theta[i] * theta[i];
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) basis[idx++] = theta[i] * theta[j];
  }
  return basis;
}

double MarginalConditionalModel::mean(const Vector& theta) const {
  return mean_coef.dot(mean_basis(theta));
}

double MarginalConditionalModel::variance(const Vector& theta) const {
  double v = logvar_coef[0];
  for (int i = 0; i < theta_dim; ++i) v += logvar_coef[i + 1] * theta[i];
  return std::max(std::exp(v), kVarianceFloor);
}

double MarginalConditionalModel::cdf(double s, const Vector& theta) const {
  return standard_normal_cdf((s - mean(theta)) / std::sqrt(variance(theta)));
}

double MarginalConditionalModel::log_density(double s,
                                             const Vector& theta) const {
  const double var = variance(theta);
  const double t = (s - mean(theta)) / std::sqrt(var);
  return log_standard_normal_pdf(t) - 0.5 * std::log(var);
}

namespace {

struct MarginalFitWorkspace {
  Matrix mean_design;  // N x mean basis
  Matrix var_design;   // N x (p + 1)
};

double heteroscedastic_loglik(const Vector& residuals, const Vector& logvar) {
  double ll = 0.0;
  for (std::int64_t i = 0; i < residuals.size(); ++i) {
    ll += logvar[i] + residuals[i] * residuals[i] * std::exp(-logvar[i]);
  }
  return -0.5 * ll - 0.5 * kLogTwoPi * static_cast<double>(residuals.size());
}

MarginalConditionalModel fit_one_marginal(const MarginalFitWorkspace& ws,
                                          const Vector& response, int p) {
  const std::int64_t n = response.size();
  MarginalConditionalModel model;
  model.theta_dim = p;

  const double ridge_mean = 1e-10 * std::max(1.0, ws.mean_design.squaredNorm() /
                                                      static_cast<double>(n));
  const double ridge_var = 1e-10 * std::max(1.0, ws.var_design.squaredNorm() /
                                                     static_cast<double>(n));

  // Unweighted start.
  model.mean_coef =
      solve_least_squares(ws.mean_design, response, Vector(), ridge_mean)
          .coefficients.col(0);
  Vector residuals = response - ws.mean_design * model.mean_coef;

  const double base_var =
      residuals.squaredNorm() / static_cast<double>(std::max<std::int64_t>(1, n - 1));
  model.logvar_coef = Vector::Zero(p + 1);
  if (base_var <= MarginalConditionalModel::kVarianceFloor) {
    model.logvar_coef[0] = std::log(MarginalConditionalModel::kVarianceFloor);
    model.degenerate = true;
    model.loglik = heteroscedastic_loglik(
        residuals, Vector::Constant(n, model.logvar_coef[0]));
    return model;
  }
  model.logvar_coef[0] = std::log(base_var);

  Vector logvar = ws.var_design * model.logvar_coef;
  double loglik = heteroscedastic_loglik(residuals, logvar);
  model.converged = false;

  for (int iter = 0; iter < 200; ++iter) {
    // Mean step: weighted least squares with the current variances.
    const Vector weights = (-logvar.array()).exp();
    model.mean_coef =
        solve_least_squares(ws.mean_design, response, weights, ridge_mean)
            .coefficients.col(0);
    residuals = response - ws.mean_design * model.mean_coef;

    // Variance step: Fisher scoring on the log-variance coefficients, with
    // step halving so the likelihood never decreases.
    const Vector working =
        (residuals.array().square() * (-logvar.array()).exp()) - 1.0;
    const Vector delta =
        solve_least_squares(ws.var_design, working, Vector(), ridge_var)
            .coefficients.col(0);

    double step = 1.0;
    Vector candidate_coef;
    Vector candidate_logvar;
    double candidate_ll = -std::numeric_limits<double>::infinity();
    for (int half = 0; half < 30; ++half) {
      candidate_coef = model.logvar_coef + step * delta;
      candidate_logvar = ws.var_design * candidate_coef;
      candidate_ll = heteroscedastic_loglik(residuals, candidate_logvar);
      if (candidate_ll >= heteroscedastic_loglik(residuals, logvar)) break;
      step *= 0.5;
    }
    if (candidate_ll >= heteroscedastic_loglik(residuals, logvar)) {
      model.logvar_coef = candidate_coef;
      logvar = candidate_logvar;
    }

    const double new_loglik = heteroscedastic_loglik(residuals, logvar);
    if (std::fabs(new_loglik - loglik) <
        1e-8 * std::max(1.0, std::fabs(new_loglik))) {
      loglik = new_loglik;
      model.converged = true;
      break;
    }
    loglik = new_loglik;
  }
  model.loglik = loglik;
  return model;
}

}  // namespace

std::vector<MarginalConditionalModel> fit_marginal_conditionals(
    const ParticleSet& particles, Exec policy) {
  const std::int64_t n = particles.size();
  const int p = particles.param_dim();
  const int q = particles.summary_dim();
  const int basis_dim = MarginalConditionalModel::mean_basis_dim(p);
  if (n <= 2 * basis_dim) {
    throw DimensionError(
        "marginal conditionals: needs more than twice the mean basis size");
  }

  MarginalFitWorkspace ws;
  ws.mean_design.resize(n, basis_dim);
  ws.var_design.resize(n, p + 1);
  for (std::int64_t i = 0; i < n; ++i) {
    const Vector theta = particles.thetas().row(i).transpose();
    ws.mean_design.row(i) =
        MarginalConditionalModel::mean_basis(theta).transpose();
    ws.var_design(i, 0) = 1.0;
    ws.var_design.row(i).tail(p) = theta.transpose();
  }

  std::vector<MarginalConditionalModel> models(static_cast<std::size_t>(q));
  std::vector<std::string> errors(static_cast<std::size_t>(q));
  parallel_for(
      q,
      [&](std::int64_t k) {
        try {
          models[static_cast<std::size_t>(k)] =
              fit_one_marginal(ws, particles.summaries().col(k), p);
        } catch (const std::exception& e) {
          errors[static_cast<std::size_t>(k)] = e.what();
        }
      },
      policy);
  for (int k = 0; k < q; ++k) {
    if (!errors[static_cast<std::size_t>(k)].empty()) {
      throw AbcError("marginal conditional " + std::to_string(k) + ": " +
                     errors[static_cast<std::size_t>(k)]);
    }
  }
  return models;
}

Matrix transform_to_scores(const ParticleSet& particles,
                           const std::vector<MarginalConditionalModel>& marginals,
                           Exec policy) {
  const std::int64_t n = particles.size();
  const int q = particles.summary_dim();
  const int p = particles.param_dim();
  if (static_cast<int>(marginals.size()) != q) {
    throw DimensionError("transform_to_scores: one marginal model per summary");
  }
  for (const auto& m : marginals) {
    if (m.theta_dim != p) {
      throw DimensionError("transform_to_scores: marginal dimension mismatch");
    }
  }

  Matrix scores(n, q);
  parallel_for(
      n,
      [&](std::int64_t i) {
        const Vector theta = particles.thetas().row(i).transpose();
        const Vector basis = MarginalConditionalModel::mean_basis(theta);
        for (int k = 0; k < q; ++k) {
          const auto& m = marginals[static_cast<std::size_t>(k)];
          const double mu = m.mean_coef.dot(basis);
          const double sd = std::sqrt(m.variance(theta));
          const double prob = std::clamp(
              standard_normal_cdf((particles.summaries()(i, k) - mu) / sd),
              kProbClamp, 1.0 - kProbClamp);
          scores(i, k) = standard_normal_quantile(prob);
        }
      },
      policy);
  return scores;
}

double GaussianMixture::log_density(const Vector& z) const {
  const int k_count = components();
  const int d = dim();
  Vector logs(k_count);
  for (int k = 0; k < k_count; ++k) {
    const Eigen::LLT<Matrix> llt(covariances[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("mixture: covariance not positive definite");
    }
    const Vector centered = z - means[static_cast<std::size_t>(k)];
    const Vector solved = llt.matrixL().solve(centered);
    const double logdet =
        2.0 * llt.matrixLLT().diagonal().array().log().sum();
    logs[k] = std::log(weights[k]) - 0.5 * (d * kLogTwoPi + logdet +
                                            solved.squaredNorm());
  }
  return logsumexp(logs);
}

void GaussianMixture::validate() const {
  const int k_count = components();
  if (k_count < 1) throw DimensionError("mixture: needs >= 1 component");
  if (static_cast<int>(means.size()) != k_count ||
      static_cast<int>(covariances.size()) != k_count) {
    throw DimensionError("mixture: component count mismatch");
  }
  if (std::fabs(weights.sum() - 1.0) > 1e-8 || (weights.array() < 0.0).any()) {
    throw NumericalError("mixture: weights must be a distribution");
  }
  const int d = dim();
  for (int k = 0; k < k_count; ++k) {
    if (means[static_cast<std::size_t>(k)].size() != d ||
        covariances[static_cast<std::size_t>(k)].rows() != d ||
        covariances[static_cast<std::size_t>(k)].cols() != d) {
      throw DimensionError("mixture: component shape mismatch");
    }
  }
}

namespace {

struct EmFit {
  GaussianMixture mixture;
  bool ok = false;
};

// Log-density matrix (n x K) for the current parameters; returns false if a
// component covariance loses positive definiteness.
bool component_logdensities(const Matrix& data, const GaussianMixture& gmm,
                            Matrix& logdens) {
  const std::int64_t n = data.rows();
  const int d = static_cast<int>(data.cols());
  const int k_count = gmm.components();
  logdens.resize(n, k_count);
  for (int k = 0; k < k_count; ++k) {
    const Eigen::LLT<Matrix> llt(gmm.covariances[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) return false;
    const double logdet =
        2.0 * llt.matrixLLT().diagonal().array().log().sum();
    Matrix centered =
        data.rowwise() - gmm.means[static_cast<std::size_t>(k)].transpose();
    const Matrix solved =
        llt.matrixL().solve(centered.transpose());  // d x n
    logdens.col(k) =
        (-0.5 * (solved.colwise().squaredNorm().array() + d * kLogTwoPi +
                 logdet))
            .transpose();
  }
  return true;
}

// k-means++ seeding and Lloyd iterations on a subsample; returns centers.
std::vector<Vector> kmeans_centers(const Matrix& sample, int k_count,
                                   RngStream& rng, int iters) {
  const std::int64_t n = sample.rows();
  const int d = static_cast<int>(sample.cols());

  std::vector<Vector> centers;
  centers.reserve(static_cast<std::size_t>(k_count));
  Vector min_dist2 = Vector::Constant(n, std::numeric_limits<double>::max());

  const std::int64_t first =
      static_cast<std::int64_t>(rng.uniform() * static_cast<double>(n));
  centers.push_back(sample.row(std::min(first, n - 1)).transpose());
  for (int c = 1; c < k_count; ++c) {
    for (std::int64_t i = 0; i < n; ++i) {
      const double dist2 =
          (sample.row(i).transpose() - centers.back()).squaredNorm();
      min_dist2[i] = std::min(min_dist2[i], dist2);
    }
    const double total = min_dist2.sum();
    if (!(total > 0.0)) {
      centers.push_back(sample.row(std::min<std::int64_t>(
                                       static_cast<std::int64_t>(rng.uniform() * n),
                                       n - 1))
                            .transpose());
      continue;
    }
    double target = rng.uniform_oo() * total;
    std::int64_t chosen = n - 1;
    for (std::int64_t i = 0; i < n; ++i) {
      target -= min_dist2[i];
      if (target <= 0.0) {
        chosen = i;
        break;
      }
    }
    centers.push_back(sample.row(chosen).transpose());
  }

  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < iters; ++iter) {
    bool changed = false;
    for (std::int64_t i = 0; i < n; ++i) {
      int best = 0;
      double best_dist = std::numeric_limits<double>::max();
      for (int c = 0; c < k_count; ++c) {
        const double dist2 =
            (sample.row(i).transpose() - centers[static_cast<std::size_t>(c)])
                .squaredNorm();
        if (dist2 < best_dist) {
          best_dist = dist2;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    for (int c = 0; c < k_count; ++c) {
      Vector sum = Vector::Zero(d);
      std::int64_t count = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        if (assign[static_cast<std::size_t>(i)] == c) {
          sum += sample.row(i).transpose();
          ++count;
        }
      }
      if (count > 0) {
        centers[static_cast<std::size_t>(c)] = sum / static_cast<double>(count);
      } else {
        // Reseed an empty cluster at the point farthest from its center.
        std::int64_t far = 0;
        double far_dist = -1.0;
        for (std::int64_t i = 0; i < n; ++i) {
          const int a = assign[static_cast<std::size_t>(i)];
          const double dist2 =
              (sample.row(i).transpose() - centers[static_cast<std::size_t>(a)])
                  .squaredNorm();
          if (dist2 > far_dist) {
            far_dist = dist2;
            far = i;
          }
        }
        centers[static_cast<std::size_t>(c)] = sample.row(far).transpose();
      }
    }
    if (!changed) break;
  }
  return centers;
}

EmFit run_em(const Matrix& data, int k_count, const MixtureFitConfig& config,
             RngStream rng) {
  const std::int64_t n = data.rows();
  const int d = static_cast<int>(data.cols());
  EmFit fit;

  // Initialize from hard k-means assignments on a standardized subsample.
  const Vector col_mean = data.colwise().mean().transpose();
  Vector col_sd(d);
  for (int j = 0; j < d; ++j) {
    col_sd[j] = std::sqrt((data.col(j).array() - col_mean[j]).square().sum() /
                          static_cast<double>(n));
    if (!(col_sd[j] > 0.0)) col_sd[j] = 1.0;
  }

  const std::int64_t sample_n =
      std::min<std::int64_t>(n, std::max(config.kmeans_sample, 10 * k_count));
  std::vector<std::int64_t> index(static_cast<std::size_t>(n));
  std::iota(index.begin(), index.end(), 0);
  for (std::int64_t i = 0; i < sample_n; ++i) {
    const std::int64_t j =
        i + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(n - i));
    std::swap(index[static_cast<std::size_t>(i)],
              index[static_cast<std::size_t>(std::min(j, n - 1))]);
  }
  Matrix sample(sample_n, d);
  for (std::int64_t i = 0; i < sample_n; ++i) {
    sample.row(i) = (data.row(index[static_cast<std::size_t>(i)]).transpose() -
                     col_mean)
                        .cwiseQuotient(col_sd)
                        .transpose();
  }

  const std::vector<Vector> centers =
      kmeans_centers(sample, k_count, rng, config.kmeans_iter);

  GaussianMixture gmm;
  gmm.weights = Vector::Constant(k_count, 1.0 / k_count);
  gmm.means.resize(static_cast<std::size_t>(k_count));
  gmm.covariances.resize(static_cast<std::size_t>(k_count));
  gmm.n_train = n;

  // Hard-assign the full data to the k-means centers for starting moments.
  {
    std::vector<std::vector<std::int64_t>> member(
        static_cast<std::size_t>(k_count));
    for (std::int64_t i = 0; i < n; ++i) {
      const Vector z =
          (data.row(i).transpose() - col_mean).cwiseQuotient(col_sd);
      int best = 0;
      double best_dist = std::numeric_limits<double>::max();
      for (int c = 0; c < k_count; ++c) {
        const double dist2 = (z - centers[static_cast<std::size_t>(c)]).squaredNorm();
        if (dist2 < best_dist) {
          best_dist = dist2;
          best = c;
        }
      }
      member[static_cast<std::size_t>(best)].push_back(i);
    }
    const Matrix global_cov =
        (data.rowwise() - col_mean.transpose()).transpose() *
        (data.rowwise() - col_mean.transpose()) / static_cast<double>(n);
    for (int c = 0; c < k_count; ++c) {
      const auto& rows = member[static_cast<std::size_t>(c)];
      if (rows.size() < static_cast<std::size_t>(d + 2)) {
        gmm.means[static_cast<std::size_t>(c)] = col_mean;
        gmm.covariances[static_cast<std::size_t>(c)] = global_cov;
        gmm.covariances[static_cast<std::size_t>(c)].diagonal().array() += 1e-10;
        gmm.weights[c] = 1.0 / static_cast<double>(k_count);
        continue;
      }
      Vector mu = Vector::Zero(d);
      for (std::int64_t i : rows) mu += data.row(i).transpose();
      mu /= static_cast<double>(rows.size());
      Matrix cov = Matrix::Zero(d, d);
      for (std::int64_t i : rows) {
        const Vector c0 = data.row(i).transpose() - mu;
        cov += c0 * c0.transpose();
      }
      cov /= static_cast<double>(rows.size());
      cov.diagonal().array() += 1e-10;
      gmm.means[static_cast<std::size_t>(c)] = mu;
      gmm.covariances[static_cast<std::size_t>(c)] = cov;
      gmm.weights[c] =
          static_cast<double>(rows.size()) / static_cast<double>(n);
    }
    gmm.weights /= gmm.weights.sum();
  }

  Matrix logdens;
  double loglik = -std::numeric_limits<double>::infinity();
  Matrix resp(n, k_count);

  for (int iter = 0; iter < config.max_iter; ++iter) {
    if (!component_logdensities(data, gmm, logdens)) return fit;

    // E-step in log space.
    double new_loglik = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      Vector row = logdens.row(i).transpose();
      for (int k = 0; k < k_count; ++k) row[k] += std::log(gmm.weights[k]);
      const double lse = logsumexp(row);
      new_loglik += lse;
      for (int k = 0; k < k_count; ++k) resp(i, k) = std::exp(row[k] - lse);
    }

    if (iter > 0 && new_loglik < loglik - 1e-7 * (1.0 + std::fabs(loglik))) {
      gmm.em_monotone = false;
    }
    const bool done =
        iter > 0 &&
        std::fabs(new_loglik - loglik) <
            config.tol * std::max(1.0, std::fabs(new_loglik));
    loglik = new_loglik;
    if (done) break;

    // M-step with a small covariance regularizer.
    for (int k = 0; k < k_count; ++k) {
      const double nk = resp.col(k).sum();
      if (!(nk > static_cast<double>(d) * 1e-6)) return fit;
      const Vector mu = (resp.col(k).transpose() * data).transpose() / nk;
      Matrix centered = data.rowwise() - mu.transpose();
      const Matrix cov =
          (centered.transpose() * resp.col(k).asDiagonal() * centered) / nk;
      gmm.weights[k] = nk / static_cast<double>(n);
      gmm.means[static_cast<std::size_t>(k)] = mu;
      gmm.covariances[static_cast<std::size_t>(k)] = cov;
      gmm.covariances[static_cast<std::size_t>(k)].diagonal().array() += 1e-10;
    }
    gmm.weights /= gmm.weights.sum();
  }

  const double params = static_cast<double>(k_count - 1) +
                        static_cast<double>(k_count) * d +
                        static_cast<double>(k_count) * d * (d + 1) / 2.0;
  gmm.loglik = loglik;
  gmm.bic = -2.0 * loglik + params * std::log(static_cast<double>(n));
  fit.mixture = std::move(gmm);
  fit.ok = true;
  return fit;
}

}  // namespace

GaussianMixture fit_joint_mixture(const Matrix& scores, const Matrix& thetas,
                                  const MixtureFitConfig& config,
                                  const RngStream& rng, Exec policy) {
  const std::int64_t n = scores.rows();
  if (thetas.rows() != n) {
    throw DimensionError("fit_joint_mixture: row mismatch");
  }
  const int d = static_cast<int>(scores.cols() + thetas.cols());
  if (n <= 10 * d) {
    throw DimensionError("fit_joint_mixture: needs n > 10 (q + p)");
  }
  if (config.k_max < 1 || config.restarts < 1) {
    throw ConfigError("fit_joint_mixture: k_max and restarts must be >= 1");
  }

  Matrix data(n, d);
  data.leftCols(scores.cols()) = scores;
  data.rightCols(thetas.cols()) = thetas;

  std::optional<GaussianMixture> best;
  for (int k = 1; k <= config.k_max; ++k) {
    const int restarts = k == 1 ? 1 : config.restarts;
    std::vector<EmFit> fits(static_cast<std::size_t>(restarts));
    parallel_for(
        restarts,
        [&](std::int64_t r) {
          const RngStream restart_rng = child_stream(
              rng, static_cast<std::uint64_t>(k) * 1000 +
                       static_cast<std::uint64_t>(r));
          fits[static_cast<std::size_t>(r)] =
              run_em(data, k, config, restart_rng);
        },
        policy);

    std::optional<GaussianMixture> best_k;
    for (auto& f : fits) {
      if (!f.ok) continue;
      if (!best_k || f.mixture.loglik > best_k->loglik) {
        best_k = std::move(f.mixture);
      }
    }
    if (!best_k) {
      if (k == 1) throw NumericalError("fit_joint_mixture: EM degenerate at K=1");
      continue;
    }
    if (!best || best_k->bic < best->bic) best = std::move(best_k);
  }
  if (!best) throw NumericalError("fit_joint_mixture: every restart degenerate");
  best->validate();
  return *best;
}

ConditionalGMM condition_mixture(const GaussianMixture& gmm,
                                 const Vector& theta, int theta_dim) {
  gmm.validate();
  const int d = gmm.dim();
  const int p = theta_dim;
  const int q = d - p;
  if (p < 1 || q < 1) {
    throw DimensionError("condition_mixture: both blocks must be non-empty");
  }
  if (theta.size() != p) {
    throw DimensionError("condition_mixture: theta has wrong length");
  }
  if (!theta.allFinite()) {
    throw NumericalError("condition_mixture: theta must be finite");
  }

  const int k_count = gmm.components();
  ConditionalGMM cond;
  cond.weights = Vector(k_count);
  cond.means.resize(static_cast<std::size_t>(k_count));
  cond.covariances.resize(static_cast<std::size_t>(k_count));

  Vector logw(k_count);
  for (int k = 0; k < k_count; ++k) {
    const Vector& mu = gmm.means[static_cast<std::size_t>(k)];
    const Matrix& cov = gmm.covariances[static_cast<std::size_t>(k)];
    const Vector mu_theta = mu.tail(p);
    const Matrix cov_tt = cov.bottomRightCorner(p, p);
    const Matrix cov_ut = cov.topRightCorner(q, p);
    const Matrix cov_uu = cov.topLeftCorner(q, q);

    const Eigen::LLT<Matrix> llt(cov_tt);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("condition_mixture: theta block not PD");
    }
    const Vector centered = theta - mu_theta;
    const Vector half = llt.matrixL().solve(centered);
    const double logdet =
        2.0 * llt.matrixLLT().diagonal().array().log().sum();
    logw[k] = std::log(gmm.weights[k]) -
              0.5 * (p * kLogTwoPi + logdet + half.squaredNorm());

    const Matrix gain = llt.solve(cov_ut.transpose());  // p x q
    cond.means[static_cast<std::size_t>(k)] =
        mu.head(q) + gain.transpose() * centered;
    Matrix cc = cov_uu - cov_ut * gain;
    cc = 0.5 * (cc + cc.transpose());
    cond.covariances[static_cast<std::size_t>(k)] = std::move(cc);
  }
  const double lse = logsumexp(logw);
  for (int k = 0; k < k_count; ++k) cond.weights[k] = std::exp(logw[k] - lse);
  cond.weights /= cond.weights.sum();
  return cond;
}

double ConditionalGMM::log_density(const Vector& u) const {
  const int k_count = static_cast<int>(weights.size());
  const int d = static_cast<int>(u.size());
  Vector logs(k_count);
  for (int k = 0; k < k_count; ++k) {
    const Eigen::LLT<Matrix> llt(covariances[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("conditional mixture: covariance not PD");
    }
    const Vector half = llt.matrixL().solve(u - means[static_cast<std::size_t>(k)]);
    const double logdet =
        2.0 * llt.matrixLLT().diagonal().array().log().sum();
    logs[k] = std::log(std::max(weights[k], 1e-300)) -
              0.5 * (d * kLogTwoPi + logdet + half.squaredNorm());
  }
  return logsumexp(logs);
}

RdeBundle fit_rde(const ParticleSet& particles, const MixtureFitConfig& config,
                  const RngStream& rng, Exec policy) {
  RdeBundle bundle;
  bundle.summary_dim = particles.summary_dim();
  bundle.theta_dim = particles.param_dim();
  bundle.marginals = fit_marginal_conditionals(particles, policy);
  const Matrix scores = transform_to_scores(particles, bundle.marginals, policy);
  bundle.mixture =
      fit_joint_mixture(scores, particles.thetas(), config, rng, policy);
  return bundle;
}

double likelihood_approx(const RdeBundle& bundle, const Vector& s,
                         const Vector& theta) {
  const int q = bundle.summary_dim;
  const int p = bundle.theta_dim;
  if (s.size() != q) throw DimensionError("likelihood_approx: s length");
  if (theta.size() != p) throw DimensionError("likelihood_approx: theta length");

  const Vector basis = MarginalConditionalModel::mean_basis(theta);
  Vector u(q);
  double jacobian = 0.0;
  for (int k = 0; k < q; ++k) {
    const auto& m = bundle.marginals[static_cast<std::size_t>(k)];
    const double mu = m.mean_coef.dot(basis);
    const double var = m.variance(theta);
    const double sd = std::sqrt(var);
    const double t = (s[k] - mu) / sd;
    const double prob =
        std::clamp(standard_normal_cdf(t), kProbClamp, 1.0 - kProbClamp);
    u[k] = standard_normal_quantile(prob);
    const double log_f = log_standard_normal_pdf(t) - 0.5 * std::log(var);
    jacobian += log_f - log_standard_normal_pdf(u[k]);
  }

  const ConditionalGMM cond = condition_mixture(bundle.mixture, theta, p);
  return cond.log_density(u) + jacobian;
}

Vector PilotProposal::sample(RngStream& rng) const {
  const int p = static_cast<int>(mean.size());
  const Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("pilot proposal: covariance not PD");
  }
  const Matrix chol = llt.matrixL();
  Vector xi(p);
  // (theta - mean)' Sigma^{-1} (theta - mean) == |xi|^2 for theta = mean + L xi.
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (int j = 0; j < p; ++j) xi[j] = rng.normal();
    if (xi.squaredNorm() < radius2) return mean + chol * xi;
  }
  throw NumericalError("pilot proposal: truncation rejection cap hit");
}

ProposalSampler PilotProposal::sampler() const {
  PilotProposal copy = *this;
  return [copy](RngStream& rng) { return copy.sample(rng); };
}

PilotProposal build_pilot(const SimulatorModel& model, std::int64_t n,
                          double threshold, const Vector& s_obs,
                          const RngStream& rng, Exec policy) {
  const int p = model.param_dim();
  if (n < 10 * p) throw DimensionError("build_pilot: needs n >= 10 p");
  if (!(threshold > 0.0)) throw ConfigError("build_pilot: threshold must be > 0");

  const auto [lo, hi] = model.pilot_box();
  if (lo.size() != p || hi.size() != p || ((hi - lo).array() <= 0.0).any()) {
    throw ConfigError("build_pilot: invalid pilot box");
  }
  const ProposalSampler uniform_box = [lo = lo, hi = hi, p](RngStream& r) {
    Vector theta(p);
    for (int j = 0; j < p; ++j) {
      theta[j] = lo[j] + (hi[j] - lo[j]) * r.uniform_oo();
    }
    return theta;
  };

  const ParticleSet pool = generate_particles(model, n, rng, uniform_box, policy);
  const DistanceConfig dist = standardize(pool);
  const Vector d = scaled_distances(pool, s_obs,
                                    SummarySelection::all(pool.summary_dim()),
                                    dist, policy);

  std::vector<std::int64_t> keep;
  for (std::int64_t i = 0; i < n; ++i) {
    if (d[i] <= threshold) keep.push_back(i);
  }
  if (static_cast<int>(keep.size()) < p + 1) {
    throw AbcError("build_pilot: only " + std::to_string(keep.size()) +
                   " particles within the threshold (need > p)");
  }

  Matrix retained(static_cast<std::int64_t>(keep.size()), p);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    retained.row(static_cast<std::int64_t>(i)) =
        pool.thetas().row(keep[i]);
  }
  PilotProposal pilot;
  pilot.mean = retained.colwise().mean().transpose();
  const Matrix centered = retained.rowwise() - pilot.mean.transpose();
  pilot.covariance = centered.transpose() * centered /
                     static_cast<double>(retained.rows() - 1);
  pilot.covariance.diagonal().array() +=
      1e-10 * std::max(1.0, pilot.covariance.trace());
  pilot.radius2 = 9.0;
  return pilot;
}

McmcResult mcmc_sample(const std::function<double(const Vector&)>& loglik,
                       const std::function<double(const Vector&)>& logprior,
                       const Vector& init, const McmcConfig& config,
                       const RngStream& rng) {
  const int p = static_cast<int>(init.size());
  if (p < 1) throw DimensionError("mcmc: empty initial point");
  if (config.steps < 1 || config.burnin < 0) {
    throw ConfigError("mcmc: steps must be >= 1 and burnin >= 0");
  }

  auto log_post = [&](const Vector& theta) {
    const double lp = logprior(theta);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return lp + loglik(theta);
  };

  Vector current = init;
  double current_lp = log_post(current);
  if (!std::isfinite(current_lp)) {
    throw NumericalError("mcmc: log posterior not finite at init");
  }

  RngStream stream = child_stream(rng, 0);
  const double scale = 2.38 * 2.38 / static_cast<double>(p);

  Matrix proposal_cov =
      Matrix::Identity(p, p) * (config.initial_step * config.initial_step);
  Eigen::LLT<Matrix> prop_llt(proposal_cov * scale);

  // Running moments of the burn-in chain for Haario-style adaptation.
  Vector running_mean = Vector::Zero(p);
  Matrix running_outer = Matrix::Zero(p, p);
  std::int64_t seen = 0;

  Matrix chain(config.steps, p);
  std::int64_t accepted_burnin = 0;
  std::int64_t accepted = 0;
  const std::int64_t total = config.burnin + config.steps;
  Vector xi(p);

  for (std::int64_t t = 0; t < total; ++t) {
    for (int j = 0; j < p; ++j) xi[j] = stream.normal();
    const Vector proposal = current + prop_llt.matrixL() * xi;
    const double proposal_lp = log_post(proposal);
    const double log_u = std::log(stream.uniform_oo());
    if (log_u < proposal_lp - current_lp) {
      current = proposal;
      current_lp = proposal_lp;
      if (t < config.burnin) {
        ++accepted_burnin;
      } else {
        ++accepted;
      }
    }

    if (t < config.burnin) {
      ++seen;
      running_mean += (current - running_mean) / static_cast<double>(seen);
      running_outer += current * current.transpose();
      if (seen >= 2 * p && (seen % 50 == 0 || t + 1 == config.burnin)) {
        Matrix cov = running_outer / static_cast<double>(seen) -
                     running_mean * running_mean.transpose();
        cov = 0.5 * (cov + cov.transpose());
        cov.diagonal().array() += 1e-10 + 1e-12 * cov.trace();
        const Eigen::LLT<Matrix> test(cov * scale);
        if (test.info() == Eigen::Success) {
          proposal_cov = cov;
          prop_llt = test;
        }
      }
      if (t + 1 == config.burnin && accepted_burnin == 0) {
        throw NumericalError("mcmc: no acceptances during burn-in");
      }
    } else {
      chain.row(t - config.burnin) = current.transpose();
    }
  }

  McmcResult result;
  result.chain = std::move(chain);
  result.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(config.steps);
  result.proposal_covariance = proposal_cov * scale;
  return result;
}

namespace {

nlohmann::json vec_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json mat_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::int64_t i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

Vector vec_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<std::int64_t>(v.size()));
}

Matrix mat_from(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw ConfigError("bundle JSON: empty matrix");
  Matrix m(static_cast<std::int64_t>(rows.size()),
           static_cast<std::int64_t>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw ConfigError("bundle JSON: ragged matrix");
    }
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<std::int64_t>(i), static_cast<std::int64_t>(k)) = rows[i][k];
    }
  }
  return m;
}

}  // namespace

void to_json(nlohmann::json& j, const RdeBundle& bundle) {
  nlohmann::json marginals = nlohmann::json::array();
  for (const auto& m : bundle.marginals) {
    marginals.push_back(nlohmann::json{{"theta_dim", m.theta_dim},
                                       {"mean_coef", vec_json(m.mean_coef)},
                                       {"logvar_coef", vec_json(m.logvar_coef)},
                                       {"converged", m.converged},
                                       {"degenerate", m.degenerate}});
  }
  nlohmann::json mixture;
  mixture["weights"] = vec_json(bundle.mixture.weights);
  nlohmann::json means = nlohmann::json::array();
  nlohmann::json covs = nlohmann::json::array();
  for (int k = 0; k < bundle.mixture.components(); ++k) {
    means.push_back(vec_json(bundle.mixture.means[static_cast<std::size_t>(k)]));
    covs.push_back(mat_json(bundle.mixture.covariances[static_cast<std::size_t>(k)]));
  }
  mixture["means"] = std::move(means);
  mixture["covariances"] = std::move(covs);
  j = nlohmann::json{{"summary_dim", bundle.summary_dim},
                     {"theta_dim", bundle.theta_dim},
                     {"marginals", std::move(marginals)},
                     {"mixture", std::move(mixture)}};
}

RdeBundle rde_bundle_from_json(const nlohmann::json& j) {
  RdeBundle bundle;
  bundle.summary_dim = j.at("summary_dim").get<int>();
  bundle.theta_dim = j.at("theta_dim").get<int>();
  for (const auto& entry : j.at("marginals")) {
    MarginalConditionalModel m;
    m.theta_dim = entry.at("theta_dim").get<int>();
    m.mean_coef = vec_from(entry.at("mean_coef"));
    m.logvar_coef = vec_from(entry.at("logvar_coef"));
    m.converged = entry.value("converged", true);
    m.degenerate = entry.value("degenerate", false);
    bundle.marginals.push_back(std::move(m));
  }
  const auto& mixture = j.at("mixture");
  bundle.mixture.weights = vec_from(mixture.at("weights"));
  for (const auto& entry : mixture.at("means")) {
    bundle.mixture.means.push_back(vec_from(entry));
  }
  for (const auto& entry : mixture.at("covariances")) {
    bundle.mixture.covariances.push_back(mat_from(entry));
  }
  bundle.mixture.n_train = 0;
  bundle.mixture.validate();
  if (static_cast<int>(bundle.marginals.size()) != bundle.summary_dim) {
    throw ConfigError("bundle JSON: marginal count mismatch");
  }
  return bundle;
}

}  // namespace abc::rde
