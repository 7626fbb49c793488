#pragma once

#include <map>
#include <optional>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "abc/model.hpp"
#include "abc/parallel.hpp"
#include "abc/rejection.hpp"
#include "abc/types.hpp"

namespace abc {

// Univariate density estimate on a grid, with CDF and inverse CDF by
// monotone linear interpolation. The density integrates to one by
// trapezoid; the CDF is strictly increasing across the grid.
class MarginDensity {
 public:
  MarginDensity(Vector grid, Vector pdf);

  double lo() const { return grid_[0]; }
  double hi() const { return grid_[grid_.size() - 1]; }
  double density(double x) const;
  double log_density(double x) const;
  double cdf(double x) const;
  double inverse_cdf(double u) const;

  const Vector& grid() const { return grid_; }
  const Vector& pdf() const { return pdf_; }
  const Vector& cdf_values() const { return cdf_; }

 private:
  Vector grid_;
  Vector pdf_;
  Vector cdf_;
};

struct KdeConfig {
  std::optional<double> bandwidth;  // default: Silverman's rule
  int grid_size = 512;
};

// Gaussian-kernel KDE on grid [min - 4b, max + 4b].
MarginDensity fit_margin_kde(const Vector& samples, const KdeConfig& config = {},
                             Exec policy = Exec::Par);
MarginDensity fit_margin_kde(const Vector& samples, const Vector& weights,
                             const KdeConfig& config = {},
                             Exec policy = Exec::Par);

// Symmetric, unit-diagonal, positive-definite (min eigenvalue >= 1e-8).
class CorrelationMatrix {
 public:
  static constexpr double kMinEigenvalue = 1e-8;

  explicit CorrelationMatrix(Matrix c);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  double operator()(int i, int j) const { return matrix_(i, j); }
  const Eigen::LLT<Matrix>& llt() const { return llt_; }
  double log_det() const { return log_det_; }

 private:
  Matrix matrix_;
  Eigen::LLT<Matrix> llt_;
  double log_det_ = 0.0;
};

// Pearson correlation of the rank-based normal scores
// Phi^{-1}(rank/(r+1)). Invariant under strictly increasing transforms of
// either argument; comonotone pairs give exactly +-1.
double normal_scores_correlation(const Vector& a, const Vector& b);

// Repairs an estimated correlation matrix by eigenvalue clipping and
// diagonal rescaling. Valid inputs pass through unchanged.
CorrelationMatrix nearest_correlation(const Matrix& raw);

// Arbitrary margins tied together by a Gaussian copula.
struct MetaGaussian {
  MetaGaussian(std::vector<MarginDensity> margins, CorrelationMatrix correlation);

  std::vector<MarginDensity> margins;
  CorrelationMatrix correlation;
  int dim() const { return correlation.dim(); }
};

double meta_gaussian_logdensity(const MetaGaussian& mg, const Vector& gamma);

// Theta-only particle set: eta ~ N(0,C), gamma_j = F_j^{-1}(Phi(eta_j)).
ParticleSet sample_meta_gaussian(const MetaGaussian& mg, std::int64_t n,
                                 const RngStream& rng, Exec policy = Exec::Par);

struct CopulaConfig {
  std::int64_t pool_size = 100000;
  double accept_quantile = 0.01;
  KernelKind kernel = KernelKind::Uniform;
  bool regression_adjust = true;
  KdeConfig kde;
};

// Summary columns for each univariate run and each pair run. The default
// pair selection concatenates the two marginal selections.
struct PairSelections {
  std::vector<SummarySelection> marginal;
  std::map<std::pair<int, int>, SummarySelection> pairs;

  static PairSelections from_model(const SimulatorModel& model);
  const SummarySelection& pair(int i, int j) const;
  void validate(int p, int q) const;
};

// Fits margins by univariate ABC + KDE, pairwise copula correlations by
// bivariate ABC + normal scores, and assembles the repaired meta-Gaussian.
// All runs share one pool of prior-predictive particles.
MetaGaussian copula_abc(const SimulatorModel& model, const Vector& s_obs,
                        const PairSelections& selections,
                        const CopulaConfig& config, const RngStream& rng,
                        Exec policy = Exec::Par);
MetaGaussian copula_abc_from_pool(const ParticleSet& pool, const Vector& s_obs,
                                  const PairSelections& selections,
                                  const CopulaConfig& config,
                                  Exec policy = Exec::Par);

void to_json(nlohmann::json& j, const MetaGaussian& mg);
MetaGaussian meta_gaussian_from_json(const nlohmann::json& j);

}  // namespace abc
