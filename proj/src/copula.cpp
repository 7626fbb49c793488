#include "abc/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "abc/adjust.hpp"

namespace abc {

namespace {

double interp(const Vector& xs, const Vector& ys, double x) {
  const auto* begin = xs.data();
  const auto* end = xs.data() + xs.size();
  const auto* it = std::upper_bound(begin, end, x);
  if (it == begin) return ys[0];
  if (it == end) return ys[ys.size() - 1];
  const std::int64_t hi = it - begin;
  const double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
  return ys[hi - 1] + t * (ys[hi] - ys[hi - 1]);
}

}  // namespace

MarginDensity::MarginDensity(Vector grid, Vector pdf)
    : grid_(std::move(grid)), pdf_(std::move(pdf)) {
  const std::int64_t n = grid_.size();
  if (n < 2 || pdf_.size() != n) {
    throw DimensionError("margin density: grid and pdf must share length >= 2");
  }
  if (!grid_.allFinite() || !pdf_.allFinite()) {
    throw NumericalError("margin density: non-finite input");
  }
  for (std::int64_t i = 1; i < n; ++i) {
    if (!(grid_[i] > grid_[i - 1])) {
      throw NumericalError("margin density: grid must be strictly increasing");
    }
  }
  if ((pdf_.array() < 0.0).any()) {
    throw NumericalError("margin density: negative density values");
  }

  cdf_ = Vector::Zero(n);
  for (std::int64_t i = 1; i < n; ++i) {
    cdf_[i] = cdf_[i - 1] +
              0.5 * (pdf_[i] + pdf_[i - 1]) * (grid_[i] - grid_[i - 1]);
  }
  const double total = cdf_[n - 1];
  if (!(total > 0.0)) {
    throw NumericalError("margin density: zero total mass");
  }
  pdf_ /= total;
  cdf_ /= total;
  // Nudge any flat CDF step so grid inversion stays well defined.
  for (std::int64_t i = 1; i < n; ++i) {
    if (cdf_[i] <= cdf_[i - 1]) {
      cdf_[i] = std::nextafter(cdf_[i - 1],
                               std::numeric_limits<double>::infinity());
    }
  }
}

double MarginDensity::density(double x) const {
  if (x < lo() || x > hi()) return 0.0;
  return std::max(0.0, interp(grid_, pdf_, x));
}

double MarginDensity::log_density(double x) const {
  const double d = density(x);
  return d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
}

double MarginDensity::cdf(double x) const {
  if (x <= lo()) return 0.0;
  if (x >= hi()) return 1.0;
  return std::clamp(interp(grid_, cdf_, x), 0.0, 1.0);
}

double MarginDensity::inverse_cdf(double u) const {
  if (u <= cdf_[0]) return grid_[0];
  const std::int64_t n = grid_.size();
  if (u >= cdf_[n - 1]) return grid_[n - 1];
  const auto* begin = cdf_.data();
  const auto* it = std::upper_bound(begin, begin + n, u);
  const std::int64_t hi_idx = it - begin;
  const double t = (u - cdf_[hi_idx - 1]) / (cdf_[hi_idx] - cdf_[hi_idx - 1]);
  return grid_[hi_idx - 1] + t * (grid_[hi_idx] - grid_[hi_idx - 1]);
}

namespace {

double weighted_quantile(const std::vector<std::pair<double, double>>& sorted,
                         double total_weight, double u) {
  double cum = 0.0;
  for (const auto& [value, weight] : sorted) {
    cum += weight;
    if (cum >= u * total_weight) return value;
  }
  return sorted.back().first;
}

}  // namespace

MarginDensity fit_margin_kde(const Vector& samples, const KdeConfig& config,
                             Exec policy) {
  return fit_margin_kde(samples, Vector::Ones(samples.size()), config, policy);
}

MarginDensity fit_margin_kde(const Vector& samples, const Vector& weights,
                             const KdeConfig& config, Exec policy) {
  const std::int64_t n = samples.size();
  if (n < 10) throw DimensionError("kde: needs at least 10 samples");
  if (weights.size() != n) throw DimensionError("kde: weight length mismatch");
  if ((weights.array() < 0.0).any() || weights.sum() <= 0.0) {
    throw NumericalError("kde: weights must be nonnegative with positive sum");
  }

  std::vector<std::pair<double, double>> data;
  data.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) data.emplace_back(samples[i], weights[i]);
  std::sort(data.begin(), data.end());

  const double wsum = weights.sum();
  const double mean = samples.dot(weights) / wsum;
  const double var =
      ((samples.array() - mean).square() * weights.array()).sum() / wsum;
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw NumericalError("kde: zero spread");

  double b;
  if (config.bandwidth) {
    b = *config.bandwidth;
    if (!(b > 0.0)) throw ConfigError("kde: bandwidth must be > 0");
  } else {
    const double n_eff = wsum * wsum / weights.squaredNorm();
    const double iqr = weighted_quantile(data, wsum, 0.75) -
                       weighted_quantile(data, wsum, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    b = 0.9 * spread * std::pow(n_eff, -0.2);
  }

  const int grid_n = std::max(config.grid_size, 8);
  const double lo = data.front().first - 4.0 * b;
  const double hi = data.back().first + 4.0 * b;
  Vector grid(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                       static_cast<double>(grid_n - 1);
  }

  const double cutoff = 8.0 * b;
  const double norm = 1.0 / (b * wsum);
  Vector pdf(grid_n);
  parallel_for(
      grid_n,
      [&](std::int64_t g) {
        const double x = grid[g];
        auto first = std::lower_bound(
            data.begin(), data.end(), std::make_pair(x - cutoff, 0.0));
        double acc = 0.0;
        for (auto it = first; it != data.end() && it->first <= x + cutoff;
             ++it) {
          acc += it->second * standard_normal_pdf((x - it->first) / b);
        }
        pdf[g] = acc * norm;
      },
      policy);

  return MarginDensity(std::move(grid), std::move(pdf));
}

CorrelationMatrix::CorrelationMatrix(Matrix c) : matrix_(std::move(c)) {
  const int p = static_cast<int>(matrix_.rows());
  if (matrix_.cols() != p || p < 1) {
    throw DimensionError("correlation matrix: must be square");
  }
  if (!matrix_.allFinite()) {
    throw NumericalError("correlation matrix: non-finite entries");
  }
  for (int i = 0; i < p; ++i) {
    if (std::fabs(matrix_(i, i) - 1.0) > 1e-12) {
      throw NumericalError("correlation matrix: diagonal must be 1");
    }
    for (int j = 0; j < i; ++j) {
      if (std::fabs(matrix_(i, j) - matrix_(j, i)) > 1e-12) {
        throw NumericalError("correlation matrix: must be symmetric");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_,
                                            Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < kMinEigenvalue * (1.0 - 1e-10)) {
    throw NumericalError("correlation matrix: not positive definite");
  }
  llt_.compute(matrix_);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("correlation matrix: Cholesky failed");
  }
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double normal_scores_correlation(const Vector& a, const Vector& b) {
  const std::int64_t r = a.size();
  if (b.size() != r) throw DimensionError("normal scores: length mismatch");
  if (r < 3) throw DimensionError("normal scores: needs r >= 3");
  if (a.minCoeff() == a.maxCoeff() || b.minCoeff() == b.maxCoeff()) {
    throw NumericalError("normal scores: constant column");
  }

  const std::vector<std::int64_t> ra = column_ranks(a);
  const std::vector<std::int64_t> rb = column_ranks(b);

  bool same = true;
  bool reversed = true;
  for (std::int64_t i = 0; i < r; ++i) {
    same = same && ra[static_cast<std::size_t>(i)] == rb[static_cast<std::size_t>(i)];
    reversed = reversed &&
               rb[static_cast<std::size_t>(i)] ==
                   r + 1 - ra[static_cast<std::size_t>(i)];
  }
  // Identical (reversed) ranks are comonotone (countermonotone) by
  // construction; the scores correlation is exactly +-1.
  if (same) return 1.0;
  if (reversed) return -1.0;

  Vector za(r), zb(r);
  const double denom = static_cast<double>(r + 1);
  for (std::int64_t i = 0; i < r; ++i) {
    za[i] = standard_normal_quantile(
        static_cast<double>(ra[static_cast<std::size_t>(i)]) / denom);
    zb[i] = standard_normal_quantile(
        static_cast<double>(rb[static_cast<std::size_t>(i)]) / denom);
  }
  const double ma = za.mean();
  const double mb = zb.mean();
  const Vector ca = za.array() - ma;
  const Vector cb = zb.array() - mb;
  const double corr =
      ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  return std::clamp(corr, -1.0, 1.0);
}

CorrelationMatrix nearest_correlation(const Matrix& raw) {
  const int p = static_cast<int>(raw.rows());
  if (raw.cols() != p || p < 1) {
    throw DimensionError("nearest correlation: must be square");
  }
  for (int i = 0; i < p; ++i) {
    if (std::fabs(raw(i, i) - 1.0) > 1e-10) {
      throw NumericalError("nearest correlation: diagonal must be 1");
    }
    for (int j = 0; j < i; ++j) {
      if (std::fabs(raw(i, j) - raw(j, i)) > 1e-10) {
        throw NumericalError("nearest correlation: input must be symmetric");
      }
    }
  }

  Matrix current = 0.5 * (raw + raw.transpose());
  current.diagonal().setOnes();
  {
    Eigen::SelfAdjointEigenSolver<Matrix> probe(current,
                                                Eigen::EigenvaluesOnly);
    if (probe.eigenvalues().minCoeff() >= CorrelationMatrix::kMinEigenvalue) {
      return CorrelationMatrix(std::move(current));
    }
  }

  // Eigenvalue clipping then diagonal rescaling can leave the smallest
  // eigenvalue just below the floor; escalate the clip level until the
  // invariant holds.
  double clip = CorrelationMatrix::kMinEigenvalue;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(current);
    Vector lambda = eig.eigenvalues().cwiseMax(clip);
    Matrix repaired = eig.eigenvectors() * lambda.asDiagonal() *
                      eig.eigenvectors().transpose();
    const Vector d = repaired.diagonal().cwiseSqrt();
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) repaired(i, j) /= d[i] * d[j];
    }
    repaired = 0.5 * (repaired + repaired.transpose());
    repaired.diagonal().setOnes();

    Eigen::SelfAdjointEigenSolver<Matrix> check(repaired,
                                                Eigen::EigenvaluesOnly);
    if (check.eigenvalues().minCoeff() >= CorrelationMatrix::kMinEigenvalue) {
      return CorrelationMatrix(std::move(repaired));
    }
    current = repaired;
    clip *= 4.0;
  }
  throw NumericalError("nearest correlation: repair did not converge");
}

MetaGaussian::MetaGaussian(std::vector<MarginDensity> margins_in,
                           CorrelationMatrix correlation_in)
    : margins(std::move(margins_in)), correlation(std::move(correlation_in)) {
  if (static_cast<int>(margins.size()) != correlation.dim()) {
    throw DimensionError("meta-Gaussian: margin count != correlation dim");
  }
}

double meta_gaussian_logdensity(const MetaGaussian& mg, const Vector& gamma) {
  const int p = mg.dim();
  if (gamma.size() != p) {
    throw DimensionError("meta-Gaussian: point has wrong dimension");
  }
  double log_margins = 0.0;
  Vector z(p);
  for (int j = 0; j < p; ++j) {
    const MarginDensity& margin = mg.margins[static_cast<std::size_t>(j)];
    if (gamma[j] < margin.lo() || gamma[j] > margin.hi()) {
      return -std::numeric_limits<double>::infinity();
    }
    const double ld = margin.log_density(gamma[j]);
    if (!std::isfinite(ld)) return -std::numeric_limits<double>::infinity();
    log_margins += ld;
    const double u = std::clamp(margin.cdf(gamma[j]), 1e-16, 1.0 - 1e-16);
    z[j] = standard_normal_quantile(u);
  }
  const Vector solved = mg.correlation.llt().solve(z);
  const double quad = z.squaredNorm() - z.dot(solved);
  return -0.5 * mg.correlation.log_det() + 0.5 * quad + log_margins;
}

ParticleSet sample_meta_gaussian(const MetaGaussian& mg, std::int64_t n,
                                 const RngStream& rng, Exec policy) {
  if (n < 1) throw DimensionError("sample_meta_gaussian: n must be >= 1");
  const int p = mg.dim();
  const Matrix chol = mg.correlation.llt().matrixL();

  Matrix thetas(n, p);
  parallel_for(
      n,
      [&](std::int64_t i) {
        RngStream stream = child_stream(rng, static_cast<std::uint64_t>(i));
        Vector xi(p);
        for (int j = 0; j < p; ++j) xi[j] = stream.normal();
        const Vector eta = chol * xi;
        for (int j = 0; j < p; ++j) {
          thetas(i, j) = mg.margins[static_cast<std::size_t>(j)].inverse_cdf(
              standard_normal_cdf(eta[j]));
        }
      },
      policy);

  ParticleMeta meta;
  meta.model_id = "meta_gaussian";
  meta.seed = rng.seed();
  return ParticleSet(std::move(thetas), Matrix(n, 0), Vector::Ones(n),
                     std::move(meta));
}

PairSelections PairSelections::from_model(const SimulatorModel& model) {
  PairSelections sel;
  const int p = model.param_dim();
  sel.marginal.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) sel.marginal.push_back(model.marginal_selection(j));
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      sel.pairs.emplace(std::make_pair(i, j), model.pair_selection(i, j));
    }
  }
  return sel;
}

const SummarySelection& PairSelections::pair(int i, int j) const {
  const auto key = i < j ? std::make_pair(i, j) : std::make_pair(j, i);
  const auto it = pairs.find(key);
  if (it == pairs.end()) {
    throw ConfigError("no summary selection for pair (" + std::to_string(i) +
                      "," + std::to_string(j) + ")");
  }
  return it->second;
}

void PairSelections::validate(int p, int q) const {
  if (static_cast<int>(marginal.size()) != p) {
    throw ConfigError("pair selections: need one marginal selection per parameter");
  }
  for (const SummarySelection& s : marginal) s.check_bounds(q);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) pair(i, j).check_bounds(q);
  }
}

MetaGaussian copula_abc_from_pool(const ParticleSet& pool, const Vector& s_obs,
                                  const PairSelections& selections,
                                  const CopulaConfig& config, Exec policy) {
  const int p = pool.param_dim();
  const int q = pool.summary_dim();
  selections.validate(p, q);

  const DistanceConfig dist = standardize(pool);
  const KernelConfig kernel =
      KernelConfig::with_quantile(config.kernel, config.accept_quantile);

  auto run_abc = [&](const SummarySelection& sel) {
    ParticleSet accepted =
        rejection_abc(pool, s_obs, sel, kernel, dist, Exec::Serial);
    if (config.regression_adjust) {
      accepted = regression_adjust(accepted, s_obs);
    }
    return accepted;
  };

  std::vector<std::pair<int, int>> pair_keys;
  pair_keys.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) pair_keys.emplace_back(i, j);
  }

  std::vector<std::optional<MarginDensity>> margins(
      static_cast<std::size_t>(p));
  Vector pair_corr(static_cast<std::int64_t>(pair_keys.size()));
  std::vector<std::string> errors(
      static_cast<std::size_t>(p) + pair_keys.size());

  const std::int64_t tasks =
      static_cast<std::int64_t>(p) + static_cast<std::int64_t>(pair_keys.size());
  parallel_for(
      tasks,
      [&](std::int64_t t) {
        try {
          if (t < p) {
            const int j = static_cast<int>(t);
            const ParticleSet run =
                run_abc(selections.marginal[static_cast<std::size_t>(j)]);
            margins[static_cast<std::size_t>(j)] = fit_margin_kde(
                run.thetas().col(j), run.weights(), config.kde, Exec::Serial);
          } else {
            const auto [i, j] =
                pair_keys[static_cast<std::size_t>(t - p)];
            const ParticleSet run = run_abc(selections.pair(i, j));
            pair_corr[t - p] =
                normal_scores_correlation(run.thetas().col(i),
                                          run.thetas().col(j));
          }
        } catch (const std::exception& e) {
          errors[static_cast<std::size_t>(t)] = e.what();
        }
      },
      policy);

  for (std::int64_t t = 0; t < tasks; ++t) {
    if (!errors[static_cast<std::size_t>(t)].empty()) {
      if (t < p) {
        throw AbcError("copula margin " + std::to_string(t) + ": " +
                       errors[static_cast<std::size_t>(t)]);
      }
      const auto [i, j] = pair_keys[static_cast<std::size_t>(t - p)];
      throw AbcError("copula pair (" + std::to_string(i) + "," +
                     std::to_string(j) + "): " +
                     errors[static_cast<std::size_t>(t)]);
    }
  }

  Matrix c = Matrix::Identity(p, p);
  for (std::size_t k = 0; k < pair_keys.size(); ++k) {
    const auto [i, j] = pair_keys[k];
    c(i, j) = pair_corr[static_cast<std::int64_t>(k)];
    c(j, i) = c(i, j);
  }

  std::vector<MarginDensity> fitted;
  fitted.reserve(static_cast<std::size_t>(p));
  for (auto& m : margins) fitted.push_back(std::move(*m));
  return MetaGaussian(std::move(fitted), nearest_correlation(c));
}

MetaGaussian copula_abc(const SimulatorModel& model, const Vector& s_obs,
                        const PairSelections& selections,
                        const CopulaConfig& config, const RngStream& rng,
                        Exec policy) {
  const ParticleSet pool =
      generate_particles(model, config.pool_size, rng, policy);
  return copula_abc_from_pool(pool, s_obs, selections, config, policy);
}

void to_json(nlohmann::json& j, const MetaGaussian& mg) {
  nlohmann::json margins = nlohmann::json::array();
  for (const MarginDensity& m : mg.margins) {
    nlohmann::json entry;
    entry["grid"] = std::vector<double>(m.grid().data(),
                                        m.grid().data() + m.grid().size());
    entry["pdf"] = std::vector<double>(m.pdf().data(),
                                       m.pdf().data() + m.pdf().size());
    entry["cdf"] = std::vector<double>(
        m.cdf_values().data(), m.cdf_values().data() + m.cdf_values().size());
    margins.push_back(std::move(entry));
  }
  const int p = mg.dim();
  nlohmann::json corr = nlohmann::json::array();
  for (int i = 0; i < p; ++i) {
    std::vector<double> row(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) row[static_cast<std::size_t>(k)] = mg.correlation(i, k);
    corr.push_back(row);
  }
  j = nlohmann::json{{"margins", std::move(margins)},
                     {"correlation", std::move(corr)}};
}

MetaGaussian meta_gaussian_from_json(const nlohmann::json& j) {
  std::vector<MarginDensity> margins;
  for (const auto& entry : j.at("margins")) {
    const auto grid = entry.at("grid").get<std::vector<double>>();
    const auto pdf = entry.at("pdf").get<std::vector<double>>();
    margins.emplace_back(
        Eigen::Map<const Vector>(grid.data(), static_cast<std::int64_t>(grid.size())),
        Eigen::Map<const Vector>(pdf.data(), static_cast<std::int64_t>(pdf.size())));
  }
  const auto rows = j.at("correlation").get<std::vector<std::vector<double>>>();
  const int p = static_cast<int>(rows.size());
  Matrix c(p, p);
  for (int i = 0; i < p; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != p) {
      throw ConfigError("meta-Gaussian JSON: ragged correlation matrix");
    }
    for (int k = 0; k < p; ++k) c(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return MetaGaussian(std::move(margins), nearest_correlation(c));
}

}  // namespace abc
