#include "abc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "abc/adjust.hpp"
#include "abc/copula.hpp"
#include "abc/models.hpp"
#include "abc/rejection.hpp"

namespace abc::eval {

namespace {

double uniform_spacing(const Vector& grid, const char* axis) {
  const double step = grid[1] - grid[0];
  for (std::int64_t i = 2; i < grid.size(); ++i) {
    if (std::fabs((grid[i] - grid[i - 1]) - step) > 1e-9 * std::fabs(step)) {
      throw NumericalError(std::string("kde2d: ") + axis +
                           " grid must be uniform");
    }
  }
  return step;
}

double weighted_sd(const Vector& values, const Vector& weights, double wsum) {
  const double mean = values.dot(weights) / wsum;
  const double var =
      ((values.array() - mean).square() * weights.array()).sum() / wsum;
  return std::sqrt(var);
}

}  // namespace

GridDensity2D kde2d(const Matrix& samples, const Vector& weights,
                    const Vector& xs, const Vector& ys, Exec policy) {
  const std::int64_t r = samples.rows();
  if (samples.cols() != 2) throw DimensionError("kde2d: samples must be r x 2");
  if (r < 50) throw DimensionError("kde2d: needs at least 50 samples");
  if (weights.size() != r) throw DimensionError("kde2d: weight length mismatch");
  const double wsum = weights.sum();
  if (!(wsum > 0.0) || (weights.array() < 0.0).any()) {
    throw NumericalError("kde2d: weights must be nonnegative with positive sum");
  }

  const double dx = uniform_spacing(xs, "x");
  const double dy = uniform_spacing(ys, "y");

  const double sx = weighted_sd(samples.col(0), weights, wsum);
  const double sy = weighted_sd(samples.col(1), weights, wsum);
  if (!(sx > 0.0) || !(sy > 0.0)) {
    throw NumericalError("kde2d: degenerate sample spread");
  }
  const double n_eff = wsum * wsum / weights.squaredNorm();
  // Silverman for dimension two reduces to sd * n^{-1/6}.
  const double bx = sx * std::pow(n_eff, -1.0 / 6.0);
  const double by = sy * std::pow(n_eff, -1.0 / 6.0);

  const std::int64_t nx = xs.size();
  const std::int64_t ny = ys.size();

  // Linear binning; points outside the grid pile onto the edge bins.
  Matrix mass = Matrix::Zero(nx, ny);
  for (std::int64_t i = 0; i < r; ++i) {
    const double gx =
        std::clamp((samples(i, 0) - xs[0]) / dx, 0.0, static_cast<double>(nx - 1));
    const double gy =
        std::clamp((samples(i, 1) - ys[0]) / dy, 0.0, static_cast<double>(ny - 1));
    const std::int64_t ix = std::min<std::int64_t>(
        static_cast<std::int64_t>(gx), nx - 2);
    const std::int64_t iy = std::min<std::int64_t>(
        static_cast<std::int64_t>(gy), ny - 2);
    const double tx = gx - static_cast<double>(ix);
    const double ty = gy - static_cast<double>(iy);
    const double w = weights[i] / wsum;
    mass(ix, iy) += w * (1.0 - tx) * (1.0 - ty);
    mass(ix + 1, iy) += w * tx * (1.0 - ty);
    mass(ix, iy + 1) += w * (1.0 - tx) * ty;
    mass(ix + 1, iy + 1) += w * tx * ty;
  }

  // Separable Gaussian smoothing of the binned mass.
  const auto make_taps = [](double bandwidth, double step) {
    const std::int64_t half =
        static_cast<std::int64_t>(std::ceil(6.0 * bandwidth / step));
    Vector taps(2 * half + 1);
    for (std::int64_t k = -half; k <= half; ++k) {
      taps[k + half] =
          standard_normal_pdf(static_cast<double>(k) * step / bandwidth) /
          bandwidth;
    }
    return taps;
  };
  const Vector taps_x = make_taps(bx, dx);
  const Vector taps_y = make_taps(by, dy);
  const std::int64_t half_x = (taps_x.size() - 1) / 2;
  const std::int64_t half_y = (taps_y.size() - 1) / 2;

  Matrix smooth_x(nx, ny);
  parallel_for(
      nx,
      [&](std::int64_t i) {
        for (std::int64_t j = 0; j < ny; ++j) {
          double acc = 0.0;
          const std::int64_t k_lo = std::max<std::int64_t>(-half_x, -i);
          const std::int64_t k_hi = std::min<std::int64_t>(half_x, nx - 1 - i);
          for (std::int64_t k = k_lo; k <= k_hi; ++k) {
            acc += taps_x[k + half_x] * mass(i + k, j);
          }
          smooth_x(i, j) = acc;
        }
      },
      policy);

  Matrix density(nx, ny);
  parallel_for(
      nx,
      [&](std::int64_t i) {
        for (std::int64_t j = 0; j < ny; ++j) {
          double acc = 0.0;
          const std::int64_t k_lo = std::max<std::int64_t>(-half_y, -j);
          const std::int64_t k_hi = std::min<std::int64_t>(half_y, ny - 1 - j);
          for (std::int64_t k = k_lo; k <= k_hi; ++k) {
            acc += taps_y[k + half_y] * smooth_x(i, j + k);
          }
          density(i, j) = acc;
        }
      },
      policy);

  return GridDensity2D(xs, ys, std::move(density));
}

double kl_divergence(const GridDensity2D& truth, const GridDensity2D& approx) {
  if (!truth.same_grid(approx, 1e-12)) {
    throw DimensionError("kl_divergence: grids differ");
  }
  constexpr double kFloor = 1e-12;
  const std::int64_t nx = truth.xs.size();
  const std::int64_t ny = truth.ys.size();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(nx * ny));
  for (std::int64_t i = 0; i < nx; ++i) {
    const double wx = GridDensity2D::trapezoid_weight(truth.xs, i);
    for (std::int64_t j = 0; j < ny; ++j) {
      const double t = truth.density(i, j);
      if (t <= kFloor) continue;
      const double a = std::max(approx.density(i, j), kFloor);
      const double wy = GridDensity2D::trapezoid_weight(truth.ys, j);
      terms.push_back(wx * wy * t * std::log(t / a));
    }
  }
  return pairwise_sum(terms);
}

std::string to_string(Method method) {
  switch (method) {
    case Method::Rejection: return "rejection";
    case Method::Marginal: return "marginal";
    case Method::Regression: return "regression";
    case Method::RegressionMarginal: return "regression_marginal";
    case Method::Copula: return "copula";
  }
  return "rejection";
}

Method method_from_string(const std::string& name) {
  if (name == "rejection") return Method::Rejection;
  if (name == "marginal") return Method::Marginal;
  if (name == "regression") return Method::Regression;
  if (name == "regression_marginal" || name == "regression+marginal") {
    return Method::RegressionMarginal;
  }
  if (name == "copula") return Method::Copula;
  throw ConfigError("unknown method '" + name + "'");
}

const BenchmarkCell* BenchmarkReport::find(Method method, int p) const {
  for (const BenchmarkCell& cell : cells) {
    if (cell.method == method && cell.p == p) return &cell;
  }
  return nullptr;
}

namespace {

struct RepOutcome {
  std::map<Method, double> kl;
  std::map<Method, std::string> errors;
};

// Univariate ABC samples for every parameter, sorted, for the marginal
// adjustment. Optionally regression-adjusted per run.
MarginalSamples univariate_marginals(const SimulatorModel& model,
                                     const ParticleSet& pool,
                                     const Vector& s_obs,
                                     const DistanceConfig& dist,
                                     const KernelConfig& kernel,
                                     bool adjust) {
  const int p = pool.param_dim();
  MarginalSamples out;
  out.sorted.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    ParticleSet run = rejection_abc(pool, s_obs, model.marginal_selection(j),
                                    kernel, dist, Exec::Serial);
    if (adjust) run = regression_adjust(run, s_obs);
    Vector col = run.thetas().col(j);
    std::sort(col.data(), col.data() + col.size());
    out.sorted.push_back(std::move(col));
  }
  return out;
}

RepOutcome run_replication(const models::TwistedNormalModel& model,
                           const BenchmarkConfig& config,
                           const GridDensity2D& truth, const RngStream& rng) {
  RepOutcome outcome;
  const Vector& s_obs = model.params().y_obs;
  const int p = model.param_dim();

  const RngStream pool_rng = child_stream(rng, 0);
  const RngStream copula_rng = child_stream(rng, 1);
  const ParticleSet pool =
      generate_particles(model, config.pool_size, pool_rng, Exec::Serial);
  const DistanceConfig dist = standardize(pool);
  const KernelConfig kernel = KernelConfig::with_quantile(
      KernelKind::Uniform, config.accept_quantile);

  auto kde_pair = [&](const ParticleSet& particles) {
    Matrix pair(particles.size(), 2);
    pair.col(0) = particles.thetas().col(0);
    pair.col(1) = particles.thetas().col(1);
    return kde2d(pair, particles.weights(), truth.xs, truth.ys, Exec::Serial);
  };

  auto want = [&](Method m) {
    return std::find(config.methods.begin(), config.methods.end(), m) !=
           config.methods.end();
  };

  std::optional<ParticleSet> joint;
  try {
    joint = rejection_abc(pool, s_obs, SummarySelection::all(p), kernel, dist,
                          Exec::Serial);
  } catch (const std::exception& e) {
    for (Method m : {Method::Rejection, Method::Marginal, Method::Regression,
                     Method::RegressionMarginal}) {
      if (want(m)) outcome.errors[m] = e.what();
    }
  }

  if (joint && want(Method::Rejection)) {
    try {
      outcome.kl[Method::Rejection] = kl_divergence(truth, kde_pair(*joint));
    } catch (const std::exception& e) {
      outcome.errors[Method::Rejection] = e.what();
    }
  }

  if (joint && want(Method::Regression)) {
    try {
      outcome.kl[Method::Regression] =
          kl_divergence(truth, kde_pair(regression_adjust(*joint, s_obs)));
    } catch (const std::exception& e) {
      outcome.errors[Method::Regression] = e.what();
    }
  }

  if (joint && want(Method::Marginal)) {
    try {
      const MarginalSamples marginals =
          univariate_marginals(model, pool, s_obs, dist, kernel, false);
      outcome.kl[Method::Marginal] = kl_divergence(
          truth, kde_pair(marginal_adjust(*joint, marginals, Exec::Serial)));
    } catch (const std::exception& e) {
      outcome.errors[Method::Marginal] = e.what();
    }
  }

  if (joint && want(Method::RegressionMarginal)) {
    try {
      const MarginalSamples marginals =
          univariate_marginals(model, pool, s_obs, dist, kernel, true);
      const ParticleSet adjusted = regression_adjust(*joint, s_obs);
      outcome.kl[Method::RegressionMarginal] = kl_divergence(
          truth, kde_pair(marginal_adjust(adjusted, marginals, Exec::Serial)));
    } catch (const std::exception& e) {
      outcome.errors[Method::RegressionMarginal] = e.what();
    }
  }

  if (want(Method::Copula)) {
    try {
      CopulaConfig copula_config;
      copula_config.pool_size = config.pool_size;
      copula_config.accept_quantile = config.accept_quantile;
      copula_config.regression_adjust = true;
      const MetaGaussian mg = copula_abc_from_pool(
          pool, s_obs, PairSelections::from_model(model), copula_config,
          Exec::Serial);
      const ParticleSet draws = sample_meta_gaussian(
          mg, config.copula_draws, copula_rng, Exec::Serial);
      outcome.kl[Method::Copula] = kl_divergence(truth, kde_pair(draws));
    } catch (const std::exception& e) {
      outcome.errors[Method::Copula] = e.what();
    }
  }

  return outcome;
}

}  // namespace

BenchmarkReport run_table1_benchmark(const BenchmarkConfig& config,
                                     const RngStream& rng, Exec policy) {
  if (config.replications < 1) {
    throw ConfigError("benchmark: replications must be >= 1");
  }
  if (config.dims.empty() || config.methods.empty()) {
    throw ConfigError("benchmark: dims and methods must be non-empty");
  }

  BenchmarkReport report;
  report.config = config;
  report.seed = rng.seed();

  for (std::size_t dim_idx = 0; dim_idx < config.dims.size(); ++dim_idx) {
    const int p = config.dims[dim_idx];
    const models::TwistedNormalModel model(
        models::TwistedNormalParams::with_dim(p, config.twist));
    const GridDensity2D truth =
        models::twisted_true_bivariate_margin(model.params(), config.grid_n);

    std::vector<RepOutcome> outcomes(
        static_cast<std::size_t>(config.replications));
    parallel_for(
        config.replications,
        [&](std::int64_t rep) {
          const RngStream rep_rng = child_stream(
              rng, (static_cast<std::uint64_t>(dim_idx) << 32) +
                       static_cast<std::uint64_t>(rep));
          outcomes[static_cast<std::size_t>(rep)] =
              run_replication(model, config, truth, rep_rng);
        },
        policy);

    for (Method method : config.methods) {
      BenchmarkCell cell;
      cell.method = method;
      cell.p = p;
      std::vector<double> values;
      for (const RepOutcome& outcome : outcomes) {
        const auto it = outcome.kl.find(method);
        if (it != outcome.kl.end() && std::isfinite(it->second)) {
          values.push_back(it->second);
        } else {
          ++cell.failures;
        }
      }
      cell.replications = static_cast<int>(values.size());
      if (!values.empty()) {
        const double mean = pairwise_sum(values) /
                            static_cast<double>(values.size());
        cell.mean_kl = mean;
        if (values.size() > 1) {
          double ss = 0.0;
          for (double v : values) ss += (v - mean) * (v - mean);
          cell.se = std::sqrt(ss / (static_cast<double>(values.size()) *
                                    static_cast<double>(values.size() - 1)));
        }
      }
      report.cells.push_back(cell);
    }
  }

  // Trend checks against the exact-margin oracle.
  const int p_max = *std::max_element(config.dims.begin(), config.dims.end());
  {
    bool small = true;
    bool flat = true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool have = false;
    for (int p : config.dims) {
      const BenchmarkCell* cell = report.find(Method::Copula, p);
      if (cell == nullptr || cell->replications == 0) {
        small = flat = false;
        break;
      }
      have = true;
      small = small && cell->mean_kl < 0.15;
      lo = std::min(lo, cell->mean_kl);
      hi = std::max(hi, cell->mean_kl);
    }
    report.trends.copula_small = have && small;
    report.trends.copula_flat = have && flat && hi < 2.0 * lo;
  }
  {
    std::vector<int> dims = config.dims;
    std::sort(dims.begin(), dims.end());
    bool monotone = true;
    double prev = -std::numeric_limits<double>::infinity();
    bool have = true;
    for (int p : dims) {
      const BenchmarkCell* cell = report.find(Method::Rejection, p);
      if (cell == nullptr || cell->replications == 0) {
        have = false;
        break;
      }
      monotone = monotone && cell->mean_kl > prev;
      prev = cell->mean_kl;
    }
    report.trends.rejection_monotone = have && monotone;
    const BenchmarkCell* last = report.find(Method::Rejection, p_max);
    report.trends.rejection_large =
        last != nullptr && last->replications > 0 && last->mean_kl > 2.5;
  }
  {
    const BenchmarkCell* copula = report.find(Method::Copula, p_max);
    const BenchmarkCell* regmarg = report.find(Method::RegressionMarginal, p_max);
    const BenchmarkCell* rejection = report.find(Method::Rejection, p_max);
    report.trends.ordering = copula != nullptr && regmarg != nullptr &&
                             rejection != nullptr && copula->replications > 0 &&
                             regmarg->replications > 0 &&
                             rejection->replications > 0 &&
                             copula->mean_kl < regmarg->mean_kl &&
                             regmarg->mean_kl < rejection->mean_kl;
  }
  return report;
}

namespace {

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace

void write_report_csv(const std::string& path, const BenchmarkReport& report) {
  std::ofstream out(path);
  if (!out) throw AbcError("cannot write " + path);
  out << "p";
  for (Method method : report.config.methods) {
    out << ',' << to_string(method) << ',' << to_string(method) << "_se";
  }
  out << '\n';
  for (int p : report.config.dims) {
    out << p;
    for (Method method : report.config.methods) {
      const BenchmarkCell* cell = report.find(method, p);
      if (cell != nullptr && cell->replications > 0) {
        out << ',' << format_double(cell->mean_kl) << ','
            << format_double(cell->se);
      } else {
        out << ",,";
      }
    }
    out << '\n';
  }
}

void to_json(nlohmann::json& j, const BenchmarkReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const BenchmarkCell& cell : report.cells) {
    cells.push_back(nlohmann::json{{"method", to_string(cell.method)},
                                   {"p", cell.p},
                                   {"mean_kl", cell.mean_kl},
                                   {"se", cell.se},
                                   {"replications", cell.replications},
                                   {"failures", cell.failures}});
  }
  std::vector<std::string> methods;
  for (Method m : report.config.methods) methods.push_back(to_string(m));
  j = nlohmann::json{
      {"seed", report.seed},
      {"dims", report.config.dims},
      {"methods", methods},
      {"replications", report.config.replications},
      {"pool_size", report.config.pool_size},
      {"accept_quantile", report.config.accept_quantile},
      {"cells", std::move(cells)},
      {"trends",
       nlohmann::json{{"copula_small", report.trends.copula_small},
                      {"copula_flat", report.trends.copula_flat},
                      {"rejection_monotone", report.trends.rejection_monotone},
                      {"rejection_large", report.trends.rejection_large},
                      {"ordering", report.trends.ordering}}}};
}

}  // namespace abc::eval
