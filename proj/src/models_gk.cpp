#include <algorithm>
#include <cmath>

#include "abc/models.hpp"

namespace abc::models {

void GkParams::validate() const {
  if (!(scale > 0.0)) throw SimulationError("g-and-k: scale must be > 0");
  if (!(kurt > -0.5)) throw SimulationError("g-and-k: kurtosis must be > -0.5");
  if (!std::isfinite(loc) || !std::isfinite(skew)) {
    throw SimulationError("g-and-k: non-finite parameters");
  }
}

double gk_quantile(const GkParams& params, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw NumericalError("gk_quantile: u must lie in (0,1)");
  }
  const double z = standard_normal_quantile(u);
  // (1 - exp(-g z)) / (1 + exp(-g z)) == tanh(g z / 2), overflow-free.
  const double asym = 1.0 + GkParams::kAsymmetry * std::tanh(0.5 * params.skew * z);
  const double tail = std::pow(1.0 + z * z, params.kurt);
  return params.loc + params.scale * asym * tail * z;
}

double empirical_quantile(const Vector& sorted, double u) {
  const std::int64_t n = sorted.size();
  if (n < 1) throw DimensionError("empirical_quantile: empty sample");
  if (u <= 0.0) return sorted[0];
  if (u >= 1.0) return sorted[n - 1];
  const double h = u * static_cast<double>(n - 1);
  const std::int64_t i = static_cast<std::int64_t>(std::floor(h));
  if (i + 1 >= n) return sorted[n - 1];
  const double t = h - static_cast<double>(i);
  return sorted[i] + t * (sorted[i + 1] - sorted[i]);
}

Vector gk_summaries(const Vector& data) {
  Vector sorted = data;
  std::sort(sorted.data(), sorted.data() + sorted.size());

  const double q1 = empirical_quantile(sorted, 0.25);
  const double q2 = empirical_quantile(sorted, 0.5);
  const double q3 = empirical_quantile(sorted, 0.75);
  const double iqr = q3 - q1;
  if (!(iqr > 0.0)) throw SimulationError("g-and-k summaries: degenerate sample");

  const double o1 = empirical_quantile(sorted, 1.0 / 8.0);
  const double o3 = empirical_quantile(sorted, 3.0 / 8.0);
  const double o5 = empirical_quantile(sorted, 5.0 / 8.0);
  const double o7 = empirical_quantile(sorted, 7.0 / 8.0);

  Vector s(4);
  s[0] = q2;
  s[1] = iqr;
  s[2] = (q3 + q1 - 2.0 * q2) / iqr;
  s[3] = (o7 - o5 + o3 - o1) / iqr;
  return s;
}

namespace {

Vector default_box_lo() {
  Vector lo(4);
  lo << -0.1, 0.0, -1.0, -0.2;
  return lo;
}

Vector default_box_hi() {
  Vector hi(4);
  hi << 0.1, 0.05, 1.0, 0.5;
  return hi;
}

void check_box(const Vector& lo, const Vector& hi, int dim) {
  if (lo.size() != dim || hi.size() != dim) {
    throw ConfigError("g-and-k: prior box must have one bound per parameter");
  }
  if (((hi - lo).array() <= 0.0).any()) {
    throw ConfigError("g-and-k: prior box must have positive widths");
  }
}

GkParams params_from(const Vector& theta, int offset) {
  GkParams p;
  p.loc = theta[offset];
  p.scale = theta[offset + 1];
  p.skew = theta[offset + 2];
  p.kurt = theta[offset + 3];
  p.validate();
  return p;
}

}  // namespace

GkModel::GkModel(GkModelConfig config) : config_(std::move(config)) {
  if (config_.box_lo.size() == 0) config_.box_lo = default_box_lo();
  if (config_.box_hi.size() == 0) config_.box_hi = default_box_hi();
  check_box(config_.box_lo, config_.box_hi, 4);
  if (config_.n_obs < 8) throw ConfigError("g-and-k: n_obs must be >= 8");
}

Vector GkModel::sample_prior(RngStream& rng) const {
  Vector theta(4);
  for (int j = 0; j < 4; ++j) {
    theta[j] = config_.box_lo[j] +
               (config_.box_hi[j] - config_.box_lo[j]) * rng.uniform_oo();
  }
  return theta;
}

double GkModel::prior_logdensity(const Vector& theta) const {
  if (theta.size() != 4) throw DimensionError("g-and-k: theta has wrong length");
  for (int j = 0; j < 4; ++j) {
    if (theta[j] < config_.box_lo[j] || theta[j] > config_.box_hi[j]) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  return 0.0;
}

Vector GkModel::simulate_summaries(const Vector& theta, RngStream& rng) const {
  if (theta.size() != 4) throw DimensionError("g-and-k: theta has wrong length");
  const GkParams params = params_from(theta, 0);
  Vector data(config_.n_obs);
  for (int i = 0; i < config_.n_obs; ++i) {
    data[i] = gk_quantile(params, rng.uniform_oo());
  }
  return gk_summaries(data);
}

SummarySelection GkModel::marginal_selection(int j) const {
  switch (j) {
    case 0: return SummarySelection({0});
    case 1: return SummarySelection({1, 3});
    case 2: return SummarySelection({2});
    case 3: return SummarySelection({3});
    default:
      throw DimensionError("g-and-k: parameter index out of range");
  }
}

std::pair<Vector, Vector> GkModel::pilot_box() const {
  return {config_.box_lo, config_.box_hi};
}

CorrelationMatrix sample_wishart_correlation(int q, RngStream& rng) {
  if (q < 2) throw DimensionError("wishart correlation: q must be >= 2");
  // Bartlett factor of Wishart(I_q, q): lower triangle standard normal,
  // diagonal chi with df q - i.
  Matrix a = Matrix::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(q - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix v = a * a.transpose();
  Matrix c(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      c(i, j) = v(i, j) / std::sqrt(v(i, i) * v(j, j));
    }
  }
  c = 0.5 * (c + c.transpose());
  c.diagonal().setOnes();
  return nearest_correlation(c);
}

Matrix simulate_multi_gk(const std::vector<GkParams>& margins,
                         const CorrelationMatrix& correlation, int n_obs,
                         RngStream& rng) {
  const int q = correlation.dim();
  if (static_cast<int>(margins.size()) != q) {
    throw DimensionError("multi g-and-k: margin count mismatch");
  }
  const Matrix chol = correlation.llt().matrixL();
  Matrix data(n_obs, q);
  Vector xi(q);
  for (int i = 0; i < n_obs; ++i) {
    for (int j = 0; j < q; ++j) xi[j] = rng.normal();
    const Vector eta = chol * xi;
    for (int j = 0; j < q; ++j) {
      const double u = std::clamp(standard_normal_cdf(eta[j]), 1e-15, 1.0 - 1e-15);
      data(i, j) = gk_quantile(margins[static_cast<std::size_t>(j)], u);
    }
  }
  return data;
}

Vector multi_gk_summaries(const Matrix& data) {
  const int q = static_cast<int>(data.cols());
  const int pairs = q * (q - 1) / 2;
  Vector s(4 * q + pairs);
  for (int j = 0; j < q; ++j) {
    s.segment(4 * j, 4) = gk_summaries(data.col(j));
  }
  int idx = 4 * q;
  for (int i = 0; i < q; ++i) {
    for (int j = i + 1; j < q; ++j) {
      s[idx++] = normal_scores_correlation(data.col(i), data.col(j));
    }
  }
  return s;
}

MultiGkModel::MultiGkModel(MultiGkConfig config) : config_(std::move(config)) {
  if (config_.margins < 2) throw ConfigError("multi g-and-k: needs >= 2 margins");
  if (config_.n_obs < 8) throw ConfigError("multi g-and-k: n_obs must be >= 8");
  if (config_.box_lo.size() == 0) config_.box_lo = default_box_lo();
  if (config_.box_hi.size() == 0) config_.box_hi = default_box_hi();
  check_box(config_.box_lo, config_.box_hi, 4);
}

int MultiGkModel::param_dim() const {
  const int q = config_.margins;
  return 4 * q + q * (q - 1) / 2;
}

int MultiGkModel::summary_dim() const {
  const int q = config_.margins;
  return 4 * q + q * (q - 1) / 2;
}

std::vector<GkParams> MultiGkModel::unpack_margins(const Vector& theta) const {
  std::vector<GkParams> margins;
  margins.reserve(static_cast<std::size_t>(config_.margins));
  for (int j = 0; j < config_.margins; ++j) {
    margins.push_back(params_from(theta, 4 * j));
  }
  return margins;
}

Matrix MultiGkModel::unpack_correlation(const Vector& theta) const {
  const int q = config_.margins;
  Matrix c = Matrix::Identity(q, q);
  int idx = 4 * q;
  for (int i = 0; i < q; ++i) {
    for (int j = i + 1; j < q; ++j) {
      c(i, j) = theta[idx];
      c(j, i) = theta[idx];
      ++idx;
    }
  }
  return c;
}

Vector MultiGkModel::sample_prior(RngStream& rng) const {
  const int q = config_.margins;
  Vector theta(param_dim());
  for (int j = 0; j < q; ++j) {
    for (int k = 0; k < 4; ++k) {
      theta[4 * j + k] =
          config_.box_lo[k] +
          (config_.box_hi[k] - config_.box_lo[k]) * rng.uniform_oo();
    }
  }
  const CorrelationMatrix c = sample_wishart_correlation(q, rng);
  int idx = 4 * q;
  for (int i = 0; i < q; ++i) {
    for (int j = i + 1; j < q; ++j) theta[idx++] = c(i, j);
  }
  return theta;
}

double MultiGkModel::prior_logdensity(const Vector& theta) const {
  // Support indicator only: the rescaled-Wishart correlation factor has no
  // convenient closed form and none of the samplers here need it.
  if (theta.size() != param_dim()) {
    throw DimensionError("multi g-and-k: theta has wrong length");
  }
  for (int j = 0; j < config_.margins; ++j) {
    for (int k = 0; k < 4; ++k) {
      if (theta[4 * j + k] < config_.box_lo[k] ||
          theta[4 * j + k] > config_.box_hi[k]) {
        return -std::numeric_limits<double>::infinity();
      }
    }
  }
  const Matrix c = unpack_correlation(theta);
  if (c.cwiseAbs().maxCoeff() > 1.0) {
    return -std::numeric_limits<double>::infinity();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

Vector MultiGkModel::simulate_summaries(const Vector& theta,
                                        RngStream& rng) const {
  if (theta.size() != param_dim()) {
    throw DimensionError("multi g-and-k: theta has wrong length");
  }
  const std::vector<GkParams> margins = unpack_margins(theta);
  Matrix raw = unpack_correlation(theta);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(raw, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < CorrelationMatrix::kMinEigenvalue) {
    throw SimulationError("multi g-and-k: correlation not positive definite");
  }
  const CorrelationMatrix c(std::move(raw));
  const Matrix data = simulate_multi_gk(margins, c, config_.n_obs, rng);
  return multi_gk_summaries(data);
}

SummarySelection MultiGkModel::marginal_selection(int j) const {
  const int q = config_.margins;
  if (j < 0 || j >= param_dim()) {
    throw DimensionError("multi g-and-k: parameter index out of range");
  }
  if (j < 4 * q) {
    const int margin = j / 4;
    const int base = 4 * margin;
    switch (j % 4) {
      case 0: return SummarySelection({base});
      case 1: return SummarySelection({base + 1, base + 3});
      case 2: return SummarySelection({base + 2});
      default: return SummarySelection({base + 3});
    }
  }
  return SummarySelection({4 * q + (j - 4 * q)});
}

}  // namespace abc::models
