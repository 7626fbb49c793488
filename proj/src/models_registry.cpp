#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "abc/models.hpp"

namespace abc::models {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!obj.is_object()) {
    throw ConfigError(context + ": expected a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError(context + ": unknown key '" + key + "'");
    }
  }
}

Vector vector_from(const json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + ": expected an array");
  Vector v(static_cast<std::int64_t>(j.size()));
  std::int64_t i = 0;
  for (const auto& entry : j) {
    if (!entry.is_number()) throw ConfigError(context + ": expected numbers");
    v[i++] = entry.get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(context + ": expected a non-empty array of rows");
  }
  const std::int64_t rows = static_cast<std::int64_t>(j.size());
  std::int64_t cols = -1;
  Matrix m;
  std::int64_t r = 0;
  for (const auto& row : j) {
    const Vector v = vector_from(row, context);
    if (cols < 0) {
      cols = v.size();
      m.resize(rows, cols);
    } else if (v.size() != cols) {
      throw ConfigError(context + ": ragged rows");
    }
    m.row(r++) = v.transpose();
  }
  return m;
}

ModelSpec make_twisted(const json& params) {
  check_keys(params, {"p", "b", "y_obs"}, "twisted");
  TwistedNormalParams tp;
  tp.p = params.value("p", 5);
  tp.twist = params.value("b", 0.1);
  if (params.contains("y_obs")) {
    tp.y_obs = vector_from(params.at("y_obs"), "twisted.y_obs");
  } else {
    tp.y_obs = Vector::Zero(tp.p);
    if (tp.p >= 1) tp.y_obs[0] = 10.0;
  }
  tp.validate();
  ModelSpec spec;
  spec.s_obs = tp.y_obs;
  spec.model = std::make_shared<TwistedNormalModel>(std::move(tp));
  return spec;
}

GkParams gk_params_from(const json& j, const std::string& context) {
  const Vector v = vector_from(j, context);
  if (v.size() != 4) throw ConfigError(context + ": expected [A, B, g, k]");
  GkParams p;
  p.loc = v[0];
  p.scale = v[1];
  p.skew = v[2];
  p.kurt = v[3];
  try {
    p.validate();
  } catch (const SimulationError& e) {
    throw ConfigError(context + ": " + e.what());
  }
  return p;
}

ModelSpec make_gk(const json& params) {
  check_keys(params,
             {"n_obs", "box_lo", "box_hi", "true_params", "obs_seed", "s_obs"},
             "gk");
  GkModelConfig cfg;
  cfg.n_obs = params.value("n_obs", 1000);
  if (params.contains("box_lo")) cfg.box_lo = vector_from(params.at("box_lo"), "gk.box_lo");
  if (params.contains("box_hi")) cfg.box_hi = vector_from(params.at("box_hi"), "gk.box_hi");

  ModelSpec spec;
  auto model = std::make_shared<GkModel>(cfg);
  if (params.contains("s_obs")) {
    spec.s_obs = vector_from(params.at("s_obs"), "gk.s_obs");
    if (spec.s_obs.size() != model->summary_dim()) {
      throw ConfigError("gk.s_obs: wrong length");
    }
  } else {
    GkParams truth{0.01, 0.02, 0.3, 0.1};
    if (params.contains("true_params")) {
      truth = gk_params_from(params.at("true_params"), "gk.true_params");
    }
    RngStream obs_rng(params.value("obs_seed", std::uint64_t{12345}),
                      0x0b5e12ed);
    Vector data(cfg.n_obs);
    for (int i = 0; i < cfg.n_obs; ++i) {
      data[i] = gk_quantile(truth, obs_rng.uniform_oo());
    }
    spec.s_obs = gk_summaries(data);
  }
  spec.model = std::move(model);
  return spec;
}

ModelSpec make_multigk(const json& params) {
  check_keys(params,
             {"margins", "n_obs", "box_lo", "box_hi", "true_margins",
              "correlation", "obs_seed", "s_obs"},
             "multigk");
  MultiGkConfig cfg;
  cfg.margins = params.value("margins", 2);
  cfg.n_obs = params.value("n_obs", 1000);
  if (params.contains("box_lo")) cfg.box_lo = vector_from(params.at("box_lo"), "multigk.box_lo");
  if (params.contains("box_hi")) cfg.box_hi = vector_from(params.at("box_hi"), "multigk.box_hi");

  ModelSpec spec;
  auto model = std::make_shared<MultiGkModel>(cfg);
  if (params.contains("s_obs")) {
    spec.s_obs = vector_from(params.at("s_obs"), "multigk.s_obs");
    if (spec.s_obs.size() != model->summary_dim()) {
      throw ConfigError("multigk.s_obs: wrong length");
    }
  } else {
    std::vector<GkParams> margins;
    if (params.contains("true_margins")) {
      const json& rows = params.at("true_margins");
      if (!rows.is_array() || static_cast<int>(rows.size()) != cfg.margins) {
        throw ConfigError("multigk.true_margins: need one row per margin");
      }
      for (const auto& row : rows) {
        margins.push_back(gk_params_from(row, "multigk.true_margins"));
      }
    } else {
      margins.assign(static_cast<std::size_t>(cfg.margins),
                     GkParams{0.01, 0.02, 0.3, 0.1});
    }
    Matrix corr;
    if (params.contains("correlation")) {
      corr = matrix_from(params.at("correlation"), "multigk.correlation");
    } else {
      corr = Matrix::Identity(cfg.margins, cfg.margins);
      corr.array() += 0.3;
      corr.diagonal().setOnes();
    }
    RngStream obs_rng(params.value("obs_seed", std::uint64_t{12345}),
                      0x0b5e12ee);
    const Matrix data = simulate_multi_gk(margins, nearest_correlation(corr),
                                          cfg.n_obs, obs_rng);
    spec.s_obs = multi_gk_summaries(data);
  }
  spec.model = std::move(model);
  return spec;
}

ModelSpec make_qr(const json& params) {
  check_keys(params,
             {"levels", "x_obs", "y_obs", "x_count", "x_lo", "x_hi", "x_seed",
              "true_coef", "noise_sd", "obs_seed", "prior_mean", "prior_sd",
              "prior_retry_cap"},
             "qr");
  QuantileRegressionConfig cfg;
  if (params.contains("levels")) {
    cfg.levels = vector_from(params.at("levels"), "qr.levels");
  } else {
    cfg.levels = Vector(7);
    cfg.levels << 0.1, 0.2, 0.3, 0.7, 0.75, 0.8, 0.95;
  }
  const int m = static_cast<int>(cfg.levels.size());

  if (params.contains("x_obs")) {
    cfg.x_obs = vector_from(params.at("x_obs"), "qr.x_obs");
  } else {
    const int n = params.value("x_count", 300);
    const double lo = params.value("x_lo", 0.0);
    const double hi = params.value("x_hi", 6.0);
    RngStream x_rng(params.value("x_seed", std::uint64_t{777}), 0x0b5e12ef);
    cfg.x_obs = Vector(n);
    for (int i = 0; i < n; ++i) cfg.x_obs[i] = lo + (hi - lo) * x_rng.uniform_oo();
  }

  Matrix true_coef(m, 3);
  for (int l = 0; l < m; ++l) {
    true_coef(l, 0) = 4.0 + 4.0 * cfg.levels[l];
    true_coef(l, 1) = 0.5 + 0.2 * cfg.levels[l];
    true_coef(l, 2) = -0.02;
  }
  if (params.contains("true_coef")) {
    true_coef = matrix_from(params.at("true_coef"), "qr.true_coef");
    if (true_coef.rows() != m || true_coef.cols() != 3) {
      throw ConfigError("qr.true_coef: must be m x 3");
    }
  }

  if (params.contains("y_obs")) {
    cfg.y_obs = vector_from(params.at("y_obs"), "qr.y_obs");
  } else {
    // Mid-curve plus Gaussian noise: broadly consistent with the curve
    // family without needing the interpolated simulator bootstrap.
    const double noise_sd = params.value("noise_sd", 1.0);
    RngStream y_rng(params.value("obs_seed", std::uint64_t{12346}), 0x0b5e12f0);
    const Vector mid = true_coef.colwise().mean().transpose();
    cfg.y_obs = Vector(cfg.x_obs.size());
    for (std::int64_t i = 0; i < cfg.x_obs.size(); ++i) {
      const double x = cfg.x_obs[i];
      cfg.y_obs[i] = mid[0] + mid[1] * x + mid[2] * x * x + noise_sd * y_rng.normal();
    }
  }

  if (params.contains("prior_mean")) {
    cfg.prior_mean = matrix_from(params.at("prior_mean"), "qr.prior_mean");
  } else {
    // Center the prior on per-level fits to the observed data.
    cfg.prior_mean = Matrix(m, 3);
    for (int l = 0; l < m; ++l) {
      cfg.prior_mean.row(l) =
          fit_pinball_curve(cfg.y_obs, cfg.x_obs, cfg.levels[l]).transpose();
    }
  }

  if (params.contains("prior_sd")) {
    cfg.prior_sd = matrix_from(params.at("prior_sd"), "qr.prior_sd");
  } else {
    const double sy = std::sqrt(
        (cfg.y_obs.array() - cfg.y_obs.mean()).square().sum() /
        static_cast<double>(cfg.y_obs.size() - 1));
    const double sx = std::sqrt(
        (cfg.x_obs.array() - cfg.x_obs.mean()).square().sum() /
        static_cast<double>(cfg.x_obs.size() - 1));
    cfg.prior_sd = Matrix(m, 3);
    cfg.prior_sd.col(0).setConstant(0.05 * sy);
    cfg.prior_sd.col(1).setConstant(0.02 * sy / sx);
    cfg.prior_sd.col(2).setConstant(0.005 * sy / (sx * sx));
  }
  cfg.prior_retry_cap = params.value("prior_retry_cap", 100000);

  ModelSpec spec;
  auto model = std::make_shared<QuantileRegressionModel>(std::move(cfg));
  spec.s_obs = qr_summaries(model->config().y_obs, model->config().x_obs,
                            model->config().levels);
  spec.model = std::move(model);
  return spec;
}

}  // namespace

ModelSpec make_model(const std::string& id, const nlohmann::json& params) {
  const json effective = params.is_null() ? json::object() : params;
  if (id == "twisted") return make_twisted(effective);
  if (id == "gk") return make_gk(effective);
  if (id == "multigk") return make_multigk(effective);
  if (id == "qr") return make_qr(effective);
  throw ConfigError("unknown model id '" + id + "'");
}

std::vector<std::string> registered_models() {
  return {"twisted", "gk", "multigk", "qr"};
}

}  // namespace abc::models
