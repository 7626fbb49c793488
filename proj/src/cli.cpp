#include "abc/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "abc/adjust.hpp"
#include "abc/copula.hpp"
#include "abc/eval.hpp"
#include "abc/io.hpp"
#include "abc/models.hpp"
#include "abc/rde.hpp"
#include "abc/rejection.hpp"

namespace abc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::set<std::string> kStages = {"simulate", "reject",  "regression",
                                       "marginal", "copula",  "rde",
                                       "mcmc"};

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

RunConfig parse_config_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  const std::set<std::string> allowed = {
      "model",  "model_params", "stages",       "n",
      "alpha",  "kernel",       "selection",    "seed",
      "out_dir", "kmax",        "copula_draws", "mcmc_steps",
      "mcmc_burnin"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (!j.contains("model")) throw ConfigError("config: missing 'model'");
  if (!j.contains("seed")) throw ConfigError("config: missing 'seed'");

  RunConfig config;
  config.model_id = j.at("model").get<std::string>();
  config.model_params = j.value("model_params", json::object());
  config.stages = j.value("stages", std::vector<std::string>{"reject"});
  config.n = j.value("n", std::int64_t{100000});
  config.alpha = j.value("alpha", 0.01);
  config.kernel = j.value("kernel", std::string{"uniform"});
  if (j.contains("selection")) {
    config.selection = j.at("selection").get<std::vector<int>>();
  }
  config.seed = j.at("seed").get<std::uint64_t>();
  config.out_dir = j.value("out_dir", std::string{"."});
  config.kmax = j.value("kmax", 5);
  config.copula_draws = j.value("copula_draws", std::int64_t{10000});
  config.mcmc_steps = j.value("mcmc_steps", std::int64_t{10000});
  config.mcmc_burnin = j.value("mcmc_burnin", std::int64_t{2000});

  for (const std::string& stage : config.stages) {
    if (kStages.find(stage) == kStages.end()) {
      throw ConfigError("config: unknown stage '" + stage + "'");
    }
  }
  if (config.n < 1) throw ConfigError("config: field 'n' must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("config: field 'alpha' must lie in (0,1)");
  }
  kernel_kind_from_string(config.kernel);

  // Validate the model parameters and the selection bounds eagerly so bad
  // configs fail before any simulation happens.
  const models::ModelSpec spec =
      models::make_model(config.model_id, config.model_params);
  if (config.selection) {
    try {
      SummarySelection sel(*config.selection);
      sel.check_bounds(spec.model->summary_dim());
    } catch (const DimensionError& e) {
      throw ConfigError(std::string("config: field 'selection': ") + e.what());
    }
  }
  return config;
}

RunConfig parse_config(const std::string& path) {
  return parse_config_json(io::read_json_file(path));
}

json dump_config(const RunConfig& config) {
  json j{{"model", config.model_id},
         {"model_params", config.model_params},
         {"stages", config.stages},
         {"n", config.n},
         {"alpha", config.alpha},
         {"kernel", config.kernel},
         {"seed", config.seed},
         {"out_dir", config.out_dir},
         {"kmax", config.kmax},
         {"copula_draws", config.copula_draws},
         {"mcmc_steps", config.mcmc_steps},
         {"mcmc_burnin", config.mcmc_burnin}};
  if (config.selection) j["selection"] = *config.selection;
  return j;
}

namespace {

struct StageTimer {
  json& timings;
  std::string name;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  ~StageTimer() { timings[name] = elapsed_since(start); }
};

Vector mcmc_init_from_prior(const SimulatorModel& model,
                            const std::function<double(const Vector&)>& logpost,
                            const RngStream& rng) {
  RngStream stream = child_stream(rng, 0x1417);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector theta = model.sample_prior(stream);
    if (std::isfinite(logpost(theta))) return theta;
  }
  throw NumericalError("mcmc: no finite-posterior init found from the prior");
}

}  // namespace

void run_pipeline(const RunConfig& config) {
  const models::ModelSpec spec =
      models::make_model(config.model_id, config.model_params);
  const SimulatorModel& model = *spec.model;
  const RngStream root(config.seed);

  fs::create_directories(config.out_dir);
  const auto out_path = [&](const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
  };

  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = dump_config(config);
  manifest["seed"] = config.seed;
  json timings = json::object();
  std::vector<std::string> outputs;

  const KernelConfig kernel = KernelConfig::with_quantile(
      kernel_kind_from_string(config.kernel), config.alpha);
  const SummarySelection selection =
      config.selection ? SummarySelection(*config.selection)
                       : SummarySelection::all(model.summary_dim());

  std::optional<ParticleSet> pool;
  std::optional<ParticleSet> current;
  std::optional<DistanceConfig> dist;
  bool regression_was_run = false;

  auto ensure_pool = [&]() {
    if (!pool) {
      StageTimer timer{timings, "simulate"};
      pool = generate_particles(model, config.n, child_stream(root, 1));
      dist = standardize(*pool);
    }
  };

  for (const std::string& stage : config.stages) {
    if (stage == "simulate") {
      ensure_pool();
      io::write_particles_csv(out_path("pool.csv"), *pool);
      outputs.push_back("pool.csv");
    } else if (stage == "reject") {
      ensure_pool();
      StageTimer timer{timings, "reject"};
      current = rejection_abc(*pool, spec.s_obs, selection, kernel, *dist);
      io::write_particles_csv(out_path("particles.csv"), *current);
      outputs.push_back("particles.csv");
    } else if (stage == "regression") {
      if (!current) throw ConfigError("pipeline: 'regression' needs 'reject' first");
      StageTimer timer{timings, "regression"};
      current = regression_adjust(*current, spec.s_obs);
      regression_was_run = true;
      io::write_particles_csv(out_path("adjusted.csv"), *current);
      outputs.push_back("adjusted.csv");
    } else if (stage == "marginal") {
      if (!current) throw ConfigError("pipeline: 'marginal' needs 'reject' first");
      StageTimer timer{timings, "marginal"};
      ensure_pool();
      MarginalSamples marginals;
      for (int j = 0; j < model.param_dim(); ++j) {
        ParticleSet run = rejection_abc(*pool, spec.s_obs,
                                        model.marginal_selection(j), kernel,
                                        *dist, Exec::Serial);
        if (regression_was_run) run = regression_adjust(run, spec.s_obs);
        Vector col = run.thetas().col(j);
        std::sort(col.data(), col.data() + col.size());
        marginals.sorted.push_back(std::move(col));
      }
      current = marginal_adjust(*current, marginals);
      io::write_particles_csv(out_path("adjusted.csv"), *current);
      outputs.push_back("adjusted.csv");
    } else if (stage == "copula") {
      ensure_pool();
      StageTimer timer{timings, "copula"};
      CopulaConfig copula_config;
      copula_config.pool_size = config.n;
      copula_config.accept_quantile = config.alpha;
      copula_config.kernel = kernel_kind_from_string(config.kernel);
      const MetaGaussian mg = copula_abc_from_pool(
          *pool, spec.s_obs, PairSelections::from_model(model), copula_config);
      json j;
      to_json(j, mg);
      io::write_json_file(out_path("posterior.json"), j);
      outputs.push_back("posterior.json");
    } else if (stage == "rde") {
      ensure_pool();
      StageTimer timer{timings, "rde"};
      rde::MixtureFitConfig fit_config;
      fit_config.k_max = config.kmax;
      const rde::RdeBundle bundle =
          rde::fit_rde(*pool, fit_config, child_stream(root, 2));
      json j;
      rde::to_json(j, bundle);
      io::write_json_file(out_path("rde.json"), j);
      outputs.push_back("rde.json");
    } else if (stage == "mcmc") {
      StageTimer timer{timings, "mcmc"};
      const json bundle_json = io::read_json_file(out_path("rde.json"));
      const rde::RdeBundle bundle = rde::rde_bundle_from_json(bundle_json);
      const auto loglik = [&](const Vector& theta) {
        return rde::likelihood_approx(bundle, spec.s_obs, theta);
      };
      const auto logprior = [&](const Vector& theta) {
        return model.prior_logdensity(theta);
      };
      const auto logpost = [&](const Vector& theta) {
        const double lp = logprior(theta);
        return std::isfinite(lp) ? lp + loglik(theta) : lp;
      };
      rde::McmcConfig mcmc_config;
      mcmc_config.steps = config.mcmc_steps;
      mcmc_config.burnin = config.mcmc_burnin;
      const Vector init =
          mcmc_init_from_prior(model, logpost, child_stream(root, 3));
      const rde::McmcResult result = rde::mcmc_sample(
          loglik, logprior, init, mcmc_config, child_stream(root, 4));
      std::vector<std::string> header;
      for (int j = 0; j < model.param_dim(); ++j) {
        header.push_back("theta_" + std::to_string(j + 1));
      }
      io::write_matrix_csv(out_path("chain.csv"), result.chain, header);
      manifest["mcmc_acceptance_rate"] = result.acceptance_rate;
      outputs.push_back("chain.csv");
    }
  }

  manifest["timings"] = std::move(timings);
  manifest["outputs"] = outputs;
  io::write_json_file(out_path("manifest.json"), manifest);
}

namespace {

json load_model_params(const std::string& params_path) {
  if (params_path.empty()) return json::object();
  return io::read_json_file(params_path);
}

std::vector<int> parse_index_list(const std::string& csv) {
  std::vector<int> out;
  std::string token;
  std::stringstream ss(csv);
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    try {
      out.push_back(std::stoi(token));
    } catch (...) {
      throw ConfigError("bad index list entry '" + token + "'");
    }
  }
  return out;
}

void write_manifest_for(const std::string& out_file, const json& args,
                        const json& timings,
                        const std::vector<std::string>& outputs) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = args;
  manifest["timings"] = timings;
  manifest["outputs"] = outputs;
  io::write_json_file(out_file + ".manifest.json", manifest);
}

int do_report(const std::string& in_path) {
  const json j = io::read_json_file(in_path);
  std::cout << "table1 benchmark (seed " << j.value("seed", 0) << ")\n";
  std::cout << "p";
  for (const auto& m : j.at("methods")) {
    std::cout << '\t' << m.get<std::string>();
  }
  std::cout << '\n';
  for (const auto& p : j.at("dims")) {
    std::cout << p.get<int>();
    for (const auto& m : j.at("methods")) {
      bool found = false;
      for (const auto& cell : j.at("cells")) {
        if (cell.at("p") == p && cell.at("method") == m) {
          char buffer[64];
          std::snprintf(buffer, sizeof(buffer), "%.3f (%.3f)",
                        cell.at("mean_kl").get<double>(),
                        cell.at("se").get<double>());
          std::cout << '\t' << buffer;
          found = true;
          break;
        }
      }
      if (!found) std::cout << "\t-";
    }
    std::cout << '\n';
  }
  const auto& trends = j.at("trends");
  for (const auto& [name, pass] : trends.items()) {
    std::cout << (pass.get<bool>() ? "[pass] " : "[FAIL] ") << name << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Likelihood-free inference toolkit: rejection ABC, particle "
               "adjustments, Gaussian-copula posteriors, regression density "
               "estimation"};
  app.require_subcommand(1);

  std::string model_id;
  std::string params_path;
  std::string in_path;
  std::string out_path;
  std::string selection_csv;
  std::string kernel_name = "uniform";
  std::string marginal_dir;
  std::uint64_t seed = 0;
  std::int64_t n = 100000;
  double alpha = 0.01;

  auto add_model_opts = [&](CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--model", model_id, "registered model id");
    if (required) opt->required();
    cmd->add_option("--params", params_path, "model parameter JSON file");
  };

  // simulate
  auto* simulate = app.add_subcommand("simulate", "draw prior-predictive particles");
  add_model_opts(simulate);
  simulate->add_option("--n", n, "particle count");
  simulate->add_option("--seed", seed, "rng seed")->required();
  simulate->add_option("--out", out_path, "output particle CSV")->required();

  // reject
  auto* reject = app.add_subcommand("reject", "kernel-weighted rejection ABC");
  add_model_opts(reject);
  reject->add_option("--n", n, "pool size");
  reject->add_option("--alpha", alpha, "acceptance quantile");
  reject->add_option("--kernel", kernel_name, "uniform|epanechnikov|gaussian");
  reject->add_option("--selection", selection_csv, "summary column indices");
  reject->add_option("--seed", seed, "rng seed")->required();
  reject->add_option("--out", out_path, "output particle CSV")->required();

  // adjust
  bool do_regression = false;
  auto* adjust = app.add_subcommand("adjust", "post-hoc particle adjustments");
  adjust->add_option("--in", in_path, "input particle CSV")->required();
  adjust->add_flag("--regression", do_regression, "linear regression adjustment");
  adjust->add_option("--marginal", marginal_dir,
                     "directory of univariate runs marginal_<j>.csv");
  adjust->add_option("--out", out_path, "output particle CSV")->required();

  // copula
  std::string pairs_mode = "auto";
  auto* copula = app.add_subcommand("copula", "Gaussian copula posterior");
  add_model_opts(copula);
  copula->add_option("--n", n, "pool size");
  copula->add_option("--alpha", alpha, "acceptance quantile");
  copula->add_option("--pairs", pairs_mode, "pair selection mode (auto)");
  copula->add_option("--seed", seed, "rng seed")->required();
  copula->add_option("--out", out_path, "output posterior JSON")->required();

  // rde fit / rde mcmc
  auto* rde_cmd = app.add_subcommand("rde", "regression density estimation");
  rde_cmd->require_subcommand(1);
  int kmax = 5;
  auto* rde_fit = rde_cmd->add_subcommand("fit", "fit the likelihood estimator");
  rde_fit->add_option("--in", in_path, "training particle CSV")->required();
  rde_fit->add_option("--kmax", kmax, "max mixture components");
  rde_fit->add_option("--seed", seed, "rng seed")->required();
  rde_fit->add_option("--out", out_path, "output bundle JSON")->required();

  std::string lik_path;
  std::int64_t steps = 10000;
  std::int64_t burnin = 2000;
  auto* rde_mcmc = rde_cmd->add_subcommand("mcmc", "sample the fitted posterior");
  rde_mcmc->add_option("--lik", lik_path, "fitted bundle JSON")->required();
  add_model_opts(rde_mcmc);
  rde_mcmc->add_option("--steps", steps, "chain length after burn-in");
  rde_mcmc->add_option("--burnin", burnin, "burn-in steps");
  rde_mcmc->add_option("--seed", seed, "rng seed")->required();
  rde_mcmc->add_option("--out", out_path, "output chain CSV")->required();

  // benchmark table1
  auto* benchmark = app.add_subcommand("benchmark", "reproduction studies");
  benchmark->require_subcommand(1);
  std::string ps_csv = "2,5,10,20,50";
  std::string methods_csv;
  int reps = 20;
  auto* table1 = benchmark->add_subcommand(
      "table1", "twisted-normal KL study across dimensions");
  table1->add_option("--ps", ps_csv, "comma-separated dimensions");
  table1->add_option("--methods", methods_csv,
                     "subset of rejection,marginal,regression,"
                     "regression_marginal,copula");
  table1->add_option("--reps", reps, "replications per cell");
  table1->add_option("--n", n, "pool size");
  table1->add_option("--alpha", alpha, "acceptance quantile");
  table1->add_option("--seed", seed, "rng seed")->required();
  table1->add_option("--out", out_path, "output CSV (JSON written alongside)")
      ->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "pretty-print a benchmark report");
  report_cmd->add_option("--in", in_path, "report JSON")->required();

  // run
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "execute a config-driven pipeline");
  run_cmd->add_option("--config", config_path, "pipeline config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfigError;
  }

  try {
    const auto started = std::chrono::steady_clock::now();
    if (simulate->parsed()) {
      const models::ModelSpec spec =
          models::make_model(model_id, load_model_params(params_path));
      const ParticleSet pool =
          generate_particles(*spec.model, n, RngStream(seed));
      io::write_particles_csv(out_path, pool);
      write_manifest_for(out_path,
                         json{{"command", "simulate"},
                              {"model", model_id},
                              {"n", n},
                              {"seed", seed}},
                         json{{"total", elapsed_since(started)}}, {out_path});
    } else if (reject->parsed()) {
      const models::ModelSpec spec =
          models::make_model(model_id, load_model_params(params_path));
      const ParticleSet pool =
          generate_particles(*spec.model, n, RngStream(seed));
      const DistanceConfig dist = standardize(pool);
      SummarySelection selection = SummarySelection::all(spec.model->summary_dim());
      if (!selection_csv.empty()) {
        selection = SummarySelection(parse_index_list(selection_csv));
        selection.check_bounds(spec.model->summary_dim());
      }
      const KernelConfig kernel = KernelConfig::with_quantile(
          kernel_kind_from_string(kernel_name), alpha);
      const ParticleSet accepted =
          rejection_abc(pool, spec.s_obs, selection, kernel, dist);
      io::write_particles_csv(out_path, accepted);
      write_manifest_for(out_path,
                         json{{"command", "reject"},
                              {"model", model_id},
                              {"n", n},
                              {"alpha", alpha},
                              {"kernel", kernel_name},
                              {"selection", selection.indices()},
                              {"seed", seed}},
                         json{{"total", elapsed_since(started)}}, {out_path});
    } else if (adjust->parsed()) {
      ParticleSet particles = io::read_particles_csv(in_path);
      if (!particles.meta().s_obs) {
        throw ConfigError("adjust: input sidecar lacks s_obs; rerun 'reject'");
      }
      const Vector s_obs = *particles.meta().s_obs;
      if (do_regression) particles = regression_adjust(particles, s_obs);
      if (!marginal_dir.empty()) {
        MarginalSamples marginals;
        for (int j = 0; j < particles.param_dim(); ++j) {
          const std::string file =
              (fs::path(marginal_dir) /
               ("marginal_" + std::to_string(j) + ".csv"))
                  .string();
          const ParticleSet run = io::read_particles_csv(file);
          if (run.param_dim() != particles.param_dim()) {
            throw ConfigError("adjust: " + file + " has mismatched dimensions");
          }
          Vector col = run.thetas().col(j);
          std::sort(col.data(), col.data() + col.size());
          marginals.sorted.push_back(std::move(col));
        }
        particles = marginal_adjust(particles, marginals);
      }
      io::write_particles_csv(out_path, particles);
      write_manifest_for(out_path,
                         json{{"command", "adjust"},
                              {"in", in_path},
                              {"regression", do_regression},
                              {"marginal", marginal_dir}},
                         json{{"total", elapsed_since(started)}}, {out_path});
    } else if (copula->parsed()) {
      if (pairs_mode != "auto") {
        throw ConfigError("copula: only --pairs auto is supported");
      }
      const models::ModelSpec spec =
          models::make_model(model_id, load_model_params(params_path));
      CopulaConfig config;
      config.pool_size = n;
      config.accept_quantile = alpha;
      const MetaGaussian mg =
          copula_abc(*spec.model, spec.s_obs,
                     PairSelections::from_model(*spec.model), config,
                     RngStream(seed));
      json j;
      to_json(j, mg);
      io::write_json_file(out_path, j);
      write_manifest_for(out_path,
                         json{{"command", "copula"},
                              {"model", model_id},
                              {"n", n},
                              {"alpha", alpha},
                              {"seed", seed}},
                         json{{"total", elapsed_since(started)}}, {out_path});
    } else if (rde_fit->parsed()) {
      const ParticleSet particles = io::read_particles_csv(in_path);
      rde::MixtureFitConfig config;
      config.k_max = kmax;
      const rde::RdeBundle bundle =
          rde::fit_rde(particles, config, RngStream(seed));
      json j;
      rde::to_json(j, bundle);
      io::write_json_file(out_path, j);
      write_manifest_for(out_path,
                         json{{"command", "rde fit"},
                              {"in", in_path},
                              {"kmax", kmax},
                              {"seed", seed}},
                         json{{"total", elapsed_since(started)}}, {out_path});
    } else if (rde_mcmc->parsed()) {
      const models::ModelSpec spec =
          models::make_model(model_id, load_model_params(params_path));
      const rde::RdeBundle bundle =
          rde::rde_bundle_from_json(io::read_json_file(lik_path));
      const auto loglik = [&](const Vector& theta) {
        return rde::likelihood_approx(bundle, spec.s_obs, theta);
      };
      const auto logprior = [&](const Vector& theta) {
        return spec.model->prior_logdensity(theta);
      };
      const auto logpost = [&](const Vector& theta) {
        const double lp = logprior(theta);
        return std::isfinite(lp) ? lp + loglik(theta) : lp;
      };
      const RngStream root(seed);
      rde::McmcConfig config;
      config.steps = steps;
      config.burnin = burnin;
      const Vector init =
          mcmc_init_from_prior(*spec.model, logpost, child_stream(root, 3));
      const rde::McmcResult result =
          rde::mcmc_sample(loglik, logprior, init, config, child_stream(root, 4));
      std::vector<std::string> header;
      for (int j = 0; j < spec.model->param_dim(); ++j) {
        header.push_back("theta_" + std::to_string(j + 1));
      }
      io::write_matrix_csv(out_path, result.chain, header);
      write_manifest_for(out_path,
                         json{{"command", "rde mcmc"},
                              {"model", model_id},
                              {"steps", steps},
                              {"burnin", burnin},
                              {"seed", seed},
                              {"acceptance_rate", result.acceptance_rate}},
                         json{{"total", elapsed_since(started)}}, {out_path});
      std::cerr << "acceptance rate: " << result.acceptance_rate << '\n';
    } else if (table1->parsed()) {
      eval::BenchmarkConfig config;
      config.dims.clear();
      for (int p : parse_index_list(ps_csv)) config.dims.push_back(p);
      if (!methods_csv.empty()) {
        config.methods.clear();
        std::stringstream ss(methods_csv);
        std::string token;
        while (std::getline(ss, token, ',')) {
          if (!token.empty()) {
            config.methods.push_back(eval::method_from_string(token));
          }
        }
      }
      config.replications = reps;
      config.pool_size = n;
      config.accept_quantile = alpha;
      const eval::BenchmarkReport report =
          eval::run_table1_benchmark(config, RngStream(seed));
      eval::write_report_csv(out_path, report);
      json j;
      eval::to_json(j, report);
      const std::string json_path =
          (fs::path(out_path).replace_extension(".json")).string();
      io::write_json_file(json_path, j);
      write_manifest_for(out_path,
                         json{{"command", "benchmark table1"},
                              {"ps", ps_csv},
                              {"reps", reps},
                              {"n", n},
                              {"alpha", alpha},
                              {"seed", seed}},
                         json{{"total", elapsed_since(started)}},
                         {out_path, json_path});
      const bool all_trends = report.trends.copula_small &&
                              report.trends.copula_flat &&
                              report.trends.rejection_monotone &&
                              report.trends.rejection_large &&
                              report.trends.ordering;
      std::cerr << "trend checks: " << (all_trends ? "pass" : "FAIL") << '\n';
    } else if (report_cmd->parsed()) {
      return do_report(in_path);
    } else if (run_cmd->parsed()) {
      run_pipeline(parse_config(config_path));
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace abc::cli
