#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abc/types.hpp"

namespace abc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

inline constexpr const char* kVersion = "0.1.0";

// Resolved run description. The seed is always explicit; nothing in a run
// draws entropy from the environment.
struct RunConfig {
  std::string model_id;
  nlohmann::json model_params = nlohmann::json::object();
  std::vector<std::string> stages;  // subset of: simulate, reject,
                                    // regression, marginal, copula, rde, mcmc
  std::int64_t n = 100000;
  double alpha = 0.01;
  std::string kernel = "uniform";
  std::optional<std::vector<int>> selection;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int kmax = 5;
  std::int64_t copula_draws = 10000;
  std::int64_t mcmc_steps = 10000;
  std::int64_t mcmc_burnin = 2000;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Strict parse: unknown keys error with the offending path; the seed and
// model are mandatory; selections are bounds-checked against the model.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);
nlohmann::json dump_config(const RunConfig& config);

// Executes the configured stage list, writing artifacts plus a manifest
// into config.out_dir. Throws ConfigError / AbcError on failure.
void run_pipeline(const RunConfig& config);

int run_cli(int argc, const char* const* argv);

}  // namespace abc::cli
