// Command-line front end. Builds a JSON experiment config from flags (or a
// --config file with flag overrides) and drives the shared library through
// its C interface.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fptrace/fptrace.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // assertion/acceptance failure
constexpr int kExitConfig = 2;   // config error

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { fpt_string_free(ptr); }
  std::string str() const { return ptr == nullptr ? std::string() : ptr; }
};

int status_to_exit(fpt_status status) {
  switch (status) {
    case FPT_OK:
      return kExitOk;
    case FPT_ERR_INVALID_ARGUMENT:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

int fail(fpt_status status) {
  std::cerr << "error: " << fpt_last_error() << "\n";
  return status_to_exit(status);
}

struct CommonFlags {
  std::string config_path;
  std::int64_t collusion = -1;
  std::int64_t num_users = -1;
  double beta = -1.0;
  double delta = -1.0;
  std::string mode;
  double sigma = -1.0;
  std::int64_t ell = -1;
  std::int64_t coalition = -2;
  std::string pirate;
  std::string oracle;
  std::string scheme;
  int d = -1;
  std::int64_t trials = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int threads = -1;
  bool transcript = false;
  std::vector<std::int64_t> n_grid;
  std::vector<std::string> pirates;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "JSON config file");
  cmd->add_option("--n", flags->collusion, "collusion bound n");
  cmd->add_option("--users", flags->num_users, "number of users N");
  cmd->add_option("--beta", flags->beta, "robustness fraction in [0, 1/2)");
  cmd->add_option("--delta", flags->delta, "false-accusation fraction");
  cmd->add_option("--mode", flags->mode, "paper|scaled")
      ->check(CLI::IsMember({"paper", "scaled"}));
  cmd->add_option("--sigma", flags->sigma, "accusation threshold (scaled)");
  cmd->add_option("--ell", flags->ell, "round count (scaled)");
  cmd->add_option("--coalition", flags->coalition, "coalition size");
  cmd->add_option("--pirate", flags->pirate, "pirate spec, e.g. noisy_mean:0.5");
  cmd->add_option("--oracle", flags->oracle, "oracle spec, e.g. gaussian_noise:2");
  cmd->add_option("--scheme", flags->scheme, "prf_pad|otp")
      ->check(CLI::IsMember({"prf_pad", "otp"}));
  cmd->add_option("--d", flags->d, "record bit length");
  cmd->add_option("--trials", flags->trials, "number of trials");
  cmd->add_option("--seed", flags->seed, "base seed")
      ->each([flags](const std::string&) { flags->seed_set = true; });
  cmd->add_option("--out-dir", flags->out_dir, "output directory");
  cmd->add_option("--threads", flags->threads, "worker threads (0 = auto)");
  cmd->add_flag("--transcript", flags->transcript,
                "write trial 0's full transcript");
  cmd->add_option("--n-grid", flags->n_grid, "collusion grid (calibrate)");
  cmd->add_option("--pirates", flags->pirates, "pirate set (calibrate)");
}

nlohmann::json build_config(const std::string& kind, const CommonFlags& f,
                            int* error_exit) {
  nlohmann::json config;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) {
      std::cerr << "error: cannot open config file " << f.config_path << "\n";
      *error_exit = kExitConfig;
      return {};
    }
    try {
      config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "error: bad config JSON: " << e.what() << "\n";
      *error_exit = kExitConfig;
      return {};
    }
  }
  config["kind"] = kind;
  if (f.collusion >= 0) config["collusion"] = f.collusion;
  if (f.num_users >= 0) config["num_users"] = f.num_users;
  if (f.beta >= 0.0) config["beta"] = f.beta;
  if (f.delta >= 0.0) config["delta"] = f.delta;
  if (!f.mode.empty()) config["mode"] = f.mode;
  if (f.sigma >= 0.0) config["sigma"] = f.sigma;
  if (f.ell >= 0) config["rounds"] = f.ell;
  if (f.coalition >= -1) config["coalition_size"] = f.coalition;
  if (!f.pirate.empty()) config["pirate"] = f.pirate;
  if (!f.oracle.empty()) config["oracle"] = f.oracle;
  if (!f.scheme.empty()) config["scheme"] = f.scheme;
  if (f.d >= 0) config["d"] = f.d;
  if (f.trials >= 0) config["trials"] = f.trials;
  if (f.seed_set) config["seed"] = f.seed;
  if (!f.out_dir.empty()) config["out_dir"] = f.out_dir;
  if (f.threads >= 0) config["threads"] = f.threads;
  if (f.transcript) config["record_transcript"] = true;
  if (!f.n_grid.empty()) config["n_grid"] = f.n_grid;
  if (!f.pirates.empty()) config["pirates"] = f.pirates;
  *error_exit = kExitOk;
  return config;
}

int run_experiment_command(const std::string& kind, const CommonFlags& flags) {
  int config_exit = kExitOk;
  const nlohmann::json config = build_config(kind, flags, &config_exit);
  if (config_exit != kExitOk) return config_exit;

  fpt_experiment* experiment = nullptr;
  fpt_status status =
      fpt_experiment_create(config.dump().c_str(), &experiment);
  if (status != FPT_OK) return fail(status);

  status = fpt_experiment_run(experiment);
  if (status != FPT_OK) {
    fpt_experiment_free(experiment);
    return fail(status);
  }

  OwnedString summary;
  status = fpt_experiment_summary_json(experiment, &summary.ptr);
  if (status != FPT_OK) {
    fpt_experiment_free(experiment);
    return fail(status);
  }
  std::cout << summary.str() << "\n";

  int all_pass = 1;
  status = fpt_experiment_all_pass(experiment, &all_pass);
  fpt_experiment_free(experiment);
  if (status != FPT_OK) return fail(status);
  return all_pass == 1 ? kExitOk : kExitFailure;
}

int run_params_command(const CommonFlags& flags) {
  const std::int64_t n = flags.collusion >= 0 ? flags.collusion : 1;
  const std::int64_t users = flags.num_users >= 0 ? flags.num_users : 10 * n;
  const double beta = flags.beta >= 0.0 ? flags.beta : 0.0;
  const double delta = flags.delta >= 0.0 ? flags.delta : 0.001;

  fpt_params* params = nullptr;
  fpt_status status;
  if (flags.mode == "scaled") {
    if (flags.sigma < 0.0 || flags.ell < 0) {
      std::cerr << "error: scaled mode requires --sigma and --ell\n";
      return kExitConfig;
    }
    status = fpt_params_derive_scaled(n, users, beta, delta, flags.sigma,
                                      flags.ell, &params);
  } else {
    status = fpt_params_derive(n, users, beta, delta, &params);
  }
  if (status != FPT_OK) return fail(status);

  OwnedString json;
  status = fpt_params_to_json(params, &json.ptr);
  fpt_params_free(params);
  if (status != FPT_OK) return fail(status);
  std::cout << json.str() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fptrace: collusion-resistant fingerprinting codes and the "
               "adaptive statistical-query attacks built on them"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* params_cmd =
      app.add_subcommand("params", "derive and print code parameters");
  add_common_flags(params_cmd, &flags);

  const std::vector<std::string> experiment_kinds = {
      "ifpc-game",   "nifpc",         "attack",
      "privacy-attack", "real-vs-ideal", "verify-lemmas",
      "calibrate",   "scaling-study"};
  const std::vector<std::string> descriptions = {
      "interactive tracing game against a pirate strategy",
      "non-interactive codebook generation and tracing",
      "adaptive statistical-query recovery attack",
      "reconstruction attack against a sample-accurate oracle",
      "paired real/ideal attack comparison",
      "verify the analytic identities and bounds, emitting a CSV",
      "search for minimal feasible (sigma, rounds)",
      "minimal feasible rounds as a function of n"};
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < experiment_kinds.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(experiment_kinds[i], descriptions[i]);
    add_common_flags(cmd, &flags);
    commands.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  if (params_cmd->parsed()) return run_params_command(flags);
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (commands[i]->parsed()) {
      return run_experiment_command(experiment_kinds[i], flags);
    }
  }
  std::cerr << app.help() << "\n";
  return kExitConfig;
}
