#include "fptrace/fptrace.h"

#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "harness.hpp"
#include "ifpc.hpp"
#include "serialize.hpp"

struct fpt_params {
  fpt::ifpc::IfpcParams rep;
};

struct fpt_experiment {
  fpt::harness::ExperimentConfig config;
  fpt::harness::ExperimentResult result;
  bool ran = false;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
fpt_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FPT_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return FPT_ERR_INVALID_ARGUMENT;
  } catch (const std::ios_base::failure& e) {
    g_last_error = e.what();
    return FPT_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FPT_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return FPT_ERR_RUNTIME;
  }
}

}  // namespace

extern "C" {

const char* fpt_last_error(void) { return g_last_error.c_str(); }

void fpt_string_free(char* s) { delete[] s; }

const char* fpt_version(void) { return "1.0.0"; }

fpt_status fpt_params_derive(int64_t collusion, int64_t num_users, double beta,
                             double delta, fpt_params** out) {
  return guarded([&] {
    if (out == nullptr) throw std::invalid_argument("out is null");
    auto params = fpt::ifpc::derive_params(collusion, num_users, beta, delta,
                                           fpt::ifpc::ParamMode::kPaperExact);
    *out = new fpt_params{params};
  });
}

fpt_status fpt_params_derive_scaled(int64_t collusion, int64_t num_users,
                                    double beta, double delta, double sigma,
                                    int64_t rounds, fpt_params** out) {
  return guarded([&] {
    if (out == nullptr) throw std::invalid_argument("out is null");
    auto params =
        fpt::ifpc::derive_params(collusion, num_users, beta, delta,
                                 fpt::ifpc::ParamMode::kScaled, sigma, rounds);
    *out = new fpt_params{params};
  });
}

fpt_status fpt_params_to_json(const fpt_params* params, char** json_out) {
  return guarded([&] {
    if (params == nullptr || json_out == nullptr) {
      throw std::invalid_argument("null argument");
    }
    *json_out = dup_string(fpt::serialize::params_to_json(params->rep).dump(2));
  });
}

void fpt_params_free(fpt_params* params) { delete params; }

fpt_status fpt_experiment_create(const char* config_json,
                                 fpt_experiment** out) {
  return guarded([&] {
    if (config_json == nullptr || out == nullptr) {
      throw std::invalid_argument("null argument");
    }
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                  e.what());
    }
    auto config = fpt::harness::ExperimentConfig::from_json(parsed);
    // Resolve parameters now so config errors surface before run.
    if (config.kind != "verify-lemmas" && config.kind != "calibrate" &&
        config.kind != "scaling-study") {
      (void)config.make_params();
    }
    *out = new fpt_experiment{std::move(config), {}, false};
  });
}

fpt_status fpt_experiment_run(fpt_experiment* experiment) {
  return guarded([&] {
    if (experiment == nullptr) throw std::invalid_argument("null experiment");
    experiment->result = fpt::harness::run_experiment(experiment->config);
    experiment->ran = true;
  });
}

fpt_status fpt_experiment_summary_json(const fpt_experiment* experiment,
                                       char** json_out) {
  return guarded([&] {
    if (experiment == nullptr || json_out == nullptr) {
      throw std::invalid_argument("null argument");
    }
    if (!experiment->ran) throw std::runtime_error("experiment has not run");
    *json_out = dup_string(experiment->result.aggregate.dump(2));
  });
}

fpt_status fpt_experiment_trials_jsonl(const fpt_experiment* experiment,
                                       char** jsonl_out) {
  return guarded([&] {
    if (experiment == nullptr || jsonl_out == nullptr) {
      throw std::invalid_argument("null argument");
    }
    if (!experiment->ran) throw std::runtime_error("experiment has not run");
    *jsonl_out =
        dup_string(fpt::harness::trials_to_jsonl(experiment->result.trials));
  });
}

void fpt_experiment_free(fpt_experiment* experiment) { delete experiment; }

fpt_status fpt_experiment_all_pass(const fpt_experiment* experiment,
                                   int* out) {
  return guarded([&] {
    if (experiment == nullptr || out == nullptr) {
      throw std::invalid_argument("null argument");
    }
    if (!experiment->ran) throw std::runtime_error("experiment has not run");
    *out = experiment->result.all_pass ? 1 : 0;
  });
}

}  // extern "C"
