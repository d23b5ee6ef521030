#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifpc.hpp"

namespace fpt::harness {

// Calibrated Scaled-mode defaults, shipped with the repo: the threshold
// follows sigma = c1 * sqrt(rounds * ln(1/delta)) and the round count
// rounds = c2 * n^2. The constants come from the committed calibration run
// (data/calibration.json).
struct ScaledDefaults {
  double sigma;
  std::int64_t rounds;
};
ScaledDefaults scaled_defaults(std::int64_t collusion, double delta);

// Scaled-mode false-accusation fraction: the paper values (1/1000 for the
// recovery attack, 1/20000 for the privacy attack) are kept only when they
// leave delta * (N - n) >= 5; otherwise delta is raised to 5 / (N - n) so
// false-accusation counting stays meaningful at desk scale.
double scaled_delta(double paper_delta, std::int64_t collusion,
                    std::int64_t num_users);

struct ExperimentConfig {
  int schema_version = 1;
  std::string kind;  // ifpc-game | nifpc | attack | privacy-attack |
                     // real-vs-ideal | verify-lemmas | calibrate |
                     // scaling-study
  std::int64_t collusion = 8;
  std::int64_t num_users = 0;  // 0: kind-specific default (10n; 2n privacy)
  double beta = 0.0;
  double delta = 0.0;  // 0: kind-specific default
  std::string mode = "scaled";
  double sigma = 0.0;         // 0: calibrated default
  std::int64_t rounds = 0;    // 0: calibrated default
  std::int64_t coalition_size = -1;  // -1: collusion bound
  std::string pirate = "majority";
  std::string oracle = "empirical_mean";
  std::string scheme = "prf_pad";
  int d = 0;  // 0: 64 bits of key on top of the index
  std::int64_t trials = 1;
  std::uint64_t seed = 1;
  std::string out_dir;
  int threads = 0;  // 0: hardware concurrency
  bool record_transcript = false;  // write trial 0's full transcript

  // calibrate / scaling-study
  std::vector<std::int64_t> n_grid;
  std::vector<std::string> pirates;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Resolves mode/sigma/rounds/delta defaults into a full parameter set.
  ifpc::IfpcParams make_params() const;
};

struct TrialSummary {
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  std::int64_t theta_ell = 0;
  std::int64_t psi_ell = 0;
  bool soundness_holds = false;
  bool completeness_holds = false;
  bool coalition_fully_accused = false;
  double recovered_fraction = 0.0;
  double sym_diff_over_n = 0.0;
  bool accuracy_ok = false;
  bool sample_accuracy_ok = false;
  bool blatant = false;
  double runtime_sec = 0.0;  // in-memory only; excluded from files so that
                             // outputs stay byte-identical across reruns
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialSummary> trials;
  nlohmann::json aggregate;
  bool all_pass = true;  // verify-lemmas / calibrate feasibility
};

// Runs `trials` independent trials with per-trial seeds seed + trial index,
// aggregates mean/stderr for metrics and Wilson intervals for proportions,
// and (when out_dir is set) writes trials.csv, trials.jsonl, and
// aggregate.json.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string trials_to_csv(const std::vector<TrialSummary>& trials);
std::string trials_to_jsonl(const std::vector<TrialSummary>& trials);
std::vector<TrialSummary> trials_from_jsonl(const std::string& text);
nlohmann::json aggregate_trials(const std::vector<TrialSummary>& trials,
                                const ExperimentConfig& config);

struct CalibrationRow {
  std::int64_t collusion = 0;
  std::int64_t num_users = 0;
  double beta = 0.0;
  double delta = 0.0;
  std::int64_t min_rounds = 0;
  double sigma = 0.0;
  double c1 = 0.0;
  bool feasible = false;
  double soundness_rate = 0.0;
  double completeness_rate = 0.0;
};

struct CalibrationResult {
  std::vector<CalibrationRow> rows;       // one per n in the grid
  std::vector<nlohmann::json> frontier;   // every cell probed
  double fitted_exponent = 0.0;           // slope of log min_rounds vs log n
  double fitted_c2 = 0.0;                 // min_rounds / n^2, geometric mean
  double suggested_c1 = 0.0;
};

struct CalibrateOptions {
  std::int64_t trials_per_cell = 100;
  std::int64_t users_multiplier = 10;
  double soundness_target = 0.95;
  double completeness_target = 0.90;
  std::vector<double> c1_grid = {2.0, 3.0, 4.5};
  std::int64_t rounds_base = 128;
  double rounds_factor = 2.0;
  int rounds_steps = 10;
  std::uint64_t seed = 1;
  int threads = 0;
};

// Smallest (sigma, rounds) on the geometric grid such that, against every
// pirate in the set, soundness holds in >= soundness_target of the trials
// and completeness-or-full-accusation in >= completeness_target.
CalibrationResult calibrate(const std::vector<std::int64_t>& n_grid,
                            double beta, double delta,
                            const std::vector<std::string>& pirate_set,
                            const CalibrateOptions& options = {});

// Lemma verification sweep; returns CSV text with one row per checked
// instance: lemma, instance, lhs, rhs, margin, pass.
struct LemmaReport {
  std::string csv;
  std::int64_t checked = 0;
  std::int64_t failed = 0;
};
LemmaReport verify_lemmas(std::uint64_t seed = 1);

}  // namespace fpt::harness
