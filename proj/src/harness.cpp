#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fourier.hpp"
#include "nifpc.hpp"
#include "pirates.hpp"
#include "serialize.hpp"
#include "sq.hpp"
#include "stats.hpp"

namespace fpt::harness {

namespace {

// Pinned from the calibration run committed under data/calibration.json.
constexpr double kCalibratedC1 = 3.0;
constexpr double kCalibratedC2 = 24.0;

std::string fmt(double x) { return nlohmann::json(x).dump(); }

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-parallel loop; exceptions from workers are rethrown on the caller.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& body) {
  if (count <= 0) return;
  const int workers = std::min<std::int64_t>(threads, count);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        body(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ScaledDefaults scaled_defaults(std::int64_t collusion, double delta) {
  if (collusion < 1) throw std::invalid_argument("collusion must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must be in (0, 1]");
  }
  const double n2 = static_cast<double>(collusion) * static_cast<double>(collusion);
  const auto rounds = static_cast<std::int64_t>(std::ceil(kCalibratedC2 * n2));
  const double sigma =
      kCalibratedC1 *
      std::sqrt(static_cast<double>(rounds) * std::log(1.0 / delta));
  return {sigma, rounds};
}

double scaled_delta(double paper_delta, std::int64_t collusion,
                    std::int64_t num_users) {
  const double innocents =
      static_cast<double>(num_users) - static_cast<double>(collusion);
  if (innocents <= 0.0) return paper_delta;
  return std::min(1.0, std::max(paper_delta, 5.0 / innocents));
}

namespace {

const std::vector<std::string> kDefaultPirates = {
    "dictator:0", "majority", "random_consistent", "constant:1",
    "noisy_mean:0.5"};

bool known_kind(const std::string& kind) {
  static const char* kinds[] = {"ifpc-game",    "nifpc",         "attack",
                                "privacy-attack", "real-vs-ideal", "verify-lemmas",
                                "calibrate",    "scaling-study"};
  for (const char* k : kinds) {
    if (kind == k) return true;
  }
  return false;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("schema_version")) {
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != 1) {
      throw std::invalid_argument("unsupported config schema_version");
    }
  }
  c.kind = j.at("kind").get<std::string>();
  if (!known_kind(c.kind)) {
    throw std::invalid_argument("unknown experiment kind: " + c.kind);
  }
  const auto get_or = [&j](const char* key, auto fallback) {
    using T = decltype(fallback);
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  };
  c.collusion = get_or("collusion", std::int64_t{8});
  c.num_users = get_or("num_users", std::int64_t{0});
  c.beta = get_or("beta", 0.0);
  c.delta = get_or("delta", 0.0);
  c.mode = get_or("mode", std::string("scaled"));
  c.sigma = get_or("sigma", 0.0);
  c.rounds = get_or("rounds", std::int64_t{0});
  c.coalition_size = get_or("coalition_size", std::int64_t{-1});
  c.pirate = get_or("pirate", std::string("majority"));
  c.oracle = get_or("oracle", std::string("empirical_mean"));
  c.scheme = get_or("scheme", std::string("prf_pad"));
  c.d = get_or("d", 0);
  c.trials = get_or("trials", std::int64_t{1});
  c.seed = get_or("seed", std::uint64_t{1});
  c.out_dir = get_or("out_dir", std::string());
  c.threads = get_or("threads", 0);
  c.record_transcript = get_or("record_transcript", false);
  c.n_grid = get_or("n_grid", std::vector<std::int64_t>{});
  c.pirates = get_or("pirates", std::vector<std::string>{});

  if (c.mode != "paper" && c.mode != "scaled") {
    throw std::invalid_argument("mode must be 'paper' or 'scaled'");
  }
  if (c.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (c.collusion < 1) throw std::invalid_argument("collusion must be >= 1");
  if (!(c.beta >= 0.0 && c.beta < 0.5)) {
    throw std::invalid_argument("beta must be in [0, 1/2)");
  }
  if (c.delta < 0.0 || c.delta > 1.0) {
    throw std::invalid_argument("delta must be in (0, 1] or 0 for default");
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {
      {"schema_version", schema_version},
      {"kind", kind},
      {"collusion", collusion},
      {"num_users", num_users},
      {"beta", beta},
      {"delta", delta},
      {"mode", mode},
      {"sigma", sigma},
      {"rounds", rounds},
      {"coalition_size", coalition_size},
      {"pirate", pirate},
      {"oracle", oracle},
      {"scheme", scheme},
      {"d", d},
      {"trials", trials},
      {"seed", seed},
      {"out_dir", out_dir},
      {"threads", threads},
      {"record_transcript", record_transcript},
      {"n_grid", n_grid},
      {"pirates", pirates},
  };
}

namespace {

int default_d(std::int64_t num_users) {
  int bits = 0;
  while ((std::int64_t{1} << bits) < num_users) ++bits;
  return bits + 64;
}

}  // namespace

ifpc::IfpcParams ExperimentConfig::make_params() const {
  std::int64_t users = num_users;
  if (users == 0) {
    if (kind == "privacy-attack") {
      users = 2 * collusion;
    } else if (mode == "paper" && (kind == "attack" || kind == "real-vs-ideal")) {
      users = 2000 * collusion;
    } else {
      users = 10 * collusion;
    }
  }
  if (kind == "privacy-attack" && users != 2 * collusion) {
    throw std::invalid_argument("privacy-attack requires num_users = 2n");
  }

  double resolved_delta = delta;
  if (resolved_delta == 0.0) {
    if (kind == "attack" || kind == "real-vs-ideal") {
      resolved_delta = mode == "paper" ? 1.0 / 1000.0
                                       : scaled_delta(1.0 / 1000.0, collusion, users);
    } else if (kind == "privacy-attack") {
      resolved_delta = mode == "paper"
                           ? 1.0 / 20000.0
                           : scaled_delta(1.0 / 20000.0, collusion, users);
    } else {
      resolved_delta = mode == "paper" ? 1.0 / 1000.0 : 0.1;
    }
  }

  if (mode == "paper") {
    if (sigma != 0.0 || rounds != 0) {
      throw std::invalid_argument("paper mode does not accept sigma/rounds");
    }
    return ifpc::derive_params(collusion, users, beta, resolved_delta,
                               ifpc::ParamMode::kPaperExact);
  }
  double s = sigma;
  std::int64_t r = rounds;
  if (s == 0.0 || r == 0) {
    const auto defaults = scaled_defaults(collusion, resolved_delta);
    if (s == 0.0) s = defaults.sigma;
    if (r == 0) r = defaults.rounds;
  }
  return ifpc::derive_params(collusion, users, beta, resolved_delta,
                             ifpc::ParamMode::kScaled, s, r);
}

namespace {

std::vector<std::int32_t> prefix_coalition(std::int64_t size) {
  std::vector<std::int32_t> coalition(static_cast<std::size_t>(size));
  for (std::int64_t i = 0; i < size; ++i) {
    coalition[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
  }
  return coalition;
}

TrialSummary summarize_game(const ifpc::Transcript& t,
                            const ifpc::IfpcParams& params) {
  TrialSummary s;
  const auto outcome = ifpc::evaluate_outcome(t, params);
  s.theta_ell = t.theta_ell;
  s.psi_ell = t.psi_ell;
  s.soundness_holds = outcome.soundness_holds;
  s.completeness_holds = outcome.completeness_holds;
  s.coalition_fully_accused = outcome.coalition_fully_accused;
  std::int64_t hit = 0;
  for (std::int32_t i : t.coalition) {
    hit += std::binary_search(t.accused.begin(), t.accused.end(), i);
  }
  s.recovered_fraction =
      t.coalition.empty()
          ? 0.0
          : static_cast<double>(hit) / static_cast<double>(t.coalition.size());
  return s;
}

TrialSummary run_ifpc_game_trial(const ExperimentConfig& config,
                                 const ifpc::IfpcParams& params,
                                 std::int64_t trial) {
  Rng rng(config.seed + static_cast<std::uint64_t>(trial));
  const std::int64_t coalition_size =
      config.coalition_size >= 0 ? config.coalition_size : config.collusion;
  const auto coalition = prefix_coalition(coalition_size);
  auto pirate = pirates::make_pirate(config.pirate);
  ifpc::GameOptions options;
  options.record_rounds = false;
  options.record_traces = false;
  const auto transcript = ifpc::run_game(params, coalition, *pirate, rng, options);
  TrialSummary s = summarize_game(transcript, params);
  s.trial = trial;
  s.seed = rng.seed();
  return s;
}

TrialSummary run_nifpc_trial(const ExperimentConfig& config,
                             const ifpc::IfpcParams& params,
                             std::int64_t trial) {
  Rng rng(config.seed + static_cast<std::uint64_t>(trial));
  const std::int64_t coalition_size =
      config.coalition_size >= 0 ? config.coalition_size : config.collusion;
  const auto coalition = prefix_coalition(coalition_size);
  auto pirate = pirates::make_pirate(config.pirate);

  const auto codebook = nifpc::gen(params, rng);
  std::vector<std::int8_t> answers(static_cast<std::size_t>(params.rounds));
  std::vector<std::int8_t> bits(coalition.size());
  Rng pirate_rng = rng.split(0x706972ull);
  for (std::int64_t j = 0; j < params.rounds; ++j) {
    for (std::size_t k = 0; k < coalition.size(); ++k) {
      bits[k] = static_cast<std::int8_t>(codebook.entry(coalition[k], j));
    }
    pirates::PirateView view{j + 1, coalition, bits};
    const int a = pirate->respond(view, pirate_rng);
    if (a != 1 && a != -1) throw ProtocolError("pirate answered outside {-1,+1}");
    answers[static_cast<std::size_t>(j)] = static_cast<std::int8_t>(a);
  }

  const auto accused = nifpc::trace(codebook, answers);
  TrialSummary s;
  s.trial = trial;
  s.seed = rng.seed();
  s.theta_ell = nifpc::consistency_violations(codebook, answers);
  std::int64_t psi = 0;
  std::int64_t hit = 0;
  for (std::int32_t i : accused) {
    if (std::binary_search(coalition.begin(), coalition.end(), i)) {
      ++hit;
    } else {
      ++psi;
    }
  }
  s.psi_ell = psi;
  s.completeness_holds =
      static_cast<double>(s.theta_ell) >
      params.beta * static_cast<double>(params.rounds);
  s.soundness_holds =
      static_cast<double>(psi) <=
      params.delta * static_cast<double>(params.num_users -
                                         static_cast<std::int64_t>(coalition.size()));
  s.coalition_fully_accused = hit == static_cast<std::int64_t>(coalition.size());
  s.recovered_fraction =
      coalition.empty()
          ? 0.0
          : static_cast<double>(hit) / static_cast<double>(coalition.size());
  return s;
}

std::unique_ptr<sq::EncryptionScheme> make_scheme(const std::string& name,
                                                  std::int64_t rounds) {
  if (name == "prf_pad") return sq::prf_pad_scheme();
  if (name == "otp") return sq::otp_scheme(rounds);
  throw std::invalid_argument("unknown scheme: " + name);
}

TrialSummary summarize_attack(const sq::AttackReport& report,
                              const ifpc::IfpcParams& params) {
  TrialSummary s;
  s.theta_ell = report.theta_ell;
  s.psi_ell = report.psi_ell;
  const double innocents =
      static_cast<double>(params.num_users) -
      static_cast<double>(report.sample_indices.size());
  s.soundness_holds = static_cast<double>(report.psi_ell) <=
                      params.delta * innocents;
  s.completeness_holds =
      static_cast<double>(report.theta_ell) >
      params.beta * static_cast<double>(params.rounds);
  s.coalition_fully_accused = report.sample_recovered;
  s.recovered_fraction = report.recovered_fraction;
  s.accuracy_ok = sq::accuracy_check(report, 0.99, params.beta);
  s.sample_accuracy_ok = sq::sample_accuracy_check(report, 0.99, params.beta);
  return s;
}

TrialSummary run_attack_trial(const ExperimentConfig& config,
                              const ifpc::IfpcParams& params,
                              std::int64_t trial) {
  Rng rng(config.seed + static_cast<std::uint64_t>(trial));
  auto scheme = make_scheme(config.scheme, params.rounds);
  auto oracle = sq::make_oracle(config.oracle);
  const int d = config.d > 0 ? config.d : default_d(params.num_users);
  const auto report =
      sq::run_attack(*oracle, config.collusion, d, params, *scheme, rng);
  TrialSummary s = summarize_attack(report, params);
  s.trial = trial;
  s.seed = rng.seed();
  return s;
}

TrialSummary run_privacy_trial(const ExperimentConfig& config,
                               const ifpc::IfpcParams& params,
                               std::int64_t trial) {
  Rng rng(config.seed + static_cast<std::uint64_t>(trial));
  auto scheme = make_scheme(config.scheme, params.rounds);
  auto oracle = sq::make_oracle(config.oracle);
  const int d = config.d > 0 ? config.d : default_d(params.num_users);
  const auto report = sq::run_privacy_attack(*oracle, config.collusion, d,
                                             params, *scheme, rng);
  TrialSummary s = summarize_attack(report.attack, params);
  s.trial = trial;
  s.seed = rng.seed();
  s.sym_diff_over_n = static_cast<double>(report.sym_diff) /
                      static_cast<double>(config.collusion);
  s.blatant = report.blatant;
  // The set-algebra identity |x^x'| = |x| - |x'| + 2 |x' \ x| must hold on
  // every report.
  std::vector<std::int32_t> extra;
  std::set_difference(report.recovered.begin(), report.recovered.end(),
                      report.sample.begin(), report.sample.end(),
                      std::back_inserter(extra));
  const auto identity =
      static_cast<std::int64_t>(report.sample.size()) -
      static_cast<std::int64_t>(report.recovered.size()) +
      2 * static_cast<std::int64_t>(extra.size());
  if (identity != report.sym_diff) {
    throw std::logic_error("privacy report set-algebra identity violated");
  }
  return s;
}

}  // namespace

std::string trials_to_csv(const std::vector<TrialSummary>& trials) {
  std::ostringstream out;
  out << "trial,seed,theta_ell,psi_ell,soundness,completeness,"
         "full_accusation,recovered_fraction,sym_diff_over_n,accuracy_ok,"
         "sample_accuracy_ok,blatant\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << t.seed << ',' << t.theta_ell << ',' << t.psi_ell
        << ',' << int(t.soundness_holds) << ',' << int(t.completeness_holds)
        << ',' << int(t.coalition_fully_accused) << ','
        << fmt(t.recovered_fraction) << ',' << fmt(t.sym_diff_over_n) << ','
        << int(t.accuracy_ok) << ',' << int(t.sample_accuracy_ok) << ','
        << int(t.blatant) << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json trial_to_json(const TrialSummary& t) {
  return {
      {"trial", t.trial},
      {"seed", t.seed},
      {"theta_ell", t.theta_ell},
      {"psi_ell", t.psi_ell},
      {"soundness", t.soundness_holds},
      {"completeness", t.completeness_holds},
      {"full_accusation", t.coalition_fully_accused},
      {"recovered_fraction", t.recovered_fraction},
      {"sym_diff_over_n", t.sym_diff_over_n},
      {"accuracy_ok", t.accuracy_ok},
      {"sample_accuracy_ok", t.sample_accuracy_ok},
      {"blatant", t.blatant},
  };
}

}  // namespace

std::string trials_to_jsonl(const std::vector<TrialSummary>& trials) {
  std::ostringstream out;
  for (const auto& t : trials) out << trial_to_json(t).dump() << '\n';
  return out.str();
}

std::vector<TrialSummary> trials_from_jsonl(const std::string& text) {
  std::vector<TrialSummary> trials;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    TrialSummary t;
    t.trial = j.at("trial").get<std::int64_t>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.theta_ell = j.at("theta_ell").get<std::int64_t>();
    t.psi_ell = j.at("psi_ell").get<std::int64_t>();
    t.soundness_holds = j.at("soundness").get<bool>();
    t.completeness_holds = j.at("completeness").get<bool>();
    t.coalition_fully_accused = j.at("full_accusation").get<bool>();
    t.recovered_fraction = j.at("recovered_fraction").get<double>();
    t.sym_diff_over_n = j.at("sym_diff_over_n").get<double>();
    t.accuracy_ok = j.at("accuracy_ok").get<bool>();
    t.sample_accuracy_ok = j.at("sample_accuracy_ok").get<bool>();
    t.blatant = j.at("blatant").get<bool>();
    trials.push_back(t);
  }
  return trials;
}

nlohmann::json aggregate_trials(const std::vector<TrialSummary>& trials,
                                const ExperimentConfig& config) {
  const auto count = static_cast<std::int64_t>(trials.size());
  std::vector<double> theta, psi, recovered, symdiff;
  std::int64_t sound = 0, complete = 0, full = 0, complete_or_full = 0,
               accurate = 0, sample_accurate = 0, blatant = 0;
  for (const auto& t : trials) {
    theta.push_back(static_cast<double>(t.theta_ell));
    psi.push_back(static_cast<double>(t.psi_ell));
    recovered.push_back(t.recovered_fraction);
    symdiff.push_back(t.sym_diff_over_n);
    sound += t.soundness_holds;
    complete += t.completeness_holds;
    full += t.coalition_fully_accused;
    complete_or_full += t.completeness_holds || t.coalition_fully_accused;
    accurate += t.accuracy_ok;
    sample_accurate += t.sample_accuracy_ok;
    blatant += t.blatant;
  }
  const auto proportion = [count](std::int64_t successes) {
    const auto w = stats::wilson(successes, count);
    return nlohmann::json{{"rate", static_cast<double>(successes) /
                                       static_cast<double>(count)},
                          {"successes", successes},
                          {"wilson_lo", w.lo},
                          {"wilson_hi", w.hi}};
  };
  const auto moments = [](const std::vector<double>& xs) {
    const auto m = stats::mean_stderr(xs);
    return nlohmann::json{{"mean", m.mean}, {"stderr", m.stderr_}};
  };
  return {
      {"kind", config.kind},
      {"trials", count},
      {"theta_ell", moments(theta)},
      {"psi_ell", moments(psi)},
      {"recovered_fraction", moments(recovered)},
      {"sym_diff_over_n", moments(symdiff)},
      {"soundness", proportion(sound)},
      {"completeness", proportion(complete)},
      {"full_accusation", proportion(full)},
      {"completeness_or_full", proportion(complete_or_full)},
      {"accuracy", proportion(accurate)},
      {"sample_accuracy", proportion(sample_accurate)},
      {"blatant", proportion(blatant)},
  };
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_outputs(const ExperimentConfig& config,
                   const ifpc::IfpcParams* params,
                   const ExperimentResult& result) {
  if (config.out_dir.empty()) return;
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  nlohmann::json resolved = config.to_json();
  if (params != nullptr) {
    resolved["resolved_params"] = serialize::params_to_json(*params);
  }
  write_file(dir / "config.json", resolved.dump(2) + "\n");
  if (!result.trials.empty()) {
    write_file(dir / "trials.csv", trials_to_csv(result.trials));
    write_file(dir / "trials.jsonl", trials_to_jsonl(result.trials));
  }
  write_file(dir / "aggregate.json", result.aggregate.dump(2) + "\n");
}

ExperimentResult run_trial_experiment(const ExperimentConfig& config) {
  const auto params = config.make_params();
  ExperimentResult result;
  result.config = config;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  const auto runner = [&](std::int64_t i) {
    TrialSummary s;
    if (config.kind == "ifpc-game") {
      s = run_ifpc_game_trial(config, params, i);
    } else if (config.kind == "nifpc") {
      s = run_nifpc_trial(config, params, i);
    } else if (config.kind == "attack") {
      s = run_attack_trial(config, params, i);
    } else {
      s = run_privacy_trial(config, params, i);
    }
    result.trials[static_cast<std::size_t>(i)] = s;
  };
  parallel_for(config.trials, resolve_threads(config.threads), runner);
  result.aggregate = aggregate_trials(result.trials, config);

  if (config.record_transcript && config.kind == "ifpc-game" &&
      !config.out_dir.empty()) {
    // Re-run trial 0 with full recording; same seed, same trajectory.
    Rng rng(config.seed);
    const std::int64_t size =
        config.coalition_size >= 0 ? config.coalition_size : config.collusion;
    auto pirate = pirates::make_pirate(config.pirate);
    const auto transcript =
        ifpc::run_game(params, prefix_coalition(size), *pirate, rng, {});
    std::filesystem::create_directories(config.out_dir);
    write_file(std::filesystem::path(config.out_dir) / "transcript.jsonl",
               serialize::transcript_to_jsonl(transcript));
  }
  write_outputs(config, &params, result);
  return result;
}

ExperimentResult run_real_vs_ideal(const ExperimentConfig& config) {
  const auto params = config.make_params();
  ExperimentResult result;
  result.config = config;
  result.trials.resize(static_cast<std::size_t>(config.trials));

  std::vector<double> theta_real(static_cast<std::size_t>(config.trials));
  std::vector<double> theta_ideal(static_cast<std::size_t>(config.trials));
  std::vector<double> psi_real(static_cast<std::size_t>(config.trials));
  std::vector<double> psi_ideal(static_cast<std::size_t>(config.trials));
  std::vector<std::uint8_t> identical(static_cast<std::size_t>(config.trials));

  const int d = config.d > 0 ? config.d : default_d(params.num_users);
  const auto runner = [&](std::int64_t i) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
    sq::AttackOptions options;
    options.record_rounds = true;

    auto scheme_real = make_scheme(config.scheme, params.rounds);
    auto oracle_real = sq::make_oracle(config.oracle);
    const auto real = sq::run_attack(*oracle_real, config.collusion, d, params,
                                     *scheme_real, Rng(seed), options);

    auto scheme_ideal = make_scheme(config.scheme, params.rounds);
    auto oracle_ideal = sq::make_oracle(config.oracle);
    const auto ideal =
        sq::run_ideal_attack(*oracle_ideal, config.collusion, d, params,
                             *scheme_ideal, Rng(seed), options);

    const auto ui = static_cast<std::size_t>(i);
    theta_real[ui] = static_cast<double>(real.theta_ell);
    theta_ideal[ui] = static_cast<double>(ideal.theta_ell);
    psi_real[ui] = static_cast<double>(real.psi_ell);
    psi_ideal[ui] = static_cast<double>(ideal.psi_ell);
    identical[ui] = real.raw_answers == ideal.raw_answers &&
                    real.rounded_answers == ideal.rounded_answers &&
                    real.columns == ideal.columns &&
                    real.accusations == ideal.accusations &&
                    real.recovered == ideal.recovered;

    TrialSummary s = summarize_attack(real, params);
    s.trial = i;
    s.seed = seed;
    result.trials[ui] = s;
  };
  parallel_for(config.trials, resolve_threads(config.threads), runner);

  result.aggregate = aggregate_trials(result.trials, config);
  result.aggregate["ks_p_theta"] = stats::ks_two_sample_pvalue(theta_real, theta_ideal);
  result.aggregate["ks_p_psi"] = stats::ks_two_sample_pvalue(psi_real, psi_ideal);
  std::int64_t identical_count = 0;
  for (auto b : identical) identical_count += b;
  result.aggregate["identical_transcripts"] = identical_count;
  result.aggregate["theta_ideal_mean"] = stats::mean_stderr(theta_ideal).mean;
  result.aggregate["psi_ideal_mean"] = stats::mean_stderr(psi_ideal).mean;
  write_outputs(config, &params, result);
  return result;
}

ExperimentResult run_calibration_kind(const ExperimentConfig& config) {
  CalibrateOptions options;
  options.trials_per_cell = config.trials > 1 ? config.trials : 100;
  options.seed = config.seed;
  options.threads = config.threads;
  const auto n_grid = config.n_grid.empty()
                          ? std::vector<std::int64_t>{4, 8, 16}
                          : config.n_grid;
  const auto pirate_set = config.pirates.empty() ? kDefaultPirates : config.pirates;
  const double delta = config.delta == 0.0 ? 0.1 : config.delta;

  const auto calibration = calibrate(n_grid, config.beta, delta, pirate_set, options);

  ExperimentResult result;
  result.config = config;
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "n,num_users,beta,delta,min_rounds,sigma,c1,feasible,"
         "soundness_rate,completeness_rate\n";
  for (const auto& row : calibration.rows) {
    rows.push_back({{"n", row.collusion},
                    {"num_users", row.num_users},
                    {"beta", row.beta},
                    {"delta", row.delta},
                    {"min_rounds", row.min_rounds},
                    {"sigma", row.sigma},
                    {"c1", row.c1},
                    {"feasible", row.feasible},
                    {"soundness_rate", row.soundness_rate},
                    {"completeness_rate", row.completeness_rate}});
    csv << row.collusion << ',' << row.num_users << ',' << fmt(row.beta) << ','
        << fmt(row.delta) << ',' << row.min_rounds << ',' << fmt(row.sigma)
        << ',' << fmt(row.c1) << ',' << int(row.feasible) << ','
        << fmt(row.soundness_rate) << ',' << fmt(row.completeness_rate) << '\n';
    result.all_pass = result.all_pass && row.feasible;
  }
  result.aggregate = {
      {"kind", config.kind},
      {"rows", rows},
      {"fitted_exponent", calibration.fitted_exponent},
      {"fitted_c2", calibration.fitted_c2},
      {"suggested_c1", calibration.suggested_c1},
      {"trials_per_cell", options.trials_per_cell},
      {"pirates", pirate_set},
  };
  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "config.json", config.to_json().dump(2) + "\n");
    write_file(dir / (config.kind == "calibrate" ? "calibration.csv"
                                                 : "scaling.csv"),
               csv.str());
    nlohmann::json full = result.aggregate;
    nlohmann::json frontier = nlohmann::json::array();
    for (const auto& cell : calibration.frontier) frontier.push_back(cell);
    full["frontier"] = frontier;
    write_file(dir / "calibration.json", full.dump(2) + "\n");
  }
  return result;
}

ExperimentResult run_verify_lemmas(const ExperimentConfig& config) {
  const auto report = verify_lemmas(config.seed);
  ExperimentResult result;
  result.config = config;
  result.all_pass = report.failed == 0;
  result.aggregate = {
      {"kind", config.kind},
      {"checked", report.checked},
      {"failed", report.failed},
  };
  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "lemmas.csv", report.csv);
    write_file(dir / "aggregate.json", result.aggregate.dump(2) + "\n");
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.kind == "verify-lemmas") return run_verify_lemmas(config);
  if (config.kind == "calibrate" || config.kind == "scaling-study") {
    return run_calibration_kind(config);
  }
  if (config.kind == "real-vs-ideal") return run_real_vs_ideal(config);
  return run_trial_experiment(config);
}

CalibrationResult calibrate(const std::vector<std::int64_t>& n_grid,
                            double beta, double delta,
                            const std::vector<std::string>& pirate_set,
                            const CalibrateOptions& options) {
  if (n_grid.empty()) throw std::invalid_argument("calibrate needs an n grid");
  if (pirate_set.empty()) throw std::invalid_argument("calibrate needs pirates");
  CalibrationResult result;
  const int threads = resolve_threads(options.threads);

  for (std::size_t n_idx = 0; n_idx < n_grid.size(); ++n_idx) {
    const std::int64_t n = n_grid[n_idx];
    const std::int64_t users = options.users_multiplier * n;
    CalibrationRow row;
    row.collusion = n;
    row.num_users = users;
    row.beta = beta;
    row.delta = delta;

    std::int64_t rounds = options.rounds_base;
    for (int step = 0; step < options.rounds_steps && !row.feasible; ++step) {
      for (std::size_t c1_idx = 0; c1_idx < options.c1_grid.size(); ++c1_idx) {
        const double c1 = options.c1_grid[c1_idx];
        const double sigma =
            c1 * std::sqrt(static_cast<double>(rounds) * std::log(1.0 / delta));
        const auto params = ifpc::derive_params(n, users, beta, delta,
                                                ifpc::ParamMode::kScaled, sigma,
                                                rounds);
        const std::int64_t trials = options.trials_per_cell;
        const auto allowed_sound = static_cast<std::int64_t>(
            std::floor((1.0 - options.soundness_target) * static_cast<double>(trials)));
        const auto allowed_complete = static_cast<std::int64_t>(std::floor(
            (1.0 - options.completeness_target) * static_cast<double>(trials)));

        bool cell_ok = true;
        std::int64_t worst_sound = trials, worst_complete = trials;
        for (std::size_t p_idx = 0; p_idx < pirate_set.size() && cell_ok; ++p_idx) {
          std::atomic<std::int64_t> sound_failures{0};
          std::atomic<std::int64_t> complete_failures{0};
          std::atomic<bool> rejected{false};
          const auto trial_body = [&](std::int64_t t) {
            if (rejected.load(std::memory_order_relaxed)) return;
            Rng rng = Rng(options.seed)
                          .split(static_cast<std::uint64_t>(n))
                          .split(static_cast<std::uint64_t>(step))
                          .split(static_cast<std::uint64_t>(c1_idx))
                          .split(static_cast<std::uint64_t>(p_idx))
                          .split(static_cast<std::uint64_t>(t));
            auto pirate = pirates::make_pirate(pirate_set[p_idx]);
            ifpc::GameOptions game_options;
            game_options.record_rounds = false;
            game_options.record_traces = false;
            const auto transcript = ifpc::run_game(
                params, prefix_coalition(n), *pirate, rng, game_options);
            const auto outcome = ifpc::evaluate_outcome(transcript, params);
            if (!outcome.soundness_holds) {
              if (sound_failures.fetch_add(1) + 1 > allowed_sound) {
                rejected.store(true);
              }
            }
            if (!(outcome.completeness_holds || outcome.coalition_fully_accused)) {
              if (complete_failures.fetch_add(1) + 1 > allowed_complete) {
                rejected.store(true);
              }
            }
          };
          parallel_for(trials, threads, trial_body);
          const std::int64_t sf = sound_failures.load();
          const std::int64_t cf = complete_failures.load();
          worst_sound = std::min(worst_sound, trials - sf);
          worst_complete = std::min(worst_complete, trials - cf);
          if (sf > allowed_sound || cf > allowed_complete) cell_ok = false;
        }

        result.frontier.push_back(
            {{"n", n},
             {"rounds", rounds},
             {"sigma", sigma},
             {"c1", c1},
             {"feasible", cell_ok},
             {"worst_soundness", static_cast<double>(worst_sound) /
                                     static_cast<double>(trials)},
             {"worst_completeness", static_cast<double>(worst_complete) /
                                        static_cast<double>(trials)}});
        if (cell_ok) {
          row.feasible = true;
          row.min_rounds = rounds;
          row.sigma = sigma;
          row.c1 = c1;
          row.soundness_rate = static_cast<double>(worst_sound) /
                               static_cast<double>(trials);
          row.completeness_rate = static_cast<double>(worst_complete) /
                                  static_cast<double>(trials);
          break;
        }
      }
      rounds = static_cast<std::int64_t>(
          std::llround(static_cast<double>(rounds) * options.rounds_factor));
    }
    result.rows.push_back(row);
  }

  std::vector<double> log_n, log_ell, c2s;
  double c1_max = 0.0;
  for (const auto& row : result.rows) {
    if (!row.feasible) continue;
    log_n.push_back(std::log(static_cast<double>(row.collusion)));
    log_ell.push_back(std::log(static_cast<double>(row.min_rounds)));
    c2s.push_back(static_cast<double>(row.min_rounds) /
                  (static_cast<double>(row.collusion) *
                   static_cast<double>(row.collusion)));
    c1_max = std::max(c1_max, row.c1);
  }
  if (log_n.size() >= 2) {
    result.fitted_exponent = stats::fit_line(log_n, log_ell).slope;
  }
  if (!c2s.empty()) {
    double log_sum = 0.0;
    for (double c : c2s) log_sum += std::log(c);
    result.fitted_c2 = std::exp(log_sum / static_cast<double>(c2s.size()));
  }
  result.suggested_c1 = c1_max;
  return result;
}

namespace {

void lemma_row(std::ostringstream& csv, std::int64_t& checked,
               std::int64_t& failed, const std::string& lemma,
               const std::string& instance, double lhs, double rhs,
               double margin, bool pass) {
  csv << lemma << ',' << instance << ',' << fmt(lhs) << ',' << fmt(rhs) << ','
      << fmt(margin) << ',' << int(pass) << '\n';
  ++checked;
  if (!pass) ++failed;
}

}  // namespace

LemmaReport verify_lemmas(std::uint64_t seed) {
  std::ostringstream csv;
  csv << "lemma,instance,lhs,rhs,margin,pass\n";
  std::int64_t checked = 0;
  std::int64_t failed = 0;
  Rng rng(seed);

  // Derivative identity, exhaustive over all functions for arity <= 3.
  for (int arity = 1; arity <= 3; ++arity) {
    const std::uint64_t functions = 1ull << (1 << arity);
    for (std::uint64_t idx = 0; idx < functions; ++idx) {
      const auto f = fourier::BooleanFunction::from_index(arity, idx);
      for (int pi = 1; pi <= 9; ++pi) {
        const double p = pi / 10.0;
        const auto check = fourier::check_derivative_identity(f, p);
        std::ostringstream inst;
        inst << "n=" << arity << " f=" << idx << " p=" << fmt(p);
        lemma_row(csv, checked, failed, "derivative_identity", inst.str(),
                  check.lhs, check.rhs, check.abs_diff(),
                  check.abs_diff() <= 1e-9);
      }
    }
  }

  // Interval identity: canonical cases plus random functions at arity 4.
  {
    const auto dict = fourier::BooleanFunction::dictator(1, 0);
    const auto check = fourier::check_interval_identity(dict, 0.0, 1.0);
    lemma_row(csv, checked, failed, "interval_identity", "dictator (0;1)",
              check.lhs, check.rhs, check.abs_diff(), check.abs_diff() <= 1e-6);
  }
  for (int r = 0; r < 500; ++r) {
    const auto f = fourier::BooleanFunction::random(4, rng);
    const auto check = fourier::check_interval_identity(f, 0.1, 0.9);
    std::ostringstream inst;
    inst << "n=4 random#" << r << " (0.1;0.9)";
    lemma_row(csv, checked, failed, "interval_identity", inst.str(), check.lhs,
              check.rhs, check.abs_diff(), check.abs_diff() <= 1e-6);
  }

  // Endpoint Lipschitz bound on g.
  for (int arity = 1; arity <= 3; ++arity) {
    const std::uint64_t functions = 1ull << (1 << arity);
    for (std::uint64_t idx = 0; idx < functions; ++idx) {
      const auto f = fourier::BooleanFunction::from_index(arity, idx);
      for (double alpha : {0.05, 0.1, 0.25}) {
        const double g1 = std::abs(fourier::g_eval(f, 1.0 - alpha).value -
                                   fourier::g_eval(f, 1.0).value);
        const double g0 = std::abs(fourier::g_eval(f, alpha).value -
                                   fourier::g_eval(f, 0.0).value);
        const double lhs = std::max(g1, g0);
        const double rhs = 2.0 * arity * alpha;
        std::ostringstream inst;
        inst << "n=" << arity << " f=" << idx << " alpha=" << fmt(alpha);
        lemma_row(csv, checked, failed, "g_endpoint_bound", inst.str(), lhs,
                  rhs, rhs - lhs, lhs <= rhs + 1e-12);
      }
    }
  }

  // Expected per-round progress, exhaustive for arity <= 3 under the
  // derived (alpha, zeta) at beta in {0, 1/4}. The nominal bound is probed
  // as stated and its violations (anti-correlated functions) are reported;
  // the sign-corrected bound must hold for every function.
  for (double beta : {0.0, 0.25}) {
    for (int arity = 1; arity <= 3; ++arity) {
      const double alpha = (0.5 - beta) / (4.0 * arity);
      const double zeta = 3.0 / 8.0 + beta / 4.0;
      constexpr double kInvPi = 1.0 / 3.14159265358979323846;
      const double correction =
          2.0 * (1.0 - 2.0 * zeta) *
          (dist::ArcsineInterval(alpha, 1.0 - alpha).normalizer() - kInvPi);
      const std::uint64_t functions = 1ull << (1 << arity);
      for (std::uint64_t idx = 0; idx < functions; ++idx) {
        const auto f = fourier::BooleanFunction::from_index(arity, idx);
        const auto xi = fourier::xi_expectation(f, alpha, zeta);
        std::ostringstream inst;
        inst << "n=" << arity << " f=" << idx << " beta=" << fmt(beta);
        lemma_row(csv, checked, failed, "xi_expectation", inst.str(), xi.value,
                  xi.lower_bound, xi.value - xi.lower_bound,
                  xi.value >= xi.lower_bound - 1e-9);
        lemma_row(csv, checked, failed, "xi_expectation_corrected", inst.str(),
                  xi.value, xi.lower_bound - correction,
                  xi.value - (xi.lower_bound - correction),
                  xi.value >= xi.lower_bound - correction - 1e-9);
      }
    }
  }

  // Single-letter MGF bound.
  for (double alpha : {0.125, 0.015625}) {
    std::vector<double> p_grid = {0.0, 1.0};
    for (int i = 0; i <= 10; ++i) {
      p_grid.push_back(alpha + (1.0 - 2.0 * alpha) * i / 10.0);
    }
    const double t_max = std::sqrt(alpha) / 2.0;
    for (double p : p_grid) {
      for (int ti = -4; ti <= 4; ++ti) {
        const double t = t_max * ti / 4.0;
        const double lhs =
            p == 0.0 || p == 1.0
                ? 1.0
                : p * std::exp(t * dist::phi(p, 1)) +
                      (1.0 - p) * std::exp(t * dist::phi(p, -1));
        const double rhs = std::exp(t * t);
        std::ostringstream inst;
        inst << "alpha=" << fmt(alpha) << " p=" << fmt(p) << " t=" << fmt(t);
        lemma_row(csv, checked, failed, "phi_mgf", inst.str(), lhs, rhs,
                  rhs - lhs, lhs <= rhs + 1e-12);
      }
    }
  }

  // Tail of weighted phi sums vs the analytic bound, Monte Carlo.
  for (std::int64_t m : {20, 100}) {
    for (double lambda_scale : {0.0, 1.0, 3.0}) {
      const double lambda = lambda_scale * std::sqrt(static_cast<double>(m));
      std::vector<double> ps(static_cast<std::size_t>(m), 0.5);
      std::vector<double> as(static_cast<std::size_t>(m), 1.0);
      Rng tail_rng = rng.split(static_cast<std::uint64_t>(m * 1000 +
                                                          std::llround(lambda_scale)));
      const auto probe =
          fourier::empirical_tail_phisum(ps, as, lambda, 10000, tail_rng);
      const double se =
          std::sqrt(std::max(probe.empirical * (1.0 - probe.empirical), 0.0) /
                    10000.0);
      std::ostringstream inst;
      inst << "m=" << m << " lambda=" << fmt(lambda);
      lemma_row(csv, checked, failed, "phisum_tail", inst.str(),
                probe.empirical, probe.bound, probe.bound + 3 * se - probe.empirical,
                probe.empirical <= probe.bound + 3 * se);
    }
  }

  // Centered MGF of the progress variable vs e^{C t^2}.
  {
    const int arity = 3;
    const double beta = 0.0;
    const double alpha = (0.5 - beta) / (4.0 * arity);
    const double zeta = 3.0 / 8.0 + beta / 4.0;
    const double t_max = std::sqrt(alpha) / 8.0;
    std::vector<double> t_grid;
    for (int ti = -4; ti <= 4; ++ti) t_grid.push_back(t_max * ti / 4.0);
    std::vector<fourier::BooleanFunction> fs;
    fs.push_back(fourier::BooleanFunction::constant(arity, 1));
    fs.push_back(fourier::BooleanFunction::dictator(arity, 0));
    fs.push_back(fourier::BooleanFunction::parity(arity));
    for (int r = 0; r < 5; ++r) {
      fs.push_back(fourier::BooleanFunction::random(arity, rng));
    }
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
      const auto probe = fourier::xi_moment_mgf_probe(fs[fi], alpha, zeta, t_grid);
      std::ostringstream inst;
      inst << "n=3 f#" << fi << " worst_t=" << fmt(probe.worst_t);
      lemma_row(csv, checked, failed, "xi_mgf", inst.str(), probe.max_ratio,
                1.0, 1.0 - probe.max_ratio, probe.max_ratio <= 1.0 + 1e-9);
    }
  }

  return {csv.str(), checked, failed};
}

}  // namespace fpt::harness
