#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dist.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace fpt::pirates {
class PirateStrategy;
}

namespace fpt::ifpc {

enum class ParamMode { kPaperExact, kScaled };

// Full parameter set of the interactive code. PaperExact derives sigma and
// the round count from the collusion bound and robustness/false-accusation
// targets; those values are enormous even for small collusion bounds, so
// Scaled mode takes caller-supplied (sigma, rounds) and keeps the derived
// alpha/zeta/gamma shape.
struct IfpcParams {
  std::int64_t num_users = 0;  // N
  std::int64_t collusion = 0;  // n
  double beta = 0.0;           // tolerated inconsistency fraction, [0, 1/2)
  double delta = 0.0;          // false-accusation fraction, (0, 1]
  double alpha = 0.0;          // bias interval margin
  double zeta = 0.0;           // special-round mass (each endpoint)
  double sigma = 0.0;          // accusation threshold
  std::int64_t rounds = 0;     // ell
  double gamma = 0.0;          // inconsistency weight, (2/pi)(1-2 zeta)/zeta
  ParamMode mode = ParamMode::kPaperExact;
};

// Derives the parameter set. For kScaled, sigma_override > 0 and
// ell_override >= 1 are required; for kPaperExact they must be left at 0.
// Throws std::invalid_argument on out-of-range inputs.
IfpcParams derive_params(std::int64_t collusion, std::int64_t num_users,
                         double beta, double delta, ParamMode mode,
                         double sigma_override = 0.0,
                         std::int64_t ell_override = 0);

struct RoundRecord {
  dist::BiasSample p;  // tracer-secret bias of the round
  std::vector<std::int8_t> column;
  std::vector<std::int32_t> shown_to;  // S^j at the time of the round
  int answer = 0;
  std::vector<std::int32_t> accused_now;
};

struct Transcript {
  IfpcParams params;
  std::vector<std::int32_t> coalition;  // S^1, sorted
  std::uint64_t seed = 0;
  std::int64_t rounds_run = 0;
  std::vector<RoundRecord> records;        // present iff record_rounds
  std::vector<std::int64_t> theta_trace;   // theta^j, j = 1..rounds_run
  std::vector<std::int64_t> psi_trace;     // psi^j
  std::int64_t theta_ell = 0;
  std::int64_t psi_ell = 0;
  std::vector<std::int32_t> accused;  // union of all accusation sets, sorted
  std::vector<double> final_scores;
};

struct GameOutcome {
  bool completeness_holds = false;  // theta^ell > beta * ell
  bool soundness_holds = false;     // psi^ell <= delta * (N - |S^1|)
  bool tracer_wins = false;
  bool coalition_fully_accused = false;
};

// Score-update state of the tracer of the interactive code. One instance is
// strictly single-threaded; rounds alternate next_column / process_answer.
class TracerState {
 public:
  TracerState(const IfpcParams& params, Rng rng);

  // Draws the round bias and a fresh +-1 column (P(+1) = p per user).
  // Throws ProtocolError after `rounds` rounds or when called twice without
  // an intervening process_answer.
  std::pair<dist::BiasSample, std::vector<std::int8_t>> next_column();

  // Applies the score update s_i += answer * phi(p, column[i]) for every
  // user, then accuses previously unaccused users whose score strictly
  // exceeds sigma. Accused users keep their scores updated in later rounds
  // but are never accused twice.
  std::vector<std::int32_t> process_answer(const dist::BiasSample& p,
                                           const std::vector<std::int8_t>& column,
                                           int answer);

  // Replay path: feeds an externally generated round (bias, column, answer)
  // through the same update as next_column + process_answer. Used when
  // re-tracing recorded randomness.
  std::vector<std::int32_t> replay_round(const dist::BiasSample& p,
                                         const std::vector<std::int8_t>& column,
                                         int answer);

  const IfpcParams& params() const { return params_; }
  std::int64_t round() const { return round_; }
  const std::vector<double>& scores() const { return scores_; }
  const std::vector<bool>& accused_mask() const { return accused_; }
  Rng& rng() { return rng_; }

 private:
  std::vector<std::int32_t> apply_update(const dist::BiasSample& p,
                                         const std::vector<std::int8_t>& column,
                                         int answer);

  IfpcParams params_;
  dist::BiasMixture mixture_;
  Rng rng_;
  std::int64_t round_ = 0;
  bool awaiting_answer_ = false;
  std::vector<double> scores_;
  std::vector<bool> accused_;
};

struct GameOptions {
  bool record_rounds = true;
  bool record_traces = true;
  // Stop once the coalition is fully accused. Figure-faithful runs keep
  // going for all `rounds` rounds; this is a harness convenience only and
  // changes the meaning of theta^ell / psi^ell for shortened games.
  bool early_exit = false;
};

// Runs the full interactive game between the tracer and a pirate strategy.
// The pirate sees exactly the restriction of each column to the shrinking
// coalition S^j. Coalition members may number up to N (the soundness side
// does not require |S^1| <= n).
Transcript run_game(const IfpcParams& params,
                    const std::vector<std::int32_t>& coalition,
                    pirates::PirateStrategy& pirate, Rng rng,
                    const GameOptions& options = {});

// Number of rounds k <= j in which no user's bit matched the answer
// (recomputed from recorded rounds; requires record_rounds).
std::int64_t inconsistency_count(const Transcript& t, std::int64_t j);

// |union of accusations through round j, minus the coalition|.
std::int64_t false_accusations(const Transcript& t, std::int64_t j);

GameOutcome evaluate_outcome(const Transcript& t, const IfpcParams& params);

}  // namespace fpt::ifpc
