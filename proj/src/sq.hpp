#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dist.hpp"
#include "errors.hpp"
#include "ifpc.hpp"
#include "rng.hpp"

namespace fpt::sq {

using Key = std::vector<std::uint8_t>;
using Ciphertext = std::vector<std::uint8_t>;

// Private-key scheme over the three-letter message space {-1, 0, +1}.
// Decryption under the right key is exact with probability 1; under a wrong
// key it yields an arbitrary message but never fails.
class EncryptionScheme {
 public:
  virtual ~EncryptionScheme() = default;
  virtual Key gen(int key_bits, Rng& rng) = 0;
  virtual Ciphertext enc(const Key& key, int message, Rng& rng) = 0;
  virtual int dec(const Key& key, const Ciphertext& ct) const = 0;
  virtual std::string_view name() const = 0;
};

// Computational instantiation: fresh nonce per encryption, pad derived from
// (key, nonce) by a keyed 64-bit mixing function. Stateless, shareable.
std::unique_ptr<EncryptionScheme> prf_pad_scheme();

// Information-theoretic instantiation: gen pre-draws `max_messages` one-time
// pads per key and enc consumes them in order (stateful, single-owner).
// Throws on pad exhaustion.
std::unique_ptr<EncryptionScheme> otp_scheme(std::int64_t max_messages);

struct Record {
  std::int32_t index = 0;
  Key key;
};

// Challenge universe: records y_i = (i, sk_i) with the uniform distribution
// over them. Key length is lambda = d - ceil(log2 N) bits, which requires
// d >= 1 + ceil(log2 N).
struct Universe {
  int d = 0;
  std::int32_t num_users = 0;
  int lambda = 0;
  std::vector<Record> records;
};

Universe make_universe(int d, std::int32_t num_users, EncryptionScheme& scheme,
                       Rng& rng);

// The one query family the attack issues: a ciphertext per user plus an
// exclusion set. Evaluating on a record decrypts that record's ciphertext
// with the record's own key, or yields 0 for excluded users.
struct StatQuery {
  const EncryptionScheme* scheme = nullptr;
  std::vector<Ciphertext> ciphertexts;
  std::vector<bool> excluded;

  int evaluate(const Record& record) const;
};

// Exact average of the query over the whole universe, (1/N) sum_i q(y_i).
// Tracer-side helper: it touches every record's key.
double population_value(const StatQuery& query, const Universe& universe);

// Stateful answerer of the statistical-query game. Answers must lie in
// [-1, 1].
class SqOracle {
 public:
  virtual ~SqOracle() = default;
  virtual void init(std::vector<Record> sample, Rng& rng) = 0;
  virtual double answer(const StatQuery& query, Rng& rng) = 0;
  virtual std::string_view name() const = 0;
};

std::unique_ptr<SqOracle> empirical_mean_oracle();
std::unique_ptr<SqOracle> gaussian_noise_oracle(double noise_sd);
std::unique_ptr<SqOracle> subsample_oracle(std::int64_t subset_size);
std::unique_ptr<SqOracle> constant_oracle(double value);
// "name" or "name:param" spec, e.g. "gaussian_noise:0.25".
std::unique_ptr<SqOracle> make_oracle(const std::string& spec);

// Generic accuracy game: the analyst supplies the record distribution and
// the (possibly adaptive) query stream; the oracle holds n samples.
struct AccAnalyst {
  std::function<Record(Rng&)> sample_record;
  std::function<StatQuery(std::int64_t round)> next_query;
  std::function<double(const StatQuery&)> population_value;
};

struct AccTranscript {
  std::vector<double> answers;
  std::vector<double> population_values;
  std::vector<double> sample_means;
};

AccTranscript run_acc_game(SqOracle& oracle, const AccAnalyst& analyst,
                           std::int64_t n, int d, std::int64_t num_queries,
                           Rng rng);

struct AttackOptions {
  bool ideal = false;          // encrypt 0 for users outside the sample
  bool record_rounds = false;  // keep per-round columns and accusations
};

// Joint record of a recovery run (the same shape serves the accuracy attack
// and the privacy attack).
struct AttackReport {
  ifpc::IfpcParams params;
  int d = 0;
  std::int64_t sample_size = 0;
  std::uint64_t seed = 0;
  bool ideal = false;
  std::string oracle_name;

  std::vector<std::int32_t> sample_indices;  // S: distinct indices sampled
  std::vector<std::int32_t> recovered;       // T^L, sorted
  std::int64_t rounds_run = 0;               // L
  std::int64_t theta_ell = 0;                // w.r.t. full columns
  std::int64_t psi_ell = 0;                  // |T^L \ S|
  bool sample_recovered = false;             // S subseteq T^L
  double recovered_fraction = 0.0;           // |S cap T^L| / |S|

  std::vector<double> raw_answers;
  std::vector<std::int8_t> rounded_answers;
  std::vector<double> population_values;  // per round, before the answer
  std::vector<double> sample_means;       // per round, over the oracle sample

  // Populated when record_rounds is set.
  std::vector<dist::BiasSample> biases;
  std::vector<std::vector<std::int8_t>> columns;
  std::vector<std::vector<std::int32_t>> accusations;
};

// Figure-4-style recovery attack: the oracle's sample is n iid draws from
// the uniform distribution over the universe; every round encrypts the
// tracer column per user, asks the oracle, rounds the answer to +-1 (ties
// to +1), and feeds it back to the tracer.
AttackReport run_attack(SqOracle& oracle, std::int64_t n, int d,
                        const ifpc::IfpcParams& params,
                        EncryptionScheme& scheme, Rng rng,
                        const AttackOptions& options = {});

inline AttackReport run_ideal_attack(SqOracle& oracle, std::int64_t n, int d,
                                     const ifpc::IfpcParams& params,
                                     EncryptionScheme& scheme, Rng rng,
                                     AttackOptions options = {}) {
  options.ideal = true;
  return run_attack(oracle, n, d, params, scheme, rng, options);
}

struct PrivacyReport {
  AttackReport attack;
  std::vector<std::int32_t> sample;     // x, sorted indices (n of 2n)
  std::vector<std::int32_t> recovered;  // x' = T^L
  std::int64_t sym_diff = 0;            // |x triangle x'|
  bool blatant = false;                 // sym_diff <= n/100
  bool halted_early = false;            // |T^j| > 499 n / 500 reached
  bool division_guard_tripped = false;  // |T^{j-1}| reached n
};

// Figure-6-style reconstruction attack on a universe of 2n records, with
// the oracle holding a uniformly random n-subset. Answers are rescaled by
// n / (n - |T^{j-1}|) before rounding; the run halts once |T^j| > 499n/500.
// params.num_users must equal 2n.
PrivacyReport run_privacy_attack(SqOracle& oracle, std::int64_t n, int d,
                                 const ifpc::IfpcParams& params,
                                 EncryptionScheme& scheme, Rng rng,
                                 const AttackOptions& options = {});

// True iff |answer - population| <= alpha_acc in all but at most
// ceil(beta * k) of the k recorded rounds (the boundary count passes).
bool accuracy_check(const AttackReport& report, double alpha_acc, double beta);

// Same with the per-round sample means as the target.
bool sample_accuracy_check(const AttackReport& report, double alpha_acc,
                           double beta);

struct NonPrivacyMetric {
  std::int64_t sym_diff = 0;
  bool blatant = false;
};

// |x triangle x_prime| and whether it is within n/100 (success for the
// attacker).
NonPrivacyMetric blatant_nonprivacy_metric(std::span<const std::int32_t> x,
                                           std::span<const std::int32_t> x_prime,
                                           std::int64_t n);

}  // namespace fpt::sq
