#include "sq.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace fpt::sq {

namespace {

int encode_message(int message) {
  if (message < -1 || message > 1) {
    throw std::invalid_argument("message must be in {-1, 0, +1}");
  }
  return message + 1;
}

// Keyed 64-bit compression of (key, nonce); the low byte is the pad.
std::uint8_t keyed_pad(const Key& key, std::uint64_t nonce) {
  std::uint64_t state = 0x243F6A8885A308D3ull;  // arbitrary nonzero start
  std::size_t i = 0;
  while (i < key.size()) {
    std::uint64_t chunk = 0;
    const std::size_t take = std::min<std::size_t>(8, key.size() - i);
    std::memcpy(&chunk, key.data() + i, take);
    state = Rng::mix(state ^ chunk);
    i += take;
  }
  state = Rng::mix(state ^ nonce);
  return static_cast<std::uint8_t>(state);
}

class PrfPadScheme final : public EncryptionScheme {
 public:
  Key gen(int key_bits, Rng& rng) override {
    if (key_bits < 1) throw std::invalid_argument("key_bits must be >= 1");
    Key key(static_cast<std::size_t>((key_bits + 7) / 8));
    for (auto& b : key) b = static_cast<std::uint8_t>(rng.next_u64());
    return key;
  }

  Ciphertext enc(const Key& key, int message, Rng& rng) override {
    const int v = encode_message(message);
    const std::uint64_t nonce = rng.next_u64();
    Ciphertext ct(9);
    std::memcpy(ct.data(), &nonce, 8);
    ct[8] = static_cast<std::uint8_t>(v) ^ keyed_pad(key, nonce);
    return ct;
  }

  int dec(const Key& key, const Ciphertext& ct) const override {
    if (ct.size() != 9) {
      throw std::invalid_argument("malformed ciphertext");
    }
    std::uint64_t nonce;
    std::memcpy(&nonce, ct.data(), 8);
    const std::uint8_t v = ct[8] ^ keyed_pad(key, nonce);
    // A wrong key yields a near-uniform byte; fold it into the message space
    // instead of failing.
    return static_cast<int>(v % 3) - 1;
  }

  std::string_view name() const override { return "prf_pad"; }
};

class OtpScheme final : public EncryptionScheme {
 public:
  explicit OtpScheme(std::int64_t max_messages) : max_messages_(max_messages) {
    if (max_messages < 1) {
      throw std::invalid_argument("max_messages must be >= 1");
    }
  }

  // The requested key_bits is ignored: an information-theoretic key is one
  // fresh pad byte per permitted encryption.
  Key gen(int, Rng& rng) override {
    Key key(static_cast<std::size_t>(max_messages_));
    for (auto& b : key) b = static_cast<std::uint8_t>(rng.next_u64());
    return key;
  }

  Ciphertext enc(const Key& key, int message, Rng&) override {
    const int v = encode_message(message);
    const std::uint64_t index = next_index(key);
    if (index >= key.size()) {
      throw std::runtime_error("one-time pads exhausted for this key");
    }
    Ciphertext ct(9);
    std::memcpy(ct.data(), &index, 8);
    ct[8] = static_cast<std::uint8_t>(v) ^ key[static_cast<std::size_t>(index)];
    return ct;
  }

  int dec(const Key& key, const Ciphertext& ct) const override {
    if (ct.size() != 9) {
      throw std::invalid_argument("malformed ciphertext");
    }
    std::uint64_t index;
    std::memcpy(&index, ct.data(), 8);
    if (index >= key.size()) {
      throw std::invalid_argument("ciphertext pad index out of range");
    }
    const std::uint8_t v = ct[8] ^ key[static_cast<std::size_t>(index)];
    return static_cast<int>(v % 3) - 1;
  }

  std::string_view name() const override { return "otp"; }

 private:
  std::uint64_t next_index(const Key& key) {
    const std::string id(reinterpret_cast<const char*>(key.data()), key.size());
    return counters_[id]++;
  }

  std::int64_t max_messages_;
  std::unordered_map<std::string, std::uint64_t> counters_;
};

}  // namespace

std::unique_ptr<EncryptionScheme> prf_pad_scheme() {
  return std::make_unique<PrfPadScheme>();
}

std::unique_ptr<EncryptionScheme> otp_scheme(std::int64_t max_messages) {
  return std::make_unique<OtpScheme>(max_messages);
}

namespace {

int ceil_log2(std::int64_t n) {
  int bits = 0;
  while ((std::int64_t{1} << bits) < n) ++bits;
  return bits;
}

}  // namespace

Universe make_universe(int d, std::int32_t num_users, EncryptionScheme& scheme,
                       Rng& rng) {
  if (num_users < 1) throw std::invalid_argument("universe needs users");
  const int index_bits = ceil_log2(num_users);
  if (d < 1 + index_bits) {
    throw std::invalid_argument(
        "record length d must be at least 1 + ceil(log2 N)");
  }
  Universe u;
  u.d = d;
  u.num_users = num_users;
  u.lambda = d - index_bits;
  u.records.reserve(static_cast<std::size_t>(num_users));
  for (std::int32_t i = 0; i < num_users; ++i) {
    u.records.push_back({i, scheme.gen(u.lambda, rng)});
  }
  return u;
}

int StatQuery::evaluate(const Record& record) const {
  const auto i = static_cast<std::size_t>(record.index);
  if (record.index < 0 || i >= ciphertexts.size()) {
    throw std::invalid_argument("record index outside the query table");
  }
  if (excluded[i]) return 0;
  return scheme->dec(record.key, ciphertexts[i]);
}

double population_value(const StatQuery& query, const Universe& universe) {
  double sum = 0.0;
  for (const auto& record : universe.records) {
    sum += query.evaluate(record);
  }
  return sum / static_cast<double>(universe.records.size());
}

namespace {

double sample_mean_of(const StatQuery& query,
                      const std::vector<Record>& sample) {
  if (sample.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : sample) sum += query.evaluate(r);
  return sum / static_cast<double>(sample.size());
}

class EmpiricalMeanOracle final : public SqOracle {
 public:
  void init(std::vector<Record> sample, Rng&) override {
    sample_ = std::move(sample);
  }
  double answer(const StatQuery& query, Rng&) override {
    return sample_mean_of(query, sample_);
  }
  std::string_view name() const override { return "empirical_mean"; }

 protected:
  std::vector<Record> sample_;
};

class GaussianNoiseOracle final : public SqOracle {
 public:
  explicit GaussianNoiseOracle(double noise_sd) : noise_sd_(noise_sd) {
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  }
  void init(std::vector<Record> sample, Rng&) override {
    sample_ = std::move(sample);
  }
  double answer(const StatQuery& query, Rng& rng) override {
    const double noisy =
        sample_mean_of(query, sample_) + noise_sd_ * rng.gaussian();
    return std::clamp(noisy, -1.0, 1.0);
  }
  std::string_view name() const override { return "gaussian_noise"; }

 private:
  std::vector<Record> sample_;
  double noise_sd_;
};

class SubsampleOracle final : public SqOracle {
 public:
  explicit SubsampleOracle(std::int64_t subset_size) : subset_size_(subset_size) {
    if (subset_size < 1) throw std::invalid_argument("subset size must be >= 1");
  }
  void init(std::vector<Record> sample, Rng& rng) override {
    // Fixed random subset, chosen once.
    const auto n = static_cast<std::int64_t>(sample.size());
    const std::int64_t t = std::min(subset_size_, n);
    for (std::int64_t i = 0; i < t; ++i) {
      const auto j = i + static_cast<std::int64_t>(
                             rng.uniform_below(static_cast<std::uint64_t>(n - i)));
      std::swap(sample[static_cast<std::size_t>(i)],
                sample[static_cast<std::size_t>(j)]);
    }
    sample.resize(static_cast<std::size_t>(t));
    subset_ = std::move(sample);
  }
  double answer(const StatQuery& query, Rng&) override {
    return sample_mean_of(query, subset_);
  }
  std::string_view name() const override { return "subsample"; }

 private:
  std::int64_t subset_size_;
  std::vector<Record> subset_;
};

class ConstantOracle final : public SqOracle {
 public:
  explicit ConstantOracle(double value) : value_(value) {
    if (!(value >= -1.0 && value <= 1.0)) {
      throw std::invalid_argument("constant oracle value must be in [-1, 1]");
    }
  }
  void init(std::vector<Record>, Rng&) override {}
  double answer(const StatQuery&, Rng&) override { return value_; }
  std::string_view name() const override { return "constant"; }

 private:
  double value_;
};

}  // namespace

std::unique_ptr<SqOracle> empirical_mean_oracle() {
  return std::make_unique<EmpiricalMeanOracle>();
}
std::unique_ptr<SqOracle> gaussian_noise_oracle(double noise_sd) {
  return std::make_unique<GaussianNoiseOracle>(noise_sd);
}
std::unique_ptr<SqOracle> subsample_oracle(std::int64_t subset_size) {
  return std::make_unique<SubsampleOracle>(subset_size);
}
std::unique_ptr<SqOracle> constant_oracle(double value) {
  return std::make_unique<ConstantOracle>(value);
}

std::unique_ptr<SqOracle> make_oracle(const std::string& spec) {
  std::string name = spec;
  std::string arg;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    name = spec.substr(0, colon);
    arg = spec.substr(colon + 1);
  }
  try {
    if (name == "empirical_mean") return empirical_mean_oracle();
    if (name == "gaussian_noise") return gaussian_noise_oracle(std::stod(arg));
    if (name == "subsample") return subsample_oracle(std::stoll(arg));
    if (name == "constant") return constant_oracle(arg.empty() ? 0.0 : std::stod(arg));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("bad oracle parameter in spec: " + spec);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("bad oracle parameter in spec: " + spec);
  }
  throw std::invalid_argument("unknown oracle: " + spec);
}

AccTranscript run_acc_game(SqOracle& oracle, const AccAnalyst& analyst,
                           std::int64_t n, int d, std::int64_t num_queries,
                           Rng rng) {
  (void)d;
  std::vector<Record> sample;
  sample.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    sample.push_back(analyst.sample_record(rng));
  }
  const std::vector<Record> kept = sample;
  Rng oracle_rng = rng.split(0x6f7261636c65ull);
  oracle.init(std::move(sample), oracle_rng);
  AccTranscript t;
  for (std::int64_t j = 0; j < num_queries; ++j) {
    const StatQuery q = analyst.next_query(j);
    const double a = oracle.answer(q, oracle_rng);
    if (!(a >= -1.0 && a <= 1.0)) {
      throw ProtocolError("oracle answered outside [-1, 1]");
    }
    t.answers.push_back(a);
    t.population_values.push_back(analyst.population_value(q));
    t.sample_means.push_back(sample_mean_of(q, kept));
  }
  return t;
}

namespace {

constexpr std::uint64_t kTracerTag = 0x74726163ull;
constexpr std::uint64_t kOracleTag = 0x6f72636cull;

struct RoundLoopState {
  std::vector<bool> excluded;
  std::vector<std::int32_t> recovered;
  std::int64_t theta = 0;
  std::int64_t psi = 0;
};

}  // namespace

AttackReport run_attack(SqOracle& oracle, std::int64_t n, int d,
                        const ifpc::IfpcParams& params,
                        EncryptionScheme& scheme, Rng rng,
                        const AttackOptions& options) {
  const std::int64_t num_users = params.num_users;
  AttackReport report;
  report.params = params;
  report.d = d;
  report.sample_size = n;
  report.seed = rng.seed();
  report.ideal = options.ideal;
  report.oracle_name = std::string(oracle.name());

  Universe universe =
      make_universe(d, static_cast<std::int32_t>(num_users), scheme, rng);

  // n iid draws from the uniform distribution over the records.
  std::vector<Record> sample;
  sample.reserve(static_cast<std::size_t>(n));
  std::vector<bool> in_sample(static_cast<std::size_t>(num_users), false);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(
        rng.uniform_below(static_cast<std::uint64_t>(num_users)));
    sample.push_back(universe.records[idx]);
    in_sample[idx] = true;
  }
  for (std::int64_t i = 0; i < num_users; ++i) {
    if (in_sample[static_cast<std::size_t>(i)]) {
      report.sample_indices.push_back(static_cast<std::int32_t>(i));
    }
  }

  Rng oracle_rng = rng.split(kOracleTag);
  oracle.init(sample, oracle_rng);
  ifpc::TracerState tracer(params, rng.split(kTracerTag));

  RoundLoopState loop;
  loop.excluded.assign(static_cast<std::size_t>(num_users), false);

  for (std::int64_t j = 0; j < params.rounds; ++j) {
    auto [p, column] = tracer.next_column();

    StatQuery query;
    query.scheme = &scheme;
    query.excluded = loop.excluded;
    query.ciphertexts.reserve(static_cast<std::size_t>(num_users));
    std::int64_t column_sum = 0;
    std::int64_t excluded_sum = 0;
    for (std::int64_t i = 0; i < num_users; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const int bit = column[ui];
      column_sum += bit;
      if (loop.excluded[ui]) excluded_sum += bit;
      const int message = options.ideal && !in_sample[ui] ? 0 : bit;
      query.ciphertexts.push_back(
          scheme.enc(universe.records[ui].key, message, rng));
    }
    report.population_values.push_back(
        static_cast<double>(column_sum - excluded_sum) /
        static_cast<double>(num_users));
    report.sample_means.push_back(sample_mean_of(query, sample));

    double a = 0.0;
    try {
      a = oracle.answer(query, oracle_rng);
    } catch (const std::exception& e) {
      throw std::runtime_error("oracle failed at round " + std::to_string(j + 1) +
                               ": " + e.what());
    }
    if (!(a >= -1.0 && a <= 1.0)) {
      throw ProtocolError("oracle answered outside [-1, 1] at round " +
                          std::to_string(j + 1));
    }
    const int rounded = a >= 0.0 ? 1 : -1;  // ties round to +1
    report.raw_answers.push_back(a);
    report.rounded_answers.push_back(static_cast<std::int8_t>(rounded));

    const bool consistent =
        (rounded == 1 && column_sum > -num_users) ||
        (rounded == -1 && column_sum < num_users);
    if (!consistent) ++loop.theta;

    const auto accused_now = tracer.process_answer(p, column, rounded);
    for (std::int32_t i : accused_now) {
      loop.excluded[static_cast<std::size_t>(i)] = true;
      loop.recovered.push_back(i);
      if (!in_sample[static_cast<std::size_t>(i)]) ++loop.psi;
    }
    if (options.record_rounds) {
      report.biases.push_back(p);
      report.columns.push_back(std::move(column));
      report.accusations.push_back(accused_now);
    }
    report.rounds_run = j + 1;
  }

  std::sort(loop.recovered.begin(), loop.recovered.end());
  report.recovered = std::move(loop.recovered);
  report.theta_ell = loop.theta;
  report.psi_ell = loop.psi;
  report.sample_recovered =
      std::includes(report.recovered.begin(), report.recovered.end(),
                    report.sample_indices.begin(), report.sample_indices.end());
  if (!report.sample_indices.empty()) {
    std::int64_t hit = 0;
    for (std::int32_t i : report.sample_indices) {
      hit += std::binary_search(report.recovered.begin(),
                                report.recovered.end(), i);
    }
    report.recovered_fraction =
        static_cast<double>(hit) /
        static_cast<double>(report.sample_indices.size());
  }
  return report;
}

PrivacyReport run_privacy_attack(SqOracle& oracle, std::int64_t n, int d,
                                 const ifpc::IfpcParams& params,
                                 EncryptionScheme& scheme, Rng rng,
                                 const AttackOptions& options) {
  if (params.num_users != 2 * n) {
    throw std::invalid_argument("privacy attack requires N = 2n");
  }
  const std::int64_t num_users = params.num_users;

  PrivacyReport out;
  AttackReport& report = out.attack;
  report.params = params;
  report.d = d;
  report.sample_size = n;
  report.seed = rng.seed();
  report.ideal = options.ideal;
  report.oracle_name = std::string(oracle.name());

  Universe universe =
      make_universe(d, static_cast<std::int32_t>(num_users), scheme, rng);

  // Uniformly random n-subset of the 2n records.
  std::vector<std::int32_t> perm(static_cast<std::size_t>(num_users));
  for (std::int64_t i = 0; i < num_users; ++i) {
    perm[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
  }
  for (std::int64_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::int64_t>(rng.uniform_below(
                           static_cast<std::uint64_t>(num_users - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  std::vector<bool> in_sample(static_cast<std::size_t>(num_users), false);
  std::vector<Record> sample;
  sample.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int32_t idx = perm[static_cast<std::size_t>(i)];
    in_sample[static_cast<std::size_t>(idx)] = true;
    sample.push_back(universe.records[static_cast<std::size_t>(idx)]);
    out.sample.push_back(idx);
  }
  std::sort(out.sample.begin(), out.sample.end());
  report.sample_indices = out.sample;

  Rng oracle_rng = rng.split(kOracleTag);
  oracle.init(sample, oracle_rng);
  ifpc::TracerState tracer(params, rng.split(kTracerTag));

  RoundLoopState loop;
  loop.excluded.assign(static_cast<std::size_t>(num_users), false);
  std::int64_t accused_count = 0;

  for (std::int64_t j = 0; j < params.rounds; ++j) {
    if (accused_count >= n) {
      // The rescale factor n / (n - |T|) is undefined; stop with a flag.
      out.division_guard_tripped = true;
      break;
    }
    auto [p, column] = tracer.next_column();

    StatQuery query;
    query.scheme = &scheme;
    query.excluded = loop.excluded;
    query.ciphertexts.reserve(static_cast<std::size_t>(num_users));
    std::int64_t column_sum = 0;
    std::int64_t excluded_sum = 0;
    for (std::int64_t i = 0; i < num_users; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const int bit = column[ui];
      column_sum += bit;
      if (loop.excluded[ui]) excluded_sum += bit;
      const int message = options.ideal && !in_sample[ui] ? 0 : bit;
      query.ciphertexts.push_back(
          scheme.enc(universe.records[ui].key, message, rng));
    }
    report.population_values.push_back(
        static_cast<double>(column_sum - excluded_sum) /
        static_cast<double>(num_users));
    report.sample_means.push_back(sample_mean_of(query, sample));

    double a = 0.0;
    try {
      a = oracle.answer(query, oracle_rng);
    } catch (const std::exception& e) {
      throw std::runtime_error("oracle failed at round " + std::to_string(j + 1) +
                               ": " + e.what());
    }
    if (!(a >= -1.0 && a <= 1.0)) {
      throw ProtocolError("oracle answered outside [-1, 1] at round " +
                          std::to_string(j + 1));
    }
    const double rescale =
        static_cast<double>(n) / static_cast<double>(n - accused_count);
    const int rounded = rescale * a >= 0.0 ? 1 : -1;
    report.raw_answers.push_back(a);
    report.rounded_answers.push_back(static_cast<std::int8_t>(rounded));

    const bool consistent =
        (rounded == 1 && column_sum > -num_users) ||
        (rounded == -1 && column_sum < num_users);
    if (!consistent) ++loop.theta;

    const auto accused_now = tracer.process_answer(p, column, rounded);
    for (std::int32_t i : accused_now) {
      loop.excluded[static_cast<std::size_t>(i)] = true;
      loop.recovered.push_back(i);
      ++accused_count;
      if (!in_sample[static_cast<std::size_t>(i)]) ++loop.psi;
    }
    if (options.record_rounds) {
      report.biases.push_back(p);
      report.columns.push_back(std::move(column));
      report.accusations.push_back(accused_now);
    }
    report.rounds_run = j + 1;
    if (500 * accused_count > 499 * n) {
      out.halted_early = true;
      break;
    }
  }

  std::sort(loop.recovered.begin(), loop.recovered.end());
  report.recovered = loop.recovered;
  out.recovered = std::move(loop.recovered);
  report.theta_ell = loop.theta;
  report.psi_ell = loop.psi;
  report.sample_recovered =
      std::includes(report.recovered.begin(), report.recovered.end(),
                    report.sample_indices.begin(), report.sample_indices.end());
  if (!report.sample_indices.empty()) {
    std::int64_t hit = 0;
    for (std::int32_t i : report.sample_indices) {
      hit += std::binary_search(report.recovered.begin(),
                                report.recovered.end(), i);
    }
    report.recovered_fraction =
        static_cast<double>(hit) /
        static_cast<double>(report.sample_indices.size());
  }
  const auto metric = blatant_nonprivacy_metric(out.sample, out.recovered, n);
  out.sym_diff = metric.sym_diff;
  out.blatant = metric.blatant;
  return out;
}

namespace {

bool accuracy_over(const std::vector<double>& answers,
                   const std::vector<double>& targets, double alpha_acc,
                   double beta) {
  const auto k = static_cast<std::int64_t>(answers.size());
  if (k == 0) return true;
  std::int64_t bad = 0;
  for (std::size_t j = 0; j < answers.size(); ++j) {
    if (std::abs(answers[j] - targets[j]) > alpha_acc) ++bad;
  }
  // Inclusive boundary: exactly ceil(beta k) inaccurate rounds still passes.
  const auto allowed = static_cast<std::int64_t>(
      std::ceil(beta * static_cast<double>(k) - 1e-12));
  return bad <= std::max<std::int64_t>(allowed, 0);
}

}  // namespace

bool accuracy_check(const AttackReport& report, double alpha_acc, double beta) {
  return accuracy_over(report.raw_answers, report.population_values, alpha_acc,
                       beta);
}

bool sample_accuracy_check(const AttackReport& report, double alpha_acc,
                           double beta) {
  return accuracy_over(report.raw_answers, report.sample_means, alpha_acc,
                       beta);
}

NonPrivacyMetric blatant_nonprivacy_metric(std::span<const std::int32_t> x,
                                           std::span<const std::int32_t> x_prime,
                                           std::int64_t n) {
  std::vector<std::int32_t> a(x.begin(), x.end());
  std::vector<std::int32_t> b(x_prime.begin(), x_prime.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::int32_t> sym;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(sym));
  NonPrivacyMetric m;
  m.sym_diff = static_cast<std::int64_t>(sym.size());
  m.blatant = 100 * m.sym_diff <= n;
  return m;
}

}  // namespace fpt::sq
