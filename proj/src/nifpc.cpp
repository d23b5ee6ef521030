#include "nifpc.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fpt::nifpc {

Codebook gen(const ifpc::IfpcParams& params, Rng rng) {
  Codebook cb;
  cb.params = params;
  cb.secret.reserve(static_cast<std::size_t>(params.rounds));
  cb.bits.assign(
      static_cast<std::size_t>(params.num_users * ((params.rounds + 63) / 64)),
      0);
  const std::int64_t wpr = cb.words_per_row();
  const dist::BiasMixture mixture(params.alpha, params.zeta);
  for (std::int64_t j = 0; j < params.rounds; ++j) {
    const dist::BiasSample p = mixture.sample(rng);
    cb.secret.push_back(p);
    const std::uint64_t mask = 1ull << (j % 64);
    const std::int64_t word_index = j / 64;
    switch (p.kind) {
      case dist::BiasKind::kSpecial0:
        break;  // all -1: bits stay clear
      case dist::BiasKind::kSpecial1:
        for (std::int64_t i = 0; i < params.num_users; ++i) {
          cb.bits[static_cast<std::size_t>(i * wpr + word_index)] |= mask;
        }
        break;
      case dist::BiasKind::kInterior:
        for (std::int64_t i = 0; i < params.num_users; ++i) {
          if (rng.bernoulli(p.p)) {
            cb.bits[static_cast<std::size_t>(i * wpr + word_index)] |= mask;
          }
        }
        break;
    }
  }
  return cb;
}

std::vector<std::int32_t> trace(const Codebook& codebook,
                                std::span<const std::int8_t> answers,
                                TraceRule rule) {
  const auto& params = codebook.params;
  if (static_cast<std::int64_t>(answers.size()) != params.rounds) {
    throw std::invalid_argument("answer vector length != rounds");
  }
  if (static_cast<std::int64_t>(codebook.secret.size()) != params.rounds) {
    throw std::invalid_argument("tracing requires the secret bias vector");
  }
  std::vector<double> scores(static_cast<std::size_t>(params.num_users), 0.0);
  std::vector<bool> over(static_cast<std::size_t>(params.num_users), false);
  for (std::int64_t j = 0; j < params.rounds; ++j) {
    const dist::BiasSample& p = codebook.secret[static_cast<std::size_t>(j)];
    if (p.kind != dist::BiasKind::kInterior) continue;
    const int a = answers[static_cast<std::size_t>(j)];
    const double inc_plus = a * dist::phi(p.p, 1);
    const double inc_minus = a * dist::phi(p.p, -1);
    for (std::int64_t i = 0; i < params.num_users; ++i) {
      auto& s = scores[static_cast<std::size_t>(i)];
      s += codebook.entry(i, j) == 1 ? inc_plus : inc_minus;
      if (rule == TraceRule::kMaxPartialSum && s > params.sigma) {
        over[static_cast<std::size_t>(i)] = true;
      }
    }
  }
  std::vector<std::int32_t> accused;
  for (std::int64_t i = 0; i < params.num_users; ++i) {
    const bool hit = rule == TraceRule::kFullSum
                         ? scores[static_cast<std::size_t>(i)] > params.sigma
                         : over[static_cast<std::size_t>(i)];
    if (hit) accused.push_back(static_cast<std::int32_t>(i));
  }
  return accused;
}

std::int64_t consistency_violations(const Codebook& codebook,
                                    std::span<const std::int8_t> answers) {
  const auto& params = codebook.params;
  if (static_cast<std::int64_t>(answers.size()) != params.rounds) {
    throw std::invalid_argument("answer vector length != rounds");
  }
  std::int64_t violations = 0;
  for (std::int64_t j = 0; j < params.rounds; ++j) {
    const int a = answers[static_cast<std::size_t>(j)];
    bool match = false;
    for (std::int64_t i = 0; i < params.num_users && !match; ++i) {
      match = codebook.entry(i, j) == a;
    }
    if (!match) ++violations;
  }
  return violations;
}

namespace {

constexpr char kMagic[4] = {'F', 'P', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("truncated codeword file");
  return value;
}

std::string kind_name(dist::BiasKind kind) {
  switch (kind) {
    case dist::BiasKind::kSpecial0:
      return "special0";
    case dist::BiasKind::kSpecial1:
      return "special1";
    case dist::BiasKind::kInterior:
      return "interior";
  }
  throw std::logic_error("unreachable");
}

dist::BiasKind kind_from_name(const std::string& name) {
  if (name == "special0") return dist::BiasKind::kSpecial0;
  if (name == "special1") return dist::BiasKind::kSpecial1;
  if (name == "interior") return dist::BiasKind::kInterior;
  throw std::runtime_error("unknown bias kind: " + name);
}

}  // namespace

void write_codeword_file(const std::string& path, const Codebook& codebook) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kVersion);
  const auto& p = codebook.params;
  write_raw(out, p.num_users);
  write_raw(out, p.collusion);
  write_raw(out, p.beta);
  write_raw(out, p.delta);
  write_raw(out, p.alpha);
  write_raw(out, p.zeta);
  write_raw(out, p.sigma);
  write_raw(out, p.rounds);
  write_raw(out, p.gamma);
  write_raw(out, static_cast<std::uint8_t>(p.mode));
  for (std::uint64_t word : codebook.bits) write_raw(out, word);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Codebook read_codeword_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a codeword file: " + path);
  }
  if (read_raw<std::uint32_t>(in) != kVersion) {
    throw std::runtime_error("unsupported codeword file version");
  }
  Codebook cb;
  cb.params.num_users = read_raw<std::int64_t>(in);
  cb.params.collusion = read_raw<std::int64_t>(in);
  cb.params.beta = read_raw<double>(in);
  cb.params.delta = read_raw<double>(in);
  cb.params.alpha = read_raw<double>(in);
  cb.params.zeta = read_raw<double>(in);
  cb.params.sigma = read_raw<double>(in);
  cb.params.rounds = read_raw<std::int64_t>(in);
  cb.params.gamma = read_raw<double>(in);
  cb.params.mode = static_cast<ifpc::ParamMode>(read_raw<std::uint8_t>(in));
  const std::int64_t words = cb.params.num_users * cb.words_per_row();
  cb.bits.resize(static_cast<std::size_t>(words));
  for (auto& word : cb.bits) word = read_raw<std::uint64_t>(in);
  return cb;
}

void write_secret_file(const std::string& path,
                       const std::vector<dist::BiasSample>& secret) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : secret) {
    arr.push_back({{"p", s.p}, {"kind", kind_name(s.kind)}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << arr.dump() << '\n';
}

std::vector<dist::BiasSample> read_secret_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  nlohmann::json arr = nlohmann::json::parse(in);
  std::vector<dist::BiasSample> secret;
  secret.reserve(arr.size());
  for (const auto& item : arr) {
    secret.push_back({item.at("p").get<double>(),
                      kind_from_name(item.at("kind").get<std::string>())});
  }
  return secret;
}

}  // namespace fpt::nifpc
