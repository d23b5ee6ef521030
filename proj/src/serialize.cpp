#include "serialize.hpp"

#include <sstream>
#include <stdexcept>

namespace fpt::serialize {

namespace {

constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int alphabet_index(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  throw std::invalid_argument("invalid base64 character");
}

std::string kind_to_string(dist::BiasKind kind) {
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

dist::BiasKind kind_from_string(const std::string& s) {
  if (s == "special0") return dist::BiasKind::kSpecial0;
  if (s == "special1") return dist::BiasKind::kSpecial1;
  if (s == "interior") return dist::BiasKind::kInterior;
  throw std::invalid_argument("unknown bias kind: " + s);
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const std::uint32_t triple =
        (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kAlphabet[(triple >> 18) & 63]);
    out.push_back(kAlphabet[(triple >> 12) & 63]);
    out.push_back(kAlphabet[(triple >> 6) & 63]);
    out.push_back(kAlphabet[triple & 63]);
    i += 3;
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) {
    throw std::invalid_argument("base64 length must be a multiple of 4");
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4] = {0, 0, 0, 0};
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        ++pad;
      } else {
        if (pad > 0) throw std::invalid_argument("base64 padding mid-stream");
        vals[k] = alphabet_index(c);
      }
    }
    const std::uint32_t triple = (vals[0] << 18) | (vals[1] << 12) |
                                 (vals[2] << 6) | vals[3];
    out.push_back(static_cast<std::uint8_t>((triple >> 16) & 255));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((triple >> 8) & 255));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(triple & 255));
  }
  return out;
}

std::vector<std::uint8_t> pack_column(std::span<const std::int8_t> column) {
  std::vector<std::uint8_t> bytes((column.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column[i] == 1) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return bytes;
}

std::vector<std::int8_t> unpack_column(std::span<const std::uint8_t> bytes,
                                       std::int64_t length) {
  if (static_cast<std::int64_t>(bytes.size()) * 8 < length) {
    throw std::invalid_argument("packed column too short");
  }
  std::vector<std::int8_t> column(static_cast<std::size_t>(length));
  for (std::int64_t i = 0; i < length; ++i) {
    const bool set = bytes[static_cast<std::size_t>(i / 8)] >> (i % 8) & 1;
    column[static_cast<std::size_t>(i)] = set ? 1 : -1;
  }
  return column;
}

nlohmann::json params_to_json(const ifpc::IfpcParams& p) {
  return {
      {"num_users", p.num_users},
      {"collusion", p.collusion},
      {"beta", p.beta},
      {"delta", p.delta},
      {"alpha", p.alpha},
      {"zeta", p.zeta},
      {"sigma", p.sigma},
      {"rounds", p.rounds},
      {"gamma", p.gamma},
      {"mode", p.mode == ifpc::ParamMode::kPaperExact ? "paper" : "scaled"},
  };
}

ifpc::IfpcParams params_from_json(const nlohmann::json& j) {
  ifpc::IfpcParams p;
  p.num_users = j.at("num_users").get<std::int64_t>();
  p.collusion = j.at("collusion").get<std::int64_t>();
  p.beta = j.at("beta").get<double>();
  p.delta = j.at("delta").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.zeta = j.at("zeta").get<double>();
  p.sigma = j.at("sigma").get<double>();
  p.rounds = j.at("rounds").get<std::int64_t>();
  p.gamma = j.at("gamma").get<double>();
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "paper") {
    p.mode = ifpc::ParamMode::kPaperExact;
  } else if (mode == "scaled") {
    p.mode = ifpc::ParamMode::kScaled;
  } else {
    throw std::invalid_argument("unknown mode: " + mode);
  }
  return p;
}

std::string transcript_to_jsonl(const ifpc::Transcript& t) {
  std::ostringstream out;
  nlohmann::json header = {
      {"params", params_to_json(t.params)},
      {"coalition", t.coalition},
      {"seed", t.seed},
      {"rounds_run", t.rounds_run},
  };
  out << header.dump() << '\n';
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    const auto& rec = t.records[k];
    nlohmann::json line = {
        {"j", k + 1},
        {"p", rec.p.p},
        {"kind", kind_to_string(rec.p.kind)},
        {"column", base64_encode(pack_column(rec.column))},
        {"shown_to", rec.shown_to},
        {"answer", rec.answer},
        {"accused_now", rec.accused_now},
    };
    out << line.dump() << '\n';
  }
  return out.str();
}

ifpc::Transcript transcript_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty transcript");
  }
  const nlohmann::json header = nlohmann::json::parse(line);
  ifpc::Transcript t;
  t.params = params_from_json(header.at("params"));
  t.coalition = header.at("coalition").get<std::vector<std::int32_t>>();
  t.seed = header.at("seed").get<std::uint64_t>();
  t.rounds_run = header.at("rounds_run").get<std::int64_t>();

  std::vector<bool> accused_mask(static_cast<std::size_t>(t.params.num_users),
                                 false);
  std::vector<bool> in_coalition(static_cast<std::size_t>(t.params.num_users),
                                 false);
  for (std::int32_t i : t.coalition) {
    in_coalition[static_cast<std::size_t>(i)] = true;
  }
  std::int64_t theta = 0;
  std::int64_t psi = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    ifpc::RoundRecord rec;
    rec.p.p = j.at("p").get<double>();
    rec.p.kind = kind_from_string(j.at("kind").get<std::string>());
    rec.column = unpack_column(base64_decode(j.at("column").get<std::string>()),
                               t.params.num_users);
    rec.shown_to = j.at("shown_to").get<std::vector<std::int32_t>>();
    rec.answer = j.at("answer").get<int>();
    rec.accused_now = j.at("accused_now").get<std::vector<std::int32_t>>();

    bool match = false;
    for (std::int8_t c : rec.column) match = match || c == rec.answer;
    if (!match) ++theta;
    for (std::int32_t i : rec.accused_now) {
      accused_mask[static_cast<std::size_t>(i)] = true;
      if (!in_coalition[static_cast<std::size_t>(i)]) ++psi;
    }
    t.theta_trace.push_back(theta);
    t.psi_trace.push_back(psi);
    t.records.push_back(std::move(rec));
  }
  t.theta_ell = theta;
  t.psi_ell = psi;
  for (std::size_t i = 0; i < accused_mask.size(); ++i) {
    if (accused_mask[i]) t.accused.push_back(static_cast<std::int32_t>(i));
  }
  return t;
}

nlohmann::json attack_report_summary(const sq::AttackReport& r) {
  return {
      {"n", r.sample_size},
      {"N", r.params.num_users},
      {"d", r.d},
      {"mode", r.params.mode == ifpc::ParamMode::kPaperExact ? "paper" : "scaled"},
      {"oracle", r.oracle_name},
      {"ideal", r.ideal},
      {"seed", r.seed},
      {"rounds_run", r.rounds_run},
      {"theta_ell", r.theta_ell},
      {"psi_ell", r.psi_ell},
      {"sample_size_distinct", r.sample_indices.size()},
      {"sample_recovered", r.sample_recovered},
      {"recovered_fraction", r.recovered_fraction},
      {"recovered_count", r.recovered.size()},
  };
}

nlohmann::json privacy_report_summary(const sq::PrivacyReport& r) {
  nlohmann::json j = attack_report_summary(r.attack);
  j["sym_diff"] = r.sym_diff;
  j["blatant"] = r.blatant;
  j["halted_early"] = r.halted_early;
  j["division_guard_tripped"] = r.division_guard_tripped;
  j["L"] = r.attack.rounds_run;
  return j;
}

}  // namespace fpt::serialize
