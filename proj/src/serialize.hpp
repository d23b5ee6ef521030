#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifpc.hpp"
#include "sq.hpp"

namespace fpt::serialize {

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// +-1 column <-> LSB-first bit packing (+1 encodes as a set bit).
std::vector<std::uint8_t> pack_column(std::span<const std::int8_t> column);
std::vector<std::int8_t> unpack_column(std::span<const std::uint8_t> bytes,
                                       std::int64_t length);

nlohmann::json params_to_json(const ifpc::IfpcParams& params);
ifpc::IfpcParams params_from_json(const nlohmann::json& j);

// Game transcript as JSONL: a header object {params, coalition, seed}, then
// one object per round {j, p, kind, column, shown_to, answer, accused_now}
// with the column bit-packed base64.
std::string transcript_to_jsonl(const ifpc::Transcript& transcript);
ifpc::Transcript transcript_from_jsonl(const std::string& text);

// Attack summary (full per-round data stays optional JSONL, mirroring the
// transcript encoding).
nlohmann::json attack_report_summary(const sq::AttackReport& report);
nlohmann::json privacy_report_summary(const sq::PrivacyReport& report);

}  // namespace fpt::serialize
