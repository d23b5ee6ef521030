#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dist.hpp"
#include "ifpc.hpp"
#include "rng.hpp"

namespace fpt::nifpc {

// Non-interactive codebook: the whole N x ell matrix is drawn up front with
// the same per-round sampling as the interactive tracer, and tracing runs
// against a complete answer vector. The bias vector is the tracing secret
// and never enters the public codeword file.
struct Codebook {
  ifpc::IfpcParams params;
  std::vector<dist::BiasSample> secret;  // p^1..p^ell; empty if not loaded
  std::vector<std::uint64_t> bits;       // row-major, bit set <=> entry +1

  std::int64_t words_per_row() const { return (params.rounds + 63) / 64; }

  int entry(std::int64_t user, std::int64_t round) const {
    const std::uint64_t word =
        bits[static_cast<std::size_t>(user * words_per_row() + round / 64)];
    return (word >> (round % 64)) & 1 ? 1 : -1;
  }
};

// Draws the codebook. Consumes randomness in the same order as the
// interactive tracer does round by round, so a shared seed yields the same
// (bias, column) sequence in both settings.
Codebook gen(const ifpc::IfpcParams& params, Rng rng);

enum class TraceRule {
  kFullSum,        // accuse i iff sum_j a_j phi(p_j, C_ij) > sigma
  kMaxPartialSum,  // accuse i iff any prefix of that sum exceeds sigma
};

// Requires the secret bias vector; throws std::invalid_argument when the
// codebook was loaded public-only or the answer length mismatches.
std::vector<std::int32_t> trace(const Codebook& codebook,
                                std::span<const std::int8_t> answers,
                                TraceRule rule = TraceRule::kFullSum);

// Number of columns in which no user's entry equals the answer.
std::int64_t consistency_violations(const Codebook& codebook,
                                    std::span<const std::int8_t> answers);

// Public codeword file: binary header (magic, version, params) followed by
// the bit-packed matrix. The secret file is a JSON array of {p, kind}.
void write_codeword_file(const std::string& path, const Codebook& codebook);
Codebook read_codeword_file(const std::string& path);
void write_secret_file(const std::string& path,
                       const std::vector<dist::BiasSample>& secret);
std::vector<dist::BiasSample> read_secret_file(const std::string& path);

}  // namespace fpt::nifpc
