#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "rng.hpp"

namespace fpt::pirates {

// What the coalition sees in one round: the column restricted to the users
// still in S^j. The view carries no other game state, so a strategy cannot
// read hidden bits by construction.
struct PirateView {
  std::int64_t round = 0;
  std::span<const std::int32_t> users;  // sorted ascending
  std::span<const std::int8_t> bits;    // parallel to users

  bool empty() const { return users.empty(); }
  std::size_t size() const { return users.size(); }

  // Bit of a visible user; throws std::out_of_range for anyone else.
  int bit(std::int32_t user) const;
};

class PirateStrategy {
 public:
  virtual ~PirateStrategy() = default;
  virtual int respond(const PirateView& view, Rng& rng) = 0;
  virtual std::string_view name() const = 0;
};

// Echoes the target's bit while the target is visible; +1 afterwards.
std::unique_ptr<PirateStrategy> dictator(std::int32_t target);

// Sign of the sum of visible bits; ties and empty views answer +1.
std::unique_ptr<PirateStrategy> majority();

// Echoes the bit of a uniformly random visible user, so it is consistent by
// construction while the coalition survives; uniform +-1 once it is empty.
std::unique_ptr<PirateStrategy> random_consistent();

// Always answers the fixed bit.
std::unique_ptr<PirateStrategy> constant(int bit);

// Mean of visible bits plus centered Gaussian noise of the given standard
// deviation, then sign (ties +1, empty view uniform).
std::unique_ptr<PirateStrategy> noisy_mean(double noise_scale);

// Builds a strategy from a "name" or "name:param" spec string, e.g.
// "dictator:3", "majority", "noisy_mean:0.5", "constant:-1".
// Throws std::invalid_argument for unknown names or malformed parameters.
std::unique_ptr<PirateStrategy> make_pirate(const std::string& spec);

}  // namespace fpt::pirates
