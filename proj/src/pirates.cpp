#include "pirates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpt::pirates {

int PirateView::bit(std::int32_t user) const {
  const auto it = std::lower_bound(users.begin(), users.end(), user);
  if (it == users.end() || *it != user) {
    throw std::out_of_range("user not visible in this round");
  }
  return bits[static_cast<std::size_t>(it - users.begin())];
}

namespace {

class Dictator final : public PirateStrategy {
 public:
  explicit Dictator(std::int32_t target) : target_(target) {}
  int respond(const PirateView& view, Rng&) override {
    const auto it = std::lower_bound(view.users.begin(), view.users.end(), target_);
    if (it != view.users.end() && *it == target_) {
      return view.bits[static_cast<std::size_t>(it - view.users.begin())];
    }
    return 1;  // fixed fallback once the target is gone
  }
  std::string_view name() const override { return "dictator"; }

 private:
  std::int32_t target_;
};

class Majority final : public PirateStrategy {
 public:
  int respond(const PirateView& view, Rng&) override {
    int sum = 0;
    for (std::int8_t b : view.bits) sum += b;
    return sum >= 0 ? 1 : -1;
  }
  std::string_view name() const override { return "majority"; }
};

class RandomConsistent final : public PirateStrategy {
 public:
  int respond(const PirateView& view, Rng& rng) override {
    if (view.empty()) return rng.sign();
    return view.bits[rng.uniform_below(view.size())];
  }
  std::string_view name() const override { return "random_consistent"; }
};

class Constant final : public PirateStrategy {
 public:
  explicit Constant(int bit) : bit_(bit) {
    if (bit != 1 && bit != -1) {
      throw std::invalid_argument("constant pirate bit must be +-1");
    }
  }
  int respond(const PirateView&, Rng&) override { return bit_; }
  std::string_view name() const override { return "constant"; }

 private:
  int bit_;
};

class NoisyMean final : public PirateStrategy {
 public:
  explicit NoisyMean(double noise_scale) : noise_scale_(noise_scale) {
    if (!(noise_scale >= 0.0)) {
      throw std::invalid_argument("noise scale must be >= 0");
    }
  }
  int respond(const PirateView& view, Rng& rng) override {
    if (view.empty()) return rng.sign();
    double sum = 0.0;
    for (std::int8_t b : view.bits) sum += b;
    double value = sum / static_cast<double>(view.size());
    if (noise_scale_ > 0.0) value += noise_scale_ * rng.gaussian();
    return value >= 0.0 ? 1 : -1;
  }
  std::string_view name() const override { return "noisy_mean"; }

 private:
  double noise_scale_;
};

}  // namespace

std::unique_ptr<PirateStrategy> dictator(std::int32_t target) {
  return std::make_unique<Dictator>(target);
}
std::unique_ptr<PirateStrategy> majority() {
  return std::make_unique<Majority>();
}
std::unique_ptr<PirateStrategy> random_consistent() {
  return std::make_unique<RandomConsistent>();
}
std::unique_ptr<PirateStrategy> constant(int bit) {
  return std::make_unique<Constant>(bit);
}
std::unique_ptr<PirateStrategy> noisy_mean(double noise_scale) {
  return std::make_unique<NoisyMean>(noise_scale);
}

std::unique_ptr<PirateStrategy> make_pirate(const std::string& spec) {
  std::string name = spec;
  std::string arg;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    name = spec.substr(0, colon);
    arg = spec.substr(colon + 1);
  }
  try {
    if (name == "dictator") return dictator(std::stoi(arg));
    if (name == "majority") return majority();
    if (name == "random_consistent") return random_consistent();
    if (name == "constant") return constant(arg.empty() ? 1 : std::stoi(arg));
    if (name == "noisy_mean") return noisy_mean(std::stod(arg));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("bad pirate parameter in spec: " + spec);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("bad pirate parameter in spec: " + spec);
  }
  throw std::invalid_argument("unknown pirate strategy: " + spec);
}

}  // namespace fpt::pirates
