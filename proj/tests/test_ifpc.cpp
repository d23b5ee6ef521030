#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fourier.hpp"
#include "ifpc.hpp"
#include "pirates.hpp"
#include "serialize.hpp"
#include "stats.hpp"

using namespace fpt;
using ifpc::derive_params;
using ifpc::GameOptions;
using ifpc::IfpcParams;
using ifpc::ParamMode;
using ifpc::TracerState;

namespace {

constexpr double kPi = 3.14159265358979323846;

IfpcParams small_params(std::int64_t n, std::int64_t users, double beta,
                        double delta, double sigma, std::int64_t rounds) {
  return derive_params(n, users, beta, delta, ParamMode::kScaled, sigma, rounds);
}

}  // namespace

TEST_CASE("derive_params: paper-exact values") {
  SUBCASE("n=1, beta=0, delta=1/2") {
    const auto p = derive_params(1, 10, 0.0, 0.5, ParamMode::kPaperExact);
    CHECK(p.alpha == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(p.zeta == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(p.sigma == doctest::Approx(24320.0).epsilon(1e-15));
    CHECK(p.rounds == 1848320);
    CHECK(p.gamma == doctest::Approx(4.0 / (3.0 * kPi)).epsilon(1e-12));
  }
  SUBCASE("n=10, beta=1/4, delta=1/1000") {
    const auto p = derive_params(10, 100, 0.25, 0.001, ParamMode::kPaperExact);
    CHECK(p.alpha == doctest::Approx(0.00625).epsilon(1e-15));
    CHECK(p.zeta == doctest::Approx(0.4375).epsilon(1e-15));
    CHECK(p.sigma == doctest::Approx(2123264.0).epsilon(1e-15));
    CHECK(p.rounds == std::int64_t{3016} * 2123264);
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(derive_params(1, 10, 0.5, 0.5, ParamMode::kPaperExact),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_params(1, 10, -0.1, 0.5, ParamMode::kPaperExact),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_params(1, 10, 0.0, 0.0, ParamMode::kPaperExact),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_params(1, 10, 0.0, 1.5, ParamMode::kPaperExact),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_params(11, 10, 0.0, 0.5, ParamMode::kPaperExact),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_params(0, 10, 0.0, 0.5, ParamMode::kPaperExact),
                    std::invalid_argument);
    // Overrides belong to scaled mode only.
    CHECK_THROWS_AS(
        derive_params(1, 10, 0.0, 0.5, ParamMode::kPaperExact, 10.0, 100),
        std::invalid_argument);
    CHECK_THROWS_AS(derive_params(1, 10, 0.0, 0.5, ParamMode::kScaled),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        derive_params(1, 10, 0.0, 0.5, ParamMode::kScaled, -1.0, 100),
        std::invalid_argument);
  }
  SUBCASE("scaled mode keeps the derived shape parameters") {
    const auto p = small_params(4, 40, 0.25, 0.1, 55.0, 1000);
    CHECK(p.alpha == doctest::Approx(0.25 / 16.0).epsilon(1e-15));
    CHECK(p.zeta == doctest::Approx(0.4375).epsilon(1e-15));
    CHECK(p.sigma == 55.0);
    CHECK(p.rounds == 1000);
  }
}

TEST_CASE("score updates and accusations") {
  SUBCASE("special rounds leave scores untouched") {
    const auto params = small_params(2, 6, 0.0, 0.1, 10.0, 100);
    TracerState tracer(params, Rng(1));
    const dist::BiasSample p0{0.0, dist::BiasKind::kSpecial0};
    const std::vector<std::int8_t> column(6, -1);
    const auto accused = tracer.replay_round(p0, column, 1);
    CHECK(accused.empty());
    for (double s : tracer.scores()) CHECK(s == 0.0);
  }
  SUBCASE("p=1/2 matching answer adds exactly 1") {
    const auto params = small_params(2, 4, 0.0, 0.1, 10.0, 100);
    TracerState tracer(params, Rng(1));
    const dist::BiasSample p{0.5, dist::BiasKind::kInterior};
    const std::vector<std::int8_t> column = {1, -1, 1, -1};
    tracer.replay_round(p, column, 1);
    CHECK(tracer.scores()[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tracer.scores()[1] == doctest::Approx(-1.0).epsilon(1e-15));
  }
  SUBCASE("crossing a small sigma accuses immediately") {
    const auto params = small_params(2, 3, 0.0, 0.1, 0.5, 100);
    TracerState tracer(params, Rng(1));
    const dist::BiasSample p{0.25, dist::BiasKind::kInterior};
    const std::vector<std::int8_t> column = {1, -1, -1};
    const auto accused = tracer.replay_round(p, column, 1);
    REQUIRE(accused.size() == 1);
    CHECK(accused[0] == 0);
    CHECK(tracer.scores()[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  }
  SUBCASE("accused users keep scoring but are not re-accused") {
    const auto params = small_params(2, 2, 0.0, 0.1, 0.5, 100);
    TracerState tracer(params, Rng(1));
    const dist::BiasSample p{0.25, dist::BiasKind::kInterior};
    const std::vector<std::int8_t> column = {1, -1};
    const auto first = tracer.replay_round(p, column, 1);
    CHECK(first == std::vector<std::int32_t>{0});
    const double after_first = tracer.scores()[0];
    const auto second = tracer.replay_round(p, column, 1);
    CHECK(second.empty());
    CHECK(tracer.scores()[0] > after_first);
  }
}

TEST_CASE("round alternation is enforced") {
  const auto params = small_params(1, 3, 0.0, 0.1, 10.0, 2);
  TracerState tracer(params, Rng(3));
  const dist::BiasSample p{0.5, dist::BiasKind::kInterior};
  const std::vector<std::int8_t> column = {1, 1, 1};

  CHECK_THROWS_AS(tracer.process_answer(p, column, 1), ProtocolError);
  auto [p1, c1] = tracer.next_column();
  CHECK_THROWS_AS(tracer.next_column(), ProtocolError);
  CHECK_THROWS_AS(tracer.replay_round(p, column, 1), ProtocolError);
  tracer.process_answer(p1, c1, 1);
  auto [p2, c2] = tracer.next_column();
  CHECK_THROWS_AS(tracer.process_answer(p2, c2, 2), ProtocolError);
  tracer.process_answer(p2, c2, -1);
  // All rounds consumed.
  CHECK_THROWS_AS(tracer.next_column(), ProtocolError);
  CHECK_THROWS_AS(tracer.replay_round(p, column, 1), ProtocolError);
}

TEST_CASE("next_column produces the declared biases") {
  const auto params = small_params(2, 50, 0.0, 0.1, 1e9, 4000);
  TracerState tracer(params, Rng(17));
  std::int64_t interior_rounds = 0;
  double interior_plus = 0;
  double expected_plus = 0;
  for (int j = 0; j < 4000; ++j) {
    auto [p, column] = tracer.next_column();
    std::int64_t plus = 0;
    for (auto c : column) plus += c == 1;
    if (p.kind == dist::BiasKind::kSpecial1) {
      CHECK(plus == 50);
    } else if (p.kind == dist::BiasKind::kSpecial0) {
      CHECK(plus == 0);
    } else {
      ++interior_rounds;
      interior_plus += plus;
      expected_plus += 50.0 * p.p;
    }
    tracer.process_answer(p, column, 1);
  }
  // Conditional on the drawn biases, the +1 count is Binomial(N, p); compare
  // against the quadrature mean as a loose integration check.
  CHECK(interior_rounds > 600);
  const double mean_plus = interior_plus / interior_rounds;
  CHECK(mean_plus == doctest::Approx(expected_plus / interior_rounds).epsilon(0.05));
  const auto interval = dist::ArcsineInterval(params.alpha, 1.0 - params.alpha);
  const double quadrature_mean =
      50.0 * fourier::integrate_against_arcsine(interval,
                                                [](double p) { return p; });
  CHECK(mean_plus == doctest::Approx(quadrature_mean).epsilon(0.08));
}

TEST_CASE("run_game: empty coalition leaves the pirate guessing") {
  const auto params = small_params(2, 20, 0.0, 0.1, 1e9, 3000);
  auto pirate = pirates::random_consistent();
  const auto t = ifpc::run_game(params, {}, *pirate, Rng(23));
  REQUIRE(t.records.size() == 3000);
  std::int64_t special = 0;
  std::int64_t special_inconsistent = 0;
  for (const auto& rec : t.records) {
    if (rec.p.kind == dist::BiasKind::kInterior) continue;
    ++special;
    const int constant_bit = rec.p.kind == dist::BiasKind::kSpecial1 ? 1 : -1;
    special_inconsistent += rec.answer != constant_bit;
  }
  REQUIRE(special > 1500);
  const double fraction = double(special_inconsistent) / double(special);
  CHECK(std::abs(fraction - 0.5) < 4.0 * std::sqrt(0.25 / special));
}

TEST_CASE("run_game: dictator target is accused before the horizon") {
  const std::int64_t rounds = 1500;
  const double sigma = 3.0 * std::sqrt(rounds * std::log(10.0));
  const auto params = small_params(2, 20, 0.0, 0.1, sigma, rounds);
  auto pirate = pirates::dictator(1);
  const auto t = ifpc::run_game(params, {0, 1}, *pirate, Rng(29));
  CHECK(std::binary_search(t.accused.begin(), t.accused.end(), 1));
  // Find the accusation round and check it happened strictly early.
  std::int64_t accusation_round = -1;
  for (std::size_t j = 0; j < t.records.size(); ++j) {
    const auto& now = t.records[j].accused_now;
    if (std::find(now.begin(), now.end(), 1) != now.end()) {
      accusation_round = static_cast<std::int64_t>(j) + 1;
    }
  }
  REQUIRE(accusation_round > 0);
  CHECK(accusation_round < rounds);
  CHECK(t.rounds_run == rounds);  // no early exit by default
}

TEST_CASE("run_game: restriction honesty and S^j bookkeeping") {
  // Spy asserts its view never grows and never contains an accused user.
  class Spy final : public pirates::PirateStrategy {
   public:
    int respond(const pirates::PirateView& view, Rng&) override {
      std::vector<std::int32_t> users(view.users.begin(), view.users.end());
      if (!previous_.empty() || seen_first_) {
        CHECK(std::includes(previous_.begin(), previous_.end(), users.begin(),
                            users.end()));
      }
      previous_ = users;
      seen_first_ = true;
      int sum = 0;
      for (auto b : view.bits) sum += b;
      return sum >= 0 ? 1 : -1;
    }
    std::string_view name() const override { return "spy"; }

   private:
    std::vector<std::int32_t> previous_;
    bool seen_first_ = false;
  };

  const auto params = small_params(3, 12, 0.0, 0.1, 25.0, 600);
  Spy spy;
  const auto t = ifpc::run_game(params, {2, 5, 9}, spy, Rng(31));
  // Chain rule on the records: shown_to^{j+1} = shown_to^j minus accusations.
  for (std::size_t j = 0; j + 1 < t.records.size(); ++j) {
    std::vector<std::int32_t> expected;
    std::set_difference(t.records[j].shown_to.begin(),
                        t.records[j].shown_to.end(),
                        t.records[j].accused_now.begin(),
                        t.records[j].accused_now.end(),
                        std::back_inserter(expected));
    std::vector<std::int32_t> next = t.records[j + 1].shown_to;
    // Accusations of non-coalition users do not change the view.
    std::vector<std::int32_t> coalition_expected;
    for (auto u : expected) {
      coalition_expected.push_back(u);
    }
    CHECK(next == coalition_expected);
  }
}

TEST_CASE("run_game: cheating view access throws") {
  class Cheat final : public pirates::PirateStrategy {
   public:
    int respond(const pirates::PirateView& view, Rng&) override {
      return view.bit(7);  // not in the coalition below
    }
    std::string_view name() const override { return "cheat"; }
  };
  const auto params = small_params(2, 10, 0.0, 0.1, 10.0, 50);
  Cheat cheat;
  CHECK_THROWS_AS(ifpc::run_game(params, {1, 2}, cheat, Rng(5)),
                  std::out_of_range);
}

TEST_CASE("run_game: pirate answers outside {-1,+1} are rejected") {
  class Bad final : public pirates::PirateStrategy {
   public:
    int respond(const pirates::PirateView&, Rng&) override { return 0; }
    std::string_view name() const override { return "bad"; }
  };
  const auto params = small_params(1, 4, 0.0, 0.1, 10.0, 10);
  Bad bad;
  CHECK_THROWS_AS(ifpc::run_game(params, {0}, bad, Rng(5)), ProtocolError);
}

TEST_CASE("score additivity from the transcript") {
  const auto params = small_params(3, 12, 0.25, 0.1, 18.0, 400);
  auto pirate = pirates::majority();
  const auto t = ifpc::run_game(params, {0, 1, 2}, *pirate, Rng(37));
  std::vector<double> recomputed(12, 0.0);
  for (const auto& rec : t.records) {
    for (int i = 0; i < 12; ++i) {
      recomputed[i] += rec.answer * dist::phi(rec.p, rec.column[i]);
    }
  }
  for (int i = 0; i < 12; ++i) {
    CHECK(std::abs(recomputed[i] - t.final_scores[i]) <= 1e-9);
  }
}

TEST_CASE("theta and psi helpers") {
  SUBCASE("hand-built records") {
    ifpc::Transcript t;
    t.params = small_params(1, 3, 0.0, 0.1, 10.0, 5);
    t.coalition = {1, 2};
    t.rounds_run = 3;
    ifpc::RoundRecord r1;  // all +1 answered -1: counts
    r1.p = {1.0, dist::BiasKind::kSpecial1};
    r1.column = {1, 1, 1};
    r1.answer = -1;
    r1.accused_now = {0};  // innocent accusation
    ifpc::RoundRecord r2;  // mixed column never counts
    r2.p = {0.5, dist::BiasKind::kInterior};
    r2.column = {1, -1, 1};
    r2.answer = -1;
    ifpc::RoundRecord r3;  // consistent with someone
    r3.p = {0.0, dist::BiasKind::kSpecial0};
    r3.column = {-1, -1, -1};
    r3.answer = -1;
    r3.accused_now = {2};  // coalition member: not a false accusation
    t.records = {r1, r2, r3};

    CHECK(ifpc::inconsistency_count(t, 1) == 1);
    CHECK(ifpc::inconsistency_count(t, 2) == 1);
    CHECK(ifpc::inconsistency_count(t, 3) == 1);
    CHECK(ifpc::false_accusations(t, 1) == 1);
    CHECK(ifpc::false_accusations(t, 3) == 1);
    CHECK_THROWS_AS(ifpc::inconsistency_count(t, 0), std::invalid_argument);
    CHECK_THROWS_AS(ifpc::inconsistency_count(t, 4), std::invalid_argument);
    CHECK_THROWS_AS(ifpc::false_accusations(t, 9), std::invalid_argument);
  }
  SUBCASE("consistent single round leaves theta at zero") {
    const auto params = small_params(1, 4, 0.0, 0.1, 100.0, 1);
    auto pirate = pirates::random_consistent();
    const auto t = ifpc::run_game(params, {0}, *pirate, Rng(2));
    if (!t.records[0].shown_to.empty()) {
      CHECK(t.theta_trace[0] == 0);
    }
  }
  SUBCASE("live traces match the helper recomputation") {
    const auto params = small_params(2, 10, 0.0, 0.1, 12.0, 300);
    auto pirate = pirates::constant(1);
    const auto t = ifpc::run_game(params, {0, 1}, *pirate, Rng(3));
    CHECK(ifpc::inconsistency_count(t, 300) == t.theta_ell);
    CHECK(ifpc::false_accusations(t, 300) == t.psi_ell);
    CHECK(t.theta_trace.back() == t.theta_ell);
    CHECK(t.psi_trace.back() == t.psi_ell);
  }
}

TEST_CASE("evaluate_outcome predicates") {
  auto params = small_params(2, 10, 0.1, 0.25, 10.0, 100);
  ifpc::Transcript t;
  t.params = params;
  t.coalition = {0, 1};
  t.rounds_run = 100;

  SUBCASE("theta=0, psi=0") {
    t.theta_ell = 0;
    t.psi_ell = 0;
    const auto out = ifpc::evaluate_outcome(t, params);
    CHECK_FALSE(out.completeness_holds);
    CHECK(out.soundness_holds);
    CHECK_FALSE(out.tracer_wins);
  }
  SUBCASE("theta=ell") {
    t.theta_ell = 100;
    const auto out = ifpc::evaluate_outcome(t, params);
    CHECK(out.completeness_holds);
  }
  SUBCASE("psi exactly at the bound is sound (inclusive)") {
    t.psi_ell = 2;  // delta (N - |S1|) = 0.25 * 8 = 2
    const auto out = ifpc::evaluate_outcome(t, params);
    CHECK(out.soundness_holds);
    t.psi_ell = 3;
    CHECK_FALSE(ifpc::evaluate_outcome(t, params).soundness_holds);
  }
  SUBCASE("theta exactly at beta*ell is not complete (strict)") {
    t.theta_ell = 10;  // beta * ell = 10
    CHECK_FALSE(ifpc::evaluate_outcome(t, params).completeness_holds);
    t.theta_ell = 11;
    CHECK(ifpc::evaluate_outcome(t, params).completeness_holds);
  }
}

TEST_CASE("hidden-score martingale after accusation") {
  const std::int64_t rounds = 300;
  const auto params = small_params(1, 8, 0.0, 0.1, 5.0, rounds);
  std::vector<double> deltas;
  for (int trial = 0; trial < 300; ++trial) {
    auto pirate = pirates::dictator(0);
    const auto t = ifpc::run_game(params, {0}, *pirate, Rng(1000 + trial));
    std::int64_t accusation_round = -1;
    for (std::size_t j = 0; j < t.records.size(); ++j) {
      const auto& now = t.records[j].accused_now;
      if (std::find(now.begin(), now.end(), 0) != now.end()) {
        accusation_round = static_cast<std::int64_t>(j) + 1;
        break;
      }
    }
    if (accusation_round < 0 || accusation_round >= rounds) continue;
    double score_at_accusation = 0.0;
    for (std::int64_t j = 0; j < accusation_round; ++j) {
      const auto& rec = t.records[static_cast<std::size_t>(j)];
      score_at_accusation += rec.answer * dist::phi(rec.p, rec.column[0]);
    }
    deltas.push_back(t.final_scores[0] - score_at_accusation);
  }
  REQUIRE(deltas.size() > 200);
  const auto m = stats::mean_stderr(deltas);
  CHECK(std::abs(m.mean) <= 3.0 * m.stderr_);
}

TEST_CASE("innocent tail probability decays along a sigma ladder") {
  // Constant pirate: answers are independent of sigma, so with common seeds
  // the accusation indicator is pathwise monotone in sigma.
  const std::int64_t rounds = 2000;
  std::vector<double> rates;
  for (double sigma : {25.0, 45.0, 70.0}) {
    const auto params = small_params(4, 40, 0.0, 0.1, sigma, rounds);
    int accused_trials = 0;
    for (int trial = 0; trial < 60; ++trial) {
      auto pirate = pirates::constant(1);
      const GameOptions opts{false, false, false};
      const auto t =
          ifpc::run_game(params, {0, 1, 2, 3}, *pirate, Rng(500 + trial), opts);
      accused_trials += t.psi_ell > 0;
    }
    rates.push_back(accused_trials / 60.0);
  }
  CHECK(rates[0] >= rates[1]);
  CHECK(rates[1] >= rates[2]);
  CHECK(rates[0] > rates[2]);  // the ladder actually separates
}

TEST_CASE("partial-sum tail bound on mixture biases") {
  const auto params = small_params(2, 10, 0.0, 0.1, 10.0, 10);
  const dist::BiasMixture mixture(params.alpha, params.zeta);
  Rng rng(71);
  const int m = 200;
  std::vector<double> ps, as;
  for (int i = 0; i < m; ++i) {
    ps.push_back(mixture.sample(rng).p);
    as.push_back(i % 2 == 0 ? 1.0 : -1.0);
  }
  for (double lambda : {10.0, 20.0, 40.0}) {
    const auto probe = fourier::empirical_tail_phisum(ps, as, lambda, 10000, rng);
    const double se =
        std::sqrt(probe.empirical * (1.0 - probe.empirical) / 10000.0);
    CHECK(probe.empirical <= probe.bound + 3.0 * se);
  }
}

TEST_CASE("early exit is available as an option") {
  const auto params = small_params(1, 6, 0.0, 0.1, 2.0, 2000);
  auto pirate = pirates::dictator(0);
  GameOptions opts;
  opts.early_exit = true;
  const auto t = ifpc::run_game(params, {0}, *pirate, Rng(41), opts);
  CHECK(t.rounds_run < 2000);
  CHECK(std::binary_search(t.accused.begin(), t.accused.end(), 0));
}

TEST_CASE("transcript serialization round trip") {
  const auto params = small_params(2, 9, 0.25, 0.1, 9.0, 120);
  auto pirate = pirates::noisy_mean(0.5);
  const auto t = ifpc::run_game(params, {3, 7}, *pirate, Rng(43));
  const std::string jsonl = serialize::transcript_to_jsonl(t);
  const auto back = serialize::transcript_from_jsonl(jsonl);

  CHECK(back.coalition == t.coalition);
  CHECK(back.seed == t.seed);
  CHECK(back.rounds_run == t.rounds_run);
  CHECK(back.theta_ell == t.theta_ell);
  CHECK(back.psi_ell == t.psi_ell);
  CHECK(back.theta_trace == t.theta_trace);
  CHECK(back.psi_trace == t.psi_trace);
  CHECK(back.accused == t.accused);
  REQUIRE(back.records.size() == t.records.size());
  for (std::size_t j = 0; j < t.records.size(); ++j) {
    CHECK(back.records[j].column == t.records[j].column);
    CHECK(back.records[j].answer == t.records[j].answer);
    CHECK(back.records[j].shown_to == t.records[j].shown_to);
    CHECK(back.records[j].accused_now == t.records[j].accused_now);
    CHECK(back.records[j].p.kind == t.records[j].p.kind);
    CHECK(back.records[j].p.p == t.records[j].p.p);
  }
}
