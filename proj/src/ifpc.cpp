#include "ifpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pirates.hpp"

namespace fpt::ifpc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

IfpcParams derive_params(std::int64_t collusion, std::int64_t num_users,
                         double beta, double delta, ParamMode mode,
                         double sigma_override, std::int64_t ell_override) {
  if (collusion < 1 || collusion > num_users) {
    throw std::invalid_argument("derive_params requires 1 <= n <= N");
  }
  if (!(beta >= 0.0 && beta < 0.5)) {
    throw std::invalid_argument("derive_params requires 0 <= beta < 1/2");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("derive_params requires 0 < delta <= 1");
  }

  IfpcParams p;
  p.num_users = num_users;
  p.collusion = collusion;
  p.beta = beta;
  p.delta = delta;
  p.mode = mode;

  const double halfgap = 0.5 - beta;
  p.alpha = halfgap / (4.0 * static_cast<double>(collusion));
  p.zeta = 3.0 / 8.0 + beta / 4.0;
  p.gamma = (2.0 / kPi) * (1.0 - 2.0 * p.zeta) / p.zeta;

  if (mode == ParamMode::kPaperExact) {
    if (sigma_override != 0.0 || ell_override != 0) {
      throw std::invalid_argument("overrides are only valid in scaled mode");
    }
    const double inner =
        std::ceil(6.0 * kPi * static_cast<double>(collusion) / (halfgap * halfgap));
    const double logceil = std::ceil(std::log(32.0 / delta));
    p.sigma = 64.0 * inner * logceil;
    const double ell = inner * p.sigma;
    if (ell > 9.0e18) {
      throw std::invalid_argument("paper-exact round count overflows int64");
    }
    p.rounds = static_cast<std::int64_t>(ell);
  } else {
    if (!(sigma_override > 0.0) || ell_override < 1) {
      throw std::invalid_argument(
          "scaled mode requires sigma > 0 and rounds >= 1");
    }
    p.sigma = sigma_override;
    p.rounds = ell_override;
  }
  return p;
}

TracerState::TracerState(const IfpcParams& params, Rng rng)
    : params_(params),
      mixture_(params.alpha, params.zeta),
      rng_(rng),
      scores_(static_cast<std::size_t>(params.num_users), 0.0),
      accused_(static_cast<std::size_t>(params.num_users), false) {}

std::pair<dist::BiasSample, std::vector<std::int8_t>> TracerState::next_column() {
  if (awaiting_answer_) {
    throw ProtocolError("next_column called before process_answer");
  }
  if (round_ >= params_.rounds) {
    throw ProtocolError("next_column called after the final round");
  }
  const dist::BiasSample p = mixture_.sample(rng_);
  std::vector<std::int8_t> column(static_cast<std::size_t>(params_.num_users));
  switch (p.kind) {
    case dist::BiasKind::kSpecial0:
      std::fill(column.begin(), column.end(), std::int8_t{-1});
      break;
    case dist::BiasKind::kSpecial1:
      std::fill(column.begin(), column.end(), std::int8_t{1});
      break;
    case dist::BiasKind::kInterior:
      for (auto& c : column) c = rng_.bernoulli(p.p) ? 1 : -1;
      break;
  }
  awaiting_answer_ = true;
  return {p, std::move(column)};
}

std::vector<std::int32_t> TracerState::apply_update(
    const dist::BiasSample& p, const std::vector<std::int8_t>& column,
    int answer) {
  if (answer != 1 && answer != -1) {
    throw ProtocolError("answer must be +1 or -1");
  }
  if (column.size() != scores_.size()) {
    throw std::invalid_argument("column length does not match user count");
  }
  std::vector<std::int32_t> accused_now;
  if (p.kind == dist::BiasKind::kInterior) {
    const double inc_plus = answer * dist::phi(p.p, 1);
    const double inc_minus = answer * dist::phi(p.p, -1);
    for (std::size_t i = 0; i < scores_.size(); ++i) {
      scores_[i] += column[i] == 1 ? inc_plus : inc_minus;
      if (!accused_[i] && scores_[i] > params_.sigma) {
        accused_[i] = true;
        accused_now.push_back(static_cast<std::int32_t>(i));
      }
    }
  }
  // Special rounds have phi identically 0: scores are unchanged and, since
  // accusation requires a strict crossing, nobody new can be accused.
  ++round_;
  return accused_now;
}

std::vector<std::int32_t> TracerState::process_answer(
    const dist::BiasSample& p, const std::vector<std::int8_t>& column,
    int answer) {
  if (!awaiting_answer_) {
    throw ProtocolError("process_answer without a pending next_column");
  }
  auto accused = apply_update(p, column, answer);  // validates before mutating
  awaiting_answer_ = false;
  return accused;
}

std::vector<std::int32_t> TracerState::replay_round(
    const dist::BiasSample& p, const std::vector<std::int8_t>& column,
    int answer) {
  if (awaiting_answer_) {
    throw ProtocolError("replay_round during a pending next_column");
  }
  if (round_ >= params_.rounds) {
    throw ProtocolError("replay_round after the final round");
  }
  return apply_update(p, column, answer);
}

Transcript run_game(const IfpcParams& params,
                    const std::vector<std::int32_t>& coalition,
                    pirates::PirateStrategy& pirate, Rng rng,
                    const GameOptions& options) {
  const auto n_users = static_cast<std::size_t>(params.num_users);
  std::vector<bool> in_coalition(n_users, false);
  for (std::int32_t i : coalition) {
    if (i < 0 || i >= params.num_users) {
      throw std::invalid_argument("coalition member outside [0, N)");
    }
    in_coalition[static_cast<std::size_t>(i)] = true;
  }

  Transcript t;
  t.params = params;
  t.coalition = coalition;
  std::sort(t.coalition.begin(), t.coalition.end());
  t.coalition.erase(std::unique(t.coalition.begin(), t.coalition.end()),
                    t.coalition.end());
  t.seed = rng.seed();

  TracerState tracer(params, rng);
  std::vector<std::int32_t> visible = t.coalition;  // S^j, kept sorted
  std::vector<std::int8_t> visible_bits;
  std::int64_t theta = 0;
  std::int64_t psi = 0;

  for (std::int64_t j = 0; j < params.rounds; ++j) {
    auto [p, column] = tracer.next_column();

    visible_bits.clear();
    visible_bits.reserve(visible.size());
    for (std::int32_t i : visible) {
      visible_bits.push_back(column[static_cast<std::size_t>(i)]);
    }
    pirates::PirateView view{j + 1, visible, visible_bits};
    const int answer = pirate.respond(view, tracer.rng());
    if (answer != 1 && answer != -1) {
      throw ProtocolError("pirate answered outside {-1, +1}");
    }

    std::int64_t plus_count = 0;
    for (std::int8_t c : column) plus_count += c == 1;
    const bool consistent = (answer == 1 && plus_count > 0) ||
                            (answer == -1 && plus_count < params.num_users);
    if (!consistent) ++theta;

    auto accused_now = tracer.process_answer(p, column, answer);
    for (std::int32_t i : accused_now) {
      if (!in_coalition[static_cast<std::size_t>(i)]) ++psi;
    }

    if (options.record_rounds) {
      RoundRecord rec;
      rec.p = p;
      rec.column = column;
      rec.shown_to = visible;
      rec.answer = answer;
      rec.accused_now = accused_now;
      t.records.push_back(std::move(rec));
    }
    if (options.record_traces) {
      t.theta_trace.push_back(theta);
      t.psi_trace.push_back(psi);
    }

    // S^{j+1} = S^j \ I^j.
    if (!accused_now.empty()) {
      std::vector<std::int32_t> next_visible;
      next_visible.reserve(visible.size());
      std::set_difference(visible.begin(), visible.end(), accused_now.begin(),
                          accused_now.end(), std::back_inserter(next_visible));
      visible = std::move(next_visible);
    }

    t.rounds_run = j + 1;
    if (options.early_exit && visible.empty()) break;
  }

  t.theta_ell = theta;
  t.psi_ell = psi;
  for (std::int64_t i = 0; i < params.num_users; ++i) {
    if (tracer.accused_mask()[static_cast<std::size_t>(i)]) {
      t.accused.push_back(static_cast<std::int32_t>(i));
    }
  }
  t.final_scores = tracer.scores();
  return t;
}

std::int64_t inconsistency_count(const Transcript& t, std::int64_t j) {
  if (j < 1 || j > t.rounds_run) {
    throw std::invalid_argument("round index out of range");
  }
  if (t.records.empty()) {
    throw std::invalid_argument("transcript has no recorded rounds");
  }
  std::int64_t count = 0;
  for (std::int64_t k = 0; k < j; ++k) {
    const auto& rec = t.records[static_cast<std::size_t>(k)];
    bool match = false;
    for (std::int8_t c : rec.column) {
      if (c == rec.answer) {
        match = true;
        break;
      }
    }
    if (!match) ++count;
  }
  return count;
}

std::int64_t false_accusations(const Transcript& t, std::int64_t j) {
  if (j < 1 || j > t.rounds_run) {
    throw std::invalid_argument("round index out of range");
  }
  if (t.records.empty()) {
    throw std::invalid_argument("transcript has no recorded rounds");
  }
  std::vector<bool> in_coalition;
  std::int64_t n_users = t.params.num_users;
  in_coalition.assign(static_cast<std::size_t>(n_users), false);
  for (std::int32_t i : t.coalition) {
    in_coalition[static_cast<std::size_t>(i)] = true;
  }
  std::int64_t count = 0;
  for (std::int64_t k = 0; k < j; ++k) {
    for (std::int32_t i : t.records[static_cast<std::size_t>(k)].accused_now) {
      if (!in_coalition[static_cast<std::size_t>(i)]) ++count;
    }
  }
  return count;
}

GameOutcome evaluate_outcome(const Transcript& t, const IfpcParams& params) {
  GameOutcome out;
  out.completeness_holds =
      static_cast<double>(t.theta_ell) >
      params.beta * static_cast<double>(params.rounds);
  const double innocents =
      static_cast<double>(params.num_users) -
      static_cast<double>(t.coalition.size());
  out.soundness_holds =
      static_cast<double>(t.psi_ell) <= params.delta * innocents;
  out.tracer_wins = out.completeness_holds && out.soundness_holds;
  out.coalition_fully_accused =
      std::includes(t.accused.begin(), t.accused.end(), t.coalition.begin(),
                    t.coalition.end());
  return out;
}

}  // namespace fpt::ifpc
