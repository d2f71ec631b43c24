#include "osa/toy.hpp"

#include <algorithm>
#include <sstream>

namespace osa::toy {

AgentId ToyState::current_player() const {
  return phase_ == Phase::kSignal ? signaler_ : 1 - signaler_;
}

FeatureMap ToyState::public_features() const {
  FeatureMap m;
  m["round"] = std::to_string(round_);
  m["phase"] = phase_ == Phase::kSignal ? "signal" : "guess";
  m["signaler"] = std::to_string(signaler_);
  m["pending_signal"] = std::to_string(pending_signal_);
  m["last_card"] = std::to_string(last_card_);
  m["last_signal"] = std::to_string(last_signal_);
  m["last_guess"] = std::to_string(last_guess_);
  m["score"] = std::to_string(score_);
  m["terminal"] = terminal_ ? "1" : "0";
  return m;
}

FeatureMap ToyState::private_features(AgentId agent) const {
  FeatureMap m;
  if (hidden_card_ >= 0 && agent == signaler_)
    m["card_round_" + std::to_string(round_)] = std::to_string(hidden_card_);
  return m;
}

std::string ToyState::to_string() const {
  std::ostringstream os;
  for (const auto& [k, v] : public_features()) os << k << "=" << v << ";";
  os << "card=" << hidden_card_;
  return os.str();
}

std::string ToyObservation::to_string() const {
  std::ostringstream os;
  os << "viewer=" << viewer_ << ";round=" << round_
     << ";phase=" << (phase_ == Phase::kSignal ? "signal" : "guess") << ";signaler=" << signaler_
     << ";own_card=" << own_card_ << ";pending=" << pending_signal_ << ";last_card=" << last_card_
     << ";last_signal=" << last_signal_ << ";last_guess=" << last_guess_ << ";score=" << score_
     << ";terminal=" << terminal_;
  return os.str();
}

ToyEnv::ToyEnv(ToyConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  spec_.num_agents = 2;
  spec_.num_actions = cfg_.num_actions();
  spec_.observation_space = "toy: round, phase, pending signal, revealed history, own card";
  spec_.discount = 1.0;
  spec_.max_steps = 2 * cfg_.rounds;
  spec_.validate();
}

const ToyState& ToyEnv::as_toy(const State& s) const { return dynamic_cast<const ToyState&>(s); }

std::unique_ptr<State> ToyEnv::new_initial_state(Rng& rng) const {
  auto s = std::make_unique<ToyState>();
  s->cfg_ = &cfg_;
  s->hidden_card_ = rng.uniform_int(cfg_.card_values);
  return s;
}

std::vector<Action> ToyEnv::legal_actions(const State& state, AgentId agent) const {
  const ToyState& s = as_toy(state);
  std::vector<Action> out;
  if (s.terminal_ || agent != s.current_player()) return out;
  if (s.phase_ == Phase::kSignal)
    for (int g = 0; g < cfg_.signals; ++g) out.push_back(g);
  else
    for (int v = 0; v < cfg_.card_values; ++v) out.push_back(cfg_.signals + v);
  return out;
}

std::pair<std::unique_ptr<State>, double> ToyEnv::step(const State& state, Action action,
                                                       Rng& rng) const {
  const ToyState& cur = as_toy(state);
  if (cur.terminal_) throw IllegalAction("toy: action on terminal state");
  const auto legal = legal_actions(state, cur.current_player());
  if (std::find(legal.begin(), legal.end(), action) == legal.end())
    throw IllegalAction("toy: illegal action " + std::to_string(action) + " by agent " +
                        std::to_string(cur.current_player()));

  auto next = std::make_unique<ToyState>(cur);
  ToyState& s = *next;
  double reward = 0.0;
  if (s.phase_ == Phase::kSignal) {
    s.pending_signal_ = action;
    s.phase_ = Phase::kGuess;
  } else {
    const int guess = action - cfg_.signals;
    if (guess == s.hidden_card_) {
      reward = 1.0;
      ++s.score_;
    }
    s.last_card_ = s.hidden_card_;
    s.last_signal_ = s.pending_signal_;
    s.last_guess_ = guess;
    s.pending_signal_ = -1;
    s.hidden_card_ = -1;
    ++s.round_;
    if (s.round_ == cfg_.rounds) {
      s.terminal_ = true;
    } else {
      s.signaler_ = s.round_ % 2;
      s.phase_ = Phase::kSignal;
      s.hidden_card_ = rng.uniform_int(cfg_.card_values);
    }
  }
  return {std::move(next), reward};
}

std::unique_ptr<Observation> ToyEnv::observe(const State& state, AgentId agent) const {
  const ToyState& s = as_toy(state);
  if (agent < 0 || agent >= 2) throw std::out_of_range("toy: agent out of range");
  auto obs = std::make_unique<ToyObservation>();
  obs->cfg_ = &cfg_;
  obs->viewer_ = agent;
  obs->terminal_ = s.terminal_;
  obs->round_ = s.round_;
  obs->phase_ = s.phase_;
  obs->signaler_ = s.signaler_;
  obs->own_card_ = (s.hidden_card_ >= 0 && agent == s.signaler_) ? s.hidden_card_ : -1;
  obs->pending_signal_ = s.pending_signal_;
  obs->last_card_ = s.last_card_;
  obs->last_signal_ = s.last_signal_;
  obs->last_guess_ = s.last_guess_;
  obs->score_ = s.score_;
  if (!s.terminal_ && agent == s.current_player()) obs->legal_ = legal_actions(state, agent);
  return obs;
}

std::vector<WeightedAssignment> ToyEnv::enumerate_hidden(const State& state,
                                                         AgentId viewer) const {
  const ToyState& s = as_toy(state);
  std::vector<WeightedAssignment> out;
  if (!card_hidden_from(s, viewer)) {
    out.push_back({{}, 1.0});
    return out;
  }
  const double p = 1.0 / cfg_.card_values;
  for (int v = 0; v < cfg_.card_values; ++v) out.push_back({{v}, p});
  return out;
}

HiddenAssignment ToyEnv::sample_hidden_prior(const State& state, AgentId viewer, Rng& rng) const {
  const ToyState& s = as_toy(state);
  if (!card_hidden_from(s, viewer)) return {};
  return {rng.uniform_int(cfg_.card_values)};
}

std::unique_ptr<State> ToyEnv::with_hidden(const State& state, AgentId viewer,
                                           const HiddenAssignment& f) const {
  const ToyState& s = as_toy(state);
  auto next = std::make_unique<ToyState>(s);
  if (!card_hidden_from(s, viewer)) {
    if (!f.empty()) throw std::invalid_argument("with_hidden: no hidden features here");
    return next;
  }
  if (f.size() != 1 || f[0] < 0 || f[0] >= cfg_.card_values)
    throw std::invalid_argument("with_hidden: bad card value");
  next->hidden_card_ = f[0];
  return next;
}

double ToyEnv::hidden_transition_weight(const State& state, Action action, const State& next,
                                        AgentId viewer, const HiddenAssignment& f,
                                        const HiddenAssignment& f_next) const {
  const ToyState& s = as_toy(state);
  const ToyState& n = as_toy(next);
  (void)action;
  if (s.phase_ == Phase::kSignal) {
    // Card carries through the signal unchanged.
    return f == f_next ? 1.0 : 0.0;
  }
  // Guess resolves the round: the card is revealed, a fresh one (if any) is
  // dealt uniformly.
  if (card_hidden_from(s, viewer) && (f.size() != 1 || f[0] != n.last_card_)) return 0.0;
  if (!card_hidden_from(s, viewer) && !f.empty()) return 0.0;
  if (card_hidden_from(n, viewer)) return f_next.size() == 1 ? 1.0 / cfg_.card_values : 0.0;
  return f_next.empty() ? 1.0 : 0.0;
}

std::string ToyEnv::action_to_string(Action action) const {
  if (action < 0 || action >= cfg_.num_actions()) throw IllegalAction("unknown toy action id");
  if (action < cfg_.signals) return "signal " + std::to_string(action);
  return "guess " + std::to_string(action - cfg_.signals);
}

json ToyEnv::action_to_json(Action action) const {
  if (action < cfg_.signals) return json{{"type", "signal"}, {"value", action}};
  return json{{"type", "guess"}, {"value", action - cfg_.signals}};
}

}  // namespace osa::toy
