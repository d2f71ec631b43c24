#pragma once

#include <string>
#include <vector>

#include "osa/game.hpp"

namespace osa::toy {

// Cooperative signal-and-guess card game. Each round the signaler is dealt a
// hidden card (d values), publicly sends one of h signals, the other player
// guesses, and the pair scores 1 on a correct guess; the card is then
// revealed and roles swap (seat 0 signals in round 0). Pairwise cross-play of
// permutation conventions is o_ij/d per round in every round.
struct ToyConfig {
  int card_values = 4;  // d
  int signals = 4;      // h
  int rounds = 8;       // T

  // Action ids: [0,h) signals, [h,h+d) guesses.
  int num_actions() const { return signals + card_values; }
  void validate() const {
    if (card_values < 1 || signals < 1 || rounds < 1)
      throw std::invalid_argument("ToyConfig: d, h, T must all be >= 1");
  }
};

enum class Phase { kSignal, kGuess };

class ToyEnv;

class ToyState : public State {
 public:
  std::unique_ptr<State> clone() const override { return std::make_unique<ToyState>(*this); }
  AgentId current_player() const override;
  bool is_terminal() const override { return terminal_; }
  FeatureMap public_features() const override;
  FeatureMap private_features(AgentId agent) const override;
  std::string to_string() const override;

  int round() const { return round_; }
  Phase phase() const { return phase_; }
  AgentId signaler() const { return signaler_; }
  int hidden_card() const { return hidden_card_; }  // engine/test access
  int pending_signal() const { return pending_signal_; }
  int last_card() const { return last_card_; }
  int score() const { return score_; }

 private:
  friend class ToyEnv;
  const ToyConfig* cfg_ = nullptr;
  int round_ = 0;
  Phase phase_ = Phase::kSignal;
  AgentId signaler_ = 0;
  int hidden_card_ = -1;
  int pending_signal_ = -1;
  int last_card_ = -1;
  int last_signal_ = -1;
  int last_guess_ = -1;
  int score_ = 0;
  bool terminal_ = false;
};

class ToyObservation : public Observation {
 public:
  AgentId viewer() const override { return viewer_; }
  bool terminal() const override { return terminal_; }
  const std::vector<Action>& legal_actions() const override { return legal_; }
  int num_actions() const override { return cfg_->num_actions(); }
  std::string to_string() const override;

  const ToyConfig& config() const { return *cfg_; }
  int round() const { return round_; }
  Phase phase() const { return phase_; }
  AgentId signaler() const { return signaler_; }
  // The viewer's own card when it is the holder, else -1.
  int own_card() const { return own_card_; }
  int pending_signal() const { return pending_signal_; }
  int last_card() const { return last_card_; }

 private:
  friend class ToyEnv;
  const ToyConfig* cfg_ = nullptr;
  AgentId viewer_ = 0;
  bool terminal_ = false;
  int round_ = 0;
  Phase phase_ = Phase::kSignal;
  AgentId signaler_ = 0;
  int own_card_ = -1;
  int pending_signal_ = -1;
  int last_card_ = -1;
  int last_signal_ = -1;
  int last_guess_ = -1;
  int score_ = 0;
  std::vector<Action> legal_;
};

class ToyEnv : public Environment {
 public:
  explicit ToyEnv(ToyConfig cfg);

  const GameSpec& spec() const override { return spec_; }
  std::string name() const override { return "toy"; }
  const ToyConfig& config() const { return cfg_; }

  std::unique_ptr<State> new_initial_state(Rng& rng) const override;
  std::vector<Action> legal_actions(const State& state, AgentId agent) const override;
  std::pair<std::unique_ptr<State>, double> step(const State& state, Action action,
                                                 Rng& rng) const override;
  std::unique_ptr<Observation> observe(const State& state, AgentId agent) const override;
  std::vector<WeightedAssignment> enumerate_hidden(const State& state,
                                                   AgentId viewer) const override;
  HiddenAssignment sample_hidden_prior(const State& state, AgentId viewer,
                                       Rng& rng) const override;
  std::unique_ptr<State> with_hidden(const State& state, AgentId viewer,
                                     const HiddenAssignment& f) const override;
  double hidden_transition_weight(const State& state, Action action, const State& next,
                                  AgentId viewer, const HiddenAssignment& f,
                                  const HiddenAssignment& f_next) const override;
  std::string action_to_string(Action action) const override;
  json action_to_json(Action action) const override;

 private:
  const ToyState& as_toy(const State& s) const;
  bool card_hidden_from(const ToyState& s, AgentId viewer) const {
    return s.hidden_card_ >= 0 && viewer != s.signaler_;
  }

  ToyConfig cfg_;
  GameSpec spec_;
};

}  // namespace osa::toy
