#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "osa/game.hpp"

namespace osa::hanabi {

// Color order fixed for serialization: cards render as "R1".."W5".
inline constexpr char kColorLetters[] = {'R', 'G', 'B', 'Y', 'W'};
inline constexpr int kMaxColors = 5;

struct Card {
  int8_t color = -1;  // index into kColorLetters
  int8_t rank = 0;    // 1-based

  bool operator==(const Card&) const = default;
  std::string to_string() const;
};

struct HanabiConfig {
  int colors = 5;
  std::vector<int> rank_counts = {3, 2, 2, 2, 1};  // copies per rank, ranks 1..n
  int hand_size = 5;
  int info_tokens = 8;
  int life_tokens = 3;
  int players = 2;
  // When lives run out: default keeps the rewards already emitted (score =
  // cards played); with zero_on_death a compensating final reward makes the
  // game's return 0.
  bool zero_on_death = false;

  int num_ranks() const { return static_cast<int>(rank_counts.size()); }
  int cards_per_color() const;
  int deck_size() const { return colors * cards_per_color(); }
  int max_score() const { return colors * num_ranks(); }
  // Action ids: [0,H) play slot, [H,2H) discard slot, [2H,2H+C) hint color,
  // [2H+C,2H+C+K) hint rank. Standard 2-player config: 20 actions.
  int num_actions() const { return 2 * hand_size + colors + num_ranks(); }
  void validate() const;

  static HanabiConfig standard();
  // 2 colors, ranks 1-3 with counts (2,2,1), hand 2, 3 info, 2 lives: small
  // enough for exact inference oracles.
  static HanabiConfig mini();
};

enum class MoveType { kPlay, kDiscard, kHintColor, kHintRank };

struct Move {
  MoveType type;
  int arg = 0;  // slot for play/discard, color index or rank for hints
};

Move decode_action(const HanabiConfig& cfg, Action a);
Action encode_action(const HanabiConfig& cfg, Move m);

// Per-card accumulated hint constraints (public knowledge).
struct CardKnowledge {
  uint32_t color_mask = 0;
  uint32_t rank_mask = 0;  // bit r-1 set when rank r possible

  bool color_known() const;
  bool rank_known() const;
  bool allows(const Card& c) const;
  std::string to_string(const HanabiConfig& cfg) const;
};

class HanabiEnv;

class HanabiState : public State {
 public:
  std::unique_ptr<State> clone() const override { return std::make_unique<HanabiState>(*this); }
  AgentId current_player() const override { return turn_; }
  bool is_terminal() const override { return terminal_; }
  FeatureMap public_features() const override;
  FeatureMap private_features(AgentId agent) const override;
  std::string to_string() const override;

  const std::vector<int>& fireworks() const { return fireworks_; }
  const std::vector<Card>& discards() const { return discards_; }
  const std::vector<Card>& hand(AgentId p) const { return hands_[p]; }
  const std::vector<CardKnowledge>& knowledge(AgentId p) const { return knowledge_[p]; }
  int info_tokens() const { return info_; }
  int life_tokens() const { return lives_; }
  int deck_size() const { return static_cast<int>(deck_.size()); }
  int final_round_countdown() const { return countdown_; }
  int score() const;

  // Engine bookkeeping, not part of any observation.
  const std::vector<Card>& deck() const { return deck_; }

 private:
  friend class HanabiEnv;
  const HanabiConfig* cfg_ = nullptr;
  std::vector<int> fireworks_;
  std::vector<Card> deck_;  // back() is the next draw
  std::array<std::vector<Card>, 2> hands_;
  std::array<std::vector<CardKnowledge>, 2> knowledge_;
  std::vector<Card> discards_;
  int info_ = 0;
  int lives_ = 0;
  AgentId turn_ = 0;
  int countdown_ = -1;  // -1 until the last card is drawn
  bool terminal_ = false;
};

class HanabiObservation : public Observation {
 public:
  AgentId viewer() const override { return viewer_; }
  bool terminal() const override { return terminal_; }
  const std::vector<Action>& legal_actions() const override { return legal_; }
  int num_actions() const override { return cfg_->num_actions(); }
  std::string to_string() const override;

  const HanabiConfig& config() const { return *cfg_; }
  AgentId current_player() const { return current_player_; }
  const std::vector<int>& fireworks() const { return fireworks_; }
  const std::vector<Card>& discards() const { return discards_; }
  const std::vector<Card>& partner_hand() const { return partner_hand_; }
  const std::vector<CardKnowledge>& own_knowledge() const { return own_knowledge_; }
  const std::vector<CardKnowledge>& partner_knowledge() const { return partner_knowledge_; }
  int info_tokens() const { return info_; }
  int life_tokens() const { return lives_; }
  int deck_size() const { return deck_size_; }
  int final_round_countdown() const { return countdown_; }

 private:
  friend class HanabiEnv;
  const HanabiConfig* cfg_ = nullptr;
  AgentId viewer_ = 0;
  AgentId current_player_ = 0;
  bool terminal_ = false;
  std::vector<int> fireworks_;
  std::vector<Card> discards_;
  std::vector<Card> partner_hand_;
  std::vector<CardKnowledge> own_knowledge_;
  std::vector<CardKnowledge> partner_knowledge_;
  int info_ = 0;
  int lives_ = 0;
  int deck_size_ = 0;
  int countdown_ = -1;
  std::vector<Action> legal_;
};

class HanabiEnv : public Environment {
 public:
  explicit HanabiEnv(HanabiConfig cfg);

  const GameSpec& spec() const override { return spec_; }
  std::string name() const override { return "hanabi"; }
  const HanabiConfig& config() const { return cfg_; }

  std::unique_ptr<State> new_initial_state(Rng& rng) const override;
  // Deterministic deal for replays and tests; `deck` is in draw order
  // (front drawn first).
  std::unique_ptr<State> initial_state_with_deck(const std::vector<Card>& deck) const;

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

  int card_code(const Card& c) const { return c.color * cfg_.num_ranks() + (c.rank - 1); }
  Card card_from_code(int code) const {
    return Card{static_cast<int8_t>(code / cfg_.num_ranks()),
                static_cast<int8_t>(code % cfg_.num_ranks() + 1)};
  }

  // Multiset (indexed by card code) of cards the viewer cannot see:
  // deck plus the viewer's own hand.
  std::vector<int> unseen_counts(const HanabiState& s, AgentId viewer) const;

  // deck + hands + discards + played must equal the full deck multiset.
  bool card_conservation_holds(const HanabiState& s) const;

 private:
  const HanabiState& as_hanabi(const State& s) const;
  std::vector<Move> legal_moves(const HanabiState& s, AgentId agent) const;
  void apply_hint(HanabiState& s, AgentId target, const Move& m) const;
  void draw_card(HanabiState& s, AgentId p) const;
  void finish_turn(HanabiState& s, bool drew_last) const;

  HanabiConfig cfg_;
  GameSpec spec_;
};

}  // namespace osa::hanabi
