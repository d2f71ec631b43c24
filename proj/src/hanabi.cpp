#include "osa/hanabi.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

namespace osa::hanabi {

namespace {
constexpr int kMaxRejectionAttempts = 1000;

uint32_t full_mask(int n) { return (1u << n) - 1u; }
}  // namespace

std::string Card::to_string() const {
  std::string s;
  s += kColorLetters[color];
  s += static_cast<char>('0' + rank);
  return s;
}

int HanabiConfig::cards_per_color() const {
  return std::accumulate(rank_counts.begin(), rank_counts.end(), 0);
}

void HanabiConfig::validate() const {
  if (colors < 1 || colors > kMaxColors)
    throw std::invalid_argument("HanabiConfig: colors must be in [1,5]");
  if (rank_counts.empty()) throw std::invalid_argument("HanabiConfig: need at least one rank");
  for (int c : rank_counts)
    if (c < 1) throw std::invalid_argument("HanabiConfig: rank counts must be positive");
  if (players != 2) throw std::invalid_argument("HanabiConfig: engine ships 2 players");
  if (hand_size < 1) throw std::invalid_argument("HanabiConfig: hand_size must be positive");
  if (hand_size * players > deck_size())
    throw std::invalid_argument("HanabiConfig: deck too small for the hands");
  if (info_tokens < 1 || life_tokens < 1)
    throw std::invalid_argument("HanabiConfig: tokens must be positive");
}

HanabiConfig HanabiConfig::standard() { return HanabiConfig{}; }

HanabiConfig HanabiConfig::mini() {
  HanabiConfig cfg;
  cfg.colors = 2;
  cfg.rank_counts = {2, 2, 1};
  cfg.hand_size = 2;
  cfg.info_tokens = 3;
  cfg.life_tokens = 2;
  return cfg;
}

Move decode_action(const HanabiConfig& cfg, Action a) {
  const int h = cfg.hand_size;
  if (a < 0 || a >= cfg.num_actions()) throw IllegalAction("unknown hanabi action id");
  if (a < h) return {MoveType::kPlay, a};
  if (a < 2 * h) return {MoveType::kDiscard, a - h};
  if (a < 2 * h + cfg.colors) return {MoveType::kHintColor, a - 2 * h};
  return {MoveType::kHintRank, a - 2 * h - cfg.colors + 1};
}

Action encode_action(const HanabiConfig& cfg, Move m) {
  const int h = cfg.hand_size;
  switch (m.type) {
    case MoveType::kPlay:
      return m.arg;
    case MoveType::kDiscard:
      return h + m.arg;
    case MoveType::kHintColor:
      return 2 * h + m.arg;
    case MoveType::kHintRank:
      return 2 * h + cfg.colors + m.arg - 1;
  }
  throw IllegalAction("bad move");
}

bool CardKnowledge::color_known() const { return std::popcount(color_mask) == 1; }
bool CardKnowledge::rank_known() const { return std::popcount(rank_mask) == 1; }

bool CardKnowledge::allows(const Card& c) const {
  return (color_mask & (1u << c.color)) != 0 && (rank_mask & (1u << (c.rank - 1))) != 0;
}

std::string CardKnowledge::to_string(const HanabiConfig& cfg) const {
  std::string s;
  for (int c = 0; c < cfg.colors; ++c)
    if (color_mask & (1u << c)) s += kColorLetters[c];
  s += '|';
  for (int r = 1; r <= cfg.num_ranks(); ++r)
    if (rank_mask & (1u << (r - 1))) s += static_cast<char>('0' + r);
  return s;
}

int HanabiState::score() const {
  return std::accumulate(fireworks_.begin(), fireworks_.end(), 0);
}

FeatureMap HanabiState::public_features() const {
  FeatureMap m;
  std::string fw;
  for (int f : fireworks_) fw += std::to_string(f) + ",";
  m["fireworks"] = fw;
  std::string d;
  for (const Card& c : discards_) d += c.to_string() + ",";
  m["discards"] = d;
  for (int p = 0; p < 2; ++p) {
    std::string k;
    for (const CardKnowledge& ck : knowledge_[p]) k += ck.to_string(*cfg_) + ",";
    m["knowledge_" + std::to_string(p)] = k;
  }
  m["info_tokens"] = std::to_string(info_);
  m["life_tokens"] = std::to_string(lives_);
  m["turn"] = std::to_string(turn_);
  m["deck_size"] = std::to_string(deck_.size());
  m["countdown"] = std::to_string(countdown_);
  m["terminal"] = terminal_ ? "1" : "0";
  return m;
}

FeatureMap HanabiState::private_features(AgentId agent) const {
  // Agent i privately observes the other player's hand.
  FeatureMap m;
  const AgentId other = 1 - agent;
  std::string h;
  for (const Card& c : hands_[other]) h += c.to_string() + ",";
  m["hand_" + std::to_string(other)] = h;
  return m;
}

std::string HanabiState::to_string() const {
  std::ostringstream os;
  for (const auto& [k, v] : public_features()) os << k << "=" << v << ";";
  for (int p = 0; p < 2; ++p)
    for (const auto& [k, v] : private_features(p)) os << k << "=" << v << ";";
  os << "deck=";
  for (const Card& c : deck_) os << c.to_string();
  return os.str();
}

std::string HanabiObservation::to_string() const {
  std::ostringstream os;
  os << "viewer=" << viewer_ << ";to_move=" << current_player_ << ";fw=";
  for (int f : fireworks_) os << f << ",";
  os << ";discards=";
  for (const Card& c : discards_) os << c.to_string();
  os << ";partner=";
  for (const Card& c : partner_hand_) os << c.to_string();
  os << ";own_k=";
  for (const CardKnowledge& k : own_knowledge_) os << k.to_string(*cfg_) << ",";
  os << ";partner_k=";
  for (const CardKnowledge& k : partner_knowledge_) os << k.to_string(*cfg_) << ",";
  os << ";info=" << info_ << ";lives=" << lives_ << ";deck=" << deck_size_
     << ";countdown=" << countdown_ << ";terminal=" << terminal_;
  return os.str();
}

HanabiEnv::HanabiEnv(HanabiConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  spec_.num_agents = cfg_.players;
  spec_.num_actions = cfg_.num_actions();
  spec_.observation_space =
      "hanabi: fireworks, discards, tokens, hint knowledge, partner hand";
  spec_.discount = 1.0;
  // Plays/discards are bounded by the deck, hints by initial tokens plus
  // token refunds (one per discard, one per completed color).
  spec_.max_steps = 2 * cfg_.deck_size() + 2 * cfg_.info_tokens + 2 * cfg_.colors +
                    2 * cfg_.players + 8;
  spec_.validate();
}

const HanabiState& HanabiEnv::as_hanabi(const State& s) const {
  return dynamic_cast<const HanabiState&>(s);
}

std::unique_ptr<State> HanabiEnv::new_initial_state(Rng& rng) const {
  std::vector<Card> deck;
  deck.reserve(cfg_.deck_size());
  for (int c = 0; c < cfg_.colors; ++c)
    for (int r = 1; r <= cfg_.num_ranks(); ++r)
      for (int k = 0; k < cfg_.rank_counts[r - 1]; ++k)
        deck.push_back(Card{static_cast<int8_t>(c), static_cast<int8_t>(r)});
  rng.shuffle(deck);
  return initial_state_with_deck(deck);
}

std::unique_ptr<State> HanabiEnv::initial_state_with_deck(const std::vector<Card>& deck) const {
  if (static_cast<int>(deck.size()) != cfg_.deck_size())
    throw std::invalid_argument("initial_state_with_deck: wrong deck size");
  auto s = std::make_unique<HanabiState>();
  s->cfg_ = &cfg_;
  s->fireworks_.assign(cfg_.colors, 0);
  s->deck_.assign(deck.rbegin(), deck.rend());  // back() drawn first
  s->info_ = cfg_.info_tokens;
  s->lives_ = cfg_.life_tokens;
  const CardKnowledge fresh{full_mask(cfg_.colors), full_mask(cfg_.num_ranks())};
  for (int p = 0; p < 2; ++p) {
    for (int i = 0; i < cfg_.hand_size; ++i) {
      s->hands_[p].push_back(s->deck_.back());
      s->deck_.pop_back();
      s->knowledge_[p].push_back(fresh);
    }
  }
  return s;
}

std::vector<Move> HanabiEnv::legal_moves(const HanabiState& s, AgentId agent) const {
  std::vector<Move> moves;
  if (s.terminal_ || agent != s.turn_) return moves;
  const int hand = static_cast<int>(s.hands_[agent].size());
  for (int i = 0; i < hand; ++i) moves.push_back({MoveType::kPlay, i});
  if (s.info_ < cfg_.info_tokens)
    for (int i = 0; i < hand; ++i) moves.push_back({MoveType::kDiscard, i});
  if (s.info_ > 0) {
    const auto& partner = s.hands_[1 - agent];
    for (int c = 0; c < cfg_.colors; ++c)
      if (std::any_of(partner.begin(), partner.end(), [&](const Card& x) { return x.color == c; }))
        moves.push_back({MoveType::kHintColor, c});
    for (int r = 1; r <= cfg_.num_ranks(); ++r)
      if (std::any_of(partner.begin(), partner.end(), [&](const Card& x) { return x.rank == r; }))
        moves.push_back({MoveType::kHintRank, r});
  }
  return moves;
}

std::vector<Action> HanabiEnv::legal_actions(const State& state, AgentId agent) const {
  std::vector<Action> out;
  for (const Move& m : legal_moves(as_hanabi(state), agent)) out.push_back(encode_action(cfg_, m));
  return out;
}

void HanabiEnv::apply_hint(HanabiState& s, AgentId target, const Move& m) const {
  auto& hand = s.hands_[target];
  auto& know = s.knowledge_[target];
  for (size_t i = 0; i < hand.size(); ++i) {
    if (m.type == MoveType::kHintColor) {
      const uint32_t bit = 1u << m.arg;
      if (hand[i].color == m.arg)
        know[i].color_mask = bit;
      else
        know[i].color_mask &= ~bit;
    } else {
      const uint32_t bit = 1u << (m.arg - 1);
      if (hand[i].rank == m.arg)
        know[i].rank_mask = bit;
      else
        know[i].rank_mask &= ~bit;
    }
  }
}

void HanabiEnv::draw_card(HanabiState& s, AgentId p) const {
  if (s.deck_.empty()) return;
  s.hands_[p].push_back(s.deck_.back());
  s.deck_.pop_back();
  s.knowledge_[p].push_back(CardKnowledge{full_mask(cfg_.colors), full_mask(cfg_.num_ranks())});
}

void HanabiEnv::finish_turn(HanabiState& s, bool drew_last) const {
  if (s.lives_ == 0) {
    s.terminal_ = true;
  } else if (s.score() == cfg_.max_score()) {
    s.terminal_ = true;
  } else {
    if (s.countdown_ > 0) {
      --s.countdown_;
      if (s.countdown_ == 0) s.terminal_ = true;
    }
    if (drew_last) s.countdown_ = cfg_.players;
  }
  if (!s.terminal_) {
    s.turn_ = 1 - s.turn_;
    // Defensive: a mover with no legal action ends the game. Unreachable in
    // shipped configurations.
    if (legal_moves(s, s.turn_).empty()) s.terminal_ = true;
  }
}

std::pair<std::unique_ptr<State>, double> HanabiEnv::step(const State& state, Action action,
                                                          Rng&) const {
  const HanabiState& cur = as_hanabi(state);
  if (cur.terminal_) throw IllegalAction("hanabi: action on terminal state");
  const Move m = decode_action(cfg_, action);
  const auto legal = legal_moves(cur, cur.turn_);
  const bool ok = std::any_of(legal.begin(), legal.end(), [&](const Move& x) {
    return x.type == m.type && x.arg == m.arg;
  });
  if (!ok)
    throw IllegalAction("hanabi: illegal action " + action_to_string(action) + " by agent " +
                        std::to_string(cur.turn_));

  auto next = std::make_unique<HanabiState>(cur);
  HanabiState& s = *next;
  const AgentId p = s.turn_;
  double reward = 0.0;
  bool drew_last = false;

  switch (m.type) {
    case MoveType::kPlay: {
      const Card card = s.hands_[p][m.arg];
      s.hands_[p].erase(s.hands_[p].begin() + m.arg);
      s.knowledge_[p].erase(s.knowledge_[p].begin() + m.arg);
      if (s.fireworks_[card.color] == card.rank - 1) {
        s.fireworks_[card.color] = card.rank;
        reward = 1.0;
        if (card.rank == cfg_.num_ranks()) s.info_ = std::min(s.info_ + 1, cfg_.info_tokens);
      } else {
        --s.lives_;
        s.discards_.push_back(card);
        if (s.lives_ == 0 && cfg_.zero_on_death) reward = -static_cast<double>(s.score());
      }
      const bool deck_had = !s.deck_.empty();
      draw_card(s, p);
      drew_last = deck_had && s.deck_.empty();
      break;
    }
    case MoveType::kDiscard: {
      const Card card = s.hands_[p][m.arg];
      s.hands_[p].erase(s.hands_[p].begin() + m.arg);
      s.knowledge_[p].erase(s.knowledge_[p].begin() + m.arg);
      s.discards_.push_back(card);
      ++s.info_;
      const bool deck_had = !s.deck_.empty();
      draw_card(s, p);
      drew_last = deck_had && s.deck_.empty();
      break;
    }
    case MoveType::kHintColor:
    case MoveType::kHintRank:
      --s.info_;
      apply_hint(s, 1 - p, m);
      break;
  }

  finish_turn(s, drew_last);
  return {std::move(next), reward};
}

std::unique_ptr<Observation> HanabiEnv::observe(const State& state, AgentId agent) const {
  const HanabiState& s = as_hanabi(state);
  if (agent < 0 || agent >= cfg_.players) throw std::out_of_range("hanabi: agent out of range");
  auto obs = std::make_unique<HanabiObservation>();
  obs->cfg_ = &cfg_;
  obs->viewer_ = agent;
  obs->current_player_ = s.turn_;
  obs->terminal_ = s.terminal_;
  obs->fireworks_ = s.fireworks_;
  obs->discards_ = s.discards_;
  obs->partner_hand_ = s.hands_[1 - agent];
  obs->own_knowledge_ = s.knowledge_[agent];
  obs->partner_knowledge_ = s.knowledge_[1 - agent];
  obs->info_ = s.info_;
  obs->lives_ = s.lives_;
  obs->deck_size_ = static_cast<int>(s.deck_.size());
  obs->countdown_ = s.countdown_;
  if (agent == s.turn_ && !s.terminal_) obs->legal_ = legal_actions(state, agent);
  return obs;
}

std::vector<int> HanabiEnv::unseen_counts(const HanabiState& s, AgentId viewer) const {
  std::vector<int> counts(cfg_.colors * cfg_.num_ranks(), 0);
  for (int c = 0; c < cfg_.colors; ++c)
    for (int r = 1; r <= cfg_.num_ranks(); ++r)
      counts[c * cfg_.num_ranks() + r - 1] = cfg_.rank_counts[r - 1];
  auto remove = [&](const Card& card) { --counts[card_code(card)]; };
  for (const Card& c : s.hands_[1 - viewer]) remove(c);
  for (const Card& c : s.discards_) remove(c);
  for (int c = 0; c < cfg_.colors; ++c)
    for (int r = 1; r <= s.fireworks_[c]; ++r)
      remove(Card{static_cast<int8_t>(c), static_cast<int8_t>(r)});
  return counts;
}

bool HanabiEnv::card_conservation_holds(const HanabiState& s) const {
  std::vector<int> counts(cfg_.colors * cfg_.num_ranks(), 0);
  auto add = [&](const Card& card) { ++counts[card_code(card)]; };
  for (const Card& c : s.deck_) add(c);
  for (int p = 0; p < 2; ++p)
    for (const Card& c : s.hands_[p]) add(c);
  for (const Card& c : s.discards_) add(c);
  for (int c = 0; c < cfg_.colors; ++c)
    for (int r = 1; r <= s.fireworks_[c]; ++r) add(Card{static_cast<int8_t>(c), static_cast<int8_t>(r)});
  for (int c = 0; c < cfg_.colors; ++c)
    for (int r = 1; r <= cfg_.num_ranks(); ++r)
      if (counts[c * cfg_.num_ranks() + r - 1] != cfg_.rank_counts[r - 1]) return false;
  return true;
}

std::vector<WeightedAssignment> HanabiEnv::enumerate_hidden(const State& state,
                                                            AgentId viewer) const {
  const HanabiState& s = as_hanabi(state);
  std::vector<int> counts = unseen_counts(s, viewer);
  const auto& know = s.knowledge_[viewer];
  const int slots = static_cast<int>(s.hands_[viewer].size());

  std::vector<WeightedAssignment> out;
  HiddenAssignment current(slots);
  const int types = static_cast<int>(counts.size());

  auto recurse = [&](auto&& self, int slot, double w) -> void {
    if (slot == slots) {
      out.push_back({current, w});
      if (static_cast<int>(out.size()) > kEnumerationCap)
        throw EnumerationTooLarge("enumerate_hidden: too large, use sampling");
      return;
    }
    for (int code = 0; code < types; ++code) {
      if (counts[code] == 0) continue;
      if (!know[slot].allows(card_from_code(code))) continue;
      current[slot] = code;
      --counts[code];
      self(self, slot + 1, w * (counts[code] + 1));
      ++counts[code];
    }
  };
  recurse(recurse, 0, 1.0);

  double total = 0.0;
  for (const auto& wa : out) total += wa.prob;
  if (total <= 0.0) {
    if (out.empty()) return out;
    throw std::runtime_error("enumerate_hidden: degenerate weights");
  }
  for (auto& wa : out) wa.prob /= total;
  return out;
}

HiddenAssignment HanabiEnv::sample_hidden_prior(const State& state, AgentId viewer,
                                                Rng& rng) const {
  const HanabiState& s = as_hanabi(state);
  const auto& know = s.knowledge_[viewer];
  const int slots = static_cast<int>(s.hands_[viewer].size());
  const std::vector<int> base = unseen_counts(s, viewer);

  // Rejection from the unconstrained counting draw keeps the distribution
  // exactly the enumeration prior.
  std::vector<double> weights(base.size());
  for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    std::vector<int> counts = base;
    HiddenAssignment hand(slots);
    bool ok = true;
    for (int slot = 0; slot < slots && ok; ++slot) {
      for (size_t i = 0; i < counts.size(); ++i) weights[i] = counts[i];
      const int code = rng.categorical(weights);
      if (counts[code] == 0 || !know[slot].allows(card_from_code(code))) {
        ok = false;
        break;
      }
      hand[slot] = code;
      --counts[code];
    }
    if (ok) return hand;
  }
  // Heavily constrained hands enumerate small; draw exactly from that.
  auto support = enumerate_hidden(state, viewer);
  if (support.empty())
    throw std::runtime_error("sample_hidden_prior: no consistent assignment exists");
  std::vector<double> probs(support.size());
  for (size_t i = 0; i < support.size(); ++i) probs[i] = support[i].prob;
  return support[rng.categorical(probs)].value;
}

std::unique_ptr<State> HanabiEnv::with_hidden(const State& state, AgentId viewer,
                                              const HiddenAssignment& f) const {
  const HanabiState& s = as_hanabi(state);
  if (f.size() != s.hands_[viewer].size())
    throw std::invalid_argument("with_hidden: wrong hand size");
  std::vector<int> counts = unseen_counts(s, viewer);
  const auto& know = s.knowledge_[viewer];
  auto next = std::make_unique<HanabiState>(s);
  for (size_t i = 0; i < f.size(); ++i) {
    const Card card = card_from_code(f[i]);
    if (!know[i].allows(card)) throw std::invalid_argument("with_hidden: violates hint knowledge");
    if (--counts[f[i]] < 0) throw std::invalid_argument("with_hidden: card not available");
    next->hands_[viewer][i] = card;
  }
  return next;
}

double HanabiEnv::hidden_transition_weight(const State& state, Action action, const State& next,
                                           AgentId viewer, const HiddenAssignment& f,
                                           const HiddenAssignment& f_next) const {
  const HanabiState& s = as_hanabi(state);
  const HanabiState& n = as_hanabi(next);
  const Move m = decode_action(cfg_, action);
  const AgentId actor = s.turn_;

  if (m.type == MoveType::kHintColor || m.type == MoveType::kHintRank)
    return f == f_next ? 1.0 : 0.0;

  // Remaining-deck multiset under hypothesis f.
  auto deck_counts = [&]() {
    std::vector<int> counts = unseen_counts(s, viewer);
    for (int code : f) --counts[code];
    return counts;
  };

  if (actor != viewer) {
    // Partner's revealed card was already visible; only its draw (if any)
    // carries evidence about the hypothesized deck.
    if (f != f_next) return 0.0;
    if (n.hands_[actor].size() == s.hands_[actor].size()) {
      const Card drawn = n.hands_[actor].back();
      std::vector<int> counts = deck_counts();
      int total = 0;
      for (int c : counts) total += c;
      if (total <= 0) return 0.0;
      return static_cast<double>(counts[card_code(drawn)]) / total;
    }
    return 1.0;
  }

  // Viewer played or discarded slot m.arg: the leaving card is revealed.
  Card revealed{};
  if (m.type == MoveType::kDiscard || n.fireworks_ == s.fireworks_) {
    revealed = n.discards_.back();
  } else {
    for (int c = 0; c < cfg_.colors; ++c)
      if (n.fireworks_[c] != s.fireworks_[c])
        revealed = Card{static_cast<int8_t>(c), static_cast<int8_t>(n.fireworks_[c])};
  }
  if (f[m.arg] != card_code(revealed)) return 0.0;

  HiddenAssignment survivors = f;
  survivors.erase(survivors.begin() + m.arg);
  if (n.hands_[viewer].size() == f.size()) {
    // Drew a replacement: prefix must match, the new slot is a deck draw.
    if (f_next.size() != f.size()) return 0.0;
    for (size_t i = 0; i + 1 < f_next.size(); ++i)
      if (f_next[i] != survivors[i]) return 0.0;
    std::vector<int> counts = deck_counts();
    int total = 0;
    for (int c : counts) total += c;
    if (total <= 0) return 0.0;
    return static_cast<double>(counts[f_next.back()]) / total;
  }
  return f_next == survivors ? 1.0 : 0.0;
}

std::string HanabiEnv::action_to_string(Action action) const {
  const Move m = decode_action(cfg_, action);
  switch (m.type) {
    case MoveType::kPlay:
      return "play " + std::to_string(m.arg);
    case MoveType::kDiscard:
      return "discard " + std::to_string(m.arg);
    case MoveType::kHintColor:
      return std::string("hint color ") + kColorLetters[m.arg];
    case MoveType::kHintRank:
      return "hint rank " + std::to_string(m.arg);
  }
  return "?";
}

json HanabiEnv::action_to_json(Action action) const {
  const Move m = decode_action(cfg_, action);
  switch (m.type) {
    case MoveType::kPlay:
      return json{{"type", "play"}, {"slot", m.arg}};
    case MoveType::kDiscard:
      return json{{"type", "discard"}, {"slot", m.arg}};
    case MoveType::kHintColor:
      return json{{"type", "hint_color"}, {"color", std::string(1, kColorLetters[m.arg])}};
    case MoveType::kHintRank:
      return json{{"type", "hint_rank"}, {"rank", m.arg}};
  }
  return json{};
}

}  // namespace osa::hanabi
