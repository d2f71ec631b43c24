#include "osa/hanabi_bots.hpp"

#include <algorithm>

namespace osa::hanabi {
namespace {

std::vector<Card> knowledge_combos(const HanabiConfig& cfg, const CardKnowledge& k) {
  std::vector<Card> combos;
  for (int c = 0; c < cfg.colors; ++c)
    for (int r = 1; r <= cfg.num_ranks(); ++r) {
      const Card card{static_cast<int8_t>(c), static_cast<int8_t>(r)};
      if (k.allows(card)) combos.push_back(card);
    }
  return combos;
}

bool playable_on(const std::vector<int>& fireworks, const Card& c) {
  return fireworks[c.color] == c.rank - 1;
}

bool provably_playable(const HanabiObservation& obs, int slot) {
  const auto combos = knowledge_combos(obs.config(), obs.own_knowledge()[slot]);
  return !combos.empty() && std::all_of(combos.begin(), combos.end(), [&](const Card& c) {
    return playable_on(obs.fireworks(), c);
  });
}

bool dead_by(const HanabiConfig& cfg, const std::vector<int>& fireworks, const CardKnowledge& k) {
  const auto combos = knowledge_combos(cfg, k);
  return !combos.empty() && std::all_of(combos.begin(), combos.end(), [&](const Card& c) {
    return fireworks[c.color] >= c.rank;
  });
}

int known_color(const CardKnowledge& k, const HanabiConfig& cfg) {
  if (!k.color_known()) return -1;
  for (int c = 0; c < cfg.colors; ++c)
    if (k.color_mask == (1u << c)) return c;
  return -1;
}

int known_rank(const CardKnowledge& k, const HanabiConfig& cfg) {
  if (!k.rank_known()) return -1;
  for (int r = 1; r <= cfg.num_ranks(); ++r)
    if (k.rank_mask == (1u << (r - 1))) return r;
  return -1;
}

// Pair-A play mark: a color-known, rank-unknown card whose known color still
// needs a rank the knowledge allows.
bool color_mark_eligible(const HanabiConfig& cfg, const std::vector<int>& fireworks,
                         const CardKnowledge& k) {
  const int c = known_color(k, cfg);
  if (c < 0 || k.rank_known()) return false;
  if (dead_by(cfg, fireworks, k)) return false;
  const int needed = fireworks[c] + 1;
  return needed <= cfg.num_ranks() && (k.rank_mask & (1u << (needed - 1))) != 0;
}

// Pair-B play mark: a rank-known, color-unknown card playable on some
// still-allowed color.
bool rank_mark_eligible(const HanabiConfig& cfg, const std::vector<int>& fireworks,
                        const CardKnowledge& k) {
  const int r = known_rank(k, cfg);
  if (r < 0 || k.color_known()) return false;
  if (dead_by(cfg, fireworks, k)) return false;
  for (int c = 0; c < cfg.colors; ++c)
    if ((k.color_mask & (1u << c)) != 0 && fireworks[c] == r - 1) return true;
  return false;
}

int discarded_copies(const HanabiObservation& obs, const Card& c) {
  int n = 0;
  for (const Card& d : obs.discards())
    if (d == c) ++n;
  return n;
}

// Still needed and down to its last unseen-or-held copy.
bool is_valuable(const HanabiObservation& obs, const Card& c) {
  if (obs.fireworks()[c.color] >= c.rank) return false;
  return obs.config().rank_counts[c.rank - 1] - discarded_copies(obs, c) == 1;
}

bool untouched(const CardKnowledge& k, const HanabiConfig& cfg) {
  return k.color_mask == (1u << cfg.colors) - 1u && k.rank_mask == (1u << cfg.num_ranks()) - 1u;
}

Action first_legal(const HanabiObservation& obs) {
  if (obs.legal_actions().empty())
    throw std::invalid_argument("hanabi bot: observation has no legal actions");
  return obs.legal_actions().front();
}

const HanabiObservation& as_hanabi_obs(const Observation& obs) {
  const auto* hob = dynamic_cast<const HanabiObservation*>(&obs);
  if (hob == nullptr)
    throw std::invalid_argument("hanabi bot: observation is not from the hanabi environment");
  return *hob;
}

// Knowledge-only value: every consistent card is a still-needed last copy.
bool provably_valuable(const HanabiConfig& cfg, const std::vector<int>& fireworks,
                       const CardKnowledge& k) {
  const auto combos = knowledge_combos(cfg, k);
  return !combos.empty() && std::all_of(combos.begin(), combos.end(), [&](const Card& c) {
    return cfg.rank_counts[c.rank - 1] == 1 && fireworks[c.color] < c.rank;
  });
}

// Two hint conventions, one per bot pair:
//   pair A (valuebot, holmesbot): color hints mark playable cards, rank
//     hints mark valuable cards worth protecting.
//   pair B (iggi, piers): rank hints mark playable cards, color hints mark
//     valuable cards.
// A bot trusts its own pair's play marks and protects its own pair's value
// marks, so cross-pair hints are misread in both directions.
struct BotStyle {
  bool color_marks_playable;    // pair A when true, pair B when false
  bool hint_valuable;           // give protection marks
  bool safe_hints_only;         // only give a play mark that cannot misfire
  bool risk_ambiguous_trust;    // at >= 2 lives, play a non-unique play mark
  bool hint_highest_rank;       // pick the highest-rank playable hint target
  bool discard_dead_first;
  bool discard_newest;          // among unprotected cards: newest instead of oldest
  bool protect_known_valuable;  // never discard a provably valuable card if avoidable
  bool fallback_highest_rank;   // aim the idle protection hint at the highest rank
};

class HanabiRuleBot : public RulePolicy {
 public:
  HanabiRuleBot(std::string id, BotStyle style) : RulePolicy(std::move(id)), style_(style) {}

  Action decide(const Observation& observation) const override {
    const HanabiObservation& obs = as_hanabi_obs(observation);
    const HanabiConfig& cfg = obs.config();
    const auto& fireworks = obs.fireworks();
    const int own = static_cast<int>(obs.own_knowledge().size());
    const int partner = static_cast<int>(obs.partner_hand().size());

    for (int i = 0; i < own; ++i)
      if (provably_playable(obs, i)) return encode_action(cfg, {MoveType::kPlay, i});

    // Trust the pair's play marks.
    std::vector<int> marked;
    for (int i = 0; i < own; ++i) {
      const CardKnowledge& k = obs.own_knowledge()[i];
      if (style_.color_marks_playable ? color_mark_eligible(cfg, fireworks, k)
                                      : rank_mark_eligible(cfg, fireworks, k))
        marked.push_back(i);
    }
    if (marked.size() == 1) return encode_action(cfg, {MoveType::kPlay, marked[0]});
    if (!marked.empty() && style_.risk_ambiguous_trust && obs.life_tokens() >= 2)
      return encode_action(cfg, {MoveType::kPlay, marked[0]});

    if (obs.info_tokens() > 0) {
      // Mark a playable partner card with the pair's play-hint class.
      int target = -1;
      for (int i = 0; i < partner; ++i) {
        const Card& card = obs.partner_hand()[i];
        const CardKnowledge& k = obs.partner_knowledge()[i];
        if (!playable_on(fireworks, card)) continue;
        if (style_.color_marks_playable ? k.color_known() : k.rank_known()) continue;
        if (style_.color_marks_playable && style_.safe_hints_only &&
            !color_hint_safe(obs, i))
          continue;
        if (target < 0 ||
            (style_.hint_highest_rank && card.rank > obs.partner_hand()[target].rank))
          target = i;
      }
      if (target >= 0) {
        const Card& card = obs.partner_hand()[target];
        return style_.color_marks_playable
                   ? encode_action(cfg, {MoveType::kHintColor, card.color})
                   : encode_action(cfg, {MoveType::kHintRank, card.rank});
      }
      if (style_.hint_valuable) {
        // Protection marks use the pair's other hint class.
        for (int i = 0; i < partner; ++i) {
          const Card& card = obs.partner_hand()[i];
          const CardKnowledge& k = obs.partner_knowledge()[i];
          if (!is_valuable(obs, card)) continue;
          if (style_.color_marks_playable && !k.rank_known())
            return encode_action(cfg, {MoveType::kHintRank, card.rank});
          if (!style_.color_marks_playable && !k.color_known())
            return encode_action(cfg, {MoveType::kHintColor, card.color});
        }
      }
    }

    if (obs.info_tokens() < cfg.info_tokens && own > 0) {
      if (style_.discard_dead_first) {
        for (int i = 0; i < own; ++i)
          if (dead_by(cfg, fireworks, obs.own_knowledge()[i]))
            return encode_action(cfg, {MoveType::kDiscard, i});
      }
      // Unprotected cards only; the pair's value marks stay in hand.
      std::vector<int> candidates;
      for (int i = 0; i < own; ++i) {
        const CardKnowledge& k = obs.own_knowledge()[i];
        bool protected_mark = style_.color_marks_playable ? k.rank_known() : k.color_known();
        if (style_.protect_known_valuable && provably_valuable(cfg, fireworks, k))
          protected_mark = true;
        if (!protected_mark) candidates.push_back(i);
      }
      if (!candidates.empty())
        return encode_action(
            cfg, {MoveType::kDiscard, style_.discard_newest ? candidates.back() : candidates[0]});
      return encode_action(cfg, {MoveType::kDiscard, 0});
    }

    if (obs.info_tokens() > 0 && partner > 0) {
      // Out of better options: repeat a harmless protection-class hint.
      int target = 0;
      if (style_.fallback_highest_rank)
        for (int i = 1; i < partner; ++i)
          if (obs.partner_hand()[i].rank > obs.partner_hand()[target].rank) target = i;
      const Card& card = obs.partner_hand()[target];
      return style_.color_marks_playable ? encode_action(cfg, {MoveType::kHintRank, card.rank})
                                         : encode_action(cfg, {MoveType::kHintColor, card.color});
    }

    return first_legal(obs);
  }

 private:
  // A color mark is safe when, after the hint, the receiver's eligible set
  // is exactly the intended card (color hints also narrow the other cards'
  // masks by elimination).
  bool color_hint_safe(const HanabiObservation& obs, int target) const {
    const HanabiConfig& cfg = obs.config();
    const int color = obs.partner_hand()[target].color;
    std::vector<int> eligible;
    for (size_t i = 0; i < obs.partner_hand().size(); ++i) {
      CardKnowledge k = obs.partner_knowledge()[i];
      if (obs.partner_hand()[i].color == color)
        k.color_mask = 1u << color;
      else
        k.color_mask &= ~(1u << color);
      if (color_mark_eligible(cfg, obs.fireworks(), k)) eligible.push_back(static_cast<int>(i));
    }
    return eligible.size() == 1 && eligible[0] == target;
  }

  BotStyle style_;
};

}  // namespace

std::shared_ptr<const Policy> make_valuebot() {
  return std::make_shared<HanabiRuleBot>(
      "valuebot", BotStyle{/*color_marks_playable=*/true, /*hint_valuable=*/true,
                           /*safe_hints_only=*/true, /*risk_ambiguous_trust=*/false,
                           /*hint_highest_rank=*/false, /*discard_dead_first=*/false,
                           /*discard_newest=*/false, /*protect_known_valuable=*/false,
                           /*fallback_highest_rank=*/false});
}

std::shared_ptr<const Policy> make_holmesbot() {
  return std::make_shared<HanabiRuleBot>(
      "holmesbot", BotStyle{/*color_marks_playable=*/true, /*hint_valuable=*/true,
                            /*safe_hints_only=*/false, /*risk_ambiguous_trust=*/true,
                            /*hint_highest_rank=*/true, /*discard_dead_first=*/false,
                            /*discard_newest=*/true, /*protect_known_valuable=*/false,
                            /*fallback_highest_rank=*/true});
}

std::shared_ptr<const Policy> make_iggi() {
  return std::make_shared<HanabiRuleBot>(
      "iggi", BotStyle{/*color_marks_playable=*/false, /*hint_valuable=*/false,
                       /*safe_hints_only=*/false, /*risk_ambiguous_trust=*/false,
                       /*hint_highest_rank=*/false, /*discard_dead_first=*/true,
                       /*discard_newest=*/false, /*protect_known_valuable=*/false,
                       /*fallback_highest_rank=*/false});
}

std::shared_ptr<const Policy> make_piers() {
  return std::make_shared<HanabiRuleBot>(
      "piers", BotStyle{/*color_marks_playable=*/false, /*hint_valuable=*/true,
                        /*safe_hints_only=*/false, /*risk_ambiguous_trust=*/true,
                        /*hint_highest_rank=*/true, /*discard_dead_first=*/true,
                        /*discard_newest=*/true, /*protect_known_valuable=*/true,
                        /*fallback_highest_rank=*/true});
}

std::vector<std::shared_ptr<const Policy>> standard_bots(double epsilon) {
  std::vector<std::shared_ptr<const Policy>> bots = {make_valuebot(), make_holmesbot(),
                                                     make_iggi(), make_piers()};
  if (epsilon > 0.0)
    for (auto& b : bots) b = std::make_shared<EpsilonNoisePolicy>(b, epsilon);
  return bots;
}

std::shared_ptr<const Policy> make_bot(const std::string& name) {
  if (name == "valuebot") return make_valuebot();
  if (name == "holmesbot") return make_holmesbot();
  if (name == "iggi") return make_iggi();
  if (name == "piers") return make_piers();
  if (name == "random") return std::make_shared<UniformRandomPolicy>();
  throw std::invalid_argument("unknown hanabi bot: " + name);
}

}  // namespace osa::hanabi
