#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "osa/hanabi.hpp"
#include "osa/hanabi_bots.hpp"
#include "osa/harness.hpp"
#include "osa/policy.hpp"
#include "osa/toy.hpp"

using namespace osa;
using namespace osa::hanabi;

namespace {

std::vector<Card> deck_with_prefix(const HanabiConfig& cfg, const std::vector<Card>& prefix) {
  std::map<std::pair<int, int>, int> used;
  for (const Card& c : prefix) used[{c.color, c.rank}] += 1;
  std::vector<Card> deck = prefix;
  for (int c = 0; c < cfg.colors; ++c)
    for (int r = 1; r <= cfg.num_ranks(); ++r)
      for (int k = used[{c, r}]; k < cfg.rank_counts[r - 1]; ++k)
        deck.push_back(Card{static_cast<int8_t>(c), static_cast<int8_t>(r)});
  return deck;
}

// The 20-action standard position: both hands cover all colors and ranks,
// tokens strictly between 0 and max.
std::unique_ptr<State> twenty_action_state(const HanabiEnv& env) {
  using C = int8_t;
  const std::vector<Card> prefix = {{C{0}, C{1}}, {C{1}, C{2}}, {C{2}, C{3}}, {C{3}, C{4}},
                                    {C{4}, C{5}}, {C{4}, C{1}}, {C{0}, C{2}}, {C{1}, C{3}},
                                    {C{2}, C{4}}, {C{3}, C{5}}};
  auto s = env.initial_state_with_deck(deck_with_prefix(env.config(), prefix));
  Rng rng(1);
  return env.step(*s, encode_action(env.config(), {MoveType::kHintRank, 1}), rng).first;
}

// Observations of whoever is to move, sampled from self-play of each bot.
std::vector<std::string> self_play_positions(const HanabiEnv& env,
                                             const std::shared_ptr<const Policy>& bot, int games,
                                             std::vector<std::unique_ptr<Observation>>* out) {
  std::vector<std::string> digests;
  Rng rng(99);
  for (int g = 0; g < games; ++g) {
    Rng env_rng(rng.u64());
    auto s = env.new_initial_state(env_rng);
    while (!s->is_terminal()) {
      auto obs = env.observe(*s, s->current_player());
      const Action a = bot->act(*obs, rng);
      digests.push_back(obs->digest());
      out->push_back(std::move(obs));
      s = env.step(*s, a, env_rng).first;
    }
  }
  return digests;
}

}  // namespace

TEST_CASE("uniform random bot spreads mass over the 20 legal actions") {
  HanabiEnv env(HanabiConfig::standard());
  auto s = twenty_action_state(env);
  const auto obs = env.observe(*s, 1);
  REQUIRE(obs->legal_actions().size() == 20);
  UniformRandomPolicy random_policy;
  const auto probs = random_policy.action_probs(*obs);
  double total = 0.0;
  for (Action a : obs->legal_actions()) {
    CHECK(probs[a] == doctest::Approx(0.05));
    total += probs[a];
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("epsilon noise mixes 0.91 / 0.01 over 10 legal actions") {
  toy::ToyConfig cfg;
  cfg.card_values = 10;
  cfg.signals = 10;
  toy::ToyEnv env(cfg);
  std::vector<int> perm(10);
  for (int i = 0; i < 10; ++i) perm[i] = (i + 1) % 10;
  auto base = std::make_shared<ConventionPolicy>("conv", perm);
  EpsilonNoisePolicy noisy(base, 0.1);
  Rng rng(5);
  auto s = env.new_initial_state(rng);
  const auto obs = env.observe(*s, 0);
  REQUIRE(obs->legal_actions().size() == 10);
  const Action rule_action = base->decide(*obs);
  const auto probs = noisy.action_probs(*obs);
  for (Action a : obs->legal_actions())
    CHECK(probs[a] == doctest::Approx(a == rule_action ? 0.91 : 0.01));
}

TEST_CASE("hand-traced valuebot and iggi decisions on a fixed position") {
  const HanabiConfig cfg = HanabiConfig::mini();
  HanabiEnv env(cfg);
  using C = int8_t;
  // P0 = {R3, G3} (no knowledge), P1 = {R1, G2}. R1 is playable and unknown.
  auto s = env.initial_state_with_deck(
      deck_with_prefix(cfg, {{C{0}, C{3}}, {C{1}, C{3}}, {C{0}, C{1}}, {C{1}, C{2}}}));
  const auto obs = env.observe(*s, 0);

  // valuebot prefers a color hint on the playable card; iggi a rank hint.
  const Action color_hint = encode_action(cfg, {MoveType::kHintColor, 0});
  const Action rank_hint = encode_action(cfg, {MoveType::kHintRank, 1});
  const auto vb_probs = make_valuebot()->action_probs(*obs);
  CHECK(vb_probs[color_hint] == 1.0);
  const auto iggi_probs = make_iggi()->action_probs(*obs);
  CHECK(iggi_probs[rank_hint] == 1.0);
  // Probabilities are a point mass: zero everywhere else.
  double vb_total = 0.0, iggi_total = 0.0;
  for (double p : vb_probs) vb_total += p;
  for (double p : iggi_probs) iggi_total += p;
  CHECK(vb_total == 1.0);
  CHECK(iggi_total == 1.0);
}

TEST_CASE("holmesbot risk-plays a fully hinted rank-1 card where valuebot waits") {
  HanabiConfig cfg = HanabiConfig::mini();
  HanabiEnv env(cfg);
  using C = int8_t;
  // P0 = {R2, G1}, P1 = {R1, G2}. After P1 hints rank 1, P0's slot 1 is a
  // known 1 with unknown color; red fireworks already started.
  auto s = env.initial_state_with_deck(deck_with_prefix(
      cfg, {{C{0}, C{2}}, {C{1}, C{1}}, {C{0}, C{1}}, {C{1}, C{2}}, {C{0}, C{1}}}));
  Rng rng(1);
  s = env.step(*s, encode_action(cfg, {MoveType::kHintColor, 0}), rng).first;  // P0 hints
  s = env.step(*s, encode_action(cfg, {MoveType::kHintRank, 1}), rng).first;   // P1 hints P0's G1
  const auto obs = env.observe(*s, 0);
  // Knowledge-consistent combos for slot 1: {R1, G1}, both playable now.
  // Both bots treat it as provably playable and play it.
  CHECK(make_valuebot()->action_probs(*obs)[encode_action(cfg, {MoveType::kPlay, 1})] == 1.0);

  // Advance red to 1 so R1 is no longer playable: fraction drops to 1/2.
  auto s2 = env.step(*s, encode_action(cfg, {MoveType::kPlay, 0}), rng).first;  // P0 plays R2? no
  (void)s2;
  // Rebuild the position with red already at 1 via a scripted opening.
  auto t = env.initial_state_with_deck(deck_with_prefix(
      cfg, {{C{0}, C{2}}, {C{1}, C{1}}, {C{0}, C{1}}, {C{1}, C{2}}, {C{0}, C{1}}}));
  t = env.step(*t, encode_action(cfg, {MoveType::kHintRank, 1}), rng).first;   // P0 hints R1
  t = env.step(*t, encode_action(cfg, {MoveType::kPlay, 0}), rng).first;       // P1 plays R1
  t = env.step(*t, encode_action(cfg, {MoveType::kHintColor, 0}), rng).first;  // P0 hints
  t = env.step(*t, encode_action(cfg, {MoveType::kHintRank, 1}), rng).first;   // P1 hints P0's G1
  const auto obs2 = env.observe(*t, 0);
  const auto& hob = dynamic_cast<const HanabiObservation&>(*obs2);
  REQUIRE(hob.fireworks()[0] == 1);
  REQUIRE(hob.own_knowledge()[1].rank_known());
  // valuebot no longer has a provable play; holmesbot risks it at full lives.
  CHECK(make_valuebot()->action_probs(*obs2)[encode_action(cfg, {MoveType::kPlay, 1})] == 0.0);
  CHECK(make_holmesbot()->action_probs(*obs2)[encode_action(cfg, {MoveType::kPlay, 1})] == 1.0);
}

TEST_CASE("act sampling frequencies match action_probs within 3 sigma") {
  HanabiEnv env(HanabiConfig::standard());
  auto s = twenty_action_state(env);
  const auto obs = env.observe(*s, 1);
  const int trials = 100000;
  for (const auto& policy : {std::shared_ptr<const Policy>(std::make_shared<UniformRandomPolicy>()),
                             std::shared_ptr<const Policy>(std::make_shared<EpsilonNoisePolicy>(
                                 make_valuebot(), 0.1))}) {
    const auto probs = policy->action_probs(*obs);
    std::vector<int> freq(probs.size(), 0);
    Rng rng(2024);
    for (int i = 0; i < trials; ++i) freq[policy->act(*obs, rng)] += 1;
    for (size_t a = 0; a < probs.size(); ++a) {
      const double sigma = std::sqrt(probs[a] * (1 - probs[a]) / trials);
      CHECK(std::abs(freq[a] / static_cast<double>(trials) - probs[a]) <=
            std::max(3 * sigma, 1e-12));
    }
  }
}

TEST_CASE("within-pair bots agree more often than cross-pair bots") {
  HanabiEnv env(HanabiConfig::mini());
  auto vb = make_valuebot();
  auto hb = make_holmesbot();
  auto ig = make_iggi();
  auto pi = make_piers();
  std::vector<std::unique_ptr<Observation>> positions;
  for (const auto& bot : {vb, hb, ig, pi}) {
    std::vector<std::unique_ptr<Observation>> obs;
    self_play_positions(env, bot, 25, &obs);
    for (auto& o : obs) positions.push_back(std::move(o));
  }
  auto disagreement = [&](const Policy& a, const Policy& b) {
    int diff = 0;
    Rng rng(1);
    for (const auto& o : positions)
      if (a.act(*o, rng) != b.act(*o, rng)) ++diff;
    return static_cast<double>(diff) / positions.size();
  };
  const double within = (disagreement(*vb, *hb) + disagreement(*ig, *pi)) / 2;
  const double cross = (disagreement(*vb, *ig) + disagreement(*vb, *pi) +
                        disagreement(*hb, *ig) + disagreement(*hb, *pi)) /
                       4;
  CAPTURE(within);
  CAPTURE(cross);
  CHECK(cross > within);
  CHECK(cross >= 0.30);
}

TEST_CASE("policies are Markov in the observation") {
  // Two different hint orders reach the same public state; every bot must
  // answer identically on the resulting observations.
  HanabiConfig cfg = HanabiConfig::mini();
  cfg.info_tokens = 8;
  HanabiEnv env(cfg);
  using C = int8_t;
  // P0 = {R3, G3}, P1 = {R1, G2}.
  const std::vector<Card> prefix = {{C{0}, C{3}}, {C{1}, C{3}}, {C{0}, C{1}}, {C{1}, C{2}}};
  const Action p0_rank = encode_action(cfg, {MoveType::kHintRank, 1});    // about P1's R1
  const Action p0_color = encode_action(cfg, {MoveType::kHintColor, 1});  // about P1's G2
  const Action p1_rank = encode_action(cfg, {MoveType::kHintRank, 3});    // about P0's hand
  const Action p1_color = encode_action(cfg, {MoveType::kHintColor, 0});
  Rng rng(1);
  auto a = env.initial_state_with_deck(deck_with_prefix(cfg, prefix));
  for (Action act : {p0_rank, p1_rank, p0_color, p1_color}) a = env.step(*a, act, rng).first;
  auto b = env.initial_state_with_deck(deck_with_prefix(cfg, prefix));
  for (Action act : {p0_color, p1_color, p0_rank, p1_rank}) b = env.step(*b, act, rng).first;
  const auto oa = env.observe(*a, 0);
  const auto ob = env.observe(*b, 0);
  REQUIRE(oa->to_string() == ob->to_string());
  for (const auto& bot : standard_bots()) CHECK(bot->action_probs(*oa) == bot->action_probs(*ob));
}

TEST_CASE("best response defaults to identity and honors custom maps") {
  Portfolio pf(standard_bots());
  CHECK(pf.best_response("iggi") == "iggi");
  CHECK(pf.best_response("valuebot") == "valuebot");
  CHECK_THROWS_AS(pf.best_response("nosuch"), std::invalid_argument);

  Portfolio custom(standard_bots(), {}, {{"valuebot", "holmesbot"}});
  CHECK(custom.best_response("valuebot") == "holmesbot");
  CHECK(custom.best_response("holmesbot") == "holmesbot");
}

TEST_CASE("portfolio invariants: unique ids, normalized prior") {
  auto bots = standard_bots();
  CHECK_THROWS_AS(Portfolio({bots[0], bots[0]}), std::invalid_argument);
  CHECK_THROWS_AS(Portfolio(bots, {0.5, 0.5, 0.5, 0.5}), std::invalid_argument);
  CHECK_NOTHROW(Portfolio(bots, {0.25, 0.25, 0.25, 0.25}));
  Portfolio pf(bots);
  CHECK(pf.prior()[0] == doctest::Approx(0.25));
  CHECK_THROWS_AS(pf.without("nosuch"), std::invalid_argument);
  const Portfolio reduced = pf.without("iggi");
  CHECK(reduced.size() == 3);
  CHECK(!reduced.contains("iggi"));
  CHECK(reduced.prior()[0] == doctest::Approx(1.0 / 3));
}

TEST_CASE("action_probs sums to 1 over legal actions and is 0 elsewhere") {
  HanabiEnv env(HanabiConfig::mini());
  std::vector<std::unique_ptr<Observation>> positions;
  self_play_positions(env, make_piers(), 10, &positions);
  for (const auto& bot : standard_bots(0.05)) {
    for (const auto& obs : positions) {
      const auto probs = bot->action_probs(*obs);
      std::set<Action> legal(obs->legal_actions().begin(), obs->legal_actions().end());
      double total = 0.0;
      for (size_t a = 0; a < probs.size(); ++a) {
        total += probs[a];
        if (legal.count(static_cast<Action>(a)) == 0) CHECK(probs[a] == 0.0);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}
