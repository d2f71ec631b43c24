#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "osa/agent.hpp"
#include "osa/hanabi.hpp"
#include "osa/hanabi_bots.hpp"
#include "osa/harness.hpp"
#include "osa/policy.hpp"
#include "osa/toy.hpp"

using namespace osa;

namespace {

std::shared_ptr<const ConventionPolicy> conv(const std::string& id, std::vector<int> perm) {
  return std::make_shared<ConventionPolicy>(id, std::move(perm));
}

Portfolio disjoint_conventions() {
  return Portfolio({conv("conv-0123", {0, 1, 2, 3}), conv("conv-1230", {1, 2, 3, 0}),
                    conv("conv-2301", {2, 3, 0, 1})});
}

}  // namespace

TEST_CASE("singleton portfolio: the response never changes") {
  toy::ToyEnv env(toy::ToyConfig{});
  Portfolio pf({conv("conv-0123", {0, 1, 2, 3})});
  OsaAgent osa(env, pf, 0, BeliefConfig{});
  PolicyAgent partner(pf.policies()[0]);
  Rng rng(1);
  auto s = env.new_initial_state(rng);
  while (!s->is_terminal()) {
    CHECK(osa.current_response() == "conv-0123");
    const AgentId actor = s->current_player();
    const auto obs = env.observe(*s, actor);
    Agent* agent = actor == 0 ? static_cast<Agent*>(&osa) : &partner;
    const Action a = agent->act(*obs, rng);
    osa.observe_transition(*s, actor, a, rng);
    s = env.step(*s, a, rng).first;
  }
  CHECK(osa.current_response() == "conv-0123");
}

TEST_CASE("before any partner action the agent acts as B(init)") {
  toy::ToyEnv env(toy::ToyConfig{});
  Portfolio pf = disjoint_conventions();
  OsaAgent osa(env, pf, 0, BeliefConfig{}, "conv-1230");
  CHECK(osa.current_response() == "conv-1230");
  Rng rng(2);
  auto s = env.new_initial_state(rng);
  const int card = dynamic_cast<const toy::ToyState&>(*s).hidden_card();
  const auto obs = env.observe(*s, 0);
  // Signals with the init convention: sigma(card) under conv-1230.
  CHECK(osa.act(*obs, rng) == (card + 1) % 4);
}

TEST_CASE("a disagreeing deterministic partner is identified after one partner turn") {
  toy::ToyEnv env(toy::ToyConfig{});
  Portfolio pf = disjoint_conventions();
  for (int partner_index = 0; partner_index < 3; ++partner_index) {
    for (uint64_t seed = 0; seed < 30; ++seed) {
      const StreamId stream(seed * 7 + partner_index);
      OsaAgent osa(env, pf, 0, BeliefConfig{}, pf.at((partner_index + 1) % 3).id());
      PolicyAgent partner(pf.policies()[partner_index]);
      Rng rng(stream.with("drive").seed());
      auto s = env.new_initial_state(rng);
      int partner_actions = 0;
      while (!s->is_terminal() && partner_actions < 1) {
        const AgentId actor = s->current_player();
        const auto obs = env.observe(*s, actor);
        Agent* agent = actor == 0 ? static_cast<Agent*>(&osa) : &partner;
        const Action a = agent->act(*obs, rng);
        osa.observe_transition(*s, actor, a, rng);
        if (actor == 1) ++partner_actions;
        s = env.step(*s, a, rng).first;
      }
      // Partner's first action is its round-0 guess, which under mutually
      // disjoint conventions eliminates everything else.
      CHECK(osa.current_response() == pf.at(partner_index).id());
      CHECK(osa.belief().active_size() == 1);
    }
  }
}

TEST_CASE("response stays coupled to B(mode) after every partner turn") {
  hanabi::HanabiEnv env(hanabi::HanabiConfig::mini());
  Portfolio pf(hanabi::standard_bots());
  for (uint64_t seed = 0; seed < 10; ++seed) {
    OsaAgent osa(env, pf, 0, BeliefConfig{}, "piers");
    PolicyAgent partner(pf.policies()[1]);
    Rng rng0(seed * 3 + 1), rng1(seed * 3 + 2);
    Rng env_rng(seed);
    auto s = env.new_initial_state(env_rng);
    while (!s->is_terminal()) {
      const AgentId actor = s->current_player();
      const auto obs = env.observe(*s, actor);
      const Action a = actor == 0 ? osa.act(*obs, rng0) : partner.act(*obs, rng1);
      osa.observe_transition(*s, actor, a, rng0);
      CHECK(osa.current_response() == pf.best_response(osa.belief().mode_estimate()));
      s = env.step(*s, a, env_rng).first;
    }
  }
}

TEST_CASE("k-shot: rewards (0, 5) reuse game 2's final policy for game 3") {
  KShotController controller(2);
  CHECK(!controller.next_policy().reuse);
  controller.record_game(0.0, "a");
  CHECK(!controller.next_policy().reuse);
  controller.record_game(5.0, "b");
  const auto d = controller.next_policy();
  CHECK(d.reuse);
  CHECK(d.policy_id == "b");
}

TEST_CASE("k-shot: the most recent positive game wins") {
  KShotController controller(3);
  controller.record_game(3.0, "a");
  controller.record_game(0.0, "b");
  controller.record_game(4.0, "c");
  const auto d = controller.next_policy();
  CHECK(d.reuse);
  CHECK(d.policy_id == "c");
  CHECK(controller.rewards().size() == 3);
}

TEST_CASE("k-shot: all rewards zero keeps running fresh OSA") {
  KShotController controller(4);
  for (int i = 0; i < 4; ++i) {
    CHECK(!controller.next_policy().reuse);
    controller.record_game(0.0, "x");
  }
  CHECK(!controller.next_policy().reuse);
  CHECK(!controller.reuse_policy().has_value());
}

TEST_CASE("reuse_policy is set iff some earlier game had positive reward") {
  KShotController controller(1);
  CHECK(!controller.reuse_policy().has_value());
  controller.record_game(2.5, "a");
  CHECK(controller.reuse_policy().has_value());
  CHECK_THROWS_AS(KShotController(-1), std::invalid_argument);
}

TEST_CASE("agent reset restores the initial belief and response") {
  toy::ToyEnv env(toy::ToyConfig{});
  Portfolio pf = disjoint_conventions();
  OsaAgent osa(env, pf, 0, BeliefConfig{}, "conv-0123");
  PolicyAgent partner(pf.policies()[2]);
  harness::run_game(env, osa, partner, StreamId(4));
  CHECK(osa.current_response() == "conv-2301");
  CHECK(osa.belief().total_samples() > 0);
  osa.reset();
  CHECK(osa.current_response() == "conv-0123");
  CHECK(osa.belief().total_samples() == 0);
  CHECK(osa.belief().active_size() == 3);
}

TEST_CASE("matched-init OSA rewards sit inside the iggi self-play distribution") {
  hanabi::HanabiEnv env(hanabi::HanabiConfig::mini());
  Portfolio pf(hanabi::standard_bots());
  const int games = 300;
  std::vector<double> osa_rewards, self_rewards;
  for (int g = 0; g < games; ++g) {
    const StreamId osa_stream = StreamId(2).with("osa").with(static_cast<uint64_t>(g));
    BeliefConfig cfg;
    cfg.particle_seed = osa_stream.with("particles").seed();
    OsaAgent osa(env, pf, 0, cfg, "iggi");
    PolicyAgent partner(pf.policies()[2]);
    osa_rewards.push_back(harness::run_game(env, osa, partner, osa_stream).final_reward);

    PolicyAgent s0(pf.policies()[2]), s1(pf.policies()[2]);
    self_rewards.push_back(
        harness::run_game(env, s0, s1, StreamId(2).with("self").with(static_cast<uint64_t>(g)))
            .final_reward);
  }
  CHECK(harness::welch_p_value(osa_rewards, self_rewards) > 0.01);
}
