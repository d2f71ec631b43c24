#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "osa/agent.hpp"
#include "osa/belief.hpp"
#include "osa/hanabi.hpp"
#include "osa/hanabi_bots.hpp"
#include "osa/harness.hpp"
#include "osa/oracle.hpp"
#include "osa/policy.hpp"
#include "osa/toy.hpp"

using namespace osa;

namespace {

std::shared_ptr<const ConventionPolicy> conv(const std::string& id, std::vector<int> perm) {
  return std::make_shared<ConventionPolicy>(id, std::move(perm));
}

class TablePolicy : public Policy {
 public:
  TablePolicy(std::string id, std::vector<std::vector<double>> rows)
      : id_(std::move(id)), rows_(std::move(rows)) {}
  const std::string& id() const override { return id_; }
  std::vector<double> action_probs(const Observation& obs) const override {
    const auto& tob = dynamic_cast<const toy::ToyObservation&>(obs);
    std::vector<double> probs(obs.num_actions(), 0.0);
    if (tob.phase() == toy::Phase::kSignal) {
      const auto& row = rows_.at(tob.own_card());
      for (size_t g = 0; g < row.size(); ++g) probs[g] = row[g];
    } else {
      for (Action a : obs.legal_actions()) probs[a] = 1.0 / obs.legal_actions().size();
    }
    return probs;
  }

 private:
  std::string id_;
  std::vector<std::vector<double>> rows_;
};

std::unique_ptr<State> partner_signal_state(const toy::ToyEnv& env, Rng& rng) {
  auto s = env.new_initial_state(rng);
  s = env.step(*s, 0, rng).first;
  s = env.step(*s, env.config().signals, rng).first;
  return s;
}

}  // namespace

TEST_CASE("one policy, one hand: point mass") {
  toy::ToyConfig cfg;
  cfg.card_values = 1;
  cfg.signals = 1;
  toy::ToyEnv env(cfg);
  Rng rng(1);
  auto s = partner_signal_state(env, rng);
  auto pi = std::make_shared<TablePolicy>("p", std::vector<std::vector<double>>{{1.0}});
  const auto joint = oracle::exact_step_joint(env, *s, 0, {pi}, {1.0}, 0);
  REQUIRE(joint.probs.size() == 1);
  REQUIRE(joint.probs[0].size() == 1);
  CHECK(joint.probs[0][0] == doctest::Approx(1.0));
}

TEST_CASE("2x2 diagonal likelihood matrix: half on each diagonal cell") {
  toy::ToyConfig cfg;
  cfg.card_values = 2;
  cfg.signals = 2;
  toy::ToyEnv env(cfg);
  Rng rng(3);
  auto s = partner_signal_state(env, rng);
  // Policy a explains signal 0 with card 0, policy b with card 1.
  auto a = std::make_shared<TablePolicy>("a", std::vector<std::vector<double>>{{1, 0}, {0, 1}});
  auto b = std::make_shared<TablePolicy>("b", std::vector<std::vector<double>>{{0, 1}, {1, 0}});
  const auto joint = oracle::exact_step_joint(env, *s, 0, {a, b}, {0.5, 0.5}, 0);
  CHECK(joint.prob_of("a", {0}) == doctest::Approx(0.5));
  CHECK(joint.prob_of("b", {1}) == doctest::Approx(0.5));
  CHECK(joint.prob_of("a", {1}) == doctest::Approx(0.0));
  CHECK(joint.prob_of("b", {0}) == doctest::Approx(0.0));
}

TEST_CASE("joint marginals agree with the belief's chained computations to 1e-9") {
  hanabi::HanabiEnv env(hanabi::HanabiConfig::mini());
  Portfolio pf(hanabi::standard_bots(0.1));
  UniformRandomPolicy random_policy;
  Rng rng(7);
  Rng env_rng(8);
  auto s = env.new_initial_state(env_rng);
  // Advance one ply so agent 1 is to move.
  {
    const auto obs = env.observe(*s, 0);
    s = env.step(*s, random_policy.act(*obs, rng), env_rng).first;
  }
  const auto obs = env.observe(*s, 1);
  const Action action = random_policy.act(*obs, rng);
  const auto joint = oracle::exact_step_joint(env, *s, action, pf.policies(), pf.prior(), 0);

  // Policy marginal equals the normalized per-policy action marginals.
  GibbsBelief belief(env, pf, 0, BeliefConfig{});
  const auto support = env.enumerate_hidden(*s, 0);
  std::vector<double> expected(pf.size(), 0.0);
  double total = 0.0;
  for (int p = 0; p < pf.size(); ++p) {
    double m = 0.0;
    for (const auto& wa : support)
      m += wa.prob * belief.likelihood(*s, action, pf.at(p), wa.value);
    expected[p] = pf.prior()[p] * m;
    total += expected[p];
  }
  const auto marginal = joint.policy_marginal();
  for (int p = 0; p < pf.size(); ++p) CHECK(std::abs(marginal[p] - expected[p] / total) <= 1e-9);

  // The joint sums to one and the hidden marginal is a proper mixture.
  const auto hidden = joint.hidden_marginal();
  double hidden_total = 0.0;
  for (double v : hidden) hidden_total += v;
  CHECK(hidden_total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("history posterior reaches a point mass on the only consistent policy") {
  toy::ToyEnv env(toy::ToyConfig{});
  auto c1 = conv("conv-0123", {0, 1, 2, 3});
  auto c2 = conv("conv-1230", {1, 2, 3, 0});
  auto c3 = conv("conv-2301", {2, 3, 0, 1});
  Portfolio pf({c1, c2, c3});
  PolicyAgent a0(c2), a1(c2);  // partner policy: c2 in both seats
  const GameRecord record = harness::run_game(env, a0, a1, StreamId(5));
  const auto posterior = oracle::exact_history_policy_posterior(env, record, pf, 0);
  CHECK(posterior.at("conv-1230") == doctest::Approx(1.0));
  CHECK(posterior.at("conv-0123") == doctest::Approx(0.0));
  CHECK(posterior.at("conv-2301") == doctest::Approx(0.0));
}

TEST_CASE("behaviorally identical policies keep their prior ratio forever") {
  toy::ToyEnv env(toy::ToyConfig{});
  auto c1 = conv("twin-a", {0, 1, 2, 3});
  auto c2 = conv("twin-b", {0, 1, 2, 3});
  Portfolio pf({c1, c2});
  PolicyAgent a0(c1), a1(c1);
  const GameRecord record = harness::run_game(env, a0, a1, StreamId(6));
  const auto posterior = oracle::exact_history_policy_posterior(env, record, pf, 0);
  CHECK(posterior.at("twin-a") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(posterior.at("twin-b") == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("OSA's mode agrees with the history-posterior argmax in >= 95% of toy games") {
  toy::ToyEnv env(toy::ToyConfig{});
  auto c1 = conv("conv-0123", {0, 1, 2, 3});
  auto c2 = conv("conv-1230", {1, 2, 3, 0});
  auto c3 = conv("conv-2301", {2, 3, 0, 1});
  Portfolio pf({c1, c2, c3});
  int agree = 0;
  const int games = 500;
  for (int g = 0; g < games; ++g) {
    const int partner = g % 3;
    const StreamId stream = StreamId(1000 + g);
    BeliefConfig cfg;
    cfg.particle_seed = stream.with("particles").seed();
    OsaAgent osa(env, pf, 0, cfg, pf.at((partner + 1) % 3).id());
    PolicyAgent simple(pf.policies()[partner]);
    const GameRecord record = harness::run_game(env, osa, simple, stream);
    const auto posterior = oracle::exact_history_policy_posterior(env, record, pf, 0);
    std::string argmax;
    double best = -1.0;
    for (const auto& [id, p] : posterior)
      if (p > best) {
        best = p;
        argmax = id;
      }
    if (osa.belief().mode_estimate() == argmax) ++agree;
  }
  CHECK(agree >= static_cast<int>(0.95 * games));
}

TEST_CASE("history filter runs through mini-Hanabi draw dynamics") {
  hanabi::HanabiEnv env(hanabi::HanabiConfig::mini());
  Portfolio pf(hanabi::standard_bots());
  // Partner (seat 1) plays iggi; seat 0 plays valuebot.
  PolicyAgent a0(pf.policies()[0]), a1(pf.policies()[2]);
  const GameRecord record = harness::run_game(env, a0, a1, StreamId(9));
  const auto posterior = oracle::exact_history_policy_posterior(env, record, pf, 0);
  double total = 0.0;
  for (const auto& [id, p] : posterior) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  // The true partner policy is the filter's argmax.
  for (const auto& [id, p] : posterior)
    if (id != "iggi") CHECK(posterior.at("iggi") >= p);
}

TEST_CASE("long-run gibbs frequencies converge to the exact joint on a toy fixture") {
  toy::ToyConfig cfg;
  toy::ToyEnv env(cfg);
  std::vector<std::shared_ptr<const Policy>> noisy = {
      std::make_shared<EpsilonNoisePolicy>(conv("conv-0123", {0, 1, 2, 3}), 0.1),
      std::make_shared<EpsilonNoisePolicy>(conv("conv-1230", {1, 2, 3, 0}), 0.1),
      std::make_shared<EpsilonNoisePolicy>(conv("conv-2301", {2, 3, 0, 1}), 0.1)};
  Portfolio pf(noisy);
  Rng rng(13);
  auto s = partner_signal_state(env, rng);
  const Action observed = 1;

  BeliefConfig bcfg;
  bcfg.sweeps_per_turn = 1;
  GibbsBelief belief(env, pf, 0, bcfg);
  const auto joint = oracle::exact_step_joint(env, *s, observed, pf.policies(), pf.prior(), 0);
  std::map<std::pair<std::string, HiddenAssignment>, int> counts;
  const int sweeps = 5000;
  Rng sweep_rng(17);
  for (int i = 0; i < sweeps; ++i) {
    belief.gibbs_sweep(*s, observed, sweep_rng);
    counts[{belief.current_policy_sample(), belief.current_hidden_sample()}] += 1;
  }
  std::vector<double> empirical, exact;
  for (size_t p = 0; p < joint.policy_ids.size(); ++p)
    for (size_t f = 0; f < joint.assignments.size(); ++f) {
      exact.push_back(joint.probs[p][f]);
      auto it = counts.find({joint.policy_ids[p], joint.assignments[f]});
      empirical.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second) / sweeps);
    }
  CHECK(oracle::total_variation(empirical, exact) <= 0.05);
}

TEST_CASE("oracle surfaces impossible evidence and the enumeration cap") {
  toy::ToyConfig cfg;
  cfg.card_values = 2;
  cfg.signals = 2;
  toy::ToyEnv env(cfg);
  Rng rng(3);
  auto s = partner_signal_state(env, rng);
  auto never = std::make_shared<TablePolicy>("never", std::vector<std::vector<double>>{{0, 1},
                                                                                       {0, 1}});
  CHECK_THROWS_AS(oracle::exact_step_joint(env, *s, 0, {never}, {1.0}, 0), std::runtime_error);

  hanabi::HanabiEnv full(hanabi::HanabiConfig::standard());
  Rng rng2(4);
  auto hs = full.new_initial_state(rng2);
  CHECK_THROWS_AS(
      oracle::exact_step_joint(full, *hs, 0, {hanabi::make_iggi()}, {1.0}, 0),
      EnumerationTooLarge);
}
