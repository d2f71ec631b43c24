#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osa/belief.hpp"
#include "osa/game.hpp"
#include "osa/policy.hpp"

namespace osa {

class Agent {
 public:
  virtual ~Agent() = default;
  virtual Action act(const Observation& obs, Rng& rng) = 0;
  // Called for every transition; `pre_state` is the state the action was
  // taken in.
  virtual void observe_transition(const State& pre_state, AgentId actor, Action action,
                                  Rng& rng) {
    (void)pre_state;
    (void)actor;
    (void)action;
    (void)rng;
  }
  virtual std::string name() const = 0;
};

class PolicyAgent : public Agent {
 public:
  explicit PolicyAgent(std::shared_ptr<const Policy> policy) : policy_(std::move(policy)) {}
  Action act(const Observation& obs, Rng& rng) override { return policy_->act(obs, rng); }
  std::string name() const override { return policy_->id(); }

 private:
  std::shared_ptr<const Policy> policy_;
};

// The complex agent: on every partner action it prunes, runs the Gibbs
// sweeps, recomputes the mode estimate and switches its response policy to
// B(mode). The belief only touches the true state through viewer-legitimate
// projections (enumerate_hidden / with_hidden / partner observations).
class OsaAgent : public Agent {
 public:
  OsaAgent(const Environment& env, Portfolio portfolio, AgentId self, BeliefConfig config,
           const std::string& init_policy_id = "");

  Action act(const Observation& obs, Rng& rng) override;
  void observe_transition(const State& pre_state, AgentId actor, Action action,
                          Rng& rng) override;
  std::string name() const override { return "osa"; }

  const std::string& current_response() const { return response_; }
  const std::string& init_policy() const { return init_policy_; }
  const GibbsBelief& belief() const { return belief_; }
  const std::vector<BeliefTraceEntry>& trace() const { return trace_; }
  void reset();

 private:
  const Environment* env_;
  Portfolio portfolio_;
  AgentId self_;
  GibbsBelief belief_;
  std::string init_policy_;
  std::string response_;
  std::vector<BeliefTraceEntry> trace_;
  int step_counter_ = 0;
};

// Eq.-5 policy reuse across a sequence of k+1 games: once some game ends
// with positive reward, subsequent games replay that game's final OSA
// policy (most recent positive game wins).
class KShotController {
 public:
  explicit KShotController(int k);

  struct Decision {
    bool reuse = false;
    std::string policy_id;  // set when reuse
  };

  // Decision for the upcoming game (game_index() of k+1 total).
  Decision next_policy() const;
  void record_game(double reward, const std::string& final_policy_id);

  int k() const { return k_; }
  int game_index() const { return static_cast<int>(rewards_.size()); }
  const std::optional<std::string>& reuse_policy() const { return reuse_policy_; }
  const std::vector<double>& rewards() const { return rewards_; }

 private:
  int k_;
  std::vector<double> rewards_;
  std::vector<std::string> final_policies_;
  std::optional<std::string> reuse_policy_;
};

}  // namespace osa
