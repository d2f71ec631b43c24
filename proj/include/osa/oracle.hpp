#pragma once

#include <map>
#include <string>
#include <vector>

#include "osa/game.hpp"
#include "osa/policy.hpp"

namespace osa::oracle {

// Exact per-step joint P(pi, f | u, s) over the full product space. Test
// fixture and `oracle-check` reference; never a runtime fallback.
struct JointPosterior {
  std::vector<std::string> policy_ids;
  std::vector<HiddenAssignment> assignments;
  std::vector<std::vector<double>> probs;  // [policy][assignment], sums to 1

  std::vector<double> policy_marginal() const;
  std::vector<double> hidden_marginal() const;
  double prob_of(const std::string& policy_id, const HiddenAssignment& f) const;
};

JointPosterior exact_step_joint(const Environment& env, const State& state, Action observed_action,
                                const std::vector<std::shared_ptr<const Policy>>& policies,
                                const std::vector<double>& policy_prior, AgentId viewer);

// Exact filtering of P(pi | all partner actions, viewer observations) over
// hidden-feature sequences, including card-draw dynamics. Requires the
// record to be replayable (seeded) and every step's hidden set enumerable.
std::map<std::string, double> exact_history_policy_posterior(const Environment& env,
                                                             const GameRecord& record,
                                                             const Portfolio& portfolio,
                                                             AgentId viewer);

// Replays a recorded game; returns the state sequence (initial state first,
// final state last).
std::vector<std::unique_ptr<State>> replay_states(const Environment& env,
                                                  const GameRecord& record);

// Half the L1 distance between two distributions over the same index set.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace osa::oracle
