#pragma once

#include <memory>
#include <string>
#include <vector>

#include "osa/game.hpp"
#include "osa/policy.hpp"

namespace osa {

enum class HiddenBackend { kEnumerate, kSir };

struct BeliefConfig {
  double epsilon = 1e-9;    // pruning threshold on the action marginal
  int sweeps_per_turn = 5;  // first sweeps_per_turn - 1 are burn-in
  HiddenBackend backend = HiddenBackend::kEnumerate;
  int sir_particles = 1000;
  uint64_t particle_seed = 1;
};

// Two-variable Gibbs chain over (partner policy, viewer-hidden features),
// updated once per observed partner action:
//
//   f  ~ P(f | pi, u, s)  proportional to  P(u | f, pi, s) P(f | s)
//   pi ~ P(pi | f, u, s)  proportional to  P(u | pi, f, s), uniform over the
//                                          active set
//
// with redundant policies pruned when their action marginal
// sum_f P(u | f, pi, s) P(f | s) falls below epsilon. The mode of all
// counted per-turn samples is the point estimate of the partner policy.
class GibbsBelief {
 public:
  GibbsBelief(const Environment& env, const Portfolio& portfolio, AgentId viewer,
              BeliefConfig config, const std::string& init_policy_id = "");

  // Posterior over hidden assignments given the current policy sample. Falls
  // back to the prior when every likelihood is zero.
  std::pair<std::vector<HiddenAssignment>, std::vector<double>> step_hidden_posterior(
      const State& state, Action observed_action);

  // Posterior over the active set given a hidden assignment. Falls back to
  // uniform when every likelihood is zero.
  std::vector<double> step_policy_posterior(const State& state, Action observed_action,
                                            const HiddenAssignment& f);

  // Removes active policies whose action marginal is below epsilon; when all
  // fall below, the argmax set (all tied maxima) is retained.
  void prune(const State& state, Action observed_action);

  // One turn's worth of Gibbs sweeps; only the final sample of the turn is
  // counted toward the mode.
  void gibbs_sweep(const State& state, Action observed_action, Rng& rng);

  // prune + gibbs_sweep, the per-partner-action update of the OSA algorithm.
  void update(const State& state, Action observed_action, Rng& rng);

  const std::string& mode_estimate() const;

  const std::vector<std::string>& active_ids() const { return active_ids_; }
  int active_size() const { return static_cast<int>(active_ids_.size()); }
  const std::string& current_policy_sample() const;
  const HiddenAssignment& current_hidden_sample() const { return current_hidden_; }
  int sample_count(const std::string& policy_id) const;
  int total_samples() const;
  const BeliefConfig& config() const { return config_; }
  AgentId viewer() const { return viewer_; }

  // Resets samples, counts and the active set to the full portfolio.
  void reset();

  // Likelihood P(u | f, pi, s): the probability the partner's policy assigns
  // to the observed action on the partner's observation of the state with
  // the viewer-hidden features set to f.
  double likelihood(const State& state, Action observed_action, const Policy& policy,
                    const HiddenAssignment& f) const;

 private:
  struct Evidence {
    std::string state_digest;
    Action action = -1;
    std::vector<HiddenAssignment> support;
    std::vector<double> prior;                     // normalized over support
    std::vector<std::vector<double>> likelihoods;  // [portfolio index][support index]
    std::vector<char> computed;                    // per portfolio index
  };

  const Evidence& evidence(const State& state, Action observed_action);
  const std::vector<double>& likelihood_row(const State& state, Action observed_action,
                                            int portfolio_index);
  double marginal(const State& state, Action observed_action, int portfolio_index);

  const Environment* env_;
  std::vector<std::shared_ptr<const Policy>> policies_;  // original portfolio order
  AgentId viewer_;
  BeliefConfig config_;
  Rng particle_rng_;

  std::vector<int> active_;  // portfolio indices, ascending
  std::vector<std::string> active_ids_;
  std::vector<long> counts_;  // per portfolio index, only ever increases
  int init_index_ = 0;
  int current_policy_ = 0;  // portfolio index
  HiddenAssignment current_hidden_;
  Evidence cache_;

  void rebuild_active_ids();
};

}  // namespace osa
