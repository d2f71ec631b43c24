#include "osa/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace osa::oracle {

std::vector<double> JointPosterior::policy_marginal() const {
  std::vector<double> m(policy_ids.size(), 0.0);
  for (size_t p = 0; p < probs.size(); ++p)
    for (double v : probs[p]) m[p] += v;
  return m;
}

std::vector<double> JointPosterior::hidden_marginal() const {
  std::vector<double> m(assignments.size(), 0.0);
  for (const auto& row : probs)
    for (size_t f = 0; f < row.size(); ++f) m[f] += row[f];
  return m;
}

double JointPosterior::prob_of(const std::string& policy_id, const HiddenAssignment& f) const {
  for (size_t p = 0; p < policy_ids.size(); ++p) {
    if (policy_ids[p] != policy_id) continue;
    for (size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == f) return probs[p][i];
  }
  return 0.0;
}

JointPosterior exact_step_joint(const Environment& env, const State& state, Action observed_action,
                                const std::vector<std::shared_ptr<const Policy>>& policies,
                                const std::vector<double>& policy_prior, AgentId viewer) {
  if (policies.empty()) throw std::invalid_argument("exact_step_joint: no policies");
  if (policy_prior.size() != policies.size())
    throw std::invalid_argument("exact_step_joint: prior size mismatch");

  const AgentId actor = state.current_player();
  const auto support = env.enumerate_hidden(state, viewer);
  if (support.empty()) throw std::runtime_error("exact_step_joint: empty hidden support");

  JointPosterior joint;
  joint.probs.assign(policies.size(), std::vector<double>(support.size(), 0.0));
  double total = 0.0;
  for (size_t p = 0; p < policies.size(); ++p) {
    joint.policy_ids.push_back(policies[p]->id());
    for (size_t i = 0; i < support.size(); ++i) {
      const auto hyp = env.with_hidden(state, viewer, support[i].value);
      const auto obs = env.observe(*hyp, actor);
      const double like = policies[p]->action_probs(*obs)[observed_action];
      joint.probs[p][i] = policy_prior[p] * support[i].prob * like;
      total += joint.probs[p][i];
    }
  }
  for (const auto& wa : support) joint.assignments.push_back(wa.value);
  if (total <= 0.0)
    throw std::runtime_error("exact_step_joint: observed action has zero probability everywhere");
  for (auto& row : joint.probs)
    for (double& v : row) v /= total;
  return joint;
}

std::vector<std::unique_ptr<State>> replay_states(const Environment& env,
                                                  const GameRecord& record) {
  std::vector<std::unique_ptr<State>> states;
  Rng rng(record.seed);
  states.push_back(env.new_initial_state(rng));
  for (const GameStep& step : record.steps) {
    auto [next, reward] = env.step(*states.back(), step.action, rng);
    (void)reward;
    states.push_back(std::move(next));
  }
  return states;
}

std::map<std::string, double> exact_history_policy_posterior(const Environment& env,
                                                             const GameRecord& record,
                                                             const Portfolio& portfolio,
                                                             AgentId viewer) {
  const auto states = replay_states(env, record);

  std::map<std::string, double> posterior;
  std::vector<double> evidences(portfolio.size(), 0.0);
  for (int p = 0; p < portfolio.size(); ++p) {
    const Policy& policy = portfolio.at(p);

    // Forward filter over the viewer-hidden assignments of each state.
    auto support = env.enumerate_hidden(*states[0], viewer);
    std::vector<double> alpha;
    for (const auto& wa : support) alpha.push_back(wa.prob);

    for (size_t k = 0; k < record.steps.size(); ++k) {
      const State& s = *states[k];
      const State& next = *states[k + 1];
      const Action action = record.steps[k].action;
      const AgentId actor = s.current_player();

      if (actor != viewer) {
        // Partner acted: weight each hypothesis by its action likelihood.
        for (size_t i = 0; i < support.size(); ++i) {
          const auto hyp = env.with_hidden(s, viewer, support[i].value);
          const auto obs = env.observe(*hyp, actor);
          alpha[i] *= policy.action_probs(*obs)[action];
        }
      }

      auto next_support = env.enumerate_hidden(next, viewer);
      std::vector<double> next_alpha(next_support.size(), 0.0);
      for (size_t i = 0; i < support.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        for (size_t j = 0; j < next_support.size(); ++j) {
          const double w = env.hidden_transition_weight(s, action, next, viewer, support[i].value,
                                                        next_support[j].value);
          if (w > 0.0) next_alpha[j] += alpha[i] * w;
        }
      }
      support = std::move(next_support);
      alpha = std::move(next_alpha);
    }

    double evidence = 0.0;
    for (double a : alpha) evidence += a;
    evidences[p] = portfolio.prior()[p] * evidence;
  }

  double total = 0.0;
  for (double e : evidences) total += e;
  if (total <= 0.0)
    throw std::runtime_error(
        "exact_history_policy_posterior: history impossible under every policy");
  for (int p = 0; p < portfolio.size(); ++p) posterior[portfolio.at(p).id()] = evidences[p] / total;
  return posterior;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double d = 0.0;
  for (size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

}  // namespace osa::oracle
