#include "osa/belief.hpp"

#include <algorithm>
#include <cmath>

namespace osa {

GibbsBelief::GibbsBelief(const Environment& env, const Portfolio& portfolio, AgentId viewer,
                         BeliefConfig config, const std::string& init_policy_id)
    : env_(&env), policies_(portfolio.policies()), viewer_(viewer), config_(config),
      particle_rng_(config.particle_seed) {
  if (config_.epsilon < 0.0) throw std::invalid_argument("GibbsBelief: epsilon must be >= 0");
  if (config_.sweeps_per_turn < 1)
    throw std::invalid_argument("GibbsBelief: sweeps_per_turn must be >= 1");
  if (config_.backend == HiddenBackend::kSir && config_.sir_particles < 1)
    throw std::invalid_argument("GibbsBelief: sir_particles must be >= 1");
  if (!init_policy_id.empty()) {
    init_index_ = portfolio.index_of(init_policy_id);
    if (init_index_ < 0)
      throw std::invalid_argument("GibbsBelief: init policy not in portfolio: " + init_policy_id);
  }
  counts_.assign(policies_.size(), 0);
  active_.resize(policies_.size());
  for (size_t i = 0; i < policies_.size(); ++i) active_[i] = static_cast<int>(i);
  current_policy_ = init_index_;
  rebuild_active_ids();
}

void GibbsBelief::rebuild_active_ids() {
  active_ids_.clear();
  for (int i : active_) active_ids_.push_back(policies_[i]->id());
}

void GibbsBelief::reset() {
  counts_.assign(policies_.size(), 0);
  active_.resize(policies_.size());
  for (size_t i = 0; i < policies_.size(); ++i) active_[i] = static_cast<int>(i);
  current_policy_ = init_index_;
  current_hidden_.clear();
  cache_ = Evidence{};
  rebuild_active_ids();
}

const std::string& GibbsBelief::current_policy_sample() const {
  return policies_[current_policy_]->id();
}

int GibbsBelief::sample_count(const std::string& policy_id) const {
  for (size_t i = 0; i < policies_.size(); ++i)
    if (policies_[i]->id() == policy_id) return static_cast<int>(counts_[i]);
  return 0;
}

int GibbsBelief::total_samples() const {
  long total = 0;
  for (long c : counts_) total += c;
  return static_cast<int>(total);
}

double GibbsBelief::likelihood(const State& state, Action observed_action, const Policy& policy,
                               const HiddenAssignment& f) const {
  const auto hyp = env_->with_hidden(state, viewer_, f);
  const auto obs = env_->observe(*hyp, state.current_player());
  return policy.action_probs(*obs)[observed_action];
}

const GibbsBelief::Evidence& GibbsBelief::evidence(const State& state, Action observed_action) {
  const std::string digest = digest64(state.to_string());
  if (cache_.action == observed_action && cache_.state_digest == digest) return cache_;
  cache_ = Evidence{};
  cache_.state_digest = digest;
  cache_.action = observed_action;
  if (config_.backend == HiddenBackend::kEnumerate) {
    auto support = env_->enumerate_hidden(state, viewer_);
    if (support.empty())
      throw std::runtime_error("GibbsBelief: no consistent hidden assignment exists");
    for (auto& wa : support) {
      cache_.support.push_back(std::move(wa.value));
      cache_.prior.push_back(wa.prob);
    }
  } else {
    const double w = 1.0 / config_.sir_particles;
    for (int i = 0; i < config_.sir_particles; ++i) {
      cache_.support.push_back(env_->sample_hidden_prior(state, viewer_, particle_rng_));
      cache_.prior.push_back(w);
    }
  }
  cache_.likelihoods.assign(policies_.size(), {});
  cache_.computed.assign(policies_.size(), 0);
  return cache_;
}

const std::vector<double>& GibbsBelief::likelihood_row(const State& state, Action observed_action,
                                                       int portfolio_index) {
  Evidence& ev = const_cast<Evidence&>(evidence(state, observed_action));
  if (!ev.computed[portfolio_index]) {
    std::vector<double> row(ev.support.size());
    for (size_t i = 0; i < ev.support.size(); ++i)
      row[i] = likelihood(state, observed_action, *policies_[portfolio_index], ev.support[i]);
    ev.likelihoods[portfolio_index] = std::move(row);
    ev.computed[portfolio_index] = 1;
  }
  return ev.likelihoods[portfolio_index];
}

double GibbsBelief::marginal(const State& state, Action observed_action, int portfolio_index) {
  const Evidence& ev = evidence(state, observed_action);
  const auto& row = likelihood_row(state, observed_action, portfolio_index);
  double m = 0.0;
  for (size_t i = 0; i < row.size(); ++i) m += row[i] * ev.prior[i];
  return m;
}

std::pair<std::vector<HiddenAssignment>, std::vector<double>> GibbsBelief::step_hidden_posterior(
    const State& state, Action observed_action) {
  const Evidence& ev = evidence(state, observed_action);
  const auto& row = likelihood_row(state, observed_action, current_policy_);
  std::vector<double> probs(ev.support.size());
  double total = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    probs[i] = row[i] * ev.prior[i];
    total += probs[i];
  }
  if (total <= 0.0) {
    // Degenerate evidence for this policy hypothesis: fall back to the prior.
    probs = ev.prior;
    total = 0.0;
    for (double p : probs) total += p;
  }
  for (double& p : probs) p /= total;
  return {ev.support, probs};
}

std::vector<double> GibbsBelief::step_policy_posterior(const State& state, Action observed_action,
                                                       const HiddenAssignment& f) {
  std::vector<double> probs(active_.size());
  double total = 0.0;
  for (size_t k = 0; k < active_.size(); ++k) {
    probs[k] = likelihood(state, observed_action, *policies_[active_[k]], f);
    total += probs[k];
  }
  if (total <= 0.0) {
    probs.assign(active_.size(), 1.0 / active_.size());
    return probs;
  }
  for (double& p : probs) p /= total;
  return probs;
}

void GibbsBelief::prune(const State& state, Action observed_action) {
  std::vector<double> marginals(active_.size());
  for (size_t k = 0; k < active_.size(); ++k)
    marginals[k] = marginal(state, observed_action, active_[k]);

  std::vector<int> kept;
  for (size_t k = 0; k < active_.size(); ++k)
    if (marginals[k] >= config_.epsilon) kept.push_back(active_[k]);
  if (kept.empty()) {
    // Never-empty rule: retain the argmax set (ties keep everything tied).
    const double best = *std::max_element(marginals.begin(), marginals.end());
    for (size_t k = 0; k < active_.size(); ++k)
      if (marginals[k] == best) kept.push_back(active_[k]);
  }
  if (kept.size() == active_.size()) return;
  active_ = std::move(kept);
  rebuild_active_ids();
  if (std::find(active_.begin(), active_.end(), current_policy_) == active_.end()) {
    // The chain's policy coordinate must live in the active set; re-anchor at
    // the surviving policy that best explains the action.
    int best_index = active_[0];
    double best = -1.0;
    for (int i : active_) {
      const double m = marginal(state, observed_action, i);
      if (m > best) {
        best = m;
        best_index = i;
      }
    }
    current_policy_ = best_index;
  }
}

void GibbsBelief::gibbs_sweep(const State& state, Action observed_action, Rng& rng) {
  for (int sweep = 0; sweep < config_.sweeps_per_turn; ++sweep) {
    auto [support, hidden_probs] = step_hidden_posterior(state, observed_action);
    const int fi = rng.categorical(hidden_probs);
    current_hidden_ = support[fi];
    const std::vector<double> policy_probs =
        step_policy_posterior(state, observed_action, current_hidden_);
    current_policy_ = active_[rng.categorical(policy_probs)];
  }
  ++counts_[current_policy_];
}

void GibbsBelief::update(const State& state, Action observed_action, Rng& rng) {
  prune(state, observed_action);
  gibbs_sweep(state, observed_action, rng);
}

const std::string& GibbsBelief::mode_estimate() const {
  long best = 0;
  int best_index = init_index_;
  for (size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] > best) {
      best = counts_[i];
      best_index = static_cast<int>(i);
    }
  }
  return policies_[best_index]->id();
}

}  // namespace osa
