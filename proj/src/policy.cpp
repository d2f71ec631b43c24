#include "osa/policy.hpp"

#include <algorithm>
#include <cmath>

namespace osa {

Action Policy::act(const Observation& obs, Rng& rng) const {
  const std::vector<double> probs = action_probs(obs);
  return rng.categorical(probs);
}

std::vector<double> RulePolicy::action_probs(const Observation& obs) const {
  std::vector<double> probs(obs.num_actions(), 0.0);
  probs[decide(obs)] = 1.0;
  return probs;
}

std::vector<double> UniformRandomPolicy::action_probs(const Observation& obs) const {
  std::vector<double> probs(obs.num_actions(), 0.0);
  const auto& legal = obs.legal_actions();
  if (legal.empty()) throw std::runtime_error("action_probs: no legal actions");
  for (Action a : legal) probs[a] = 1.0 / legal.size();
  return probs;
}

EpsilonNoisePolicy::EpsilonNoisePolicy(std::shared_ptr<const Policy> base, double epsilon)
    : EpsilonNoisePolicy(base, epsilon, base->id()) {}

EpsilonNoisePolicy::EpsilonNoisePolicy(std::shared_ptr<const Policy> base, double epsilon,
                                       std::string id)
    : base_(std::move(base)), epsilon_(epsilon), id_(std::move(id)) {
  if (epsilon_ < 0.0 || epsilon_ > 1.0)
    throw std::invalid_argument("EpsilonNoisePolicy: epsilon must be in [0,1]");
}

std::vector<double> EpsilonNoisePolicy::action_probs(const Observation& obs) const {
  std::vector<double> probs = base_->action_probs(obs);
  if (epsilon_ == 0.0) return probs;
  const auto& legal = obs.legal_actions();
  const double u = epsilon_ / legal.size();
  for (double& p : probs) p *= 1.0 - epsilon_;
  for (Action a : legal) probs[a] += u;
  return probs;
}

ConventionPolicy::ConventionPolicy(std::string id, std::vector<int> perm)
    : RulePolicy(std::move(id)), perm_(std::move(perm)) {
  const int d = static_cast<int>(perm_.size());
  inverse_.assign(d, -1);
  for (int c = 0; c < d; ++c) {
    if (perm_[c] < 0 || perm_[c] >= d || inverse_[perm_[c]] != -1)
      throw std::invalid_argument("ConventionPolicy: not a permutation");
    inverse_[perm_[c]] = c;
  }
}

Action ConventionPolicy::decide(const Observation& obs) const {
  const auto* tob = dynamic_cast<const toy::ToyObservation*>(&obs);
  if (tob == nullptr)
    throw std::invalid_argument("ConventionPolicy: observation is not from the toy environment");
  const toy::ToyConfig& cfg = tob->config();
  if (cfg.card_values != static_cast<int>(perm_.size()) || cfg.signals != cfg.card_values)
    throw std::invalid_argument("ConventionPolicy: convention size does not match environment");
  if (tob->phase() == toy::Phase::kSignal) {
    if (tob->own_card() < 0)
      throw std::invalid_argument("ConventionPolicy: signaler observation lacks the card");
    return perm_[tob->own_card()];
  }
  return cfg.signals + inverse_[tob->pending_signal()];
}

int ConventionPolicy::overlap(const ConventionPolicy& a, const ConventionPolicy& b) {
  int o = 0;
  for (size_t c = 0; c < a.perm_.size(); ++c)
    if (a.perm_[c] == b.perm_[c]) ++o;
  return o;
}

Portfolio::Portfolio(std::vector<std::shared_ptr<const Policy>> policies,
                     std::vector<double> prior, std::map<std::string, std::string> best_response)
    : policies_(std::move(policies)), prior_(std::move(prior)),
      best_response_(std::move(best_response)) {
  if (policies_.empty()) throw std::invalid_argument("Portfolio: empty policy set");
  for (size_t i = 0; i < policies_.size(); ++i)
    for (size_t j = i + 1; j < policies_.size(); ++j)
      if (policies_[i]->id() == policies_[j]->id())
        throw std::invalid_argument("Portfolio: duplicate policy id " + policies_[i]->id());
  if (prior_.empty()) prior_.assign(policies_.size(), 1.0 / policies_.size());
  if (prior_.size() != policies_.size())
    throw std::invalid_argument("Portfolio: prior size mismatch");
  double total = 0.0;
  for (double p : prior_) {
    if (p < 0.0) throw std::invalid_argument("Portfolio: negative prior");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("Portfolio: prior must sum to 1");
  for (const auto& [from, to] : best_response_) {
    if (!contains(from) || !contains(to))
      throw std::invalid_argument("Portfolio: best_response references unknown id");
  }
}

const Policy& Portfolio::by_id(const std::string& id) const {
  const int i = index_of(id);
  if (i < 0) throw std::invalid_argument("Portfolio: unknown policy id " + id);
  return *policies_[i];
}

bool Portfolio::contains(const std::string& id) const { return index_of(id) >= 0; }

int Portfolio::index_of(const std::string& id) const {
  for (size_t i = 0; i < policies_.size(); ++i)
    if (policies_[i]->id() == id) return static_cast<int>(i);
  return -1;
}

const std::string& Portfolio::best_response(const std::string& id) const {
  const int i = index_of(id);
  if (i < 0) throw std::invalid_argument("best_response: unknown policy id " + id);
  auto it = best_response_.find(id);
  if (it != best_response_.end()) return it->second;
  return policies_[i]->id();
}

Portfolio Portfolio::without(const std::string& id) const {
  if (!contains(id)) throw std::invalid_argument("Portfolio::without: unknown id " + id);
  if (size() == 1)
    throw std::invalid_argument("Portfolio::without: removing the only policy leaves Pi empty");
  std::vector<std::shared_ptr<const Policy>> rest;
  std::vector<double> prior;
  for (size_t i = 0; i < policies_.size(); ++i) {
    if (policies_[i]->id() == id) continue;
    rest.push_back(policies_[i]);
    prior.push_back(prior_[i]);
  }
  double total = 0.0;
  for (double p : prior) total += p;
  for (double& p : prior) p /= total;
  std::map<std::string, std::string> br;
  for (const auto& [from, to] : best_response_)
    if (from != id && to != id) br.emplace(from, to);
  return Portfolio(std::move(rest), std::move(prior), std::move(br));
}

}  // namespace osa
