#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "osa/game.hpp"
#include "osa/toy.hpp"

namespace osa {

// A queryable strategy. action_probs is an exact distribution over the
// observation's legal actions, indexed by action id (zero elsewhere), and
// depends only on the current observation (all shipped policies are
// Markov-in-observation).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual const std::string& id() const = 0;
  virtual std::vector<double> action_probs(const Observation& obs) const = 0;
  // Samples exactly from action_probs.
  virtual Action act(const Observation& obs, Rng& rng) const;
};

// Deterministic rule policies: a single decision per observation.
class RulePolicy : public Policy {
 public:
  explicit RulePolicy(std::string id) : id_(std::move(id)) {}
  const std::string& id() const override { return id_; }
  std::vector<double> action_probs(const Observation& obs) const override;
  Action act(const Observation& obs, Rng&) const override { return decide(obs); }
  virtual Action decide(const Observation& obs) const = 0;

 private:
  std::string id_;
};

class UniformRandomPolicy : public Policy {
 public:
  explicit UniformRandomPolicy(std::string id = "random") : id_(std::move(id)) {}
  const std::string& id() const override { return id_; }
  std::vector<double> action_probs(const Observation& obs) const override;

 private:
  std::string id_;
};

// (1 - eps) * base + eps * uniform over legal actions.
class EpsilonNoisePolicy : public Policy {
 public:
  EpsilonNoisePolicy(std::shared_ptr<const Policy> base, double epsilon);
  EpsilonNoisePolicy(std::shared_ptr<const Policy> base, double epsilon, std::string id);
  const std::string& id() const override { return id_; }
  std::vector<double> action_probs(const Observation& obs) const override;
  double epsilon() const { return epsilon_; }

 private:
  std::shared_ptr<const Policy> base_;
  double epsilon_;
  std::string id_;
};

// Toy-game permutation convention: signals sigma(card), guesses
// sigma^{-1}(signal). Requires d == h.
class ConventionPolicy : public RulePolicy {
 public:
  ConventionPolicy(std::string id, std::vector<int> perm);
  Action decide(const Observation& obs) const override;
  const std::vector<int>& permutation() const { return perm_; }

  // Cells on which the two conventions agree; cross-play is overlap/d per round.
  static int overlap(const ConventionPolicy& a, const ConventionPolicy& b);

 private:
  std::vector<int> perm_;
  std::vector<int> inverse_;
};

// The ordered policy set Pi with its prior and the best-response map B
// (identity unless overridden).
class Portfolio {
 public:
  explicit Portfolio(std::vector<std::shared_ptr<const Policy>> policies,
                     std::vector<double> prior = {},
                     std::map<std::string, std::string> best_response = {});

  int size() const { return static_cast<int>(policies_.size()); }
  const std::vector<std::shared_ptr<const Policy>>& policies() const { return policies_; }
  const Policy& at(int i) const { return *policies_[i]; }
  const Policy& by_id(const std::string& id) const;
  bool contains(const std::string& id) const;
  int index_of(const std::string& id) const;  // -1 when absent
  const std::vector<double>& prior() const { return prior_; }
  const std::string& best_response(const std::string& id) const;

  // Portfolio with one policy removed (prior renormalized, B restricted).
  Portfolio without(const std::string& id) const;

 private:
  std::vector<std::shared_ptr<const Policy>> policies_;
  std::vector<double> prior_;
  std::map<std::string, std::string> best_response_;
};

}  // namespace osa
