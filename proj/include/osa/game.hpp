#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "osa/rng.hpp"

namespace osa {

using AgentId = int;
using Action = int;
using json = nlohmann::json;

// The Dec-POMDP tuple instance: agents, enumerable action set U, observation
// space descriptor, discount and a step bound. Both shipped environments are
// strictly alternating two-player games; the types allow N >= 2.
struct GameSpec {
  int num_agents = 2;
  int num_actions = 0;
  std::string observation_space;
  double discount = 1.0;
  int max_steps = 0;

  void validate() const {
    if (num_agents < 2) throw std::invalid_argument("GameSpec: num_agents must be >= 2");
    if (num_actions < 1) throw std::invalid_argument("GameSpec: action space must be non-empty");
    if (!(discount > 0.0 && discount <= 1.0))
      throw std::invalid_argument("GameSpec: discount must be in (0,1]");
    if (max_steps < 1) throw std::invalid_argument("GameSpec: max_steps must be positive");
  }
};

// Key->rendered-value map used for the feature-partition checks. Every
// observable state feature lives in exactly one of public_features() or
// private_features(i). Undealt chance internals (e.g. Hanabi deck order) are
// not agent-observable and sit outside the partition; their size is public.
using FeatureMap = std::map<std::string, std::string>;

class State {
 public:
  virtual ~State() = default;
  virtual std::unique_ptr<State> clone() const = 0;
  virtual AgentId current_player() const = 0;
  virtual bool is_terminal() const = 0;
  virtual FeatureMap public_features() const = 0;
  // Features observed by agent i and by no other agent.
  virtual FeatureMap private_features(AgentId agent) const = 0;
  virtual std::string to_string() const = 0;
};

class Observation {
 public:
  virtual ~Observation() = default;
  virtual AgentId viewer() const = 0;
  virtual bool terminal() const = 0;
  // Legal actions for the viewer; empty unless the viewer is to move.
  virtual const std::vector<Action>& legal_actions() const = 0;
  virtual int num_actions() const = 0;
  virtual std::string to_string() const = 0;
  std::string digest() const;  // stable 64-bit hex of to_string()
};

// Raised when enumerate_hidden would exceed the cap; callers fall back to
// sampling.
struct EnumerationTooLarge : std::runtime_error {
  explicit EnumerationTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct IllegalAction : std::runtime_error {
  explicit IllegalAction(const std::string& what) : std::runtime_error(what) {}
};

// Environment-encoded assignment to the features hidden from a given viewer.
// Empty vector means "no hidden features".
using HiddenAssignment = std::vector<int>;

struct WeightedAssignment {
  HiddenAssignment value;
  double prob = 0.0;
};

class Environment {
 public:
  static constexpr int kEnumerationCap = 200000;

  virtual ~Environment() = default;
  virtual const GameSpec& spec() const = 0;
  virtual std::string name() const = 0;

  virtual std::unique_ptr<State> new_initial_state(Rng& rng) const = 0;
  virtual std::vector<Action> legal_actions(const State& state, AgentId agent) const = 0;

  // Applies the acting agent's action. Throws IllegalAction on terminal
  // states or actions illegal for the actor.
  virtual std::pair<std::unique_ptr<State>, double> step(const State& state, Action action,
                                                         Rng& rng) const = 0;

  // Dec-POMDP joint-action form. Both shipped environments alternate, so only
  // joint[state.current_player()] is consulted.
  std::pair<std::unique_ptr<State>, double> transition(const State& state,
                                                       const std::vector<Action>& joint,
                                                       Rng& rng) const;

  virtual std::unique_ptr<Observation> observe(const State& state, AgentId agent) const = 0;

  // Exhaustive list of assignments to the features hidden from `viewer`,
  // consistent with the viewer's observation, with their prior probabilities
  // (normalized). Throws EnumerationTooLarge above kEnumerationCap.
  virtual std::vector<WeightedAssignment> enumerate_hidden(const State& state,
                                                           AgentId viewer) const = 0;

  // Draws from the same distribution enumerate_hidden describes.
  virtual HiddenAssignment sample_hidden_prior(const State& state, AgentId viewer,
                                               Rng& rng) const = 0;

  // Returns a copy of `state` with the viewer-hidden features replaced by f.
  // The result is a hypothetical: it is only ever observed, never stepped.
  virtual std::unique_ptr<State> with_hidden(const State& state, AgentId viewer,
                                             const HiddenAssignment& f) const = 0;

  // Unnormalized weight of hidden assignment f at `state` evolving into
  // f_next at `next` when `action` was applied, from `viewer`'s perspective
  // (0 when f is inconsistent with what the step revealed). Used by the
  // exact history filter.
  virtual double hidden_transition_weight(const State& state, Action action, const State& next,
                                          AgentId viewer, const HiddenAssignment& f,
                                          const HiddenAssignment& f_next) const = 0;

  virtual std::string action_to_string(Action action) const = 0;
  virtual json action_to_json(Action action) const = 0;
};

struct GameStep {
  AgentId agent = 0;
  std::string obs_digest;
  Action action = 0;
  double reward = 0.0;
};

struct BeliefTraceEntry {
  int step_index = 0;
  std::string sampled_policy;
  std::string mode_policy;
  int active_set_size = 0;
};

// Seeded trajectory record. final_reward always equals the discounted sum of
// step rewards (gamma = 1 in both shipped environments).
struct GameRecord {
  uint64_t seed = 0;
  std::vector<GameStep> steps;
  double final_reward = 0.0;
  std::vector<BeliefTraceEntry> belief_trace;

  double recompute_return(double discount) const;
  json to_json() const;
  static GameRecord from_json(const json& j);
};

std::string digest64(std::string_view text);

}  // namespace osa
