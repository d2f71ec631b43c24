#include "osa/agent.hpp"

namespace osa {

OsaAgent::OsaAgent(const Environment& env, Portfolio portfolio, AgentId self, BeliefConfig config,
                   const std::string& init_policy_id)
    : env_(&env), portfolio_(std::move(portfolio)), self_(self),
      belief_(env, portfolio_, self, config,
              init_policy_id.empty() ? portfolio_.at(0).id() : init_policy_id),
      init_policy_(init_policy_id.empty() ? portfolio_.at(0).id() : init_policy_id) {
  response_ = portfolio_.best_response(init_policy_);
}

Action OsaAgent::act(const Observation& obs, Rng& rng) {
  return portfolio_.by_id(response_).act(obs, rng);
}

void OsaAgent::observe_transition(const State& pre_state, AgentId actor, Action action, Rng& rng) {
  ++step_counter_;
  if (actor == self_) return;
  belief_.update(pre_state, action, rng);
  response_ = portfolio_.best_response(belief_.mode_estimate());
  trace_.push_back(BeliefTraceEntry{step_counter_ - 1, belief_.current_policy_sample(),
                                    belief_.mode_estimate(), belief_.active_size()});
}

void OsaAgent::reset() {
  belief_.reset();
  response_ = portfolio_.best_response(init_policy_);
  trace_.clear();
  step_counter_ = 0;
}

KShotController::KShotController(int k) : k_(k) {
  if (k < 0) throw std::invalid_argument("KShotController: k must be >= 0");
}

KShotController::Decision KShotController::next_policy() const {
  if (game_index() > k_) throw std::logic_error("KShotController: sequence already complete");
  if (reuse_policy_.has_value()) return {true, *reuse_policy_};
  return {false, {}};
}

void KShotController::record_game(double reward, const std::string& final_policy_id) {
  rewards_.push_back(reward);
  final_policies_.push_back(final_policy_id);
  if (reward > 0.0) reuse_policy_ = final_policy_id;  // most recent positive game
}

}  // namespace osa
