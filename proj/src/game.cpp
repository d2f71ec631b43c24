#include "osa/game.hpp"

#include <cstdio>

namespace osa {

std::string digest64(std::string_view text) {
  uint64_t f = 1469598103934665603ULL;
  for (unsigned char c : text) {
    f ^= c;
    f *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(f));
  return std::string(buf);
}

std::string Observation::digest() const { return digest64(to_string()); }

std::pair<std::unique_ptr<State>, double> Environment::transition(const State& state,
                                                                  const std::vector<Action>& joint,
                                                                  Rng& rng) const {
  if (state.is_terminal()) throw IllegalAction("transition: state is terminal");
  if (static_cast<int>(joint.size()) != spec().num_agents)
    throw IllegalAction("transition: joint action must have one entry per agent");
  return step(state, joint[state.current_player()], rng);
}

double GameRecord::recompute_return(double discount) const {
  double total = 0.0;
  double g = 1.0;
  for (const GameStep& s : steps) {
    total += g * s.reward;
    g *= discount;
  }
  return total;
}

json GameRecord::to_json() const {
  json steps_j = json::array();
  for (const GameStep& s : steps) {
    steps_j.push_back({{"agent", s.agent},
                       {"obs_digest", s.obs_digest},
                       {"action", s.action},
                       {"reward", s.reward}});
  }
  json j{{"schema", "osa.game_record.v1"},
         {"seed", seed},
         {"steps", steps_j},
         {"final_reward", final_reward}};
  if (!belief_trace.empty()) {
    json trace = json::array();
    for (const BeliefTraceEntry& e : belief_trace) {
      trace.push_back({{"step", e.step_index},
                       {"sampled_policy", e.sampled_policy},
                       {"mode_policy", e.mode_policy},
                       {"active_set_size", e.active_set_size}});
    }
    j["belief_trace"] = trace;
  }
  return j;
}

GameRecord GameRecord::from_json(const json& j) {
  GameRecord r;
  r.seed = j.at("seed").get<uint64_t>();
  r.final_reward = j.at("final_reward").get<double>();
  for (const json& s : j.at("steps")) {
    GameStep step;
    step.agent = s.at("agent").get<int>();
    step.obs_digest = s.at("obs_digest").get<std::string>();
    step.action = s.at("action").get<Action>();
    step.reward = s.at("reward").get<double>();
    r.steps.push_back(std::move(step));
  }
  if (j.contains("belief_trace")) {
    for (const json& e : j.at("belief_trace")) {
      BeliefTraceEntry entry;
      entry.step_index = e.at("step").get<int>();
      entry.sampled_policy = e.at("sampled_policy").get<std::string>();
      entry.mode_policy = e.at("mode_policy").get<std::string>();
      entry.active_set_size = e.at("active_set_size").get<int>();
      r.belief_trace.push_back(std::move(entry));
    }
  }
  return r;
}

}  // namespace osa
