#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osa/agent.hpp"
#include "osa/belief.hpp"
#include "osa/game.hpp"
#include "osa/policy.hpp"

namespace osa::harness {

// One row of an evaluation table: (complex policy or init, simple policy)
// with mean +/- standard error and optional identification histograms.
struct EvalCell {
  std::string pi_c;
  std::string pi_s;
  int n_games = 0;
  double mean = 0.0;
  double stderr_ = 0.0;  // sample sd / sqrt(n)
  std::vector<double> rewards;
  std::map<std::string, int> identification;           // final pi_C over all games
  std::map<std::string, int> identification_positive;  // only games with reward > 0
};

struct EvalResult {
  std::string command;
  json metadata;
  std::vector<EvalCell> cells;

  const EvalCell* find(const std::string& pi_c, const std::string& pi_s) const;
  json to_json() const;
  static EvalResult from_json(const json& j);
};

double mean_of(const std::vector<double>& xs);
double stderr_of(const std::vector<double>& xs);
// Two-sided Welch test p-value (normal approximation; both samples large).
double welch_p_value(const std::vector<double>& xs, const std::vector<double>& ys);

// Runs fn(i) for i in [0, n) on a worker pool (capped by OSA_THREADS);
// results must be written into per-index slots so parallel == serial.
void parallel_for(int n, const std::function<void(int)>& fn);

// Plays one full game; agent0 has seat 0. The stream fans out into
// independent env/agent substreams, so records are byte-identical given the
// same stream.
GameRecord run_game(const Environment& env, Agent& agent0, Agent& agent1, StreamId stream,
                    bool trace_belief = false);

// All ordered pairs (pi_c, pi_s) including the self-play diagonal,
// independent seed streams per cell.
EvalResult crossplay_matrix(const Environment& env, const Portfolio& portfolio, int n_games,
                            uint64_t seed);

// OSA (seat 0) against each pi_s for every initialization pi_c_0; with
// exclude_partner, pi_s is removed from the belief's portfolio for its
// column. Emits identification histograms of the final response policy.
EvalResult osa_eval(const Environment& env, const Portfolio& portfolio, bool exclude_partner,
                    int n_games, uint64_t seed, const BeliefConfig& belief_config);

// k-shot sequences (k+1 games vs the same partner, exclusion always on),
// reporting the final game's reward per k plus the max-cross-play reference
// row (max over pi_c != pi_s of the full-portfolio cross-play).
EvalResult kshot_eval(const Environment& env, const Portfolio& portfolio,
                      const std::vector<int>& k_values, int n_sequences, uint64_t seed,
                      const BeliefConfig& belief_config, int n_crossplay_games,
                      bool carry_belief = false);

// Writes <dir>/<command>.csv and <dir>/<command>.json; returns the paths.
std::vector<std::string> emit(const EvalResult& result, const std::string& dir);
std::string to_csv(const EvalResult& result);

// ---- configuration ---------------------------------------------------------

// Minimal INI: [section] headers, key = value lines, '#' comments.
using IniConfig = std::map<std::string, std::map<std::string, std::string>>;
IniConfig parse_ini(const std::string& text);
IniConfig load_ini(const std::string& path);

struct Experiment {
  std::unique_ptr<Environment> env;
  std::unique_ptr<Portfolio> portfolio;
  BeliefConfig belief;
  int n_games = 1000;
  int n_sequences = 1000;
  std::vector<int> k_values = {0, 1, 4};
  uint64_t seed = 1;
  std::string output_dir = "out";
  std::string partner;      // play-one
  std::string init_policy;  // play-one / kshot initialization
  bool carry_belief = false;
};

Experiment load_experiment(const IniConfig& cfg);

}  // namespace osa::harness
