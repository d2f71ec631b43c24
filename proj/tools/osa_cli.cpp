// Command-line batch runner: cross-play matrices, OSA evaluations, k-shot
// curves, oracle self-checks and single traced games. All commands are
// deterministic given (config, seed).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "osa/agent.hpp"
#include "osa/belief.hpp"
#include "osa/hanabi.hpp"
#include "osa/hanabi_bots.hpp"
#include "osa/harness.hpp"
#include "osa/oracle.hpp"
#include "osa/policy.hpp"
#include "osa/toy.hpp"

namespace {

using namespace osa;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool has_seed = false;
  int n_games = 0;
};

harness::Experiment load(const CommonOpts& opts) {
  harness::IniConfig ini;
  if (!opts.config_path.empty()) ini = harness::load_ini(opts.config_path);
  harness::Experiment exp = harness::load_experiment(ini);
  if (opts.has_seed) exp.seed = opts.seed;
  if (opts.n_games > 0) exp.n_games = opts.n_games;
  if (!opts.out_dir.empty()) exp.output_dir = opts.out_dir;
  return exp;
}

void report(const std::vector<std::string>& paths) {
  for (const std::string& p : paths) std::cout << "wrote " << p << "\n";
}

// ---- oracle-check fixtures --------------------------------------------------

bool check(const std::string& name, double value, double threshold) {
  const bool ok = value <= threshold;
  std::printf("%s %s: %.3g (threshold %.3g)\n", ok ? "PASS" : "FAIL", name.c_str(), value,
              threshold);
  return ok;
}

// Pre-action states (partner to move) from seeded random playouts, with the
// action the random agent actually took.
std::vector<std::pair<std::unique_ptr<State>, Action>> sample_positions(const Environment& env,
                                                                        int count,
                                                                        uint64_t seed) {
  std::vector<std::pair<std::unique_ptr<State>, Action>> out;
  UniformRandomPolicy random_policy;
  Rng rng(seed);
  while (static_cast<int>(out.size()) < count) {
    Rng env_rng(rng.u64());
    auto state = env.new_initial_state(env_rng);
    while (!state->is_terminal()) {
      const AgentId actor = state->current_player();
      const auto obs = env.observe(*state, actor);
      const Action action = random_policy.act(*obs, rng);
      if (actor == 1 && static_cast<int>(out.size()) < count)
        out.emplace_back(state->clone(), action);
      state = env.step(*state, action, env_rng).first;
    }
  }
  return out;
}

double bayes_step_error(const Environment& env, const Portfolio& portfolio, int positions,
                        uint64_t seed) {
  double worst = 0.0;
  auto fixtures = sample_positions(env, positions, seed);
  for (auto& [state, action] : fixtures) {
    BeliefConfig cfg;
    GibbsBelief belief(env, portfolio, 0, cfg, portfolio.at(0).id());
    const auto joint = oracle::exact_step_joint(env, *state, action, portfolio.policies(),
                                                portfolio.prior(), 0);
    // Hidden posterior conditioned on the current policy sample.
    auto [support, hidden] = belief.step_hidden_posterior(*state, action);
    const int p = 0;  // init policy is portfolio.at(0)
    std::vector<double> oracle_hidden = joint.probs[p];
    double row_total = 0.0;
    for (double v : oracle_hidden) row_total += v;
    for (double& v : oracle_hidden) v /= row_total;
    for (size_t i = 0; i < hidden.size(); ++i)
      worst = std::max(worst, std::abs(hidden[i] - oracle_hidden[i]));
    // Policy posterior conditioned on each hidden assignment.
    for (size_t f = 0; f < std::min<size_t>(joint.assignments.size(), 5); ++f) {
      const auto probs = belief.step_policy_posterior(*state, action, joint.assignments[f]);
      std::vector<double> col(portfolio.size());
      double col_total = 0.0;
      for (int q = 0; q < portfolio.size(); ++q) {
        col[q] = joint.probs[q][f];
        col_total += col[q];
      }
      if (col_total <= 0.0) continue;
      for (double& v : col) v /= col_total;
      for (int q = 0; q < portfolio.size(); ++q)
        worst = std::max(worst, std::abs(probs[q] - col[q]));
    }
  }
  return worst;
}

double gibbs_stationarity_tv(const Environment& env, const Portfolio& portfolio,
                             const State& state, Action action, int sweeps, uint64_t seed) {
  BeliefConfig cfg;
  cfg.sweeps_per_turn = 1;
  GibbsBelief belief(env, portfolio, 0, cfg, portfolio.at(0).id());
  Rng rng(seed);
  std::map<std::pair<std::string, HiddenAssignment>, int> counts;
  for (int i = 0; i < sweeps; ++i) {
    belief.gibbs_sweep(state, action, rng);
    counts[{belief.current_policy_sample(), belief.current_hidden_sample()}] += 1;
  }
  const auto joint = oracle::exact_step_joint(env, state, action, portfolio.policies(),
                                              portfolio.prior(), 0);
  std::vector<double> empirical, exact;
  for (size_t p = 0; p < joint.policy_ids.size(); ++p)
    for (size_t f = 0; f < joint.assignments.size(); ++f) {
      exact.push_back(joint.probs[p][f]);
      auto it = counts.find({joint.policy_ids[p], joint.assignments[f]});
      empirical.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second) / sweeps);
    }
  return oracle::total_variation(empirical, exact);
}

double sir_consistency_tv(const Environment& env, const Portfolio& portfolio, const State& state,
                          Action action) {
  BeliefConfig enum_cfg;
  GibbsBelief enum_belief(env, portfolio, 0, enum_cfg, portfolio.at(0).id());
  auto [enum_support, enum_probs] = enum_belief.step_hidden_posterior(state, action);

  BeliefConfig sir_cfg;
  sir_cfg.backend = HiddenBackend::kSir;
  sir_cfg.sir_particles = 1000;
  sir_cfg.particle_seed = 99;
  GibbsBelief sir_belief(env, portfolio, 0, sir_cfg, portfolio.at(0).id());
  auto [sir_support, sir_probs] = sir_belief.step_hidden_posterior(state, action);

  std::map<HiddenAssignment, double> agg;
  for (size_t i = 0; i < sir_support.size(); ++i) agg[sir_support[i]] += sir_probs[i];
  std::vector<double> p, q;
  for (size_t i = 0; i < enum_support.size(); ++i) {
    p.push_back(enum_probs[i]);
    auto it = agg.find(enum_support[i]);
    q.push_back(it == agg.end() ? 0.0 : it->second);
    if (it != agg.end()) agg.erase(it);
  }
  for (const auto& [f, w] : agg) {
    p.push_back(0.0);
    q.push_back(w);
  }
  return oracle::total_variation(p, q);
}

int run_oracle_check(bool quick) {
  bool ok = true;
  const int positions = quick ? 10 : 50;
  const int sweeps = 5000;

  // Toy fixture: 3 noisy conventions, a partner-signal state.
  toy::ToyEnv toy_env(toy::ToyConfig{});
  std::vector<std::shared_ptr<const Policy>> convs = {
      std::make_shared<ConventionPolicy>("conv-0123", std::vector<int>{0, 1, 2, 3}),
      std::make_shared<ConventionPolicy>("conv-1230", std::vector<int>{1, 2, 3, 0}),
      std::make_shared<ConventionPolicy>("conv-2301", std::vector<int>{2, 3, 0, 1})};
  for (auto& c : convs) c = std::make_shared<EpsilonNoisePolicy>(c, 0.1);
  Portfolio toy_portfolio(convs);

  // Advance to round 1 so the partner (seat 1) holds the hidden card.
  Rng toy_rng(7);
  auto toy_state = toy_env.new_initial_state(toy_rng);
  toy_state = toy_env.step(*toy_state, 0, toy_rng).first;                    // seat 0 signals
  toy_state = toy_env.step(*toy_state, toy_env.config().signals, toy_rng).first;  // seat 1 guesses
  const Action toy_signal = 2;

  ok &= check("toy gibbs stationarity TV (5000 sweeps)",
              gibbs_stationarity_tv(toy_env, toy_portfolio, *toy_state, toy_signal, sweeps, 11),
              0.05);

  // Mini-Hanabi fixture with noisy bots.
  hanabi::HanabiEnv mini(hanabi::HanabiConfig::mini());
  Portfolio noisy_bots(hanabi::standard_bots(0.1));
  auto hanabi_positions = sample_positions(mini, 1, 21);
  ok &= check("mini-hanabi gibbs stationarity TV (5000 sweeps)",
              gibbs_stationarity_tv(mini, noisy_bots, *hanabi_positions[0].first,
                                    hanabi_positions[0].second, sweeps, 13),
              0.05);

  ok &= check("bayes-step exactness vs oracle (mini-hanabi)",
              bayes_step_error(mini, noisy_bots, positions, 31), 1e-9);
  ok &= check("bayes-step exactness vs oracle (toy)",
              bayes_step_error(toy_env, toy_portfolio, positions, 37), 1e-9);

  ok &= check("SIR vs enumerate posterior TV",
              sir_consistency_tv(mini, noisy_bots, *hanabi_positions[0].first,
                                 hanabi_positions[0].second),
              0.1);

  std::printf("%s oracle-check\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"On-the-fly strategy adaptation simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  bool exclude_partner = false;
  bool trace_belief = false;
  bool quick = false;
  std::string k_list;
  int n_sequences = 0;
  std::string partner_override;
  std::string init_override;
  uint64_t play_seed = 1;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", opts.config_path, "INI config file");
    if (needs_config) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "seed override")->each([&](const std::string&) {
      opts.has_seed = true;
    });
    cmd->add_option("--games", opts.n_games, "games per cell override");
  };

  auto* crossplay = app.add_subcommand("crossplay", "cross-play matrix over the portfolio");
  add_common(crossplay, true);

  auto* osa_eval_cmd = app.add_subcommand("osa-eval", "OSA vs each portfolio policy");
  add_common(osa_eval_cmd, true);
  osa_eval_cmd->add_flag("--exclude-partner", exclude_partner,
                         "remove pi_S from the belief's portfolio for its column");

  auto* kshot = app.add_subcommand("kshot", "k-shot reuse curves (exclusion always on)");
  add_common(kshot, true);
  kshot->add_option("--k", k_list, "comma-separated k values (default 0,1,4)");
  kshot->add_option("--sequences", n_sequences, "sequences per (k, partner)");

  auto* oracle_cmd = app.add_subcommand("oracle-check", "exact-inference self checks");
  oracle_cmd->add_flag("--quick", quick, "smaller fixture sizes");

  auto* play = app.add_subcommand("play-one", "run one game and dump the record");
  add_common(play, true);
  play->add_option("--seed", play_seed, "game seed");
  play->add_flag("--trace-belief", trace_belief, "include the belief trace in the record");
  play->add_option("--partner", partner_override, "partner policy id");
  play->add_option("--init", init_override, "initial policy estimate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (crossplay->parsed()) {
      const auto exp = load(opts);
      const auto result =
          harness::crossplay_matrix(*exp.env, *exp.portfolio, exp.n_games, exp.seed);
      report(harness::emit(result, exp.output_dir));
    } else if (osa_eval_cmd->parsed()) {
      const auto exp = load(opts);
      const auto result = harness::osa_eval(*exp.env, *exp.portfolio, exclude_partner,
                                            exp.n_games, exp.seed, exp.belief);
      report(harness::emit(result, exp.output_dir));
    } else if (kshot->parsed()) {
      auto exp = load(opts);
      if (!k_list.empty()) {
        exp.k_values.clear();
        std::istringstream is(k_list);
        std::string tok;
        while (std::getline(is, tok, ',')) exp.k_values.push_back(std::stoi(tok));
      }
      if (n_sequences > 0) exp.n_sequences = n_sequences;
      const auto result =
          harness::kshot_eval(*exp.env, *exp.portfolio, exp.k_values, exp.n_sequences, exp.seed,
                              exp.belief, exp.n_games, exp.carry_belief);
      report(harness::emit(result, exp.output_dir));
    } else if (oracle_cmd->parsed()) {
      return run_oracle_check(quick);
    } else if (play->parsed()) {
      const auto exp = load(opts);
      const std::string partner_id =
          !partner_override.empty() ? partner_override
                                    : (!exp.partner.empty() ? exp.partner : exp.portfolio->at(0).id());
      const std::string init_id = !init_override.empty() ? init_override : exp.init_policy;
      BeliefConfig cfg = exp.belief;
      const StreamId stream =
          StreamId(play_seed).with(init_id.empty() ? exp.portfolio->at(0).id() : init_id)
              .with(partner_id).with(uint64_t{0}).with(uint64_t{0});
      cfg.particle_seed = stream.with("particles").seed();
      OsaAgent a0(*exp.env, *exp.portfolio, 0, cfg, init_id);
      PolicyAgent a1(exp.portfolio->policies()[exp.portfolio->index_of(partner_id)]);
      const GameRecord record = harness::run_game(*exp.env, a0, a1, stream, trace_belief);
      const json j = record.to_json();
      std::filesystem::create_directories(exp.output_dir);
      const std::string path = exp.output_dir + "/play_one.json";
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + path);
      f << j.dump(2) << "\n";
      std::cout << j.dump(2) << "\nwrote " << path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
