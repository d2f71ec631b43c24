#include "osa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "osa/hanabi.hpp"
#include "osa/hanabi_bots.hpp"
#include "osa/toy.hpp"

namespace osa::harness {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, delim)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

const EvalCell* EvalResult::find(const std::string& pi_c, const std::string& pi_s) const {
  for (const EvalCell& c : cells)
    if (c.pi_c == pi_c && c.pi_s == pi_s) return &c;
  return nullptr;
}

json EvalResult::to_json() const {
  json cells_j = json::array();
  for (const EvalCell& c : cells) {
    json cj{{"pi_c", c.pi_c},
            {"pi_s", c.pi_s},
            {"n", c.n_games},
            {"mean", c.mean},
            {"stderr", c.stderr_},
            {"rewards", c.rewards}};
    if (!c.identification.empty()) {
      cj["identification"] = c.identification;
      cj["identification_positive"] = c.identification_positive;
    }
    cells_j.push_back(std::move(cj));
  }
  return json{{"schema", "osa.eval.v1"},
              {"command", command},
              {"metadata", metadata},
              {"cells", cells_j}};
}

EvalResult EvalResult::from_json(const json& j) {
  EvalResult r;
  r.command = j.at("command").get<std::string>();
  r.metadata = j.at("metadata");
  for (const json& cj : j.at("cells")) {
    EvalCell c;
    c.pi_c = cj.at("pi_c").get<std::string>();
    c.pi_s = cj.at("pi_s").get<std::string>();
    c.n_games = cj.at("n").get<int>();
    c.mean = cj.at("mean").get<double>();
    c.stderr_ = cj.at("stderr").get<double>();
    c.rewards = cj.at("rewards").get<std::vector<double>>();
    if (cj.contains("identification")) {
      c.identification = cj.at("identification").get<std::map<std::string, int>>();
      c.identification_positive =
          cj.at("identification_positive").get<std::map<std::string, int>>();
    }
    r.cells.push_back(std::move(c));
  }
  return r;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double total = 0.0;
  for (double x : xs) total += x;
  return total / xs.size();
}

double stderr_of(const std::vector<double>& xs) {
  const size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / (n - 1));
  return sd / std::sqrt(static_cast<double>(n));
}

double welch_p_value(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double se = std::sqrt(stderr_of(xs) * stderr_of(xs) + stderr_of(ys) * stderr_of(ys));
  const double diff = mean_of(xs) - mean_of(ys);
  if (se == 0.0) return diff == 0.0 ? 1.0 : 0.0;
  const double t = diff / se;
  return std::erfc(std::abs(t) / std::sqrt(2.0));
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("OSA_THREADS")) {
    const int c = std::atoi(cap);
    if (c > 0) workers = std::min(workers, c);
  }
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

GameRecord run_game(const Environment& env, Agent& agent0, Agent& agent1, StreamId stream,
                    bool trace_belief) {
  const StreamId env_stream = stream.with("env");
  Rng env_rng = env_stream.rng();
  Rng rng0 = stream.with("agent0").rng();
  Rng rng1 = stream.with("agent1").rng();
  Agent* agents[2] = {&agent0, &agent1};
  Rng* rngs[2] = {&rng0, &rng1};

  GameRecord record;
  record.seed = env_stream.seed();
  std::unique_ptr<State> state = env.new_initial_state(env_rng);
  const double discount = env.spec().discount;
  double g = 1.0;
  while (!state->is_terminal()) {
    if (static_cast<int>(record.steps.size()) >= env.spec().max_steps)
      throw std::runtime_error("run_game: exceeded max_steps, environment did not terminate");
    const AgentId actor = state->current_player();
    const auto obs = env.observe(*state, actor);
    const Action action = agents[actor]->act(*obs, *rngs[actor]);
    agents[0]->observe_transition(*state, actor, action, rng0);
    agents[1]->observe_transition(*state, actor, action, rng1);
    auto [next, reward] = env.step(*state, action, env_rng);
    record.steps.push_back(GameStep{actor, obs->digest(), action, reward});
    record.final_reward += g * reward;
    g *= discount;
    state = std::move(next);
  }
  if (trace_belief) {
    for (Agent* a : agents)
      if (auto* osa = dynamic_cast<OsaAgent*>(a)) record.belief_trace = osa->trace();
  }
  return record;
}

EvalResult crossplay_matrix(const Environment& env, const Portfolio& portfolio, int n_games,
                            uint64_t seed) {
  if (n_games < 1) throw std::invalid_argument("crossplay_matrix: n_games must be positive");
  EvalResult result;
  result.command = "crossplay";
  result.metadata = json{{"seed", seed}, {"n_games", n_games}, {"env", env.name()}};

  const StreamId base(seed);
  struct Task {
    int row, col;
  };
  std::vector<Task> tasks;
  for (int i = 0; i < portfolio.size(); ++i)
    for (int j = 0; j < portfolio.size(); ++j) tasks.push_back({i, j});
  result.cells.resize(tasks.size());

  parallel_for(static_cast<int>(tasks.size()), [&](int t) {
    const auto& [i, j] = tasks[t];
    EvalCell cell;
    cell.pi_c = portfolio.at(i).id();
    cell.pi_s = portfolio.at(j).id();
    cell.n_games = n_games;
    for (int g = 0; g < n_games; ++g) {
      PolicyAgent a0(portfolio.policies()[i]);
      PolicyAgent a1(portfolio.policies()[j]);
      const StreamId gs =
          base.with(cell.pi_c).with(cell.pi_s).with(static_cast<uint64_t>(g)).with(uint64_t{0});
      cell.rewards.push_back(run_game(env, a0, a1, gs).final_reward);
    }
    cell.mean = mean_of(cell.rewards);
    cell.stderr_ = stderr_of(cell.rewards);
    result.cells[t] = std::move(cell);
  });
  return result;
}

EvalResult osa_eval(const Environment& env, const Portfolio& portfolio, bool exclude_partner,
                    int n_games, uint64_t seed, const BeliefConfig& belief_config) {
  if (n_games < 1) throw std::invalid_argument("osa_eval: n_games must be positive");
  if (exclude_partner && portfolio.size() < 2)
    throw std::invalid_argument("osa_eval: excluding the partner from a 1-policy portfolio "
                                "leaves Pi empty");
  EvalResult result;
  result.command = exclude_partner ? "osa-eval-exclude" : "osa-eval";
  result.metadata = json{{"seed", seed},
                         {"n_games", n_games},
                         {"env", env.name()},
                         {"exclude_partner", exclude_partner}};

  const StreamId base(seed);
  struct Task {
    std::string init, partner;
  };
  std::vector<Task> tasks;
  for (int j = 0; j < portfolio.size(); ++j) {
    const std::string pi_s = portfolio.at(j).id();
    const Portfolio working = exclude_partner ? portfolio.without(pi_s) : portfolio;
    for (int i = 0; i < working.size(); ++i) tasks.push_back({working.at(i).id(), pi_s});
  }
  result.cells.resize(tasks.size());

  parallel_for(static_cast<int>(tasks.size()), [&](int t) {
    const Task& task = tasks[t];
    const Portfolio working =
        exclude_partner ? portfolio.without(task.partner) : portfolio;
    EvalCell cell;
    cell.pi_c = task.init;
    cell.pi_s = task.partner;
    cell.n_games = n_games;
    for (int g = 0; g < n_games; ++g) {
      const StreamId gs =
          base.with(task.init).with(task.partner).with(static_cast<uint64_t>(g)).with(uint64_t{0});
      BeliefConfig cfg = belief_config;
      cfg.particle_seed = gs.with("particles").seed();
      OsaAgent a0(env, working, 0, cfg, task.init);
      PolicyAgent a1(portfolio.policies()[portfolio.index_of(task.partner)]);
      const GameRecord record = run_game(env, a0, a1, gs);
      cell.rewards.push_back(record.final_reward);
      cell.identification[a0.current_response()] += 1;
      if (record.final_reward > 0.0) cell.identification_positive[a0.current_response()] += 1;
    }
    cell.mean = mean_of(cell.rewards);
    cell.stderr_ = stderr_of(cell.rewards);
    result.cells[t] = std::move(cell);
  });
  return result;
}

EvalResult kshot_eval(const Environment& env, const Portfolio& portfolio,
                      const std::vector<int>& k_values, int n_sequences, uint64_t seed,
                      const BeliefConfig& belief_config, int n_crossplay_games,
                      bool carry_belief) {
  if (portfolio.size() < 2)
    throw std::invalid_argument("kshot_eval: need at least 2 policies (exclusion is always on)");
  EvalResult result;
  result.command = "kshot";
  result.metadata =
      json{{"seed", seed},
           {"n_sequences", n_sequences},
           {"env", env.name()},
           {"k_values", k_values},
           {"n_crossplay_games", n_crossplay_games},
           {"max_reference",
            "max over pi_c != pi_s of full-portfolio cross-play (self-play excluded)"}};

  // Reference row: cross-play max against each partner.
  const EvalResult xp = crossplay_matrix(env, portfolio, n_crossplay_games, seed);

  const StreamId base(seed);
  struct Task {
    int k;
    std::string partner;
  };
  std::vector<Task> tasks;
  for (int k : k_values)
    for (int j = 0; j < portfolio.size(); ++j) tasks.push_back({k, portfolio.at(j).id()});
  result.cells.resize(tasks.size());

  parallel_for(static_cast<int>(tasks.size()), [&](int t) {
    const Task& task = tasks[t];
    const Portfolio working = portfolio.without(task.partner);
    const std::string init = working.at(0).id();
    EvalCell cell;
    cell.pi_c = "osa_k" + std::to_string(task.k);
    cell.pi_s = task.partner;
    cell.n_games = n_sequences;
    for (int seq = 0; seq < n_sequences; ++seq) {
      KShotController controller(task.k);
      std::unique_ptr<OsaAgent> osa;  // persists across games with carry_belief
      double final_reward = 0.0;
      for (int gidx = 0; gidx <= task.k; ++gidx) {
        const StreamId gs = base.with(init)
                                .with(task.partner)
                                .with(static_cast<uint64_t>(seq))
                                .with(static_cast<uint64_t>(gidx));
        PolicyAgent partner(portfolio.policies()[portfolio.index_of(task.partner)]);
        const auto decision = controller.next_policy();
        double reward = 0.0;
        std::string final_policy;
        if (decision.reuse) {
          PolicyAgent fixed(working.policies()[working.index_of(decision.policy_id)]);
          reward = run_game(env, fixed, partner, gs).final_reward;
          final_policy = decision.policy_id;
        } else {
          if (osa == nullptr || !carry_belief) {
            BeliefConfig cfg = belief_config;
            cfg.particle_seed = gs.with("particles").seed();
            osa = std::make_unique<OsaAgent>(env, working, 0, cfg, init);
          }
          reward = run_game(env, *osa, partner, gs).final_reward;
          final_policy = osa->current_response();
        }
        controller.record_game(reward, final_policy);
        if (gidx == task.k) final_reward = reward;
      }
      cell.rewards.push_back(final_reward);
    }
    cell.mean = mean_of(cell.rewards);
    cell.stderr_ = stderr_of(cell.rewards);
    result.cells[t] = std::move(cell);
  });

  for (int j = 0; j < portfolio.size(); ++j) {
    const std::string pi_s = portfolio.at(j).id();
    const EvalCell* best = nullptr;
    for (const EvalCell& c : xp.cells)
      if (c.pi_s == pi_s && c.pi_c != pi_s && (best == nullptr || c.mean > best->mean)) best = &c;
    EvalCell ref;
    ref.pi_c = "max_crossplay";
    ref.pi_s = pi_s;
    ref.n_games = best->n_games;
    ref.mean = best->mean;
    ref.stderr_ = best->stderr_;
    ref.rewards = best->rewards;
    result.cells.push_back(std::move(ref));
  }
  return result;
}

std::string to_csv(const EvalResult& result) {
  std::string out = "pi_c,pi_s,n,mean,stderr\n";
  for (const EvalCell& c : result.cells) {
    out += c.pi_c + "," + c.pi_s + "," + std::to_string(c.n_games) + "," + fmt_double(c.mean) +
           "," + fmt_double(c.stderr_) + "\n";
  }
  return out;
}

std::vector<std::string> emit(const EvalResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string csv_path = dir + "/" + result.command + ".csv";
  const std::string json_path = dir + "/" + result.command + ".json";
  {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw std::runtime_error("emit: cannot write " + csv_path);
    f << to_csv(result);
  }
  {
    std::ofstream f(json_path, std::ios::binary);
    if (!f) throw std::runtime_error("emit: cannot write " + json_path);
    f << result.to_json().dump(2) << "\n";
  }
  return {csv_path, json_path};
}

IniConfig parse_ini(const std::string& text) {
  IniConfig cfg;
  std::string section;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const size_t comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      cfg[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value, got: " + line);
    cfg[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

IniConfig load_ini(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_ini(ss.str());
}

namespace {

std::string get_or(const IniConfig& cfg, const std::string& section, const std::string& key,
                   const std::string& fallback) {
  auto s = cfg.find(section);
  if (s == cfg.end()) return fallback;
  auto k = s->second.find(key);
  if (k == s->second.end()) return fallback;
  return k->second;
}

std::unique_ptr<Environment> build_env(const IniConfig& cfg) {
  const std::string type = get_or(cfg, "env", "type", "hanabi");
  if (type == "toy") {
    toy::ToyConfig tc;
    tc.card_values = std::stoi(get_or(cfg, "toy", "card_values", "4"));
    tc.signals = std::stoi(get_or(cfg, "toy", "signals", "4"));
    tc.rounds = std::stoi(get_or(cfg, "toy", "rounds", "8"));
    return std::make_unique<toy::ToyEnv>(tc);
  }
  if (type != "hanabi") throw std::invalid_argument("config: unknown env type " + type);
  hanabi::HanabiConfig hc = get_or(cfg, "env", "preset", "standard") == "mini"
                                ? hanabi::HanabiConfig::mini()
                                : hanabi::HanabiConfig::standard();
  if (auto v = get_or(cfg, "env", "colors", ""); !v.empty()) hc.colors = std::stoi(v);
  if (auto v = get_or(cfg, "env", "rank_counts", ""); !v.empty()) {
    hc.rank_counts.clear();
    for (const std::string& s : split(v, ',')) hc.rank_counts.push_back(std::stoi(s));
  }
  if (auto v = get_or(cfg, "env", "hand_size", ""); !v.empty()) hc.hand_size = std::stoi(v);
  if (auto v = get_or(cfg, "env", "info_tokens", ""); !v.empty()) hc.info_tokens = std::stoi(v);
  if (auto v = get_or(cfg, "env", "life_tokens", ""); !v.empty()) hc.life_tokens = std::stoi(v);
  if (auto v = get_or(cfg, "env", "zero_on_death", ""); !v.empty()) hc.zero_on_death = v == "true";
  return std::make_unique<hanabi::HanabiEnv>(hc);
}

std::unique_ptr<Portfolio> build_portfolio(const IniConfig& cfg, const Environment& env) {
  std::vector<std::shared_ptr<const Policy>> policies;
  const double eps = std::stod(get_or(cfg, "portfolio", "epsilon_noise", "0"));
  if (env.name() == "toy") {
    const std::string convs = get_or(cfg, "portfolio", "conventions", "0123,1230,2301");
    for (const std::string& c : split(convs, ',')) {
      std::vector<int> perm;
      for (char ch : c) perm.push_back(ch - '0');
      policies.push_back(std::make_shared<ConventionPolicy>("conv-" + c, std::move(perm)));
    }
  } else {
    const std::string bots = get_or(cfg, "portfolio", "bots", "valuebot,holmesbot,iggi,piers");
    for (const std::string& b : split(bots, ',')) policies.push_back(hanabi::make_bot(b));
  }
  if (eps > 0.0)
    for (auto& p : policies) p = std::make_shared<EpsilonNoisePolicy>(p, eps);
  std::map<std::string, std::string> br;
  for (const std::string& pair : split(get_or(cfg, "portfolio", "best_response", ""), ',')) {
    const auto parts = split(pair, ':');
    if (parts.size() != 2)
      throw std::invalid_argument("config: best_response entries are from:to pairs");
    br[parts[0]] = parts[1];
  }
  return std::make_unique<Portfolio>(std::move(policies), std::vector<double>{}, std::move(br));
}

}  // namespace

Experiment load_experiment(const IniConfig& cfg) {
  Experiment exp;
  exp.env = build_env(cfg);
  exp.portfolio = build_portfolio(cfg, *exp.env);
  exp.belief.epsilon = std::stod(get_or(cfg, "belief", "epsilon", "1e-9"));
  exp.belief.sweeps_per_turn = std::stoi(get_or(cfg, "belief", "sweeps", "5"));
  const std::string backend = get_or(cfg, "belief", "backend", "enumerate");
  if (backend == "enumerate")
    exp.belief.backend = HiddenBackend::kEnumerate;
  else if (backend == "sir")
    exp.belief.backend = HiddenBackend::kSir;
  else
    throw std::invalid_argument("config: backend must be enumerate or sir");
  exp.belief.sir_particles = std::stoi(get_or(cfg, "belief", "M", "1000"));
  exp.n_games = std::stoi(get_or(cfg, "eval", "n_games", "1000"));
  exp.n_sequences = std::stoi(get_or(cfg, "eval", "n_sequences", "1000"));
  exp.k_values.clear();
  for (const std::string& k : split(get_or(cfg, "eval", "k", "0,1,4"), ','))
    exp.k_values.push_back(std::stoi(k));
  exp.seed = std::stoull(get_or(cfg, "eval", "seed", "1"));
  exp.output_dir = get_or(cfg, "eval", "output_dir", "out");
  exp.partner = get_or(cfg, "eval", "partner", "");
  exp.init_policy = get_or(cfg, "eval", "init", "");
  exp.carry_belief = get_or(cfg, "eval", "carry_belief", "false") == "true";
  return exp;
}

}  // namespace osa::harness
