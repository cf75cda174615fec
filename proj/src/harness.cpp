#include "maac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "maac/env_boxpushing.hpp"
#include "maac/env_toy.hpp"
#include "maac/env_warehouse.hpp"

namespace fs = std::filesystem;

namespace maac {

namespace {

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt_exact(double v) { return fmt(v, "%.17g"); }
std::string fmt_plot(double v) { return fmt(v, "%.9g"); }

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  if (env != "boxpushing" && env != "warehouse" && env != "toy")
    throw ConfigError("unknown environment '" + env + "'");
  if (env == "boxpushing" && size < 6)
    throw ConfigError("box pushing needs a grid of at least 6");
  if (env == "warehouse" && scenario != "A")
    throw ConfigError("unknown warehouse scenario '" + scenario + "'");
  if (env == "toy" && toy_spec_file.empty())
    throw ConfigError("toy runs need toy_spec=<file>");
  learner.validate();
  if (episodes < 0) throw ConfigError("episodes must be non-negative");
  if (eval_period < 1) throw ConfigError("eval_period must be at least 1");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be at least 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  os << "env=" << env << "\n";
  os << "size=" << size << "\n";
  os << "scenario=" << scenario << "\n";
  if (!toy_spec_file.empty()) os << "toy_spec=" << toy_spec_file << "\n";
  os << "algo=" << algo_name(learner.algo) << "\n";
  os << "actor_lr=" << fmt_exact(learner.actor_lr) << "\n";
  os << "critic_lr=" << fmt_exact(learner.critic_lr) << "\n";
  os << "i_train=" << learner.i_train << "\n";
  os << "i_target=" << learner.i_target << "\n";
  os << "n_step=" << learner.n_step << "\n";
  os << "gamma=" << fmt_exact(learner.gamma) << "\n";
  os << "eps_start=" << fmt_exact(learner.eps.start) << "\n";
  os << "eps_end=" << fmt_exact(learner.eps.end) << "\n";
  os << "eps_decay=" << learner.eps.decay << "\n";
  os << "critic_input=" << critic_input_name(learner.critic_input) << "\n";
  os << "dec_gru=" << learner.dec_gru << "\n";
  os << "cen_gru=" << learner.cen_gru << "\n";
  os << "episodes=" << episodes << "\n";
  os << "eval_period=" << eval_period << "\n";
  os << "eval_episodes=" << eval_episodes << "\n";
  os << "seeds=";
  for (size_t i = 0; i < seeds.size(); ++i)
    os << (i ? "," : "") << seeds[i];
  os << "\n";
  os << "out=" << out_dir << "\n";
  return os.str();
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "env") env = value;
  else if (key == "size") size = std::stoi(value);
  else if (key == "scenario") scenario = value;
  else if (key == "toy_spec") toy_spec_file = value;
  else if (key == "algo") learner.algo = parse_algo(value);
  else if (key == "actor_lr") learner.actor_lr = std::stod(value);
  else if (key == "critic_lr") learner.critic_lr = std::stod(value);
  else if (key == "i_train") learner.i_train = std::stoi(value);
  else if (key == "i_target") learner.i_target = std::stoi(value);
  else if (key == "n_step") learner.n_step = std::stoi(value);
  else if (key == "gamma") learner.gamma = std::stod(value);
  else if (key == "eps_start") learner.eps.start = std::stod(value);
  else if (key == "eps_end") learner.eps.end = std::stod(value);
  else if (key == "eps_decay") learner.eps.decay = std::stol(value);
  else if (key == "critic_input")
    learner.critic_input = parse_critic_input(value);
  else if (key == "dec_gru") learner.dec_gru = std::stoi(value);
  else if (key == "cen_gru") learner.cen_gru = std::stoi(value);
  else if (key == "episodes") episodes = std::stol(value);
  else if (key == "eval_period") eval_period = std::stoi(value);
  else if (key == "eval_episodes") eval_episodes = std::stoi(value);
  else if (key == "seeds") {
    seeds.clear();
    std::istringstream is(value);
    std::string tok;
    while (std::getline(is, tok, ','))
      if (!trim(tok).empty()) seeds.push_back(std::stoull(trim(tok)));
  } else if (key == "out") {
    out_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line without '=': " + line);
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  return parse(read_file(path));
}

std::string RunConfig::config_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : serialize()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::run_tag() const {
  std::string env_tag;
  if (env == "boxpushing") env_tag = "boxpushing" + std::to_string(size);
  else if (env == "warehouse") env_tag = "warehouse-" + scenario;
  else env_tag = "toy";
  return env_tag + "-" + algo_name(learner.algo);
}

std::unique_ptr<Env> make_env(const RunConfig& cfg) {
  if (cfg.env == "boxpushing")
    return std::make_unique<BoxPushingEnv>(cfg.size);
  if (cfg.env == "warehouse") return std::make_unique<WarehouseEnv>();
  if (cfg.env == "toy")
    return std::make_unique<ToyEnv>(
        ToySpec::parse(read_file(cfg.toy_spec_file)));
  throw ConfigError("unknown environment '" + cfg.env + "'");
}

std::string run_trial(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto env = make_env(cfg);
  const fs::path dir =
      fs::path(cfg.out_dir) / (cfg.run_tag() + "-seed" + std::to_string(seed));
  fs::create_directories(dir);
  {
    std::ofstream config(dir / "config.txt");
    if (!config) throw ConfigError("cannot write to '" + dir.string() + "'");
    config << cfg.serialize();
  }

  Learner learner(*env, cfg.learner, seed);
  std::ofstream csv(dir / "results.csv");
  if (!csv) throw ConfigError("cannot write to '" + dir.string() + "'");
  csv << "episode,mean_return";
  for (int j = 0; j < cfg.eval_episodes; ++j) csv << ",r" << j;
  csv << "\n";

  auto evaluate = [&](long ep) {
    double sum = 0;
    std::vector<double> returns;
    Rng erng(Rng::derive(seed, 0xE7A100000000ULL + static_cast<std::uint64_t>(ep)));
    for (int j = 0; j < cfg.eval_episodes; ++j) {
      auto s = run_episode(
          *env, learner.policy(), 0.0, cfg.learner.gamma,
          Rng::derive(seed, 0xE500000000ULL +
                                static_cast<std::uint64_t>(ep) * 1000 + j),
          erng, nullptr);
      returns.push_back(s.discounted_return);
      sum += s.discounted_return;
    }
    csv << ep << "," << fmt_exact(sum / cfg.eval_episodes);
    for (double r : returns) csv << "," << fmt_exact(r);
    csv << "\n";
    csv.flush();
  };

  evaluate(0);
  Rng train_rng(Rng::derive(seed, 1));
  for (long ep = 1; ep <= cfg.episodes; ++ep) {
    const double eps = cfg.learner.eps.at(ep - 1);
    EpisodeLog log;
    run_episode(*env, learner.policy(), eps, cfg.learner.gamma,
                Rng::derive(seed, 0x100000000ULL + static_cast<std::uint64_t>(ep)),
                train_rng, &log);
    log.policy_version = learner.policy_version();
    learner.add_episode(std::move(log));
    if (ep % cfg.learner.i_train == 0) learner.train_round();
    if (ep % cfg.learner.i_target == 0) learner.sync_targets();
    if (ep % cfg.eval_period == 0) evaluate(ep);
  }

  save_checkpoint((dir / "final.ckpt").string(),
                  {{"config_hash", cfg.config_hash()},
                   {"algo", algo_name(cfg.learner.algo)},
                   {"run", cfg.run_tag()},
                   {"seed", std::to_string(seed)},
                   {"episodes", std::to_string(cfg.episodes)}},
                  learner.checkpoint_nets());
  return dir.string();
}

std::vector<EvalPoint> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("episode,mean_return", 0) != 0)
    throw ConfigError("malformed results file '" + path + "'");
  std::vector<EvalPoint> points;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream is(line);
    std::string tok;
    EvalPoint p;
    if (!std::getline(is, tok, ',')) break;
    p.episode = std::stol(tok);
    if (!std::getline(is, tok, ','))
      throw ConfigError("malformed results row in '" + path + "'");
    p.mean = std::stod(tok);
    while (std::getline(is, tok, ',')) p.returns.push_back(std::stod(tok));
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<MethodSummary> aggregate(const std::vector<std::string>& run_dirs,
                                     int smooth_window) {
  if (run_dirs.empty()) return {};
  if (smooth_window < 1)
    throw ConfigError("smoothing window must be at least 1");

  std::vector<std::string> order;
  std::vector<std::vector<std::vector<EvalPoint>>> grouped;
  for (const auto& dir : run_dirs) {
    RunConfig cfg = RunConfig::parse_file(dir + "/config.txt");
    const std::string method = algo_name(cfg.learner.algo);
    auto points = read_results_csv(dir + "/results.csv");
    size_t g = 0;
    while (g < order.size() && order[g] != method) ++g;
    if (g == order.size()) {
      order.push_back(method);
      grouped.emplace_back();
    }
    grouped[g].push_back(std::move(points));
  }

  std::vector<MethodSummary> out;
  for (size_t g = 0; g < order.size(); ++g) {
    const auto& runs = grouped[g];
    const size_t n_points = runs[0].size();
    for (const auto& run : runs) {
      if (run.size() != n_points)
        throw ConfigError("mismatched evaluation grids for " + order[g]);
      for (size_t k = 0; k < n_points; ++k)
        if (run[k].episode != runs[0][k].episode)
          throw ConfigError("mismatched evaluation grids for " + order[g]);
    }

    std::vector<SummaryRow> raw(n_points);
    const double n = static_cast<double>(runs.size());
    for (size_t k = 0; k < n_points; ++k) {
      double mean = 0;
      for (const auto& run : runs) mean += run[k].mean;
      mean /= n;
      double var = 0;
      for (const auto& run : runs)
        var += (run[k].mean - mean) * (run[k].mean - mean);
      raw[k].episode = runs[0][k].episode;
      raw[k].mean = mean;
      raw[k].stderr_ =
          runs.size() > 1 ? std::sqrt(var / (n - 1)) / std::sqrt(n) : 0.0;
    }

    MethodSummary summary;
    summary.method = order[g];
    for (size_t k = 0; k < n_points; ++k) {
      const long lo = std::max<long>(0, static_cast<long>(k) -
                                            (smooth_window - 1) / 2);
      const long hi = std::min<long>(static_cast<long>(n_points) - 1,
                                     static_cast<long>(k) + smooth_window / 2);
      SummaryRow row;
      row.episode = raw[k].episode;
      for (long j = lo; j <= hi; ++j) {
        row.mean += raw[j].mean;
        row.stderr_ += raw[j].stderr_;
      }
      row.mean /= static_cast<double>(hi - lo + 1);
      row.stderr_ /= static_cast<double>(hi - lo + 1);
      summary.rows.push_back(row);
    }
    out.push_back(std::move(summary));
  }
  return out;
}

void emit_plotdata(std::ostream& os,
                   const std::vector<MethodSummary>& summary) {
  os << "episode,method,mean,stderr\n";
  for (const auto& method : summary)
    for (const auto& row : method.rows)
      os << row.episode << "," << method.method << "," << fmt_plot(row.mean)
         << "," << fmt_plot(row.stderr_) << "\n";
}

std::vector<MethodSummary> parse_plotdata(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "episode,method,mean,stderr")
    throw ConfigError("malformed plot data header");
  std::vector<MethodSummary> out;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    std::string ep, method, mean, se;
    if (!std::getline(row, ep, ',') || !std::getline(row, method, ',') ||
        !std::getline(row, mean, ',') || !std::getline(row, se, ','))
      throw ConfigError("malformed plot data row: " + line);
    if (out.empty() || out.back().method != method) {
      out.emplace_back();
      out.back().method = method;
    }
    out.back().rows.push_back(
        {std::stol(ep), std::stod(mean), std::stod(se)});
  }
  return out;
}

std::string replay(const RunConfig& cfg, const std::string& checkpoint_path,
                   std::uint64_t seed, double epsilon, double* out_return) {
  cfg.validate();
  auto env = make_env(cfg);
  Learner learner(*env, cfg.learner, 0);
  load_checkpoint(checkpoint_path, learner.checkpoint_nets());

  EpisodeLog log;
  Rng rng(Rng::derive(seed, 0x5EAF));
  auto sum = run_episode(*env, learner.policy(), epsilon, cfg.learner.gamma,
                         seed, rng, &log);
  if (out_return) *out_return = sum.discounted_return;

  std::ostringstream os;
  os << "seed " << seed << " length " << sum.length << " terminal "
     << (sum.terminal ? 1 : 0) << " return "
     << fmt_plot(sum.discounted_return) << " total "
     << fmt_plot(sum.total_reward) << "\n";
  auto rows = squeeze_joint(log.joint, cfg.learner.gamma, log.terminal);
  for (const auto& row : rows) {
    os << "t=" << row.t_start << " tau=" << row.tau << " r="
       << fmt_plot(row.rc);
    for (size_t i = 0; i < row.m.size(); ++i) {
      const auto& name = env->macros(static_cast<int>(i))[row.m[i]].name;
      os << (row.reselect[i] ? " +" : " ") << "a" << i << ":" << name;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace maac
