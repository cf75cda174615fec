#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>

#include "maac/harness.hpp"

using namespace maac;

namespace {

// shared config options; command-line flags override the config file
struct ConfigArgs {
  std::string config_file;
  std::string env, scenario, algo, out;
  int size = 0;
  long episodes = -1;
  std::vector<std::uint64_t> seeds;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "config file (key=value lines)");
    cmd->add_option("--env", env, "environment: boxpushing, warehouse, toy");
    cmd->add_option("--size", size, "box pushing grid size");
    cmd->add_option("--scenario", scenario, "warehouse scenario");
    cmd->add_option("--algo", algo,
                    "mac-iac, mac-cac, naive-mac-iacc or mac-iaicc");
    cmd->add_option("--seed", seeds, "trial seed (repeatable)");
    cmd->add_option("--episodes", episodes, "training episodes per trial");
    cmd->add_option("--out", out, "output directory");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_file.empty()) cfg = RunConfig::parse_file(config_file);
    if (!env.empty()) cfg.apply("env", env);
    if (size > 0) cfg.size = size;
    if (!scenario.empty()) cfg.scenario = scenario;
    if (!algo.empty()) cfg.apply("algo", algo);
    if (episodes >= 0) cfg.episodes = episodes;
    if (!seeds.empty()) cfg.seeds = seeds;
    if (!out.empty()) cfg.out_dir = out;
    cfg.validate();
    return cfg;
  }
};

int cmd_train(const ConfigArgs& args) {
  RunConfig cfg = args.resolve();
  const int n = static_cast<int>(cfg.seeds.size());
  std::vector<std::string> dirs(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) dirs[i] = run_trial(cfg, cfg.seeds[i]);
  for (const auto& dir : dirs) std::cout << dir << "\n";
  return 0;
}

int cmd_eval(const ConfigArgs& args, const std::string& checkpoint,
             int episodes) {
  RunConfig cfg = args.resolve();
  auto env = make_env(cfg);
  Learner learner(*env, cfg.learner, 0);
  load_checkpoint(checkpoint, learner.checkpoint_nets());

  double sum = 0, sumsq = 0;
  const std::uint64_t seed = cfg.seeds.front();
  Rng rng(Rng::derive(seed, 0xE7A1));
  for (int e = 0; e < episodes; ++e) {
    auto s = run_episode(*env, learner.policy(), 0.0, cfg.learner.gamma,
                         Rng::derive(seed, 0xE500 + e), rng, nullptr);
    sum += s.discounted_return;
    sumsq += s.discounted_return * s.discounted_return;
  }
  const double mean = sum / episodes;
  const double var =
      episodes > 1 ? (sumsq - episodes * mean * mean) / (episodes - 1) : 0.0;
  std::cout << "episodes " << episodes << " mean_return " << mean
            << " stderr " << std::sqrt(std::max(var, 0.0) / episodes) << "\n";
  return 0;
}

int cmd_replay(const ConfigArgs& args, const std::string& checkpoint,
               double epsilon) {
  RunConfig cfg = args.resolve();
  std::cout << replay(cfg, checkpoint, cfg.seeds.front(), epsilon);
  return 0;
}

int cmd_aggregate(const std::vector<std::string>& dirs, int window,
                  const std::string& out) {
  auto summary = aggregate(dirs, window);
  if (out.empty()) {
    emit_plotdata(std::cout, summary);
  } else {
    std::ofstream os(out);
    if (!os) throw ConfigError("cannot write '" + out + "'");
    emit_plotdata(os, summary);
    std::cout << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asynchronous macro-action actor-critic training harness"};
  app.require_subcommand(1);

  ConfigArgs train_args, eval_args, replay_args;
  std::string checkpoint;
  int eval_count = 10;
  double replay_eps = 0.0;
  std::vector<std::string> run_dirs;
  int window = 10;
  std::string agg_out;

  auto* train = app.add_subcommand("train", "train one or more seeds");
  train_args.attach(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint greedily");
  eval_args.attach(eval);
  eval->add_option("checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--eval-episodes", eval_count, "evaluation episodes");

  auto* rep = app.add_subcommand("replay", "render one episode transcript");
  replay_args.attach(rep);
  rep->add_option("checkpoint", checkpoint, "checkpoint file")->required();
  rep->add_option("--epsilon", replay_eps, "exploration during replay");

  auto* agg = app.add_subcommand("aggregate",
                                 "summarize run directories (mean +- SE)");
  agg->add_option("dirs", run_dirs, "run directories")->required();
  agg->add_option("--window", window, "smoothing window (centered)");
  agg->add_option("--out", agg_out, "output CSV (stdout when omitted)");

  auto* plot = app.add_subcommand("plotdata",
                                  "emit plot-ready CSV from run directories");
  plot->add_option("dirs", run_dirs, "run directories")->required();
  plot->add_option("--window", window, "smoothing window (centered)");
  plot->add_option("--out", agg_out, "output CSV (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args, checkpoint, eval_count);
    if (rep->parsed()) return cmd_replay(replay_args, checkpoint, replay_eps);
    if (agg->parsed() || plot->parsed())
      return cmd_aggregate(run_dirs, window, agg_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
