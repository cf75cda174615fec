#pragma once

#include <iosfwd>
#include <memory>

#include "maac/learner.hpp"

namespace maac {

// Full description of an experiment: environment, algorithm settings, and
// the measurement protocol. Serializes to a line-oriented key=value format.
struct RunConfig {
  std::string env = "boxpushing";  // boxpushing | warehouse | toy
  int size = 8;                    // box pushing grid size
  std::string scenario = "A";      // warehouse scenario
  std::string toy_spec_file;       // spec file when env == toy
  LearnerConfig learner;
  long episodes = 15000;
  int eval_period = 100;
  int eval_episodes = 10;
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "runs";

  void validate() const;
  std::string serialize() const;
  void apply(const std::string& key, const std::string& value);
  static RunConfig parse(const std::string& text);
  static RunConfig parse_file(const std::string& path);

  std::string config_hash() const;  // 64-bit FNV-1a of the serialized form
  std::string run_tag() const;      // env/algo slug used for directory names
};

std::unique_ptr<Env> make_env(const RunConfig& cfg);

struct EvalPoint {
  long episode = 0;
  double mean = 0;  // arithmetic mean of the test returns
  std::vector<double> returns;
};

// Trains one seed end to end: collection, training rounds every i_train
// episodes, target syncs every i_target, greedy evaluation every eval_period
// episodes. Writes config.txt, results.csv and final.ckpt into the returned
// directory (out_dir/run_tag-seedN).
std::string run_trial(const RunConfig& cfg, std::uint64_t seed);

std::vector<EvalPoint> read_results_csv(const std::string& path);

struct SummaryRow {
  long episode = 0;
  double mean = 0;
  double stderr_ = 0;  // standard error over seeds
};

struct MethodSummary {
  std::string method;
  std::vector<SummaryRow> rows;
};

// Per-method mean and standard error across run directories, then a centered
// moving average (window truncated at the edges). Seeds of the same method
// must share the evaluation grid.
std::vector<MethodSummary> aggregate(const std::vector<std::string>& run_dirs,
                                     int smooth_window = 10);

// Plot-ready CSV, columns: episode,method,mean,stderr
void emit_plotdata(std::ostream& os,
                   const std::vector<MethodSummary>& summary);
std::vector<MethodSummary> parse_plotdata(std::istream& is);

// Loads a checkpoint into a fresh learner and renders one greedy episode as
// a macro-level transcript. Fills `out_return` with the discounted return if
// non-null.
std::string replay(const RunConfig& cfg, const std::string& checkpoint_path,
                   std::uint64_t seed, double epsilon,
                   double* out_return = nullptr);

}  // namespace maac
