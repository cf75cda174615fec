#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "maac/harness.hpp"
#include "maac/toy_oracle.hpp"
#include "test_util.hpp"

using namespace maac;
using namespace maac::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = "harness_test_tmp";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// a small toy run that finishes in well under a second
RunConfig toy_config(const std::string& out_sub) {
  fs::create_directories(kTmp);
  const fs::path spec_path = kTmp / "toy.spec";
  if (!fs::exists(spec_path)) {
    Rng rng(404);
    spit(spec_path, random_toy_spec(rng, 2).serialize());
  }
  RunConfig cfg;
  cfg.env = "toy";
  cfg.toy_spec_file = spec_path.string();
  cfg.learner.algo = Algo::MacIaicc;
  cfg.learner.i_train = 4;
  cfg.learner.i_target = 8;
  cfg.learner.gamma = 0.95;
  cfg.learner.eps = {1.0, 0.05, 30};
  cfg.episodes = 40;
  cfg.eval_period = 20;
  cfg.eval_episodes = 3;
  cfg.seeds = {0};
  cfg.out_dir = (kTmp / out_sub).string();
  return cfg;
}

// synthetic single-method run directory with a fixed results series
void fake_run(const fs::path& dir, const std::string& algo,
              const std::vector<double>& means) {
  RunConfig cfg = toy_config("fixture");
  cfg.learner.algo = parse_algo(algo);
  spit(dir / "config.txt", cfg.serialize());
  std::ostringstream csv;
  csv << "episode,mean_return,r0\n";
  for (size_t k = 0; k < means.size(); ++k)
    csv << k * 100 << "," << means[k] << "," << means[k] << "\n";
  spit(dir / "results.csv", csv.str());
}

}  // namespace

TEST_CASE("run configs round-trip through their text form") {
  RunConfig cfg;
  cfg.env = "boxpushing";
  cfg.size = 10;
  cfg.learner.algo = Algo::MacCac;
  cfg.learner.actor_lr = 0.0005;
  cfg.learner.n_step = 3;
  cfg.seeds = {3, 7, 11};
  const std::string text = cfg.serialize();
  RunConfig back = RunConfig::parse(text);
  CHECK(back.serialize() == text);
  CHECK(back.config_hash() == cfg.config_hash());

  back.learner.critic_lr *= 2;
  CHECK(back.config_hash() != cfg.config_hash());

  CHECK_THROWS_AS(RunConfig::parse("bogus_key=1"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("no equals sign"), ConfigError);
  RunConfig bad;
  bad.env = "atari";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("presets carry the published hyperparameters") {
  const fs::path presets = fs::path(MAAC_SOURCE_DIR) / "presets";

  auto load = [&](const std::string& name) {
    return RunConfig::parse_file((presets / (name + ".cfg")).string());
  };

  RunConfig c = load("boxpushing8-mac-iaicc");
  CHECK(c.learner.actor_lr == 0.0003);
  CHECK(c.learner.critic_lr == 0.003);
  CHECK(c.learner.i_train == 48);
  CHECK(c.learner.i_target == 144);
  CHECK(c.learner.n_step == 0);
  CHECK(c.learner.eps.start == 1.0);
  CHECK(c.learner.eps.end == 0.01);
  CHECK(c.learner.eps.decay == 4000);
  CHECK(c.learner.critic_input == CriticInputKind::State);
  CHECK(c.learner.gamma == 0.95);
  CHECK(c.episodes == 40000);

  c = load("boxpushing8-mac-cac");
  CHECK(c.learner.actor_lr == 0.0005);
  CHECK(c.learner.critic_lr == 0.003);
  CHECK(c.learner.i_train == 48);
  CHECK(c.learner.i_target == 48);
  CHECK(c.learner.n_step == 3);

  c = load("boxpushing6-mac-iac");
  CHECK(c.learner.actor_lr == 0.0005);
  CHECK(c.learner.critic_lr == 0.001);
  CHECK(c.learner.i_target == 48);
  CHECK(c.learner.n_step == 5);

  c = load("boxpushing12-naive-mac-iacc");
  CHECK(c.learner.actor_lr == 0.0005);
  CHECK(c.learner.critic_lr == 0.001);
  CHECK(c.learner.i_train == 48);
  CHECK(c.learner.i_target == 96);
  CHECK(c.learner.n_step == 0);
  CHECK(c.learner.eps.decay == 6000);

  c = load("warehouse-A-mac-iaicc");
  CHECK(c.learner.actor_lr == 0.0005);
  CHECK(c.learner.critic_lr == 0.0005);
  CHECK(c.learner.i_train == 4);
  CHECK(c.learner.i_target == 32);
  CHECK(c.learner.n_step == 5);
  CHECK(c.learner.eps.decay == 10000);
  CHECK(c.learner.critic_input == CriticInputKind::JointHistory);

  c = load("warehouse-A-naive-mac-iacc");
  CHECK(c.learner.actor_lr == 0.0003);
  CHECK(c.learner.critic_lr == 0.003);
  CHECK(c.learner.n_step == 3);

  c = load("desk-boxpushing8-mac-iaicc");
  CHECK(c.episodes == 15000);
  CHECK(c.seeds.size() == 5);

  // every shipped preset must validate
  int count = 0;
  for (const auto& entry : fs::directory_iterator(presets)) {
    if (entry.path().extension() != ".cfg") continue;
    RunConfig cfg = RunConfig::parse_file(entry.path().string());
    cfg.validate();
    ++count;
  }
  CHECK(count == 48);
}

TEST_CASE("a zero-episode trial logs exactly the initial evaluation") {
  fs::remove_all(kTmp / "zero");
  RunConfig cfg = toy_config("zero");
  cfg.episodes = 0;
  const std::string dir = run_trial(cfg, 0);
  auto points = read_results_csv(dir + "/results.csv");
  REQUIRE(points.size() == 1);
  CHECK(points[0].episode == 0);
  REQUIRE(points[0].returns.size() == 3);
  double mean = 0;
  for (double r : points[0].returns) mean += r;
  CHECK(points[0].mean == mean / 3.0);
}

TEST_CASE("trials are bit-reproducible and follow the eval schedule") {
  fs::remove_all(kTmp / "rep1");
  RunConfig cfg1 = toy_config("rep1");
  const std::string d1 = run_trial(cfg1, 5);
  const std::string csv1 = slurp(fs::path(d1) / "results.csv");
  const std::string ckpt1 = slurp(fs::path(d1) / "final.ckpt");

  // the identical invocation overwrites the directory with identical bytes
  const std::string d2 = run_trial(cfg1, 5);
  CHECK(d2 == d1);
  CHECK(slurp(fs::path(d1) / "results.csv") == csv1);
  CHECK(slurp(fs::path(d1) / "final.ckpt") == ckpt1);

  auto points = read_results_csv(d1 + "/results.csv");
  REQUIRE(points.size() == 3);  // episodes 0, 20, 40
  CHECK(points[0].episode == 0);
  CHECK(points[1].episode == 20);
  CHECK(points[2].episode == 40);

  // a different seed must not collide
  const std::string d3 = run_trial(cfg1, 6);
  CHECK(slurp(fs::path(d1) / "results.csv") !=
        slurp(fs::path(d3) / "results.csv"));
}

TEST_CASE("aggregation reproduces hand-computed means and errors") {
  fs::remove_all(kTmp / "agg");
  fake_run(kTmp / "agg" / "a0", "mac-iac", {1.0, 2.0});
  fake_run(kTmp / "agg" / "a1", "mac-iac", {3.0, 4.0});
  fake_run(kTmp / "agg" / "a2", "mac-iac", {5.0, 9.0});
  auto summary = aggregate({(kTmp / "agg" / "a0").string(),
                            (kTmp / "agg" / "a1").string(),
                            (kTmp / "agg" / "a2").string()},
                           1);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].method == "mac-iac");
  REQUIRE(summary[0].rows.size() == 2);
  CHECK(summary[0].rows[0].mean == doctest::Approx(3.0));
  CHECK(summary[0].rows[1].mean == doctest::Approx(5.0));
  // sample sd {1,3,5} = 2, {2,4,9} = sqrt(13); SE = sd/sqrt(3)
  CHECK(summary[0].rows[0].stderr_ == doctest::Approx(2.0 / std::sqrt(3.0)));
  CHECK(summary[0].rows[1].stderr_ ==
        doctest::Approx(std::sqrt(13.0 / 3.0)));

  SUBCASE("single seed gives zero standard error") {
    auto one = aggregate({(kTmp / "agg" / "a0").string()}, 1);
    CHECK(one[0].rows[0].stderr_ == 0.0);
    CHECK(one[0].rows[1].stderr_ == 0.0);
  }
  SUBCASE("window smoothing averages neighbors, truncated at edges") {
    auto smooth = aggregate({(kTmp / "agg" / "a0").string()}, 10);
    CHECK(smooth[0].rows[0].mean == doctest::Approx(1.5));
    CHECK(smooth[0].rows[1].mean == doctest::Approx(1.5));
  }
  SUBCASE("mismatched evaluation grids are rejected") {
    fake_run(kTmp / "agg" / "bad", "mac-iac", {1.0, 2.0, 3.0});
    CHECK_THROWS_AS(aggregate({(kTmp / "agg" / "a0").string(),
                               (kTmp / "agg" / "bad").string()},
                              1),
                    ConfigError);
  }
}

TEST_CASE("plot data round-trips through its CSV form") {
  std::vector<MethodSummary> summary(2);
  summary[0].method = "mac-iaicc";
  summary[0].rows = {{0, 1.25, 0.5}, {100, 2.5, 0.25}};
  summary[1].method = "mac-iac";
  summary[1].rows = {{0, -1.0, 0.0}, {100, 0.5, 0.125}};

  std::ostringstream os;
  emit_plotdata(os, summary);
  std::istringstream is(os.str());
  auto back = parse_plotdata(is);
  REQUIRE(back.size() == 2);
  for (int g = 0; g < 2; ++g) {
    CHECK(back[g].method == summary[g].method);
    REQUIRE(back[g].rows.size() == summary[g].rows.size());
    for (size_t k = 0; k < back[g].rows.size(); ++k) {
      CHECK(back[g].rows[k].episode == summary[g].rows[k].episode);
      CHECK(back[g].rows[k].mean == summary[g].rows[k].mean);
      CHECK(back[g].rows[k].stderr_ == summary[g].rows[k].stderr_);
    }
  }

  std::ostringstream empty;
  emit_plotdata(empty, {});
  CHECK(empty.str() == "episode,method,mean,stderr\n");
}

TEST_CASE("replay renders a deterministic macro-level transcript") {
  fs::remove_all(kTmp / "replay");
  RunConfig cfg = toy_config("replay");
  const std::string dir = run_trial(cfg, 2);
  const std::string ckpt = dir + "/final.ckpt";

  double r1 = 0, r2 = 0;
  const std::string t1 = replay(cfg, ckpt, 9, 0.0, &r1);
  const std::string t2 = replay(cfg, ckpt, 9, 0.0, &r2);
  CHECK(t1 == t2);
  CHECK(r1 == r2);
  CHECK(t1.find("t=0") != std::string::npos);
  CHECK(t1.find("+a0:") != std::string::npos);

  // a different seed gives a different stream of random choices
  const std::string t3 = replay(cfg, ckpt, 10, 1.0);
  CHECK(t3 != t1);
}
