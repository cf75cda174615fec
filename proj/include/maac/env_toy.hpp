#pragma once

#include <map>

#include "maac/core.hpp"
#include "maac/executor.hpp"
#include "maac/rng.hpp"

namespace maac {

// A tiny tabular MacDec-POMDP, small enough for exhaustive trajectory
// enumeration. Macros have fixed durations; rewards and transitions are
// keyed by the state and the currently running joint macro.
struct ToySpec {
  int n_agents = 2;
  int n_states = 2;
  int n_obs = 2;
  int horizon = 3;
  double gamma = 0.95;
  std::vector<std::vector<int>> durations;  // [agent][macro], 1 or 2
  std::vector<std::vector<int>> obs;        // [agent][state] -> obs id

  struct Outcome {
    int next = 0;
    double prob = 1.0;
  };
  // [state][joint macro index]
  std::vector<std::vector<double>> reward;
  std::vector<std::vector<std::vector<Outcome>>> trans;

  int n_macros(int agent) const {
    return static_cast<int>(durations[agent].size());
  }
  int joint_index(const std::vector<int>& m) const {
    int idx = 0, stride = 1;
    for (int i = 0; i < n_agents; ++i) {
      idx += m[i] * stride;
      stride *= n_macros(i);
    }
    return idx;
  }
  int n_joint() const {
    int n = 1;
    for (int i = 0; i < n_agents; ++i) n *= n_macros(i);
    return n;
  }

  void validate() const;  // throws ConfigError on structural problems
  std::string serialize() const;
  static ToySpec parse(const std::string& text);
};

// Env adapter: primitive action = running macro id; stochastic transitions
// drawn from the seed given to reset().
class ToyEnv : public Env {
 public:
  explicit ToyEnv(const ToySpec& spec);

  int n_agents() const override { return spec_.n_agents; }
  int horizon() const override { return spec_.horizon; }
  const std::vector<MacroActionDef>& macros(int agent) const override {
    return macros_[agent];
  }
  int macro_obs_dim(int) const override { return spec_.n_obs; }
  int state_dim() const override { return spec_.n_states; }

  void reset(std::uint64_t seed) override;
  StepResult step(const std::vector<int>& actions) override;

  Obs macro_obs(int agent) const override;
  Obs state_features() const override;
  int time() const override { return t_; }

  int state() const { return state_; }

 private:
  ToySpec spec_;
  int state_ = 0;
  int t_ = 0;
  Rng rng_{0};
  std::vector<std::vector<MacroActionDef>> macros_;
};

// Explicit softmax tables over local macro-histories. A history key is the
// agent's alternating observation/macro id sequence ending in the current
// observation; ids are assigned in canonical discovery order by
// enumerate_histories so that a flattened theta vector is well defined.
struct ToyHistories {
  // per agent: key -> id
  std::vector<std::map<std::vector<int>, int>> index;

  int count(int agent) const {
    return static_cast<int>(index[agent].size());
  }
  int id(int agent, const std::vector<int>& key) const;
};

struct ToyTheta {
  // logits[agent][history id][macro]
  std::vector<std::vector<std::vector<double>>> logits;

  static ToyTheta zeros(const ToySpec& spec, const ToyHistories& h);
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);
  std::vector<double> probs(int agent, int hid) const;  // softmax
};

// Samples macros from the tables while tracking each agent's history key.
class ToyTablePolicy : public JointPolicy {
 public:
  ToyTablePolicy(const ToySpec& spec, const ToyHistories& hist,
                 const ToyTheta& theta)
      : spec_(&spec), hist_(&hist), theta_(&theta) {}

  void begin_episode() override;
  void select(const std::vector<std::uint8_t>& reselect,
              const std::vector<Obs>& macro_obs, double epsilon, Rng& rng,
              std::vector<int>& macro_out) override;

 private:
  const ToySpec* spec_;
  const ToyHistories* hist_;
  const ToyTheta* theta_;
  std::vector<std::vector<int>> keys_;
};

}  // namespace maac
