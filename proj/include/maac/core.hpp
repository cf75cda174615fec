#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace maac {

using Obs = std::vector<float>;

class Env;

// An option: initiation predicate over the agent's past macro choices, a
// low-level controller emitting primitive actions, and a termination
// predicate evaluated after every primitive step of the running macro.
struct MacroActionDef {
  int id = 0;
  std::string name;
  // null means "always initiable"
  std::function<bool(const std::vector<int>& past_macros)> initiation;
  std::function<int(const Env&, int agent, int steps_in_macro)> controller;
  std::function<bool(const Env&, int agent, int steps_in_macro)> termination;

  bool can_initiate(const std::vector<int>& past) const {
    return !initiation || initiation(past);
  }
};

struct StepResult {
  double reward = 0.0;
  bool terminal = false;
};

// Contract every environment implements. step() consumes one joint primitive
// action and returns one shared scalar reward; reset() with the same seed
// reproduces the identical initial state.
class Env {
 public:
  virtual ~Env() = default;

  virtual int n_agents() const = 0;
  virtual int horizon() const = 0;
  virtual const std::vector<MacroActionDef>& macros(int agent) const = 0;
  virtual int macro_obs_dim(int agent) const = 0;
  virtual int state_dim() const = 0;

  virtual void reset(std::uint64_t seed) = 0;
  virtual StepResult step(const std::vector<int>& joint_primitive_action) = 0;

  virtual Obs macro_obs(int agent) const = 0;
  virtual Obs state_features() const = 0;

  // Called by the executor when an agent begins a macro; environments whose
  // macro machinery lives in the state (countdowns, transit) hook this.
  virtual void on_macro_start(int /*agent*/, int /*macro_id*/) {}

  virtual int time() const = 0;
  virtual std::string render() const { return {}; }

  int total_macro_obs_dim() const {
    int d = 0;
    for (int i = 0; i < n_agents(); ++i) d += macro_obs_dim(i);
    return d;
  }
  int n_macros(int agent) const {
    return static_cast<int>(macros(agent).size());
  }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace maac
