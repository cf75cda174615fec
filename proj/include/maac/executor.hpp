#pragma once

#include <vector>

#include "maac/core.hpp"
#include "maac/records.hpp"
#include "maac/rng.hpp"

namespace maac {

// Macro selector for all agents. select() is invoked at t=0 and at every
// joint termination step; it must fill macro_out[i] for every agent with
// reselect[i] set and leave the others untouched. Stateful implementations
// (recurrent actors) advance their per-agent state only for flagged agents.
class JointPolicy {
 public:
  virtual ~JointPolicy() = default;
  virtual void begin_episode() {}
  virtual void select(const std::vector<std::uint8_t>& reselect,
                      const std::vector<Obs>& macro_obs, double epsilon,
                      Rng& rng, std::vector<int>& macro_out) = 0;
};

// ε-mixed sampling from softmax probabilities:
// (1-ε)·probs + ε·uniform. Shared by every actor implementation.
int sample_mixed(const std::vector<float>& probs, double epsilon, Rng& rng);

// Drives one episode at the primitive timescale. Agents whose macro has
// terminated re-select through the policy; all others continue their
// controller. Emits one StepRecord per agent and one JointStepRecord per
// primitive step into `log` (if non-null). Throws ConfigError if the policy
// returns a macro whose initiation predicate fails.
EpisodeSummary run_episode(Env& env, JointPolicy& policy, double epsilon,
                           double gamma, std::uint64_t env_seed, Rng& rng,
                           EpisodeLog* log);

}  // namespace maac
