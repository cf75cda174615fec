#pragma once

#include <vector>

#include "maac/records.hpp"

namespace maac {

// A macro-level transition with accumulated discounted reward and duration.
struct Squeezed {
  Obs z;
  int m = 0;
  Obs z_next;
  double rc = 0.0;   // sum_{k=0}^{tau-1} gamma^k r_{t_start+k}
  int tau = 0;       // segment duration in primitive steps
  int t_start = 0;
  bool env_terminal = false;  // episode reached a terminal state at row end
  bool truncated = false;     // macro cut short by the horizon
};

struct JointSqueezed {
  std::vector<Obs> z;
  std::vector<int> m;
  std::vector<Obs> z_next;
  double rc = 0.0;
  int tau = 0;
  int t_start = 0;
  std::vector<std::uint8_t> reselect;    // who picked a new macro at t_start
  std::vector<std::uint8_t> terminated;  // whose macro ended at row end
  bool env_terminal = false;
  bool truncated = false;
};

// sum_k gamma^k r_k; errors on an empty sequence
double cumulative_reward(const std::vector<double>& rewards, double gamma);

// One Squeezed row per macro execution of the agent; boundaries at the
// agent's own terminations. Errors on gaps in t.
std::vector<Squeezed> squeeze_agent(const std::vector<StepRecord>& records,
                                    double gamma,
                                    bool episode_terminal = false);

// Boundaries at joint terminations (any agent finishing its macro).
std::vector<JointSqueezed> squeeze_joint(
    const std::vector<JointStepRecord>& records, double gamma,
    bool episode_terminal = false);

// Critic stream squeezed by joint terminations, annotated with agent i's
// own-macro cumulative reward/duration and a mask on rows where agent i's
// macro terminates; actor stream identical to squeeze_agent.
struct IaiccStreams {
  std::vector<JointSqueezed> critic;
  std::vector<double> rc_i;          // per critic row
  std::vector<int> tau_i;            // per critic row
  std::vector<std::uint8_t> mask;    // per critic row
  std::vector<Squeezed> actor;
};

IaiccStreams squeeze_iaicc(const std::vector<JointStepRecord>& joint,
                           const std::vector<StepRecord>& agent_records,
                           int agent, double gamma,
                           bool episode_terminal = false);

}  // namespace maac
