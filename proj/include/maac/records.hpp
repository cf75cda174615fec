#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "maac/core.hpp"

namespace maac {

// One primitive-step experience tuple for one agent. z holds the agent's
// current macro-observation; z_next differs from z only on termination steps.
struct StepRecord {
  int t = 0;
  int agent = 0;
  Obs z;
  int m = 0;
  double r = 0.0;
  bool terminated = false;
  Obs z_next;
};

struct JointStepRecord {
  int t = 0;
  std::vector<Obs> z;
  std::vector<int> m;
  double r = 0.0;
  std::vector<std::uint8_t> terminated;  // per agent
  std::vector<Obs> z_next;

  bool joint_terminated() const {
    for (auto f : terminated)
      if (f) return true;
    return false;
  }
};

// A complete episode at the primitive timescale, as collected by run_episode.
struct EpisodeLog {
  std::vector<std::vector<StepRecord>> per_agent;  // [agent][t]
  std::vector<JointStepRecord> joint;              // [t]
  std::vector<Obs> states;                         // [t] = 0..T (T+1 entries)
  bool terminal = false;  // reached a terminal state (vs horizon cutoff)
  std::uint64_t policy_version = 0;

  int length() const { return static_cast<int>(joint.size()); }
};

struct EpisodeSummary {
  double total_reward = 0.0;
  double discounted_return = 0.0;
  int length = 0;
  bool terminal = false;
};

// Line-delimited record serialization for replay/regression fixtures.
// Field order per line: t, agent, z, m, r, terminated, z'
void write_records(std::ostream& os, const std::vector<StepRecord>& records);
std::vector<StepRecord> read_records(std::istream& is);

}  // namespace maac
