#include "maac/squeeze.hpp"

#include <stdexcept>

namespace maac {

double cumulative_reward(const std::vector<double>& rewards, double gamma) {
  if (rewards.empty())
    throw std::invalid_argument("cumulative_reward: empty reward sequence");
  double acc = 0.0, disc = 1.0;
  for (double r : rewards) {
    acc += disc * r;
    disc *= gamma;
  }
  return acc;
}

namespace {

template <class Rec>
void check_contiguous(const std::vector<Rec>& records) {
  for (size_t k = 1; k < records.size(); ++k)
    if (records[k].t != records[k - 1].t + 1)
      throw std::invalid_argument("squeeze: gap in record timestamps");
}

}  // namespace

std::vector<Squeezed> squeeze_agent(const std::vector<StepRecord>& records,
                                    double gamma, bool episode_terminal) {
  check_contiguous(records);
  std::vector<Squeezed> out;
  size_t k = 0;
  while (k < records.size()) {
    Squeezed row;
    row.z = records[k].z;
    row.m = records[k].m;
    row.t_start = records[k].t;
    double acc = 0.0, disc = 1.0;
    size_t e = k;
    for (;; ++e) {
      acc += disc * records[e].r;
      disc *= gamma;
      if (records[e].terminated || e + 1 == records.size()) break;
    }
    row.rc = acc;
    row.tau = static_cast<int>(e - k + 1);
    row.z_next = records[e].z_next;
    if (e + 1 == records.size()) {
      row.env_terminal = episode_terminal;
      row.truncated = !episode_terminal;
    }
    out.push_back(std::move(row));
    k = e + 1;
  }
  return out;
}

std::vector<JointSqueezed> squeeze_joint(
    const std::vector<JointStepRecord>& records, double gamma,
    bool episode_terminal) {
  check_contiguous(records);
  std::vector<JointSqueezed> out;
  const int n = records.empty() ? 0 : static_cast<int>(records[0].m.size());
  std::vector<std::uint8_t> reselect(n, 1);
  size_t k = 0;
  while (k < records.size()) {
    JointSqueezed row;
    row.z = records[k].z;
    row.m = records[k].m;
    row.t_start = records[k].t;
    row.reselect = reselect;
    double acc = 0.0, disc = 1.0;
    size_t e = k;
    for (;; ++e) {
      acc += disc * records[e].r;
      disc *= gamma;
      if (records[e].joint_terminated() || e + 1 == records.size()) break;
    }
    row.rc = acc;
    row.tau = static_cast<int>(e - k + 1);
    row.z_next = records[e].z_next;
    row.terminated = records[e].terminated;
    if (e + 1 == records.size()) {
      row.env_terminal = episode_terminal;
      row.truncated = !episode_terminal;
    }
    reselect = records[e].terminated;
    out.push_back(std::move(row));
    k = e + 1;
  }
  return out;
}

IaiccStreams squeeze_iaicc(const std::vector<JointStepRecord>& joint,
                           const std::vector<StepRecord>& agent_records,
                           int agent, double gamma, bool episode_terminal) {
  if (joint.size() != agent_records.size())
    throw std::invalid_argument("squeeze_iaicc: mismatched stream lengths");
  IaiccStreams out;
  out.critic = squeeze_joint(joint, gamma, episode_terminal);
  out.actor = squeeze_agent(agent_records, gamma, episode_terminal);

  // Agent i's cumulative reward, accumulated over its own macro segments and
  // read off at each joint boundary.
  double acc = 0.0, disc = 1.0;
  int seg_len = 0;
  size_t step = 0;
  for (const auto& row : out.critic) {
    bool agent_done = false;
    for (int u = 0; u < row.tau; ++u, ++step) {
      acc += disc * joint[step].r;
      disc *= gamma;
      ++seg_len;
      agent_done = joint[step].terminated[agent] != 0;
    }
    out.rc_i.push_back(acc);
    out.tau_i.push_back(seg_len);
    out.mask.push_back(agent_done ? 1 : 0);
    if (agent_done) {
      acc = 0.0;
      disc = 1.0;
      seg_len = 0;
    }
  }
  return out;
}

}  // namespace maac
