#pragma once

#include <array>
#include <utility>

#include "maac/core.hpp"

namespace maac {

// Primitive action ids shared by the macro controllers.
enum BoxPushingAction {
  kBpForward = 0,
  kBpTurnLeft = 1,
  kBpTurnRight = 2,
  kBpStay = 3,
};

// Front-cell categories, in macro-observation one-hot order.
enum BoxPushingFront {
  kFrontEmpty = 0,
  kFrontTeammate = 1,
  kFrontBoundary = 2,
  kFrontSmallBox = 3,
  kFrontBigBox = 4,
};

// Macro ids (same set for both agents; the move targets are agent-indexed).
enum BoxPushingMacro {
  kBpTurnLeftMacro = 0,
  kBpTurnRightMacro = 1,
  kBpStayMacro = 2,
  kBpMoveToSmallBox = 3,
  kBpMoveToBigBox = 4,
  kBpPush = 5,
};

// Two robots cooperatively pushing boxes north on an N x N grid. The big box
// spans two columns and moves only when both robots push its two cells in the
// same step. Rewards: +300 big box to the goal row, +20 small box, -10 per
// robot hitting the boundary or pushing the big box alone. Deterministic.
class BoxPushingEnv : public Env {
 public:
  explicit BoxPushingEnv(int grid_size);

  int n_agents() const override { return 2; }
  int horizon() const override { return 100; }
  const std::vector<MacroActionDef>& macros(int agent) const override;
  int macro_obs_dim(int agent) const override;
  int state_dim() const override;

  void reset(std::uint64_t seed) override;
  StepResult step(const std::vector<int>& actions) override;

  Obs macro_obs(int agent) const override;
  Obs state_features() const override;
  int time() const override { return t_; }
  std::string render() const override;

  struct AgentPose {
    int row = 0, col = 0;
    int orient = 0;  // 0 north, 1 east, 2 south, 3 west
  };

  int grid_size() const { return n_; }
  const AgentPose& agent_pose(int i) const { return agents_[i]; }
  std::pair<int, int> small_box(int i) const { return small_[i]; }
  int big_box_row() const { return big_row_; }
  std::pair<int, int> big_box_cols() const {
    return {big_col_, big_col_ + 1};
  }
  int front_cell(int agent) const;

  // per-step event flags driving Push termination
  bool hit_boundary(int agent) const { return hit_boundary_[agent]; }
  bool lone_push(int agent) const { return lone_push_[agent]; }
  bool pushed_small_to_goal(int agent) const { return small_goal_[agent]; }

 private:
  bool occupied_by_box(int row, int col) const;
  bool occupied_by_agent(int row, int col, int except) const;
  void build_macros();

  int n_ = 0;
  int t_ = 0;
  std::array<AgentPose, 2> agents_;
  std::array<std::pair<int, int>, 2> small_;
  int big_row_ = 0, big_col_ = 0;  // big box occupies (row, col) and (row, col+1)
  std::array<bool, 2> hit_boundary_{};
  std::array<bool, 2> lone_push_{};
  std::array<bool, 2> small_goal_{};
  std::vector<MacroActionDef> macros_;
};

}  // namespace maac
