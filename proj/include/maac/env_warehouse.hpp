#pragma once

#include <array>
#include <set>

#include "maac/core.hpp"

namespace maac {

// Named locations in the warehouse. Mobile robots travel between them at
// speed 0.8; travel time in primitive steps is ceil(euclidean / 0.8), with a
// minimum of one step.
enum WarehouseWaypoint {
  kWpArm = 0,     // the arm robot's fixed spot
  kWpR0Wait = 1,  // arm-side waiting spot for mobile robot 0
  kWpR1Wait = 2,  // arm-side waiting spot for mobile robot 1
  kWpToolRoom = 3,
  kWpWorkshop0 = 4,
  kWpWorkshop1 = 5,
};

// Arm macros (agent 0).
enum WarehouseArmMacro {
  kWhSearchTool0 = 0,
  kWhSearchTool1 = 1,
  kWhSearchTool2 = 2,
  kWhPassToM0 = 3,
  kWhPassToM1 = 4,
  kWhWaitM = 5,
};

// Mobile robot macros (agents 1 and 2).
enum WarehouseMobileMacro {
  kWhGoW0 = 0,
  kWhGoW1 = 1,
  kWhGoToolRoom = 2,
  kWhGetTool = 3,
};

// Warehouse Tool Delivery, one arm robot and two mobile robots serving two
// humans who each need tools 0, 1, 2 in that order. The required order is
// known only to the environment. Rewards: -1 per step, +100 per accepted
// delivery (-20 more if the human had to pause and wait), -10 when the arm
// passes toward an absent robot. Deterministic dynamics.
class WarehouseEnv : public Env {
 public:
  WarehouseEnv();

  int n_agents() const override { return 3; }  // arm, mobile 0, mobile 1
  int horizon() const override { return 200; }
  const std::vector<MacroActionDef>& macros(int agent) const override;
  int macro_obs_dim(int agent) const override;
  int state_dim() const override;

  void reset(std::uint64_t seed) override;
  StepResult step(const std::vector<int>& actions) override;
  void on_macro_start(int agent, int macro_id) override;

  Obs macro_obs(int agent) const override;
  Obs state_features() const override;
  int time() const override { return t_; }
  std::string render() const override;

  static int travel_steps(int from_waypoint, int to_waypoint);
  static std::string travel_table_csv();

  struct Mobile {
    int at = kWpToolRoom;     // waypoint when not in transit
    int dest = kWpToolRoom;
    int transit_left = 0;     // > 0 while traveling
    bool waiting = false;     // in the waiting phase of Get-Tool
    int wait_steps = 0;
    bool received = false;    // got a tool from the arm this wait
    int carried = -1;         // tool type, -1 when empty
  };

  struct Human {
    int subtask = 0;          // 0..3, then 4 when everything is finished
    int steps_in_subtask = 0;
    bool paused = false;
    std::set<int> received;   // tool types delivered so far
  };

  const Mobile& mobile(int i) const { return mobiles_[i]; }
  const Human& human(int i) const { return humans_[i]; }
  const std::vector<int>& staging() const { return staging_; }
  const std::array<int, 3>& table_count() const { return table_; }
  int arm_macro() const { return arm_macro_; }
  int arm_left() const { return arm_left_; }

 private:
  void build_macros();
  void deliver(int robot, double& reward);

  int t_ = 0;
  int arm_macro_ = kWhWaitM;
  int arm_left_ = 0;
  std::vector<int> staging_;       // FIFO, at most two tools
  std::array<int, 3> table_{};     // tools left on the table per type
  std::array<Mobile, 2> mobiles_;
  std::array<Human, 2> humans_;
  std::vector<MacroActionDef> arm_macros_;
  std::vector<MacroActionDef> mobile_macros_;
};

}  // namespace maac
