#include "maac/env_boxpushing.hpp"

#include <sstream>

namespace maac {

namespace {

constexpr int kDRow[4] = {-1, 0, 1, 0};  // N, E, S, W
constexpr int kDCol[4] = {0, 1, 0, -1};

// minimal-turn primitive toward the desired orientation; right on a tie
int turn_toward(int orient, int desired) {
  const int diff = (desired - orient + 4) % 4;
  return diff == 3 ? kBpTurnLeft : kBpTurnRight;
}

}  // namespace

BoxPushingEnv::BoxPushingEnv(int grid_size) : n_(grid_size) {
  if (n_ < 6) throw ConfigError("box pushing grid must be at least 6x6");
  build_macros();
  reset(0);
}

int BoxPushingEnv::macro_obs_dim(int) const { return 5; }

int BoxPushingEnv::state_dim() const {
  // per agent: row, col, orientation one-hot; boxes; time
  return 2 * 6 + 2 * 2 + 2 + 1;
}

void BoxPushingEnv::reset(std::uint64_t) {
  t_ = 0;
  const int box_row = (n_ + 1) / 2;
  small_[0] = {box_row, 1};
  small_[1] = {box_row, n_ - 2};
  big_row_ = box_row;
  big_col_ = n_ / 2 - 1;
  agents_[0] = {n_ - 1, big_col_, 0};
  agents_[1] = {n_ - 1, big_col_ + 1, 0};
  hit_boundary_.fill(false);
  lone_push_.fill(false);
  small_goal_.fill(false);
}

bool BoxPushingEnv::occupied_by_box(int row, int col) const {
  for (const auto& [r, c] : small_)
    if (r == row && c == col) return true;
  return row == big_row_ && (col == big_col_ || col == big_col_ + 1);
}

bool BoxPushingEnv::occupied_by_agent(int row, int col, int except) const {
  for (int i = 0; i < 2; ++i)
    if (i != except && agents_[i].row == row && agents_[i].col == col)
      return true;
  return false;
}

int BoxPushingEnv::front_cell(int agent) const {
  const auto& a = agents_[agent];
  const int r = a.row + kDRow[a.orient];
  const int c = a.col + kDCol[a.orient];
  if (r < 0 || r >= n_ || c < 0 || c >= n_) return kFrontBoundary;
  if (occupied_by_agent(r, c, agent)) return kFrontTeammate;
  for (const auto& [sr, sc] : small_)
    if (sr == r && sc == c) return kFrontSmallBox;
  if (r == big_row_ && (c == big_col_ || c == big_col_ + 1))
    return kFrontBigBox;
  return kFrontEmpty;
}

StepResult BoxPushingEnv::step(const std::vector<int>& actions) {
  if (actions.size() != 2) throw ConfigError("box pushing expects 2 actions");
  for (int a : actions)
    if (a < 0 || a > 3) throw ConfigError("invalid primitive action");

  hit_boundary_.fill(false);
  lone_push_.fill(false);
  small_goal_.fill(false);
  StepResult res;

  // turns first; they cannot conflict with anything
  for (int i = 0; i < 2; ++i) {
    if (actions[i] == kBpTurnLeft)
      agents_[i].orient = (agents_[i].orient + 3) % 4;
    else if (actions[i] == kBpTurnRight)
      agents_[i].orient = (agents_[i].orient + 1) % 4;
  }

  std::array<int, 2> fr{}, fc{};  // front cells of forward movers
  std::array<bool, 2> forward{};
  for (int i = 0; i < 2; ++i) {
    forward[i] = actions[i] == kBpForward;
    fr[i] = agents_[i].row + kDRow[agents_[i].orient];
    fc[i] = agents_[i].col + kDCol[agents_[i].orient];
  }

  auto is_big = [&](int r, int c) {
    return r == big_row_ && (c == big_col_ || c == big_col_ + 1);
  };

  // joint big-box push: both forward, onto the two distinct box cells
  bool joint_push = forward[0] && forward[1] && is_big(fr[0], fc[0]) &&
                    is_big(fr[1], fc[1]) &&
                    (fr[0] != fr[1] || fc[0] != fc[1]);
  if (joint_push && big_row_ - 1 >= 0) {
    --big_row_;
    for (int i = 0; i < 2; ++i) {
      agents_[i].row = fr[i];
      agents_[i].col = fc[i];
      forward[i] = false;  // resolved
    }
    if (big_row_ == 0) {
      res.reward += 300.0;
      res.terminal = true;
    }
  }

  // remaining forward movers, resolved individually
  std::array<std::pair<int, int>, 2> target;
  for (int i = 0; i < 2; ++i)
    target[i] = {agents_[i].row, agents_[i].col};
  for (int i = 0; i < 2; ++i) {
    if (!forward[i]) continue;
    const int r = fr[i], c = fc[i];
    if (r < 0 || r >= n_ || c < 0 || c >= n_) {
      res.reward -= 10.0;
      hit_boundary_[i] = true;
    } else if (is_big(r, c)) {
      res.reward -= 10.0;
      lone_push_[i] = true;
    } else if (occupied_by_agent(r, c, i)) {
      // blocked by the teammate
    } else {
      int sb = -1;
      for (int k = 0; k < 2; ++k)
        if (small_[k].first == r && small_[k].second == c) sb = k;
      if (sb >= 0) {
        // small boxes move north only
        if (agents_[i].orient == 0 && r - 1 >= 0 &&
            !occupied_by_box(r - 1, c) && !occupied_by_agent(r - 1, c, -1)) {
          small_[sb] = {r - 1, c};
          target[i] = {r, c};
          if (r - 1 == 0) {
            res.reward += 20.0;
            res.terminal = true;
            small_goal_[i] = true;
          }
        }
      } else {
        target[i] = {r, c};
      }
    }
  }
  // simultaneous moves into the same cell cancel
  if (forward[0] && forward[1] && target[0] == target[1] &&
      (target[0].first != agents_[0].row ||
       target[0].second != agents_[0].col)) {
    target[0] = {agents_[0].row, agents_[0].col};
    target[1] = {agents_[1].row, agents_[1].col};
  }
  for (int i = 0; i < 2; ++i) {
    agents_[i].row = target[i].first;
    agents_[i].col = target[i].second;
  }

  ++t_;
  if (t_ >= horizon()) res.terminal = true;
  return res;
}

Obs BoxPushingEnv::macro_obs(int agent) const {
  Obs z(5, 0.0f);
  z[front_cell(agent)] = 1.0f;
  return z;
}

Obs BoxPushingEnv::state_features() const {
  Obs s;
  const float inv = 1.0f / static_cast<float>(n_);
  for (const auto& a : agents_) {
    s.push_back(a.row * inv);
    s.push_back(a.col * inv);
    for (int o = 0; o < 4; ++o) s.push_back(a.orient == o ? 1.0f : 0.0f);
  }
  for (const auto& [r, c] : small_) {
    s.push_back(r * inv);
    s.push_back(c * inv);
  }
  s.push_back(big_row_ * inv);
  s.push_back(big_col_ * inv);
  s.push_back(t_ / static_cast<float>(horizon()));
  return s;
}

std::string BoxPushingEnv::render() const {
  std::vector<std::string> grid(n_, std::string(n_, '.'));
  for (const auto& [r, c] : small_) grid[r][c] = 'b';
  grid[big_row_][big_col_] = 'B';
  grid[big_row_][big_col_ + 1] = 'B';
  const char arrows[4] = {'^', '>', 'v', '<'};
  for (const auto& a : agents_) grid[a.row][a.col] = arrows[a.orient];
  std::ostringstream os;
  for (const auto& row : grid) os << row << "\n";
  return os.str();
}

void BoxPushingEnv::build_macros() {
  auto self = [](const Env& e) -> const BoxPushingEnv& {
    return static_cast<const BoxPushingEnv&>(e);
  };

  auto one_step = [](int id, const std::string& name, int primitive) {
    MacroActionDef d;
    d.id = id;
    d.name = name;
    d.controller = [primitive](const Env&, int, int) { return primitive; };
    d.termination = [](const Env&, int, int steps) { return steps >= 1; };
    return d;
  };
  macros_.push_back(one_step(kBpTurnLeftMacro, "turn-left", kBpTurnLeft));
  macros_.push_back(one_step(kBpTurnRightMacro, "turn-right", kBpTurnRight));
  macros_.push_back(one_step(kBpStayMacro, "stay", kBpStay));

  // waypoint = cell directly south of the agent-indexed target box
  auto waypoint = [self](const Env& e, int agent, bool big) {
    const auto& env = self(e);
    if (big) {
      auto [c0, c1] = env.big_box_cols();
      return std::pair<int, int>{env.big_box_row() + 1, agent == 0 ? c0 : c1};
    }
    auto [r, c] = env.small_box(agent);
    return std::pair<int, int>{r + 1, c};
  };

  auto make_move = [self, waypoint](int id, const std::string& name,
                                    bool big) {
    MacroActionDef d;
    d.id = id;
    d.name = name;
    d.controller = [self, waypoint, big](const Env& e, int agent, int) {
      const auto& env = self(e);
      const auto& a = env.agent_pose(agent);
      auto [wr, wc] = waypoint(e, agent, big);
      int desired;
      if (a.col < wc)
        desired = 1;
      else if (a.col > wc)
        desired = 3;
      else if (a.row != wr)
        desired = a.row > wr ? 0 : 2;
      else
        desired = 0;  // at the waypoint: face the box
      if (a.orient != desired) return turn_toward(a.orient, desired);
      if (a.row == wr && a.col == wc) return static_cast<int>(kBpStay);
      return static_cast<int>(kBpForward);
    };
    d.termination = [self, waypoint, big](const Env& e, int agent, int) {
      const auto& env = self(e);
      const auto& a = env.agent_pose(agent);
      auto [wr, wc] = waypoint(e, agent, big);
      return a.row == wr && a.col == wc && a.orient == 0;
    };
    return d;
  };
  macros_.push_back(make_move(kBpMoveToSmallBox, "move-to-small-box", false));
  macros_.push_back(make_move(kBpMoveToBigBox, "move-to-big-box", true));

  MacroActionDef push;
  push.id = kBpPush;
  push.name = "push";
  push.controller = [](const Env&, int, int) {
    return static_cast<int>(kBpForward);
  };
  push.termination = [self](const Env& e, int agent, int) {
    const auto& env = self(e);
    return env.hit_boundary(agent) || env.lone_push(agent) ||
           env.pushed_small_to_goal(agent);
  };
  macros_.push_back(push);
}

const std::vector<MacroActionDef>& BoxPushingEnv::macros(int) const {
  return macros_;
}

}  // namespace maac
