#include "maac/env_warehouse.hpp"

#include <cmath>
#include <sstream>

namespace maac {

namespace {

constexpr double kSpeed = 0.8;
constexpr int kHumanDurations[4] = {27, 20, 20, 20};
constexpr int kMaxWait = 10;

struct Coord {
  double x, y;
};

// declared geometry; every distance surfaces only through travel_steps()
constexpr Coord kCoords[6] = {
    {1.0, 2.5},  // arm
    {1.5, 1.5},  // robot-0 wait
    {1.5, 3.5},  // robot-1 wait
    {2.5, 2.5},  // tool room
    {5.5, 1.0},  // workshop 0
    {5.5, 4.0},  // workshop 1
};

const char* kWaypointNames[6] = {"ARM", "R0_WAIT", "R1_WAIT",
                                 "TR",  "W0",      "W1"};

int mobile_dest(int robot, int macro) {
  switch (macro) {
    case kWhGoW0:
      return kWpWorkshop0;
    case kWhGoW1:
      return kWpWorkshop1;
    case kWhGoToolRoom:
      return kWpToolRoom;
    default:
      return robot == 0 ? kWpR0Wait : kWpR1Wait;
  }
}

int arm_duration(int macro) {
  if (macro <= kWhSearchTool2) return 6;
  if (macro <= kWhPassToM1) return 4;
  return 1;
}

}  // namespace

int WarehouseEnv::travel_steps(int from, int to) {
  const double dx = kCoords[from].x - kCoords[to].x;
  const double dy = kCoords[from].y - kCoords[to].y;
  const double dist = std::sqrt(dx * dx + dy * dy);
  return std::max(1, static_cast<int>(std::ceil(dist / kSpeed)));
}

std::string WarehouseEnv::travel_table_csv() {
  std::ostringstream os;
  os << "from,to,steps\n";
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      if (a != b)
        os << kWaypointNames[a] << "," << kWaypointNames[b] << ","
           << travel_steps(a, b) << "\n";
  return os.str();
}

WarehouseEnv::WarehouseEnv() {
  build_macros();
  reset(0);
}

int WarehouseEnv::macro_obs_dim(int agent) const {
  return agent == 0 ? 10 : 15;
}

int WarehouseEnv::state_dim() const { return 65; }

void WarehouseEnv::reset(std::uint64_t) {
  t_ = 0;
  arm_macro_ = kWhWaitM;
  arm_left_ = 0;
  staging_.clear();
  table_ = {2, 2, 2};
  for (int i = 0; i < 2; ++i) {
    mobiles_[i] = Mobile{};
    humans_[i] = Human{};
  }
}

void WarehouseEnv::on_macro_start(int agent, int macro_id) {
  if (agent == 0) {
    if (macro_id < 0 || macro_id > kWhWaitM)
      throw ConfigError("invalid arm macro id");
    arm_macro_ = macro_id;
    arm_left_ = arm_duration(macro_id);
    return;
  }
  if (macro_id < 0 || macro_id > kWhGetTool)
    throw ConfigError("invalid mobile macro id");
  const int r = agent - 1;
  Mobile& m = mobiles_[r];
  m.dest = mobile_dest(r, macro_id);
  m.transit_left = travel_steps(m.at, m.dest);
  m.waiting = false;
  m.wait_steps = 0;
  m.received = false;
}

void WarehouseEnv::deliver(int robot, double& reward) {
  Mobile& m = mobiles_[robot];
  const int h = m.at == kWpWorkshop0 ? 0 : 1;
  Human& hu = humans_[h];
  if (m.carried < 0 || hu.received.count(m.carried)) return;
  reward += 100.0;
  if (hu.paused && m.carried == hu.subtask) reward -= 20.0;
  hu.received.insert(m.carried);
  m.carried = -1;
}

StepResult WarehouseEnv::step(const std::vector<int>& actions) {
  if (actions.size() != 3) throw ConfigError("warehouse expects 3 actions");
  StepResult res;
  res.reward = -1.0;

  // the arm acts first so a completed pass is visible to the waiting robot
  if (arm_left_ > 0 && --arm_left_ == 0) {
    if (arm_macro_ <= kWhSearchTool2) {
      const int tool = arm_macro_;
      if (staging_.size() < 2 && table_[tool] > 0) {
        --table_[tool];
        staging_.push_back(tool);
      }
    } else if (arm_macro_ <= kWhPassToM1) {
      const int r = arm_macro_ - kWhPassToM0;
      Mobile& m = mobiles_[r];
      if (m.waiting) {
        if (!staging_.empty() && m.carried < 0) {
          m.carried = staging_.front();
          staging_.erase(staging_.begin());
          m.received = true;
        }
      } else {
        res.reward -= 10.0;
      }
    }
  }

  for (int r = 0; r < 2; ++r) {
    Mobile& m = mobiles_[r];
    if (m.transit_left > 0) {
      if (--m.transit_left == 0) {
        m.at = m.dest;
        if (m.at == kWpR0Wait || m.at == kWpR1Wait) {
          m.waiting = true;
          m.wait_steps = 0;
        } else if (m.at == kWpWorkshop0 || m.at == kWpWorkshop1) {
          deliver(r, res.reward);
        }
      }
    } else if (m.waiting) {
      ++m.wait_steps;
    }
  }

  for (Human& hu : humans_) {
    if (hu.subtask > 3) continue;
    if (hu.paused) {
      if (hu.received.count(hu.subtask)) {
        hu.paused = false;
        ++hu.subtask;
        hu.steps_in_subtask = 0;
      }
      continue;
    }
    if (++hu.steps_in_subtask >= kHumanDurations[hu.subtask]) {
      if (hu.subtask == 3) {
        ++hu.subtask;  // everything assembled
      } else if (hu.received.count(hu.subtask)) {
        ++hu.subtask;
        hu.steps_in_subtask = 0;
      } else {
        hu.paused = true;
      }
    }
  }

  ++t_;
  const bool all_delivered = humans_[0].received.size() == 3 &&
                             humans_[1].received.size() == 3;
  if (all_delivered || t_ >= horizon()) res.terminal = true;
  return res;
}

Obs WarehouseEnv::macro_obs(int agent) const {
  if (agent == 0) {
    Obs z(10, 0.0f);
    for (int slot = 0; slot < 2; ++slot) {
      const int tool =
          slot < static_cast<int>(staging_.size()) ? staging_[slot] : -1;
      z[slot * 4 + tool + 1] = 1.0f;
    }
    for (int r = 0; r < 2; ++r)
      if (mobiles_[r].waiting) z[8 + r] = 1.0f;
    return z;
  }
  const Mobile& m = mobiles_[agent - 1];
  Obs z(15, 0.0f);
  int pos;
  switch (m.at) {
    case kWpToolRoom:
      pos = 0;
      break;
    case kWpWorkshop0:
      pos = 1;
      break;
    case kWpWorkshop1:
      pos = 2;
      break;
    default:
      pos = 3;  // own arm-side waiting spot
  }
  z[pos] = 1.0f;
  z[4 + m.carried + 1] = 1.0f;
  if (m.at == kWpToolRoom || m.at == kWpR0Wait || m.at == kWpR1Wait)
    z[8 + std::min<int>(2, staging_.size())] = 1.0f;
  if (m.at == kWpWorkshop0 || m.at == kWpWorkshop1) {
    const Human& hu = humans_[m.at == kWpWorkshop0 ? 0 : 1];
    z[11 + std::min(hu.subtask, 3)] = 1.0f;
  }
  return z;
}

Obs WarehouseEnv::state_features() const {
  Obs s;
  s.push_back(t_ / static_cast<float>(horizon()));
  for (int k = 0; k < 6; ++k) s.push_back(arm_macro_ == k ? 1.0f : 0.0f);
  s.push_back(arm_left_ / 6.0f);
  for (int slot = 0; slot < 2; ++slot) {
    const int tool =
        slot < static_cast<int>(staging_.size()) ? staging_[slot] : -1;
    for (int k = -1; k < 3; ++k) s.push_back(tool == k ? 1.0f : 0.0f);
  }
  for (int k = 0; k < 3; ++k) s.push_back(table_[k] / 2.0f);
  for (const Mobile& m : mobiles_) {
    for (int k = 0; k < 6; ++k) s.push_back(m.at == k ? 1.0f : 0.0f);
    s.push_back(m.transit_left / 10.0f);
    s.push_back(m.waiting ? 1.0f : 0.0f);
    s.push_back(m.wait_steps / 10.0f);
    for (int k = -1; k < 3; ++k) s.push_back(m.carried == k ? 1.0f : 0.0f);
  }
  for (const Human& hu : humans_) {
    for (int k = 0; k < 5; ++k) s.push_back(hu.subtask == k ? 1.0f : 0.0f);
    s.push_back(hu.steps_in_subtask / 27.0f);
    s.push_back(hu.paused ? 1.0f : 0.0f);
    for (int k = 0; k < 3; ++k)
      s.push_back(hu.received.count(k) ? 1.0f : 0.0f);
  }
  return s;
}

std::string WarehouseEnv::render() const {
  std::ostringstream os;
  os << "t=" << t_ << " arm=" << arm_macro_ << "(" << arm_left_ << ")"
     << " staging=[";
  for (size_t i = 0; i < staging_.size(); ++i)
    os << (i ? "," : "") << staging_[i];
  os << "] table=" << table_[0] << "/" << table_[1] << "/" << table_[2]
     << "\n";
  for (int r = 0; r < 2; ++r) {
    const Mobile& m = mobiles_[r];
    os << "robot" << r << ": at=" << kWaypointNames[m.at]
       << " transit=" << m.transit_left << " carried=" << m.carried
       << (m.waiting ? " waiting" : "") << "\n";
  }
  for (int h = 0; h < 2; ++h) {
    const Human& hu = humans_[h];
    os << "human" << h << ": subtask=" << hu.subtask
       << " steps=" << hu.steps_in_subtask << (hu.paused ? " paused" : "")
       << " tools=" << hu.received.size() << "\n";
  }
  return os.str();
}

void WarehouseEnv::build_macros() {
  auto self = [](const Env& e) -> const WarehouseEnv& {
    return static_cast<const WarehouseEnv&>(e);
  };

  const char* arm_names[6] = {"search-tool-0", "search-tool-1",
                              "search-tool-2", "pass-to-m0",
                              "pass-to-m1",    "wait-m"};
  for (int id = 0; id <= kWhWaitM; ++id) {
    MacroActionDef d;
    d.id = id;
    d.name = arm_names[id];
    d.controller = [id](const Env&, int, int) { return id; };
    d.termination = [self](const Env& e, int, int) {
      return self(e).arm_left() == 0;
    };
    arm_macros_.push_back(d);
  }

  const char* mobile_names[4] = {"go-w0", "go-w1", "go-tool-room",
                                 "get-tool"};
  for (int id = 0; id <= kWhGetTool; ++id) {
    MacroActionDef d;
    d.id = id;
    d.name = mobile_names[id];
    d.controller = [id](const Env&, int, int) { return id; };
    if (id == kWhGetTool) {
      d.termination = [self](const Env& e, int agent, int) {
        const auto& m = self(e).mobile(agent - 1);
        return m.received || (m.waiting && m.wait_steps >= kMaxWait);
      };
    } else {
      d.termination = [self](const Env& e, int agent, int) {
        return self(e).mobile(agent - 1).transit_left == 0;
      };
    }
    mobile_macros_.push_back(d);
  }
}

const std::vector<MacroActionDef>& WarehouseEnv::macros(int agent) const {
  return agent == 0 ? arm_macros_ : mobile_macros_;
}

}  // namespace maac
