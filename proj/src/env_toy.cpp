#include "maac/env_toy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maac {

void ToySpec::validate() const {
  if (n_agents < 1 || n_agents > 2)
    throw ConfigError("toy spec: 1 or 2 agents");
  if (n_states < 1 || n_states > 6)
    throw ConfigError("toy spec: at most 6 states");
  if (horizon < 1 || horizon > 6)
    throw ConfigError("toy spec: horizon at most 6");
  if (static_cast<int>(durations.size()) != n_agents ||
      static_cast<int>(obs.size()) != n_agents)
    throw ConfigError("toy spec: per-agent table sizes");
  for (int i = 0; i < n_agents; ++i) {
    if (durations[i].empty() || durations[i].size() > 3)
      throw ConfigError("toy spec: 1 to 3 macros per agent");
    for (int d : durations[i])
      if (d != 1 && d != 2) throw ConfigError("toy spec: durations 1 or 2");
    if (static_cast<int>(obs[i].size()) != n_states)
      throw ConfigError("toy spec: observation map size");
    for (int o : obs[i])
      if (o < 0 || o >= n_obs) throw ConfigError("toy spec: obs id range");
  }
  if (static_cast<int>(reward.size()) != n_states ||
      static_cast<int>(trans.size()) != n_states)
    throw ConfigError("toy spec: table sizes");
  for (int s = 0; s < n_states; ++s) {
    if (static_cast<int>(reward[s].size()) != n_joint() ||
        static_cast<int>(trans[s].size()) != n_joint())
      throw ConfigError("toy spec: joint table sizes");
    for (const auto& outs : trans[s]) {
      double total = 0;
      for (const auto& o : outs) {
        if (o.next < 0 || o.next >= n_states)
          throw ConfigError("toy spec: next state range");
        total += o.prob;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw ConfigError("toy spec: transition probabilities must sum to 1");
    }
  }
}

std::string ToySpec::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "toyspec\n";
  os << "shape " << n_agents << " " << n_states << " " << n_obs << " "
     << horizon << " " << gamma << "\n";
  for (int i = 0; i < n_agents; ++i) {
    os << "durations " << durations[i].size();
    for (int d : durations[i]) os << " " << d;
    os << "\n";
    os << "obsmap";
    for (int o : obs[i]) os << " " << o;
    os << "\n";
  }
  for (int s = 0; s < n_states; ++s) {
    os << "reward";
    for (double r : reward[s]) os << " " << r;
    os << "\n";
    for (int j = 0; j < n_joint(); ++j) {
      os << "trans " << s << " " << j << " " << trans[s][j].size();
      for (const auto& o : trans[s][j]) os << " " << o.next << " " << o.prob;
      os << "\n";
    }
  }
  return os.str();
}

ToySpec ToySpec::parse(const std::string& text) {
  std::istringstream is(text);
  auto expect = [&](const std::string& tag) {
    std::string got;
    if (!(is >> got) || got != tag)
      throw ConfigError("toy spec parse: expected '" + tag + "', got '" +
                        got + "'");
  };
  ToySpec spec;
  expect("toyspec");
  expect("shape");
  is >> spec.n_agents >> spec.n_states >> spec.n_obs >> spec.horizon >>
      spec.gamma;
  spec.durations.resize(spec.n_agents);
  spec.obs.resize(spec.n_agents);
  for (int i = 0; i < spec.n_agents; ++i) {
    expect("durations");
    int count;
    is >> count;
    spec.durations[i].resize(count);
    for (int& d : spec.durations[i]) is >> d;
    expect("obsmap");
    spec.obs[i].resize(spec.n_states);
    for (int& o : spec.obs[i]) is >> o;
  }
  spec.reward.resize(spec.n_states);
  spec.trans.resize(spec.n_states);
  for (int s = 0; s < spec.n_states; ++s) {
    expect("reward");
    spec.reward[s].resize(spec.n_joint());
    for (double& r : spec.reward[s]) is >> r;
    spec.trans[s].resize(spec.n_joint());
    for (int j = 0; j < spec.n_joint(); ++j) {
      expect("trans");
      int ss, jj, count;
      is >> ss >> jj >> count;
      if (ss != s || jj != j) throw ConfigError("toy spec parse: trans key");
      spec.trans[s][j].resize(count);
      for (auto& o : spec.trans[s][j]) is >> o.next >> o.prob;
    }
  }
  if (!is) throw ConfigError("toy spec parse: truncated input");
  spec.validate();
  return spec;
}

ToyEnv::ToyEnv(const ToySpec& spec) : spec_(spec) {
  spec_.validate();
  macros_.resize(spec_.n_agents);
  for (int i = 0; i < spec_.n_agents; ++i) {
    for (int m = 0; m < spec_.n_macros(i); ++m) {
      MacroActionDef d;
      d.id = m;
      d.name = "macro-" + std::to_string(m);
      const int duration = spec_.durations[i][m];
      d.controller = [m](const Env&, int, int) { return m; };
      d.termination = [duration](const Env&, int, int steps) {
        return steps >= duration;
      };
      macros_[i].push_back(d);
    }
  }
  reset(0);
}

void ToyEnv::reset(std::uint64_t seed) {
  state_ = 0;
  t_ = 0;
  rng_ = Rng(Rng::derive(seed, 0x7079));
}

StepResult ToyEnv::step(const std::vector<int>& actions) {
  const int ji = spec_.joint_index(actions);
  StepResult res;
  res.reward = spec_.reward[state_][ji];
  const auto& outs = spec_.trans[state_][ji];
  if (outs.size() == 1) {
    state_ = outs[0].next;
  } else {
    double u = rng_.uniform();
    for (const auto& o : outs) {
      u -= o.prob;
      if (u <= 0) {
        state_ = o.next;
        break;
      }
    }
  }
  ++t_;
  res.terminal = t_ >= spec_.horizon;
  return res;
}

Obs ToyEnv::macro_obs(int agent) const {
  Obs z(spec_.n_obs, 0.0f);
  z[spec_.obs[agent][state_]] = 1.0f;
  return z;
}

Obs ToyEnv::state_features() const {
  Obs s(spec_.n_states, 0.0f);
  s[state_] = 1.0f;
  return s;
}

int ToyHistories::id(int agent, const std::vector<int>& key) const {
  auto it = index[agent].find(key);
  if (it == index[agent].end())
    throw ConfigError("unknown macro-history for agent " +
                      std::to_string(agent));
  return it->second;
}

ToyTheta ToyTheta::zeros(const ToySpec& spec, const ToyHistories& h) {
  ToyTheta theta;
  theta.logits.resize(spec.n_agents);
  for (int i = 0; i < spec.n_agents; ++i)
    theta.logits[i].assign(h.count(i),
                           std::vector<double>(spec.n_macros(i), 0.0));
  return theta;
}

std::vector<double> ToyTheta::flatten() const {
  std::vector<double> flat;
  for (const auto& agent : logits)
    for (const auto& row : agent)
      flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

void ToyTheta::unflatten(const std::vector<double>& flat) {
  size_t k = 0;
  for (auto& agent : logits)
    for (auto& row : agent)
      for (double& v : row) v = flat[k++];
}

std::vector<double> ToyTheta::probs(int agent, int hid) const {
  const auto& row = logits[agent][hid];
  const double mx = *std::max_element(row.begin(), row.end());
  std::vector<double> p(row.size());
  double sum = 0;
  for (size_t j = 0; j < row.size(); ++j) {
    p[j] = std::exp(row[j] - mx);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

void ToyTablePolicy::begin_episode() {
  keys_.assign(spec_->n_agents, {});
}

void ToyTablePolicy::select(const std::vector<std::uint8_t>& reselect,
                            const std::vector<Obs>& macro_obs, double epsilon,
                            Rng& rng, std::vector<int>& macro_out) {
  for (int i = 0; i < spec_->n_agents; ++i) {
    if (!reselect[i]) continue;
    const auto& z = macro_obs[i];
    const int obs_id = static_cast<int>(
        std::max_element(z.begin(), z.end()) - z.begin());
    keys_[i].push_back(obs_id);
    const int hid = hist_->id(i, keys_[i]);
    std::vector<double> p = theta_->probs(i, hid);
    if (epsilon > 0)
      for (double& v : p)
        v = (1.0 - epsilon) * v + epsilon / static_cast<double>(p.size());
    const int m = rng.sample(p);
    keys_[i].push_back(m);
    macro_out[i] = m;
  }
}

}  // namespace maac
