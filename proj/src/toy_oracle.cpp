#include "maac/toy_oracle.hpp"

#include <cmath>

namespace maac {

namespace {

// Shared depth-first traversal over every trajectory. Each primitive step
// first lets agents whose macro has run out re-decide (agent order, macro ids
// ascending), then applies the keyed transition (outcomes ascending).
struct Walker {
  const ToySpec& spec;
  ToyHistories* registry = nullptr;   // fill when non-null
  const ToyHistories* hist = nullptr; // lookup when evaluating
  const ToyTheta* theta = nullptr;
  long leaves = 0;

  double value = 0;
  std::vector<double>* score = nullptr;  // flat gradient accumulator
  std::vector<int> flat_offset;          // per-agent offset into theta

  std::vector<double> rewards;
  struct Decision {
    int agent, hid, macro, t;
    std::vector<double> pi;
  };
  std::vector<Decision> decisions;

  std::vector<std::vector<int>> keys;
  std::vector<int> remaining, macro;

  void run() {
    keys.assign(spec.n_agents, {});
    remaining.assign(spec.n_agents, 0);
    macro.assign(spec.n_agents, 0);
    if (theta) {
      flat_offset.assign(spec.n_agents, 0);
      int off = 0;
      for (int i = 0; i < spec.n_agents; ++i) {
        flat_offset[i] = off;
        off += hist->count(i) * spec.n_macros(i);
      }
    }
    step(0, 0, 1.0);
  }

  void step(int t, int state, double prob) {
    if (t >= spec.horizon) {
      leaf(prob);
      return;
    }
    decide(0, t, state, prob);
  }

  void decide(int agent, int t, int state, double prob) {
    if (agent == spec.n_agents) {
      transition(t, state, prob);
      return;
    }
    if (remaining[agent] > 0) {
      decide(agent + 1, t, state, prob);
      return;
    }
    auto& key = keys[agent];
    key.push_back(spec.obs[agent][state]);
    int hid = -1;
    std::vector<double> pi;
    if (registry) {
      auto [it, fresh] = registry->index[agent].try_emplace(
          key, registry->count(agent));
      (void)fresh;
      hid = it->second;
    } else {
      hid = hist->id(agent, key);
      pi = theta->probs(agent, hid);
    }
    for (int m = 0; m < spec.n_macros(agent); ++m) {
      key.push_back(m);
      const int saved = remaining[agent];
      const int saved_macro = macro[agent];
      remaining[agent] = spec.durations[agent][m];
      macro[agent] = m;
      if (theta)
        decisions.push_back({agent, hid, m, t, pi});
      decide(agent + 1, t, state, registry ? prob : prob * pi[m]);
      if (theta) decisions.pop_back();
      remaining[agent] = saved;
      macro[agent] = saved_macro;
      key.pop_back();
    }
    key.pop_back();
  }

  void transition(int t, int state, double prob) {
    const int ji = spec.joint_index(macro);
    rewards.push_back(spec.reward[state][ji]);
    for (int i = 0; i < spec.n_agents; ++i) --remaining[i];
    for (const auto& out : spec.trans[state][ji])
      step(t + 1, out.next, prob * out.prob);
    for (int i = 0; i < spec.n_agents; ++i) ++remaining[i];
    rewards.pop_back();
  }

  void leaf(double prob) {
    if (++leaves > kToyTrajectoryCap)
      throw ConfigError("toy enumeration exceeds the trajectory cap");
    if (!theta) return;
    // discounted return and its suffixes
    std::vector<double> suffix(rewards.size() + 1, 0.0);
    for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t)
      suffix[t] = suffix[t + 1] + std::pow(spec.gamma, t) * rewards[t];
    value += prob * suffix[0];
    if (!score) return;
    for (const auto& d : decisions) {
      const int base = flat_offset[d.agent] + d.hid * spec.n_macros(d.agent);
      const double g = suffix[d.t];
      for (int j = 0; j < spec.n_macros(d.agent); ++j)
        (*score)[base + j] +=
            prob * ((j == d.macro ? 1.0 : 0.0) - d.pi[j]) * g;
    }
  }
};

}  // namespace

ToyHistories enumerate_histories(const ToySpec& spec) {
  spec.validate();
  ToyHistories hist;
  hist.index.resize(spec.n_agents);
  Walker w{spec};
  w.registry = &hist;
  w.run();
  return hist;
}

double exact_value(const ToySpec& spec, const ToyHistories& hist,
                   const ToyTheta& theta) {
  Walker w{spec};
  w.hist = &hist;
  w.theta = &theta;
  w.run();
  return w.value;
}

ToyGradients exact_policy_gradient(const ToySpec& spec,
                                   const ToyHistories& hist,
                                   const ToyTheta& theta) {
  ToyGradients out;

  std::vector<double> flat = theta.flatten();
  out.fd.assign(flat.size(), 0.0);
  // five-point stencil: O(h^4) truncation, so h can be large enough that
  // floating-point cancellation is negligible
  const double h = 1e-3;
  ToyTheta probe = theta;
  auto at = [&](size_t k, double v) {
    const double orig = flat[k];
    flat[k] = v;
    probe.unflatten(flat);
    const double J = exact_value(spec, hist, probe);
    flat[k] = orig;
    return J;
  };
  for (size_t k = 0; k < flat.size(); ++k) {
    const double orig = flat[k];
    out.fd[k] = (8.0 * (at(k, orig + h) - at(k, orig - h)) -
                 (at(k, orig + 2 * h) - at(k, orig - 2 * h))) /
                (12.0 * h);
  }
  probe.unflatten(flat);

  out.score.assign(flat.size(), 0.0);
  Walker w{spec};
  w.hist = &hist;
  w.theta = &theta;
  w.score = &out.score;
  w.run();
  return out;
}

ToySpec random_toy_spec(Rng& rng, int n_agents) {
  ToySpec spec;
  spec.n_agents = n_agents;
  spec.n_states = 2 + static_cast<int>(rng.uniform_int(3));
  spec.n_obs = 2 + static_cast<int>(rng.uniform_int(2));
  spec.horizon = 3 + static_cast<int>(rng.uniform_int(2));
  const double gammas[3] = {0.9, 0.95, 1.0};
  spec.gamma = gammas[rng.uniform_int(3)];
  spec.durations.resize(n_agents);
  spec.obs.resize(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    const int n_macros = 2 + static_cast<int>(rng.uniform_int(2));
    for (int m = 0; m < n_macros; ++m)
      spec.durations[i].push_back(1 + static_cast<int>(rng.uniform_int(2)));
    for (int s = 0; s < spec.n_states; ++s)
      spec.obs[i].push_back(static_cast<int>(rng.uniform_int(spec.n_obs)));
  }
  spec.reward.resize(spec.n_states);
  spec.trans.resize(spec.n_states);
  for (int s = 0; s < spec.n_states; ++s) {
    for (int j = 0; j < spec.n_joint(); ++j) {
      spec.reward[s].push_back(rng.uniform(-1.0, 1.0));
      std::vector<ToySpec::Outcome> outs;
      const int a = static_cast<int>(rng.uniform_int(spec.n_states));
      if (rng.uniform() < 0.6) {
        outs.push_back({a, 1.0});
      } else {
        int b = static_cast<int>(rng.uniform_int(spec.n_states));
        if (b == a) {
          outs.push_back({a, 1.0});
        } else {
          const double p = 0.25 + 0.25 * rng.uniform_int(3);
          outs.push_back({a, p});
          outs.push_back({b, 1.0 - p});
        }
      }
      spec.trans[s].push_back(outs);
    }
  }
  spec.validate();
  return spec;
}

}  // namespace maac
