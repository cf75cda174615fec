#include "maac/executor.hpp"

#include <cmath>

namespace maac {

int sample_mixed(const std::vector<float>& probs, double epsilon, Rng& rng) {
  const int n = static_cast<int>(probs.size());
  std::vector<double> mixed(n);
  for (int i = 0; i < n; ++i)
    mixed[i] = (1.0 - epsilon) * static_cast<double>(probs[i]) + epsilon / n;
  return rng.sample(mixed);
}

EpisodeSummary run_episode(Env& env, JointPolicy& policy, double epsilon,
                           double gamma, std::uint64_t env_seed, Rng& rng,
                           EpisodeLog* log) {
  const int n = env.n_agents();
  env.reset(env_seed);
  policy.begin_episode();

  std::vector<Obs> held_obs(n);          // macro-observation held by each agent
  std::vector<int> current_macro(n, -1);
  std::vector<int> steps_in_macro(n, 0);
  std::vector<std::vector<int>> past_macros(n);
  std::vector<std::uint8_t> reselect(n, 1);  // everyone selects at t=0

  for (int i = 0; i < n; ++i) held_obs[i] = env.macro_obs(i);

  if (log) {
    log->per_agent.assign(n, {});
    log->joint.clear();
    log->states.clear();
    log->terminal = false;
    log->states.push_back(env.state_features());
  }

  EpisodeSummary sum;
  double disc = 1.0;
  int t = 0;

  while (t < env.horizon()) {
    // macro (re-)selection for agents whose macro has terminated
    bool any = false;
    for (int i = 0; i < n; ++i) any = any || reselect[i];
    if (any) {
      policy.select(reselect, held_obs, epsilon, rng, current_macro);
      for (int i = 0; i < n; ++i) {
        if (!reselect[i]) continue;
        const auto& ms = env.macros(i);
        if (current_macro[i] < 0 ||
            current_macro[i] >= static_cast<int>(ms.size()))
          throw ConfigError("policy returned invalid macro id");
        const auto& def = ms[current_macro[i]];
        if (!def.can_initiate(past_macros[i]))
          throw ConfigError("macro '" + def.name +
                            "' rejected by its initiation predicate");
        past_macros[i].push_back(current_macro[i]);
        steps_in_macro[i] = 0;
        env.on_macro_start(i, current_macro[i]);
      }
    }

    // one primitive step
    std::vector<int> joint_action(n);
    for (int i = 0; i < n; ++i) {
      const auto& def = env.macros(i)[current_macro[i]];
      joint_action[i] = def.controller(env, i, steps_in_macro[i]);
    }
    StepResult sr = env.step(joint_action);
    for (int i = 0; i < n; ++i) ++steps_in_macro[i];

    // termination checks; at terminal state or horizon every macro ends
    const bool horizon_end = (t + 1 >= env.horizon());
    std::vector<std::uint8_t> term(n, 0);
    for (int i = 0; i < n; ++i) {
      const auto& def = env.macros(i)[current_macro[i]];
      term[i] = sr.terminal || horizon_end ||
                def.termination(env, i, steps_in_macro[i]);
    }

    std::vector<Obs> next_obs(n);
    for (int i = 0; i < n; ++i)
      next_obs[i] = term[i] ? env.macro_obs(i) : held_obs[i];

    if (log) {
      JointStepRecord jr;
      jr.t = t;
      jr.z = held_obs;
      jr.m = current_macro;
      jr.r = sr.reward;
      jr.terminated = term;
      jr.z_next = next_obs;
      log->joint.push_back(jr);
      for (int i = 0; i < n; ++i) {
        StepRecord rec;
        rec.t = t;
        rec.agent = i;
        rec.z = held_obs[i];
        rec.m = current_macro[i];
        rec.r = sr.reward;
        rec.terminated = term[i];
        rec.z_next = next_obs[i];
        log->per_agent[i].push_back(rec);
      }
      log->states.push_back(env.state_features());
    }

    sum.total_reward += sr.reward;
    sum.discounted_return += disc * sr.reward;
    disc *= gamma;
    ++t;

    if (sr.terminal) {
      sum.terminal = true;
      if (log) log->terminal = true;
      break;
    }
    held_obs = next_obs;
    reselect = term;
  }

  sum.length = t;
  return sum;
}

}  // namespace maac
