#pragma once

#include "maac/env_toy.hpp"

namespace maac {

// Hard cap on distinct trajectories during exact enumeration.
constexpr long kToyTrajectoryCap = 100000;

// Registers every reachable local macro-history of every agent, in a fixed
// depth-first order (macros ascending, then transition outcomes ascending).
// Throws if the trajectory count exceeds the cap.
ToyHistories enumerate_histories(const ToySpec& spec);

// J(theta) by exhaustive trajectory enumeration: sum over trajectories of
// probability times discounted return.
double exact_value(const ToySpec& spec, const ToyHistories& hist,
                   const ToyTheta& theta);

// The gradient computed two independent ways:
//   fd    - central finite differences of exact_value
//   score - exact expectation of the likelihood-ratio estimator
//           sum_d grad log pi(m_d | h_d) * sum_{t >= t_d} gamma^t r_t
struct ToyGradients {
  std::vector<double> fd;
  std::vector<double> score;
};

ToyGradients exact_policy_gradient(const ToySpec& spec,
                                   const ToyHistories& hist,
                                   const ToyTheta& theta);

// Small random instances for property tests; sized to stay far below the
// trajectory cap.
ToySpec random_toy_spec(Rng& rng, int n_agents = 2);

}  // namespace maac
