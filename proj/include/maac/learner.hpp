#pragma once

#include <memory>

#include "maac/executor.hpp"
#include "maac/net.hpp"
#include "maac/squeeze.hpp"

namespace maac {

enum class Algo { MacIac, MacCac, NaiveMacIacc, MacIaicc };
enum class CriticInputKind { JointHistory, State, Both };

Algo parse_algo(const std::string& name);
std::string algo_name(Algo a);
CriticInputKind parse_critic_input(const std::string& name);
std::string critic_input_name(CriticInputKind k);

// Linear decay from start to end over the first `decay` episodes.
struct EpsSchedule {
  double start = 1.0;
  double end = 0.05;
  long decay = 1000;

  double at(long episode) const {
    if (decay <= 0 || episode >= decay) return end;
    return start + (end - start) * (static_cast<double>(episode) / decay);
  }
};

struct LearnerConfig {
  Algo algo = Algo::MacIac;
  double actor_lr = 3e-4;
  double critic_lr = 3e-3;
  int i_train = 8;        // episodes per training round
  int i_target = 32;      // episodes between target-network syncs
  int n_step = 0;         // N-step TD over squeezed rows; 0 means one row
  double gamma = 0.95;
  EpsSchedule eps;
  CriticInputKind critic_input = CriticInputKind::JointHistory;
  int dec_gru = 32;       // recurrent width of decentralized nets
  int cen_gru = 64;       // recurrent width of centralized critics

  void validate() const;
};

struct Diagnostics {
  double critic_loss = 0;
  double mean_abs_td = 0;
  double actor_entropy = 0;
  double actor_grad_norm = 0;
  double critic_grad_norm = 0;
  long critic_rows = 0;
  long actor_rows = 0;
};

// --- input encodings ----------------------------------------------------
// An agent's recurrent input at decision k is [z_k, onehot(m_{k-1})] with
// m_{-1} encoded as all zeros. With `with_final` a trailing [z'_K, m_K]
// entry is appended so critics can evaluate the bootstrap history.

std::vector<Vec<float>> agent_history_inputs(const std::vector<Squeezed>& rows,
                                             int n_macros, bool with_final);
std::vector<Vec<float>> joint_history_inputs(
    const std::vector<JointSqueezed>& rows, const std::vector<int>& n_macros,
    bool with_final);
std::vector<Vec<float>> state_inputs(const std::vector<JointSqueezed>& rows,
                                     const std::vector<Obs>& states,
                                     bool with_final);

// --- TD targets ---------------------------------------------------------
struct TdRow {
  double rc = 0;
  int tau = 1;
  bool terminal = false;  // the episode ended for real at this row's end
};

// y_k sums up to max(1, n_step) consecutive row rewards with discount
// exponents equal to accumulated durations, then bootstraps from
// v_next[last] unless that row is terminal. v_next[k] is the target
// critic's value for the history right after row k.
std::vector<double> td_targets(const std::vector<TdRow>& rows,
                               const std::vector<double>& v_next,
                               double gamma, int n_step);

// One decision step of a recurrent actor: advance the hidden state on
// [z, onehot(prev_macro)] and sample from the epsilon-mixed softmax.
int select_macro(const RecurrentNet& net, Vec<float>& h, const Obs& z,
                 int prev_macro, double epsilon, Rng& rng);

// --- collection policies ------------------------------------------------

// Per-agent recurrent actors; each agent's hidden state advances only at its
// own decisions.
class DecNetPolicy : public JointPolicy {
 public:
  DecNetPolicy(std::vector<RecurrentNet*> actors, std::vector<int> obs_dims,
               std::vector<int> n_macros);
  void begin_episode() override;
  void select(const std::vector<std::uint8_t>& reselect,
              const std::vector<Obs>& macro_obs, double epsilon, Rng& rng,
              std::vector<int>& macro_out) override;

 private:
  std::vector<RecurrentNet*> actors_;
  std::vector<int> obs_dims_, n_macros_;
  std::vector<Vec<float>> hidden_;
  std::vector<int> prev_;
};

// One joint recurrent actor with a softmax head block per agent; its hidden
// state advances once per joint termination. Only re-selecting agents sample
// from their head; the others keep their running macro.
class CacNetPolicy : public JointPolicy {
 public:
  CacNetPolicy(RecurrentNet* net, std::vector<int> obs_dims,
               std::vector<int> n_macros);
  void begin_episode() override;
  void select(const std::vector<std::uint8_t>& reselect,
              const std::vector<Obs>& macro_obs, double epsilon, Rng& rng,
              std::vector<int>& macro_out) override;

 private:
  RecurrentNet* net_;
  std::vector<int> obs_dims_, n_macros_;
  Vec<float> hidden_;
  std::vector<int> prev_;
};

// --- learner ------------------------------------------------------------

// Owns the actor/critic networks of one trial and performs one optimizer
// step per training round over the buffered on-policy episodes.
class Learner {
 public:
  Learner(const Env& env, const LearnerConfig& cfg, std::uint64_t seed);

  JointPolicy& policy() { return *policy_; }
  std::uint64_t policy_version() const { return version_; }
  int buffered() const { return static_cast<int>(buffer_.size()); }
  const LearnerConfig& config() const { return cfg_; }

  // episodes must carry the current policy version (on-policy contract)
  void add_episode(EpisodeLog&& log);
  Diagnostics train_round();  // consumes the buffer, bumps the version
  void sync_targets();

  std::vector<std::pair<std::string, RecurrentNet*>> checkpoint_nets();

 private:
  using Batch = std::vector<const EpisodeLog*>;
  Diagnostics round_iac(const Batch& batch, bool do_critic, bool do_actor);
  Diagnostics round_cac(const Batch& batch, bool do_critic, bool do_actor);
  Diagnostics round_naive(const Batch& batch, bool do_critic, bool do_actor);
  Diagnostics round_iaicc(const Batch& batch, bool do_critic, bool do_actor);
  std::vector<Vec<float>> critic_inputs(const std::vector<JointSqueezed>& rows,
                                        const std::vector<Obs>& states) const;

  LearnerConfig cfg_;
  int n_agents_ = 0;
  int state_dim_ = 0;
  std::vector<int> obs_dims_, n_macros_;
  std::vector<RecurrentNet> actors_, critics_, targets_;
  std::vector<AdamState> actor_opt_, critic_opt_;
  std::unique_ptr<JointPolicy> policy_;
  std::vector<EpisodeLog> buffer_;
  std::uint64_t version_ = 0;
};

}  // namespace maac
