#include "maac/learner.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace maac {

Algo parse_algo(const std::string& name) {
  if (name == "mac-iac") return Algo::MacIac;
  if (name == "mac-cac") return Algo::MacCac;
  if (name == "naive-mac-iacc") return Algo::NaiveMacIacc;
  if (name == "mac-iaicc") return Algo::MacIaicc;
  throw ConfigError("unknown algorithm '" + name + "'");
}

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::MacIac: return "mac-iac";
    case Algo::MacCac: return "mac-cac";
    case Algo::NaiveMacIacc: return "naive-mac-iacc";
    case Algo::MacIaicc: return "mac-iaicc";
  }
  return "?";
}

CriticInputKind parse_critic_input(const std::string& name) {
  if (name == "joint-history") return CriticInputKind::JointHistory;
  if (name == "state") return CriticInputKind::State;
  if (name == "both") return CriticInputKind::Both;
  throw ConfigError("unknown critic input '" + name + "'");
}

std::string critic_input_name(CriticInputKind k) {
  switch (k) {
    case CriticInputKind::JointHistory: return "joint-history";
    case CriticInputKind::State: return "state";
    case CriticInputKind::Both: return "both";
  }
  return "?";
}

void LearnerConfig::validate() const {
  if (actor_lr <= 0 || critic_lr <= 0)
    throw ConfigError("learning rates must be positive");
  if (i_train < 1) throw ConfigError("i_train must be at least 1");
  if (i_target < 1) throw ConfigError("i_target must be at least 1");
  if (n_step < 0) throw ConfigError("n_step must be non-negative");
  if (gamma <= 0 || gamma > 1) throw ConfigError("gamma must be in (0, 1]");
  if (eps.start < 0 || eps.start > 1 || eps.end < 0 || eps.end > 1)
    throw ConfigError("epsilon bounds must be in [0, 1]");
  if (dec_gru < 1 || cen_gru < 1)
    throw ConfigError("recurrent widths must be positive");
}

// --- input encodings ----------------------------------------------------

namespace {

void put_obs(Vec<float>& x, int off, const Obs& z) {
  for (size_t j = 0; j < z.size(); ++j) x(off + static_cast<int>(j)) = z[j];
}

}  // namespace

std::vector<Vec<float>> agent_history_inputs(const std::vector<Squeezed>& rows,
                                             int n_macros, bool with_final) {
  std::vector<Vec<float>> inputs;
  if (rows.empty()) return inputs;
  const int obs_dim = static_cast<int>(rows[0].z.size());
  const int dim = obs_dim + n_macros;
  for (size_t k = 0; k < rows.size(); ++k) {
    Vec<float> x = Vec<float>::Zero(dim);
    put_obs(x, 0, rows[k].z);
    if (k > 0) x(obs_dim + rows[k - 1].m) = 1.0f;
    inputs.push_back(std::move(x));
  }
  if (with_final) {
    Vec<float> x = Vec<float>::Zero(dim);
    put_obs(x, 0, rows.back().z_next);
    x(obs_dim + rows.back().m) = 1.0f;
    inputs.push_back(std::move(x));
  }
  return inputs;
}

std::vector<Vec<float>> joint_history_inputs(
    const std::vector<JointSqueezed>& rows, const std::vector<int>& n_macros,
    bool with_final) {
  std::vector<Vec<float>> inputs;
  if (rows.empty()) return inputs;
  const int n = static_cast<int>(rows[0].z.size());
  std::vector<int> obs_off(n), mac_off(n);
  int off = 0;
  for (int i = 0; i < n; ++i) {
    obs_off[i] = off;
    off += static_cast<int>(rows[0].z[i].size());
  }
  for (int i = 0; i < n; ++i) {
    mac_off[i] = off;
    off += n_macros[i];
  }
  for (size_t k = 0; k < rows.size(); ++k) {
    Vec<float> x = Vec<float>::Zero(off);
    for (int i = 0; i < n; ++i) {
      put_obs(x, obs_off[i], rows[k].z[i]);
      if (k > 0) x(mac_off[i] + rows[k - 1].m[i]) = 1.0f;
    }
    inputs.push_back(std::move(x));
  }
  if (with_final) {
    Vec<float> x = Vec<float>::Zero(off);
    for (int i = 0; i < n; ++i) {
      put_obs(x, obs_off[i], rows.back().z_next[i]);
      x(mac_off[i] + rows.back().m[i]) = 1.0f;
    }
    inputs.push_back(std::move(x));
  }
  return inputs;
}

std::vector<Vec<float>> state_inputs(const std::vector<JointSqueezed>& rows,
                                     const std::vector<Obs>& states,
                                     bool with_final) {
  std::vector<Vec<float>> inputs;
  if (rows.empty()) return inputs;
  const int dim = static_cast<int>(states.at(0).size());
  for (const auto& row : rows) {
    Vec<float> x = Vec<float>::Zero(dim);
    put_obs(x, 0, states.at(row.t_start));
    inputs.push_back(std::move(x));
  }
  if (with_final) {
    Vec<float> x = Vec<float>::Zero(dim);
    put_obs(x, 0, states.at(rows.back().t_start + rows.back().tau));
    inputs.push_back(std::move(x));
  }
  return inputs;
}

// --- TD targets ---------------------------------------------------------

std::vector<double> td_targets(const std::vector<TdRow>& rows,
                               const std::vector<double>& v_next,
                               double gamma, int n_step) {
  if (n_step < 0) throw std::invalid_argument("td_targets: negative n_step");
  if (v_next.size() != rows.size())
    throw std::invalid_argument("td_targets: row/value count mismatch");
  const size_t count = static_cast<size_t>(std::max(1, n_step));
  std::vector<double> y(rows.size(), 0.0);
  for (size_t k = 0; k < rows.size(); ++k) {
    double acc = 0.0, disc = 1.0;
    size_t last = k;
    for (size_t j = k; j < k + count && j < rows.size(); ++j) {
      acc += disc * rows[j].rc;
      disc *= std::pow(gamma, rows[j].tau);
      last = j;
      if (rows[j].terminal) break;
    }
    if (!rows[last].terminal) acc += disc * v_next[last];
    y[k] = acc;
  }
  return y;
}

// --- collection policies ------------------------------------------------

int select_macro(const RecurrentNet& net, Vec<float>& h, const Obs& z,
                 int prev_macro, double epsilon, Rng& rng) {
  Vec<float> x = Vec<float>::Zero(net.spec.input_dim);
  put_obs(x, 0, z);
  if (prev_macro >= 0) x(static_cast<int>(z.size()) + prev_macro) = 1.0f;
  Vec<float> out = net_step<float>(net.spec, net.params, x, h, nullptr);
  Vec<float> probs = head_output<float>(net.spec, out);
  std::vector<float> p(probs.data(), probs.data() + probs.size());
  return sample_mixed(p, epsilon, rng);
}

DecNetPolicy::DecNetPolicy(std::vector<RecurrentNet*> actors,
                           std::vector<int> obs_dims, std::vector<int> n_macros)
    : actors_(std::move(actors)),
      obs_dims_(std::move(obs_dims)),
      n_macros_(std::move(n_macros)) {}

void DecNetPolicy::begin_episode() {
  hidden_.clear();
  for (auto* net : actors_) hidden_.push_back(Vec<float>::Zero(net->spec.gru));
  prev_.assign(actors_.size(), -1);
}

void DecNetPolicy::select(const std::vector<std::uint8_t>& reselect,
                          const std::vector<Obs>& macro_obs, double epsilon,
                          Rng& rng, std::vector<int>& macro_out) {
  for (size_t i = 0; i < actors_.size(); ++i) {
    if (!reselect[i]) continue;
    macro_out[i] = select_macro(*actors_[i], hidden_[i], macro_obs[i],
                                prev_[i], epsilon, rng);
    prev_[i] = macro_out[i];
  }
}

CacNetPolicy::CacNetPolicy(RecurrentNet* net, std::vector<int> obs_dims,
                           std::vector<int> n_macros)
    : net_(net),
      obs_dims_(std::move(obs_dims)),
      n_macros_(std::move(n_macros)) {}

void CacNetPolicy::begin_episode() {
  hidden_ = Vec<float>::Zero(net_->spec.gru);
  prev_.assign(obs_dims_.size(), -1);
}

void CacNetPolicy::select(const std::vector<std::uint8_t>& reselect,
                          const std::vector<Obs>& macro_obs, double epsilon,
                          Rng& rng, std::vector<int>& macro_out) {
  const int n = static_cast<int>(obs_dims_.size());
  Vec<float> x = Vec<float>::Zero(net_->spec.input_dim);
  int off = 0;
  for (int i = 0; i < n; ++i) {
    put_obs(x, off, macro_obs[i]);
    off += obs_dims_[i];
  }
  for (int i = 0; i < n; ++i) {
    if (prev_[i] >= 0) x(off + prev_[i]) = 1.0f;
    off += n_macros_[i];
  }
  Vec<float> out = net_step<float>(net_->spec, net_->params, x, hidden_,
                                   nullptr);
  Vec<float> probs = head_output<float>(net_->spec, out);
  int block = 0;
  for (int i = 0; i < n; ++i) {
    if (reselect[i]) {
      std::vector<float> p(probs.data() + block,
                           probs.data() + block + n_macros_[i]);
      macro_out[i] = sample_mixed(p, epsilon, rng);
      prev_[i] = macro_out[i];
    }
    block += n_macros_[i];
  }
}

// --- learner ------------------------------------------------------------

namespace {

// Everything needed to finish one net's round after every episode has been
// evaluated: forward caches plus unscaled per-step output gradients.
struct NetBatch {
  std::vector<std::vector<Vec<float>>> inputs;
  std::vector<ForwardCache<float>> caches;
  std::vector<std::vector<Vec<float>>> douts;
  long rows = 0;

  size_t open(std::vector<Vec<float>> in, ForwardCache<float> cache) {
    inputs.push_back(std::move(in));
    caches.push_back(std::move(cache));
    douts.emplace_back();
    auto& d = douts.back();
    for (const auto& step : caches.back().steps)
      d.push_back(Vec<float>::Zero(step.out.size()));
    return douts.size() - 1;
  }
};

// One optimizer step from the accumulated batch; gradients are averaged over
// the contributing rows. Returns the squared gradient norm.
double apply_batch(RecurrentNet& net, NetBatch& batch, AdamState& opt) {
  if (batch.rows == 0) return 0.0;
  NetParams<float> grads;
  grads.setup(net.spec);
  const float scale = 1.0f / static_cast<float>(batch.rows);
  for (size_t e = 0; e < batch.caches.size(); ++e) {
    for (auto& d : batch.douts[e]) d *= scale;
    backward_sequence<float>(net.spec, net.params, batch.caches[e],
                             batch.douts[e], grads);
  }
  double norm_sq = 0.0;
  for (auto& g : grads.named()) norm_sq += g.m->squaredNorm();
  optimizer_step(net.params, grads, opt);
  return norm_sq;
}

double value_of(const Vec<float>& out) { return static_cast<double>(out(0)); }

double entropy_of(const float* p, int n) {
  double e = 0.0;
  for (int j = 0; j < n; ++j)
    if (p[j] > 0.0f) e -= static_cast<double>(p[j]) * std::log(p[j]);
  return e;
}

// dL/dlogits of -advantage * log pi(chosen) for one softmax block
void add_score_grad(Vec<float>& dout, int off, const Vec<float>& probs,
                    int n, int chosen, double advantage) {
  const float a = static_cast<float>(advantage);
  for (int j = 0; j < n; ++j) dout(off + j) += a * probs(off + j);
  dout(off + chosen) -= a;
}

std::vector<double> forward_values(const RecurrentNet& net,
                                   const std::vector<Vec<float>>& inputs) {
  auto outs = net.forward(inputs);
  std::vector<double> v;
  for (const auto& o : outs) v.push_back(value_of(o));
  return v;
}

}  // namespace

Learner::Learner(const Env& env, const LearnerConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  cfg_.validate();
  n_agents_ = env.n_agents();
  state_dim_ = env.state_dim();
  int joint_in = 0;
  for (int i = 0; i < n_agents_; ++i) {
    obs_dims_.push_back(env.macro_obs_dim(i));
    n_macros_.push_back(env.n_macros(i));
    joint_in += obs_dims_[i] + n_macros_[i];
  }
  int critic_in = 0;
  switch (cfg_.critic_input) {
    case CriticInputKind::JointHistory: critic_in = joint_in; break;
    case CriticInputKind::State: critic_in = state_dim_; break;
    case CriticInputKind::Both: critic_in = joint_in + state_dim_; break;
  }

  auto dec_actor = [&](int i) {
    NetSpec s;
    s.input_dim = obs_dims_[i] + n_macros_[i];
    s.gru = cfg_.dec_gru;
    s.head = HeadKind::Softmax;
    s.head_blocks = {n_macros_[i]};
    return s;
  };
  auto dec_critic = [&](int i) {
    NetSpec s;
    s.input_dim = obs_dims_[i] + n_macros_[i];
    s.gru = cfg_.dec_gru;
    return s;
  };
  auto cen_critic = [&]() {
    NetSpec s;
    s.input_dim = critic_in;
    s.gru = cfg_.cen_gru;
    return s;
  };

  switch (cfg_.algo) {
    case Algo::MacIac:
      for (int i = 0; i < n_agents_; ++i) {
        actors_.emplace_back(dec_actor(i));
        critics_.emplace_back(dec_critic(i));
      }
      break;
    case Algo::MacCac: {
      NetSpec s;
      s.input_dim = joint_in;
      s.gru = cfg_.dec_gru;
      s.head = HeadKind::Softmax;
      s.head_blocks = n_macros_;
      actors_.emplace_back(s);
      critics_.emplace_back(cen_critic());
      break;
    }
    case Algo::NaiveMacIacc:
      for (int i = 0; i < n_agents_; ++i) actors_.emplace_back(dec_actor(i));
      critics_.emplace_back(cen_critic());
      break;
    case Algo::MacIaicc:
      for (int i = 0; i < n_agents_; ++i) {
        actors_.emplace_back(dec_actor(i));
        critics_.emplace_back(cen_critic());
      }
      break;
  }

  for (size_t i = 0; i < actors_.size(); ++i) {
    Rng r(Rng::derive(seed, 100 + i));
    actors_[i].init(r);
    actor_opt_.emplace_back();
    actor_opt_.back().setup(actors_[i].spec,
                            static_cast<float>(cfg_.actor_lr));
  }
  for (size_t i = 0; i < critics_.size(); ++i) {
    Rng r(Rng::derive(seed, 200 + i));
    critics_[i].init(r);
    targets_.push_back(critics_[i].clone());
    critic_opt_.emplace_back();
    critic_opt_.back().setup(critics_[i].spec,
                             static_cast<float>(cfg_.critic_lr));
  }

  if (cfg_.algo == Algo::MacCac) {
    policy_ = std::make_unique<CacNetPolicy>(&actors_[0], obs_dims_,
                                             n_macros_);
  } else {
    std::vector<RecurrentNet*> ptrs;
    for (auto& a : actors_) ptrs.push_back(&a);
    policy_ = std::make_unique<DecNetPolicy>(std::move(ptrs), obs_dims_,
                                             n_macros_);
  }
}

void Learner::add_episode(EpisodeLog&& log) {
  if (log.policy_version != version_)
    throw std::logic_error("stale episode: collected with policy version " +
                           std::to_string(log.policy_version) + ", learner at " +
                           std::to_string(version_));
  buffer_.push_back(std::move(log));
}

Diagnostics Learner::train_round() {
  if (buffer_.empty())
    throw std::logic_error("train_round called with an empty buffer");
  Batch all;
  for (const auto& log : buffer_) all.push_back(&log);
  // critic step first; the actor step then measures its advantages against
  // the freshly updated live critic (the targets inside y stay frozen)
  Diagnostics dc, da;
  switch (cfg_.algo) {
    case Algo::MacIac:
      dc = round_iac(all, true, false);
      da = round_iac(all, false, true);
      break;
    case Algo::MacCac:
      dc = round_cac(all, true, false);
      da = round_cac(all, false, true);
      break;
    case Algo::NaiveMacIacc:
      dc = round_naive(all, true, false);
      da = round_naive(all, false, true);
      break;
    case Algo::MacIaicc:
      dc = round_iaicc(all, true, false);
      da = round_iaicc(all, false, true);
      break;
  }
  Diagnostics d = da;
  d.critic_loss = dc.critic_loss;
  d.mean_abs_td = dc.mean_abs_td;
  d.critic_grad_norm = dc.critic_grad_norm;
  d.critic_rows = dc.critic_rows;
  buffer_.clear();
  ++version_;
  return d;
}

void Learner::sync_targets() {
  for (size_t i = 0; i < critics_.size(); ++i)
    targets_[i] = critics_[i].clone();
}

std::vector<std::pair<std::string, RecurrentNet*>> Learner::checkpoint_nets() {
  std::vector<std::pair<std::string, RecurrentNet*>> nets;
  for (size_t i = 0; i < actors_.size(); ++i)
    nets.emplace_back("actor" + std::to_string(i), &actors_[i]);
  for (size_t i = 0; i < critics_.size(); ++i)
    nets.emplace_back("critic" + std::to_string(i), &critics_[i]);
  for (size_t i = 0; i < targets_.size(); ++i)
    nets.emplace_back("target" + std::to_string(i), &targets_[i]);
  return nets;
}

std::vector<Vec<float>> Learner::critic_inputs(
    const std::vector<JointSqueezed>& rows,
    const std::vector<Obs>& states) const {
  switch (cfg_.critic_input) {
    case CriticInputKind::JointHistory:
      return joint_history_inputs(rows, n_macros_, true);
    case CriticInputKind::State:
      return state_inputs(rows, states, true);
    case CriticInputKind::Both: {
      auto hist = joint_history_inputs(rows, n_macros_, true);
      auto st = state_inputs(rows, states, true);
      for (size_t k = 0; k < hist.size(); ++k) {
        Vec<float> x(hist[k].size() + st[k].size());
        x << hist[k], st[k];
        hist[k] = std::move(x);
      }
      return hist;
    }
  }
  return {};
}

Diagnostics Learner::round_iac(const Batch& batch, bool do_critic,
                               bool do_actor) {
  Diagnostics diag;
  double td_sq = 0, td_abs = 0, ent = 0, c_norm_sq = 0, a_norm_sq = 0;
  for (int i = 0; i < n_agents_; ++i) {
    NetBatch cb, ab;
    for (const EpisodeLog* logp : batch) {
      const EpisodeLog& log = *logp;
      auto rows = squeeze_agent(log.per_agent[i], cfg_.gamma, log.terminal);
      auto cin = agent_history_inputs(rows, n_macros_[i], true);
      ForwardCache<float> cache;
      auto outs = critics_[i].forward(cin, &cache);
      auto v_tgt = forward_values(targets_[i], cin);
      std::vector<TdRow> td_rows;
      std::vector<double> v_next;
      for (size_t k = 0; k < rows.size(); ++k) {
        td_rows.push_back({rows[k].rc, rows[k].tau,
                         rows[k].env_terminal});
        v_next.push_back(v_tgt[k + 1]);
      }
      auto y = td_targets(td_rows, v_next, cfg_.gamma, cfg_.n_step);
      std::vector<double> delta(rows.size());
      const size_t ce = cb.open(std::move(cin), std::move(cache));
      for (size_t k = 0; k < rows.size(); ++k) {
        delta[k] = y[k] - value_of(outs[k]);
        cb.douts[ce][k](0) = static_cast<float>(-2.0 * delta[k]);
        td_sq += delta[k] * delta[k];
        td_abs += std::abs(delta[k]);
      }
      cb.rows += static_cast<long>(rows.size());
      if (!do_actor) continue;

      auto ain = agent_history_inputs(rows, n_macros_[i], false);
      ForwardCache<float> acache;
      auto probs = actors_[i].forward(ain, &acache);
      const size_t ae = ab.open(std::move(ain), std::move(acache));
      for (size_t k = 0; k < rows.size(); ++k) {
        add_score_grad(ab.douts[ae][k], 0, probs[k], n_macros_[i], rows[k].m,
                       delta[k]);
        ent += entropy_of(probs[k].data(), n_macros_[i]);
      }
      ab.rows += static_cast<long>(rows.size());
    }
    diag.critic_rows += cb.rows;
    diag.actor_rows += ab.rows;
    if (do_critic) c_norm_sq += apply_batch(critics_[i], cb, critic_opt_[i]);
    if (do_actor) a_norm_sq += apply_batch(actors_[i], ab, actor_opt_[i]);
  }
  diag.critic_loss = diag.critic_rows ? td_sq / diag.critic_rows : 0;
  diag.mean_abs_td = diag.critic_rows ? td_abs / diag.critic_rows : 0;
  diag.actor_entropy = diag.actor_rows ? ent / diag.actor_rows : 0;
  diag.critic_grad_norm = std::sqrt(c_norm_sq);
  diag.actor_grad_norm = std::sqrt(a_norm_sq);
  return diag;
}

Diagnostics Learner::round_cac(const Batch& batch, bool do_critic,
                               bool do_actor) {
  Diagnostics diag;
  double td_sq = 0, td_abs = 0, ent = 0;
  NetBatch cb, ab;
  std::vector<int> block_off(n_agents_, 0);
  for (int i = 1; i < n_agents_; ++i)
    block_off[i] = block_off[i - 1] + n_macros_[i - 1];
  for (const EpisodeLog* logp : batch) {
    const EpisodeLog& log = *logp;
    auto rows = squeeze_joint(log.joint, cfg_.gamma, log.terminal);
    auto cin = critic_inputs(rows, log.states);
    ForwardCache<float> cache;
    auto outs = critics_[0].forward(cin, &cache);
    auto v_tgt = forward_values(targets_[0], cin);
    std::vector<TdRow> td_rows;
    std::vector<double> v_next;
    for (size_t k = 0; k < rows.size(); ++k) {
      td_rows.push_back({rows[k].rc, rows[k].tau,
                         rows[k].env_terminal});
      v_next.push_back(v_tgt[k + 1]);
    }
    auto y = td_targets(td_rows, v_next, cfg_.gamma, cfg_.n_step);
    std::vector<double> delta(rows.size());
    const size_t ce = cb.open(std::move(cin), std::move(cache));
    for (size_t k = 0; k < rows.size(); ++k) {
      delta[k] = y[k] - value_of(outs[k]);
      cb.douts[ce][k](0) = static_cast<float>(-2.0 * delta[k]);
      td_sq += delta[k] * delta[k];
      td_abs += std::abs(delta[k]);
    }
    cb.rows += static_cast<long>(rows.size());
    if (!do_actor) continue;

    auto ain = joint_history_inputs(rows, n_macros_, false);
    ForwardCache<float> acache;
    auto probs = actors_[0].forward(ain, &acache);
    const size_t ae = ab.open(std::move(ain), std::move(acache));
    for (size_t k = 0; k < rows.size(); ++k) {
      for (int i = 0; i < n_agents_; ++i) {
        if (!rows[k].reselect[i]) continue;
        add_score_grad(ab.douts[ae][k], block_off[i], probs[k], n_macros_[i],
                       rows[k].m[i], delta[k]);
        ent += entropy_of(probs[k].data() + block_off[i], n_macros_[i]);
        ++ab.rows;
      }
    }
  }
  diag.critic_rows = cb.rows;
  diag.actor_rows = ab.rows;
  if (do_critic)
    diag.critic_grad_norm = std::sqrt(apply_batch(critics_[0], cb,
                                                  critic_opt_[0]));
  if (do_actor)
    diag.actor_grad_norm = std::sqrt(apply_batch(actors_[0], ab,
                                                 actor_opt_[0]));
  diag.critic_loss = cb.rows ? td_sq / cb.rows : 0;
  diag.mean_abs_td = cb.rows ? td_abs / cb.rows : 0;
  diag.actor_entropy = ab.rows ? ent / ab.rows : 0;
  return diag;
}

Diagnostics Learner::round_naive(const Batch& batch, bool do_critic,
                               bool do_actor) {
  Diagnostics diag;
  double td_sq = 0, td_abs = 0, ent = 0, a_norm_sq = 0;
  NetBatch cb;
  // per episode: the shared critic's TD error keyed by row start time
  std::vector<std::unordered_map<int, double>> delta_at(batch.size());
  for (size_t e = 0; e < batch.size(); ++e) {
    const auto& log = *batch[e];
    auto rows = squeeze_joint(log.joint, cfg_.gamma, log.terminal);
    auto cin = critic_inputs(rows, log.states);
    ForwardCache<float> cache;
    auto outs = critics_[0].forward(cin, &cache);
    auto v_tgt = forward_values(targets_[0], cin);
    std::vector<TdRow> td_rows;
    std::vector<double> v_next;
    for (size_t k = 0; k < rows.size(); ++k) {
      td_rows.push_back({rows[k].rc, rows[k].tau,
                         rows[k].env_terminal});
      v_next.push_back(v_tgt[k + 1]);
    }
    auto y = td_targets(td_rows, v_next, cfg_.gamma, cfg_.n_step);
    const size_t ce = cb.open(std::move(cin), std::move(cache));
    for (size_t k = 0; k < rows.size(); ++k) {
      const double delta = y[k] - value_of(outs[k]);
      cb.douts[ce][k](0) = static_cast<float>(-2.0 * delta);
      delta_at[e][rows[k].t_start] = delta;
      td_sq += delta * delta;
      td_abs += std::abs(delta);
    }
    cb.rows += static_cast<long>(rows.size());
  }
  diag.critic_rows = cb.rows;
  if (do_critic)
    diag.critic_grad_norm = std::sqrt(apply_batch(critics_[0], cb,
                                                  critic_opt_[0]));

  for (int i = 0; do_actor && i < n_agents_; ++i) {
    NetBatch ab;
    for (size_t e = 0; e < batch.size(); ++e) {
      const auto& log = *batch[e];
      auto rows = squeeze_agent(log.per_agent[i], cfg_.gamma, log.terminal);
      auto ain = agent_history_inputs(rows, n_macros_[i], false);
      ForwardCache<float> acache;
      auto probs = actors_[i].forward(ain, &acache);
      const size_t ae = ab.open(std::move(ain), std::move(acache));
      for (size_t k = 0; k < rows.size(); ++k) {
        // every own decision time opens a joint row, so this lookup holds
        const double adv = delta_at[e].at(rows[k].t_start);
        add_score_grad(ab.douts[ae][k], 0, probs[k], n_macros_[i], rows[k].m,
                       adv);
        ent += entropy_of(probs[k].data(), n_macros_[i]);
      }
      ab.rows += static_cast<long>(rows.size());
    }
    diag.actor_rows += ab.rows;
    if (do_actor) a_norm_sq += apply_batch(actors_[i], ab, actor_opt_[i]);
  }
  diag.critic_loss = cb.rows ? td_sq / cb.rows : 0;
  diag.mean_abs_td = cb.rows ? td_abs / cb.rows : 0;
  diag.actor_entropy = diag.actor_rows ? ent / diag.actor_rows : 0;
  diag.actor_grad_norm = std::sqrt(a_norm_sq);
  return diag;
}

Diagnostics Learner::round_iaicc(const Batch& batch, bool do_critic,
                               bool do_actor) {
  Diagnostics diag;
  double td_sq = 0, td_abs = 0, ent = 0, c_norm_sq = 0, a_norm_sq = 0;
  for (int i = 0; i < n_agents_; ++i) {
    NetBatch cb, ab;
    for (const EpisodeLog* logp : batch) {
      const EpisodeLog& log = *logp;
      auto st = squeeze_iaicc(log.joint, log.per_agent[i], i, cfg_.gamma,
                              log.terminal);
      auto cin = critic_inputs(st.critic, log.states);
      ForwardCache<float> cache;
      auto outs = critics_[i].forward(cin, &cache);
      auto v_tgt = forward_values(targets_[i], cin);
      // TD errors span this agent's macro executions: the value at the row
      // where the macro was selected regresses onto the accumulated reward
      // plus the bootstrap right after the row where the macro ends. The
      // rows in between (teammate terminations) only advance the critic's
      // recurrent state.
      std::vector<size_t> decision, ending;
      std::vector<TdRow> td_rows;
      std::vector<double> v_next;
      for (size_t k = 0; k < st.critic.size(); ++k) {
        if (!st.mask[k]) continue;
        decision.push_back(ending.empty() ? 0 : ending.back() + 1);
        ending.push_back(k);
        td_rows.push_back({st.rc_i[k], st.tau_i[k],
                           st.critic[k].env_terminal});
        v_next.push_back(v_tgt[k + 1]);
      }
      auto y = td_targets(td_rows, v_next, cfg_.gamma, cfg_.n_step);
      std::vector<double> delta(ending.size());
      const size_t ce = cb.open(std::move(cin), std::move(cache));
      for (size_t m = 0; m < ending.size(); ++m) {
        delta[m] = y[m] - value_of(outs[decision[m]]);
        cb.douts[ce][decision[m]](0) = static_cast<float>(-2.0 * delta[m]);
        td_sq += delta[m] * delta[m];
        td_abs += std::abs(delta[m]);
      }
      cb.rows += static_cast<long>(ending.size());
      if (!do_actor) continue;

      auto ain = agent_history_inputs(st.actor, n_macros_[i], false);
      ForwardCache<float> acache;
      auto probs = actors_[i].forward(ain, &acache);
      const size_t ae = ab.open(std::move(ain), std::move(acache));
      const size_t n_done = std::min(st.actor.size(), delta.size());
      for (size_t k = 0; k < n_done; ++k) {
        add_score_grad(ab.douts[ae][k], 0, probs[k], n_macros_[i],
                       st.actor[k].m, delta[k]);
        ent += entropy_of(probs[k].data(), n_macros_[i]);
      }
      ab.rows += static_cast<long>(n_done);
    }
    diag.critic_rows += cb.rows;
    diag.actor_rows += ab.rows;
    if (do_critic) c_norm_sq += apply_batch(critics_[i], cb, critic_opt_[i]);
    if (do_actor) a_norm_sq += apply_batch(actors_[i], ab, actor_opt_[i]);
  }
  diag.critic_loss = diag.critic_rows ? td_sq / diag.critic_rows : 0;
  diag.mean_abs_td = diag.critic_rows ? td_abs / diag.critic_rows : 0;
  diag.actor_entropy = diag.actor_rows ? ent / diag.actor_rows : 0;
  diag.critic_grad_norm = std::sqrt(c_norm_sq);
  diag.actor_grad_norm = std::sqrt(a_norm_sq);
  return diag;
}

}  // namespace maac
