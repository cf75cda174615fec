#pragma once

#include <Eigen/Core>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "maac/rng.hpp"

namespace maac {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class HeadKind { Softmax, Value };

constexpr float kLeakySlope = 0.01f;

// MLP -> MLP -> GRU -> MLP -> linear head. Softmax heads may be split into
// blocks (one block per agent for a factored joint actor); a single block is
// an ordinary softmax.
struct NetSpec {
  int input_dim = 0;
  int fc1 = 32, fc2 = 32, gru = 32, fc3 = 32;
  HeadKind head = HeadKind::Value;
  std::vector<int> head_blocks;  // used when head == Softmax

  int output_dim() const {
    if (head == HeadKind::Value) return 1;
    int d = 0;
    for (int b : head_blocks) d += b;
    return d;
  }

  long param_count() const {
    long in = input_dim, f1 = fc1, f2 = fc2, g = gru, f3 = fc3,
         out = output_dim();
    return f1 * (in + 1) + f2 * (f1 + 1) + 3 * (g * f2 + g * g + 2 * g) +
           f3 * (g + 1) + out * (f3 + 1);
  }

  std::string describe() const;
};

template <class T>
struct NetParams {
  Mat<T> W1, b1, W2, b2;
  Mat<T> Wir, Wiz, Win, Whr, Whz, Whn;
  Mat<T> bir, biz, bin, bhr, bhz, bhn;
  Mat<T> W3, b3, Wh, bh;

  struct Named {
    const char* name;
    Mat<T>* m;
  };

  std::vector<Named> named() {
    return {{"fc1.W", &W1},   {"fc1.b", &b1},   {"fc2.W", &W2},
            {"fc2.b", &b2},   {"gru.Wir", &Wir}, {"gru.Wiz", &Wiz},
            {"gru.Win", &Win}, {"gru.Whr", &Whr}, {"gru.Whz", &Whz},
            {"gru.Whn", &Whn}, {"gru.bir", &bir}, {"gru.biz", &biz},
            {"gru.bin", &bin}, {"gru.bhr", &bhr}, {"gru.bhz", &bhz},
            {"gru.bhn", &bhn}, {"fc3.W", &W3},   {"fc3.b", &b3},
            {"head.W", &Wh},  {"head.b", &bh}};
  }

  void setup(const NetSpec& s) {
    W1.setZero(s.fc1, s.input_dim);
    b1.setZero(s.fc1, 1);
    W2.setZero(s.fc2, s.fc1);
    b2.setZero(s.fc2, 1);
    Wir.setZero(s.gru, s.fc2);
    Wiz.setZero(s.gru, s.fc2);
    Win.setZero(s.gru, s.fc2);
    Whr.setZero(s.gru, s.gru);
    Whz.setZero(s.gru, s.gru);
    Whn.setZero(s.gru, s.gru);
    bir.setZero(s.gru, 1);
    biz.setZero(s.gru, 1);
    bin.setZero(s.gru, 1);
    bhr.setZero(s.gru, 1);
    bhz.setZero(s.gru, 1);
    bhn.setZero(s.gru, 1);
    W3.setZero(s.fc3, s.gru);
    b3.setZero(s.fc3, 1);
    Wh.setZero(s.output_dim(), s.fc3);
    bh.setZero(s.output_dim(), 1);
  }

  long count() const {
    long n = 0;
    for (auto& p : const_cast<NetParams*>(this)->named()) n += p.m->size();
    return n;
  }

  void scale_add(const NetParams<T>& other, T alpha) {
    auto a = named();
    auto b = const_cast<NetParams<T>&>(other).named();
    for (size_t i = 0; i < a.size(); ++i) *a[i].m += alpha * (*b[i].m);
  }

  template <class U>
  NetParams<U> cast() const {
    NetParams<U> out;
    auto a = const_cast<NetParams*>(this)->named();
    auto b = out.named();
    for (size_t i = 0; i < a.size(); ++i)
      *b[i].m = a[i].m->template cast<U>();
    return out;
  }
};

template <class T>
struct StepCache {
  Vec<T> x, a1, a2, r, zg, q, n, h_prev, h, a3, out;
};

template <class T>
struct ForwardCache {
  std::vector<StepCache<T>> steps;
  Vec<T> h_final;
};

template <class T>
inline Vec<T> leaky(const Vec<T>& v) {
  return v.unaryExpr([](T x) { return x > T(0) ? x : T(kLeakySlope) * x; });
}

template <class T>
inline Vec<T> leaky_grad(const Vec<T>& a) {
  return a.unaryExpr([](T x) { return x > T(0) ? T(1) : T(kLeakySlope); });
}

template <class T>
inline Vec<T> sigmoid(const Vec<T>& v) {
  return v.unaryExpr([](T x) { return T(1) / (T(1) + std::exp(-x)); });
}

template <class T>
Vec<T> net_step(const NetSpec& spec, const NetParams<T>& p, const Vec<T>& x,
                Vec<T>& h, StepCache<T>* cache) {
  (void)spec;
  Vec<T> a1 = leaky<T>(p.W1 * x + p.b1);
  Vec<T> a2 = leaky<T>(p.W2 * a1 + p.b2);
  Vec<T> r = sigmoid<T>(p.Wir * a2 + p.bir + p.Whr * h + p.bhr);
  Vec<T> zg = sigmoid<T>(p.Wiz * a2 + p.biz + p.Whz * h + p.bhz);
  Vec<T> q = p.Whn * h + p.bhn;
  Vec<T> n =
      (p.Win * a2 + p.bin + r.cwiseProduct(q)).array().tanh().matrix();
  Vec<T> h_new = (Vec<T>::Ones(h.size()) - zg).cwiseProduct(n) +
                 zg.cwiseProduct(h);
  Vec<T> a3 = leaky<T>(p.W3 * h_new + p.b3);
  Vec<T> out = p.Wh * a3 + p.bh;
  if (cache) {
    cache->x = x;
    cache->a1 = a1;
    cache->a2 = a2;
    cache->r = r;
    cache->zg = zg;
    cache->q = q;
    cache->n = n;
    cache->h_prev = h;
    cache->a3 = a3;
    cache->out = out;
  }
  h = h_new;
  if (cache) cache->h = h_new;
  return out;
}

// Head outputs per step: softmax probabilities per block, or the raw scalar.
template <class T>
Vec<T> head_output(const NetSpec& spec, const Vec<T>& out) {
  if (spec.head == HeadKind::Value) return out;
  Vec<T> probs(out.size());
  int off = 0;
  for (int b : spec.head_blocks) {
    T mx = out.segment(off, b).maxCoeff();
    T sum = T(0);
    for (int i = 0; i < b; ++i) {
      probs(off + i) = std::exp(out(off + i) - mx);
      sum += probs(off + i);
    }
    probs.segment(off, b) /= sum;
    off += b;
  }
  return probs;
}

// Runs the net over an input sequence. Returns the head outputs per step
// (probabilities for softmax heads, raw value otherwise).
template <class T>
std::vector<Vec<T>> forward_sequence(const NetSpec& spec,
                                     const NetParams<T>& p,
                                     const std::vector<Vec<T>>& inputs,
                                     Vec<T> h0, ForwardCache<T>* cache) {
  if (!inputs.empty() && inputs[0].size() != spec.input_dim)
    throw std::invalid_argument("forward_sequence: input dimension mismatch");
  Vec<T> h = h0.size() ? h0 : Vec<T>::Zero(spec.gru);
  std::vector<Vec<T>> outputs;
  if (cache) cache->steps.resize(inputs.size());
  for (size_t t = 0; t < inputs.size(); ++t) {
    Vec<T> out = net_step<T>(spec, p, inputs[t], h,
                             cache ? &cache->steps[t] : nullptr);
    outputs.push_back(head_output<T>(spec, out));
  }
  if (cache) cache->h_final = h;
  return outputs;
}

// Exact BPTT. `dout` holds per-step gradients of the loss w.r.t. the head's
// linear output (logits for softmax heads, the scalar for value heads);
// masked-out steps simply carry a zero gradient. Gradients are accumulated
// into `grads`.
template <class T>
void backward_sequence(const NetSpec& spec, const NetParams<T>& p,
                       const ForwardCache<T>& cache,
                       const std::vector<Vec<T>>& dout, NetParams<T>& grads) {
  if (dout.size() != cache.steps.size())
    throw std::invalid_argument("backward_sequence: cache/gradient mismatch");
  Vec<T> dh_next = Vec<T>::Zero(spec.gru);
  for (int t = static_cast<int>(cache.steps.size()) - 1; t >= 0; --t) {
    const auto& c = cache.steps[t];
    Vec<T> da3 = p.Wh.transpose() * dout[t];
    grads.Wh += dout[t] * c.a3.transpose();
    grads.bh += dout[t];
    Vec<T> dpre3 = da3.cwiseProduct(leaky_grad<T>(c.a3));
    grads.W3 += dpre3 * c.h.transpose();
    grads.b3 += dpre3;
    Vec<T> dh = p.W3.transpose() * dpre3 + dh_next;

    Vec<T> dzg = dh.cwiseProduct(c.h_prev - c.n);
    Vec<T> dn = dh.cwiseProduct(Vec<T>::Ones(spec.gru) - c.zg);
    Vec<T> dh_prev = dh.cwiseProduct(c.zg);

    Vec<T> dn_pre = dn.cwiseProduct(
        (Vec<T>::Ones(spec.gru) - c.n.cwiseProduct(c.n)));
    grads.Win += dn_pre * c.a2.transpose();
    grads.bin += dn_pre;
    Vec<T> dq = dn_pre.cwiseProduct(c.r);
    Vec<T> dr = dn_pre.cwiseProduct(c.q);
    grads.Whn += dq * c.h_prev.transpose();
    grads.bhn += dq;
    dh_prev += p.Whn.transpose() * dq;

    Vec<T> dr_pre = dr.cwiseProduct(c.r).cwiseProduct(
        Vec<T>::Ones(spec.gru) - c.r);
    grads.Wir += dr_pre * c.a2.transpose();
    grads.bir += dr_pre;
    grads.Whr += dr_pre * c.h_prev.transpose();
    grads.bhr += dr_pre;
    dh_prev += p.Whr.transpose() * dr_pre;

    Vec<T> dzg_pre = dzg.cwiseProduct(c.zg).cwiseProduct(
        Vec<T>::Ones(spec.gru) - c.zg);
    grads.Wiz += dzg_pre * c.a2.transpose();
    grads.biz += dzg_pre;
    grads.Whz += dzg_pre * c.h_prev.transpose();
    grads.bhz += dzg_pre;
    dh_prev += p.Whz.transpose() * dzg_pre;

    Vec<T> da2 = p.Win.transpose() * dn_pre + p.Wir.transpose() * dr_pre +
                 p.Wiz.transpose() * dzg_pre;
    Vec<T> dpre2 = da2.cwiseProduct(leaky_grad<T>(c.a2));
    grads.W2 += dpre2 * c.a1.transpose();
    grads.b2 += dpre2;
    Vec<T> da1 = p.W2.transpose() * dpre2;
    Vec<T> dpre1 = da1.cwiseProduct(leaky_grad<T>(c.a1));
    grads.W1 += dpre1 * c.x.transpose();
    grads.b1 += dpre1;

    dh_next = dh_prev;
  }
}

// Parameter container with its spec; the unit every actor and critic owns.
struct RecurrentNet {
  NetSpec spec;
  NetParams<float> params;

  explicit RecurrentNet(const NetSpec& s = {}) : spec(s) { params.setup(s); }

  void init(Rng& rng);  // fan-in-scaled uniform weights, zero biases

  std::vector<Vec<float>> forward(const std::vector<Vec<float>>& inputs,
                                  ForwardCache<float>* cache = nullptr) const {
    return forward_sequence<float>(spec, params, inputs, {}, cache);
  }

  RecurrentNet clone() const { return *this; }  // target_sync
};

// Adaptive-moment optimizer state; moment arrays shaped like the parameters.
struct AdamState {
  NetParams<float> m, v;
  long step = 0;
  float lr = 1e-3f;
  float beta1 = 0.9f, beta2 = 0.999f;
  float eps = 1e-8f;

  void setup(const NetSpec& spec, float learning_rate) {
    m.setup(spec);
    v.setup(spec);
    lr = learning_rate;
    step = 0;
  }
};

// One update; throws on non-finite gradients, naming the parameter.
void optimizer_step(NetParams<float>& params, NetParams<float>& grads,
                    AdamState& state);

// Checkpoint container: named parameter arrays + metadata, bit-exact.
void save_checkpoint(const std::string& path,
                     const std::map<std::string, std::string>& metadata,
                     std::vector<std::pair<std::string, RecurrentNet*>> nets);
std::map<std::string, std::string> load_checkpoint(
    const std::string& path,
    std::vector<std::pair<std::string, RecurrentNet*>> nets);

}  // namespace maac
