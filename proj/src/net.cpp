#include "maac/net.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maac {

std::string NetSpec::describe() const {
  std::ostringstream os;
  os << "in=" << input_dim << " fc=" << fc1 << "/" << fc2 << " gru=" << gru
     << " fc3=" << fc3
     << " head=" << (head == HeadKind::Value ? "value" : "softmax");
  if (head == HeadKind::Softmax) {
    os << "[";
    for (size_t i = 0; i < head_blocks.size(); ++i)
      os << (i ? "," : "") << head_blocks[i];
    os << "]";
  }
  return os.str();
}

void RecurrentNet::init(Rng& rng) {
  params.setup(spec);
  for (auto& np : params.named()) {
    Mat<float>& m = *np.m;
    const bool is_bias = m.cols() == 1 && std::strstr(np.name, ".b");
    if (is_bias) {
      m.setZero();
      continue;
    }
    const float bound = 1.0f / std::sqrt(static_cast<float>(m.cols()));
    float* data = m.data();
    for (long i = 0; i < m.size(); ++i)
      data[i] = static_cast<float>(rng.uniform(-bound, bound));
  }
}

void optimizer_step(NetParams<float>& params, NetParams<float>& grads,
                    AdamState& state) {
  ++state.step;
  const float b1 = state.beta1, b2 = state.beta2;
  const float corr1 = 1.0f - std::pow(b1, static_cast<float>(state.step));
  const float corr2 = 1.0f - std::pow(b2, static_cast<float>(state.step));
  auto ps = params.named();
  auto gs = grads.named();
  auto ms = state.m.named();
  auto vs = state.v.named();
  for (size_t i = 0; i < ps.size(); ++i) {
    const float* g = gs[i].m->data();
    for (long k = 0; k < gs[i].m->size(); ++k)
      if (!std::isfinite(g[k]))
        throw std::runtime_error(std::string("non-finite gradient in ") +
                                 gs[i].name);
    *ms[i].m = b1 * (*ms[i].m) + (1.0f - b1) * (*gs[i].m);
    *vs[i].m = b2 * (*vs[i].m).array().matrix() +
               (1.0f - b2) * gs[i].m->array().square().matrix();
    Mat<float> mhat = *ms[i].m / corr1;
    Mat<float> vhat = *vs[i].m / corr2;
    ps[i].m->array() -=
        state.lr * mhat.array() / (vhat.array().sqrt() + state.eps);
  }
}

namespace {

constexpr char kMagic[8] = {'M', 'A', 'A', 'C', 'N', 'E', 'T', '1'};

void write_string(std::ostream& os, const std::string& s) {
  std::uint32_t n = static_cast<std::uint32_t>(s.size());
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(s.data(), n);
}

std::string read_string(std::istream& is) {
  std::uint32_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::map<std::string, std::string>& metadata,
                     std::vector<std::pair<std::string, RecurrentNet*>> nets) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
  os.write(kMagic, sizeof(kMagic));
  std::uint32_t nmeta = static_cast<std::uint32_t>(metadata.size());
  os.write(reinterpret_cast<const char*>(&nmeta), sizeof(nmeta));
  for (const auto& [k, v] : metadata) {
    write_string(os, k);
    write_string(os, v);
  }
  std::uint32_t nnets = static_cast<std::uint32_t>(nets.size());
  os.write(reinterpret_cast<const char*>(&nnets), sizeof(nnets));
  for (auto& [prefix, net] : nets) {
    write_string(os, prefix);
    auto named = net->params.named();
    std::uint32_t narr = static_cast<std::uint32_t>(named.size());
    os.write(reinterpret_cast<const char*>(&narr), sizeof(narr));
    for (auto& np : named) {
      write_string(os, np.name);
      std::uint64_t rows = np.m->rows(), cols = np.m->cols();
      os.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
      os.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
      // row-major 32-bit values
      for (long r = 0; r < np.m->rows(); ++r)
        for (long c = 0; c < np.m->cols(); ++c) {
          float v = (*np.m)(r, c);
          os.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
  }
}

std::map<std::string, std::string> load_checkpoint(
    const std::string& path,
    std::vector<std::pair<std::string, RecurrentNet*>> nets) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad checkpoint magic: " + path);
  std::uint32_t nmeta = 0;
  is.read(reinterpret_cast<char*>(&nmeta), sizeof(nmeta));
  std::map<std::string, std::string> metadata;
  for (std::uint32_t i = 0; i < nmeta; ++i) {
    std::string k = read_string(is);
    metadata[k] = read_string(is);
  }
  std::uint32_t nnets = 0;
  is.read(reinterpret_cast<char*>(&nnets), sizeof(nnets));
  if (nnets != nets.size())
    throw std::runtime_error("checkpoint net count mismatch");
  for (auto& [prefix, net] : nets) {
    std::string stored = read_string(is);
    if (stored != prefix)
      throw std::runtime_error("checkpoint net name mismatch: expected " +
                               prefix + ", got " + stored);
    std::uint32_t narr = 0;
    is.read(reinterpret_cast<char*>(&narr), sizeof(narr));
    auto named = net->params.named();
    if (narr != named.size())
      throw std::runtime_error("checkpoint array count mismatch");
    for (auto& np : named) {
      std::string name = read_string(is);
      if (name != np.name)
        throw std::runtime_error("checkpoint array name mismatch: " + name);
      std::uint64_t rows = 0, cols = 0;
      is.read(reinterpret_cast<char*>(&rows), sizeof(rows));
      is.read(reinterpret_cast<char*>(&cols), sizeof(cols));
      if (static_cast<long>(rows) != np.m->rows() ||
          static_cast<long>(cols) != np.m->cols())
        throw std::runtime_error("checkpoint shape mismatch for " + name);
      for (long r = 0; r < np.m->rows(); ++r)
        for (long c = 0; c < np.m->cols(); ++c) {
          float v = 0;
          is.read(reinterpret_cast<char*>(&v), sizeof(v));
          (*np.m)(r, c) = v;
        }
    }
  }
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  return metadata;
}

}  // namespace maac
