#pragma once

// Fourier-feature tanh MLP with a softplus head, evaluated on plain values or
// on second-order jets, optionally recording onto a reverse tape.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "impinn/error.hpp"
#include "impinn/jet.hpp"
#include "impinn/kernels.hpp"
#include "impinn/tape.hpp"

namespace impinn::network {

using ad::Jet2;
using Point3 = std::array<double, 3>;  // (u, v, t / T)

struct NetworkConfig {
  int fourier_features = 128;
  double sigma_scale = 10.0;
  int depth = 4;
  int width = 128;
  std::uint64_t embedding_seed = 1234;
  std::uint64_t init_seed = 42;
};

struct FourierEmbedding {
  int m = 0;
  double sigma_scale = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> B;  // m x 3, row-major; never trained

  int output_dim() const { return 2 * m; }
};

inline FourierEmbedding make_embedding(int m, double sigma_scale,
                                       std::uint64_t seed) {
  if (m < 1 || !(sigma_scale >= 0.0)) {
    throw Error(ErrorKind::Validation,
                "network.fourier_features must be >= 1 and sigma_scale >= 0");
  }
  FourierEmbedding e;
  e.m = m;
  e.sigma_scale = sigma_scale;
  e.seed = seed;
  e.B.resize(static_cast<std::size_t>(m) * 3);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& b : e.B) b = sigma_scale * normal(rng);
  return e;
}

inline FourierEmbedding make_embedding(const NetworkConfig& cfg) {
  return make_embedding(cfg.fourier_features, cfg.sigma_scale,
                        cfg.embedding_seed);
}

namespace detail {
inline double phase(const FourierEmbedding& e, int i, const Point3& x) {
  const double* b = e.B.data() + 3 * static_cast<std::size_t>(i);
  return 2.0 * std::numbers::pi * (b[0] * x[0] + b[1] * x[1] + b[2] * x[2]);
}
}  // namespace detail

// gamma(x) = [cos(2 pi B x), sin(2 pi B x)].
inline std::vector<double> embed(const FourierEmbedding& e, const Point3& x) {
  std::vector<double> out(static_cast<std::size_t>(2 * e.m));
  for (int i = 0; i < e.m; ++i) {
    const double s = detail::phase(e, i, x);
    out[static_cast<std::size_t>(i)] = std::cos(s);
    out[static_cast<std::size_t>(e.m + i)] = std::sin(s);
  }
  return out;
}

// Embedding of a batch as a jet block (rows = 2m). With stride 10 the
// derivative coefficients are taken w.r.t. the network inputs.
inline std::vector<double> embed_block(const FourierEmbedding& e,
                                       std::span<const Point3> points,
                                       int stride) {
  const std::size_t ld = ad::kernels::padded_columns(points.size() *
                                                     static_cast<std::size_t>(stride));
  std::vector<double> data(static_cast<std::size_t>(2 * e.m) * ld, 0.0);
  for (int i = 0; i < e.m; ++i) {
    double* cos_row = data.data() + static_cast<std::size_t>(i) * ld;
    double* sin_row = data.data() + static_cast<std::size_t>(e.m + i) * ld;
    const double* b = e.B.data() + 3 * static_cast<std::size_t>(i);
    const double ds[3] = {2.0 * std::numbers::pi * b[0],
                          2.0 * std::numbers::pi * b[1],
                          2.0 * std::numbers::pi * b[2]};
    for (std::size_t p = 0; p < points.size(); ++p) {
      const double s = detail::phase(e, i, points[p]);
      const double c = std::cos(s), sn = std::sin(s);
      double* jc = cos_row + p * stride;
      double* js = sin_row + p * stride;
      jc[0] = c;
      js[0] = sn;
      if (stride == 1) continue;
      for (int a = 0; a < 3; ++a) {
        jc[1 + a] = -sn * ds[a];
        js[1 + a] = c * ds[a];
      }
      for (int a = 0; a < 3; ++a) {
        for (int bb = a; bb < 3; ++bb) {
          const int k = 1 + ad::kInputs + ad::sym_index(a, bb);
          jc[k] = -c * ds[a] * ds[bb];
          js[k] = -sn * ds[a] * ds[bb];
        }
      }
    }
  }
  return data;
}

struct LayerView {
  int in = 0;
  int out = 0;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;
};

inline std::vector<LayerView> layer_layout(int input_dim, int depth, int width,
                                           int output_dim = 2) {
  std::vector<LayerView> layers;
  std::size_t offset = 0;
  int in = input_dim;
  for (int l = 0; l <= depth; ++l) {
    const int out = (l == depth) ? output_dim : width;
    LayerView v{in, out, offset, 0};
    offset += static_cast<std::size_t>(in) * out;
    v.bias_offset = offset;
    offset += static_cast<std::size_t>(out);
    layers.push_back(v);
    in = out;
  }
  return layers;
}

inline std::size_t count_params(const NetworkConfig& cfg) {
  const auto layers =
      layer_layout(2 * cfg.fourier_features, cfg.depth, cfg.width);
  return layers.back().bias_offset + static_cast<std::size_t>(layers.back().out);
}

struct NetworkParams {
  std::vector<LayerView> layers;
  std::vector<double> theta;

  std::size_t size() const { return theta.size(); }
  int input_dim() const { return layers.front().in; }
};

inline NetworkParams zero_params(const NetworkConfig& cfg) {
  if (cfg.depth < 1 || cfg.width < 1) {
    throw Error(ErrorKind::Validation,
                "network.depth and network.width must be >= 1");
  }
  NetworkParams p;
  p.layers = layer_layout(2 * cfg.fourier_features, cfg.depth, cfg.width);
  p.theta.assign(count_params(cfg), 0.0);
  return p;
}

// Xavier-uniform weights, zero biases.
inline NetworkParams init_params(const NetworkConfig& cfg) {
  NetworkParams p = zero_params(cfg);
  std::mt19937_64 rng(cfg.init_seed);
  for (const LayerView& l : p.layers) {
    const double limit = std::sqrt(6.0 / (l.in + l.out));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    const std::size_t n = static_cast<std::size_t>(l.in) * l.out;
    for (std::size_t i = 0; i < n; ++i) p.theta[l.weight_offset + i] = uniform(rng);
  }
  return p;
}

struct FieldOutput {
  double U = 0.0;
  double V = 0.0;
};

struct FieldJets {
  Jet2 U;
  Jet2 V;
};

// Output block of the network for a batch: 2 rows (U, V) x padded columns.
struct OutputBlock {
  std::size_t points = 0;
  int stride = 1;
  std::size_t ld = 0;
  std::vector<double> data;

  double at(int channel, std::size_t p, int coeff) const {
    return data[static_cast<std::size_t>(channel) * ld + p * stride + coeff];
  }

  Jet2 jet(int channel, std::size_t p) const {
    Jet2 j;
    const double* c = data.data() + static_cast<std::size_t>(channel) * ld +
                      p * stride;
    j.value = c[0];
    if (stride == ad::kJetWidth) {
      for (int i = 0; i < ad::kInputs; ++i) j.grad[i] = c[1 + i];
      for (int k = 0; k < ad::kHessEntries; ++k) j.hess[k] = c[1 + ad::kInputs + k];
    }
    return j;
  }
};

// Tape-free batched evaluation. Uses the same kernels as record_forward.
inline OutputBlock evaluate_batch(const NetworkParams& params,
                                  const FourierEmbedding& emb,
                                  std::span<const Point3> points, int stride) {
  const std::size_t ld =
      ad::kernels::padded_columns(points.size() * static_cast<std::size_t>(stride));
  std::vector<double> x = embed_block(emb, points, stride);
  std::vector<double> y;
  const auto& layers = params.layers;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerView& L = layers[l];
    y.assign(static_cast<std::size_t>(L.out) * ld, 0.0);
    ad::kernels::affine_forward(params.theta.data() + L.weight_offset,
                                params.theta.data() + L.bias_offset, L.out,
                                L.in, x.data(), ld, stride, y.data());
    const auto act = (l + 1 == layers.size()) ? ad::kernels::Activation::Softplus
                                              : ad::kernels::Activation::Tanh;
    x.assign(y.size(), 0.0);
    ad::kernels::activate_forward(act, L.out, points.size(), stride, y.data(),
                                  ld, x.data());
  }
  return OutputBlock{points.size(), stride, ld, std::move(x)};
}

inline FieldOutput forward(const NetworkParams& params,
                           const FourierEmbedding& emb, const Point3& x) {
  const OutputBlock out = evaluate_batch(params, emb, std::span(&x, 1), 1);
  return {out.at(0, 0, 0), out.at(1, 0, 0)};
}

inline FieldJets forward_jet(const NetworkParams& params,
                             const FourierEmbedding& emb, const Point3& x) {
  const OutputBlock out =
      evaluate_batch(params, emb, std::span(&x, 1), ad::kJetWidth);
  return {out.jet(0, 0), out.jet(1, 0)};
}

// Records the network on a tape whose parameter span is params.theta.
// Returns the id of the softplus output block (2 rows: U, V).
inline int record_forward(ad::Tape& tape, const NetworkParams& params,
                          const FourierEmbedding& emb,
                          std::span<const Point3> points, int stride) {
  int block = tape.leaf_block(emb.output_dim(), points.size(), stride,
                              embed_block(emb, points, stride));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerView& L = params.layers[l];
    block = tape.affine(block, L.weight_offset, L.bias_offset, L.out);
    const auto act = (l + 1 == params.layers.size())
                         ? ad::kernels::Activation::Softplus
                         : ad::kernels::Activation::Tanh;
    block = tape.activate(block, act);
  }
  return block;
}

// ---- checkpoint container ------------------------------------------------
//
// Little-endian layout:
//   u32 format_version
//   u64 byte length, bytes      config echo text
//   u64                         embedding seed
//   u64 count, f64[count]       B (m x 3, row-major)
//   per layer, in order:        u64 count, f64[] W ; u64 count, f64[] b

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_echo;
  FourierEmbedding embedding;
  NetworkParams params;
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_array(std::string& out, std::span<const double> values) {
  put_u64(out, values.size());
  for (double d : values) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::vector<double> array() {
    const std::uint64_t n = u64();
    if (n > (bytes_.size() - pos_) / 8) fail("array length exceeds file size");
    std::vector<double> out(n);
    for (auto& d : out) d = std::bit_cast<double>(u64());
    return out;
  }

  std::string text() {
    const std::uint64_t n = u64();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

  [[noreturn]] static void fail(const std::string& why) {
    throw Error(ErrorKind::Io, "malformed checkpoint: " + why);
  }

 private:
  void need(std::uint64_t n) const {
    if (bytes_.size() - pos_ < n) fail("unexpected end of data");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& c) {
  std::string out;
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u64(out, c.config_echo.size());
  out += c.config_echo;
  detail::put_u64(out, c.embedding.seed);
  detail::put_array(out, c.embedding.B);
  const auto& theta = c.params.theta;
  for (const LayerView& l : c.params.layers) {
    detail::put_array(out, std::span(theta).subspan(
                               l.weight_offset, static_cast<std::size_t>(l.in) * l.out));
    detail::put_array(out, std::span(theta).subspan(l.bias_offset,
                                                    static_cast<std::size_t>(l.out)));
  }
  return out;
}

inline std::size_t checkpoint_bytes(const NetworkConfig& cfg,
                                    std::size_t echo_length) {
  const auto layers = layer_layout(2 * cfg.fourier_features, cfg.depth, cfg.width);
  std::size_t n = 4 + 8 + echo_length + 8 + 8 + 8 * 3 *
                  static_cast<std::size_t>(cfg.fourier_features);
  for (const LayerView& l : layers) {
    n += 8 + 8 * static_cast<std::size_t>(l.in) * l.out + 8 +
         8 * static_cast<std::size_t>(l.out);
  }
  return n;
}

inline Checkpoint deserialize_checkpoint(const std::string& bytes) {
  detail::Reader r(bytes);
  if (r.u32() != kCheckpointVersion) detail::Reader::fail("unsupported version");
  Checkpoint c;
  c.config_echo = r.text();
  c.embedding.seed = r.u64();
  c.embedding.B = r.array();
  if (c.embedding.B.empty() || c.embedding.B.size() % 3 != 0) {
    detail::Reader::fail("embedding matrix must be m x 3");
  }
  c.embedding.m = static_cast<int>(c.embedding.B.size() / 3);
  int in = 2 * c.embedding.m;
  std::size_t offset = 0;
  while (!r.done()) {
    std::vector<double> w = r.array();
    std::vector<double> b = r.array();
    if (b.empty() || w.size() != b.size() * static_cast<std::size_t>(in)) {
      detail::Reader::fail("layer shapes are inconsistent");
    }
    LayerView l{in, static_cast<int>(b.size()), offset, offset + w.size()};
    c.params.theta.insert(c.params.theta.end(), w.begin(), w.end());
    c.params.theta.insert(c.params.theta.end(), b.begin(), b.end());
    offset += w.size() + b.size();
    c.params.layers.push_back(l);
    in = l.out;
  }
  if (c.params.layers.empty() || in != 2) {
    detail::Reader::fail("network must end in a 2-channel layer");
  }
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  const std::string bytes = serialize_checkpoint(c);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace impinn::network
