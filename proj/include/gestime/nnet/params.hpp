#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/features.hpp"
#include "gestime/gesture_class.hpp"
#include "gestime/rng.hpp"

namespace gestime::nnet {

struct Hyper {
  std::size_t input_dim = 3;
  std::size_t enc_dim = 3;
  std::size_t dec_dim = 3;
  double learning_rate = 1e-3;
  std::size_t epochs = 500;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  FeatureSet feature_set = FeatureSet::Prosody3;

  friend bool operator==(const Hyper&, const Hyper&) = default;
};

// Trainable tensors. GRU tensors stack the update (z), reset (r) and
// candidate (n) gates along rows in that order.
enum ParamId : std::size_t {
  kEncFwdW,  // 3H x D
  kEncFwdU,  // 3H x H
  kEncFwdB,  // 3H
  kEncBwdW,
  kEncBwdU,
  kEncBwdB,
  kInitW,  // S x 2H, decoder initial state from the first annotation
  kInitB,  // S
  kAttQ,   // A x S, query projection of the previous decoder state
  kAttK,   // A x 2H, key projection of encoder annotations
  kAttB,   // A
  kAttV,   // A, energy read-out
  kDecW,   // 3S x 4H, decoder input is [context ; same-step annotation]
  kDecU,   // 3S x S
  kDecB,   // 3S
  kOutW,   // 5 x S
  kOutB,   // 5
  kNumParams
};

inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
    "enc_fwd.W", "enc_fwd.U", "enc_fwd.b", "enc_bwd.W", "enc_bwd.U", "enc_bwd.b",
    "init.W",    "init.b",    "att.Q",     "att.K",     "att.b",     "att.v",
    "dec.W",     "dec.U",     "dec.b",     "out.W",     "out.b"};

struct TensorShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return rows * cols; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

struct Dims {
  std::size_t input = 0;    // D
  std::size_t enc = 0;      // H, per direction
  std::size_t dec = 0;      // S
  std::size_t attention = 0;  // A

  std::size_t annotation() const { return 2 * enc; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

inline Dims dims_of(const Hyper& h) { return {h.input_dim, h.enc_dim, h.dec_dim, h.dec_dim}; }

class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(Dims d) : dims_(d) {
    if (d.input == 0 || d.enc == 0 || d.dec == 0 || d.attention == 0) {
      throw ConfigError("network dimensions must all be at least 1");
    }
    const std::size_t H = d.enc, S = d.dec, A = d.attention, D = d.input, E = d.annotation();
    const std::array<std::pair<std::size_t, std::size_t>, kNumParams> shapes = {{
        {3 * H, D}, {3 * H, H}, {3 * H, 1},
        {3 * H, D}, {3 * H, H}, {3 * H, 1},
        {S, E}, {S, 1},
        {A, S}, {A, E}, {A, 1}, {A, 1},
        {3 * S, 2 * E}, {3 * S, S}, {3 * S, 1},
        {kNumClasses, S}, {kNumClasses, 1},
    }};
    std::size_t off = 0;
    for (std::size_t i = 0; i < kNumParams; ++i) {
      shapes_[i] = {shapes[i].first, shapes[i].second, off};
      off += shapes_[i].size();
    }
    total_ = off;
  }

  const Dims& dims() const { return dims_; }
  const TensorShape& shape(ParamId id) const { return shapes_[id]; }
  std::size_t total() const { return total_; }

  friend bool operator==(const ParamLayout&, const ParamLayout&) = default;

 private:
  Dims dims_{};
  std::array<TensorShape, kNumParams> shapes_{};
  std::size_t total_ = 0;
};

// All trainable values in one flat buffer; also used for gradients and
// optimizer moments.
struct Params {
  ParamLayout layout;
  std::vector<double> values;

  Params() = default;
  explicit Params(const ParamLayout& l) : layout(l), values(l.total(), 0.0) {}

  std::span<double> tensor(ParamId id) {
    const auto& s = layout.shape(id);
    return {values.data() + s.offset, s.size()};
  }
  std::span<const double> tensor(ParamId id) const {
    const auto& s = layout.shape(id);
    return {values.data() + s.offset, s.size()};
  }
  const double* data(ParamId id) const { return values.data() + layout.shape(id).offset; }
  double* data(ParamId id) { return values.data() + layout.shape(id).offset; }

  bool all_finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Params&, const Params&) = default;
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases start at zero.
inline Params init_params(const ParamLayout& layout, std::uint64_t seed) {
  Params p(layout);
  Rng rng(derive_seed(seed, 0x1417));
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const auto id = static_cast<ParamId>(i);
    const auto& s = layout.shape(id);
    if (s.cols == 1 && id != kAttV) continue;
    const double fan_in = id == kAttV ? static_cast<double>(s.rows) : static_cast<double>(s.cols);
    const double bound = 1.0 / std::sqrt(fan_in);
    for (double& v : p.tensor(id)) v = rng.uniform(-bound, bound);
  }
  return p;
}

}  // namespace gestime::nnet
