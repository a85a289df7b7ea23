#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/features.hpp"
#include "gestime/gesture_class.hpp"
#include "gestime/nnet/params.hpp"

// Bidirectional GRU encoder, additive attention, GRU decoder and a softmax
// read-out over the five classes, with hand-written reverse-mode gradients.
//
//   e_i   = [fwd_i ; bwd_i]                      encoder annotation of step i
//   s_-1  = tanh(Wi e_0 + bi)
//   E_ji  = v . tanh(Q s_{j-1} + K e_i + b)      attention energy
//   a_j   = softmax_i(E_j.)                      row j of the l x l attention map
//   c_j   = sum_i a_ji e_i
//   s_j   = GRU([c_j ; e_j], s_{j-1})
//   p_j   = softmax(Wo s_j + bo)
namespace gestime::nnet {

inline constexpr std::size_t kMaxHidden = 64;
inline constexpr double kProbFloor = 1e-12;

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// out[r] += W[r, :] . x
inline void matvec_acc(double* out, const double* W, std::size_t rows, std::size_t cols, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* w = W + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
    out[r] += acc;
  }
}

// out[c] += sum_r W[r, c] g[r]
inline void matvec_t_acc(double* out, const double* W, std::size_t rows, std::size_t cols, const double* g) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const double* w = W + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += w[c] * gr;
  }
}

// dW[r, c] += g[r] x[c]
inline void outer_acc(double* dW, const double* g, std::size_t rows, const double* x, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* d = dW + r * cols;
    for (std::size_t c = 0; c < cols; ++c) d[c] += gr * x[c];
  }
}

struct GruWeights {
  const double* W;
  const double* U;
  const double* b;
  std::size_t hidden;
  std::size_t input;
};

struct GruGrads {
  double* W;
  double* U;
  double* b;
};

// One GRU step; writes gate activations and the new state.
inline void gru_forward(const GruWeights& g, const double* x, const double* h, double* z, double* r, double* n,
                        double* h_out) {
  const std::size_t H = g.hidden;
  std::array<double, 3 * kMaxHidden> pre{};
  for (std::size_t k = 0; k < 3 * H; ++k) pre[k] = g.b[k];
  matvec_acc(pre.data(), g.W, 3 * H, g.input, x);
  // Update and reset gates see h directly; the candidate sees r * h.
  matvec_acc(pre.data(), g.U, 2 * H, H, h);
  for (std::size_t k = 0; k < H; ++k) {
    z[k] = sigmoid(pre[k]);
    r[k] = sigmoid(pre[H + k]);
  }
  std::array<double, kMaxHidden> rh{};
  for (std::size_t k = 0; k < H; ++k) rh[k] = r[k] * h[k];
  matvec_acc(pre.data() + 2 * H, g.U + 2 * H * H, H, H, rh.data());
  for (std::size_t k = 0; k < H; ++k) {
    n[k] = std::tanh(pre[2 * H + k]);
    h_out[k] = (1.0 - z[k]) * n[k] + z[k] * h[k];
  }
}

// Backward of gru_forward given dL/dh_out. Accumulates parameter gradients,
// dL/dx into dx and dL/dh into dh.
inline void gru_backward(const GruWeights& g, const GruGrads& grad, const double* x, const double* h,
                         const double* z, const double* r, const double* n, const double* dh_out, double* dx,
                         double* dh) {
  const std::size_t H = g.hidden;
  std::array<double, 3 * kMaxHidden> da{};
  std::array<double, kMaxHidden> rh{};
  std::array<double, kMaxHidden> drh{};
  for (std::size_t k = 0; k < H; ++k) {
    const double dn = dh_out[k] * (1.0 - z[k]);
    const double dz = dh_out[k] * (h[k] - n[k]);
    dh[k] += dh_out[k] * z[k];
    da[2 * H + k] = dn * (1.0 - n[k] * n[k]);
    da[k] = dz * z[k] * (1.0 - z[k]);
    rh[k] = r[k] * h[k];
  }
  // Candidate path through U_n (r * h).
  matvec_t_acc(drh.data(), g.U + 2 * H * H, H, H, da.data() + 2 * H);
  outer_acc(grad.U + 2 * H * H, da.data() + 2 * H, H, rh.data(), H);
  for (std::size_t k = 0; k < H; ++k) {
    const double dr = drh[k] * h[k];
    dh[k] += drh[k] * r[k];
    da[H + k] = dr * r[k] * (1.0 - r[k]);
  }
  for (std::size_t k = 0; k < 3 * H; ++k) grad.b[k] += da[k];
  outer_acc(grad.W, da.data(), 3 * H, x, g.input);
  outer_acc(grad.U, da.data(), 2 * H, h, H);
  matvec_t_acc(dh, g.U, 2 * H, H, da.data());
  if (dx != nullptr) matvec_t_acc(dx, g.W, 3 * H, g.input, da.data());
}

inline GruWeights gru_weights(const Params& p, ParamId w, ParamId u, ParamId b) {
  const auto& s = p.layout.shape(w);
  return {p.data(w), p.data(u), p.data(b), s.rows / 3, s.cols};
}

inline GruGrads gru_grads(Params& g, ParamId w, ParamId u, ParamId b) { return {g.data(w), g.data(u), g.data(b)}; }

}  // namespace detail

// Intermediates of one forward pass, kept for the backward pass.
struct ForwardCache {
  std::size_t l = 0;
  Dims dims{};
  std::vector<double> fwd_z, fwd_r, fwd_n, fwd_h;  // l x H each
  std::vector<double> bwd_z, bwd_r, bwd_n, bwd_h;
  std::vector<double> annotations;  // l x 2H
  std::vector<double> keys;         // l x A
  std::vector<double> init_state;   // S
  std::vector<double> hidden;       // l x l x A, tanh(Q s + K e + b)
  std::vector<double> attention;    // l x l, row j = weights over input steps
  std::vector<double> context;      // l x 2H
  std::vector<double> dec_input;    // l x 4H, [c_j ; e_j]
  std::vector<double> dec_z, dec_r, dec_n, dec_s;  // l x S
  std::vector<double> probs;        // l x 5

  std::span<const double> prob_row(std::size_t j) const { return {probs.data() + j * kNumClasses, kNumClasses}; }
  std::span<const double> attention_row(std::size_t j) const { return {attention.data() + j * l, l}; }
};

inline void check_input(const Params& p, const FeatureMatrix& x) {
  const Dims& d = p.layout.dims();
  if (x.cols != d.input) {
    throw InputFormatError("model expects " + std::to_string(d.input) + " input columns, got " +
                           std::to_string(x.cols));
  }
  if (x.rows == 0) throw InputFormatError("model input has no frames");
  if (x.data.size() != x.rows * x.cols) throw InputFormatError("feature matrix storage does not match its shape");
}

inline ForwardCache forward(const Params& p, const FeatureMatrix& x) {
  using namespace detail;
  check_input(p, x);
  ForwardCache c;
  const Dims d = p.layout.dims();
  const std::size_t l = x.rows, H = d.enc, E = d.annotation(), S = d.dec, A = d.attention;
  c.l = l;
  c.dims = d;
  for (auto* v : {&c.fwd_z, &c.fwd_r, &c.fwd_n, &c.fwd_h, &c.bwd_z, &c.bwd_r, &c.bwd_n, &c.bwd_h}) v->assign(l * H, 0.0);

  const std::vector<double> zero_h(std::max({H, S, std::size_t{1}}), 0.0);
  const GruWeights fw = gru_weights(p, kEncFwdW, kEncFwdU, kEncFwdB);
  for (std::size_t t = 0; t < l; ++t) {
    const double* prev = t == 0 ? zero_h.data() : &c.fwd_h[(t - 1) * H];
    gru_forward(fw, &x.data[t * d.input], prev, &c.fwd_z[t * H], &c.fwd_r[t * H], &c.fwd_n[t * H], &c.fwd_h[t * H]);
  }
  const GruWeights bw = gru_weights(p, kEncBwdW, kEncBwdU, kEncBwdB);
  for (std::size_t t = l; t-- > 0;) {
    const double* prev = t + 1 == l ? zero_h.data() : &c.bwd_h[(t + 1) * H];
    gru_forward(bw, &x.data[t * d.input], prev, &c.bwd_z[t * H], &c.bwd_r[t * H], &c.bwd_n[t * H], &c.bwd_h[t * H]);
  }
  c.annotations.assign(l * E, 0.0);
  for (std::size_t t = 0; t < l; ++t) {
    std::copy_n(&c.fwd_h[t * H], H, &c.annotations[t * E]);
    std::copy_n(&c.bwd_h[t * H], H, &c.annotations[t * E + H]);
  }
  c.keys.assign(l * A, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    std::copy_n(p.data(kAttB), A, &c.keys[i * A]);
    matvec_acc(&c.keys[i * A], p.data(kAttK), A, E, &c.annotations[i * E]);
  }
  c.init_state.assign(S, 0.0);
  std::copy_n(p.data(kInitB), S, c.init_state.data());
  matvec_acc(c.init_state.data(), p.data(kInitW), S, E, c.annotations.data());
  for (double& v : c.init_state) v = std::tanh(v);

  c.hidden.assign(l * l * A, 0.0);
  c.attention.assign(l * l, 0.0);
  c.context.assign(l * E, 0.0);
  c.dec_input.assign(l * 2 * E, 0.0);
  for (auto* v : {&c.dec_z, &c.dec_r, &c.dec_n, &c.dec_s}) v->assign(l * S, 0.0);
  c.probs.assign(l * kNumClasses, 0.0);

  const GruWeights dw = gru_weights(p, kDecW, kDecU, kDecB);
  const double* v = p.data(kAttV);
  std::array<double, kMaxHidden> query{};
  std::vector<double> energy(l);
  for (std::size_t j = 0; j < l; ++j) {
    const double* s_prev = j == 0 ? c.init_state.data() : &c.dec_s[(j - 1) * S];
    std::fill_n(query.begin(), A, 0.0);
    matvec_acc(query.data(), p.data(kAttQ), A, S, s_prev);
    double emax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l; ++i) {
      double* u = &c.hidden[(j * l + i) * A];
      double e = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        u[a] = std::tanh(query[a] + c.keys[i * A + a]);
        e += v[a] * u[a];
      }
      energy[i] = e;
      emax = std::max(emax, e);
    }
    double z = 0.0;
    double* att = &c.attention[j * l];
    for (std::size_t i = 0; i < l; ++i) {
      att[i] = std::exp(energy[i] - emax);
      z += att[i];
    }
    double* ctx = &c.context[j * E];
    for (std::size_t i = 0; i < l; ++i) {
      att[i] /= z;
      const double* e_i = &c.annotations[i * E];
      for (std::size_t k = 0; k < E; ++k) ctx[k] += att[i] * e_i[k];
    }
    double* in = &c.dec_input[j * 2 * E];
    std::copy_n(ctx, E, in);
    std::copy_n(&c.annotations[j * E], E, in + E);
    gru_forward(dw, in, s_prev, &c.dec_z[j * S], &c.dec_r[j * S], &c.dec_n[j * S], &c.dec_s[j * S]);

    std::array<double, kNumClasses> logits{};
    std::copy_n(p.data(kOutB), kNumClasses, logits.begin());
    matvec_acc(logits.data(), p.data(kOutW), kNumClasses, S, &c.dec_s[j * S]);
    const double lmax = *std::max_element(logits.begin(), logits.end());
    double zs = 0.0;
    for (double& lg : logits) {
      lg = std::exp(lg - lmax);
      zs += lg;
    }
    for (std::size_t k = 0; k < kNumClasses; ++k) c.probs[j * kNumClasses + k] = logits[k] / zs;
  }
  return c;
}

// Per-class loss weights, proportional to inverse training frequency and
// scaled so that sum_c w_c p_c = 1. Classes absent from training get 0.
struct ClassWeights {
  std::array<double, kNumClasses> w{};
  std::array<bool, kNumClasses> present{};

  static ClassWeights uniform() {
    ClassWeights cw;
    cw.w.fill(1.0);
    cw.present.fill(true);
    return cw;
  }
  friend bool operator==(const ClassWeights&, const ClassWeights&) = default;
};

inline ClassWeights class_weights(std::span<const double> proportions) {
  if (proportions.size() != kNumClasses) throw ConfigError("class_weights: expected 5 proportions");
  ClassWeights cw;
  std::size_t n_present = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    cw.present[c] = proportions[c] > 0.0;
    if (cw.present[c]) ++n_present;
  }
  if (n_present == 0) throw ConfigError("class_weights: no class is present");
  // w_c = K / p_c with sum_c w_c p_c = K * n_present = 1.
  const double k = 1.0 / static_cast<double>(n_present);
  for (std::size_t c = 0; c < kNumClasses; ++c) cw.w[c] = cw.present[c] ? k / proportions[c] : 0.0;
  return cw;
}

// Mean over steps of w_y * -log p[y], with p clamped at 1e-12.
inline double loss(const ForwardCache& c, std::span<const GestureClass> y, const ClassWeights& cw) {
  if (y.size() != c.l) throw InputFormatError("loss: label length does not match model output");
  double total = 0.0;
  for (std::size_t j = 0; j < c.l; ++j) {
    const std::size_t k = index_of(y[j]);
    total += cw.w[k] * -std::log(std::max(c.probs[j * kNumClasses + k], kProbFloor));
  }
  return total / static_cast<double>(c.l);
}

// Accumulates dLoss/dParams into grad (which must share the layout of p).
inline void backward(const Params& p, const FeatureMatrix& x, std::span<const GestureClass> y,
                     const ClassWeights& cw, const ForwardCache& c, Params& grad) {
  using namespace detail;
  if (grad.layout != p.layout) grad = Params(p.layout);
  if (y.size() != c.l) throw InputFormatError("backward: label length does not match model output");
  const Dims d = c.dims;
  const std::size_t l = c.l, H = d.enc, E = d.annotation(), S = d.dec, A = d.attention;
  const double inv_l = 1.0 / static_cast<double>(l);

  std::vector<double> d_ann(l * E, 0.0);
  std::vector<double> d_keys(l * A, 0.0);
  std::vector<double> ds_next(S, 0.0);  // dL/ds_j flowing back from step j+1
  std::vector<double> ds_prev(S, 0.0);
  std::vector<double> dctx(2 * E, 0.0);  // [d context ; d same-step annotation]
  std::vector<double> dalpha(l, 0.0);
  std::array<double, kMaxHidden> dq{};
  const GruWeights dw = gru_weights(p, kDecW, kDecU, kDecB);
  const GruGrads dg = gru_grads(grad, kDecW, kDecU, kDecB);
  const double* v = p.data(kAttV);

  for (std::size_t j = l; j-- > 0;) {
    const double* s_j = &c.dec_s[j * S];
    const double* s_prev = j == 0 ? c.init_state.data() : &c.dec_s[(j - 1) * S];
    // Softmax + weighted cross-entropy.
    std::array<double, kNumClasses> dlogit{};
    const std::size_t yk = index_of(y[j]);
    if (c.probs[j * kNumClasses + yk] > kProbFloor) {
      const double scale = cw.w[yk] * inv_l;
      for (std::size_t k = 0; k < kNumClasses; ++k) {
        dlogit[k] = scale * (c.probs[j * kNumClasses + k] - (k == yk ? 1.0 : 0.0));
      }
    }
    std::vector<double>& ds = ds_next;
    for (std::size_t k = 0; k < kNumClasses; ++k) grad.data(kOutB)[k] += dlogit[k];
    outer_acc(grad.data(kOutW), dlogit.data(), kNumClasses, s_j, S);
    matvec_t_acc(ds.data(), p.data(kOutW), kNumClasses, S, dlogit.data());

    std::fill(ds_prev.begin(), ds_prev.end(), 0.0);
    std::fill(dctx.begin(), dctx.end(), 0.0);
    gru_backward(dw, dg, &c.dec_input[j * 2 * E], s_prev, &c.dec_z[j * S], &c.dec_r[j * S], &c.dec_n[j * S],
                 ds.data(), dctx.data(), ds_prev.data());
    for (std::size_t k = 0; k < E; ++k) d_ann[j * E + k] += dctx[E + k];

    // Context -> attention weights and annotations.
    const double* att = &c.attention[j * l];
    double dot = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      const double* e_i = &c.annotations[i * E];
      double acc = 0.0;
      for (std::size_t k = 0; k < E; ++k) {
        acc += dctx[k] * e_i[k];
        d_ann[i * E + k] += att[i] * dctx[k];
      }
      dalpha[i] = acc;
      dot += att[i] * acc;
    }
    std::fill_n(dq.begin(), A, 0.0);
    for (std::size_t i = 0; i < l; ++i) {
      const double de = att[i] * (dalpha[i] - dot);
      if (de == 0.0) continue;
      const double* u = &c.hidden[(j * l + i) * A];
      for (std::size_t a = 0; a < A; ++a) {
        grad.data(kAttV)[a] += de * u[a];
        const double dpre = de * v[a] * (1.0 - u[a] * u[a]);
        dq[a] += dpre;
        d_keys[i * A + a] += dpre;
      }
    }
    outer_acc(grad.data(kAttQ), dq.data(), A, s_prev, S);
    matvec_t_acc(ds_prev.data(), p.data(kAttQ), A, S, dq.data());
    std::swap(ds_next, ds_prev);
  }
  // ds_next now holds dL/ds_-1.
  {
    std::array<double, kMaxHidden> dpre{};
    for (std::size_t k = 0; k < S; ++k) {
      dpre[k] = ds_next[k] * (1.0 - c.init_state[k] * c.init_state[k]);
      grad.data(kInitB)[k] += dpre[k];
    }
    outer_acc(grad.data(kInitW), dpre.data(), S, c.annotations.data(), E);
    matvec_t_acc(d_ann.data(), p.data(kInitW), S, E, dpre.data());
  }
  for (std::size_t i = 0; i < l; ++i) {
    const double* dk = &d_keys[i * A];
    for (std::size_t a = 0; a < A; ++a) grad.data(kAttB)[a] += dk[a];
    outer_acc(grad.data(kAttK), dk, A, &c.annotations[i * E], E);
    matvec_t_acc(&d_ann[i * E], p.data(kAttK), A, E, dk);
  }

  // Encoder, forward direction: state t feeds t+1.
  const std::vector<double> zero_h(H, 0.0);
  std::vector<double> carry(H, 0.0);
  std::vector<double> dh_out(H, 0.0);
  {
    const GruWeights w = gru_weights(p, kEncFwdW, kEncFwdU, kEncFwdB);
    const GruGrads g = gru_grads(grad, kEncFwdW, kEncFwdU, kEncFwdB);
    for (std::size_t t = l; t-- > 0;) {
      for (std::size_t k = 0; k < H; ++k) dh_out[k] = d_ann[t * E + k] + carry[k];
      std::fill(carry.begin(), carry.end(), 0.0);
      const double* prev = t == 0 ? zero_h.data() : &c.fwd_h[(t - 1) * H];
      gru_backward(w, g, &x.data[t * d.input], prev, &c.fwd_z[t * H], &c.fwd_r[t * H], &c.fwd_n[t * H],
                   dh_out.data(), nullptr, carry.data());
    }
  }
  // Backward direction: state t+1 feeds t.
  std::fill(carry.begin(), carry.end(), 0.0);
  {
    const GruWeights w = gru_weights(p, kEncBwdW, kEncBwdU, kEncBwdB);
    const GruGrads g = gru_grads(grad, kEncBwdW, kEncBwdU, kEncBwdB);
    for (std::size_t t = 0; t < l; ++t) {
      for (std::size_t k = 0; k < H; ++k) dh_out[k] = d_ann[t * E + H + k] + carry[k];
      std::fill(carry.begin(), carry.end(), 0.0);
      const double* prev = t + 1 == l ? zero_h.data() : &c.bwd_h[(t + 1) * H];
      gru_backward(w, g, &x.data[t * d.input], prev, &c.bwd_z[t * H], &c.bwd_r[t * H], &c.bwd_n[t * H],
                   dh_out.data(), nullptr, carry.data());
    }
  }
}

inline Params gradient(const Params& p, const FeatureMatrix& x, std::span<const GestureClass> y,
                       const ClassWeights& cw) {
  Params g(p.layout);
  const ForwardCache c = forward(p, x);
  backward(p, x, y, cw, c, g);
  return g;
}

// Argmax per step; ties go to the earliest class in enum order.
inline LabelSequence decode(const ForwardCache& c) {
  LabelSequence out(c.l);
  for (std::size_t j = 0; j < c.l; ++j) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumClasses; ++k) {
      if (c.probs[j * kNumClasses + k] > c.probs[j * kNumClasses + best]) best = k;
    }
    out[j] = class_at(best);
  }
  return out;
}

}  // namespace gestime::nnet
