#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gestime/corpus.hpp"
#include "gestime/error.hpp"
#include "gestime/features.hpp"
#include "gestime/ingest.hpp"
#include "gestime/rng.hpp"

// Synthetic corpus with a learnable prosody/gesture relationship.
//
// Class tracks follow a first-order chain over the four real classes,
// started from the chain's stationary distribution so that the expected
// frame proportions equal that distribution. Features are generated from the
// track: F0 declines slowly and stays flat (plus jitter) during NoGesture,
// rises on the frame before every IdeationalStroke block and peaks inside it;
// intensity marks beats. Word tokens tile every utterance with sub-threshold
// pauses, and utterances are separated by pauses of at least 300 ms.
namespace gestime {

using ClassMatrix4 = std::array<std::array<double, kNumRealClasses>, kNumRealClasses>;

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t n_samples = 100;
  std::size_t max_len_frames = 20;
  std::size_t min_len_frames = 0;  // 0 selects max(4, max_len / 2)
  std::size_t utterances_per_recording = 20;
  // Row = current class, column = next class, in NoGesture, Beat,
  // IdeationalOther, IdeationalStroke order.
  ClassMatrix4 script = {{
      {0.80, 0.07, 0.13, 0.00},
      {0.45, 0.55, 0.00, 0.00},
      {0.20, 0.00, 0.45, 0.35},
      {0.10, 0.00, 0.25, 0.65},
  }};
  double unvoiced_rate = 0.1;
  double f0_jitter_hz = 3.0;
  double brow_raise_on_beat = 0.6;
  double spontaneous_brow_rate = 0.02;
};

// Stationary distribution of the script chain (power iteration).
inline std::array<double, kNumRealClasses> script_stationary(const ClassMatrix4& m) {
  std::array<double, kNumRealClasses> pi{};
  pi.fill(1.0 / kNumRealClasses);
  for (int it = 0; it < 10000; ++it) {
    std::array<double, kNumRealClasses> next{};
    for (std::size_t a = 0; a < kNumRealClasses; ++a) {
      for (std::size_t b = 0; b < kNumRealClasses; ++b) next[b] += pi[a] * m[a][b];
    }
    double diff = 0.0;
    for (std::size_t k = 0; k < kNumRealClasses; ++k) diff += std::abs(next[k] - pi[k]);
    pi = next;
    if (diff < 1e-15) break;
  }
  return pi;
}

struct SyntheticCorpus {
  RawCorpus raw;
  Dataset dataset;
};

namespace detail {

inline LabelSequence script_track(Rng& rng, const SyntheticConfig& cfg, std::size_t len,
                                  const std::array<double, kNumRealClasses>& start) {
  LabelSequence out;
  out.reserve(len);
  std::size_t cur = rng.categorical(start);
  for (std::size_t t = 0; t < len; ++t) {
    if (t > 0) cur = rng.categorical(cfg.script[cur]);
    out.push_back(class_at(cur));
  }
  return out;
}

inline FeatureFrame synth_frame(Rng& rng, const SyntheticConfig& cfg, const LabelSequence& labels, std::size_t t,
                                double prev_f0, double base_f0) {
  const GestureClass c = labels[t];
  const bool stroke_next =
      t + 1 < labels.size() && labels[t + 1] == GestureClass::IdeationalStroke && c != GestureClass::IdeationalStroke;
  FeatureFrame f;
  double f0 = base_f0 - 1.5 * static_cast<double>(t);
  switch (c) {
    case GestureClass::Beat: f0 += 12.0; break;
    case GestureClass::IdeationalOther: f0 += 20.0; break;
    case GestureClass::IdeationalStroke: f0 += 60.0; break;
    default: break;
  }
  if (stroke_next) f0 += 35.0;
  f0 += cfg.f0_jitter_hz * rng.normal();
  if (c == GestureClass::NoGesture && rng.bernoulli(cfg.unvoiced_rate)) f0 = 0.0;
  f.f0 = f0;
  const double ref = prev_f0 > 0.0 && f0 > 0.0 ? prev_f0 : f0;
  f.f0_dir = std::clamp((f0 - ref) / 20.0, -3.0, 3.0) + 0.1 * rng.normal();
  double intensity = 60.0 + 1.5 * rng.normal();
  if (c == GestureClass::Beat) intensity += 10.0;
  if (c == GestureClass::IdeationalStroke) intensity += 4.0;
  f.intensity = intensity;
  for (std::size_t k = 0; k < kNumMfcc; ++k) {
    const double centre = 4.0 * std::sin(static_cast<double>(k + 1) * (1.0 + static_cast<double>(index_of(c))));
    f.mfcc[k] = centre + rng.normal();
  }
  return f;
}

inline FeatureFrame silence_frame(Rng& rng) {
  FeatureFrame f;
  f.intensity = 35.0 + rng.normal();
  for (auto& v : f.mfcc) v = -6.0 + 0.5 * rng.normal();
  return f;
}

}  // namespace detail

inline SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& cfg) {
  if (cfg.max_len_frames < 1) throw ConfigError("synthetic corpus: max_len_frames must be at least 1");
  if (cfg.utterances_per_recording < 1) throw ConfigError("synthetic corpus: utterances_per_recording must be >= 1");
  for (const auto& row : cfg.script) {
    double sum = 0.0;
    for (double v : row) sum += v;
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("synthetic corpus: script rows must sum to 1");
  }
  const std::size_t min_len =
      std::min(cfg.max_len_frames, cfg.min_len_frames > 0 ? cfg.min_len_frames
                                                          : std::max<std::size_t>(4, cfg.max_len_frames / 2));
  const auto start = script_stationary(cfg.script);
  constexpr std::int64_t kFrame = kDefaultFrameMs;

  SyntheticCorpus out;
  Rng rng(derive_seed(cfg.seed, 0x5e7));
  // Per (recording, speaker) stream cursor; utterances are laid out in time.
  std::map<std::pair<std::string, std::string>, std::int64_t> cursor;
  static constexpr std::array<GestureType, 6> kIdeational = {GestureType::Iconic,         GestureType::Metaphoric,
                                                              GestureType::ConcreteDeixis, GestureType::AbstractDeixis,
                                                              GestureType::NominationDeixis, GestureType::Emblem};
  for (std::size_t k = 0; k < cfg.n_samples; ++k) {
    const std::string speaker = k % 2 == 0 ? "spk1" : "spk2";
    const std::string recording = "rec" + std::to_string(k / cfg.utterances_per_recording);
    auto& cur = cursor[{recording, speaker}];
    const std::int64_t pause = 100 * rng.uniform_int(3, 8);
    // Leading silence frames (features only).
    for (std::int64_t t = cur; t < cur + pause; t += kFrame) {
      out.raw.features.push_back({recording, speaker, t, detail::silence_frame(rng)});
    }
    const std::int64_t begin = cur + pause;
    const auto len = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(min_len), static_cast<std::int64_t>(cfg.max_len_frames)));
    const std::int64_t end = begin + static_cast<std::int64_t>(len) * kFrame;
    cur = end;

    const LabelSequence labels = detail::script_track(rng, cfg, len, start);
    const double base_f0 = speaker == "spk1" ? 120.0 : 200.0;
    double prev_f0 = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      FeatureFrame f = detail::synth_frame(rng, cfg, labels, t, prev_f0, base_f0);
      prev_f0 = f.f0;
      out.raw.features.push_back({recording, speaker, begin + static_cast<std::int64_t>(t) * kFrame, f});
    }

    // Words tile [begin, end) with pauses below the segmentation threshold.
    std::int64_t w = begin;
    std::size_t word_no = 0;
    while (w < end) {
      std::int64_t wend = std::min(end, w + 100 * rng.uniform_int(2, 5));
      if (end - wend < 100) wend = end;
      out.raw.words.push_back({recording, speaker, {"w" + std::to_string(k) + "_" + std::to_string(word_no++), w, wend}, 0});
      w = wend;
      if (w < end && end - w > 200 && rng.bernoulli(0.3)) w += 100;
    }

    // Gesture annotations reproduce the track: beats as beat strokes, runs of
    // ideational frames as one gesture with preparation/stroke/retraction.
    const auto ms = [&](std::size_t frame) { return begin + static_cast<std::int64_t>(frame) * kFrame; };
    std::size_t t = 0;
    while (t < len) {
      const GestureClass c = labels[t];
      std::size_t u = t;
      if (c == GestureClass::Beat) {
        while (u < len && labels[u] == GestureClass::Beat) ++u;
        out.raw.gestures.push_back({recording, speaker, {GesturePhase::Stroke, GestureType::Beat, true, ms(t), ms(u)}});
      } else if (c == GestureClass::IdeationalOther || c == GestureClass::IdeationalStroke) {
        while (u < len && (labels[u] == GestureClass::IdeationalOther || labels[u] == GestureClass::IdeationalStroke)) ++u;
        const GestureType gt = kIdeational[static_cast<std::size_t>(rng.uniform_int(0, 5))];
        bool seen_stroke = false;
        std::size_t a = t;
        while (a < u) {
          std::size_t b = a;
          while (b < u && labels[b] == labels[a]) ++b;
          GesturePhase ph = GesturePhase::Stroke;
          if (labels[a] == GestureClass::IdeationalOther) {
            ph = seen_stroke ? GesturePhase::Retraction : GesturePhase::Preparation;
          } else {
            seen_stroke = true;
          }
          out.raw.gestures.push_back({recording, speaker, {ph, gt, true, ms(a), ms(b)}});
          a = b;
        }
      } else {
        while (u < len && labels[u] == GestureClass::NoGesture) ++u;
        if (u - t >= 3 && rng.bernoulli(0.15)) {
          // Non-communicative movement (self-touch); must not change labels.
          out.raw.gestures.push_back(
              {recording, speaker, {GesturePhase::Stroke, GestureType::Iconic, false, ms(t), ms(u)}});
        }
      }
      t = u;
    }

    // Facial action units at 50 ms: raises on beats and occasionally on
    // idle frames, lowering now and then, low-level noise elsewhere.
    for (std::size_t f = 0; f < len; ++f) {
      const bool on_beat = labels[f] == GestureClass::Beat;
      const bool raise = (on_beat && rng.bernoulli(cfg.brow_raise_on_beat)) ||
                         (labels[f] == GestureClass::NoGesture && rng.bernoulli(cfg.spontaneous_brow_rate));
      const bool lower = !raise && labels[f] == GestureClass::NoGesture && rng.bernoulli(cfg.spontaneous_brow_rate);
      for (std::int64_t half = 0; half < 2; ++half) {
        const std::int64_t ts = ms(f) + half * 50;
        const double conf = rng.bernoulli(0.05) ? 0.6 : 0.95;
        const double up = raise ? 1.6 + 0.3 * rng.uniform() : (rng.bernoulli(0.1) ? 0.4 : 0.0);
        out.raw.aus.push_back({recording, speaker, {AuId::AU1, up, conf, ts}});
        out.raw.aus.push_back({recording, speaker, {AuId::AU2, raise ? up * 0.8 : 0.0, conf, ts}});
        out.raw.aus.push_back({recording, speaker, {AuId::AU4, lower ? 1.5 : (rng.bernoulli(0.1) ? 0.3 : 0.0), conf, ts}});
      }
    }
  }
  // Trailing silence so the last utterance of every stream has a right context.
  for (auto& [key, cur] : cursor) {
    for (std::int64_t t = cur; t < cur + 300; t += kFrame) {
      out.raw.features.push_back({key.first, key.second, t, detail::silence_frame(rng)});
    }
  }
  out.dataset = ingest(out.raw);
  return out;
}

}  // namespace gestime
