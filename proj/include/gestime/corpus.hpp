#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/features.hpp"
#include "gestime/gesture_class.hpp"
#include "gestime/rng.hpp"

namespace gestime {

inline constexpr std::int64_t kDefaultFrameMs = 100;
inline constexpr std::int64_t kDefaultIpuGapMs = 200;

struct WordToken {
  std::string text;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

enum class GesturePhase : std::uint8_t {
  Preparation,
  PreStrokeHold,
  Stroke,
  PostStrokeHold,
  PartialRetraction,
  Retraction,
  Recoil,
};

enum class GestureType : std::uint8_t {
  Iconic,
  Metaphoric,
  ConcreteDeixis,
  AbstractDeixis,
  NominationDeixis,
  Beat,
  Emblem,
};

inline constexpr std::array<std::string_view, 7> kPhaseNames = {
    "Preparation", "PreStrokeHold", "Stroke", "PostStrokeHold", "PartialRetraction", "Retraction", "Recoil"};
inline constexpr std::array<std::string_view, 7> kTypeNames = {
    "Iconic", "Metaphoric", "ConcreteDeixis", "AbstractDeixis", "NominationDeixis", "Beat", "Emblem"};

inline std::string_view phase_name(GesturePhase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }
inline std::string_view type_name(GestureType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

inline std::optional<GesturePhase> parse_phase(std::string_view s) {
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
    if (kPhaseNames[i] == s) return static_cast<GesturePhase>(i);
  }
  return std::nullopt;
}

inline std::optional<GestureType> parse_type(std::string_view s) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == s) return static_cast<GestureType>(i);
  }
  return std::nullopt;
}

struct GestureAnnotation {
  GesturePhase phase = GesturePhase::Stroke;
  GestureType gtype = GestureType::Iconic;
  bool communicative = true;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

enum class AuId : std::uint8_t { AU1, AU2, AU4 };

inline std::optional<AuId> parse_au(std::string_view s) {
  if (s == "AU1") return AuId::AU1;
  if (s == "AU2") return AuId::AU2;
  if (s == "AU4") return AuId::AU4;
  return std::nullopt;
}

inline std::string_view au_name(AuId a) {
  switch (a) {
    case AuId::AU1: return "AU1";
    case AuId::AU2: return "AU2";
    case AuId::AU4: return "AU4";
  }
  return "?";
}

struct AuFrame {
  AuId au = AuId::AU1;
  double value = 0.0;
  double confidence = 0.0;
  std::int64_t timestamp_ms = 0;
};

struct TimeSpan {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

enum class BrowDirection : std::uint8_t { Up, Down };

// Eyebrow movement interval in absolute milliseconds, half-open.
struct BrowInterval {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  BrowDirection direction = BrowDirection::Up;
  friend bool operator==(const BrowInterval&, const BrowInterval&) = default;
};

// Eyebrow movement in utterance frame coordinates: frames [first, last).
struct BrowSpan {
  std::int64_t first = 0;
  std::int64_t last = 0;
  BrowDirection direction = BrowDirection::Up;
  friend bool operator==(const BrowSpan&, const BrowSpan&) = default;
};

enum class EyebrowMode : std::uint8_t { HandOnly, WithUpward, WithUpDown };

inline std::string_view eyebrow_mode_name(EyebrowMode m) {
  switch (m) {
    case EyebrowMode::HandOnly: return "hand-only";
    case EyebrowMode::WithUpward: return "with-upward";
    case EyebrowMode::WithUpDown: return "with-updown";
  }
  return "?";
}

inline std::optional<EyebrowMode> parse_eyebrow_mode(std::string_view s) {
  if (s == "hand-only" || s == "HandOnly") return EyebrowMode::HandOnly;
  if (s == "with-upward" || s == "WithUpward") return EyebrowMode::WithUpward;
  if (s == "with-updown" || s == "WithUpDown") return EyebrowMode::WithUpDown;
  return std::nullopt;
}

// One utterance (inter-pausal unit). `length` is the unpadded frame count;
// after padding, labels and frames are longer and the tail is Suffix/zero.
struct Sample {
  std::string speaker;
  std::string recording;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::size_t length = 0;
  LabelSequence labels;
  std::vector<FeatureFrame> frames;
  std::vector<BrowSpan> brows;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::int64_t frame_ms = kDefaultFrameMs;
  std::vector<Sample> samples;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DistributionStats {
  std::size_t n = 0;
  std::size_t l = 0;
  ClassCounts counts{};
  std::array<double, kNumClasses> proportions{};

  std::int64_t count(GestureClass c) const { return counts[index_of(c)]; }
  double proportion(GestureClass c) const { return proportions[index_of(c)]; }

  friend bool operator==(const DistributionStats&, const DistributionStats&) = default;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  friend bool operator==(const Split&, const Split&) = default;
};

// ---------------------------------------------------------------------------
// Segmentation and labeling

inline void check_word_order(std::span<const WordToken> words) {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].start_ms >= words[i].end_ms) {
      throw InputFormatError("word '" + words[i].text + "' has start_ms >= end_ms");
    }
    if (i > 0 && words[i].start_ms < words[i - 1].end_ms) {
      throw InputFormatError("words '" + words[i - 1].text + "' and '" + words[i].text +
                             "' are unsorted or overlap");
    }
  }
}

// Groups words into inter-pausal units: a silence of at least gap_ms starts a
// new unit.
inline std::vector<TimeSpan> segment_ipus(std::span<const WordToken> words,
                                          std::int64_t gap_ms = kDefaultIpuGapMs) {
  check_word_order(words);
  std::vector<TimeSpan> out;
  for (const auto& w : words) {
    if (out.empty() || w.start_ms - out.back().end_ms >= gap_ms) {
      out.push_back({w.start_ms, w.end_ms});
    } else {
      out.back().end_ms = w.end_ms;
    }
  }
  return out;
}

inline std::size_t frame_count(TimeSpan span, std::int64_t frame_ms) {
  if (frame_ms <= 0) throw ConfigError("frame_ms must be positive");
  if (span.end_ms <= span.start_ms) return 0;
  return static_cast<std::size_t>((span.end_ms - span.start_ms) / frame_ms);
}

// True when the midpoint of frame k lies in [start_ms, end_ms). Works in
// doubled units so the midpoint stays integral.
inline bool covers_midpoint(std::int64_t start_ms, std::int64_t end_ms, std::int64_t utt_start,
                            std::size_t k, std::int64_t frame_ms) {
  const std::int64_t mid2 = 2 * utt_start + (2 * static_cast<std::int64_t>(k) + 1) * frame_ms;
  return 2 * start_ms <= mid2 && mid2 < 2 * end_ms;
}

inline GestureClass annotation_class(const GestureAnnotation& a) {
  if (a.gtype == GestureType::Beat) return GestureClass::Beat;
  return a.phase == GesturePhase::Stroke ? GestureClass::IdeationalStroke : GestureClass::IdeationalOther;
}

// Overlap precedence: IdeationalStroke > IdeationalOther > Beat > NoGesture.
inline int class_precedence(GestureClass c) {
  switch (c) {
    case GestureClass::IdeationalStroke: return 3;
    case GestureClass::IdeationalOther: return 2;
    case GestureClass::Beat: return 1;
    default: return 0;
  }
}

inline LabelSequence derive_class_track(std::span<const GestureAnnotation> gestures, TimeSpan utterance,
                                        std::int64_t frame_ms = kDefaultFrameMs) {
  const std::size_t n = frame_count(utterance, frame_ms);
  LabelSequence out(n, GestureClass::NoGesture);
  for (const auto& a : gestures) {
    if (!a.communicative) continue;
    const GestureClass c = annotation_class(a);
    for (std::size_t k = 0; k < n; ++k) {
      if (covers_midpoint(a.start_ms, a.end_ms, utterance.start_ms, k, frame_ms) &&
          class_precedence(c) > class_precedence(out[k])) {
        out[k] = c;
      }
    }
  }
  return out;
}

inline constexpr double kAuConfidenceMin = 0.85;
inline constexpr double kAuMeanMin = 1.0;

// Drops low-confidence or absent (value <= 0) AU frames, groups survivors into
// maximal runs per AU, and keeps runs whose mean value reaches mean_min.
// A run covers [first timestamp, last timestamp + stream step).
inline std::vector<BrowInterval> filter_au_blocks(std::span<const AuFrame> frames,
                                                  double conf_min = kAuConfidenceMin,
                                                  double mean_min = kAuMeanMin) {
  std::vector<BrowInterval> out;
  for (AuId au : {AuId::AU1, AuId::AU2, AuId::AU4}) {
    std::vector<AuFrame> stream;
    for (const auto& f : frames) {
      if (f.au == au) stream.push_back(f);
    }
    if (stream.empty()) continue;
    std::int64_t step = 0;
    for (std::size_t i = 1; i < stream.size(); ++i) {
      const std::int64_t d = stream[i].timestamp_ms - stream[i - 1].timestamp_ms;
      if (d > 0 && (step == 0 || d < step)) step = d;
    }
    if (step == 0) step = 1;
    const BrowDirection dir = au == AuId::AU4 ? BrowDirection::Down : BrowDirection::Up;
    std::size_t i = 0;
    while (i < stream.size()) {
      const auto keep = [&](const AuFrame& f) { return f.confidence >= conf_min && f.value > 0.0; };
      if (!keep(stream[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      double sum = 0.0;
      while (j < stream.size() && keep(stream[j])) sum += stream[j++].value;
      if (sum / static_cast<double>(j - i) >= mean_min) {
        out.push_back({stream[i].timestamp_ms, stream[j - 1].timestamp_ms + step, dir});
      }
      i = j;
    }
  }
  std::sort(out.begin(), out.end(), [](const BrowInterval& a, const BrowInterval& b) {
    return std::pair(a.start_ms, a.direction) < std::pair(b.start_ms, b.direction);
  });
  return out;
}

// Frames of the utterance whose midpoints fall inside the interval, or nothing.
inline std::optional<BrowSpan> to_frame_span(const BrowInterval& iv, TimeSpan utterance, std::size_t n_frames,
                                             std::int64_t frame_ms = kDefaultFrameMs) {
  std::int64_t first = -1;
  std::int64_t last = -1;
  for (std::size_t k = 0; k < n_frames; ++k) {
    if (covers_midpoint(iv.start_ms, iv.end_ms, utterance.start_ms, k, frame_ms)) {
      if (first < 0) first = static_cast<std::int64_t>(k);
      last = static_cast<std::int64_t>(k) + 1;
    }
  }
  if (first < 0) return std::nullopt;
  return BrowSpan{first, last, iv.direction};
}

// Relabels NoGesture frames covered by eyebrow movements as Beat. Hand
// gesture labels are never overwritten.
inline LabelSequence merge_eyebrow_beats(LabelSequence labels, std::span<const BrowSpan> brows, EyebrowMode mode) {
  if (mode == EyebrowMode::HandOnly) return labels;
  const auto n = static_cast<std::int64_t>(labels.size());
  for (const auto& b : brows) {
    if (b.direction == BrowDirection::Down && mode != EyebrowMode::WithUpDown) continue;
    for (std::int64_t k = std::max<std::int64_t>(0, b.first); k < std::min(n, b.last); ++k) {
      auto& c = labels[static_cast<std::size_t>(k)];
      if (c == GestureClass::NoGesture) c = GestureClass::Beat;
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Padding and statistics

inline Sample pad_sample(Sample s, std::size_t l) {
  if (s.labels.size() > l || s.frames.size() > l) {
    throw ConfigError("sample of length " + std::to_string(std::max(s.labels.size(), s.frames.size())) +
                      " exceeds padded length " + std::to_string(l));
  }
  s.labels.resize(l, GestureClass::Suffix);
  s.frames.resize(l, FeatureFrame{});
  return s;
}

inline Sample unpad_sample(Sample s) {
  s.labels.resize(std::min(s.labels.size(), s.length));
  s.frames.resize(std::min(s.frames.size(), s.length));
  return s;
}

// Common padded length: the longest unpadded utterance.
inline std::size_t padded_length(const Dataset& ds) {
  std::size_t l = 0;
  for (const auto& s : ds.samples) l = std::max(l, s.length);
  return l;
}

inline Dataset pad_dataset(Dataset ds, std::size_t l) {
  for (auto& s : ds.samples) s = pad_sample(std::move(s), l);
  return ds;
}

inline DistributionStats distribution_of(std::span<const LabelSequence> sequences) {
  DistributionStats st;
  st.n = sequences.size();
  st.l = sequences.empty() ? 0 : sequences.front().size();
  for (const auto& seq : sequences) {
    if (seq.size() != st.l) throw InputFormatError("class distribution needs sequences of equal padded length");
    for (GestureClass c : seq) ++st.counts[index_of(c)];
  }
  const double total = static_cast<double>(st.n) * static_cast<double>(st.l);
  if (total > 0) {
    for (std::size_t c = 0; c < kNumClasses; ++c) st.proportions[c] = static_cast<double>(st.counts[c]) / total;
  }
  return st;
}

inline DistributionStats class_distribution(const Dataset& ds) {
  std::vector<LabelSequence> seqs;
  seqs.reserve(ds.samples.size());
  for (const auto& s : ds.samples) seqs.push_back(s.labels);
  return distribution_of(seqs);
}

// ---------------------------------------------------------------------------
// Splits

struct SplitFractions {
  double train = 0.64;
  double val = 0.16;
  double test = 0.20;
};

// Validation and test sizes are rounded to the nearest count (at least one
// each); the remainder goes to training.
inline Split split_random(std::size_t n_samples, std::uint64_t seed, SplitFractions fr = {}) {
  if (std::abs(fr.train + fr.val + fr.test - 1.0) > 1e-9 || fr.train < 0 || fr.val < 0 || fr.test < 0) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  if (n_samples < 3) throw ConfigError("need at least 3 samples to split, have " + std::to_string(n_samples));
  const auto n = static_cast<double>(n_samples);
  auto n_val = static_cast<std::size_t>(std::max<long long>(1, std::llround(n * fr.val)));
  auto n_test = static_cast<std::size_t>(std::max<long long>(1, std::llround(n * fr.test)));
  if (n_val + n_test >= n_samples) {
    n_val = 1;
    n_test = 1;
  }
  std::vector<std::size_t> idx(n_samples);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x5e17));
  rng.shuffle(std::span(idx));
  Split out;
  const std::size_t n_train = n_samples - n_val - n_test;
  out.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                 idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline Split split_random(const Dataset& ds, std::uint64_t seed, SplitFractions fr = {}) {
  return split_random(ds.samples.size(), seed, fr);
}

inline std::vector<std::string> speakers_of(const Dataset& ds) {
  std::set<std::string> names;
  for (const auto& s : ds.samples) names.insert(s.speaker);
  return {names.begin(), names.end()};
}

// Trains on 80% of one speaker, validates on the other 20%, tests on all of
// the other speaker.
inline Split split_by_speaker(const Dataset& ds, const std::string& train_speaker, std::uint64_t seed,
                              double train_fraction = 0.8) {
  const auto speakers = speakers_of(ds);
  if (speakers.size() != 2) {
    throw ConfigError("cross-speaker split needs exactly 2 speakers, dataset has " + std::to_string(speakers.size()));
  }
  if (std::find(speakers.begin(), speakers.end(), train_speaker) == speakers.end()) {
    throw ConfigError("unknown training speaker '" + train_speaker + "'");
  }
  std::vector<std::size_t> own;
  Split out;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    if (ds.samples[i].speaker == train_speaker) {
      own.push_back(i);
    } else {
      out.test.push_back(i);
    }
  }
  Rng rng(derive_seed(seed, 0x5bea));
  rng.shuffle(std::span(own));
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(own.size()) * train_fraction));
  out.train.assign(own.begin(), own.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(own.begin() + static_cast<std::ptrdiff_t>(n_train), own.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  return out;
}

}  // namespace gestime
