#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/gesture_class.hpp"

// Block-based comparison of a predicted class track against ground truth.
//
// Both sequences are run-length encoded into blocks. For every class, blocks
// of that class are paired one-to-one and in order (no crossings) between the
// two sequences; a pair is admissible when the city-block distance between
// the (start, end) boundaries is at most T frames. Among admissible pairings
// the matcher keeps one with the largest aligned mass sum(len(p) + len(t)),
// breaking ties by the lexicographically smallest list of (truth, pred) index
// pairs. Unpaired prediction blocks are insertions, unpaired truth blocks are
// deletions, and all three masses are normalized by the class frame count of
// the ground truth.
namespace gestime {

struct Block {
  GestureClass cls = GestureClass::NoGesture;
  std::int64_t start = 0;  // inclusive frame index
  std::int64_t end = 0;    // exclusive frame index

  std::int64_t length() const { return end - start; }
  friend bool operator==(const Block&, const Block&) = default;
};

struct MetricConfig {
  std::int64_t threshold = 2;
  bool include_suffix = false;
};

inline std::vector<Block> to_blocks(std::span<const GestureClass> labels) {
  std::vector<Block> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = static_cast<std::int64_t>(i);
    if (!out.empty() && out.back().cls == labels[i]) {
      out.back().end = k + 1;
    } else {
      out.push_back({labels[i], k, k + 1});
    }
  }
  return out;
}

inline std::int64_t block_distance(const Block& p, const Block& t) {
  return std::abs(p.start - t.start) + std::abs(p.end - t.end);
}

inline bool is_aligned(const Block& p, const Block& t, std::int64_t threshold) {
  return p.cls == t.cls && block_distance(p, t) <= threshold;
}

struct BlockPair {
  std::size_t pred = 0;   // index into the prediction block list
  std::size_t truth = 0;  // index into the truth block list
  friend bool operator==(const BlockPair&, const BlockPair&) = default;
};

struct Matching {
  std::array<std::vector<BlockPair>, kNumClasses> pairs;
  std::vector<std::size_t> insertions;  // unmatched prediction block indices
  std::vector<std::size_t> deletions;   // unmatched truth block indices
};

namespace detail {

// Optimal non-crossing matching between two same-class block lists. Returns
// pairs of local indices, ordered.
inline std::vector<BlockPair> match_same_class(std::span<const Block> pred, std::span<const Block> truth,
                                               std::int64_t threshold) {
  const std::size_t m = pred.size();
  const std::size_t n = truth.size();
  if (m == 0 || n == 0) return {};
  // best[i][j]: largest aligned mass using pred[i..] and truth[j..].
  std::vector<std::int64_t> best((m + 1) * (n + 1), 0);
  const auto at = [&](std::size_t i, std::size_t j) -> std::int64_t& { return best[i * (n + 1) + j]; };
  const auto gain = [&](std::size_t i, std::size_t j) -> std::int64_t {
    return is_aligned(pred[i], truth[j], threshold) ? pred[i].length() + truth[j].length() : -1;
  };
  for (std::size_t i = m; i-- > 0;) {
    for (std::size_t j = n; j-- > 0;) {
      std::int64_t v = std::max(at(i + 1, j), at(i, j + 1));
      const std::int64_t g = gain(i, j);
      if (g >= 0) v = std::max(v, g + at(i + 1, j + 1));
      at(i, j) = v;
    }
  }
  std::vector<BlockPair> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < m && j < n && at(i, j) > 0) {
    const std::int64_t target = at(i, j);
    bool found = false;
    for (std::size_t t = j; t < n && !found; ++t) {
      for (std::size_t p = i; p < m; ++p) {
        const std::int64_t g = gain(p, t);
        if (g >= 0 && g + at(p + 1, t + 1) == target) {
          out.push_back({p, t});
          i = p + 1;
          j = t + 1;
          found = true;
          break;
        }
      }
    }
    if (!found) break;  // unreachable: best[i][j] > 0 is always witnessed by some pair
  }
  return out;
}

}  // namespace detail

inline bool scored_class(GestureClass c, const MetricConfig& cfg) {
  return c != GestureClass::Suffix || cfg.include_suffix;
}

inline Matching match_blocks(std::span<const Block> pred, std::span<const Block> truth, const MetricConfig& cfg) {
  const auto total = [](std::span<const Block> b) { return b.empty() ? std::int64_t{0} : b.back().end; };
  if (total(pred) != total(truth)) {
    throw InputFormatError("match_blocks: prediction covers " + std::to_string(total(pred)) +
                           " frames, truth covers " + std::to_string(total(truth)));
  }
  if (cfg.threshold < 0) throw ConfigError("metric threshold must be non-negative");
  Matching out;
  for (GestureClass c : kAllClasses) {
    if (!scored_class(c, cfg)) continue;
    std::vector<std::size_t> pi;
    std::vector<std::size_t> ti;
    std::vector<Block> pb;
    std::vector<Block> tb;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      if (pred[k].cls == c) {
        pi.push_back(k);
        pb.push_back(pred[k]);
      }
    }
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (truth[k].cls == c) {
        ti.push_back(k);
        tb.push_back(truth[k]);
      }
    }
    const auto local = detail::match_same_class(pb, tb, cfg.threshold);
    std::vector<bool> pred_used(pb.size(), false);
    std::vector<bool> truth_used(tb.size(), false);
    for (const auto& pr : local) {
      out.pairs[index_of(c)].push_back({pi[pr.pred], ti[pr.truth]});
      pred_used[pr.pred] = true;
      truth_used[pr.truth] = true;
    }
    for (std::size_t k = 0; k < pb.size(); ++k) {
      if (!pred_used[k]) out.insertions.push_back(pi[k]);
    }
    for (std::size_t k = 0; k < tb.size(); ++k) {
      if (!truth_used[k]) out.deletions.push_back(ti[k]);
    }
  }
  std::sort(out.insertions.begin(), out.insertions.end());
  std::sort(out.deletions.begin(), out.deletions.end());
  return out;
}

// Raw per-class frame masses for one or more compared samples.
struct ClassMass {
  std::int64_t aligned = 0;   // sum over pairs of len(pred) + len(truth)
  std::int64_t inserted = 0;  // frames in unmatched prediction blocks
  std::int64_t deleted = 0;   // frames in unmatched truth blocks
  std::int64_t truth_frames = 0;

  ClassMass& operator+=(const ClassMass& o) {
    aligned += o.aligned;
    inserted += o.inserted;
    deleted += o.deleted;
    truth_frames += o.truth_frames;
    return *this;
  }
  friend bool operator==(const ClassMass&, const ClassMass&) = default;
};

using MassTable = std::array<ClassMass, kNumClasses>;

inline MassTable sample_masses(std::span<const GestureClass> pred, std::span<const GestureClass> truth,
                               const MetricConfig& cfg) {
  if (pred.size() != truth.size()) {
    throw InputFormatError("prediction has " + std::to_string(pred.size()) + " frames, truth has " +
                           std::to_string(truth.size()));
  }
  const auto pb = to_blocks(pred);
  const auto tb = to_blocks(truth);
  const Matching m = match_blocks(pb, tb, cfg);
  MassTable out{};
  for (GestureClass c : truth) ++out[index_of(c)].truth_frames;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (const auto& pr : m.pairs[c]) out[c].aligned += pb[pr.pred].length() + tb[pr.truth].length();
  }
  for (std::size_t k : m.insertions) out[index_of(pb[k].cls)].inserted += pb[k].length();
  for (std::size_t k : m.deletions) out[index_of(tb[k].cls)].deleted += tb[k].length();
  return out;
}

struct ClassScore {
  // Empty when the class never occurs in the ground truth.
  std::optional<double> alignment;
  std::optional<double> insertion;
  std::optional<double> deletion;
  std::int64_t t_c = 0;
  double p_c = 0.0;

  friend bool operator==(const ClassScore&, const ClassScore&) = default;
};

struct EvalScores {
  std::array<ClassScore, kNumClasses> classes{};
  std::size_t n = 0;
  std::size_t l = 0;
  MetricConfig config{};

  const ClassScore& operator[](GestureClass c) const { return classes[index_of(c)]; }
  ClassScore& operator[](GestureClass c) { return classes[index_of(c)]; }

  friend bool operator==(const EvalScores& a, const EvalScores& b) {
    return a.classes == b.classes && a.n == b.n && a.l == b.l && a.config.threshold == b.config.threshold &&
           a.config.include_suffix == b.config.include_suffix;
  }
};

struct SequencePair {
  std::span<const GestureClass> pred;
  std::span<const GestureClass> truth;
};

inline EvalScores scores_from_masses(const MassTable& mass, std::size_t n, std::size_t l, const MetricConfig& cfg) {
  EvalScores out;
  out.n = n;
  out.l = l;
  out.config = cfg;
  const double nl = static_cast<double>(n) * static_cast<double>(l);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& s = out.classes[c];
    s.t_c = mass[c].truth_frames;
    s.p_c = nl > 0 ? static_cast<double>(s.t_c) / nl : 0.0;
    if (!scored_class(class_at(c), cfg) || s.t_c == 0) continue;
    // n * l * p_c is exactly t_c; dividing by the count avoids rounding.
    const auto denom = static_cast<double>(s.t_c);
    s.deletion = static_cast<double>(mass[c].deleted) / denom;
    s.insertion = static_cast<double>(mass[c].inserted) / denom;
    s.alignment = static_cast<double>(mass[c].aligned) / (2.0 * denom);
  }
  return out;
}

inline EvalScores score(std::span<const SequencePair> pairs, const MetricConfig& cfg = {}) {
  if (pairs.empty()) throw ConfigError("score: empty evaluation set");
  const std::size_t l = pairs.front().truth.size();
  MassTable total{};
  for (const auto& p : pairs) {
    if (p.truth.size() != l || p.pred.size() != l) {
      throw InputFormatError("score: every sequence must have the common length " + std::to_string(l));
    }
    const MassTable m = sample_masses(p.pred, p.truth, cfg);
    for (std::size_t c = 0; c < kNumClasses; ++c) total[c] += m[c];
  }
  return scores_from_masses(total, pairs.size(), l, cfg);
}

inline EvalScores score(std::span<const LabelSequence> preds, std::span<const LabelSequence> truths,
                        const MetricConfig& cfg = {}) {
  if (preds.size() != truths.size()) {
    throw InputFormatError("score: " + std::to_string(preds.size()) + " predictions for " +
                           std::to_string(truths.size()) + " ground-truth sequences");
  }
  std::vector<SequencePair> pairs;
  pairs.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) pairs.push_back({preds[i], truths[i]});
  return score(pairs, cfg);
}

// Component-wise arithmetic mean of several reports over the same truth set.
inline EvalScores average_scores(std::span<const EvalScores> runs) {
  if (runs.empty()) throw ConfigError("average_scores: nothing to average");
  EvalScores out = runs.front();
  const auto k = static_cast<double>(runs.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto mean_of = [&](std::optional<double> ClassScore::*field) -> std::optional<double> {
      double sum = 0.0;
      for (const auto& r : runs) {
        const auto& v = r.classes[c].*field;
        if (!v) return std::nullopt;
        sum += *v;
      }
      return sum / k;
    };
    out.classes[c].alignment = mean_of(&ClassScore::alignment);
    out.classes[c].insertion = mean_of(&ClassScore::insertion);
    out.classes[c].deletion = mean_of(&ClassScore::deletion);
  }
  return out;
}

}  // namespace gestime
