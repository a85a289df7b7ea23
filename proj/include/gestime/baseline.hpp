#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/gesture_class.hpp"
#include "gestime/rng.hpp"
#include "gestime/seqmetric.hpp"
#include "gestime/table_io.hpp"

namespace gestime {

// First-order chain over the five classes: the random-output baseline.
struct ClassChain {
  std::array<double, kNumClasses> initial{};
  std::array<std::array<double, kNumClasses>, kNumClasses> transition{};

  friend bool operator==(const ClassChain&, const ClassChain&) = default;
};

inline ClassChain estimate_chain(std::span<const LabelSequence> train) {
  if (train.empty()) throw ConfigError("estimate_chain: no training sequences");
  std::array<double, kNumClasses> first{};
  std::array<std::array<double, kNumClasses>, kNumClasses> pairs{};
  std::size_t starts = 0;
  for (const auto& seq : train) {
    if (seq.empty()) continue;
    first[index_of(seq.front())] += 1.0;
    ++starts;
    for (std::size_t t = 1; t < seq.size(); ++t) pairs[index_of(seq[t - 1])][index_of(seq[t])] += 1.0;
  }
  if (starts == 0) throw ConfigError("estimate_chain: all training sequences are empty");
  ClassChain chain;
  for (std::size_t c = 0; c < kNumClasses; ++c) chain.initial[c] = first[c] / static_cast<double>(starts);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    double out = 0.0;
    for (double v : pairs[c]) out += v;
    if (out == 0.0) {
      chain.transition[c][c] = 1.0;  // never left: absorbing
      continue;
    }
    for (std::size_t d = 0; d < kNumClasses; ++d) chain.transition[c][d] = pairs[c][d] / out;
  }
  return chain;
}

inline LabelSequence sample_sequence(const ClassChain& chain, std::size_t l, std::uint64_t seed) {
  LabelSequence out;
  out.reserve(l);
  Rng rng(seed);
  for (std::size_t t = 0; t < l; ++t) {
    const auto& w = t == 0 ? chain.initial : chain.transition[index_of(out.back())];
    out.push_back(class_at(rng.categorical(w)));
  }
  return out;
}

struct BaselineResult {
  EvalScores mean;
  std::vector<EvalScores> runs;
};

inline constexpr std::size_t kBaselineRepetitions = 55;

// Repeats "sample one prediction per evaluation sample, score it" and
// averages each score component over repetitions.
inline BaselineResult run_baseline(const ClassChain& chain, std::span<const LabelSequence> truths,
                                   std::size_t repetitions, const MetricConfig& cfg, std::uint64_t seed) {
  if (repetitions < 1) throw ConfigError("run_baseline: repetitions must be at least 1");
  if (truths.empty()) throw ConfigError("run_baseline: empty evaluation set");
  BaselineResult res;
  res.runs.reserve(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) {
    const std::uint64_t rep_seed = derive_seed(seed, r);
    std::vector<LabelSequence> preds;
    preds.reserve(truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
      preds.push_back(sample_sequence(chain, truths[i].size(), derive_seed(rep_seed, i)));
    }
    res.runs.push_back(score(preds, truths, cfg));
  }
  res.mean = average_scores(res.runs);
  return res;
}

// Plain-text matrix with labeled rows and columns:
//   from\to  NoGesture Beat ...
//   initial  p0 p1 ...
//   NoGesture ...
inline std::string format_chain(const ClassChain& chain) {
  std::ostringstream os;
  os << "from\\to";
  for (GestureClass c : kAllClasses) os << '\t' << class_name(c);
  os << "\ninitial";
  for (double v : chain.initial) os << '\t' << format_exact(v);
  os << '\n';
  for (GestureClass c : kAllClasses) {
    os << class_name(c);
    for (double v : chain.transition[index_of(c)]) os << '\t' << format_exact(v);
    os << '\n';
  }
  return os.str();
}

inline ClassChain parse_chain(std::istream& in, const std::string& source) {
  std::vector<std::string> cols = {"from\\to"};
  for (GestureClass c : kAllClasses) cols.emplace_back(class_name(c));
  const Table t = Table::parse(in, source, '\t', cols);
  ClassChain chain;
  std::array<bool, kNumClasses + 1> seen{};
  for (const auto& row : t.rows()) {
    const std::string& label = t.text(row, "from\\to");
    std::array<double, kNumClasses>* dst = nullptr;
    std::size_t slot = 0;
    if (label == "initial") {
      dst = &chain.initial;
      slot = kNumClasses;
    } else if (const auto c = parse_class(label)) {
      dst = &chain.transition[index_of(*c)];
      slot = index_of(*c);
    } else {
      t.fail(row, "from\\to", "unknown row label '" + label + "'");
    }
    for (GestureClass c : kAllClasses) (*dst)[index_of(c)] = t.real(row, class_name(c));
    double sum = 0.0;
    for (double v : *dst) {
      if (v < 0.0) t.fail(row, "from\\to", "negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) t.fail(row, "from\\to", "row does not sum to 1");
    seen[slot] = true;
  }
  for (bool s : seen) {
    if (!s) throw InputFormatError(source + ": chain file is missing rows");
  }
  return chain;
}

}  // namespace gestime
