#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gestime/error.hpp"
#include "gestime/rng.hpp"

namespace gestime {

inline constexpr std::size_t kNumMfcc = 13;

// Acoustic features of one 100 ms frame as delivered by the extractor.
// Unvoiced frames carry f0 = 0.
struct FeatureFrame {
  double f0 = 0.0;
  double f0_dir = 0.0;
  double intensity = 0.0;
  std::array<double, kNumMfcc> mfcc{};

  friend bool operator==(const FeatureFrame&, const FeatureFrame&) = default;
};

enum class FeatureSet : std::uint8_t { Prosody3, Mfcc13, Both16 };

inline constexpr std::size_t dimension(FeatureSet set) {
  switch (set) {
    case FeatureSet::Prosody3: return 3;
    case FeatureSet::Mfcc13: return 13;
    case FeatureSet::Both16: return 16;
  }
  return 0;
}

inline constexpr std::string_view feature_set_name(FeatureSet set) {
  switch (set) {
    case FeatureSet::Prosody3: return "prosody";
    case FeatureSet::Mfcc13: return "mfcc";
    case FeatureSet::Both16: return "both";
  }
  return "?";
}

inline std::optional<FeatureSet> parse_feature_set(std::string_view s) {
  if (s == "prosody" || s == "Prosody3") return FeatureSet::Prosody3;
  if (s == "mfcc" || s == "Mfcc13") return FeatureSet::Mfcc13;
  if (s == "both" || s == "Both16") return FeatureSet::Both16;
  return std::nullopt;
}

// Prosody column indices within Prosody3 and Both16 matrices.
inline constexpr std::size_t kColF0 = 0;
inline constexpr std::size_t kColF0Dir = 1;
inline constexpr std::size_t kColIntensity = 2;

// Row-major frames x dims matrix. Rows at index >= length are padding and
// are kept at zero by every operation in this header.
struct FeatureMatrix {
  FeatureSet set = FeatureSet::Prosody3;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t length = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(FeatureSet s, std::size_t n_rows)
      : set(s), rows(n_rows), cols(dimension(s)), length(n_rows), data(n_rows * dimension(s), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

inline FeatureMatrix assemble(std::span<const FeatureFrame> frames, FeatureSet set) {
  FeatureMatrix m(set, frames.size());
  for (std::size_t r = 0; r < frames.size(); ++r) {
    const FeatureFrame& f = frames[r];
    auto out = m.row(r);
    std::size_t c = 0;
    if (set != FeatureSet::Mfcc13) {
      out[c++] = f.f0;
      out[c++] = f.f0_dir;
      out[c++] = f.intensity;
    }
    if (set != FeatureSet::Prosody3) {
      for (double v : f.mfcc) out[c++] = v;
    }
  }
  return m;
}

// Appends zero rows up to l. The unpadded length is preserved.
inline FeatureMatrix pad_rows(FeatureMatrix m, std::size_t l) {
  if (m.rows > l) {
    throw ConfigError("cannot pad a " + std::to_string(m.rows) + "-row matrix to length " + std::to_string(l));
  }
  m.data.resize(l * m.cols, 0.0);
  m.rows = l;
  return m;
}

// Per-column z-score statistics, fit once on training data and then applied
// unchanged to every split.
struct Normalizer {
  FeatureSet set = FeatureSet::Prosody3;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t fit_rows = 0;  // number of non-padded rows the statistics came from

  bool enabled() const { return !mean.empty(); }

  FeatureMatrix apply(FeatureMatrix m) const {
    if (!enabled()) return m;
    if (m.cols != mean.size()) {
      throw InputFormatError("normalizer has " + std::to_string(mean.size()) + " columns, matrix has " +
                             std::to_string(m.cols));
    }
    for (std::size_t r = 0; r < m.length; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = (m.at(r, c) - mean[c]) / stddev[c];
    }
    return m;
  }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

inline Normalizer fit_normalizer(std::span<const FeatureMatrix> train) {
  if (train.empty()) throw ConfigError("cannot fit a normalizer on an empty training set");
  Normalizer n;
  n.set = train.front().set;
  const std::size_t d = train.front().cols;
  n.mean.assign(d, 0.0);
  n.stddev.assign(d, 0.0);
  std::size_t count = 0;
  for (const auto& m : train) {
    if (m.cols != d) throw InputFormatError("training matrices disagree on column count");
    for (std::size_t r = 0; r < m.length; ++r) {
      for (std::size_t c = 0; c < d; ++c) n.mean[c] += m.at(r, c);
    }
    count += m.length;
  }
  if (count == 0) throw ConfigError("cannot fit a normalizer: training set has no frames");
  for (auto& v : n.mean) v /= static_cast<double>(count);
  for (const auto& m : train) {
    for (std::size_t r = 0; r < m.length; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        const double dv = m.at(r, c) - n.mean[c];
        n.stddev[c] += dv * dv;
      }
    }
  }
  for (auto& v : n.stddev) {
    v = std::sqrt(v / static_cast<double>(count));
    if (!(v > 0.0)) v = 1.0;
  }
  n.fit_rows = count;
  return n;
}

struct ColumnRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Observed (min, max) of each column over non-padded rows.
inline std::vector<ColumnRange> column_ranges(std::span<const FeatureMatrix> mats) {
  if (mats.empty()) return {};
  const std::size_t d = mats.front().cols;
  std::vector<ColumnRange> out(d, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  for (const auto& m : mats) {
    for (std::size_t r = 0; r < m.length; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        out[c].lo = std::min(out[c].lo, m.at(r, c));
        out[c].hi = std::max(out[c].hi, m.at(r, c));
      }
    }
  }
  for (auto& range : out) {
    if (range.lo > range.hi) range = {0.0, 0.0};
  }
  return out;
}

// Replaces the selected columns of non-padded rows with uniform draws from
// the given per-column ranges.
inline FeatureMatrix randomize(FeatureMatrix m, std::span<const std::size_t> columns, std::uint64_t seed,
                               std::span<const ColumnRange> ranges) {
  for (std::size_t c : columns) {
    if (c >= m.cols) {
      throw ConfigError("randomize: column " + std::to_string(c) + " out of range for dimension " +
                        std::to_string(m.cols));
    }
  }
  if (!columns.empty() && ranges.size() != m.cols) {
    throw ConfigError("randomize: expected " + std::to_string(m.cols) + " column ranges");
  }
  Rng rng(seed);
  for (std::size_t r = 0; r < m.length; ++r) {
    for (std::size_t c : columns) m.at(r, c) = rng.uniform(ranges[c].lo, ranges[c].hi);
  }
  return m;
}

}  // namespace gestime
