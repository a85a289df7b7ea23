#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>

#include "gestime/corpus.hpp"
#include "gestime/error.hpp"
#include "gestime/experiments.hpp"
#include "gestime/features.hpp"
#include "gestime/keyvalue.hpp"
#include "gestime/seqmetric.hpp"
#include "gestime/synthetic.hpp"

namespace gestime {

inline constexpr const char* kWorkersEnv = "GESTIME_WORKERS";

// Everything a command needs, loadable from and written back to a key-value
// file so that each output directory carries its exact provenance.
struct RunConfig {
  std::string corpus_dir;  // words.tsv, gestures.tsv, aus.csv, features.csv
  std::string words, gestures, aus, features;  // per-file overrides
  std::string dataset;                          // bundle written by ingest/synth
  std::string checkpoint;                       // model used by exp3 instead of retraining exp2
  std::string out = "out";

  std::int64_t frame_ms = kDefaultFrameMs;
  std::int64_t ipu_gap_ms = kDefaultIpuGapMs;
  std::int64_t threshold = 2;
  bool include_suffix = false;
  FeatureSet feature_set = FeatureSet::Prosody3;
  EyebrowMode eyebrow = EyebrowMode::HandOnly;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 1;
  experiments::Budget budget{};
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  bool normalize = true;
  std::size_t baseline_repetitions = kBaselineRepetitions;
  experiments::Correlation correlation = experiments::Correlation::Pearson;

  // single-model training
  std::size_t enc_dim = 3;
  std::size_t dec_dim = 3;
  std::size_t epochs = 500;

  // synthetic corpus
  std::size_t synth_samples = 300;
  std::size_t synth_max_len = 20;

  MetricConfig metric() const {
    MetricConfig m;
    m.threshold = threshold;
    m.include_suffix = include_suffix;
    return m;
  }

  experiments::ExperimentConfig experiment(std::size_t workers) const {
    experiments::ExperimentConfig e;
    e.master_seed = seed;
    e.split_seed = split_seed;
    e.metric = metric();
    e.budget = budget;
    e.feature_set = feature_set;
    e.eyebrow = eyebrow;
    e.normalize = normalize;
    e.batch_size = batch_size;
    e.learning_rate = learning_rate;
    e.workers = workers;
    e.baseline_repetitions = baseline_repetitions;
    e.correlation = correlation;
    return e;
  }

  SyntheticConfig synthetic() const {
    SyntheticConfig s;
    s.seed = seed;
    s.n_samples = synth_samples;
    s.max_len_frames = synth_max_len;
    return s;
  }

  void validate() const {
    if (threshold < 0) throw ConfigError("threshold must be >= 0");
    if (frame_ms <= 0) throw ConfigError("frame_ms must be positive");
    if (ipu_gap_ms < 0) throw ConfigError("ipu_gap_ms must be >= 0");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (enc_dim == 0 || dec_dim == 0) throw ConfigError("enc_dim and dec_dim must be positive");
    if (enc_dim > nnet::kMaxHidden || dec_dim > nnet::kMaxHidden) throw ConfigError("hidden width too large");
    if (synth_samples == 0 || synth_max_len == 0) throw ConfigError("synthetic corpus must be non-empty");
  }

  KeyValueFile to_keyvalue() const {
    KeyValueFile kv;
    const auto put = [&](const char* k, const std::string& v) {
      if (!v.empty()) kv.set(k, v);
    };
    put("corpus_dir", corpus_dir);
    put("words", words);
    put("gestures", gestures);
    put("aus", aus);
    put("features", features);
    put("dataset", dataset);
    put("checkpoint", checkpoint);
    kv.set("out", out);
    kv.set("frame_ms", std::to_string(frame_ms));
    kv.set("ipu_gap_ms", std::to_string(ipu_gap_ms));
    kv.set("threshold", std::to_string(threshold));
    kv.set("include_suffix", include_suffix ? "1" : "0");
    kv.set("feature_set", std::string(feature_set_name(feature_set)));
    kv.set("eyebrow_mode", std::string(eyebrow_mode_name(eyebrow)));
    kv.set("seed", std::to_string(seed));
    kv.set("split_seed", std::to_string(split_seed));
    kv.set("budget", experiments::format_budget(budget));
    kv.set("batch_size", std::to_string(batch_size));
    kv.set("learning_rate", format_exact(learning_rate));
    kv.set("normalize", normalize ? "1" : "0");
    kv.set("baseline_repetitions", std::to_string(baseline_repetitions));
    kv.set("correlation", correlation == experiments::Correlation::Pearson ? "pearson" : "spearman");
    kv.set("enc_dim", std::to_string(enc_dim));
    kv.set("dec_dim", std::to_string(dec_dim));
    kv.set("epochs", std::to_string(epochs));
    kv.set("synth_samples", std::to_string(synth_samples));
    kv.set("synth_max_len", std::to_string(synth_max_len));
    return kv;
  }

  static RunConfig from_keyvalue(const KeyValueFile& kv) {
    RunConfig c;
    static constexpr std::array<std::string_view, 27> kKnown = {
        "corpus_dir", "words", "gestures", "aus", "features", "dataset", "checkpoint", "out", "frame_ms",
        "ipu_gap_ms", "threshold", "include_suffix", "feature_set", "eyebrow_mode", "seed", "split_seed", "budget",
        "batch_size", "learning_rate", "normalize", "baseline_repetitions", "correlation", "enc_dim", "dec_dim",
        "epochs", "synth_samples", "synth_max_len"};
    for (const auto& [k, v] : kv.entries()) {
      if (std::find(kKnown.begin(), kKnown.end(), k) == kKnown.end()) throw ConfigError("unknown config key '" + k + "'");
    }
    const auto str = [&](const char* k, std::string& dst) {
      if (auto v = kv.get(k)) dst = *v;
    };
    const auto u64 = [&](const char* k, auto& dst) {
      if (!kv.has(k)) return;
      const auto v = kv.integer(k);
      if (v < 0) throw ConfigError(std::string("config key '") + k + "' must be >= 0");
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(v);
    };
    const auto flag = [&](const char* k, bool& dst) {
      if (!kv.has(k)) return;
      const auto v = kv.integer(k);
      if (v != 0 && v != 1) throw ConfigError(std::string("config key '") + k + "' must be 0 or 1");
      dst = v == 1;
    };
    str("corpus_dir", c.corpus_dir);
    str("words", c.words);
    str("gestures", c.gestures);
    str("aus", c.aus);
    str("features", c.features);
    str("dataset", c.dataset);
    str("checkpoint", c.checkpoint);
    str("out", c.out);
    if (kv.has("frame_ms")) c.frame_ms = kv.integer("frame_ms");
    if (kv.has("ipu_gap_ms")) c.ipu_gap_ms = kv.integer("ipu_gap_ms");
    if (kv.has("threshold")) c.threshold = kv.integer("threshold");
    flag("include_suffix", c.include_suffix);
    if (auto v = kv.get("feature_set")) c.set_feature_set(*v);
    if (auto v = kv.get("eyebrow_mode")) c.set_eyebrow_mode(*v);
    u64("seed", c.seed);
    u64("split_seed", c.split_seed);
    if (auto v = kv.get("budget")) c.budget = experiments::parse_budget(*v);
    u64("batch_size", c.batch_size);
    if (kv.has("learning_rate")) c.learning_rate = kv.real("learning_rate");
    flag("normalize", c.normalize);
    u64("baseline_repetitions", c.baseline_repetitions);
    if (auto v = kv.get("correlation")) {
      if (*v == "pearson") c.correlation = experiments::Correlation::Pearson;
      else if (*v == "spearman") c.correlation = experiments::Correlation::Spearman;
      else throw ConfigError("correlation must be 'pearson' or 'spearman'");
    }
    u64("enc_dim", c.enc_dim);
    u64("dec_dim", c.dec_dim);
    u64("epochs", c.epochs);
    u64("synth_samples", c.synth_samples);
    u64("synth_max_len", c.synth_max_len);
    return c;
  }

  static RunConfig load(const std::string& path) { return from_keyvalue(KeyValueFile::read(path)); }

  void set_feature_set(std::string_view v) {
    const auto fs = parse_feature_set(v);
    if (!fs) throw ConfigError("unknown feature set '" + std::string(v) + "' (prosody, mfcc, both)");
    feature_set = *fs;
  }
  void set_eyebrow_mode(std::string_view v) {
    const auto m = parse_eyebrow_mode(v);
    if (!m) throw ConfigError("unknown eyebrow mode '" + std::string(v) + "' (hand-only, with-upward, with-updown)");
    eyebrow = *m;
  }
};

// Worker count from the environment; defaults to the hardware concurrency.
inline std::size_t workers_from_env() {
  const char* v = std::getenv(kWorkersEnv);
  if (v == nullptr || *v == '\0') return std::max(1u, std::thread::hardware_concurrency());
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
  return static_cast<std::size_t>(n);
}

}  // namespace gestime
