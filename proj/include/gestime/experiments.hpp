#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gestime/baseline.hpp"
#include "gestime/corpus.hpp"
#include "gestime/error.hpp"
#include "gestime/features.hpp"
#include "gestime/nnet/checkpoint.hpp"
#include "gestime/nnet/train.hpp"
#include "gestime/report.hpp"
#include "gestime/rng.hpp"
#include "gestime/seqmetric.hpp"

namespace gestime::experiments {

// Training effort per problem: (count, epochs) groups.
struct Budget {
  std::vector<std::pair<std::size_t, std::size_t>> runs = {{25, 500}, {25, 1000}, {5, 2000}};

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.first;
    return n;
  }
  std::size_t epochs_of(std::size_t model) const {
    for (const auto& [count, epochs] : runs) {
      if (model < count) return epochs;
      model -= count;
    }
    throw ConfigError("budget has fewer than " + std::to_string(model + 1) + " models");
  }
  friend bool operator==(const Budget&, const Budget&) = default;
};

// "25x500,25x1000,5x2000"
inline Budget parse_budget(std::string_view text) {
  Budget b;
  b.runs.clear();
  for (const auto& part : split_fields(text, ',')) {
    const auto item = trim(part);
    const auto x = item.find('x');
    std::size_t count = 0;
    std::size_t epochs = 0;
    const auto parse = [](std::string_view s, std::size_t& v) {
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      return ec == std::errc() && ptr == s.data() + s.size();
    };
    if (x == std::string_view::npos || !parse(item.substr(0, x), count) || !parse(item.substr(x + 1), epochs) ||
        count == 0) {
      throw ConfigError("malformed budget '" + std::string(text) + "', expected e.g. 25x500,25x1000,5x2000");
    }
    b.runs.emplace_back(count, epochs);
  }
  if (b.runs.empty()) throw ConfigError("empty budget");
  return b;
}

inline std::string format_budget(const Budget& b) {
  std::string s;
  for (const auto& [count, epochs] : b.runs) {
    if (!s.empty()) s += ',';
    s += std::to_string(count) + "x" + std::to_string(epochs);
  }
  return s;
}

enum class Correlation : std::uint8_t { Pearson, Spearman };

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  std::uint64_t split_seed = 1;
  MetricConfig metric{};
  Budget budget{};
  FeatureSet feature_set = FeatureSet::Prosody3;
  EyebrowMode eyebrow = EyebrowMode::HandOnly;
  bool normalize = true;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::size_t workers = 1;
  std::size_t baseline_repetitions = kBaselineRepetitions;
  Correlation correlation = Correlation::Pearson;
  double selection_floor = 0.05;
};

// Model-ready splits for one (feature set, eyebrow mode) condition.
struct PreparedSplits {
  nnet::SequenceSet train;
  nnet::SequenceSet val;
  nnet::SequenceSet test;
  Normalizer normalizer;
  std::vector<ColumnRange> train_ranges;  // of the (normalized) training inputs
  DistributionStats distribution;        // over all three splits
  std::size_t l = 0;
  FeatureSet feature_set = FeatureSet::Prosody3;
  EyebrowMode eyebrow = EyebrowMode::HandOnly;
};

inline LabelSequence labels_for(const Sample& s, EyebrowMode mode, std::size_t l) {
  LabelSequence y(s.labels.begin(), s.labels.begin() + static_cast<std::ptrdiff_t>(s.length));
  y = merge_eyebrow_beats(std::move(y), s.brows, mode);
  y.resize(l, GestureClass::Suffix);
  return y;
}

inline PreparedSplits prepare(const Dataset& ds, const Split& split, FeatureSet set, EyebrowMode mode,
                              bool normalize, std::size_t l = 0, const Normalizer* fixed = nullptr) {
  if (l == 0) l = padded_length(ds);
  if (split.train.empty()) throw ConfigError("prepare: empty training split");
  PreparedSplits p;
  p.l = l;
  p.feature_set = set;
  p.eyebrow = mode;
  const auto raw = [&](std::size_t i) {
    const Sample& s = ds.samples.at(i);
    return assemble(std::span(s.frames.data(), s.length), set);
  };
  std::vector<FeatureMatrix> train_raw;
  for (std::size_t i : split.train) train_raw.push_back(raw(i));
  if (fixed != nullptr) {
    if (fixed->enabled() && fixed->mean.size() != dimension(set)) throw ConfigError("normalizer does not match feature set");
    p.normalizer = *fixed;
  } else if (normalize) {
    p.normalizer = fit_normalizer(train_raw);
  }
  p.normalizer.set = set;
  const auto fill = [&](const std::vector<std::size_t>& idx, nnet::SequenceSet& out) {
    for (std::size_t i : idx) {
      out.inputs.push_back(pad_rows(p.normalizer.apply(raw(i)), l));
      out.labels.push_back(labels_for(ds.samples[i], mode, l));
    }
  };
  fill(split.train, p.train);
  fill(split.val, p.val);
  fill(split.test, p.test);
  p.train_ranges = column_ranges(p.train.inputs);
  std::vector<LabelSequence> all = p.train.labels;
  all.insert(all.end(), p.val.labels.begin(), p.val.labels.end());
  all.insert(all.end(), p.test.labels.begin(), p.test.labels.end());
  p.distribution = distribution_of(all);
  return p;
}

struct ModelRun {
  std::size_t index = 0;
  nnet::Checkpoint checkpoint;
  EvalScores val;
  EvalScores test;
};

// Hyperparameters of model `index`: encoder and decoder widths drawn
// independently and uniformly from [1, d].
inline nnet::Hyper draw_hyper(const ExperimentConfig& cfg, std::uint64_t stream_seed, std::size_t index) {
  nnet::Hyper h;
  const std::size_t d = dimension(cfg.feature_set);
  Rng rng(derive_seed(stream_seed, index));
  h.input_dim = d;
  h.enc_dim = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(d)));
  h.dec_dim = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(d)));
  h.epochs = cfg.budget.epochs_of(index);
  h.batch_size = cfg.batch_size;
  h.learning_rate = cfg.learning_rate;
  h.seed = derive_seed(stream_seed, 0x10000 + index);
  h.feature_set = cfg.feature_set;
  return h;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::vector<ModelRun> run_budget(const PreparedSplits& data, const ExperimentConfig& cfg,
                                        std::uint64_t stream_seed) {
  const std::size_t n = cfg.budget.total();
  std::vector<ModelRun> runs(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    const nnet::Hyper h = draw_hyper(cfg, stream_seed, i);
    nnet::TrainResult r = nnet::train(data.train, data.val, h, data.normalizer, cfg.metric);
    runs[i].index = i;
    runs[i].val = r.val_scores;
    runs[i].test = score(nnet::predict_all(r.checkpoint.params, data.test.inputs), data.test.labels, cfg.metric);
    runs[i].checkpoint = std::move(r.checkpoint);
  });
  return runs;
}

struct SelectionRule {
  std::array<double, kNumRealClasses> weights{};  // indexed by class (NoGesture..IdeationalStroke)
  double floor = 0.05;
};

inline SelectionRule selection_rule(const DistributionStats& st, double floor = 0.05) {
  SelectionRule r;
  for (std::size_t c = 0; c < kNumRealClasses; ++c) r.weights[c] = st.proportions[c];
  r.floor = floor;
  return r;
}

struct Selection {
  std::size_t index = 0;
  bool fallback = false;  // no model met every floor
  double objective = 0.0;
};

// Weighted validation alignment. A class absent from validation (undefined
// alignment) adds nothing and does not block the floor.
inline double selection_objective(const EvalScores& s, const SelectionRule& rule) {
  double v = 0.0;
  for (std::size_t c = 0; c < kNumRealClasses; ++c) v += rule.weights[c] * s.classes[c].alignment.value_or(0.0);
  return v;
}

inline bool meets_floor(const EvalScores& s, const SelectionRule& rule) {
  for (std::size_t c = 0; c < kNumRealClasses; ++c) {
    const auto& a = s.classes[c].alignment;
    if (a && *a < rule.floor) return false;
  }
  return true;
}

inline Selection select_model(std::span<const EvalScores> val, const SelectionRule& rule) {
  if (val.empty()) throw ConfigError("select_model: no candidates");
  std::optional<Selection> best;
  std::optional<Selection> best_any;
  for (std::size_t i = 0; i < val.size(); ++i) {
    const double obj = selection_objective(val[i], rule);
    if (!best_any || obj > best_any->objective) best_any = Selection{i, true, obj};
    if (meets_floor(val[i], rule) && (!best || obj > best->objective)) best = Selection{i, false, obj};
  }
  return best ? *best : *best_any;
}

inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Average ranks (ties share the mean rank).
inline std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && x[idx[j]] == x[idx[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) r[idx[k]] = mean_rank;
    i = j;
  }
  return r;
}

inline std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

struct ClassReliability {
  std::optional<double> mean_val;
  std::optional<double> mean_test;
  std::optional<double> correlation;
};

struct ReliabilityReport {
  std::array<ClassReliability, kNumRealClasses> classes{};
  const ClassReliability& operator[](GestureClass c) const { return classes[index_of(c)]; }
};

// Correlation across models between validation and test alignment, per class.
inline ReliabilityReport reliability(std::span<const EvalScores> val, std::span<const EvalScores> test,
                                     Correlation kind = Correlation::Pearson) {
  if (val.size() != test.size()) throw ConfigError("reliability: validation and test series differ in length");
  ReliabilityReport rep;
  for (std::size_t c = 0; c < kNumRealClasses; ++c) {
    std::vector<double> xs;
    std::vector<double> ys;
    bool defined = !val.empty();
    for (std::size_t i = 0; i < val.size(); ++i) {
      const auto& a = val[i].classes[c].alignment;
      const auto& b = test[i].classes[c].alignment;
      if (!a || !b) {
        defined = false;
        break;
      }
      xs.push_back(*a);
      ys.push_back(*b);
    }
    if (!defined) continue;
    const auto n = static_cast<double>(xs.size());
    rep.classes[c].mean_val = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    rep.classes[c].mean_test = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    rep.classes[c].correlation = kind == Correlation::Pearson ? pearson(xs, ys) : spearman(xs, ys);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report files

// Relative path -> content, in emission order.
struct ReportFiles {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string path, std::string content) { files.emplace_back(std::move(path), std::move(content)); }
  const std::string* find(const std::string& path) const {
    for (const auto& [p, c] : files) {
      if (p == path) return &c;
    }
    return nullptr;
  }
  void write(const std::filesystem::path& dir) const {
    for (const auto& [p, c] : files) write_text_file(dir / p, c);
  }
};

inline std::string run_manifest(const ExperimentConfig& cfg, std::string_view experiment) {
  std::ostringstream os;
  os << "experiment = " << experiment << '\n';
  os << "seed = " << cfg.master_seed << '\n';
  os << "split_seed = " << cfg.split_seed << '\n';
  os << "threshold = " << cfg.metric.threshold << '\n';
  os << "include_suffix = " << (cfg.metric.include_suffix ? 1 : 0) << '\n';
  os << "feature_set = " << feature_set_name(cfg.feature_set) << '\n';
  os << "eyebrow_mode = " << eyebrow_mode_name(cfg.eyebrow) << '\n';
  os << "budget = " << format_budget(cfg.budget) << '\n';
  os << "batch_size = " << cfg.batch_size << '\n';
  os << "learning_rate = " << format_exact(cfg.learning_rate) << '\n';
  os << "normalize = " << (cfg.normalize ? 1 : 0) << '\n';
  os << "baseline_repetitions = " << cfg.baseline_repetitions << '\n';
  os << "correlation = " << (cfg.correlation == Correlation::Pearson ? "pearson" : "spearman") << '\n';
  return os.str();
}

inline std::string models_csv(std::span<const ModelRun> runs, std::size_t selected) {
  std::ostringstream os;
  os << "model,enc_dim,dec_dim,epochs,seed,selected";
  for (const char* split : {"val", "test"}) {
    for (const char* metric : {"alignment", "insertion", "deletion"}) {
      for (GestureClass c : kReportOrder) os << ',' << split << '_' << metric << '_' << class_name(c);
    }
  }
  os << '\n';
  const auto cell = [](const std::optional<double>& v) { return v ? format_exact(*v) : std::string(kUndefined); };
  for (const auto& r : runs) {
    const auto& h = r.checkpoint.hyper;
    os << r.index << ',' << h.enc_dim << ',' << h.dec_dim << ',' << h.epochs << ',' << h.seed << ','
       << (r.index == selected ? 1 : 0);
    for (const EvalScores* s : {&r.val, &r.test}) {
      for (auto field : {&ClassScore::alignment, &ClassScore::insertion, &ClassScore::deletion}) {
        for (GestureClass c : kReportOrder) os << ',' << cell((*s)[c].*field);
      }
    }
    os << '\n';
  }
  return os.str();
}

inline std::string reliability_csv(const ReliabilityReport& rep) {
  std::ostringstream os;
  os << "class,mean_val_alignment,mean_test_alignment,correlation\n";
  for (GestureClass c : kReportOrder) {
    const auto& r = rep[c];
    os << class_name(c) << ',' << format_score(r.mean_val) << ',' << format_score(r.mean_test) << ','
       << format_score(r.correlation) << '\n';
  }
  return os.str();
}

inline std::string markdown_reliability(const ReliabilityReport& rep) {
  std::ostringstream os;
  os << "| Validation reliability | Mean val alignment | Mean test alignment | Correlation |\n|---|---|---|---|\n";
  for (GestureClass c : kReportOrder) {
    const auto& r = rep[c];
    os << "| " << class_name(c) << " | " << format_score(r.mean_val, 3) << " | " << format_score(r.mean_test, 3)
       << " | " << format_score(r.correlation, 3) << " |\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Experiments

// Distinct stream per experiment/condition so that conditions never share
// random draws by accident.
inline std::uint64_t stream_for(const ExperimentConfig& cfg, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char ch : tag) h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ULL;
  return derive_seed(cfg.master_seed, h);
}

struct RandomResult {
  ClassChain chain;
  BaselineResult baseline;
  ReportFiles files;
};

// Experiment 1: first-order chain estimated on training labels, sampled and
// scored against the test split, averaged over the repetitions.
inline RandomResult exp_random(const Dataset& ds, const Split& split, const ExperimentConfig& cfg) {
  const std::size_t l = padded_length(ds);
  std::vector<LabelSequence> train;
  std::vector<LabelSequence> test;
  for (std::size_t i : split.train) train.push_back(labels_for(ds.samples.at(i), cfg.eyebrow, l));
  for (std::size_t i : split.test) test.push_back(labels_for(ds.samples.at(i), cfg.eyebrow, l));
  RandomResult r;
  r.chain = estimate_chain(train);
  r.baseline = run_baseline(r.chain, test, cfg.baseline_repetitions, cfg.metric, stream_for(cfg, "exp1"));
  std::ostringstream runs;
  runs << "repetition";
  for (GestureClass c : kReportOrder) runs << ",alignment_" << class_name(c);
  for (GestureClass c : kReportOrder) runs << ",insertion_" << class_name(c);
  for (GestureClass c : kReportOrder) runs << ",deletion_" << class_name(c);
  runs << '\n';
  for (std::size_t k = 0; k < r.baseline.runs.size(); ++k) {
    runs << k;
    for (auto field : {&ClassScore::alignment, &ClassScore::insertion, &ClassScore::deletion}) {
      for (GestureClass c : kReportOrder) {
        const auto& v = r.baseline.runs[k][c].*field;
        runs << ',' << (v ? format_exact(*v) : std::string(kUndefined));
      }
    }
    runs << '\n';
  }
  r.files.add("config.txt", run_manifest(cfg, "exp1"));
  r.files.add("chain.txt", format_chain(r.chain));
  r.files.add("eval_report.csv", eval_report_csv(r.baseline.mean));
  r.files.add("baseline_runs.csv", runs.str());
  r.files.add("report.md", "# Random output (Markov chain baseline, " + std::to_string(cfg.baseline_repetitions) +
                               " repetitions)\n\n" + markdown_scores("Exp 1: Random output", r.baseline.mean));
  return r;
}

struct FullResult {
  std::vector<ModelRun> runs;
  Selection selection;
  ReliabilityReport reliability;
  ReportFiles files;

  const ModelRun& chosen() const { return runs.at(selection.index); }
};

// Budget of trainings, validation-based selection and validation reliability
// for one prepared condition. Files are emitted under `prefix`.
inline FullResult run_condition(const PreparedSplits& data, const ExperimentConfig& cfg, std::string_view tag,
                                std::string_view title, const std::string& prefix = "") {
  ExperimentConfig local = cfg;
  local.feature_set = data.feature_set;
  local.eyebrow = data.eyebrow;
  FullResult r;
  r.runs = run_budget(data, local, stream_for(cfg, tag));
  std::vector<EvalScores> val;
  std::vector<EvalScores> test;
  for (const auto& m : r.runs) {
    val.push_back(m.val);
    test.push_back(m.test);
  }
  r.selection = select_model(val, selection_rule(data.distribution, cfg.selection_floor));
  r.reliability = reliability(val, test, cfg.correlation);
  const ModelRun& best = r.chosen();
  std::ostringstream md;
  md << "# " << title << "\n\n";
  md << "Selected model " << best.index << " (enc_dim " << best.checkpoint.hyper.enc_dim << ", dec_dim "
     << best.checkpoint.hyper.dec_dim << ", " << best.checkpoint.hyper.epochs << " epochs)";
  if (r.selection.fallback) md << " **fallback: no model reached the " << cfg.selection_floor << " alignment floor**";
  md << "\n\n" << markdown_scores(title, best.test) << '\n' << markdown_reliability(r.reliability);
  r.files.add(prefix + "eval_report.csv", eval_report_csv(best.test));
  r.files.add(prefix + "models.csv", models_csv(r.runs, r.selection.index));
  r.files.add(prefix + "reliability.csv", reliability_csv(r.reliability));
  r.files.add(prefix + "report.md", md.str());
  r.files.add(prefix + "model.ckpt", nnet::format_checkpoint(best.checkpoint));
  return r;
}

// Experiment 2 (prosody), 5 (MFCC) and 6 (both): one condition over the
// shared random split.
inline FullResult exp_full(const Dataset& ds, const Split& split, const ExperimentConfig& cfg,
                           std::string_view tag = "exp2") {
  const PreparedSplits data = prepare(ds, split, cfg.feature_set, cfg.eyebrow, cfg.normalize);
  std::string title;
  if (tag == "exp2") title = "Exp 2: Using neural network with the entire dataset";
  else if (tag == "exp5") title = "Exp 5: MFCC as input";
  else if (tag == "exp6") title = "Exp 6: MFCC and prosody as input";
  else title = std::string(tag);
  FullResult r = run_condition(data, cfg, tag, title);
  r.files.files.insert(r.files.files.begin(), {"config.txt", run_manifest(cfg, tag)});
  return r;
}

inline FullResult exp_mfcc(const Dataset& ds, const Split& split, ExperimentConfig cfg) {
  cfg.feature_set = FeatureSet::Mfcc13;
  return exp_full(ds, split, cfg, "exp5");
}

inline FullResult exp_both(const Dataset& ds, const Split& split, ExperimentConfig cfg) {
  cfg.feature_set = FeatureSet::Both16;
  return exp_full(ds, split, cfg, "exp6");
}

struct AblationCondition {
  std::string name;
  std::string label;
  std::vector<std::size_t> randomized;
};

// Sub-experiments named by the features that remain informative.
inline std::vector<AblationCondition> ablation_conditions(std::size_t dim) {
  std::vector<std::size_t> all(dim);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return {
      {"none", "No features randomized", {}},
      {"all-random", "All features are randomized", all},
      {"intensity-only", "Using intensity only", {kColF0, kColF0Dir}},
      {"f0-and-dir", "Using F0 and F0 direction score", {kColIntensity}},
      {"f0-only", "Using F0 only", {kColF0Dir, kColIntensity}},
      {"dir-only", "Using F0 direction score only", {kColF0, kColIntensity}},
  };
}

struct AblationResult {
  std::vector<AblationCondition> conditions;
  std::vector<EvalScores> scores;  // one per condition, same order
  ReportFiles files;
};

// Experiment 3: the selected model's test inputs with some columns replaced
// by uniform noise over the training range; no retraining.
inline AblationResult exp_ablation(const nnet::Params& model, const PreparedSplits& data, const ExperimentConfig& cfg,
                                   std::span<const AblationCondition> conditions) {
  if (data.feature_set == FeatureSet::Mfcc13) throw ConfigError("ablation needs a model with prosody inputs");
  AblationResult r;
  std::ostringstream md;
  md << "# Exp 3: Ablation study\n\n";
  for (std::size_t k = 0; k < conditions.size(); ++k) {
    const auto& cond = conditions[k];
    const std::uint64_t seed = stream_for(cfg, "exp3/" + cond.name);
    std::vector<LabelSequence> preds;
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      const FeatureMatrix x = randomize(data.test.inputs[i], cond.randomized, derive_seed(seed, i), data.train_ranges);
      preds.push_back(nnet::predict(model, x));
    }
    EvalScores s = score(preds, data.test.labels, cfg.metric);
    r.files.add(cond.name + "/eval_report.csv", eval_report_csv(s));
    md << markdown_scores("Exp 3: " + cond.label, s) << '\n';
    r.conditions.push_back(cond);
    r.scores.push_back(std::move(s));
  }
  r.files.add("report.md", md.str());
  return r;
}

struct EyebrowResult {
  std::array<FullResult, 3> modes;
  ReportFiles files;
};

inline constexpr std::array<EyebrowMode, 3> kEyebrowModes = {EyebrowMode::HandOnly, EyebrowMode::WithUpward,
                                                             EyebrowMode::WithUpDown};

// Experiment 4: the prosody problem with eyebrow movements folded into Beat.
inline EyebrowResult exp_eyebrow(const Dataset& ds, const Split& split, const ExperimentConfig& cfg) {
  EyebrowResult r;
  r.files.add("config.txt", run_manifest(cfg, "exp4"));
  std::ostringstream md;
  md << "# Exp 4: inclusion of eyebrow movements\n\n| Beat | Alignment | Insertion | Deletion | Reliability |\n"
     << "|---|---|---|---|---|\n";
  for (std::size_t k = 0; k < kEyebrowModes.size(); ++k) {
    const EyebrowMode mode = kEyebrowModes[k];
    const std::string name(eyebrow_mode_name(mode));
    const PreparedSplits data = prepare(ds, split, cfg.feature_set, mode, cfg.normalize);
    r.modes[k] = run_condition(data, cfg, "exp4/" + name, "Exp 4: " + name, name + "/");
    const auto& beat = r.modes[k].chosen().test[GestureClass::Beat];
    md << "| " << name << " | " << format_score(beat.alignment, 3) << " | " << format_score(beat.insertion, 3) << " | "
       << format_score(beat.deletion, 3) << " | " << format_score(r.modes[k].reliability[GestureClass::Beat].correlation, 3)
       << " |\n";
    for (auto& f : r.modes[k].files.files) r.files.files.push_back(f);
  }
  r.files.add("report.md", md.str());
  return r;
}

struct CrossSpeakerResult {
  std::array<std::string, 2> train_speakers;
  std::array<FullResult, 2> directions;
  ReportFiles files;
};

// Experiment 7: train on one speaker (80/20 train/val), test on the other,
// in both directions.
inline CrossSpeakerResult exp_cross_speaker(const Dataset& ds, const ExperimentConfig& cfg) {
  const auto speakers = speakers_of(ds);
  if (speakers.size() != 2) {
    throw ConfigError("cross-speaker experiment needs exactly 2 speakers, dataset has " +
                      std::to_string(speakers.size()));
  }
  CrossSpeakerResult r;
  r.files.add("config.txt", run_manifest(cfg, "exp7"));
  std::ostringstream md;
  md << "# Exp 7: trained with one speaker, tested on the other\n\n";
  for (std::size_t k = 0; k < 2; ++k) {
    const std::string& train_spk = speakers[k];
    const std::string& test_spk = speakers[1 - k];
    r.train_speakers[k] = train_spk;
    const Split split = split_by_speaker(ds, train_spk, cfg.split_seed);
    const PreparedSplits data = prepare(ds, split, cfg.feature_set, cfg.eyebrow, cfg.normalize);
    const std::string title = "Trained on " + train_spk + ", tested on " + test_spk;
    r.directions[k] = run_condition(data, cfg, "exp7/" + train_spk, title, "train-" + train_spk + "/");
    md << markdown_scores(title, r.directions[k].chosen().test) << '\n';
    for (auto& f : r.directions[k].files.files) r.files.files.push_back(f);
  }
  r.files.add("report.md", md.str());
  return r;
}

}  // namespace gestime::experiments
