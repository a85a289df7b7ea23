// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gestime/gestime.hpp"
#include "oracles.hpp"

using namespace gestime;
using Clock = std::chrono::steady_clock;

namespace {

constexpr auto N = GestureClass::NoGesture;
constexpr auto B = GestureClass::Beat;
constexpr auto O = GestureClass::IdeationalOther;
constexpr auto S = GestureClass::IdeationalStroke;
constexpr auto X = GestureClass::Suffix;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) { return format_fixed(v, digits); }

Outcome metric_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  while (pairs < 1200) {
    const LabelSequence truth = oracle::random_blocks(rng, 4, 4);
    LabelSequence pred = oracle::perturb(rng, truth, 4);
    if (pairs % 3 == 2) {
      LabelSequence other = oracle::random_blocks(rng, 4, 4);
      other.resize(truth.size(), other.back());
      pred = oracle::perturb(rng, other, 4);
    }
    const auto threshold = static_cast<std::int64_t>(pairs % 4);
    MetricConfig cfg;
    cfg.threshold = threshold;
    const MassTable got = sample_masses(pred, truth, cfg);
    const auto want = oracle::brute_force(pred, truth, threshold);
    for (std::size_t c = 0; c < kNumRealClasses; ++c) {
      if (got[c].aligned != want[c].aligned || got[c].inserted != want[c].inserted ||
          got[c].deleted != want[c].deleted) {
        ++mismatches;
        break;
      }
    }
    ++pairs;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches, " + fmt(secs, 2) + " s"};
}

Outcome score_fixture() {
  const std::array<std::pair<GestureClass, std::size_t>, 5> counts = {
      {{N, 4161}, {B, 1106}, {O, 4208}, {S, 2739}, {X, 55616}}};
  const std::array<double, 5> want = {0.0614, 0.0163, 0.0620, 0.0404, 0.8199};
  LabelSequence flat;
  for (const auto& [c, k] : counts) flat.insert(flat.end(), k, c);
  const std::size_t n = 798;
  const std::size_t l = flat.size() / n;
  std::vector<LabelSequence> truths;
  for (std::size_t i = 0; i < n; ++i) {
    truths.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i * l),
                        flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * l));
  }
  const EvalScores s = score(truths, truths);
  double worst = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) worst = std::max(worst, std::abs(s.classes[c].p_c - want[c]));
  std::string detail = "n*l = " + std::to_string(n * l) + ", max |p_c - ref| = " + fmt(worst, 6);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (std::abs(s.classes[c].p_c - want[c]) > 5e-5) {
      detail += "; " + std::string(class_name(class_at(c))) + " = " + std::to_string(counts[c].second) + "/" +
                std::to_string(n * l) + " = " + fmt(s.classes[c].p_c, 6) + " vs reference " + fmt(want[c], 4) +
                " (the reference percentage is not the ratio of the reference counts)";
    }
  }
  return {n * l == 67830 && worst <= 5e-5, detail};
}

Outcome perfect_prediction() {
  std::size_t bad = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    SyntheticConfig sc;
    sc.seed = 1000 + k;
    sc.n_samples = 20;
    sc.max_len_frames = 15;
    const Dataset ds = generate_synthetic_corpus(sc).dataset;
    const std::size_t l = padded_length(ds);
    std::vector<LabelSequence> y;
    for (const auto& smp : ds.samples) y.push_back(pad_sample(smp, l).labels);
    const EvalScores s = score(y, y);
    for (GestureClass c : {N, B, O, S}) {
      if (s[c].t_c == 0) continue;
      if (*s[c].alignment != 1.0 || *s[c].insertion != 0.0 || *s[c].deletion != 0.0) ++bad;
    }
  }
  return {bad == 0, "100 datasets, " + std::to_string(bad) + " class scores differ from (1, 0, 0)"};
}

Outcome tolerance_case() {
  // Truth stroke over frames 3..5; prediction starts one frame early and is
  // two frames longer.
  const LabelSequence truth = {N, N, N, S, S, S, N, N, N, N};
  const LabelSequence pred = {N, N, S, S, S, S, S, N, N, N};
  const auto stroke_pairs = [&](std::int64_t t) {
    MetricConfig cfg;
    cfg.threshold = t;
    return match_blocks(to_blocks(pred), to_blocks(truth), cfg).pairs[index_of(S)].size();
  };
  const std::size_t at2 = stroke_pairs(2);
  const std::size_t at1 = stroke_pairs(1);
  return {at2 == 1 && at1 == 0, "T=2 aligned pairs " + std::to_string(at2) + ", T=1 aligned pairs " +
                                    std::to_string(at1)};
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checks = 0;
  const std::array<double, 5> p = {0.35, 0.1, 0.2, 0.15, 0.2};
  const nnet::ClassWeights cw = nnet::class_weights(p);
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    for (std::size_t h = 1; h <= 3; ++h) {
      for (std::size_t s = 1; s <= 3; ++s) {
        nnet::Hyper hy;
        hy.input_dim = 3;
        hy.enc_dim = h;
        hy.dec_dim = s;
        const nnet::Params params = nnet::init_params(nnet::ParamLayout(nnet::dims_of(hy)), seed * 31 + h * 7 + s);
        Rng rng(derive_seed(seed, h * 10 + s));
        const std::size_t l = 6;
        const std::size_t len = 3 + seed % 4;
        FeatureMatrix x(FeatureSet::Prosody3, len);
        for (double& v : x.data) v = rng.normal();
        x = pad_rows(std::move(x), l);
        LabelSequence y;
        for (std::size_t t = 0; t < l; ++t) y.push_back(t < len ? class_at(rng.uniform_int(0, 3)) : X);
        worst = std::max(worst, nnet::grad_check(params, x, y, cw));
        ++checks;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0, std::to_string(checks) + " models over 4 seeds, max relative error " +
                                           format_exact(worst) + ", " + fmt(secs, 2) + " s"};
}

// Shared by the learning and ablation criteria.
struct LearningRun {
  SyntheticCorpus corpus;
  Split split;
  experiments::ExperimentConfig cfg;
  experiments::RandomResult random;
  experiments::FullResult full;
  double seconds = 0.0;
};

const LearningRun& learning_run() {
  static const LearningRun run = [] {
    const auto t0 = Clock::now();
    LearningRun r;
    SyntheticConfig sc;
    sc.seed = 11;
    sc.n_samples = 300;
    r.corpus = generate_synthetic_corpus(sc);
    r.split = split_random(r.corpus.dataset, 11, {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0});
    r.cfg.master_seed = 11;
    r.cfg.split_seed = 11;
    r.cfg.budget = experiments::parse_budget("5x500");
    r.cfg.workers = workers_from_env();
    r.random = experiments::exp_random(r.corpus.dataset, r.split, r.cfg);
    r.full = experiments::exp_full(r.corpus.dataset, r.split, r.cfg);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome learning_beats_chance() {
  const auto& r = learning_run();
  const bool sizes = r.split.train.size() == 200 && r.split.val.size() == 50 && r.split.test.size() == 50;
  const double model = r.full.chosen().test[S].alignment.value_or(0.0);
  const double chance = r.random.baseline.mean[S].alignment.value_or(0.0);
  return {sizes && model >= chance + 0.2 && r.seconds < 600.0,
          "split " + std::to_string(r.split.train.size()) + "/" + std::to_string(r.split.val.size()) + "/" +
              std::to_string(r.split.test.size()) + ", stroke alignment " + fmt(model) + " vs baseline " +
              fmt(chance) + " (margin " + fmt(model - chance) + "), selected model " +
              std::to_string(r.full.selection.index) + (r.full.selection.fallback ? " (fallback)" : "") + ", " +
              fmt(r.seconds, 1) + " s"};
}

Outcome ablation_collapse() {
  const auto& r = learning_run();
  const auto data = experiments::prepare(r.corpus.dataset, r.split, FeatureSet::Prosody3, EyebrowMode::HandOnly, true);
  const auto conds = experiments::ablation_conditions(3);
  std::vector<experiments::AblationCondition> all_random;
  for (const auto& c : conds) {
    if (c.name == "all-random") all_random.push_back(c);
  }
  const auto abl = experiments::exp_ablation(r.full.chosen().checkpoint.params, data, r.cfg, all_random);
  bool ok = true;
  std::ostringstream detail;
  for (GestureClass c : {N, B, O, S}) {
    const double a = abl.scores[0][c].alignment.value_or(0.0);
    const double base = r.random.baseline.mean[c].alignment.value_or(0.0);
    ok = ok && std::abs(a - base) <= 0.1;
    detail << class_name(c) << " " << fmt(a, 3) << " (insertion " << fmt(abl.scores[0][c].insertion.value_or(0.0), 2)
           << ") vs " << fmt(base, 3) << "; ";
  }
  return {ok, detail.str()};
}

Outcome baseline_statistics() {
  ClassChain chain;
  chain.initial = {0.4, 0.2, 0.2, 0.2, 0.0};
  chain.transition = {{
      {0.70, 0.10, 0.10, 0.05, 0.05},
      {0.40, 0.50, 0.05, 0.00, 0.05},
      {0.20, 0.05, 0.45, 0.25, 0.05},
      {0.10, 0.00, 0.25, 0.60, 0.05},
      {0.00, 0.00, 0.00, 0.00, 1.00},
  }};
  // Restart often so every row is visited, not only the absorbing one.
  std::array<std::array<double, kNumClasses>, kNumClasses> counts{};
  std::size_t steps = 0;
  for (std::uint64_t seed = 0; steps < 100000; ++seed) {
    const LabelSequence y = sample_sequence(chain, 20, seed);
    for (std::size_t t = 1; t < y.size() && steps < 100000; ++t, ++steps) {
      counts[index_of(y[t - 1])][index_of(y[t])] += 1.0;
    }
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < kNumClasses; ++a) {
    double row = 0.0;
    for (double v : counts[a]) row += v;
    if (row == 0.0) continue;
    for (std::size_t b = 0; b < kNumClasses; ++b) worst = std::max(worst, std::abs(counts[a][b] / row - chain.transition[a][b]));
  }
  return {worst <= 0.02, std::to_string(steps) + " steps, max deviation " + fmt(worst, 4)};
}

Outcome determinism() {
  SyntheticConfig sc;
  sc.seed = 5;
  sc.n_samples = 60;
  sc.max_len_frames = 10;
  const Dataset ds = generate_synthetic_corpus(sc).dataset;
  const Split split = split_random(ds, 5);
  experiments::ExperimentConfig cfg;
  cfg.master_seed = 5;
  cfg.budget = experiments::parse_budget("2x3,1x4");
  cfg.baseline_repetitions = 5;
  cfg.workers = 3;
  const auto run_all = [&] {
    std::vector<std::pair<std::string, std::string>> files;
    const auto take = [&](const std::string& exp, const experiments::ReportFiles& f) {
      for (const auto& [p, c] : f.files) files.emplace_back(exp + "/" + p, c);
    };
    take("exp1", experiments::exp_random(ds, split, cfg).files);
    const auto full = experiments::exp_full(ds, split, cfg);
    take("exp2", full.files);
    const auto data = experiments::prepare(ds, split, FeatureSet::Prosody3, EyebrowMode::HandOnly, true);
    take("exp3", experiments::exp_ablation(full.chosen().checkpoint.params, data, cfg,
                                           experiments::ablation_conditions(3))
                     .files);
    take("exp4", experiments::exp_eyebrow(ds, split, cfg).files);
    take("exp5", experiments::exp_mfcc(ds, split, cfg).files);
    take("exp6", experiments::exp_both(ds, split, cfg).files);
    take("exp7", experiments::exp_cross_speaker(ds, cfg).files);
    return files;
  };
  const auto a = run_all();
  const auto b = run_all();
  std::size_t csv = 0;
  std::size_t differing = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i].first.ends_with(".csv")) ++csv;
    if (a[i] != b[i]) ++differing;
  }
  return {a.size() == b.size() && differing == 0 && csv > 0,
          "7 experiments, " + std::to_string(a.size()) + " files (" + std::to_string(csv) + " CSV), " +
              std::to_string(differing) + " differ"};
}

Outcome checkpoint_round_trip() {
  SyntheticConfig sc;
  sc.seed = 8;
  sc.n_samples = 40;
  const auto corpus = generate_synthetic_corpus(sc);
  const Split split = split_random(corpus.dataset, 8);
  const auto data = experiments::prepare(corpus.dataset, split, FeatureSet::Prosody3, EyebrowMode::HandOnly, true);
  nnet::Hyper h;
  h.enc_dim = 2;
  h.dec_dim = 3;
  h.epochs = 10;
  h.seed = 8;
  const auto trained = nnet::train(data.train, data.val, h, data.normalizer);
  const auto path = std::filesystem::temp_directory_path() / "gestime_acceptance_model.ckpt";
  nnet::save_checkpoint(trained.checkpoint, path);
  const nnet::Checkpoint back = nnet::load_checkpoint(path);
  Rng rng(8);
  std::size_t identical = 0;
  for (int k = 0; k < 20; ++k) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, 12));
    FeatureMatrix raw(FeatureSet::Prosody3, len);
    for (std::size_t r = 0; r < len; ++r) {
      raw.at(r, kColF0) = rng.uniform(80, 250);
      raw.at(r, kColF0Dir) = rng.uniform(-1, 1);
      raw.at(r, kColIntensity) = rng.uniform(40, 80);
    }
    raw = pad_rows(std::move(raw), 12);
    const auto before = nnet::forward(trained.checkpoint.params, trained.checkpoint.normalizer.apply(raw));
    const auto after = nnet::forward(back.params, back.normalizer.apply(raw));
    if (before.probs == after.probs && nnet::predict(trained.checkpoint, raw) == nnet::predict(back, raw)) ++identical;
  }
  return {identical == 20 && back == trained.checkpoint, std::to_string(identical) + "/20 inputs bit-identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric oracle equivalence", metric_oracle},
      {"score-formula fixture", score_fixture},
      {"perfect-prediction identity", perfect_prediction},
      {"tolerance case (1 frame early, 1 frame late)", tolerance_case},
      {"gradient correctness", gradient_check},
      {"learning beats chance", learning_beats_chance},
      {"ablation sanity", ablation_collapse},
      {"baseline statistics", baseline_statistics},
      {"determinism", determinism},
      {"checkpoint round-trip", checkpoint_round_trip},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
