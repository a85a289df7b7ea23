#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gestime/corpus.hpp"
#include "gestime/error.hpp"
#include "gestime/features.hpp"
#include "gestime/nnet/adam.hpp"
#include "gestime/nnet/model.hpp"
#include "gestime/nnet/params.hpp"
#include "gestime/rng.hpp"
#include "gestime/seqmetric.hpp"

namespace gestime::nnet {

inline constexpr int kCheckpointVersion = 1;

// Everything needed to reproduce a trained model's predictions, plus the
// provenance of how it was trained.
struct Checkpoint {
  Hyper hyper;
  Params params;
  Normalizer normalizer;         // disabled (empty) when inputs were not normalized
  DistributionStats train_stats;  // class weights are derived from these
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Model-ready inputs: padded, already normalized matrices with their padded
// label tracks.
struct SequenceSet {
  std::vector<FeatureMatrix> inputs;
  std::vector<LabelSequence> labels;

  std::size_t size() const { return inputs.size(); }
};

inline void check_set(const SequenceSet& s, std::size_t dim, const char* what) {
  if (s.inputs.size() != s.labels.size()) {
    throw InputFormatError(std::string(what) + ": input and label counts differ");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.inputs[i].cols != dim) throw InputFormatError(std::string(what) + ": wrong input dimension");
    if (s.inputs[i].rows != s.labels[i].size()) {
      throw InputFormatError(std::string(what) + ": input and label lengths differ");
    }
  }
}

inline LabelSequence predict(const Params& p, const FeatureMatrix& normalized) { return decode(forward(p, normalized)); }

// Applies the checkpoint's normalizer to a raw, padded feature matrix first.
inline LabelSequence predict(const Checkpoint& ck, const FeatureMatrix& raw) {
  return predict(ck.params, ck.normalizer.apply(raw));
}

inline std::vector<LabelSequence> predict_all(const Params& p, std::span<const FeatureMatrix> normalized) {
  std::vector<LabelSequence> out;
  out.reserve(normalized.size());
  for (const auto& x : normalized) out.push_back(predict(p, x));
  return out;
}

inline double mean_loss(const Params& p, const SequenceSet& data, const ClassWeights& cw) {
  if (data.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += loss(forward(p, data.inputs[i]), data.labels[i], cw);
  return total / static_cast<double>(data.size());
}

struct TrainResult {
  Checkpoint checkpoint;
  EvalScores val_scores;
};

// Mini-batch Adam on the class-weighted cross-entropy. Deterministic in
// (data, hyper); batches come from a per-epoch shuffle seeded by hyper.seed.
inline TrainResult train(const SequenceSet& train_set, const SequenceSet& val_set, const Hyper& hyper,
                         const Normalizer& normalizer, const MetricConfig& metric = {}) {
  if (train_set.size() == 0) throw ConfigError("train: empty training set");
  if (hyper.batch_size == 0) throw ConfigError("train: batch size must be at least 1");
  check_set(train_set, hyper.input_dim, "training set");
  check_set(val_set, hyper.input_dim, "validation set");

  Checkpoint ck;
  ck.hyper = hyper;
  ck.normalizer = normalizer;
  ck.train_stats = distribution_of(train_set.labels);
  ck.params = init_params(ParamLayout(dims_of(hyper)), hyper.seed);
  const ClassWeights cw = class_weights(ck.train_stats.proportions);
  ck.initial_loss = mean_loss(ck.params, train_set, cw);
  if (!std::isfinite(ck.initial_loss)) throw NumericError("train: initial loss is not finite");

  AdamState state(ck.params.values.size());
  const AdamConfig adam{hyper.learning_rate};
  Rng rng(derive_seed(hyper.seed, 0xba7c));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Params grad(ck.params.layout);
  ck.epoch_loss.reserve(hyper.epochs);

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t stop = std::min(order.size(), start + hyper.batch_size);
      std::fill(grad.values.begin(), grad.values.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const ForwardCache cache = forward(ck.params, train_set.inputs[i]);
        epoch_total += loss(cache, train_set.labels[i], cw);
        backward(ck.params, train_set.inputs[i], train_set.labels[i], cw, cache, grad);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (double& g : grad.values) g *= scale;
      adam_step(ck.params.values, grad.values, state, adam);
    }
    const double epoch_loss = epoch_total / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss) || !ck.params.all_finite()) {
      throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch + 1) + " (enc_dim " +
                         std::to_string(hyper.enc_dim) + ", dec_dim " + std::to_string(hyper.dec_dim) + ", seed " +
                         std::to_string(hyper.seed) + ")");
    }
    ck.epoch_loss.push_back(epoch_loss);
  }

  TrainResult res{std::move(ck), {}};
  if (val_set.size() > 0) {
    res.val_scores = score(predict_all(res.checkpoint.params, val_set.inputs), val_set.labels, metric);
  }
  return res;
}

// Max over parameters of |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
// where numeric is the sixth-order central difference of the loss.
inline double grad_check_against(const Params& p, const FeatureMatrix& x, std::span<const GestureClass> y,
                                 const ClassWeights& cw, const Params& analytic, double step = 1e-2) {
  static constexpr double kOffsets[] = {1.0, 2.0, 3.0};
  static constexpr double kCoeffs[] = {45.0, -9.0, 1.0};
  Params probe = p;
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.values.size(); ++k) {
    const double orig = probe.values[k];
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      probe.values[k] = orig + kOffsets[i] * step;
      const double up = loss(forward(probe, x), y, cw);
      probe.values[k] = orig - kOffsets[i] * step;
      const double down = loss(forward(probe, x), y, cw);
      acc += kCoeffs[i] * (up - down);
    }
    probe.values[k] = orig;
    const double numeric = acc / (60.0 * step);
    const double a = analytic.values[k];
    const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

inline double grad_check(const Params& p, const FeatureMatrix& x, std::span<const GestureClass> y,
                         const ClassWeights& cw, double step = 1e-2) {
  return grad_check_against(p, x, y, cw, gradient(p, x, y, cw), step);
}

}  // namespace gestime::nnet
