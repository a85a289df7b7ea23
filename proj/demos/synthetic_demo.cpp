// Generates a small synthetic corpus, trains one model and compares it with
// the Markov chain baseline on the test split.
#include <iostream>

#include "gestime/gestime.hpp"

using namespace gestime;

int main() {
  SyntheticConfig sc;
  sc.seed = 7;
  sc.n_samples = 120;
  const SyntheticCorpus corpus = generate_synthetic_corpus(sc);
  const Split split = split_random(corpus.dataset, 7);

  experiments::ExperimentConfig cfg;
  cfg.budget = experiments::parse_budget("1x200");
  cfg.baseline_repetitions = 10;

  const auto data = experiments::prepare(corpus.dataset, split, FeatureSet::Prosody3, EyebrowMode::HandOnly, true);
  nnet::Hyper h;
  h.input_dim = 3;
  h.enc_dim = 3;
  h.dec_dim = 3;
  h.epochs = 200;
  h.seed = 7;
  const auto trained = nnet::train(data.train, data.val, h, data.normalizer, cfg.metric);
  const EvalScores model = score(nnet::predict_all(trained.checkpoint.params, data.test.inputs), data.test.labels);
  const auto random = experiments::exp_random(corpus.dataset, split, cfg);

  std::cout << markdown_scores("Trained model (test split)", model) << '\n'
            << markdown_scores("Markov chain baseline (mean of 10)", random.baseline.mean);
}
