#include <gtest/gtest.h>

#include <sstream>

#include "gestime/baseline.hpp"

using namespace gestime;

namespace {
constexpr auto N = GestureClass::NoGesture;
constexpr auto B = GestureClass::Beat;
constexpr auto S = GestureClass::IdeationalStroke;
constexpr auto X = GestureClass::Suffix;

ClassChain known_chain() {
  ClassChain c;
  c.initial = {0.5, 0.2, 0.1, 0.2, 0.0};
  c.transition = {{
      {0.6, 0.1, 0.1, 0.1, 0.1},
      {0.3, 0.4, 0.1, 0.1, 0.1},
      {0.2, 0.1, 0.4, 0.2, 0.1},
      {0.1, 0.1, 0.2, 0.5, 0.1},
      {0.0, 0.0, 0.0, 0.0, 1.0},
  }};
  return c;
}
}  // namespace

TEST(EstimateChain, AllStartWithNoGesture) {
  const std::vector<LabelSequence> seqs = {{N, B}, {N, N}};
  const auto c = estimate_chain(seqs);
  EXPECT_EQ(c.initial, (std::array<double, 5>{1, 0, 0, 0, 0}));
}

TEST(EstimateChain, HandCountedTransitions) {
  const std::vector<LabelSequence> seqs = {{N, N, B}};
  const auto c = estimate_chain(seqs);
  EXPECT_DOUBLE_EQ(c.transition[index_of(N)][index_of(N)], 0.5);
  EXPECT_DOUBLE_EQ(c.transition[index_of(N)][index_of(B)], 0.5);
  // Beat never leaves, so its row becomes a self-loop.
  EXPECT_DOUBLE_EQ(c.transition[index_of(B)][index_of(B)], 1.0);
}

TEST(EstimateChain, SuffixRowIsAbsorbingInPaddedData) {
  const std::vector<LabelSequence> seqs = {{N, S, X, X}, {B, X, X, X}};
  const auto c = estimate_chain(seqs);
  EXPECT_EQ(c.transition[index_of(X)], (std::array<double, 5>{0, 0, 0, 0, 1}));
}

TEST(EstimateChain, EmptyIsError) { EXPECT_THROW(estimate_chain({}), ConfigError); }

TEST(Sample, DegenerateChain) {
  ClassChain c;
  c.initial[0] = 1.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) c.transition[k][0] = 1.0;
  EXPECT_EQ(sample_sequence(c, 7, 3), LabelSequence(7, N));
}

TEST(Sample, Deterministic) {
  const auto c = known_chain();
  EXPECT_EQ(sample_sequence(c, 50, 8), sample_sequence(c, 50, 8));
}

TEST(Sample, EmpiricalTransitionsConverge) {
  const auto c = known_chain();
  std::array<std::array<double, kNumClasses>, kNumClasses> counts{};
  std::size_t steps = 0;
  for (std::uint64_t seed = 0; steps < 100000; ++seed) {
    const auto y = sample_sequence(c, 100, seed);
    for (std::size_t t = 1; t < y.size() && steps < 100000; ++t, ++steps) {
      counts[index_of(y[t - 1])][index_of(y[t])] += 1.0;
    }
  }
  for (std::size_t a = 0; a < kNumClasses; ++a) {
    double row = 0.0;
    for (double v : counts[a]) row += v;
    if (row == 0.0) continue;
    for (std::size_t b = 0; b < kNumClasses; ++b) EXPECT_NEAR(counts[a][b] / row, c.transition[a][b], 0.02);
  }
}

TEST(RunBaseline, OneRepetitionEqualsSingleScore) {
  const auto c = known_chain();
  const std::vector<LabelSequence> truths = {{N, N, S, S, B}, {S, S, N, B, B}};
  MetricConfig cfg;
  const auto r = run_baseline(c, truths, 1, cfg, 42);
  std::vector<LabelSequence> preds;
  const std::uint64_t rep = derive_seed(42, 0);
  for (std::size_t i = 0; i < truths.size(); ++i) preds.push_back(sample_sequence(c, 5, derive_seed(rep, i)));
  EXPECT_EQ(r.mean, score(preds, truths, cfg));
}

TEST(RunBaseline, MeanOfTwoRuns) {
  const auto c = known_chain();
  const std::vector<LabelSequence> truths = {{N, N, S, S, B, N, N, N}, {S, S, N, B, B, N, S, S}};
  const auto r = run_baseline(c, truths, 2, {}, 7);
  ASSERT_EQ(r.runs.size(), 2u);
  for (GestureClass k : {N, B, S}) {
    EXPECT_DOUBLE_EQ(*r.mean[k].alignment, (*r.runs[0][k].alignment + *r.runs[1][k].alignment) / 2);
    EXPECT_DOUBLE_EQ(*r.mean[k].insertion, (*r.runs[0][k].insertion + *r.runs[1][k].insertion) / 2);
    EXPECT_DOUBLE_EQ(*r.mean[k].deletion, (*r.runs[0][k].deletion + *r.runs[1][k].deletion) / 2);
  }
}

TEST(RunBaseline, ZeroRepetitionsIsError) {
  const std::vector<LabelSequence> truths = {{N}};
  EXPECT_THROW(run_baseline(known_chain(), truths, 0, {}, 1), ConfigError);
}

TEST(ChainText, RoundTrip) {
  const auto c = known_chain();
  std::istringstream in(format_chain(c));
  EXPECT_EQ(parse_chain(in, "chain.txt"), c);
}

TEST(ChainText, RowNotSummingToOneNamesLine) {
  std::string text = format_chain(known_chain());
  text.replace(text.find("0.6"), 3, "0.7");
  std::istringstream in(text);
  try {
    parse_chain(in, "chain.txt");
    FAIL() << "expected an error";
  } catch (const InputFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("chain.txt:3"), std::string::npos) << e.what();
  }
}
