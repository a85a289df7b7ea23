#include <gtest/gtest.h>

#include <functional>

#include "gestime/rng.hpp"
#include "gestime/seqmetric.hpp"

using namespace gestime;

namespace {

constexpr auto N = GestureClass::NoGesture;
constexpr auto B = GestureClass::Beat;
constexpr auto O = GestureClass::IdeationalOther;
constexpr auto S = GestureClass::IdeationalStroke;

EvalScores score_one(const LabelSequence& pred, const LabelSequence& truth, std::int64_t t = 2) {
  MetricConfig cfg;
  cfg.threshold = t;
  return score(std::vector<LabelSequence>{pred}, std::vector<LabelSequence>{truth}, cfg);
}

}  // namespace

TEST(Blocks, RunLength) {
  EXPECT_EQ(to_blocks(LabelSequence{N, N, B}), (std::vector<Block>{{N, 0, 2}, {B, 2, 3}}));
  EXPECT_TRUE(to_blocks(LabelSequence{}).empty());
  EXPECT_EQ(to_blocks(LabelSequence{N, B, N}).size(), 3u);
}

TEST(Distance, Cases) {
  const Block t{S, 3, 6};
  EXPECT_EQ(block_distance(t, t), 0);
  const Block early_long{S, 2, 7};
  EXPECT_EQ(block_distance(early_long, t), 2);
  EXPECT_TRUE(is_aligned(early_long, t, 2));
  EXPECT_FALSE(is_aligned(early_long, t, 1));
  const Block off{S, 1, 7};
  EXPECT_EQ(block_distance(off, t), 3);
  EXPECT_FALSE(is_aligned(off, t, 2));
}

TEST(Matcher, IdenticalSequencesMatchEverything) {
  const LabelSequence y = {N, S, S, B, N, O, O};
  const auto blocks = to_blocks(y);
  const Matching m = match_blocks(blocks, blocks, {});
  EXPECT_TRUE(m.insertions.empty());
  EXPECT_TRUE(m.deletions.empty());
}

TEST(Matcher, DeletionAndInsertion) {
  // Truth has an IdeationalOther block the prediction lacks; the prediction
  // has a NoGesture block far from any truth NoGesture block.
  const LabelSequence truth = {S, S, S, O, O, O, O, O, O, S};
  const LabelSequence pred = {S, S, S, S, S, S, N, S, S, S};
  MetricConfig cfg;
  const auto s = score_one(pred, truth);
  EXPECT_DOUBLE_EQ(*s[O].deletion, 1.0);
  EXPECT_DOUBLE_EQ(*s[O].alignment, 0.0);
  EXPECT_FALSE(s[N].alignment.has_value());  // N absent from truth
  const auto pb = to_blocks(pred);
  const auto tb = to_blocks(truth);
  const Matching m = match_blocks(pb, tb, cfg);
  ASSERT_EQ(m.deletions.size(), 2u);  // the first S block and the O block
  EXPECT_EQ(tb[m.deletions[0]].cls, S);
  EXPECT_EQ(tb[m.deletions[1]].cls, O);
  bool inserted_n = false;
  for (std::size_t k : m.insertions) inserted_n |= pb[k].cls == N;
  EXPECT_TRUE(inserted_n);
}

TEST(Matcher, UnequalLengthIsError) {
  EXPECT_THROW(match_blocks(to_blocks(LabelSequence{N, N}), to_blocks(LabelSequence{N}), {}), InputFormatError);
  EXPECT_THROW(score_one({N, N}, {N}), InputFormatError);
}

TEST(Score, FourFrameHandExample) {
  const auto s = score_one({S, S, S, N}, {S, S, N, N});
  EXPECT_DOUBLE_EQ(*s[S].alignment, 1.25);
  EXPECT_DOUBLE_EQ(*s[N].alignment, 0.75);
  EXPECT_DOUBLE_EQ(*s[S].insertion, 0.0);
  EXPECT_DOUBLE_EQ(*s[S].deletion, 0.0);
  EXPECT_DOUBLE_EQ(*s[N].insertion, 0.0);
  EXPECT_DOUBLE_EQ(*s[N].deletion, 0.0);
  EXPECT_DOUBLE_EQ(s[S].p_c, 0.5);
}

TEST(Score, InsertionCanExceedOne) {
  // Truth has two Beat frames; the prediction emits four, none aligned.
  const LabelSequence truth = {B, N, N, N, N, N, N, N, N, B};
  const LabelSequence pred = {N, N, N, B, B, N, B, B, N, N};
  const auto s = score_one(pred, truth, 0);
  EXPECT_DOUBLE_EQ(*s[B].insertion, 2.0);
  EXPECT_DOUBLE_EQ(*s[B].deletion, 1.0);
  EXPECT_DOUBLE_EQ(*s[B].alignment, 0.0);
}

TEST(Score, DisagreesEverywhere) {
  const auto s = score_one({B, B, B, B}, {N, N, S, S});
  EXPECT_DOUBLE_EQ(*s[N].alignment, 0.0);
  EXPECT_DOUBLE_EQ(*s[N].deletion, 1.0);
  EXPECT_DOUBLE_EQ(*s[S].alignment, 0.0);
  EXPECT_DOUBLE_EQ(*s[S].deletion, 1.0);
}

TEST(Score, ToleranceCase) {
  const LabelSequence truth = {N, N, N, S, S, S, N, N, N, N};
  const LabelSequence pred = {N, N, S, S, S, S, S, N, N, N};
  EXPECT_GT(*score_one(pred, truth, 2)[S].alignment, 0.0);
  EXPECT_DOUBLE_EQ(*score_one(pred, truth, 1)[S].alignment, 0.0);
}

TEST(Score, SuffixExcludedByDefault) {
  const auto s = score_one({N, GestureClass::Suffix}, {N, GestureClass::Suffix});
  EXPECT_FALSE(s[GestureClass::Suffix].alignment.has_value());
  MetricConfig cfg;
  cfg.include_suffix = true;
  const LabelSequence y = {N, GestureClass::Suffix};
  const auto t = score(std::vector<LabelSequence>{y}, std::vector<LabelSequence>{y}, cfg);
  EXPECT_DOUBLE_EQ(*t[GestureClass::Suffix].alignment, 1.0);
}

TEST(Score, EmptySetIsError) {
  EXPECT_THROW(score(std::vector<LabelSequence>{}, std::vector<LabelSequence>{}), ConfigError);
}

TEST(Score, NegativeThresholdIsError) { EXPECT_THROW(score_one({N}, {N}, -1), ConfigError); }

TEST(Score, PerfectPredictionOnRandomSequences) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabelSequence> ys;
    for (int i = 0; i < 8; ++i) {
      LabelSequence y;
      for (int t = 0; t < 15; ++t) y.push_back(class_at(static_cast<std::size_t>(rng.uniform_int(0, 4))));
      ys.push_back(y);
    }
    const auto s = score(ys, ys);
    for (GestureClass c : {N, B, O, S}) {
      if (s[c].t_c == 0) continue;
      EXPECT_EQ(*s[c].alignment, 1.0);
      EXPECT_EQ(*s[c].insertion, 0.0);
      EXPECT_EQ(*s[c].deletion, 0.0);
    }
  }
}

TEST(Average, UndefinedStaysUndefined) {
  const auto a = score_one({N, N}, {N, N});
  const auto b = score_one({N, B}, {N, N});
  const std::vector<EvalScores> runs = {a, b};
  const auto m = average_scores(runs);
  EXPECT_DOUBLE_EQ(*m[N].alignment, 0.5 * (*a[N].alignment + *b[N].alignment));
  EXPECT_FALSE(m[B].alignment.has_value());
}

#include "oracles.hpp"

TEST(Matcher, AgreesWithExhaustiveSearch) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const LabelSequence truth = oracle::random_blocks(rng, 4, 4);
    const LabelSequence pred =
        trial % 2 == 0 ? oracle::perturb(rng, truth, 4) : [&] {
          LabelSequence p;
          while (p.size() != truth.size()) {
            p = oracle::random_blocks(rng, 4, 4);
            if (p.size() > truth.size()) p.resize(truth.size());
            else p.resize(truth.size(), p.empty() ? N : p.back());
          }
          return oracle::perturb(rng, p, 4);
        }();
    for (std::int64_t t : {0, 1, 2, 3}) {
      MetricConfig cfg;
      cfg.threshold = t;
      const MassTable got = sample_masses(pred, truth, cfg);
      const auto want = oracle::brute_force(pred, truth, t);
      for (std::size_t c = 0; c < kNumRealClasses; ++c) {
        EXPECT_EQ(got[c].aligned, want[c].aligned) << "trial " << trial << " class " << c;
        EXPECT_EQ(got[c].inserted, want[c].inserted) << "trial " << trial << " class " << c;
        EXPECT_EQ(got[c].deleted, want[c].deleted) << "trial " << trial << " class " << c;
      }
    }
  }
}
