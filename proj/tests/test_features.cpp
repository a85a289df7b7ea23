#include <gtest/gtest.h>

#include "gestime/features.hpp"

using namespace gestime;

namespace {

FeatureFrame frame(double base) {
  FeatureFrame f;
  f.f0 = base + 1;
  f.f0_dir = base + 2;
  f.intensity = base + 3;
  for (std::size_t k = 0; k < kNumMfcc; ++k) f.mfcc[k] = base + 10 + static_cast<double>(k);
  return f;
}

FeatureMatrix column(std::vector<double> v) {
  FeatureMatrix m(FeatureSet::Prosody3, v.size());
  for (std::size_t r = 0; r < v.size(); ++r) {
    m.at(r, 0) = v[r];
    m.at(r, 1) = 5.0;
    m.at(r, 2) = static_cast<double>(r);
  }
  return m;
}

}  // namespace

TEST(Assemble, ProsodyOneFrame) {
  const std::vector<FeatureFrame> f = {frame(0)};
  const auto m = assemble(f, FeatureSet::Prosody3);
  EXPECT_EQ(m.rows, 1u);
  EXPECT_EQ(m.cols, 3u);
  EXPECT_EQ(m.at(0, kColF0), 1.0);
  EXPECT_EQ(m.at(0, kColF0Dir), 2.0);
  EXPECT_EQ(m.at(0, kColIntensity), 3.0);
}

TEST(Assemble, BothPutsProsodyFirst) {
  const std::vector<FeatureFrame> f = {frame(100)};
  const auto m = assemble(f, FeatureSet::Both16);
  ASSERT_EQ(m.cols, 16u);
  EXPECT_EQ(m.at(0, 0), 101.0);
  EXPECT_EQ(m.at(0, 1), 102.0);
  EXPECT_EQ(m.at(0, 2), 103.0);
  for (std::size_t k = 0; k < kNumMfcc; ++k) EXPECT_EQ(m.at(0, 3 + k), 110.0 + static_cast<double>(k));
}

TEST(Assemble, MfccOnly) {
  const std::vector<FeatureFrame> f = {frame(0)};
  const auto m = assemble(f, FeatureSet::Mfcc13);
  ASSERT_EQ(m.cols, 13u);
  EXPECT_EQ(m.at(0, 0), 10.0);
}

TEST(Assemble, ZeroFrames) {
  const auto m = assemble({}, FeatureSet::Both16);
  EXPECT_EQ(m.rows, 0u);
  EXPECT_EQ(m.cols, 16u);
}

TEST(Normalizer, ConstantColumnBecomesZero) {
  const std::vector<FeatureMatrix> train = {column({1, 2, 3})};
  const Normalizer nz = fit_normalizer(train);
  const auto out = nz.apply(train[0]);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(out.at(r, 1), 0.0);
}

TEST(Normalizer, PlusMinusOneUnchanged) {
  const std::vector<FeatureMatrix> train = {column({-1, 1})};
  const Normalizer nz = fit_normalizer(train);
  EXPECT_DOUBLE_EQ(nz.mean[0], 0.0);
  EXPECT_DOUBLE_EQ(nz.stddev[0], 1.0);
  const auto out = nz.apply(train[0]);
  EXPECT_DOUBLE_EQ(out.at(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(out.at(1, 0), 1.0);
}

TEST(Normalizer, StatisticsComeFromTrainingOnly) {
  const std::vector<FeatureMatrix> train = {column({-1, 1})};
  const Normalizer nz = fit_normalizer(train);
  const Normalizer before = nz;
  const auto val = nz.apply(column({100, 200, 300}));
  EXPECT_EQ(nz, before);
  EXPECT_EQ(nz.fit_rows, 2u);
  EXPECT_DOUBLE_EQ(val.at(0, 0), 100.0);
}

TEST(Normalizer, PaddingIgnoredAndKeptZero) {
  const std::vector<FeatureMatrix> train = {pad_rows(column({-1, 1}), 5)};
  const Normalizer nz = fit_normalizer(train);
  EXPECT_DOUBLE_EQ(nz.mean[0], 0.0);
  const auto out = nz.apply(train[0]);
  for (std::size_t r = 2; r < 5; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(out.at(r, c), 0.0);
  }
}

TEST(Normalizer, EmptyTrainingSetIsError) { EXPECT_THROW(fit_normalizer({}), Error); }

TEST(Randomize, EmptySubsetIsIdentity) {
  const auto m = column({1, 2, 3});
  const std::vector<FeatureMatrix> train = {m};
  EXPECT_EQ(randomize(m, {}, 1, column_ranges(train)), m);
}

TEST(Randomize, AllColumnsDeterministicWithinRange) {
  const auto m = column({1, 2, 3});
  const std::vector<FeatureMatrix> train = {m};
  const auto ranges = column_ranges(train);
  const std::vector<std::size_t> all = {0, 1, 2};
  const auto a = randomize(m, all, 9, ranges);
  EXPECT_EQ(a, randomize(m, all, 9, ranges));
  EXPECT_NE(a, m);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_GE(a.at(r, c), ranges[c].lo);
      EXPECT_LE(a.at(r, c), ranges[c].hi);
    }
  }
}

TEST(Randomize, OtherColumnsBitwiseUnchanged) {
  const auto m = column({1, 2, 3});
  const std::vector<FeatureMatrix> train = {m};
  const std::vector<std::size_t> first = {0};
  const auto a = randomize(m, first, 4, column_ranges(train));
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(a.at(r, 1), m.at(r, 1));
    EXPECT_EQ(a.at(r, 2), m.at(r, 2));
  }
}

TEST(Randomize, PaddingRowsStayZero) {
  const auto m = pad_rows(column({1, 2}), 4);
  const std::vector<FeatureMatrix> train = {m};
  const std::vector<std::size_t> all = {0, 1, 2};
  const auto a = randomize(m, all, 4, column_ranges(train));
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(a.at(3, c), 0.0);
}

TEST(Randomize, ColumnOutOfRangeIsError) {
  const auto m = column({1, 2});
  const std::vector<FeatureMatrix> train = {m};
  const std::vector<std::size_t> bad = {3};
  EXPECT_THROW(randomize(m, bad, 1, column_ranges(train)), ConfigError);
}
