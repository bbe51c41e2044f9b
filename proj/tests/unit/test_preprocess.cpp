#include "mdms/errors.hpp"
#include "mdms/preprocess.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <numbers>

using namespace mdms;

namespace {

constexpr double X = kMissing;

std::vector<double> as_vector(const MissingValueSeries &s) {
  return {s.values().begin(), s.values().end()};
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<double> sine(std::size_t n, double period) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / period);
  }
  return v;
}

std::vector<std::size_t> missing_positions(const MissingValueSeries &s) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s.missing(k)) {
      out.push_back(k);
    }
  }
  return out;
}

// Maximal runs of missing values as (start, length).
std::vector<std::pair<std::size_t, std::size_t>> missing_runs(const MissingValueSeries &s) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t k = 0; k < s.size();) {
    if (!s.missing(k)) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e < s.size() && s.missing(e)) {
      ++e;
    }
    runs.emplace_back(k, e - k);
    k = e;
  }
  return runs;
}

} // namespace

TEST(LinearImpute, Examples) {
  EXPECT_EQ(as_vector(linear_impute(MissingValueSeries({1, X, 3}))), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(as_vector(linear_impute(MissingValueSeries({0, X, 0, 2}))),
            (std::vector<double>{0, 0, 0, 2}));
  EXPECT_EQ(as_vector(linear_impute(MissingValueSeries({X, X, 5}))), (std::vector<double>{5, 5, 5}));
  EXPECT_EQ(as_vector(linear_impute(MissingValueSeries({4, X, X}))), (std::vector<double>{4, 4, 4}));
  EXPECT_EQ(as_vector(linear_impute(MissingValueSeries({0, X, X, X, 8}))),
            (std::vector<double>{0, 2, 4, 6, 8}));
}

TEST(LinearImpute, NothingPresentThrows) {
  EXPECT_THROW(linear_impute(MissingValueSeries({X, X})), InfeasibleError);
}

TEST(LinearImpute, IdempotentAndPresentValuesUntouched) {
  const auto raw = fixtures::drop_random(fixtures::random_walk(2000, 4), 0.35, 5);
  const MissingValueSeries s(raw);
  const auto once = linear_impute(s);
  const auto twice = linear_impute(once);
  ASSERT_TRUE(once.complete());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    ASSERT_TRUE(bit_equal(once.values()[k], twice.values()[k]));
    if (!is_missing(raw[k])) {
      ASSERT_TRUE(bit_equal(once.values()[k], raw[k]));
    }
  }
}

TEST(PseudoMissing, SpikeInSine) {
  auto v = sine(1000, 100.0);
  v[437] = 40.0;
  const auto marked = mark_pseudo_missing(MissingValueSeries(v), PseudoMissingRules::for_window(50));
  EXPECT_EQ(missing_positions(marked), (std::vector<std::size_t>{437}));
}

TEST(PseudoMissing, SaturatedPlateau) {
  auto v = fixtures::white_noise(1000, 8);
  for (std::size_t k = 300; k < 350; ++k) {
    v[k] = 127.0 / 128.0;
  }
  auto rules = PseudoMissingRules::for_window(50);
  rules.spikes = false;
  rules.variance_bursts = false;
  const auto marked = mark_pseudo_missing(MissingValueSeries(v), rules);
  std::vector<std::size_t> expected(50);
  std::iota(expected.begin(), expected.end(), 300);
  EXPECT_EQ(missing_positions(marked), expected);
}

TEST(PseudoMissing, ShortRunsAreNotPlateaus) {
  auto v = fixtures::white_noise(200, 9);
  for (std::size_t k = 50; k < 65; ++k) {
    v[k] = 0.5;
  }
  auto rules = PseudoMissingRules::for_window(20);
  rules.spikes = false;
  rules.variance_bursts = false;
  EXPECT_EQ(mark_pseudo_missing(MissingValueSeries(v), rules).missing_count(), 0u);
  v[65] = 0.5;
  EXPECT_EQ(mark_pseudo_missing(MissingValueSeries(v), rules).missing_count(), 16u);
  v[60] = std::nextafter(0.5, 1.0);
  EXPECT_EQ(mark_pseudo_missing(MissingValueSeries(v), rules).missing_count(), 0u);
}

TEST(PseudoMissing, VarianceBurst) {
  auto v = fixtures::white_noise(2000, 10);
  for (std::size_t k = 1000; k < 1100; ++k) {
    v[k] *= 12.0;
  }
  auto rules = PseudoMissingRules::for_window(50);
  rules.spikes = false;
  const auto marked = mark_pseudo_missing(MissingValueSeries(v), rules);
  std::size_t inside = 0;
  std::size_t outside = 0;
  for (auto k : missing_positions(marked)) {
    (k >= 1000 && k < 1100 ? inside : outside) += 1;
  }
  EXPECT_GE(inside, 80u);
  EXPECT_LE(outside, 100u);
}

TEST(PseudoMissing, CleanNoiseFalseMaskRate) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const MissingValueSeries s(fixtures::white_noise(20000, seed));
    const auto marked = mark_pseudo_missing(s, PseudoMissingRules::for_window(100));
    EXPECT_LT(static_cast<double>(marked.missing_count()) / 20000.0, 1e-3) << seed;
  }
}

TEST(PseudoMissing, NeverUnmarksAndLeavesInputAlone) {
  auto v = fixtures::drop_random(sine(3000, 60.0), 0.1, 11);
  v[100] = 90.0;
  const MissingValueSeries s(v);
  const auto before = as_vector(s);
  const auto marked = mark_pseudo_missing(s, PseudoMissingRules::for_window(60));
  for (std::size_t k = 0; k < v.size(); ++k) {
    ASSERT_TRUE(bit_equal(s.values()[k], before[k]));
    if (s.missing(k)) {
      ASSERT_TRUE(marked.missing(k));
    } else if (!marked.missing(k)) {
      ASSERT_TRUE(bit_equal(marked.values()[k], v[k]));
    }
  }
  EXPECT_TRUE(marked.missing(100));
}

TEST(PseudoMissing, InvalidRules) {
  const MissingValueSeries s(fixtures::white_noise(100, 1));
  auto r = PseudoMissingRules::for_window(10);
  r.spike_mad_factor = 0.0;
  EXPECT_THROW(mark_pseudo_missing(s, r), std::invalid_argument);
  r = PseudoMissingRules::for_window(10);
  r.variance_factor = -1.0;
  EXPECT_THROW(mark_pseudo_missing(s, r), std::invalid_argument);
  r = PseudoMissingRules::for_window(10);
  r.plateau_min_run = 2;
  EXPECT_THROW(mark_pseudo_missing(s, r), std::invalid_argument);
}

TEST(ApplyMask, RandomPoints) {
  const MissingValueSeries s(fixtures::white_noise(100, 2));
  MaskSpec spec;
  spec.count = 10;
  spec.seed = 42;
  const auto a = apply_mask(s, spec);
  const auto b = apply_mask(s, spec);
  EXPECT_EQ(a.missing_count(), 10u);
  EXPECT_EQ(missing_positions(a), missing_positions(b));
  spec.seed = 43;
  EXPECT_NE(missing_positions(apply_mask(s, spec)), missing_positions(a));
}

TEST(ApplyMask, RandomPointsSkipExistingGaps) {
  const MissingValueSeries s(fixtures::drop_random(fixtures::white_noise(200, 3), 0.5, 4));
  const auto before = s.missing_count();
  MaskSpec spec;
  spec.count = before > 150 ? 10 : 50;
  const auto a = apply_mask(s, spec);
  EXPECT_EQ(a.missing_count(), before + *spec.count);
  spec.count = s.size() - before + 1;
  EXPECT_THROW(apply_mask(s, spec), InfeasibleError);
}

TEST(ApplyMask, Fraction) {
  const MissingValueSeries s(fixtures::white_noise(1000, 5));
  MaskSpec spec;
  spec.fraction = 0.4;
  spec.seed = 1;
  EXPECT_EQ(apply_mask(s, spec).missing_count(), 400u);
  spec.fraction = 1.5;
  EXPECT_THROW(apply_mask(s, spec), InfeasibleError);
}

TEST(ApplyMask, TargetedBlock) {
  const MissingValueSeries s(fixtures::white_noise(20, 6));
  MaskSpec spec;
  spec.mode = MaskMode::targeted_block;
  spec.block_length = 4;
  spec.target = 10;
  EXPECT_EQ(missing_positions(apply_mask(s, spec)), (std::vector<std::size_t>{8, 9, 10, 11}));
  spec.target = 19;
  EXPECT_THROW(apply_mask(s, spec), InfeasibleError);
  spec.target.reset();
  EXPECT_THROW(apply_mask(s, spec), InfeasibleError);
}

TEST(ApplyMask, UniformBlocks) {
  const MissingValueSeries s(fixtures::white_noise(100, 7));
  MaskSpec spec;
  spec.mode = MaskMode::uniform_blocks;
  spec.count = 4;
  spec.block_length = 5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto masked = apply_mask(s, spec);
    EXPECT_EQ(masked.missing_count(), 20u);
    const auto runs = missing_runs(masked);
    ASSERT_EQ(runs.size(), 4u);
    for (const auto &r : runs) {
      EXPECT_EQ(r.second, 5u);
    }
  }
  spec.count = 20;
  EXPECT_THROW(apply_mask(s, spec), InfeasibleError);
  spec.count = 2;
  spec.block_length = 0;
  EXPECT_THROW(apply_mask(s, spec), InfeasibleError);
}

TEST(ApplyMask, UniformBlocksByFraction) {
  const MissingValueSeries s(fixtures::white_noise(10000, 8));
  MaskSpec spec;
  spec.mode = MaskMode::uniform_blocks;
  spec.fraction = 0.2;
  spec.block_length = 200;
  spec.seed = 3;
  const auto masked = apply_mask(s, spec);
  EXPECT_EQ(masked.missing_count(), 2000u);
  EXPECT_EQ(missing_runs(masked).size(), 10u);
}

TEST(ApplyMask, MissingCountOrFraction) {
  const MissingValueSeries s(fixtures::white_noise(50, 9));
  EXPECT_THROW(apply_mask(s, MaskSpec{}), InfeasibleError);
}
