#include "mdms/errors.hpp"
#include "mdms/series.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mdms;

namespace {

std::vector<double> values_of(const MissingValueSeries &s) {
  return {s.values().begin(), s.values().end()};
}

} // namespace

TEST(ParseSeries, EmptyFieldIsMissing) {
  const auto s = parse_series("1.0\n\n3.0");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_TRUE(s.missing(1));
  EXPECT_EQ(s[2], 3.0);
}

TEST(ParseSeries, ToySeriesA) {
  const auto s = parse_series("0\n2\n0\n2");
  EXPECT_EQ(values_of(s), (std::vector<double>{0, 2, 0, 2}));
}

TEST(ParseSeries, GarbageReportsLineNumber) {
  try {
    (void)parse_series("1.0\nabc");
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseSeries, NanTokensInAnyCase) {
  const auto s = parse_series("NaN\nnan\nNAN\n nAn \n4");
  ASSERT_EQ(s.size(), 5u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(s.missing(i)) << i;
  }
  EXPECT_EQ(s[4], 4.0);
}

TEST(ParseSeries, HeaderRowIsSkipped) {
  const auto s = parse_series("time,value\n0,1.5\n1,\n2,-2e3\n");
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], 1.5);
  EXPECT_TRUE(s.missing(1));
  EXPECT_EQ(s[2], -2000.0);
}

TEST(ParseSeries, GarbageAfterFirstLineIsAnError) {
  EXPECT_THROW((void)parse_series("1\n2\nvalue\n3"), ParseError);
}

TEST(ParseSeries, CarriageReturnsAndPlusSign) {
  const auto s = parse_series("+1\r\n2\r\n\r\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_TRUE(s.missing(2));
}

TEST(ParseSeries, RecordCountMatchesInput) {
  std::string text;
  for (int k = 0; k < 500; ++k) {
    text += (k % 7 == 0) ? "\n" : std::to_string(k) + "\n";
  }
  EXPECT_EQ(parse_series(text).size(), 500u);
}

TEST(ParseSeries, RejectsInfinities) {
  EXPECT_THROW((void)parse_series("1\ninf\n2"), ParseError);
  EXPECT_THROW((void)parse_series("1\n-Infinity\n2"), ParseError);
  EXPECT_THROW((void)parse_series("1\n1e400\n2"), ParseError);
}

TEST(ParseSeries, TooShortIsLengthError) {
  EXPECT_THROW((void)parse_series("1"), LengthError);
  EXPECT_THROW((void)parse_series(""), LengthError);
  EXPECT_THROW((void)parse_series("value\n1"), LengthError);
}

TEST(ParseSeries, ExplicitColumn) {
  CsvFormat f;
  f.value_column = 1;
  const auto s = parse_series("0,5,9\n1,,9\n2,7,9", f);
  EXPECT_EQ(s[0], 5.0);
  EXPECT_TRUE(s.missing(1));
  EXPECT_EQ(s[2], 7.0);
  f.value_column = 3;
  EXPECT_THROW((void)parse_series("0,5,9\n1,6,9", f), ParseError);
}

TEST(ParseSeries, StreamOverload) {
  std::istringstream in("3\n4\n");
  EXPECT_EQ(values_of(parse_series(in)), (std::vector<double>{3, 4}));
}

TEST(MissingValueSeries, Invariants) {
  EXPECT_THROW(MissingValueSeries(std::vector<double>{1.0}), LengthError);
  EXPECT_THROW(MissingValueSeries(std::vector<double>{1.0, INFINITY}), std::invalid_argument);
  const MissingValueSeries s(std::vector<double>{1.0, kMissing, 2.0});
  EXPECT_EQ(s.missing_count(), 1u);
  EXPECT_FALSE(s.complete());
}

TEST(BuildAuxiliary, Examples) {
  const auto a = build_auxiliary(MissingValueSeries(std::vector<double>{1, kMissing, -2}));
  EXPECT_EQ(a.z, (std::vector<double>{1, 0, -2}));
  EXPECT_EQ(a.x, (std::vector<double>{1, 0, 4}));
  EXPECT_EQ(a.bind, (std::vector<double>{1, 0, 1}));

  const std::vector<double> full{3, 1, 4, 1, 5};
  const auto b = build_auxiliary(MissingValueSeries(full));
  EXPECT_EQ(b.z, full);
  EXPECT_EQ(b.bind, std::vector<double>(5, 1.0));

  const auto c = build_auxiliary(MissingValueSeries(std::vector<double>(4, kMissing)));
  EXPECT_EQ(c.z, std::vector<double>(4, 0.0));
  EXPECT_EQ(c.x, std::vector<double>(4, 0.0));
  EXPECT_EQ(c.bind, std::vector<double>(4, 0.0));
}

TEST(BuildAuxiliary, SquaresAreExact) {
  const MissingValueSeries s(fixtures::drop_random(fixtures::random_walk(300, 3), 0.3, 4));
  const auto a = build_auxiliary(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(a.x[i], a.z[i] * a.z[i]);
    EXPECT_EQ(a.bind[i] == 1.0, !s.missing(i));
    if (!s.missing(i)) {
      EXPECT_EQ(a.z[i], s[i]);
    } else {
      EXPECT_EQ(a.z[i], 0.0);
    }
  }
}

TEST(SlidingMeanStd, Examples) {
  const std::vector<double> v{0, 2, 0, 2};
  const auto r = sliding_mean_std(v, 4);
  ASSERT_EQ(r.means.size(), 1u);
  EXPECT_DOUBLE_EQ(r.means[0], 1.0);
  EXPECT_DOUBLE_EQ(r.stds[0], 1.0);

  const auto c = sliding_mean_std(std::vector<double>(20, 3.25), 5);
  for (double sd : c.stds) {
    EXPECT_EQ(sd, 0.0);
  }

  const auto one = sliding_mean_std(std::vector<double>{1, 2, 3}, 1);
  EXPECT_EQ(one.means, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(one.stds, (std::vector<double>{0, 0, 0}));
}

TEST(SlidingMeanStd, MatchesDirectComputation) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto v = fixtures::random_walk(2000, seed);
    if (seed % 2 == 1) {
      for (auto &x : v) {
        x += 1e5;
      }
    }
    for (std::size_t m : {3u, 17u, 128u}) {
      const auto r = sliding_mean_std(v, m);
      ASSERT_EQ(r.means.size(), v.size() - m + 1);
      for (std::size_t i = 0; i < r.means.size(); ++i) {
        long double mean = 0.0L;
        for (std::size_t k = 0; k < m; ++k) {
          mean += v[i + k];
        }
        mean /= static_cast<long double>(m);
        long double var = 0.0L;
        for (std::size_t k = 0; k < m; ++k) {
          var += (v[i + k] - mean) * (v[i + k] - mean);
        }
        const double sd = static_cast<double>(std::sqrt(var / static_cast<long double>(m)));
        ASSERT_NEAR(r.means[i], static_cast<double>(mean), 1e-10) << "seed " << seed << " m " << m << " i " << i;
        ASSERT_NEAR(r.stds[i], sd, 1e-10) << "seed " << seed << " m " << m << " i " << i;
        ASSERT_GE(r.stds[i], 0.0);
      }
    }
  }
}

TEST(SlidingExtrema, Examples) {
  const MissingValueSeries s(std::vector<double>{0, kMissing, 2, 0});
  const auto e = sliding_extrema(s, 3);
  EXPECT_EQ(e.vmax[1], 2.0);
  EXPECT_EQ(e.vmin[1], 0.0);

  const MissingValueSeries gap(std::vector<double>{1, kMissing, kMissing, kMissing, 4});
  const auto g = sliding_extrema(gap, 3);
  EXPECT_TRUE(is_missing(g.vmax[1]));
  EXPECT_TRUE(is_missing(g.vmin[1]));
  EXPECT_EQ(g.vmax[0], 1.0);
  EXPECT_EQ(g.vmin[2], 4.0);
}

TEST(SlidingExtrema, MatchesNaive) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto v = fixtures::random_walk(700, seed);
    if (seed >= 3) {
      v = fixtures::drop_random(v, 0.4, seed + 100);
    }
    const MissingValueSeries s(v);
    for (std::size_t m : {1u, 4u, 33u}) {
      const auto e = sliding_extrema(s, m);
      for (std::size_t i = 0; i + m <= v.size(); ++i) {
        double hi = -INFINITY;
        double lo = INFINITY;
        for (std::size_t k = i; k < i + m; ++k) {
          if (!is_missing(v[k])) {
            hi = std::max(hi, v[k]);
            lo = std::min(lo, v[k]);
          }
        }
        if (std::isinf(hi)) {
          ASSERT_TRUE(is_missing(e.vmax[i]) && is_missing(e.vmin[i]));
        } else {
          ASSERT_EQ(e.vmax[i], hi);
          ASSERT_EQ(e.vmin[i], lo);
        }
      }
    }
  }
}

TEST(WindowStats, Invariants) {
  const MissingValueSeries s(fixtures::drop_random(fixtures::random_walk(800, 9), 0.25, 10));
  const auto aux = build_auxiliary(s);
  const std::size_t m = 24;
  const auto st = compute_window_stats(s, aux, m);
  ASSERT_EQ(st.size(), s.size() - m + 1);
  for (std::size_t i = 0; i < st.size(); ++i) {
    double count = 0.0;
    for (std::size_t k = i; k < i + m; ++k) {
      count += aux.bind[k];
    }
    EXPECT_EQ(static_cast<double>(m) * st.mu_b[i], count);
    EXPECT_EQ(st.present[i], static_cast<std::uint32_t>(count));
    EXPECT_GE(st.mu_b[i], 0.0);
    EXPECT_LE(st.mu_b[i], 1.0);
    EXPECT_EQ(st.mu_b[i] == 1.0, count == static_cast<double>(m));
    EXPECT_GE(st.sigma_z[i], 0.0);
    EXPECT_GE(st.sigma_b[i], 0.0);
    if (!is_missing(st.vmax[i])) {
      EXPECT_LE(st.vmin[i], st.vmax[i]);
    }
  }
}

TEST(EngineConfig, Validation) {
  EngineConfig c;
  c.m = 3;
  EXPECT_NO_THROW(validate(c, 6));
  c.m = 2;
  EXPECT_THROW(validate(c, 100), InfeasibleError);
  c.m = 51;
  EXPECT_THROW(validate(c, 100), InfeasibleError);
  c.m = 50;
  EXPECT_NO_THROW(validate(c, 100));
  c.exclusion_divisor = 0;
  EXPECT_THROW(validate(c, 100), InfeasibleError);
  c.exclusion_divisor = 4;
  c.value_bounds_override = std::make_pair(2.0, 1.0);
  EXPECT_THROW(validate(c, 100), InfeasibleError);
  c.value_bounds_override = std::make_pair(-1.0, 1.0);
  EXPECT_NO_THROW(validate(c, 100));
  c.epsilon = -1.0;
  EXPECT_THROW(validate(c, 100), InfeasibleError);
}

TEST(EngineConfig, ExclusionHalfWidth) {
  EngineConfig c;
  c.m = 8;
  EXPECT_EQ(c.exclusion_half_width(), 2u);
  c.m = 11;
  EXPECT_EQ(c.exclusion_half_width(), 2u);
  c.exclusion_divisor = 1;
  EXPECT_EQ(c.exclusion_half_width(), 11u);
}
