#pragma once

#include "mdms/mdms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mdms::fixtures {

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step;
  std::vector<double> v(n);
  double acc = 0.0;
  for (auto &x : v) {
    acc += step(rng);
    x = acc;
  }
  return v;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> draw;
  std::vector<double> v(n);
  for (auto &x : v) {
    x = draw(rng);
  }
  return v;
}

// Random-walk background with one random-walk pattern of length m copied to
// positions a and b.
inline std::vector<double> planted_pair(std::size_t n, std::size_t m, std::size_t a, std::size_t b,
                                        std::uint64_t seed) {
  auto v = random_walk(n, seed);
  const auto pattern = random_walk(m, seed ^ 0x9e3779b97f4a7c15ULL);
  std::copy(pattern.begin(), pattern.end(), v.begin() + static_cast<std::ptrdiff_t>(a));
  std::copy(pattern.begin(), pattern.end(), v.begin() + static_cast<std::ptrdiff_t>(b));
  return v;
}

// Marks each value missing with probability p.
inline std::vector<double> drop_random(std::vector<double> v, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution hit(p);
  for (auto &x : v) {
    if (hit(rng)) {
      x = kMissing;
    }
  }
  return v;
}

// Dot products of two raw windows, computed directly.
inline PairDotProducts direct_pair_dots(std::span<const double> a, std::span<const double> b) {
  PairDotProducts d;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double ba = is_missing(a[k]) ? 0.0 : 1.0;
    const double bb = is_missing(b[k]) ? 0.0 : 1.0;
    const double za = ba != 0.0 ? a[k] : 0.0;
    const double zb = bb != 0.0 ? b[k] : 0.0;
    d.qz += za * zb;
    d.qb += ba * bb;
    d.bz += ba * zb;
    d.zb += za * bb;
    d.bx += ba * zb * zb;
    d.xb += za * za * bb;
  }
  return d;
}

inline double relative_gap(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) / scale;
}

// Squared lower-bound profile of one anchor, every pair evaluated directly.
inline std::vector<double> direct_profile(const MissingValueSeries &s, std::size_t i,
                                          const EngineConfig &config) {
  const std::size_t m = config.m;
  const std::size_t len = s.size() - m + 1;
  const std::size_t w = config.exclusion_half_width();
  std::vector<double> d(len, kExcluded);
  for (std::size_t j = 0; j < len; ++j) {
    if ((j > i ? j - i : i - j) > w) {
      d[j] = pair_lb_sqdist(s.window(i, m), s.window(j, m), config).sq;
    }
  }
  return d;
}

} // namespace mdms::fixtures
