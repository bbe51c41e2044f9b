#include "mdms/preprocess.hpp"

#include "mdms/errors.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdms {

MissingValueSeries linear_impute(const MissingValueSeries &series) {
  const std::size_t n = series.size();
  std::vector<double> out(series.values().begin(), series.values().end());
  std::vector<std::size_t> present;
  for (std::size_t k = 0; k < n; ++k) {
    if (!series.missing(k)) {
      present.push_back(k);
    }
  }
  if (present.empty()) {
    throw InfeasibleError("cannot impute a series with no present values");
  }
  for (std::size_t k = 0; k < present.front(); ++k) {
    out[k] = series[present.front()];
  }
  for (std::size_t k = present.back() + 1; k < n; ++k) {
    out[k] = series[present.back()];
  }
  for (std::size_t p = 0; p + 1 < present.size(); ++p) {
    const std::size_t lo = present[p];
    const std::size_t hi = present[p + 1];
    if (hi - lo < 2) {
      continue;
    }
    const double a = series[lo];
    const double b = series[hi];
    const double span = static_cast<double>(hi - lo);
    for (std::size_t k = lo + 1; k < hi; ++k) {
      out[k] = a + (b - a) * (static_cast<double>(k - lo) / span);
    }
  }
  return MissingValueSeries(std::move(out));
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

void mark_spikes(std::vector<double> &values, double factor) {
  std::vector<double> present;
  for (double v : values) {
    if (!is_missing(v)) {
      present.push_back(v);
    }
  }
  if (present.size() < 3) {
    return;
  }
  const double med = median_of(present);
  for (auto &v : present) {
    v = std::abs(v - med);
  }
  const double mad = median_of(present);
  if (!(mad > 0.0)) {
    return;
  }
  const std::size_t n = values.size();
  std::vector<std::size_t> hits;
  std::vector<double> hood;
  for (std::size_t k = 0; k < n; ++k) {
    if (is_missing(values[k])) {
      continue;
    }
    hood.clear();
    const std::size_t lo = k >= 2 ? k - 2 : 0;
    const std::size_t hi = std::min(n - 1, k + 2);
    for (std::size_t t = lo; t <= hi; ++t) {
      if (!is_missing(values[t])) {
        hood.push_back(values[t]);
      }
    }
    if (std::abs(values[k] - median_of(hood)) > factor * mad) {
      hits.push_back(k);
    }
  }
  for (auto k : hits) {
    values[k] = kMissing;
  }
}

void mark_plateaus(std::vector<double> &values, std::size_t min_run) {
  const std::size_t n = values.size();
  std::size_t k = 0;
  while (k < n) {
    if (is_missing(values[k])) {
      ++k;
      continue;
    }
    const auto bits = std::bit_cast<std::uint64_t>(values[k]);
    std::size_t end = k + 1;
    while (end < n && !is_missing(values[end]) && std::bit_cast<std::uint64_t>(values[end]) == bits) {
      ++end;
    }
    if (end - k >= min_run) {
      std::fill(values.begin() + static_cast<std::ptrdiff_t>(k),
                values.begin() + static_cast<std::ptrdiff_t>(end), kMissing);
    }
    k = end;
  }
}

void mark_variance_bursts(std::vector<double> &values, std::size_t w, double factor) {
  const std::size_t n = values.size();
  if (w > n) {
    return;
  }
  std::vector<double> present;
  for (double v : values) {
    if (!is_missing(v)) {
      present.push_back(v);
    }
  }
  if (present.size() < 2) {
    return;
  }
  const double shift = median_of(present);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  std::vector<std::size_t> cnt(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const bool here = !is_missing(values[k]);
    const double d = here ? values[k] - shift : 0.0;
    s1[k + 1] = s1[k] + d;
    s2[k + 1] = s2[k] + d * d;
    cnt[k + 1] = cnt[k] + (here ? 1 : 0);
  }
  const std::size_t len = n - w + 1;
  std::vector<double> var(len, kMissing);
  std::vector<double> eligible;
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t c = cnt[i + w] - cnt[i];
    if (c < 2) {
      continue;
    }
    const double mean = (s1[i + w] - s1[i]) / static_cast<double>(c);
    var[i] = std::max((s2[i + w] - s2[i]) / static_cast<double>(c) - mean * mean, 0.0);
    eligible.push_back(var[i]);
  }
  if (eligible.empty()) {
    return;
  }
  const double typical = median_of(eligible);
  if (!(typical > 0.0)) {
    return;
  }
  std::vector<std::uint8_t> hit(n, 0);
  for (std::size_t i = 0; i < len; ++i) {
    if (!is_missing(var[i]) && var[i] > factor * typical) {
      std::fill(hit.begin() + static_cast<std::ptrdiff_t>(i),
                hit.begin() + static_cast<std::ptrdiff_t>(i + w), 1);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (hit[k]) {
      values[k] = kMissing;
    }
  }
}

} // namespace

MissingValueSeries mark_pseudo_missing(const MissingValueSeries &series,
                                       const PseudoMissingRules &rules) {
  if (!(rules.spike_mad_factor > 0.0) || !(rules.variance_factor > 0.0)) {
    throw std::invalid_argument("pseudo-missing factors must be positive");
  }
  if (rules.plateau_min_run < 3) {
    throw std::invalid_argument("plateau_min_run must be at least 3");
  }
  if (rules.variance_bursts && rules.variance_window < 2) {
    throw std::invalid_argument("variance rule needs a window of at least 2");
  }
  std::vector<double> values(series.values().begin(), series.values().end());
  if (rules.spikes) {
    mark_spikes(values, rules.spike_mad_factor);
  }
  if (rules.plateaus) {
    mark_plateaus(values, rules.plateau_min_run);
  }
  if (rules.variance_bursts) {
    mark_variance_bursts(values, rules.variance_window, rules.variance_factor);
  }
  return MissingValueSeries(std::move(values));
}

namespace {

// Uniform integer in [0, bound) without modulo bias; independent of the
// standard library's distribution implementations.
std::size_t draw_below(std::mt19937_64 &rng, std::size_t bound) {
  const std::uint64_t b = bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t r = rng();
  while (r >= limit) {
    r = rng();
  }
  return static_cast<std::size_t>(r % b);
}

std::size_t resolve_count(const MaskSpec &spec, double total, const char *what) {
  if (spec.count) {
    return *spec.count;
  }
  if (spec.fraction) {
    if (!(*spec.fraction >= 0.0) || *spec.fraction > 1.0) {
      throw InfeasibleError("mask fraction must lie in [0, 1]");
    }
    return static_cast<std::size_t>(std::llround(*spec.fraction * total));
  }
  throw InfeasibleError(std::string(what) + " mask needs a count or a fraction");
}

} // namespace

MissingValueSeries apply_mask(const MissingValueSeries &series, const MaskSpec &spec) {
  const std::size_t n = series.size();
  std::vector<double> values(series.values().begin(), series.values().end());
  std::mt19937_64 rng(spec.seed);

  switch (spec.mode) {
  case MaskMode::random_points: {
    const std::size_t k = resolve_count(spec, static_cast<double>(n), "random");
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n; ++i) {
      if (!series.missing(i)) {
        pool.push_back(i);
      }
    }
    if (k > pool.size()) {
      throw InfeasibleError("cannot mask " + std::to_string(k) + " of " +
                            std::to_string(pool.size()) + " present values");
    }
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t pick = t + draw_below(rng, pool.size() - t);
      std::swap(pool[t], pool[pick]);
      values[pool[t]] = kMissing;
    }
    break;
  }
  case MaskMode::uniform_blocks: {
    const std::size_t p = spec.block_length;
    if (p == 0) {
      throw InfeasibleError("block length must be positive");
    }
    const std::size_t blocks =
        spec.count ? *spec.count : resolve_count(spec, static_cast<double>(n) / static_cast<double>(p), "block");
    if (blocks == 0) {
      break;
    }
    const std::size_t slot = n / blocks;
    const std::size_t need = blocks == 1 ? p : p + 1;
    if (slot < need) {
      throw InfeasibleError("cannot fit " + std::to_string(blocks) + " separated blocks of length " +
                            std::to_string(p) + " into " + std::to_string(n) + " values");
    }
    const std::size_t slack = slot - need + 1;
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t start = b * slot + draw_below(rng, slack);
      std::fill(values.begin() + static_cast<std::ptrdiff_t>(start),
                values.begin() + static_cast<std::ptrdiff_t>(start + p), kMissing);
    }
    break;
  }
  case MaskMode::targeted_block: {
    const std::size_t p = spec.block_length;
    if (p == 0 || !spec.target) {
      throw InfeasibleError("targeted block needs a positive length and a target");
    }
    const std::size_t half = p / 2;
    if (*spec.target < half || *spec.target - half + p > n) {
      throw InfeasibleError("targeted block does not fit inside the series");
    }
    const std::size_t start = *spec.target - half;
    std::fill(values.begin() + static_cast<std::ptrdiff_t>(start),
              values.begin() + static_cast<std::ptrdiff_t>(start + p), kMissing);
    break;
  }
  }
  return MissingValueSeries(std::move(values));
}

} // namespace mdms
