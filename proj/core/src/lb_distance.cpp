#include "mdms/lb_distance.hpp"

#include <array>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace mdms {

namespace {

constexpr std::array<std::string_view, 5> kCaseCodes = {"C1", "C2", "C3", "NOV", "AMS"};

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double var = 0.0;
  double mean_square = 0.0;
};

// Two-pass moments over the complete vector v.
Moments moments_of(std::span<const double> v) {
  Moments out;
  out.count = v.size();
  if (v.empty()) {
    return out;
  }
  double sum = 0.0;
  for (double x : v) {
    sum += x;
  }
  out.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    const double d = x - out.mean;
    ss += d * d;
  }
  out.var = ss / static_cast<double>(v.size());
  out.mean_square = out.var + out.mean * out.mean;
  return out;
}

} // namespace

std::string_view case_code(CaseLabel label) noexcept {
  return kCaseCodes[static_cast<std::size_t>(label)];
}

std::optional<CaseLabel> case_from_code(std::string_view code) noexcept {
  for (std::size_t k = 0; k < kCaseCodes.size(); ++k) {
    if (kCaseCodes[k] == code) {
      return static_cast<CaseLabel>(k);
    }
  }
  return std::nullopt;
}

RestrictedStats restricted_stats(std::span<const double> a, std::span<const double> b, double eps) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("restricted_stats: windows differ in length");
  }
  std::size_t r = 0;
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!is_missing(a[k]) && !is_missing(b[k])) {
      ++r;
      sum_a += a[k];
      sum_b += b[k];
    }
  }
  if (r == 0) {
    return {};
  }
  const double inv = 1.0 / static_cast<double>(r);
  const double mu_a = sum_a * inv;
  const double mu_b = sum_b * inv;
  double ss_a = 0.0, ss_b = 0.0, cross = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!is_missing(a[k]) && !is_missing(b[k])) {
      const double da = a[k] - mu_a;
      const double db = b[k] - mu_b;
      ss_a += da * da;
      ss_b += db * db;
      cross += da * db;
    }
  }
  const double var_a = ss_a * inv;
  const double var_b = ss_b * inv;
  return detail::finish_restricted(r, mu_a, mu_b, var_a, var_b, var_a + mu_a * mu_a,
                                   var_b + mu_b * mu_b, cross * inv, eps);
}

double completed_variance_bound(const WindowMoments &w, const CompletionBounds &bounds) noexcept {
  const double ur = w.mu_z / w.mu_b;
  const double vr = std::max((w.sigma_z * w.sigma_z + w.mu_z * w.mu_z) / w.mu_b - ur * ur, 0.0);
  const double c = bounds.c();
  return w.mu_b * (vr + (bounds.v_max - ur) * (bounds.v_min - ur)) + 0.25 * c * c;
}

std::optional<double> f_lb(const WindowMoments &w, const CompletionBounds &bounds,
                           double var_over_r, double eps) noexcept {
  if (!(w.mu_b > 0.0)) {
    return std::nullopt;
  }
  const double mean_square = (w.sigma_z * w.sigma_z + w.mu_z * w.mu_z) / w.mu_b;
  const double denominator = completed_variance_bound(w, bounds);
  const double c = bounds.c();
  if (denominator <= eps * (mean_square + 0.25 * c * c) || !(denominator > 0.0)) {
    return 0.0;
  }
  return var_over_r / denominator;
}

WindowSummary summarize(const WindowMoments &w, const CompletionBounds &bounds, std::size_t m) {
  WindowSummary s;
  s.present = static_cast<std::size_t>(std::llround(w.mu_b * static_cast<double>(m)));
  s.bounds = bounds;
  if (s.present == 0) {
    return s;
  }
  const double raw_square = w.sigma_z * w.sigma_z + w.mu_z * w.mu_z;
  s.mean = w.mu_z / w.mu_b;
  s.mean_square = raw_square / w.mu_b;
  if (s.present == m) {
    s.variance = w.sigma_z * w.sigma_z;
  } else {
    s.variance = std::max(s.mean_square - s.mean * s.mean, 0.0);
  }
  s.variance_bound = completed_variance_bound(w, bounds);
  return s;
}

WindowSummary summarize_window(std::span<const double> window,
                               const std::optional<std::pair<double, double>> &bounds_override) {
  std::vector<double> present;
  present.reserve(window.size());
  for (double v : window) {
    if (!is_missing(v)) {
      present.push_back(v);
    }
  }
  WindowSummary s;
  s.present = present.size();
  if (present.empty()) {
    if (bounds_override) {
      s.bounds = {bounds_override->first, bounds_override->second};
    } else {
      s.bounds = {kMissing, kMissing};
    }
    return s;
  }
  const auto mo = moments_of(present);
  s.mean = mo.mean;
  s.variance = mo.var;
  s.mean_square = mo.mean_square;
  if (bounds_override) {
    s.bounds = {bounds_override->first, bounds_override->second};
  } else {
    const auto [lo, hi] = std::minmax_element(present.begin(), present.end());
    s.bounds = {*lo, *hi};
  }
  const double mu_b = static_cast<double>(s.present) / static_cast<double>(window.size());
  const double c = s.bounds.c();
  s.variance_bound =
      mu_b * (s.variance + (s.bounds.v_max - s.mean) * (s.bounds.v_min - s.mean)) + 0.25 * c * c;
  return s;
}

LbValue pair_lb_sqdist(std::span<const double> a, std::span<const double> b,
                       const EngineConfig &config) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("pair_lb_sqdist: windows differ in length");
  }
  const std::size_t m = a.size();
  const auto wi = summarize_window(a, config.value_bounds_override);
  const auto wj = summarize_window(b, config.value_bounds_override);
  if (wi.present == 0 || wj.present == 0) {
    return degenerate_all_missing(config.all_missing_policy);
  }
  const auto rs = restricted_stats(a, b, config.epsilon);
  if (rs.r_count == 0) {
    return {0.0, CaseLabel::degenerate_no_overlap};
  }
  if (rs.r_count == m) {
    return {znorm_sqdist(a, b, config.epsilon), CaseLabel::case1_complete};
  }
  return lb_from_restricted(rs, wi, wj, m, config.epsilon);
}

double znorm_sqdist(std::span<const double> a, std::span<const double> b, double eps) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("znorm_sqdist: windows differ in length");
  }
  const auto ma = moments_of(a);
  const auto mb = moments_of(b);
  const bool flat_a = detail::negligible(ma.var, ma.mean_square, eps);
  const bool flat_b = detail::negligible(mb.var, mb.mean_square, eps);
  if (flat_a || flat_b) {
    return flat_a && flat_b ? 0.0 : 2.0 * static_cast<double>(a.size());
  }
  const double sa = std::sqrt(ma.var);
  const double sb = std::sqrt(mb.var);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = (a[k] - ma.mean) / sa - (b[k] - mb.mean) / sb;
    acc += d * d;
  }
  return acc;
}

namespace {

double unit_uniform(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// min over slope > 0 and offset of sum (slope * x + offset - y_hat)^2, where
// y_hat is the z-normalized y. Returns unset when y is flat.
std::optional<double> free_scale_sqdist(std::span<const double> x, std::span<const double> y,
                                        double eps) {
  const auto mx = moments_of(x);
  const auto my = moments_of(y);
  if (detail::negligible(my.var, my.mean_square, eps)) {
    return std::nullopt;
  }
  const double m = static_cast<double>(x.size());
  if (detail::negligible(mx.var, mx.mean_square, eps)) {
    return m;
  }
  double cross = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    cross += (x[k] - mx.mean) * (y[k] - my.mean);
  }
  const double r = std::clamp(cross / (m * std::sqrt(mx.var * my.var)), -1.0, 1.0);
  const double rp = std::max(r, 0.0);
  return m * (1.0 - rp * rp);
}

} // namespace

double oracle_min_distance(std::span<const double> window_a, std::span<const double> window_b,
                           const CompletionBounds &bounds_a, const CompletionBounds &bounds_b,
                           std::size_t samples, std::uint64_t seed) {
  if (window_a.size() != window_b.size()) {
    throw std::invalid_argument("oracle_min_distance: windows differ in length");
  }
  if (samples == 0) {
    throw std::invalid_argument("oracle_min_distance: samples must be positive");
  }
  const std::size_t m = window_a.size();
  std::vector<double> fa(window_a.begin(), window_a.end());
  std::vector<double> fb(window_b.begin(), window_b.end());
  bool gaps_a = false, gaps_b = false;
  for (std::size_t k = 0; k < m; ++k) {
    gaps_a = gaps_a || is_missing(window_a[k]);
    gaps_b = gaps_b || is_missing(window_b[k]);
  }
  if (!gaps_a && !gaps_b) {
    return znorm_sqdist(fa, fb);
  }

  std::mt19937_64 rng(seed);
  auto fill = [&rng](std::span<const double> src, std::vector<double> &dst,
                     const CompletionBounds &bounds) {
    for (std::size_t k = 0; k < src.size(); ++k) {
      if (is_missing(src[k])) {
        dst[k] = bounds.v_min + unit_uniform(rng) * bounds.c();
      }
    }
  };

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    fill(window_a, fa, bounds_a);
    fill(window_b, fb, bounds_b);
    best = std::min(best, znorm_sqdist(fa, fb));
    if (gaps_a != gaps_b) {
      const auto relaxed = gaps_a ? free_scale_sqdist(fa, fb, 1e-12) : free_scale_sqdist(fb, fa, 1e-12);
      if (relaxed) {
        best = std::min(best, *relaxed);
      }
    }
  }
  return best;
}

} // namespace mdms
