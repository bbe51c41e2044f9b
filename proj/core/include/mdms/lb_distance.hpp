#pragma once

#include "mdms/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace mdms {

enum class CaseLabel : std::uint8_t {
  case1_complete,
  case2_one_missing,
  case3_both_missing,
  degenerate_no_overlap,
  degenerate_all_missing,
};

// Short codes used in CSV output: C1, C2, C3, NOV, AMS.
std::string_view case_code(CaseLabel label) noexcept;
std::optional<CaseLabel> case_from_code(std::string_view code) noexcept;

// Dot products of anchor window i against window j over the auxiliary
// series. qb counts positions present in both windows.
struct PairDotProducts {
  double qz = 0; // Z_i . Z_j
  double qb = 0; // B_i . B_j
  double bz = 0; // B_i . Z_j
  double zb = 0; // Z_i . B_j
  double bx = 0; // B_i . X_j
  double xb = 0; // X_i . B_j
};

// Moments of both windows restricted to R, the positions present in both.
struct RestrictedStats {
  std::size_t r_count = 0;
  double mu_i = kMissing, mu_j = kMissing;
  double var_i = kMissing, var_j = kMissing;
  // Window is constant over R, relative to its mean square.
  bool flat_i = true, flat_j = true;
  // Pearson correlation over R, clamped to [-1, 1]; unset when either side is flat.
  std::optional<double> q;
};

namespace detail {

inline bool negligible(double var, double mean_square, double eps) noexcept {
  return var <= eps * mean_square;
}

inline RestrictedStats finish_restricted(std::size_t r, double mu_i, double mu_j, double var_i,
                                         double var_j, double msq_i, double msq_j, double cov,
                                         double eps) noexcept {
  RestrictedStats s;
  s.r_count = r;
  s.mu_i = mu_i;
  s.mu_j = mu_j;
  s.var_i = std::max(var_i, 0.0);
  s.var_j = std::max(var_j, 0.0);
  s.flat_i = negligible(s.var_i, msq_i, eps);
  s.flat_j = negligible(s.var_j, msq_j, eps);
  if (!s.flat_i && !s.flat_j) {
    s.q = std::clamp(cov / std::sqrt(s.var_i * s.var_j), -1.0, 1.0);
  }
  return s;
}

} // namespace detail

// Restricted moments from the six rolling dot products. qb == 0 yields
// r_count 0 with every moment undefined.
inline RestrictedStats restricted_stats(const PairDotProducts &d, double eps) noexcept {
  if (!(d.qb > 0.5)) {
    return {};
  }
  const double inv = 1.0 / d.qb;
  const double ui = d.zb * inv;
  const double uj = d.bz * inv;
  const double msq_i = d.xb * inv;
  const double msq_j = d.bx * inv;
  return detail::finish_restricted(static_cast<std::size_t>(std::llround(d.qb)), ui, uj,
                                   msq_i - ui * ui, msq_j - uj * uj, msq_i, msq_j,
                                   d.qz * inv - ui * uj, eps);
}

// Same quantities computed directly from two windows (two-pass over R).
RestrictedStats restricted_stats(std::span<const double> a, std::span<const double> b, double eps);

// Exact squared z-normalized distance from a correlation: 2m(1 - q).
inline double case1_sqdist(double q, std::size_t m) noexcept {
  return 2.0 * static_cast<double>(m) * (1.0 - q);
}

// Case 1 with the flat-window convention: two flat windows are at 0, a flat
// window sits at 2m from anything else.
inline double case1_sqdist(const RestrictedStats &s, std::size_t m) noexcept {
  if (s.q) {
    return case1_sqdist(*s.q, m);
  }
  if (s.flat_i && s.flat_j) {
    return 0.0;
  }
  return 2.0 * static_cast<double>(m);
}

enum class Side { i, j };

// One window complete (complete_side), the other with gaps. full_var is the
// variance of the whole complete window, full_mean_square its mean square.
inline double case2_sqlb(const RestrictedStats &s, Side complete_side, double full_var,
                         double full_mean_square, double eps) noexcept {
  if (detail::negligible(full_var, full_mean_square, eps) || s.r_count == 0) {
    return 0.0;
  }
  const double vo = complete_side == Side::i ? s.var_i : s.var_j;
  const double base = static_cast<double>(s.r_count) * vo / full_var;
  if (s.q && *s.q > 0.0) {
    return base * (1.0 - *s.q * *s.q);
  }
  return base;
}

// Admissible range for a window's missing entries.
struct CompletionBounds {
  double v_min = 0.0;
  double v_max = 0.0;

  double c() const noexcept { return v_max - v_min; }
  double b() const noexcept { return v_max * v_min; }
  double a() const noexcept { return v_max + v_min; }
};

// Per-window moments over the zero-filled series.
struct WindowMoments {
  double mu_z = 0.0;
  double sigma_z = 0.0;
  double mu_b = 0.0;
};

// Upper bound on the variance of any completion of a window whose missing
// values lie in the given bounds:
//   mu_b * (vr + (v_max - ur)(v_min - ur)) + c^2 / 4
// with ur, vr the mean and variance of the present values.
double completed_variance_bound(const WindowMoments &w, const CompletionBounds &bounds) noexcept;

// var_over_r divided by completed_variance_bound. Unset when mu_b == 0; zero
// when the bound is numerically degenerate.
std::optional<double> f_lb(const WindowMoments &w, const CompletionBounds &bounds,
                           double var_over_r, double eps) noexcept;

// Both windows have gaps. f_i, f_j from f_lb.
inline double case3_sqlb(const RestrictedStats &s, double f_i, double f_j) noexcept {
  const double f = std::max(f_i, f_j);
  const double base = static_cast<double>(s.r_count) * f;
  if (s.q && *s.q > 0.0) {
    return std::max(base * (1.0 - *s.q * *s.q), 0.0);
  }
  return std::max(base, 0.0);
}

// What the dispatcher needs to know about one window, precomputed once.
struct WindowSummary {
  std::size_t present = 0;
  double mean = kMissing;        // mean of present values
  double variance = kMissing;    // variance of present values
  double mean_square = kMissing; // mean of squared present values
  CompletionBounds bounds;
  double variance_bound = kMissing; // completed_variance_bound
};

WindowSummary summarize(const WindowMoments &w, const CompletionBounds &bounds, std::size_t m);

// Direct summary of a raw window; bounds are the present extrema unless an
// override is given.
WindowSummary summarize_window(std::span<const double> window,
                               const std::optional<std::pair<double, double>> &bounds_override);

struct LbValue {
  double sq = 0.0; // squared (lower-bound) distance; NaN marks an invalid pair
  CaseLabel label = CaseLabel::case1_complete;
};

namespace detail {

inline double f_ratio(double var_over_r, const WindowSummary &w, double eps) noexcept {
  const double c = w.bounds.c();
  if (w.variance_bound <= eps * (w.mean_square + 0.25 * c * c)) {
    return 0.0;
  }
  return var_over_r / w.variance_bound;
}

} // namespace detail

// Case dispatch once restricted moments are known. Both windows must have at
// least one present value and r_count must be positive.
inline LbValue lb_from_restricted(const RestrictedStats &s, const WindowSummary &wi,
                                  const WindowSummary &wj, std::size_t m, double eps) noexcept {
  if (s.r_count == m) {
    return {case1_sqdist(s, m), CaseLabel::case1_complete};
  }
  if (wi.present == m) {
    return {case2_sqlb(s, Side::i, wi.variance, wi.mean_square, eps), CaseLabel::case2_one_missing};
  }
  if (wj.present == m) {
    return {case2_sqlb(s, Side::j, wj.variance, wj.mean_square, eps), CaseLabel::case2_one_missing};
  }
  const double fi = detail::f_ratio(s.var_i, wi, eps);
  const double fj = detail::f_ratio(s.var_j, wj, eps);
  return {case3_sqlb(s, fi, fj), CaseLabel::case3_both_missing};
}

inline LbValue degenerate_all_missing(AllMissingPolicy policy) noexcept {
  return {policy == AllMissingPolicy::bound_zero ? 0.0 : kMissing,
          CaseLabel::degenerate_all_missing};
}

// Full dispatch from rolling dot products.
inline LbValue lb_sqdist(const PairDotProducts &d, const WindowSummary &wi,
                         const WindowSummary &wj, std::size_t m, double eps,
                         AllMissingPolicy policy) noexcept {
  if (wi.present == 0 || wj.present == 0) {
    return degenerate_all_missing(policy);
  }
  if (!(d.qb > 0.5)) {
    return {0.0, CaseLabel::degenerate_no_overlap};
  }
  return lb_from_restricted(restricted_stats(d, eps), wi, wj, m, eps);
}

// Full dispatch from two raw windows of equal length (direct route, no
// rolling state).
LbValue pair_lb_sqdist(std::span<const double> a, std::span<const double> b,
                       const EngineConfig &config);

// Exact squared z-normalized Euclidean distance between two complete windows,
// computed by explicit normalization. Flat windows follow the Case 1 convention.
double znorm_sqdist(std::span<const double> a, std::span<const double> b, double eps = 1e-12);

// Sampling oracle: fills each window's missing entries uniformly within its
// bounds and returns the smallest exact squared distance seen. When exactly
// one window has gaps, each completion is also scored with that window's
// offset and scale left free (closed-form least squares), which can only
// lower the estimate.
double oracle_min_distance(std::span<const double> window_a, std::span<const double> window_b,
                           const CompletionBounds &bounds_a, const CompletionBounds &bounds_b,
                           std::size_t samples, std::uint64_t seed);

} // namespace mdms
