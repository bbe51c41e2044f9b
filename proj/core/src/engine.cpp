#include "mdms/engine.hpp"

#include "mdms/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace mdms {

namespace {

struct StreamOperands {
  const std::vector<double> *left;
  const std::vector<double> *right;
};

StreamOperands operands(const AuxiliarySeries &aux, std::size_t stream) {
  switch (static_cast<DotStream>(stream)) {
  case DotStream::qz:
    return {&aux.z, &aux.z};
  case DotStream::qb:
    return {&aux.bind, &aux.bind};
  case DotStream::bz:
    return {&aux.bind, &aux.z};
  case DotStream::zb:
    return {&aux.z, &aux.bind};
  case DotStream::bx:
    return {&aux.bind, &aux.x};
  case DotStream::xb:
    return {&aux.x, &aux.bind};
  }
  return {&aux.z, &aux.z};
}

// Entry 0 of stream (L, R) at anchor i is L_i . R_0, which is entry i of the
// frozen first row of the transposed stream (R, L).
constexpr std::array<std::size_t, kDotStreams> kTransposed = {
    static_cast<std::size_t>(DotStream::qz), static_cast<std::size_t>(DotStream::qb),
    static_cast<std::size_t>(DotStream::zb), static_cast<std::size_t>(DotStream::bz),
    static_cast<std::size_t>(DotStream::xb), static_cast<std::size_t>(DotStream::bx)};

// Hot loops get an AVX2 clone picked at load time. FMA is left out so every
// clone rounds the same way as the scalar reference code.
#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__linux__)
#define MDMS_HOT_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define MDMS_HOT_CLONES
#endif

// v[j] <- v[j - 1] - head * r[j - 1] + tail * r[j + m - 1], for j = len-1 .. 1.
MDMS_HOT_CLONES
void roll_stream(double *v, std::size_t len, double head, double tail, const double *r,
                 std::size_t m) {
  const double *r_tail = r + m - 1;
  for (std::size_t j = len - 1; j >= 1; --j) {
    v[j] = v[j - 1] - head * r[j - 1] + tail * r_tail[j];
  }
}

void check_window(std::size_t m, std::size_t n) {
  if (m == 0 || m > n) {
    throw InfeasibleError("window length " + std::to_string(m) + " does not fit " +
                          std::to_string(n) + " values");
  }
}

} // namespace

std::vector<double> sliding_dot_product(std::span<const double> query,
                                        std::span<const double> series) {
  const std::size_t m = query.size();
  check_window(m, series.size());
  const std::size_t len = series.size() - m + 1;
  std::vector<double> out(len);
  for (std::size_t j = 0; j < len; ++j) {
    const double *s = series.data() + j;
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      acc += query[k] * s[k];
    }
    out[j] = acc;
  }
  return out;
}

std::vector<double> init_dot_products(std::span<const double> a, std::span<const double> b,
                                      std::size_t m) {
  check_window(m, a.size());
  return sliding_dot_product(a.first(m), b);
}

FirstRows FirstRows::compute(const AuxiliarySeries &aux, std::size_t m) {
  FirstRows out;
  for (std::size_t s = 0; s < kDotStreams; ++s) {
    const auto [left, right] = operands(aux, s);
    out.rows[s] = init_dot_products(*left, *right, m);
  }
  return out;
}

DotProductRow::DotProductRow(const AuxiliarySeries &aux, std::size_t m)
    : first_(std::make_shared<const FirstRows>(FirstRows::compute(aux, m))), m_(m), anchor_(0) {
  v_ = first_->rows;
}

DotProductRow::DotProductRow(const AuxiliarySeries &aux, std::size_t m,
                             std::shared_ptr<const FirstRows> first, std::size_t anchor)
    : first_(std::move(first)), m_(m), anchor_(anchor) {
  check_window(m, aux.size());
  if (anchor > aux.size() - m) {
    throw std::out_of_range("anchor beyond the last window");
  }
  if (anchor == 0) {
    v_ = first_->rows;
    return;
  }
  for (std::size_t s = 0; s < kDotStreams; ++s) {
    const auto [left, right] = operands(aux, s);
    v_[s] = sliding_dot_product(std::span<const double>(*left).subspan(anchor, m), *right);
  }
}

void DotProductRow::advance(const AuxiliarySeries &aux) {
  const std::size_t len = size();
  const std::size_t next = anchor_ + 1;
  if (next >= len) {
    throw std::out_of_range("advance past the last anchor");
  }
  for (std::size_t s = 0; s < kDotStreams; ++s) {
    const auto [left, right] = operands(aux, s);
    const double head = (*left)[next - 1];
    const double tail = (*left)[next + m_ - 1];
    double *v = v_[s].data();
    roll_stream(v, len, head, tail, right->data(), m_);
    v[0] = first_->rows[kTransposed[s]][next];
  }
  anchor_ = next;
}

double direct_dot(const AuxiliarySeries &aux, DotStream s, std::size_t i, std::size_t j,
                  std::size_t m) {
  const auto [left, right] = operands(aux, static_cast<std::size_t>(s));
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    acc += (*left)[i + k] * (*right)[j + k];
  }
  return acc;
}

std::vector<WindowSummary> summarize_windows(const WindowStats &stats, const EngineConfig &config) {
  std::vector<WindowSummary> out(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    CompletionBounds bounds{stats.vmin[i], stats.vmax[i]};
    if (config.value_bounds_override) {
      bounds = {config.value_bounds_override->first, config.value_bounds_override->second};
    }
    out[i] = summarize({stats.mu_z[i], stats.sigma_z[i], stats.mu_b[i]}, bounds, stats.m);
    out[i].present = stats.present[i];
  }
  return out;
}

WindowTable::WindowTable(std::vector<WindowSummary> windows, std::size_t m, double eps)
    : windows_(std::move(windows)), m_(m) {
  const std::size_t len = windows_.size();
  complete_.resize(len);
  usable_.resize(len);
  full_var_.resize(len);
  full_flat_.resize(len);
  bound_.resize(len);
  bound_flat_.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    const auto &w = windows_[i];
    const bool complete = w.present == m;
    complete_[i] = complete ? 1.0 : 0.0;
    usable_[i] = w.present > 0 ? 1.0 : 0.0;
    full_var_[i] = complete ? w.variance : 1.0;
    full_flat_[i] = complete && detail::negligible(w.variance, w.mean_square, eps) ? 1.0 : 0.0;
    bound_[i] = !complete && w.present > 0 ? w.variance_bound : 1.0;
    const double c = w.bounds.c();
    bound_flat_[i] =
        !complete && w.present > 0 && w.variance_bound <= eps * (w.mean_square + 0.25 * c * c)
            ? 1.0
            : 0.0;
  }
}

namespace {

// Anchor-side inputs to the kernel, with choices as 0/1 multipliers:
// loop-invariant bool selects keep GCC from vectorizing. Divisors are kept
// nonzero so a zeroed term never turns into inf * 0.
struct AnchorTerms {
  double side;          // 1 if the anchor window is complete
  double case2_scale;   // 0 if the complete anchor is flat
  double full_var;
  double f_scale;       // 0 if the anchor's completed-variance bound is degenerate
  double bound;
};

// Same expressions as restricted_stats / lb_from_restricted, evaluated for
// every j and selected afterwards. Pairs without overlap or with an
// all-missing window come out NaN and are redone by the caller.
MDMS_HOT_CLONES
void lb_kernel(std::size_t len, double md, double eps, const AnchorTerms &a,
               const double *__restrict qz, const double *__restrict qb,
               const double *__restrict bz, const double *__restrict zb,
               const double *__restrict bx, const double *__restrict xb,
               const double *__restrict complete, const double *__restrict usable,
               const double *__restrict full_var, const double *__restrict full_flat,
               const double *__restrict bound, const double *__restrict bound_flat,
               double *__restrict d) {
  const double side = a.side;
  const double case2_scale = a.case2_scale;
  const double anchor_full_var = a.full_var;
  const double f_scale = a.f_scale;
  const double anchor_bound = a.bound;
  for (std::size_t j = 0; j < len; ++j) {
    const double r = qb[j];
    const double inv = 1.0 / r;
    const double ui = zb[j] * inv;
    const double uj = bz[j] * inv;
    const double msq_i = xb[j] * inv;
    const double msq_j = bx[j] * inv;
    const double vi = std::max(msq_i - ui * ui, 0.0);
    const double vj = std::max(msq_j - uj * uj, 0.0);
    const bool flat_i = vi <= eps * msq_i;
    const bool flat_j = vj <= eps * msq_j;
    const bool defined = !flat_i & !flat_j;
    const double cov = qz[j] * inv - ui * uj;
    const double q = std::min(std::max(cov / std::sqrt(vi * vj), -1.0), 1.0);

    const double flat_case1 = (flat_i & flat_j) ? 0.0 : 2.0 * md;
    const double case1 = defined ? 2.0 * md * (1.0 - q) : flat_case1;
    const double shrink = (defined & (q > 0.0)) ? 1.0 - q * q : 1.0;

    const double case2_i = r * vi / anchor_full_var * shrink * case2_scale;
    const double case2_j_raw = r * vj / full_var[j] * shrink;
    const double case2_j = full_flat[j] != 0.0 ? 0.0 : case2_j_raw;
    const double fi = vi / anchor_bound * f_scale;
    const double fj_raw = vj / bound[j];
    const double fj = bound_flat[j] != 0.0 ? 0.0 : fj_raw;
    const double case3 = std::max(r * std::max(fi, fj) * shrink, 0.0);

    const double partial = complete[j] != 0.0 ? case2_j : case3;
    const double one_side = side != 0.0 ? case2_i : partial;
    const double v = r == md ? case1 : one_side;
    const bool regular = (r > 0.5) & (usable[j] != 0.0);
    d[j] = regular ? v : kMissing;
  }
}

} // namespace

namespace {

CaseLabel pair_label(const WindowTable &windows, std::size_t i, std::size_t j, double qb) {
  const std::size_t m = windows.window();
  const std::size_t pi = windows[i].present;
  const std::size_t pj = windows[j].present;
  if (pi == 0 || pj == 0) {
    return CaseLabel::degenerate_all_missing;
  }
  if (!(qb > 0.5)) {
    return CaseLabel::degenerate_no_overlap;
  }
  if (pi == m && pj == m) {
    return CaseLabel::case1_complete;
  }
  if (pi == m || pj == m) {
    return CaseLabel::case2_one_missing;
  }
  return CaseLabel::case3_both_missing;
}

} // namespace

void fill_lb_distances(const DotProductRow &row, const WindowTable &windows,
                       const EngineConfig &config, std::span<double> d) {
  const std::size_t len = row.size();
  const std::size_t i = row.anchor();
  const auto &w = windows;
  const bool full_flat = w.full_flat_[i] != 0.0;
  const bool bound_flat = w.bound_flat_[i] != 0.0;
  const AnchorTerms terms{w.complete_[i], full_flat ? 0.0 : 1.0, full_flat ? 1.0 : w.full_var_[i],
                          bound_flat ? 0.0 : 1.0, bound_flat ? 1.0 : w.bound_[i]};
  lb_kernel(len, static_cast<double>(row.window()), config.epsilon, terms,
            row.stream(DotStream::qz).data(), row.stream(DotStream::qb).data(),
            row.stream(DotStream::bz).data(), row.stream(DotStream::zb).data(),
            row.stream(DotStream::bx).data(), row.stream(DotStream::xb).data(),
            w.complete_.data(), w.usable_.data(), w.full_var_.data(), w.full_flat_.data(),
            w.bound_.data(), w.bound_flat_.data(), d.data());

  // Only no-overlap and all-missing pairs are NaN at this point.
  const bool anchor_usable = w.usable_[i] != 0.0;
  const double all_missing = degenerate_all_missing(config.all_missing_policy).sq;
  for (std::size_t j = 0; j < len; ++j) {
    if (std::isnan(d[j])) {
      d[j] = anchor_usable && w.usable_[j] != 0.0 ? 0.0 : all_missing;
    }
  }
}

void calculate_lb_distance_profile(const DotProductRow &row, const WindowTable &windows,
                                   const EngineConfig &config, DistanceProfileBuffer &out) {
  const std::size_t len = row.size();
  out.d.resize(len);
  out.cases.resize(len);
  fill_lb_distances(row, windows, config, out.d);
  const double *qb = row.stream(DotStream::qb).data();
  for (std::size_t j = 0; j < len; ++j) {
    out.cases[j] = pair_label(windows, row.anchor(), j, qb[j]);
  }
}

CaseLabel WindowTable::label(const DotProductRow &row, std::size_t j) const {
  return pair_label(*this, row.anchor(), j, row.stream(DotStream::qb)[j]);
}

void apply_exclusion_zone(std::span<double> d, std::size_t anchor, const EngineConfig &config) {
  if (d.empty()) {
    return;
  }
  const std::size_t w = config.exclusion_half_width();
  const std::size_t lo = anchor > w ? anchor - w : 0;
  const std::size_t hi = std::min(d.size() - 1, anchor + w);
  for (std::size_t j = lo; j <= hi; ++j) {
    d[j] = kExcluded;
  }
}

std::size_t anchor_block_length(std::size_t m) noexcept {
  return std::max<std::size_t>(2048, 8 * m);
}

namespace {

LowerBoundMatrixProfile empty_profile(std::size_t len, const EngineConfig &config) {
  LowerBoundMatrixProfile p;
  p.m = config.m;
  p.exclusion_half_width = config.exclusion_half_width();
  p.values.assign(len, kExcluded);
  p.index.assign(len, -1);
  p.cases.assign(len, CaseLabel::case1_complete);
  p.all_missing.assign(len, 0);
  return p;
}

void finish_values(LowerBoundMatrixProfile &p) {
  for (auto &v : p.values) {
    if (v != kExcluded) {
      v = std::sqrt(std::max(v, 0.0));
    }
  }
}

} // namespace

LowerBoundMatrixProfile mdms(const MissingValueSeries &series, const EngineConfig &config,
                             unsigned threads) {
  const std::size_t n = series.size();
  validate(config, n);
  const std::size_t m = config.m;

  // z-normalized distances and the completion bounds are shift-invariant;
  // centering keeps the rolling sums small.
  double center = 0.0;
  std::size_t present = 0;
  for (double v : series.values()) {
    if (!is_missing(v)) {
      center += v;
      ++present;
    }
  }
  center = present > 0 ? center / static_cast<double>(present) : 0.0;
  std::vector<double> shifted(series.values().begin(), series.values().end());
  for (auto &v : shifted) {
    v -= center; // NaN stays NaN
  }
  const MissingValueSeries centered(std::move(shifted));
  EngineConfig cfg = config;
  if (cfg.value_bounds_override) {
    cfg.value_bounds_override->first -= center;
    cfg.value_bounds_override->second -= center;
  }

  const auto aux = build_auxiliary(centered);
  const auto stats = compute_window_stats(centered, aux, m);
  const WindowTable windows(summarize_windows(stats, cfg), m, cfg.epsilon);
  const auto first = std::make_shared<const FirstRows>(FirstRows::compute(aux, m));
  const std::size_t len = n - m + 1;

  auto profile = empty_profile(len, cfg);
  for (std::size_t i = 0; i < len; ++i) {
    profile.all_missing[i] = stats.present[i] == 0 ? 1 : 0;
  }

  const std::size_t block = anchor_block_length(m);
  const std::size_t blocks = (len + block - 1) / block;
  std::atomic<std::size_t> next_block{0};

  auto worker = [&]() {
    std::vector<double> buffer(len);
    for (std::size_t b = next_block++; b < blocks; b = next_block++) {
      const std::size_t start = b * block;
      const std::size_t stop = std::min(len, start + block);
      DotProductRow row(aux, m, first, start);
      for (std::size_t i = start; i < stop; ++i) {
        if (i > start) {
          row.advance(aux);
        }
        fill_lb_distances(row, windows, cfg, buffer);
        apply_exclusion_zone(buffer, i, cfg);
        double best = kExcluded;
        std::int64_t best_j = -1;
        for (std::size_t j = 0; j < len; ++j) {
          if (buffer[j] < best) {
            best = buffer[j];
            best_j = static_cast<std::int64_t>(j);
          }
        }
        profile.values[i] = best;
        profile.index[i] = best_j;
        if (best_j >= 0) {
          profile.cases[i] = windows.label(row, static_cast<std::size_t>(best_j));
        } else if (profile.all_missing[i]) {
          profile.cases[i] = CaseLabel::degenerate_all_missing;
        }
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back(worker);
    }
  }

  if (cfg.refine_minima) {
    for (std::size_t i = 0; i < len; ++i) {
      if (profile.index[i] < 0) {
        continue;
      }
      const auto j = static_cast<std::size_t>(profile.index[i]);
      const auto v = pair_lb_sqdist(centered.window(i, m), centered.window(j, m), cfg);
      profile.values[i] = v.sq;
      profile.cases[i] = v.label;
    }
  }
  finish_values(profile);
  return profile;
}

LowerBoundMatrixProfile stomp_exact(const MissingValueSeries &series, const EngineConfig &config,
                                    unsigned threads) {
  if (!series.complete()) {
    throw std::invalid_argument("stomp_exact requires a series without missing values");
  }
  return mdms(series, config, threads);
}

LowerBoundMatrixProfile brute_force_profile(const MissingValueSeries &series,
                                            const EngineConfig &config) {
  const std::size_t n = series.size();
  validate(config, n);
  const std::size_t m = config.m;
  const double cost = static_cast<double>(n) * static_cast<double>(n - m) * static_cast<double>(m);
  if (cost > kBruteForceBudget) {
    throw InfeasibleError("brute-force profile over budget: n=" + std::to_string(n) +
                          " m=" + std::to_string(m));
  }
  const std::size_t len = n - m + 1;
  const std::size_t w = config.exclusion_half_width();

  std::vector<WindowSummary> windows(len);
  for (std::size_t i = 0; i < len; ++i) {
    windows[i] = summarize_window(series.window(i, m), config.value_bounds_override);
  }

  auto profile = empty_profile(len, config);
  for (std::size_t i = 0; i < len; ++i) {
    profile.all_missing[i] = windows[i].present == 0 ? 1 : 0;
    if (windows[i].present == 0) {
      profile.cases[i] = CaseLabel::degenerate_all_missing;
    }
  }

  // Pairs are visited with i ascending, then j ascending, so each position
  // sees its candidates in increasing index order and a strict comparison
  // keeps the smallest index on ties.
  auto offer = [&profile](std::size_t at, std::size_t other, const LbValue &v) {
    if (v.sq < profile.values[at]) {
      profile.values[at] = v.sq;
      profile.index[at] = static_cast<std::int64_t>(other);
      profile.cases[at] = v.label;
    }
  };
  for (std::size_t i = 0; i < len; ++i) {
    const auto a = series.window(i, m);
    for (std::size_t j = i + w + 1; j < len; ++j) {
      const auto b = series.window(j, m);
      LbValue v;
      if (windows[i].present == 0 || windows[j].present == 0) {
        v = degenerate_all_missing(config.all_missing_policy);
      } else {
        const auto rs = restricted_stats(a, b, config.epsilon);
        if (rs.r_count == 0) {
          v = {0.0, CaseLabel::degenerate_no_overlap};
        } else {
          v = lb_from_restricted(rs, windows[i], windows[j], m, config.epsilon);
        }
      }
      offer(i, j, v);
      offer(j, i, v);
    }
  }
  finish_values(profile);
  return profile;
}

} // namespace mdms
