#pragma once

#include "mdms/lb_distance.hpp"
#include "mdms/series.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace mdms {

// Written into distance buffers inside the exclusion zone. Compares greater
// than any attainable squared distance, so it never wins a min-merge.
inline constexpr double kExcluded = std::numeric_limits<double>::infinity();

// Entry j is query . series[j, j + query.size()). Direct O(n m) evaluation.
std::vector<double> sliding_dot_product(std::span<const double> query,
                                        std::span<const double> series);

// First length-m window of a against every window of b.
std::vector<double> init_dot_products(std::span<const double> a, std::span<const double> b,
                                      std::size_t m);

// The six dot-product streams, named by (left series, right series):
// qz = Z.Z, qb = B.B, bz = B.Z, zb = Z.B, bx = B.X, xb = X.B.
enum class DotStream : std::uint8_t { qz, qb, bz, zb, bx, xb };
inline constexpr std::size_t kDotStreams = 6;

// Rows of all six streams for anchor 0, frozen at startup.
struct FirstRows {
  std::array<std::vector<double>, kDotStreams> rows;

  static FirstRows compute(const AuxiliarySeries &aux, std::size_t m);
};

// Dot products of one anchor window against every window, for all six
// streams. advance() moves to the next anchor in O(n).
class DotProductRow {
public:
  // Row for anchor 0; computes the frozen first rows.
  DotProductRow(const AuxiliarySeries &aux, std::size_t m);
  // Row for an arbitrary anchor, computed directly; shares frozen first rows.
  DotProductRow(const AuxiliarySeries &aux, std::size_t m, std::shared_ptr<const FirstRows> first,
                std::size_t anchor);

  void advance(const AuxiliarySeries &aux);

  std::size_t anchor() const noexcept { return anchor_; }
  std::size_t size() const noexcept { return v_[0].size(); }
  std::size_t window() const noexcept { return m_; }

  std::span<const double> stream(DotStream s) const noexcept {
    return v_[static_cast<std::size_t>(s)];
  }
  const FirstRows &first_rows() const noexcept { return *first_; }
  const std::shared_ptr<const FirstRows> &shared_first_rows() const noexcept { return first_; }

  PairDotProducts at(std::size_t j) const noexcept {
    return {v_[0][j], v_[1][j], v_[2][j], v_[3][j], v_[4][j], v_[5][j]};
  }

private:
  std::array<std::vector<double>, kDotStreams> v_;
  std::shared_ptr<const FirstRows> first_;
  std::size_t m_ = 0;
  std::size_t anchor_ = 0;
};

// Direct dot product of anchor window i against window j for one stream;
// reference for checking rolling state.
double direct_dot(const AuxiliarySeries &aux, DotStream s, std::size_t i, std::size_t j,
                  std::size_t m);

// One anchor's squared lower-bound distance profile plus the case of each
// entry. Reused across anchors; every entry is rewritten each time.
struct DistanceProfileBuffer {
  std::vector<double> d;
  std::vector<CaseLabel> cases;
};

// Per-window summaries for the dispatcher: bounds from the present extrema,
// or the configured override.
std::vector<WindowSummary> summarize_windows(const WindowStats &stats, const EngineConfig &config);

// Column-wise copy of the window summaries consumed by the distance kernel.
class WindowTable {
public:
  WindowTable(std::vector<WindowSummary> windows, std::size_t m, double eps);

  std::size_t size() const noexcept { return windows_.size(); }
  std::size_t window() const noexcept { return m_; }
  const WindowSummary &operator[](std::size_t i) const noexcept { return windows_[i]; }
  std::span<const WindowSummary> summaries() const noexcept { return windows_; }

  // Case of the pair (row anchor, window j).
  CaseLabel label(const DotProductRow &row, std::size_t j) const;

private:
  friend void fill_lb_distances(const DotProductRow &, const WindowTable &, const EngineConfig &,
                                std::span<double>);

  std::vector<WindowSummary> windows_;
  std::size_t m_;
  // 1.0 / 0.0 flags stored as doubles so the kernel stays branch-free.
  std::vector<double> complete_, usable_;
  std::vector<double> full_var_, full_flat_;
  std::vector<double> bound_, bound_flat_;
};

// d[j] is the squared lower-bound distance between the row's anchor and
// window j; identical to lb_sqdist on the same dot products.
void calculate_lb_distance_profile(const DotProductRow &row, const WindowTable &windows,
                                   const EngineConfig &config, DistanceProfileBuffer &out);

// Distances only; d must hold row.size() entries.
void fill_lb_distances(const DotProductRow &row, const WindowTable &windows,
                       const EngineConfig &config, std::span<double> d);

void apply_exclusion_zone(std::span<double> d, std::size_t anchor, const EngineConfig &config);

struct LowerBoundMatrixProfile {
  std::size_t m = 0;
  std::size_t exclusion_half_width = 0;
  // Euclidean (square-rooted) distances; kExcluded where no neighbor exists.
  std::vector<double> values;
  // -1 where no neighbor exists.
  std::vector<std::int64_t> index;
  // Case of the minimizing pair.
  std::vector<CaseLabel> cases;
  // Window has no present value.
  std::vector<std::uint8_t> all_missing;

  std::size_t size() const noexcept { return values.size(); }
  bool has_neighbor(std::size_t i) const noexcept { return index[i] >= 0; }
};

// Lower-bound matrix profile. Anchors are processed in fixed-size contiguous
// blocks, each seeded by a directly computed row; threads only decide which
// worker runs which block, so the output does not depend on the thread count.
LowerBoundMatrixProfile mdms(const MissingValueSeries &series, const EngineConfig &config,
                             unsigned threads = 1);

// Exact matrix profile of a complete series. Throws std::invalid_argument if
// any value is missing.
LowerBoundMatrixProfile stomp_exact(const MissingValueSeries &series, const EngineConfig &config,
                                    unsigned threads = 1);

// Largest n * (n - m) * m the brute-force oracle accepts.
inline constexpr double kBruteForceBudget = 1e9;

// Reference profile: every pair evaluated from explicitly extracted windows
// with no rolling state. Throws InfeasibleError beyond kBruteForceBudget.
LowerBoundMatrixProfile brute_force_profile(const MissingValueSeries &series,
                                            const EngineConfig &config);

// Block length used to partition anchors.
std::size_t anchor_block_length(std::size_t m) noexcept;

} // namespace mdms
