#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace mdms {

// Missing values are stored as quiet NaN, both in series and in per-window
// outputs that can be undefined (e.g. extrema of an all-missing window).
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

// Ordered real-or-missing values. Never holds an infinity and never shorter
// than two points.
class MissingValueSeries {
public:
  MissingValueSeries() = default;
  explicit MissingValueSeries(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  bool missing(std::size_t i) const noexcept { return is_missing(values_[i]); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> window(std::size_t start, std::size_t m) const {
    return std::span<const double>(values_).subspan(start, m);
  }

  std::size_t missing_count() const noexcept;
  bool complete() const noexcept { return missing_count() == 0; }

  friend bool operator==(const MissingValueSeries &a, const MissingValueSeries &b);

private:
  std::vector<double> values_;
};

struct CsvFormat {
  char delimiter = ',';
  // Column holding the value; unset selects the last field of each record,
  // which covers both "value" and "timestamp,value" layouts.
  std::optional<std::size_t> value_column;
};

// One record per line. A first row whose value field is neither numeric nor a
// missing token is treated as a header. Missing tokens: empty field, "nan"
// in any letter case.
MissingValueSeries parse_series(std::istream &in, const CsvFormat &format = {});
MissingValueSeries parse_series(std::string_view text, const CsvFormat &format = {});

// Zero-filled values, their squares and the presence indicator.
struct AuxiliarySeries {
  std::vector<double> z;
  std::vector<double> x;
  std::vector<double> bind;

  std::size_t size() const noexcept { return z.size(); }
};

AuxiliarySeries build_auxiliary(const MissingValueSeries &series);

struct MeanStd {
  std::vector<double> means;
  std::vector<double> stds;
};

// Population mean/std of every length-m window, one pass over compensated
// prefix sums.
MeanStd sliding_mean_std(std::span<const double> values, std::size_t m);

struct Extrema {
  std::vector<double> vmax;
  std::vector<double> vmin;
};

// Max/min over the present values of each window; kMissing where a window
// has no present value.
Extrema sliding_extrema(const MissingValueSeries &series, std::size_t m);

struct WindowStats {
  std::size_t m = 0;
  std::vector<double> mu_z, sigma_z;
  std::vector<double> mu_b;
  // Kept for completeness; no distance formula reads it.
  std::vector<double> sigma_b;
  std::vector<std::uint32_t> present;
  std::vector<double> vmax, vmin;

  std::size_t size() const noexcept { return mu_z.size(); }
};

WindowStats compute_window_stats(const MissingValueSeries &series, const AuxiliarySeries &aux,
                                 std::size_t m);

enum class AllMissingPolicy { bound_zero, flag_invalid };

struct EngineConfig {
  std::size_t m = 0;
  std::size_t exclusion_divisor = 4;
  std::optional<std::pair<double, double>> value_bounds_override;
  // Relative tolerance for degeneracy tests: a variance counts as zero when
  // it is below epsilon times the corresponding mean square.
  double epsilon = 1e-12;
  AllMissingPolicy all_missing_policy = AllMissingPolicy::bound_zero;
  // Recompute each reported minimum from the raw windows after the rolling
  // pass. Selection is unaffected; only the stored distances change.
  bool refine_minima = true;

  std::size_t exclusion_half_width() const noexcept {
    return exclusion_divisor == 0 ? 0 : m / exclusion_divisor;
  }
};

// Throws InfeasibleError unless 3 <= m <= n/2, the divisor is positive and
// the bounds override (if any) is ordered and finite.
void validate(const EngineConfig &config, std::size_t n);

} // namespace mdms
