#pragma once

#include "mdms/series.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace mdms {

// Interior gaps become straight lines between their bounding present values;
// leading and trailing gaps repeat the nearest present value. Throws
// InfeasibleError when nothing is present.
MissingValueSeries linear_impute(const MissingValueSeries &series);

// Thresholds for the three pseudo-missing rules. Rules run in order spikes,
// plateaus, variance bursts; each later rule sees the earlier marks as gaps.
struct PseudoMissingRules {
  // |x - median of its 5-point neighborhood| > factor * series MAD.
  double spike_mad_factor = 8.0;
  // Runs of at least this many bit-identical consecutive values.
  std::size_t plateau_min_run = 16;
  // Rolling window for the variance rule; usually the motif length.
  std::size_t variance_window = 0;
  // Window variance > factor * median window variance.
  double variance_factor = 6.0;

  bool spikes = true;
  bool plateaus = true;
  bool variance_bursts = true;

  static PseudoMissingRules for_window(std::size_t m) {
    PseudoMissingRules r;
    r.variance_window = m;
    return r;
  }
};

// Returns a copy with pseudo-missing points turned into gaps. Existing gaps
// are kept. Throws std::invalid_argument on non-positive thresholds.
MissingValueSeries mark_pseudo_missing(const MissingValueSeries &series,
                                       const PseudoMissingRules &rules);

enum class MaskMode { random_points, uniform_blocks, targeted_block };

struct MaskSpec {
  MaskMode mode = MaskMode::random_points;
  // random_points: points to mask; uniform_blocks: number of blocks.
  std::optional<std::size_t> count;
  // Alternative to count, as a fraction of the series length. For
  // uniform_blocks this fixes the masked total; blocks = round(f * n / p).
  std::optional<double> fraction;
  std::size_t block_length = 0;
  // Center of the targeted block.
  std::optional<std::size_t> target;
  std::uint64_t seed = 0;
};

// Deterministic in (series, spec). random_points draws among present values
// without replacement, so exactly `count` values become gaps. uniform_blocks
// places one block per equal slot with seeded jitter, keeping blocks
// separated. targeted_block masks [target - p/2, target - p/2 + p).
// Throws InfeasibleError when the mask does not fit.
MissingValueSeries apply_mask(const MissingValueSeries &series, const MaskSpec &spec);

} // namespace mdms
