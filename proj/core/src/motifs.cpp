#include "mdms/motifs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace mdms {

std::vector<MotifPair> top_k_motifs(const LowerBoundMatrixProfile &profile, std::size_t k) {
  if (k == 0) {
    throw std::invalid_argument("top_k_motifs: k must be at least 1");
  }
  std::vector<MotifPair> candidates;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (!profile.has_neighbor(i) || profile.all_missing[i] || !std::isfinite(profile.values[i])) {
      continue;
    }
    const auto j = static_cast<std::size_t>(profile.index[i]);
    if (profile.all_missing[j]) {
      continue;
    }
    candidates.push_back({std::min(i, j), std::max(i, j), profile.values[i], 0, profile.cases[i]});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const MotifPair &x, const MotifPair &y) {
    return std::tie(x.distance, x.pos_a, x.pos_b) < std::tie(y.distance, y.pos_a, y.pos_b);
  });

  const std::size_t w = profile.exclusion_half_width;
  auto near = [w](std::size_t p, std::size_t q) { return (p > q ? p - q : q - p) <= w; };

  std::vector<MotifPair> out;
  for (const auto &c : candidates) {
    if (out.size() == k) {
      break;
    }
    const bool clashes = std::any_of(out.begin(), out.end(), [&](const MotifPair &r) {
      return near(c.pos_a, r.pos_a) || near(c.pos_a, r.pos_b) || near(c.pos_b, r.pos_a) ||
             near(c.pos_b, r.pos_b);
    });
    if (clashes) {
      continue;
    }
    out.push_back(c);
    out.back().rank = out.size();
  }
  return out;
}

} // namespace mdms
