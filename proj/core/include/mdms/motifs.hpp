#pragma once

#include "mdms/engine.hpp"

#include <cstddef>
#include <vector>

namespace mdms {

struct MotifPair {
  std::size_t pos_a = 0; // pos_a < pos_b
  std::size_t pos_b = 0;
  double distance = 0.0;
  std::size_t rank = 0; // 1-based
  CaseLabel case_label = CaseLabel::case1_complete;
};

// Ranked, mutually non-overlapping motif pairs. Rank 1 is the global profile
// minimum with its stored neighbor; each later rank is the best remaining
// pair once an exclusion zone around both members of every reported pair is
// masked. Positions whose window (or whose neighbor's window) is entirely
// missing are never reported. Ties go to the smaller pos_a, then pos_b.
std::vector<MotifPair> top_k_motifs(const LowerBoundMatrixProfile &profile, std::size_t k);

} // namespace mdms
