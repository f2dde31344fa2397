#pragma once

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pvstab/system.hpp"

namespace pvstab {

struct StabilityVerdict {
  double max_real = 0.0;
  bool stable = false;
  // |max_real| <= margin_tol: the verdict sits inside the decision band and
  // should be treated as numerically undecided.
  bool marginal = false;
  std::vector<std::complex<double>> dominant;
  double margin_tol = 0.0;
};

// Classify a characteristic polynomial: stable iff every root satisfies
// Re(s) < -margin_tol.  margin_tol may be zero for a raw sign test.
StabilityVerdict classify(const Polynomial& char_poly, double margin_tol);

// Verdicts for selected counts of one group, all other counts fixed.
// Valid counts lie in [1, 10000].
std::vector<StabilityVerdict> sweep_counts(const SystemModel& m,
                                           const std::string& swept_label,
                                           const std::vector<int>& counts,
                                           double margin_tol);

struct RangeBoundary {
  int stable_side = 0;
  int unstable_side = 0;
  double max_real_stable = 0.0;    // re-verified, non-affine evaluation
  double max_real_unstable = 0.0;  // re-verified, non-affine evaluation
};

struct StabilityRange {
  std::string swept_label;
  std::map<std::string, int> fixed_counts;
  std::vector<std::pair<int, int>> stable_intervals;  // inclusive [lo, hi]
  std::vector<RangeBoundary> boundaries;
  int n_max = 0;
  double margin_tol = 0.0;
  // first_unstable is n_max + 1 and last_unstable is 0 when every count in
  // [1, n_max] is stable.
  int first_unstable = 0;
  int last_unstable = 0;
};

// Exhaustive sweep over counts 1..n_max.  Every boundary is re-verified by
// a fresh (non-affine) evaluation on both sides.
StabilityRange find_ranges(const SystemModel& m,
                           const std::string& swept_label, int n_max,
                           double margin_tol);

// find_ranges for each delay value: the swept group's Td is overridden and
// the system recomposed.  Delays are in seconds, each >= 0.
std::vector<StabilityRange> delay_sweep(const SystemModel& m,
                                        const std::string& swept_label,
                                        const std::vector<double>& delays_s,
                                        int n_max, double margin_tol);

struct LocusRow {
  int count = 0;
  int branch_id = 0;
  std::complex<double> pole;
};

struct PoleLocus {
  std::string swept_label;
  int count_min = 0;
  int count_max = 0;
  int top_k = 0;
  std::vector<LocusRow> rows;  // ordered by (count, branch_id)
  std::vector<std::string> warnings;
};

// Track the top_k dominant poles while the group count steps from count_min
// to count_max.  Branches continue by nearest-neighbour matching; poles that
// newly enter the top set open fresh branch ids.
PoleLocus locus_trace(const SystemModel& m, const std::string& swept_label,
                      int count_min, int count_max, int top_k);

}  // namespace pvstab
