#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bidopt/landscape.hpp"

namespace bidopt {

/// Optimal value grid V(t, b): expected clicks with t auctions and budget b
/// remaining under the optimal bid policy. Row t = 0 is all zeros; V is
/// nondecreasing in both t and b.
struct ValueTable {
  int t_max = 0;        // episode length T
  std::int64_t b_max = 0;  // budget B
  std::vector<double> values;  // (t_max+1) x (b_max+1), row-major by t

  double at(int t, std::int64_t b) const { return values[static_cast<std::size_t>(t) * (b_max + 1) + b]; }
  std::span<const double> row(int t) const {
    return {values.data() + static_cast<std::size_t>(t) * (b_max + 1),
            static_cast<std::size_t>(b_max + 1)};
  }
};

/// Value differential grid D(t, b) = V(t, b+1) - V(t, b), the marginal click
/// value of one budget unit. Shape (t_max+1) x b_count with b in 0..b_count-1.
struct DiffTable {
  int t_max = 0;
  std::int64_t b_count = 0;
  std::vector<double> diffs;

  double at(int t, std::int64_t b) const { return diffs[static_cast<std::size_t>(t) * b_count + b]; }
};

/// State of one bid decision: t remaining auctions (including the current
/// one), b remaining budget, theta the pCTR of the current request.
struct BidDecisionInput {
  int t = 0;
  std::int64_t b = 0;
  double theta = 0.0;
};

enum class SolveMethod {
  kThreshold,  // per-cell scan stopping at the first negative g(delta)
  kEnumerate   // full enumeration of the bid action, kept for equivalence tests
};

struct SolveOptions {
  SolveMethod method = SolveMethod::kThreshold;
  // Plan guard: (T+1)*(B+1) cells above this cap aborts with a hint to use
  // the neural approximation instead of the exact table.
  std::int64_t max_cells = 200'000'000;
};

/// Solves the value recursion
///   V(t, b) = max_{0 <= a <= min(delta_max, b)}
///             sum_{d <= a} m(d) * (theta_avg + V(t-1, b-d))
///             + sum_{d > a} m(d) * V(t-1, b),
/// with V(0, .) = 0. The inner maximum is taken at the largest bid a whose
/// marginal gain g(a) = theta_avg + V(t-1, b-a) - V(t-1, b) is still
/// nonnegative, so each cell costs O(a*) instead of a full action sweep.
/// Both solve methods produce bit-identical tables.
ValueTable solve_value_table(const LandscapeModel& landscape, double theta_avg, int T,
                             std::int64_t B, const SolveOptions& opts = {});

/// D(t, b) = V(t, b+1) - V(t, b) for b in 0..B-1.
DiffTable diff_table(const ValueTable& v);

/// Optimal bid for one request: the largest delta in [0, min(delta_max, b)]
/// with theta + V(t-1, b-delta) - V(t-1, b) >= 0. Ties at zero resolve toward
/// bidding. Throws std::invalid_argument at t = 0 (terminal state).
int bid_rlb(const ValueTable& v, const BidDecisionInput& input, int delta_max);

/// One enumerated pCTR level of a finite feature space.
struct ThetaLevel {
  double theta = 0.0;
  double prob = 0.0;
};

/// Exact expectimax solution over an enumerated feature space: no averaged-CTR
/// approximation. Serves as the independent oracle for solve_value_table and
/// the policy comparisons. marginal[t][b] = sum_x p(x) * per_x[t][b][x].
struct ExactValueGrids {
  int t_max = 0;
  std::int64_t b_max = 0;
  std::size_t n_theta = 0;
  std::vector<double> marginal;  // (t_max+1) x (b_max+1)
  std::vector<double> per_x;     // (t_max+1) x (b_max+1) x n_theta

  double marginal_at(int t, std::int64_t b) const {
    return marginal[static_cast<std::size_t>(t) * (b_max + 1) + b];
  }
  double per_x_at(int t, std::int64_t b, std::size_t k) const {
    return per_x[(static_cast<std::size_t>(t) * (b_max + 1) + b) * n_theta + k];
  }
};

/// Brute-force expectimax over all (t, b, theta) states by full action
/// enumeration. Guarded to small instances; throws when the plan exceeds
/// max_states.
ExactValueGrids brute_force_value(const LandscapeModel& landscape,
                                  const std::vector<ThetaLevel>& theta_levels, int T,
                                  std::int64_t B, std::int64_t max_states = 50'000'000);

// Binary persistence with a small header (kind, T, B, FNV-1a checksum) plus a
// text export for debugging. Layouts documented in the README.
void save_value_table(const std::string& path, const ValueTable& v);
ValueTable load_value_table(const std::string& path);
void save_diff_table(const std::string& path, const DiffTable& d);
DiffTable load_diff_table(const std::string& path);
void export_value_table_text(const std::string& path, const ValueTable& v);

}  // namespace bidopt
