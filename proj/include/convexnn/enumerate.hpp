#pragma once

#include <cstdint>

#include "convexnn/lp.hpp"
#include "convexnn/pattern.hpp"

namespace cvxnn {

struct EnumerateOptions {
  Eigen::Index rank_max = 8;   // guardrail; count_bound(200, 8) is already ~1e9
  double rank_tol = 1e-10;
  double slack_tol = 1e-7;     // interior margin for a cell to count as realizable
};

/// Upper bound on the number of arrangement patterns of n hyperplanes
/// through the origin in rank-r space: 2 * sum_{k=0}^{r-1} C(n-1, k).
/// Exact in 64 bits; throws std::overflow_error beyond that.
std::uint64_t count_bound(std::uint64_t n, std::uint64_t r);

struct RealizabilityResult {
  bool realizable = false;
  double slack = 0.0;
  std::optional<Eigen::VectorXd> witness;
};

/// Checks whether a bit pattern is realized by some direction u with
/// (2*diag(bits) - I) X u >= 0 holding strictly on every nonzero row. Rows
/// that are numerically zero force bit 1 (the >= convention at 0). Solved
/// as a max-min-slack LP over the unit box.
RealizabilityResult realizability_check(const ArrangementPattern& pattern,
                                        const DataMatrix& X, double slack_tol = 1e-7);

/// Enumerates every realizable arrangement pattern of X. Works in the
/// rank-reduced subspace (patterns of X coincide with patterns of its left
/// singular factor) and inserts hyperplanes one at a time, keeping an
/// interior witness per cell; cells cut by a new hyperplane are certified
/// by the max-min-slack LP. Refuses when rank exceeds rank_max.
PatternSet enumerate_exact(const DataMatrix& X, const EnumerateOptions& opts = {});

}  // namespace cvxnn
