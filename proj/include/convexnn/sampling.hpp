#pragma once

#include <cstdint>

#include "convexnn/pattern.hpp"
#include "convexnn/rng.hpp"

namespace cvxnn {

/// Draws `count` standard Gaussian directions, records 1[X u >= 0] per draw
/// and deduplicates. Deterministic given the seed. With threads > 1 the
/// draws are split into shards with derived seeds and merged in canonical
/// order; the result depends on the shard count, not on scheduling.
PatternSet sample_gaussian(const DataMatrix& X, std::size_t count, std::uint64_t seed,
                           int shards = 1);

struct ImageShape {
  int height = 0;
  int width = 0;
};

/// Each draw places iid Gaussian weights on a randomly positioned
/// filter-support window of the image grid (zeros elsewhere) and records
/// the sign pattern of X u. Rows of X are images flattened row-major.
PatternSet sample_convolutional(const DataMatrix& X, ImageShape image, ImageShape filter,
                                std::size_t count, std::uint64_t seed);

/// Number of random directions sufficient to hit every pattern with
/// probability 1 - epsilon: ceil(theta_bar^-1 * P * log(P / epsilon)).
std::int64_t sample_size_threshold(std::int64_t P, double theta_bar, double epsilon);

/// Zonotope extreme point generated by direction v: X^T 1[X v >= 0].
Eigen::VectorXd zonotope_vertex(const DataMatrix& X, const Eigen::VectorXd& v);

struct ZonotopeReport {
  std::int64_t vertex_count_estimate = 0;      // distinct patterns observed
  Eigen::VectorXd solid_angle_estimates;       // aligned with the pattern set
  Eigen::VectorXd standard_errors;
  double theta_bar_estimate = 0.0;             // P * min positive estimate
  std::int64_t mc_samples = 0;
  std::int64_t unmatched_draws = 0;            // draws outside the given set
};

/// Monte-Carlo estimate of the Gaussian solid angles of the normal cones at
/// the zonotope vertices: fraction of draws landing on each pattern.
ZonotopeReport estimate_solid_angles(const DataMatrix& X, const PatternSet& patterns,
                                     std::int64_t mc_samples, std::uint64_t seed);

}  // namespace cvxnn
