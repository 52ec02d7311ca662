#pragma once

#include <optional>

#include <Eigen/Dense>

namespace cvxnn {

/// Result of the max-min-slack feasibility program
///   maximize t  s.t.  A u >= t * 1,  H u >= 0,  ||u||_inf <= 1,  t <= 1.
/// slack > 0 certifies an interior point of the strict rows inside the
/// polyhedron of the hard rows.
struct SlackResult {
  double slack = 0.0;   // optimal t
  Eigen::VectorXd u;    // maximizer, ||u||_inf <= 1
  bool solved = false;  // false on solver breakdown
};

/// Strict rows only. Rows of A are used as given (callers normalize when a
/// geometric margin is wanted). Small dense problems.
SlackResult max_min_slack(const Eigen::MatrixXd& A);

/// Strict rows A plus hard rows H that must stay nonnegative.
SlackResult max_min_slack(const Eigen::MatrixXd& A, const Eigen::MatrixXd& H);

/// Box-constrained least squares min ||M x - b||^2 over lo <= x <= hi,
/// by projected gradient with fixed step; exact enough for the tiny
/// feasibility systems it serves.
Eigen::VectorXd box_least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                                  double lo, double hi, int iters = 2000);

}  // namespace cvxnn
